#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bliss/config.hpp"
#include "bliss/eventify.hpp"
#include "bliss/types.hpp"
#include "bliss/weights.hpp"

namespace bliss {

/// Swaps inverted corners and clamps to the frame.
Roi validate_roi(Roi roi, int width, int height) noexcept;

/// Bounding box of set event bits dilated by `margin`; falls back to
/// `prev_roi`, then to the full frame, when no bit is set.
Roi predict_roi_heuristic(const EventMap& events, const std::optional<Roi>& prev_roi, int margin);

struct ConvSpec {
  int out_channels = 8;
  int kernel = 3;
  int stride = 2;
  int padding = 1;
};

struct TensorShape {
  int channels = 0;
  int height = 0;
  int width = 0;
  [[nodiscard]] std::size_t size() const noexcept {
    return static_cast<std::size_t>(channels) * static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
};

/// ROI network: conv x3 (ReLU) -> flatten -> fc (ReLU) -> fc -> 4 outputs.
/// The event map (and optionally the previous segmentation) is max-pooled by
/// `input_pool` before the first convolution.
struct RoiNetConfig {
  int frame_width = 640;
  int frame_height = 400;
  int input_pool = 2;
  bool use_prev_seg = true;
  std::vector<ConvSpec> convs{{8, 3, 2, 1}, {16, 3, 2, 1}, {32, 3, 2, 1}};
  std::vector<int> fc_hidden{256};
  static constexpr int kOutputs = 4;
  static constexpr std::uint64_t kMacBudget = 21'000'000;

  [[nodiscard]] int in_channels() const noexcept { return use_prev_seg ? 2 : 1; }
  [[nodiscard]] TensorShape input_shape() const;
  /// Output shape of every conv layer, in order.
  [[nodiscard]] std::vector<TensorShape> conv_shapes() const;
  [[nodiscard]] std::uint64_t macs() const;
  /// Tensor names and dims expected in a WeightBundle.
  [[nodiscard]] std::vector<TensorSpec> tensor_specs() const;

  void validate() const;
  static RoiNetConfig from_config(const KeyValueConfig& kv);
};

/// Network input in [channel][y][x] order: pooled events in {0,1} and, when
/// enabled, the previous labels scaled to [0,1] (max over each pool block).
std::vector<float> roi_net_input(const EventMap& events, const SegMap* prev_seg, const RoiNetConfig& cfg);

class RoiNet {
 public:
  /// Copies the tensors it needs; throws FormatError on a missing or misshapen tensor.
  RoiNet(const WeightBundle& weights, RoiNetConfig cfg);

  [[nodiscard]] const RoiNetConfig& config() const noexcept { return cfg_; }

  /// Raw outputs (normalised x1, y1, x2, y2) for a prepared input.
  [[nodiscard]] std::array<float, 4> forward(const std::vector<float>& input) const;
  [[nodiscard]] Roi predict(const EventMap& events, const SegMap* prev_seg) const;

 private:
  struct Layer {
    std::vector<float> weight;
    std::vector<float> bias;
  };
  RoiNetConfig cfg_;
  std::vector<Layer> convs_;
  std::vector<Layer> fcs_;
};

/// Maps normalised outputs onto frame pixels and validates the rectangle.
Roi roi_from_outputs(const std::array<float, 4>& out, int width, int height) noexcept;

Roi predict_roi_dnn(const EventMap& events, const SegMap* prev_seg, const WeightBundle& weights, const RoiNetConfig& cfg);

}  // namespace bliss
