#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "bliss/config.hpp"
#include "bliss/types.hpp"
#include "bliss/weights.hpp"

namespace bliss {

using MatrixRM = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Sparse segmentation transformer.
///
/// Input channels per pixel: value / max_code and a validity bit (value != 0).
/// The ROI is zero-padded to patch multiples; patches are flattened as
/// [channel][py][px]. Blocks are pre-norm (LayerNorm, MHA, LayerNorm, GELU MLP)
/// with residuals. The head emits class_count * patch^2 logits per token,
/// ordered [class][py][px].
struct VitConfig {
  int patch_size = 16;
  int embed_dim = 192;
  int heads = 3;
  int encoder_blocks = 12;
  int decoder_blocks = 2;
  int class_count = kClassCount;
  int mlp_ratio = 4;
  int max_grid_width = 40;  // positional table covers 640x400 at patch 16
  int max_grid_height = 25;
  double max_code = 1023.0;
  float layer_norm_eps = 1e-6f;
  static constexpr int kInChannels = 2;

  [[nodiscard]] int patch_dim() const noexcept { return kInChannels * patch_size * patch_size; }
  [[nodiscard]] int head_dim() const noexcept { return embed_dim / heads; }
  [[nodiscard]] std::vector<TensorSpec> tensor_specs() const;
  void validate() const;
  static VitConfig from_config(const KeyValueConfig& kv);
};

/// Multiply-accumulates of one forward pass over `tokens` tokens.
struct VitMacs {
  std::uint64_t linear = 0;     // projections, MLPs, patch embedding, head: linear in tokens
  std::uint64_t attention = 0;  // QK^T and AV: quadratic in tokens
  [[nodiscard]] std::uint64_t total() const noexcept { return linear + attention; }
};
VitMacs vit_macs(const VitConfig& cfg, std::uint64_t tokens);

struct VitOutput {
  SegMap seg;
  int grid_width = 0;
  int grid_height = 0;
  MatrixRM logits;                   // tokens x (class_count * patch^2)
  std::vector<MatrixRM> attention;   // per block then head, tokens x tokens, when requested
};

class VitSegmenter {
 public:
  /// Copies the tensors it needs; throws FormatError on a missing or misshapen tensor.
  VitSegmenter(const WeightBundle& weights, VitConfig cfg);

  [[nodiscard]] const VitConfig& config() const noexcept { return cfg_; }

  /// ROI-sized sparse grid (0 = unsampled) -> per-token patch vectors.
  [[nodiscard]] MatrixRM patchify(const Grid<std::uint16_t>& sparse_roi, int& grid_width, int& grid_height) const;
  /// Token logits; `attention` receives every head's softmax matrix when non-null.
  [[nodiscard]] MatrixRM forward_tokens(const MatrixRM& patches, int grid_width, int grid_height,
                                        std::vector<MatrixRM>* attention = nullptr) const;
  /// Per-pixel argmax over a grid of token logits, cropped to `width` x `height`.
  [[nodiscard]] LabelGrid unfold_labels(const MatrixRM& logits, int grid_width, int grid_height, int width,
                                        int height) const;

  [[nodiscard]] VitOutput run(const Grid<std::uint16_t>& sparse_roi, const Roi& roi, int frame_index,
                              bool keep_attention = false) const;

 private:
  struct Linear {
    MatrixRM weight;  // [out, in]
    Eigen::RowVectorXf bias;
  };
  struct Norm {
    Eigen::RowVectorXf gamma;
    Eigen::RowVectorXf beta;
  };
  struct Block {
    Norm norm1, norm2;
    Linear qkv, proj, fc1, fc2;
  };

  [[nodiscard]] MatrixRM layer_norm(const MatrixRM& x, const Norm& n) const;
  [[nodiscard]] MatrixRM block_forward(const MatrixRM& x, const Block& b, std::vector<MatrixRM>* attention) const;

  VitConfig cfg_;
  Linear patch_embed_;
  MatrixRM pos_embed_;  // (max_grid_height * max_grid_width) x embed_dim
  std::vector<Block> blocks_;  // encoder blocks followed by decoder blocks
  Norm final_norm_;
  Linear head_;
};

SegMap vit_forward(const Grid<std::uint16_t>& sparse_roi, const Roi& roi, const WeightBundle& weights,
                   const VitConfig& cfg, int frame_index = 0);

}  // namespace bliss
