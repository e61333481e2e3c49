#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "bliss/config.hpp"
#include "bliss/readout.hpp"

namespace bliss {

enum class VariantMode { NPU_FULL, NPU_ROI, S_NPU, BLISSCAM };

std::string_view to_string(VariantMode mode) noexcept;
/// Accepts the enum spelling, case-insensitively; throws ConfigError otherwise.
VariantMode parse_mode(std::string_view text);
/// Modes whose ROI prediction runs in the sensor and depends on host feedback.
[[nodiscard]] constexpr bool in_sensor_sampling(VariantMode m) noexcept {
  return m == VariantMode::S_NPU || m == VariantMode::BLISSCAM;
}

enum class Stage : int {
  exposure,
  eventification,
  roi_prediction,
  sampling,
  readout,
  mipi_out,
  segmentation,
  gaze,
  mipi_feedback,
};
inline constexpr int kStageCount = 9;
std::string_view to_string(Stage stage) noexcept;

struct StageSpan {
  double start = 0.0;  // s
  double end = 0.0;
  bool active = false;
  [[nodiscard]] double duration() const noexcept { return end - start; }
};

/// Per-frame work that sets the data-dependent stage durations.
struct FrameWork {
  std::uint64_t pixels_quantized = 0;  // ADC conversions in the sensor
  std::uint64_t pixels_read = 0;       // pixels shifted out of the array
  std::uint64_t bytes_out = 0;         // sensor -> host
  std::uint64_t bytes_feedback = 0;    // host -> sensor
  std::uint64_t seg_pixels = 0;        // pixels the host segmenter processes
  std::uint64_t macs_in_sensor = 0;
  std::uint64_t macs_on_host = 0;
  std::uint64_t rle_elements = 0;      // readout-buffer entries run through the codec
};

struct FrameTrace {
  int frame_index = 0;
  std::array<StageSpan, kStageCount> spans{};
  FrameWork work;
  double stall = 0.0;  // s that ROI prediction waited on feedback

  [[nodiscard]] StageSpan& at(Stage s) noexcept { return spans[static_cast<std::size_t>(s)]; }
  [[nodiscard]] const StageSpan& at(Stage s) const noexcept { return spans[static_cast<std::size_t>(s)]; }
  [[nodiscard]] double exposure_time() const noexcept { return at(Stage::exposure).duration(); }
  [[nodiscard]] double latency() const noexcept { return at(Stage::gaze).end - at(Stage::exposure).start; }
};

/// Stage durations and resource rates. Defaults follow a 120 FPS 640x400 system.
struct TimingConfig {
  double fps = 120.0;
  double eventification = 5e-6;   // s, in-sensor
  double roi_prediction = 150e-6;  // s, in-sensor at the reference node
  double sampling = 1e-6;          // s, SRAM power-up and gating
  double min_sampling = 0.25e-6;   // s, floor when a stall squeezes sampling
  double eventify_overlap = 0.0;   // s of eventification that overlaps the exposure tail
  double adc_time_per_pixel = 0.15625e-9;  // s; 640x400 full readout = 40 us
  double gaze = 20e-6;                     // s, host
  double host_eventification = 50e-6;      // s, dense frame difference on the host
  double host_roi_prediction = 21.4e-6;    // s, ROI net on the host NPU
  double seg_overhead = 176.5e-6;          // s per segmentation call (weight streaming)
  double host_macs_per_second = 9.2376e11;  // full-frame segmentation = 7.2 ms
  double seg_macs_per_pixel = 25344.0;      // default ViT linear MACs per input pixel
  double sensor_delay_scale = 1.0;         // node scaling of in-sensor logic delay
  std::uint64_t frame_pixels = 640 * 400;
  MipiConfig mipi;

  [[nodiscard]] double period() const noexcept { return 1.0 / fps; }
  /// In-sensor work squeezed into each frame period before the next exposure;
  /// S_NPU also digitises the whole frame before its digital eventification.
  [[nodiscard]] double in_sensor_overhead(VariantMode mode) const noexcept;
  [[nodiscard]] double exposure_for(VariantMode mode) const noexcept;
  /// Host segmentation stage: fixed overhead plus the linear pixel model.
  [[nodiscard]] double segmentation_time(std::uint64_t pixels) const noexcept;

  void validate() const;
  static TimingConfig from_config(const KeyValueConfig& kv);
};

/// Linear compute model: pixels * macs_per_pixel / host_macs_per_second.
double segmentation_time_model(std::uint64_t pixels, double host_macs_per_second, double macs_per_pixel);

/// Discrete-event schedule of one run. Frame t's ROI prediction in S_NPU and
/// BLISSCAM waits for frame t-1's feedback; any wait is recorded as a stall,
/// shrinks sampling, and can delay the next exposure.
/// Throws SchedulingError when the timings cannot form a valid stage graph.
std::vector<FrameTrace> schedule(VariantMode mode, const TimingConfig& timing, const std::vector<FrameWork>& work);

/// Throws SchedulingError naming the first violated dependency.
void check_trace(VariantMode mode, const std::vector<FrameTrace>& traces);

struct LatencyStats {
  double mean = 0.0;
  double max = 0.0;
};
LatencyStats tracking_latency(const std::vector<FrameTrace>& traces) noexcept;

/// Exposure starts per second over the run (0 with fewer than two frames).
double achieved_fps(const std::vector<FrameTrace>& traces) noexcept;
int stall_count(const std::vector<FrameTrace>& traces) noexcept;

}  // namespace bliss
