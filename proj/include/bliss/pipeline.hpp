#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "bliss/roi.hpp"
#include "bliss/sampler.hpp"
#include "bliss/scene.hpp"
#include "bliss/segmenter.hpp"
#include "bliss/sensor.hpp"
#include "bliss/timing.hpp"
#include "bliss/vit.hpp"

namespace bliss {

struct PipelineConfig {
  VariantMode mode = VariantMode::BLISSCAM;
  SensorConfig sensor;  // exposure_time is replaced by the mode's exposure
  TimingConfig timing;
  RoiNetConfig roi_net;
  double target_rate = 0.2;      // in-ROI sampling rate
  int roi_margin = 8;            // px around the event bounding box
  int dense_bits_per_pixel = 10;
  int feedback_bits_per_label = 2;
  int min_pupil_pixels = 10;
  double bias_alpha = 8.0;       // SRAM power-up bias ~ Beta(alpha, beta)
  double bias_beta = 8.0;
  int calibration_cycles = 100;
  std::uint64_t seed = 1;
  GazeCalibration calibration = GazeCalibration::from_model(GazeModel{});
  /// Optional learned stages; the heuristic ROI and the oracle segmenter are used when null.
  std::shared_ptr<const RoiNet> roi_model;
  std::shared_ptr<const VitSegmenter> segmenter;

  void validate() const;
};

struct FrameRecord {
  Roi roi;
  int theta = 0;
  double sample_rate = 0.0;          // sampled / ROI area
  std::uint64_t sampled = 0;
  std::uint64_t events = 0;
  std::uint64_t encoded_bytes = 0;
  GazeVector gaze;
  GazeVector truth;
  GazeVector error;
  bool gaze_reused = false;          // no pupil found; previous gaze kept
};

struct PipelineResult {
  VariantMode mode = VariantMode::NPU_FULL;
  std::vector<FrameTrace> traces;
  std::vector<SegMap> segs;
  std::vector<GazeVector> gazes;
  std::vector<FrameRecord> frames;
  std::optional<CalibrationLut> lut;  // in-sensor sampling modes only
  int theta = 0;
  std::uint64_t frame_pixels = 0;
  std::uint64_t dense_bytes = 0;
};

/// Runs every frame through the mode's functional path, then schedules it.
/// An empty `truth` is allowed when a learned segmenter is configured; gaze
/// errors are then NaN.
PipelineResult run_pipeline(const std::vector<IrradianceGrid>& frames, const GroundTruth& truth,
                            const PipelineConfig& cfg);

struct RunSummary {
  VariantMode mode = VariantMode::NPU_FULL;
  int frames = 0;
  double exposure = 0.0;             // s, first frame
  double latency_mean = 0.0;         // s
  double latency_max = 0.0;
  double fps = 0.0;
  int stalls = 0;
  double target_rate = 0.0;
  double lut_rate = 0.0;             // calibrated rate of the chosen theta
  double sample_rate = 0.0;          // mean in-ROI achieved rate
  double retention = 0.0;            // mean pixels sent / frame pixels
  double compression = 0.0;          // dense bytes / mean bytes sent
  double roi_area_mean = 0.0;
  double roi_area_std = 0.0;
  double gaze_error_vertical = 0.0;  // mean degrees
  double gaze_error_horizontal = 0.0;
  int gaze_reused = 0;
};

RunSummary summarize(const PipelineResult& result, const PipelineConfig& cfg);

}  // namespace bliss
