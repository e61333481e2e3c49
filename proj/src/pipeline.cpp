#include "bliss/pipeline.hpp"

#include <cmath>
#include <limits>

#include "bliss/error.hpp"
#include "bliss/eventify.hpp"
#include "bliss/readout.hpp"

namespace bliss {
namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t feedback_bytes(const Roi& roi, int bits_per_label) {
  constexpr std::uint64_t kRoiHeader = 8;  // four u16 corners
  return kRoiHeader + (static_cast<std::uint64_t>(roi.area()) * static_cast<std::uint64_t>(bits_per_label) + 7) / 8;
}

}  // namespace

void PipelineConfig::validate() const {
  sensor.validate();
  timing.validate();
  if (!(target_rate > 0.0 && target_rate <= 1.0)) throw ConfigError("run.rate must be in (0,1]");
  if (roi_margin < 0) throw ConfigError("roi.margin must be >= 0");
  if (dense_bits_per_pixel < 1) throw ConfigError("readout.dense_bits_per_pixel must be >= 1");
  if (feedback_bits_per_label < 1) throw ConfigError("readout.feedback_bits_per_label must be >= 1");
  if (min_pupil_pixels < 1) throw ConfigError("gaze.min_pupil_pixels must be >= 1");
  if (calibration_cycles < 100) throw ConfigError("sampler.calibration_cycles must be >= 100");
  if (!(bias_alpha > 0.0 && bias_beta > 0.0)) throw ConfigError("sampler.bias_alpha/beta must be > 0");
  if (roi_model && (roi_model->config().frame_width != sensor.width || roi_model->config().frame_height != sensor.height)) {
    throw ConfigError("ROI net frame size differs from the sensor size");
  }
}

PipelineResult run_pipeline(const std::vector<IrradianceGrid>& frames, const GroundTruth& truth,
                            const PipelineConfig& cfg) {
  cfg.validate();
  if (frames.size() < 2) throw ContractError("pipeline needs at least two frames");
  const bool has_truth = !truth.seg_maps.empty();
  if (has_truth && (truth.seg_maps.size() != frames.size() || truth.gaze_angles.size() != frames.size())) {
    throw ContractError("ground truth does not cover every frame");
  }
  if (!has_truth && !cfg.segmenter) throw ConfigError("recorded input without ground truth needs ViT weights");
  const int w = cfg.sensor.width;
  const int h = cfg.sensor.height;
  for (const auto& f : frames) {
    if (f.width() != w || f.height() != h) throw ContractError("frame size differs from the sensor size");
  }

  const VariantMode mode = cfg.mode;
  const bool sensor_side = in_sensor_sampling(mode);
  SensorConfig sensor = cfg.sensor;
  sensor.fps = cfg.timing.fps;
  sensor.exposure_time = cfg.timing.exposure_for(mode);
  if (!(sensor.exposure_time > 0.0)) {
    throw SchedulingError("exposure -> eventification: in-sensor overhead leaves no exposure");
  }
  const int sigma = sensor.eventify_threshold_dn();

  PipelineResult result;
  result.mode = mode;
  result.frame_pixels = static_cast<std::uint64_t>(w) * static_cast<std::uint64_t>(h);
  result.dense_bytes = dense_frame_bytes(w, h, cfg.dense_bits_per_pixel);

  std::optional<SramBiasArray> biases;
  if (sensor_side) {
    biases = SramBiasArray::beta(w, h, cfg.bias_alpha, cfg.bias_beta, mix(cfg.seed, 1));
    result.lut = calibrate(*biases, cfg.calibration_cycles, mix(cfg.seed, 2));
    result.theta = result.lut->theta_for(cfg.target_rate);
  }

  std::vector<FrameWork> work;
  std::optional<Frame> prev_frame;
  std::optional<Roi> prev_roi;
  const SegMap* prev_seg = nullptr;
  GazeVector last_gaze = cfg.calibration.apply(cfg.calibration.reference);
  result.segs.reserve(frames.size());

  for (std::size_t t = 0; t < frames.size(); ++t) {
    const int idx = static_cast<int>(t);
    Frame frame{quantize(expose(frames[t], sensor, mix(cfg.seed, 1000 + t)), sensor), idx,
                static_cast<double>(t) * cfg.timing.period()};
    FrameRecord rec;
    FrameWork fw;
    SegMap seg;

    if (mode == VariantMode::NPU_FULL) {
      rec.roi = Roi::full(w, h);
    } else {
      const EventMap events = prev_frame ? eventify(*prev_frame, frame, sigma) : EventMap{Grid<std::uint8_t>(w, h), idx};
      rec.events = events.count();
      if (cfg.roi_model) {
        rec.roi = cfg.roi_model->predict(events, prev_seg);
      } else {
        rec.roi = predict_roi_heuristic(events, prev_roi, cfg.roi_margin);
      }
    }

    if (sensor_side) {
      const auto words = power_up(*biases, mix(cfg.seed, 5000 + t));
      const SampleMask mask = sample_gate(words, result.theta, rec.roi);
      const ReadoutBuffer buffer = sparse_readout(frame, rec.roi, mask);
      const RleStream stream = rle_encode(buffer);
      const ReadoutBuffer received = rle_decode(stream.to_bytes());
      rec.theta = result.theta;
      rec.sampled = mask.count();
      rec.sample_rate = mask.achieved_rate;
      rec.encoded_bytes = stream.byte_size();
      seg = cfg.segmenter ? cfg.segmenter->run(buffer_to_grid(received), rec.roi, idx).seg
                          : oracle_segment(truth.seg_maps[t], rec.roi, idx);
      fw.pixels_quantized = mode == VariantMode::S_NPU ? result.frame_pixels : rec.sampled;
      fw.pixels_read = rec.sampled;
      fw.bytes_out = rec.encoded_bytes;
      fw.bytes_feedback = feedback_bytes(rec.roi, cfg.feedback_bits_per_label);
      fw.macs_in_sensor = cfg.roi_net.macs();
      fw.rle_elements = static_cast<std::uint64_t>(rec.roi.area());
    } else {
      rec.sampled = static_cast<std::uint64_t>(rec.roi.area());
      rec.sample_rate = 1.0;
      rec.encoded_bytes = result.dense_bytes;
      if (cfg.segmenter) {
        Grid<std::uint16_t> crop(rec.roi.width(), rec.roi.height());
        for (int y = 0; y < rec.roi.height(); ++y) {
          for (int x = 0; x < rec.roi.width(); ++x) {
            crop(x, y) = std::max<std::uint16_t>(frame.pixels(rec.roi.x1 + x, rec.roi.y1 + y), 1);
          }
        }
        seg = cfg.segmenter->run(crop, rec.roi, idx).seg;
      } else {
        seg = oracle_segment(truth.seg_maps[t], rec.roi, idx);
      }
      fw.pixels_quantized = result.frame_pixels;
      fw.pixels_read = result.frame_pixels;
      fw.bytes_out = result.dense_bytes;
      if (mode == VariantMode::NPU_ROI) fw.macs_on_host += result.frame_pixels + cfg.roi_net.macs();
    }
    fw.seg_pixels = static_cast<std::uint64_t>(rec.roi.area());
    fw.macs_on_host += static_cast<std::uint64_t>(std::llround(static_cast<double>(fw.seg_pixels) * cfg.timing.seg_macs_per_pixel));

    try {
      last_gaze = predict_gaze(seg, cfg.calibration, cfg.min_pupil_pixels);
    } catch (const NoPupilError&) {
      rec.gaze_reused = true;
    }
    rec.gaze = last_gaze;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    rec.truth = has_truth ? truth.gaze_angles[t] : GazeVector{nan, nan};
    rec.error = angular_error(rec.gaze, rec.truth);

    result.segs.push_back(std::move(seg));
    result.gazes.push_back(rec.gaze);
    result.frames.push_back(rec);
    work.push_back(fw);
    prev_seg = &result.segs.back();
    prev_roi = rec.roi;
    prev_frame = std::move(frame);
  }
  result.traces = schedule(mode, cfg.timing, work);
  return result;
}

RunSummary summarize(const PipelineResult& result, const PipelineConfig& cfg) {
  RunSummary s;
  s.mode = result.mode;
  s.frames = static_cast<int>(result.frames.size());
  if (result.traces.empty()) return s;
  s.exposure = result.traces.front().exposure_time();
  const auto lat = tracking_latency(result.traces);
  s.latency_mean = lat.mean;
  s.latency_max = lat.max;
  s.fps = achieved_fps(result.traces);
  s.stalls = stall_count(result.traces);
  s.target_rate = in_sensor_sampling(result.mode) ? cfg.target_rate : 1.0;
  s.lut_rate = result.lut ? result.lut->rate(result.theta) : 1.0;
  double bytes = 0.0;
  double area2 = 0.0;
  for (const auto& r : result.frames) {
    s.sample_rate += r.sample_rate;
    s.retention += static_cast<double>(r.sampled) / static_cast<double>(result.frame_pixels);
    bytes += static_cast<double>(r.encoded_bytes);
    s.roi_area_mean += static_cast<double>(r.roi.area());
    area2 += static_cast<double>(r.roi.area()) * static_cast<double>(r.roi.area());
    s.gaze_error_vertical += r.error.vertical;
    s.gaze_error_horizontal += r.error.horizontal;
    s.gaze_reused += r.gaze_reused ? 1 : 0;
  }
  const double n = static_cast<double>(result.frames.size());
  s.sample_rate /= n;
  s.retention /= n;
  s.compression = static_cast<double>(result.dense_bytes) / (bytes / n);
  s.roi_area_mean /= n;
  s.roi_area_std = std::sqrt(std::max(0.0, area2 / n - s.roi_area_mean * s.roi_area_mean));
  s.gaze_error_vertical /= n;
  s.gaze_error_horizontal /= n;
  return s;
}

}  // namespace bliss
