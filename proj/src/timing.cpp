#include "bliss/timing.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "bliss/error.hpp"

namespace bliss {
namespace {

// Dependency checks tolerate rounding in accumulated timestamps.
constexpr double kEps = 1e-12;

std::string us(double seconds) { return std::to_string(seconds * 1e6) + " us"; }

void require_duration(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0) throw SchedulingError(std::string(name) + " duration must be finite and >= 0");
}

}  // namespace

std::string_view to_string(VariantMode mode) noexcept {
  switch (mode) {
    case VariantMode::NPU_FULL: return "NPU_FULL";
    case VariantMode::NPU_ROI: return "NPU_ROI";
    case VariantMode::S_NPU: return "S_NPU";
    case VariantMode::BLISSCAM: return "BLISSCAM";
  }
  return "?";
}

VariantMode parse_mode(std::string_view text) {
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
  for (auto m : {VariantMode::NPU_FULL, VariantMode::NPU_ROI, VariantMode::S_NPU, VariantMode::BLISSCAM}) {
    if (upper == to_string(m)) return m;
  }
  throw ConfigError("unknown mode '" + std::string(text) + "' (expected NPU_FULL, NPU_ROI, S_NPU or BLISSCAM)");
}

std::string_view to_string(Stage stage) noexcept {
  switch (stage) {
    case Stage::exposure: return "exposure";
    case Stage::eventification: return "eventification";
    case Stage::roi_prediction: return "roi_prediction";
    case Stage::sampling: return "sampling";
    case Stage::readout: return "readout";
    case Stage::mipi_out: return "mipi_out";
    case Stage::segmentation: return "segmentation";
    case Stage::gaze: return "gaze";
    case Stage::mipi_feedback: return "mipi_feedback";
  }
  return "?";
}

double TimingConfig::in_sensor_overhead(VariantMode mode) const noexcept {
  if (!in_sensor_sampling(mode)) return 0.0;
  double overhead = eventification - eventify_overlap + roi_prediction * sensor_delay_scale + sampling;
  if (mode == VariantMode::S_NPU) overhead += static_cast<double>(frame_pixels) * adc_time_per_pixel;
  return overhead;
}

double TimingConfig::exposure_for(VariantMode mode) const noexcept { return period() - in_sensor_overhead(mode); }

double TimingConfig::segmentation_time(std::uint64_t pixels) const noexcept {
  return seg_overhead + segmentation_time_model(pixels, host_macs_per_second, seg_macs_per_pixel);
}

void TimingConfig::validate() const {
  if (!(fps > 0.0) || !std::isfinite(fps)) throw SchedulingError("fps must be finite and > 0");
  require_duration(eventification, "eventification");
  require_duration(roi_prediction, "roi_prediction");
  require_duration(sampling, "sampling");
  require_duration(min_sampling, "min_sampling");
  require_duration(eventify_overlap, "eventify_overlap");
  require_duration(adc_time_per_pixel, "adc_time_per_pixel");
  require_duration(gaze, "gaze");
  require_duration(host_eventification, "host_eventification");
  require_duration(host_roi_prediction, "host_roi_prediction");
  require_duration(seg_overhead, "seg_overhead");
  if (!(host_macs_per_second > 0.0)) throw SchedulingError("host_macs_per_second must be > 0");
  if (!(seg_macs_per_pixel >= 0.0)) throw SchedulingError("seg_macs_per_pixel must be >= 0");
  if (!(sensor_delay_scale > 0.0)) throw SchedulingError("sensor_delay_scale must be > 0");
  if (min_sampling > sampling) throw SchedulingError("sampling: min_sampling exceeds the nominal sampling window");
  if (eventify_overlap > eventification) {
    throw SchedulingError("exposure -> eventification: overlap exceeds the eventification stage");
  }
  mipi.validate();
}

TimingConfig TimingConfig::from_config(const KeyValueConfig& kv) {
  TimingConfig t;
  t.fps = kv.get_double("sensor.fps", t.fps);
  t.eventification = kv.get_double("timing.eventification_us", t.eventification * 1e6) * 1e-6;
  t.roi_prediction = kv.get_double("timing.roi_prediction_us", t.roi_prediction * 1e6) * 1e-6;
  t.sampling = kv.get_double("timing.sampling_us", t.sampling * 1e6) * 1e-6;
  t.min_sampling = kv.get_double("timing.min_sampling_us", t.min_sampling * 1e6) * 1e-6;
  t.eventify_overlap = kv.get_double("timing.eventify_overlap_us", t.eventify_overlap * 1e6) * 1e-6;
  t.adc_time_per_pixel = kv.get_double("timing.adc_ns_per_pixel", t.adc_time_per_pixel * 1e9) * 1e-9;
  t.gaze = kv.get_double("timing.gaze_us", t.gaze * 1e6) * 1e-6;
  t.host_eventification = kv.get_double("timing.host_eventification_us", t.host_eventification * 1e6) * 1e-6;
  t.host_roi_prediction = kv.get_double("timing.host_roi_prediction_us", t.host_roi_prediction * 1e6) * 1e-6;
  t.seg_overhead = kv.get_double("timing.seg_overhead_us", t.seg_overhead * 1e6) * 1e-6;
  t.host_macs_per_second = kv.get_double("timing.host_macs_per_second", t.host_macs_per_second);
  t.seg_macs_per_pixel = kv.get_double("timing.seg_macs_per_pixel", t.seg_macs_per_pixel);
  t.mipi.lanes = static_cast<int>(kv.get_int("mipi.lanes", t.mipi.lanes));
  t.mipi.lane_rate = kv.get_double("mipi.lane_rate_bps", t.mipi.lane_rate);
  t.mipi.energy_per_byte = kv.get_double("energy.e_mipi_per_byte_pj", t.mipi.energy_per_byte * 1e12) * 1e-12;
  t.frame_pixels = static_cast<std::uint64_t>(kv.get_int("sensor.width", 640) * kv.get_int("sensor.height", 400));
  t.validate();
  return t;
}

double segmentation_time_model(std::uint64_t pixels, double host_macs_per_second, double macs_per_pixel) {
  if (!(host_macs_per_second > 0.0)) throw ContractError("host_macs_per_second must be > 0");
  if (!(macs_per_pixel >= 0.0)) throw ContractError("macs_per_pixel must be >= 0");
  return static_cast<double>(pixels) * macs_per_pixel / host_macs_per_second;
}

std::vector<FrameTrace> schedule(VariantMode mode, const TimingConfig& timing, const std::vector<FrameWork>& work) {
  timing.validate();
  const double period = timing.period();
  const double exposure = timing.exposure_for(mode);
  if (!(exposure > 0.0)) {
    throw SchedulingError("exposure -> eventification: in-sensor overhead " + us(timing.in_sensor_overhead(mode)) +
                          " leaves no exposure in a " + us(period) + " frame period");
  }
  if (timing.eventify_overlap > exposure) {
    throw SchedulingError("exposure -> eventification: overlap exceeds the exposure");
  }

  std::vector<FrameTrace> traces;
  traces.reserve(work.size());
  double link_out_free = 0.0;
  double link_in_free = 0.0;
  double host_free = 0.0;
  auto span = [](FrameTrace& tr, Stage s, double start, double duration) {
    tr.at(s) = {start, start + duration, true};
    return start + duration;
  };

  for (std::size_t i = 0; i < work.size(); ++i) {
    const FrameWork& w = work[i];
    FrameTrace tr;
    tr.frame_index = static_cast<int>(i);
    tr.work = w;
    const double nominal = static_cast<double>(i) * period;
    const FrameTrace* prev = i == 0 ? nullptr : &traces.back();

    double start = nominal;
    if (prev != nullptr && prev->at(Stage::sampling).active) start = std::max(start, prev->at(Stage::sampling).end);
    const double exposure_end = span(tr, Stage::exposure, start, exposure);

    double ready = exposure_end;
    if (in_sensor_sampling(mode)) {
      double evt = timing.eventification;
      if (mode == VariantMode::S_NPU) evt += static_cast<double>(timing.frame_pixels) * timing.adc_time_per_pixel;
      const double evt_end = span(tr, Stage::eventification, exposure_end - timing.eventify_overlap, evt);
      double roi_start = evt_end;
      if (prev != nullptr && prev->at(Stage::mipi_feedback).end > roi_start) {
        tr.stall = prev->at(Stage::mipi_feedback).end - roi_start;
        roi_start = prev->at(Stage::mipi_feedback).end;
      }
      const double roi_end = span(tr, Stage::roi_prediction, roi_start, timing.roi_prediction * timing.sensor_delay_scale);
      const double window = nominal + period - roi_end;
      const double sampling = std::clamp(window, timing.min_sampling, timing.sampling);
      ready = span(tr, Stage::sampling, roi_end, sampling);
    }
    const double readout_end =
        span(tr, Stage::readout, ready, static_cast<double>(w.pixels_read) * timing.adc_time_per_pixel);
    const auto out = mipi_transfer(w.bytes_out, timing.mipi);
    const double mipi_end = span(tr, Stage::mipi_out, std::max(readout_end, link_out_free), out.latency);
    link_out_free = mipi_end;

    double seg_ready = std::max(mipi_end, host_free);
    if (mode == VariantMode::NPU_ROI) {
      const double evt_end = span(tr, Stage::eventification, seg_ready, timing.host_eventification);
      seg_ready = span(tr, Stage::roi_prediction, evt_end, timing.host_roi_prediction);
    }
    const double seg_end = span(tr, Stage::segmentation, seg_ready, timing.segmentation_time(w.seg_pixels));
    host_free = seg_end;
    span(tr, Stage::gaze, seg_end, timing.gaze);
    if (in_sensor_sampling(mode)) {
      const auto fb = mipi_transfer(w.bytes_feedback, timing.mipi);
      link_in_free = span(tr, Stage::mipi_feedback, std::max(seg_end, link_in_free), fb.latency);
    }
    traces.push_back(tr);
  }
  check_trace(mode, traces);
  return traces;
}

void check_trace(VariantMode mode, const std::vector<FrameTrace>& traces) {
  auto fail = [](const FrameTrace& tr, Stage before, Stage after) {
    throw SchedulingError("frame " + std::to_string(tr.frame_index) + ": " + std::string(to_string(after)) +
                          " starts before " + std::string(to_string(before)) + " ends");
  };
  auto order = [&](const FrameTrace& tr, Stage before, Stage after) {
    if (tr.at(after).start < tr.at(before).end - kEps) fail(tr, before, after);
  };
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const FrameTrace& tr = traces[i];
    for (int s = 0; s < kStageCount; ++s) {
      const auto& sp = tr.spans[static_cast<std::size_t>(s)];
      if (!sp.active) continue;
      if (!std::isfinite(sp.start) || !std::isfinite(sp.end) || sp.end < sp.start) {
        throw SchedulingError("frame " + std::to_string(tr.frame_index) + ": " +
                              std::string(to_string(static_cast<Stage>(s))) + " has an invalid span");
      }
    }
    for (Stage s : {Stage::exposure, Stage::readout, Stage::mipi_out, Stage::segmentation, Stage::gaze}) {
      if (!tr.at(s).active) {
        throw SchedulingError("frame " + std::to_string(tr.frame_index) + ": missing " + std::string(to_string(s)));
      }
    }
    const bool sensor_side = in_sensor_sampling(mode);
    for (Stage s : {Stage::eventification, Stage::roi_prediction}) {
      if (tr.at(s).active != (mode != VariantMode::NPU_FULL)) {
        throw SchedulingError("frame " + std::to_string(tr.frame_index) + ": " + std::string(to_string(s)) +
                              " presence does not match mode " + std::string(to_string(mode)));
      }
    }
    if (tr.at(Stage::sampling).active != sensor_side || tr.at(Stage::mipi_feedback).active != sensor_side) {
      throw SchedulingError("frame " + std::to_string(tr.frame_index) + ": sampling/feedback presence does not match mode " +
                            std::string(to_string(mode)));
    }
    if (sensor_side) {
      if (tr.at(Stage::eventification).start < tr.at(Stage::exposure).start - kEps) fail(tr, Stage::exposure, Stage::eventification);
      order(tr, Stage::eventification, Stage::roi_prediction);
      order(tr, Stage::roi_prediction, Stage::sampling);
      order(tr, Stage::sampling, Stage::readout);
      order(tr, Stage::segmentation, Stage::mipi_feedback);
    } else {
      order(tr, Stage::exposure, Stage::readout);
    }
    order(tr, Stage::readout, Stage::mipi_out);
    if (mode == VariantMode::NPU_ROI) {
      order(tr, Stage::mipi_out, Stage::eventification);
      order(tr, Stage::eventification, Stage::roi_prediction);
      order(tr, Stage::roi_prediction, Stage::segmentation);
    } else {
      order(tr, Stage::mipi_out, Stage::segmentation);
    }
    order(tr, Stage::segmentation, Stage::gaze);
    if (i > 0) {
      const FrameTrace& prev = traces[i - 1];
      if (tr.at(Stage::exposure).start < prev.at(Stage::exposure).end - kEps) {
        throw SchedulingError("frame " + std::to_string(tr.frame_index) + ": exposure overlaps the previous exposure");
      }
      if (sensor_side) {
        if (tr.at(Stage::roi_prediction).start < prev.at(Stage::mipi_feedback).end - kEps) {
          throw SchedulingError("frame " + std::to_string(tr.frame_index) +
                                ": roi_prediction starts before the previous frame's mipi_feedback ends");
        }
        if (tr.at(Stage::exposure).start < prev.at(Stage::sampling).end - kEps) {
          throw SchedulingError("frame " + std::to_string(tr.frame_index) +
                                ": exposure starts before the previous frame's sampling ends");
        }
      }
    }
  }
}

LatencyStats tracking_latency(const std::vector<FrameTrace>& traces) noexcept {
  LatencyStats s;
  if (traces.empty()) return s;
  for (const auto& tr : traces) {
    s.mean += tr.latency();
    s.max = std::max(s.max, tr.latency());
  }
  s.mean /= static_cast<double>(traces.size());
  return s;
}

double achieved_fps(const std::vector<FrameTrace>& traces) noexcept {
  if (traces.size() < 2) return 0.0;
  const double span = traces.back().at(Stage::exposure).start - traces.front().at(Stage::exposure).start;
  return span > 0.0 ? static_cast<double>(traces.size() - 1) / span : 0.0;
}

int stall_count(const std::vector<FrameTrace>& traces) noexcept {
  return static_cast<int>(std::count_if(traces.begin(), traces.end(), [](const FrameTrace& t) { return t.stall > 0.0; }));
}

}  // namespace bliss
