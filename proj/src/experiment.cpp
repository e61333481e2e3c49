#include "bliss/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "bliss/error.hpp"
#include "bliss/weights.hpp"

namespace bliss {
namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  std::filesystem::path p(value);
  return p.is_absolute() ? p : base / p;
}

std::optional<std::filesystem::path> existing_file(const KeyValueConfig& kv, const std::string& key,
                                                   const std::filesystem::path& base) {
  const auto value = kv.get_string(key, "");
  if (value.empty()) return std::nullopt;
  auto p = resolve(base, value);
  if (!std::filesystem::exists(p)) throw ConfigError("key '" + key + "' refers to missing path '" + p.string() + "'");
  return p;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

RunConfig RunConfig::from_config(const KeyValueConfig& kv, const std::filesystem::path& base_dir) {
  RunConfig c;
  c.source = kv;
  c.base_dir = base_dir;
  c.frames = static_cast<int>(kv.get_int("run.frames", c.frames));
  if (c.frames < 2) throw ConfigError("key 'run.frames' must be >= 2");
  c.input = existing_file(kv, "run.input", base_dir);
  c.out = resolve(base_dir, kv.get_string("run.out", "out"));
  c.roi_weights = existing_file(kv, "run.roi_weights", base_dir);
  c.vit_weights = existing_file(kv, "run.vit_weights", base_dir);
  const auto nodes = existing_file(kv, "run.node_table", base_dir);

  c.scene = SceneConfig::from_config(kv);
  c.vit = VitConfig::from_config(kv);
  PipelineConfig& p = c.pipeline;
  try {
    p.mode = parse_mode(kv.get_string("run.mode", "BLISSCAM"));
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("key 'run.mode': ") + e.what());
  }
  p.seed = static_cast<std::uint64_t>(kv.get_int("run.seed", 1));
  p.target_rate = kv.get_double("run.rate", p.target_rate);
  if (!(p.target_rate > 0.0 && p.target_rate <= 1.0)) throw ConfigError("key 'run.rate' must be in (0,1]");
  p.sensor = SensorConfig::from_config(kv);
  p.timing = TimingConfig::from_config(kv);
  p.roi_net = RoiNetConfig::from_config(kv);
  p.roi_margin = static_cast<int>(kv.get_int("roi.margin", p.roi_margin));
  p.bias_alpha = kv.get_double("sampler.bias_alpha", p.bias_alpha);
  p.bias_beta = kv.get_double("sampler.bias_beta", p.bias_beta);
  p.calibration_cycles = static_cast<int>(kv.get_int("sampler.calibration_cycles", p.calibration_cycles));
  p.dense_bits_per_pixel = static_cast<int>(kv.get_int("readout.dense_bits_per_pixel", p.dense_bits_per_pixel));
  p.feedback_bits_per_label = static_cast<int>(kv.get_int("readout.feedback_bits_per_label", p.feedback_bits_per_label));
  p.min_pupil_pixels = static_cast<int>(kv.get_int("gaze.min_pupil_pixels", p.min_pupil_pixels));
  c.energy = EnergyCoefficients::from_config(kv);
  c.energy.e_mipi_per_byte = p.timing.mipi.energy_per_byte;
  kv.check_all_consumed();

  if (c.scene.width != p.sensor.width || c.scene.height != p.sensor.height) {
    throw ConfigError("key 'scene.width'/'scene.height' must match the sensor size");
  }
  c.nodes = nodes ? NodeScalingTable::load(*nodes) : NodeScalingTable(16);
  (void)c.nodes.at(c.energy.host_node);
  p.timing.sensor_delay_scale = c.nodes.at(c.energy.sensor_node).logic_delay;
  p.calibration = GazeCalibration::from_model(
      GazeModel{{c.scene.eye_center_x, c.scene.eye_center_y}, c.scene.deg_per_px_horizontal, c.scene.deg_per_px_vertical});
  if (c.roi_weights) p.roi_model = std::make_shared<RoiNet>(read_bundle(*c.roi_weights), p.roi_net);
  if (c.vit_weights) p.segmenter = std::make_shared<VitSegmenter>(read_bundle(*c.vit_weights), c.vit);
  if (c.input && !c.vit_weights) throw ConfigError("key 'run.input' needs 'run.vit_weights' (recorded input has no ground truth)");
  p.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  return from_config(KeyValueConfig::load(path), path.parent_path());
}

RunOutput execute(const RunConfig& cfg) {
  std::vector<IrradianceGrid> frames;
  GroundTruth truth;
  if (cfg.input) {
    const auto images = load_sequence(*cfg.input);
    const std::size_t n = std::min(images.size(), static_cast<std::size_t>(cfg.frames));
    for (std::size_t i = 0; i < n; ++i) frames.push_back(irradiance_from_gray(images[i], cfg.pipeline.sensor, cfg.pipeline.timing.period()));
  } else {
    const auto scene = make_scene(cfg.scene, cfg.frames, cfg.pipeline.seed);
    auto seq = generate_sequence(scene, cfg.frames, cfg.pipeline.seed);
    frames = std::move(seq.frames);
    truth = std::move(seq.truth);
  }
  RunOutput out;
  out.result = run_pipeline(frames, truth, cfg.pipeline);
  out.summary = summarize(out.result, cfg.pipeline);
  out.energy = account(out.result.traces, cfg.pipeline.mode, cfg.energy, cfg.nodes);
  return out;
}

void write_traces_csv(std::ostream& out, const std::vector<FrameTrace>& traces) {
  out << "#schema,traces," << kCsvSchemaVersion << "\nframe,stage,start_us,end_us\n";
  for (const auto& tr : traces) {
    for (int s = 0; s < kStageCount; ++s) {
      const auto& sp = tr.spans[static_cast<std::size_t>(s)];
      if (!sp.active) continue;
      out << tr.frame_index << ',' << to_string(static_cast<Stage>(s)) << ',' << fmt(sp.start * 1e6) << ','
          << fmt(sp.end * 1e6) << '\n';
    }
  }
}

void write_energy_csv(std::ostream& out, const EnergyReport& report) {
  out << "#schema,energy," << kCsvSchemaVersion << "\nmode,frames";
  for (int c = 0; c < kEnergyComponentCount; ++c) out << ',' << to_string(static_cast<EnergyComponent>(c)) << "_uj";
  out << ",total_uj\n" << to_string(report.mode) << ',' << report.frames;
  for (int c = 0; c < kEnergyComponentCount; ++c) out << ',' << fmt(report.per_frame(static_cast<EnergyComponent>(c)) * 1e6);
  out << ',' << fmt(report.total_per_frame() * 1e6) << '\n';
}

void write_gaze_csv(std::ostream& out, const PipelineResult& result) {
  out << "#schema,gaze," << kCsvSchemaVersion
      << "\nframe,roi_x1,roi_y1,roi_x2,roi_y2,theta,sampled,sample_rate,bytes,"
         "gaze_v,gaze_h,truth_v,truth_h,err_v,err_h,reused\n";
  for (std::size_t i = 0; i < result.frames.size(); ++i) {
    const auto& r = result.frames[i];
    out << i << ',' << r.roi.x1 << ',' << r.roi.y1 << ',' << r.roi.x2 << ',' << r.roi.y2 << ',' << r.theta << ','
        << r.sampled << ',' << fmt(r.sample_rate) << ',' << r.encoded_bytes << ',' << fmt(r.gaze.vertical) << ','
        << fmt(r.gaze.horizontal) << ',' << fmt(r.truth.vertical) << ',' << fmt(r.truth.horizontal) << ','
        << fmt(r.error.vertical) << ',' << fmt(r.error.horizontal) << ',' << (r.gaze_reused ? 1 : 0) << '\n';
  }
}

namespace {
constexpr const char* kSummaryColumns =
    "mode,frames,fps_target,exposure_us,latency_mean_us,latency_max_us,fps,stalls,target_rate,lut_rate,"
    "sample_rate,retention,compression,roi_area_mean,roi_area_std,gaze_err_v,gaze_err_h,gaze_reused,"
    "energy_uj_per_frame";

void summary_fields(std::ostream& out, const RunSummary& s, double fps_target, double energy) {
  out << to_string(s.mode) << ',' << s.frames << ',' << fmt(fps_target) << ',' << fmt(s.exposure * 1e6) << ','
      << fmt(s.latency_mean * 1e6) << ',' << fmt(s.latency_max * 1e6) << ',' << fmt(s.fps) << ',' << s.stalls << ','
      << fmt(s.target_rate) << ',' << fmt(s.lut_rate) << ',' << fmt(s.sample_rate) << ',' << fmt(s.retention) << ','
      << fmt(s.compression) << ',' << fmt(s.roi_area_mean) << ',' << fmt(s.roi_area_std) << ','
      << fmt(s.gaze_error_vertical) << ',' << fmt(s.gaze_error_horizontal) << ',' << s.gaze_reused << ','
      << fmt(energy);
}
}  // namespace

void write_summary_header(std::ostream& out) {
  out << "#schema,summary," << kCsvSchemaVersion << '\n' << kSummaryColumns << '\n';
}

void write_summary_row(std::ostream& out, const RunSummary& s, double fps_target, double energy_uj_per_frame) {
  summary_fields(out, s, fps_target, energy_uj_per_frame);
  out << '\n';
}

int cmd_run(const RunConfig& cfg) {
  const RunOutput run = execute(cfg);
  std::filesystem::create_directories(cfg.out);
  auto traces = open_out(cfg.out / "traces.csv");
  write_traces_csv(traces, run.result.traces);
  auto energy = open_out(cfg.out / "energy.csv");
  write_energy_csv(energy, run.energy);
  auto gaze = open_out(cfg.out / "gaze.csv");
  write_gaze_csv(gaze, run.result);
  auto summary = open_out(cfg.out / "summary.csv");
  write_summary_header(summary);
  write_summary_row(summary, run.summary, cfg.pipeline.timing.fps, run.energy.total_per_frame() * 1e6);
  return 0;
}

SweepAxis parse_axis(const std::string& text) {
  if (text == "fps") return SweepAxis::fps;
  if (text == "rate") return SweepAxis::rate;
  if (text == "node") return SweepAxis::node;
  throw ConfigError("unknown sweep axis '" + text + "' (expected fps, rate or node)");
}

std::string axis_key(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::fps: return "sensor.fps";
    case SweepAxis::rate: return "run.rate";
    case SweepAxis::node: return "node.sensor_nm";
  }
  return "";
}

unsigned worker_count(unsigned requested) {
  unsigned n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("BLISS_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
  }
  return std::max(1u, n);
}

std::vector<SweepRow> run_sweep(const KeyValueConfig& kv, const std::filesystem::path& base_dir, SweepAxis axis,
                                const std::vector<std::string>& values, unsigned threads) {
  std::vector<SweepRow> rows(values.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      SweepRow& row = rows[i];
      row.value = values[i];
      try {
        KeyValueConfig point = kv;
        std::string value = values[i];
        if (axis == SweepAxis::rate && !value.empty() && value.back() == '%') {
          value = fmt(std::stod(value.substr(0, value.size() - 1)) / 100.0);
        }
        point.set(axis_key(axis), value);
        const RunConfig cfg = RunConfig::from_config(point, base_dir);
        const RunOutput run = execute(cfg);
        row.summary = run.summary;
        row.fps_target = cfg.pipeline.timing.fps;
        row.energy_uj_per_frame = run.energy.total_per_frame() * 1e6;
        RunConfig base = cfg;
        base.pipeline.mode = VariantMode::NPU_FULL;
        row.baseline_uj_per_frame =
            cfg.pipeline.mode == VariantMode::NPU_FULL ? row.energy_uj_per_frame : execute(base).energy.total_per_frame() * 1e6;
      } catch (const std::exception& e) {
        row.status = std::string("error: ") + e.what();
      }
    }
  };
  const unsigned n = std::min<unsigned>(worker_count(threads), static_cast<unsigned>(std::max<std::size_t>(values.size(), 1)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return rows;
}

void write_sweep_csv(std::ostream& out, SweepAxis axis, const std::vector<SweepRow>& rows) {
  out << "#schema,sweep," << kCsvSchemaVersion << "\naxis,value,status," << kSummaryColumns
      << ",baseline_uj_per_frame,saving_vs_npu_full\n";
  const char* name = axis == SweepAxis::fps ? "fps" : axis == SweepAxis::rate ? "rate" : "node";
  for (const auto& r : rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    out << name << ',' << r.value << ',' << status << ',';
    summary_fields(out, r.summary, r.fps_target, r.energy_uj_per_frame);
    const double saving = r.energy_uj_per_frame > 0.0 ? r.baseline_uj_per_frame / r.energy_uj_per_frame : 0.0;
    out << ',' << fmt(r.baseline_uj_per_frame) << ',' << fmt(saving) << '\n';
  }
}

int cmd_sweep(const KeyValueConfig& kv, const std::filesystem::path& base_dir, SweepAxis axis,
              const std::vector<std::string>& values) {
  const auto out_dir = resolve(base_dir, kv.get_string("run.out", "out"));
  const auto rows = run_sweep(kv, base_dir, axis, values);
  std::filesystem::create_directories(out_dir);
  auto out = open_out(out_dir / "sweep.csv");
  write_sweep_csv(out, axis, rows);
  return std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.status == "ok"; }) ? 0 : 1;
}

}  // namespace bliss
