#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bliss/config.hpp"
#include "bliss/energy.hpp"
#include "bliss/pipeline.hpp"
#include "bliss/scene.hpp"

namespace bliss {

/// Everything one simulation needs, resolved from a key-value config.
/// Relative paths are resolved against `base_dir` (the config file's directory).
struct RunConfig {
  KeyValueConfig source;
  std::filesystem::path base_dir;
  int frames = 200;
  std::optional<std::filesystem::path> input;
  std::filesystem::path out = "out";
  std::filesystem::path node_table;
  std::optional<std::filesystem::path> roi_weights;
  std::optional<std::filesystem::path> vit_weights;
  SceneConfig scene;
  VitConfig vit;
  PipelineConfig pipeline;
  EnergyCoefficients energy;
  NodeScalingTable nodes{16};

  /// Throws ConfigError naming the offending key (unknown key, bad value, missing file).
  static RunConfig from_config(const KeyValueConfig& kv, const std::filesystem::path& base_dir);
  static RunConfig load(const std::filesystem::path& path);
};

struct RunOutput {
  PipelineResult result;
  RunSummary summary;
  EnergyReport energy;
};

RunOutput execute(const RunConfig& cfg);

// CSV writers; each output starts with a `#schema,<name>,<version>` row.
inline constexpr int kCsvSchemaVersion = 1;
void write_traces_csv(std::ostream& out, const std::vector<FrameTrace>& traces);
void write_energy_csv(std::ostream& out, const EnergyReport& report);
void write_gaze_csv(std::ostream& out, const PipelineResult& result);
void write_summary_header(std::ostream& out);
void write_summary_row(std::ostream& out, const RunSummary& s, double fps_target, double energy_uj_per_frame);

/// Writes traces.csv, energy.csv, gaze.csv and summary.csv into cfg.out; returns 0.
int cmd_run(const RunConfig& cfg);

enum class SweepAxis { fps, rate, node };
SweepAxis parse_axis(const std::string& text);
/// Config key a sweep axis overrides.
std::string axis_key(SweepAxis axis);

struct SweepRow {
  std::string value;
  std::string status = "ok";
  RunSummary summary;
  double fps_target = 0.0;
  double energy_uj_per_frame = 0.0;
  double baseline_uj_per_frame = 0.0;  // NPU_FULL at the same point
};

/// Runs one isolated simulation per value on up to `threads` workers (0 = all
/// cores, capped by BLISS_THREADS). Rows come back in value order; a failing
/// point yields a row whose status carries the error message.
std::vector<SweepRow> run_sweep(const KeyValueConfig& kv, const std::filesystem::path& base_dir, SweepAxis axis,
                                const std::vector<std::string>& values, unsigned threads = 0);
void write_sweep_csv(std::ostream& out, SweepAxis axis, const std::vector<SweepRow>& rows);
/// Writes sweep.csv into the configured output directory; returns 0 iff every row succeeded.
int cmd_sweep(const KeyValueConfig& kv, const std::filesystem::path& base_dir, SweepAxis axis,
              const std::vector<std::string>& values);

/// Worker count: min(requested or hardware threads, BLISS_THREADS when set), at least 1.
unsigned worker_count(unsigned requested = 0);

}  // namespace bliss
