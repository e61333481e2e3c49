#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "bliss/error.hpp"
#include "bliss/experiment.hpp"

namespace {

void apply_overrides(bliss::KeyValueConfig& kv, const std::string& mode, const std::string& fps,
                     const std::string& rate, const std::string& seed, const std::string& out) {
  if (!mode.empty()) kv.set("run.mode", mode);
  if (!fps.empty()) kv.set("sensor.fps", fps);
  if (!rate.empty()) kv.set("run.rate", rate);
  if (!seed.empty()) kv.set("run.seed", seed);
  if (!out.empty()) kv.set("run.out", std::filesystem::absolute(out).string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blisscam: eye-tracking sensor pipeline simulator"};
  app.require_subcommand(1);
  std::string config = "configs/default.cfg";
  std::string mode, fps, rate, seed, out;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "key-value config file")->capture_default_str();
    sub->add_option("--mode", mode, "BLISSCAM, NPU_FULL, NPU_ROI or S_NPU");
    sub->add_option("--fps", fps, "target frame rate");
    sub->add_option("--rate", rate, "target sampling rate in (0,1]");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--out", out, "output directory");
  };
  auto* run = app.add_subcommand("run", "simulate one configuration");
  add_common(run);
  auto* sweep = app.add_subcommand("sweep", "simulate one configuration per axis value");
  add_common(sweep);
  std::string axis;
  std::vector<std::string> values;
  sweep->add_option("--axis", axis, "fps, rate or node")->required();
  sweep->add_option("--values", values, "comma-separated axis values")->delimiter(',');

  CLI11_PARSE(app, argc, argv);
  try {
    const std::filesystem::path path(config);
    auto kv = bliss::KeyValueConfig::load(path);
    apply_overrides(kv, mode, fps, rate, seed, out);
    if (run->parsed()) return bliss::cmd_run(bliss::RunConfig::from_config(kv, path.parent_path()));
    return bliss::cmd_sweep(kv, path.parent_path(), bliss::parse_axis(axis), values);
  } catch (const bliss::Error& e) {
    std::cerr << "blisscam: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "blisscam: " << e.what() << '\n';
    return 3;
  }
}
