#include <CLI11.hpp>

#include <iostream>

#include "bliss/error.hpp"
#include "bliss/roi.hpp"
#include "bliss/vit.hpp"
#include "bliss/weights.hpp"

int main(int argc, char** argv) {
  CLI::App app{"make_weights: write a randomly initialised weight bundle"};
  std::string kind, out, config;
  std::uint64_t seed = 1;
  float stddev = 0.02f;
  app.add_option("kind", kind, "roi or vit")->required()->check(CLI::IsMember({"roi", "vit"}));
  app.add_option("out", out, "output .bwt path")->required();
  app.add_option("--config", config, "key-value config supplying the architecture");
  app.add_option("--seed", seed, "random seed")->capture_default_str();
  app.add_option("--stddev", stddev, "weight standard deviation")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  try {
    bliss::KeyValueConfig kv = config.empty() ? bliss::KeyValueConfig{} : bliss::KeyValueConfig::load(config);
    const auto specs = kind == "roi" ? bliss::RoiNetConfig::from_config(kv).tensor_specs()
                                     : bliss::VitConfig::from_config(kv).tensor_specs();
    bliss::write_bundle(bliss::random_bundle(specs, seed, stddev), out);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "make_weights: " << e.what() << '\n';
    return 2;
  }
}
