#pragma once

#include <cstdint>
#include <filesystem>
#include <random>

#include "bliss/types.hpp"

namespace test {

inline std::filesystem::path data_dir() { return BLISS_TEST_DATA_DIR; }
inline std::filesystem::path config_dir() { return BLISS_CONFIG_DIR; }

inline bliss::Grid<std::uint16_t> random_codes(int w, int h, std::mt19937_64& rng, int max_code = 1023) {
  std::uniform_int_distribution<int> d(0, max_code);
  bliss::Grid<std::uint16_t> g(w, h);
  for (auto& v : g.values()) v = static_cast<std::uint16_t>(d(rng));
  return g;
}

inline bliss::Grid<std::uint8_t> random_bits(int w, int h, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution d(p);
  bliss::Grid<std::uint8_t> g(w, h);
  for (auto& v : g.values()) v = d(rng) ? 1 : 0;
  return g;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("bliss_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace test
