#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bliss/types.hpp"

namespace bliss {

/// Power-up bias of every SRAM cell: probability that the cell latches to 1.
class SramBiasArray {
 public:
  static constexpr int kCells = 10;

  /// Every cell has the same bias p in (0,1).
  static SramBiasArray uniform(int width, int height, double p);
  /// Per-cell bias drawn once from Beta(alpha, beta).
  static SramBiasArray beta(int width, int height, double alpha, double beta, std::uint64_t seed);

  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] int height() const noexcept { return height_; }
  [[nodiscard]] double bias(int x, int y, int cell) const noexcept;
  /// Bias as a 32-bit comparison threshold: the cell reads 1 when a uniform u32 < threshold.
  [[nodiscard]] const std::uint64_t* thresholds(int x, int y) const noexcept {
    return thresholds_.data() + (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * kCells;
  }

 private:
  SramBiasArray(int width, int height);
  void set(std::size_t index, double p);
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint64_t> thresholds_;
};

/// One power-up event: a 10-bit word per pixel, bit k is cell k.
Grid<std::uint16_t> power_up(const SramBiasArray& biases, std::uint64_t seed);

/// 16-entry table mapping threshold theta to the fraction of pixels whose
/// popcount surpasses it.
class CalibrationLut {
 public:
  static constexpr int kEntries = 16;

  CalibrationLut() = default;
  explicit CalibrationLut(const std::array<double, kEntries>& rates);

  [[nodiscard]] double rate(int theta) const;
  [[nodiscard]] const std::array<double, kEntries>& rates() const noexcept { return rates_; }
  /// theta minimising |rate(theta) - target|; ties go to the smaller theta.
  [[nodiscard]] int theta_for(double target_rate) const;

  /// `theta,rate` lines, one per entry.
  [[nodiscard]] std::string to_text() const;
  static CalibrationLut from_text(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static CalibrationLut load(const std::filesystem::path& path);

  /// Closed form for identical cells of bias p: P(Binomial(10, p) > theta).
  static CalibrationLut binomial(double p);

 private:
  std::array<double, kEntries> rates_{};
};

/// Profiles popcount statistics over `n_cycles` power-ups (n_cycles >= 100).
CalibrationLut calibrate(const SramBiasArray& biases, int n_cycles, std::uint64_t seed);

struct SampleMask {
  Grid<std::uint8_t> bits;
  Roi roi;
  int theta = 0;
  double target_rate = 0.0;
  double achieved_rate = 0.0;  // set bits / ROI area
  [[nodiscard]] std::size_t count() const noexcept;
};

/// mask = (popcount(word) > theta) AND row enable AND column enable.
SampleMask sample_gate(const Grid<std::uint16_t>& words, int theta, const Roi& roi);

}  // namespace bliss
