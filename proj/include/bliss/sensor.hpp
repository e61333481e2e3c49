#pragma once

#include <cstddef>
#include <cstdint>

#include "bliss/config.hpp"
#include "bliss/types.hpp"

namespace bliss {

struct SensorConfig {
  int width = 640;
  int height = 400;
  double fps = 120.0;
  double exposure_time = 1.0 / 120.0;  // seconds
  double full_well = 10000.0;          // electrons
  int adc_bits = 10;
  /// Eventification threshold in DN of an 8-bit reference scale; see eventify_threshold_dn().
  double eventify_threshold = 15.0;

  /// Throws ConfigError naming the violated invariant.
  void validate() const;

  [[nodiscard]] int max_code() const noexcept { return (1 << adc_bits) - 1; }

  /// Threshold rescaled from the 8-bit reference to this ADC's code range (15 -> 60 at 10 bits).
  [[nodiscard]] int eventify_threshold_dn() const noexcept;

  static SensorConfig from_config(const KeyValueConfig& kv);
};

struct AnalogFrame {
  Grid<double> electrons;
  std::size_t saturated = 0;  // pixels clipped at full well
};

/// Photon shot noise: each pixel ~ Poisson(rate * exposure_time), clipped at full well.
/// Deterministic for a seed; rows draw from independent seeded streams.
AnalogFrame expose(const IrradianceGrid& rates, const SensorConfig& cfg, std::uint64_t seed);

/// Linear single-slope ADC: DN = floor(e / full_well * (2^bits - 1)), clamped to the code range.
Grid<std::uint16_t> quantize(const AnalogFrame& frame, const SensorConfig& cfg);

/// Converts an 8-bit recorded image into irradiance; code 255 fills the full
/// well at the given exposure.
IrradianceGrid irradiance_from_gray(const Grid<std::uint8_t>& image, const SensorConfig& cfg, double exposure);

}  // namespace bliss
