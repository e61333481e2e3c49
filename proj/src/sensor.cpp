#include "bliss/sensor.hpp"

#include <algorithm>
#include <boost/random/poisson_distribution.hpp>
#include <cmath>
#include <random>

#include "bliss/error.hpp"

namespace bliss {

void SensorConfig::validate() const {
  if (width <= 0 || height <= 0) throw ConfigError("sensor dimensions must be positive");
  if (adc_bits < 1 || adc_bits > 16) throw ConfigError("sensor.adc_bits must be in [1, 16]");
  if (!(fps > 0.0)) throw ConfigError("sensor.fps must be positive");
  if (!(exposure_time > 0.0)) throw ConfigError("sensor.exposure_time must be positive");
  // Small slack so that exposure_time = 1/fps computed elsewhere is accepted.
  if (exposure_time > (1.0 / fps) * (1.0 + 1e-12)) throw ConfigError("sensor.exposure_time exceeds the frame period");
  if (!(full_well > 0.0)) throw ConfigError("sensor.full_well must be positive");
  if (!(eventify_threshold >= 0.0)) throw ConfigError("sensor.eventify_threshold must be non-negative");
}

int SensorConfig::eventify_threshold_dn() const noexcept {
  return static_cast<int>(std::lround(eventify_threshold * max_code() / 255.0));
}

SensorConfig SensorConfig::from_config(const KeyValueConfig& kv) {
  SensorConfig c;
  c.width = static_cast<int>(kv.get_int("sensor.width", c.width));
  c.height = static_cast<int>(kv.get_int("sensor.height", c.height));
  c.fps = kv.get_double("sensor.fps", c.fps);
  c.exposure_time = kv.get_double("sensor.exposure_time", 1.0 / c.fps);
  c.full_well = kv.get_double("sensor.full_well", c.full_well);
  c.adc_bits = static_cast<int>(kv.get_int("sensor.adc_bits", c.adc_bits));
  c.eventify_threshold = kv.get_double("sensor.eventify_threshold", c.eventify_threshold);
  c.validate();
  return c;
}

AnalogFrame expose(const IrradianceGrid& rates, const SensorConfig& cfg, std::uint64_t seed) {
  if (!(cfg.exposure_time > 0.0)) throw ConfigError("exposure_time must be positive");
  AnalogFrame out{Grid<double>(rates.width(), rates.height()), 0};
  for (int y = 0; y < rates.height(); ++y) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(y)};
    std::mt19937_64 rng(seq);
    const auto in = rates.row(y);
    auto dst = out.electrons.row(y);
    for (int x = 0; x < rates.width(); ++x) {
      const double rate = in[static_cast<std::size_t>(x)];
      if (!(rate >= 0.0)) throw ContractError("negative irradiance at (" + std::to_string(x) + "," + std::to_string(y) + ")");
      const double mean = rate * cfg.exposure_time;
      double e = 0.0;
      if (mean > 0.0) {
        boost::random::poisson_distribution<long long, double> dist(mean);
        e = static_cast<double>(dist(rng));
      }
      if (e > cfg.full_well) {
        e = cfg.full_well;
        ++out.saturated;
      }
      dst[static_cast<std::size_t>(x)] = e;
    }
  }
  return out;
}

Grid<std::uint16_t> quantize(const AnalogFrame& frame, const SensorConfig& cfg) {
  const double top = cfg.max_code();
  Grid<std::uint16_t> out(frame.electrons.width(), frame.electrons.height());
  const auto src = frame.electrons.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double code = std::floor(src[i] / cfg.full_well * top);
    dst[i] = static_cast<std::uint16_t>(std::clamp(code, 0.0, top));
  }
  return out;
}

IrradianceGrid irradiance_from_gray(const Grid<std::uint8_t>& image, const SensorConfig& cfg, double exposure) {
  if (!(exposure > 0.0)) throw ConfigError("reference exposure must be positive");
  IrradianceGrid out(image.width(), image.height());
  const double scale = cfg.full_well / exposure / 255.0;
  for (std::size_t i = 0; i < image.size(); ++i) out.values()[i] = image.values()[i] * scale;
  return out;
}

}  // namespace bliss
