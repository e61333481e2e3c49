#include "bliss/sampler.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <boost/math/distributions/binomial.hpp>
#include <boost/random/beta_distribution.hpp>

#include "bliss/error.hpp"

namespace bliss {
namespace {

constexpr double kTwo32 = 4294967296.0;

std::mt19937_64 row_stream(std::uint64_t seed, std::uint64_t salt, int row) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(salt), static_cast<std::uint32_t>(row)};
  return std::mt19937_64(seq);
}

std::uint16_t draw_word(const std::uint64_t* thr, std::mt19937_64& rng) {
  unsigned word = 0;
  for (int k = 0; k < SramBiasArray::kCells; k += 2) {
    const std::uint64_t r = rng();
    word |= static_cast<unsigned>((r & 0xffffffffu) < thr[k]) << k;
    word |= static_cast<unsigned>((r >> 32) < thr[k + 1]) << (k + 1);
  }
  return static_cast<std::uint16_t>(word);
}

}  // namespace

SramBiasArray::SramBiasArray(int width, int height) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw ContractError("bias array dimensions must be positive");
  thresholds_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * kCells);
}

void SramBiasArray::set(std::size_t index, double p) {
  if (!(p > 0.0 && p < 1.0)) throw ContractError("SRAM bias must lie strictly in (0,1)");
  thresholds_[index] = static_cast<std::uint64_t>(std::llround(p * kTwo32));
}

SramBiasArray SramBiasArray::uniform(int width, int height, double p) {
  SramBiasArray a(width, height);
  for (std::size_t i = 0; i < a.thresholds_.size(); ++i) a.set(i, p);
  return a;
}

SramBiasArray SramBiasArray::beta(int width, int height, double alpha, double beta, std::uint64_t seed) {
  if (!(alpha > 0.0 && beta > 0.0)) throw ContractError("Beta parameters must be positive");
  SramBiasArray a(width, height);
  std::mt19937_64 rng(seed);
  boost::random::beta_distribution<double> dist(alpha, beta);
  const double eps = 1.0 / kTwo32;
  for (std::size_t i = 0; i < a.thresholds_.size(); ++i) a.set(i, std::clamp(dist(rng), eps, 1.0 - eps));
  return a;
}

double SramBiasArray::bias(int x, int y, int cell) const noexcept {
  return static_cast<double>(thresholds(x, y)[cell]) / kTwo32;
}

Grid<std::uint16_t> power_up(const SramBiasArray& biases, std::uint64_t seed) {
  Grid<std::uint16_t> words(biases.width(), biases.height());
  for (int y = 0; y < biases.height(); ++y) {
    auto rng = row_stream(seed, 0x5352414dU, y);
    auto row = words.row(y);
    for (int x = 0; x < biases.width(); ++x) row[static_cast<std::size_t>(x)] = draw_word(biases.thresholds(x, y), rng);
  }
  return words;
}

CalibrationLut::CalibrationLut(const std::array<double, kEntries>& rates) : rates_(rates) {
  for (int t = 0; t < kEntries; ++t) {
    if (!(rates_[static_cast<std::size_t>(t)] >= 0.0 && rates_[static_cast<std::size_t>(t)] <= 1.0)) {
      throw FormatError("LUT rate for theta " + std::to_string(t) + " outside [0,1]");
    }
    if (t > 0 && rates_[static_cast<std::size_t>(t)] > rates_[static_cast<std::size_t>(t - 1)]) {
      throw FormatError("LUT rates must be non-increasing in theta");
    }
  }
}

double CalibrationLut::rate(int theta) const {
  if (theta < 0 || theta >= kEntries) throw ContractError("theta must be in [0,15]");
  return rates_[static_cast<std::size_t>(theta)];
}

int CalibrationLut::theta_for(double target_rate) const {
  int best = 0;
  double best_gap = std::abs(rates_[0] - target_rate);
  for (int t = 1; t < kEntries; ++t) {
    const double gap = std::abs(rates_[static_cast<std::size_t>(t)] - target_rate);
    if (gap < best_gap) {
      best = t;
      best_gap = gap;
    }
  }
  return best;
}

std::string CalibrationLut::to_text() const {
  std::ostringstream out;
  out.precision(17);
  for (int t = 0; t < kEntries; ++t) out << t << ',' << rates_[static_cast<std::size_t>(t)] << '\n';
  return out.str();
}

CalibrationLut CalibrationLut::from_text(const std::string& text) {
  std::array<double, kEntries> rates{};
  std::array<bool, kEntries> seen{};
  std::istringstream in(text);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw FormatError("LUT line without comma: '" + line + "'");
    int theta = 0;
    double rate = 0.0;
    try {
      theta = std::stoi(line.substr(0, comma));
      rate = std::stod(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw FormatError("unparsable LUT line: '" + line + "'");
    }
    if (theta < 0 || theta >= kEntries || seen[static_cast<std::size_t>(theta)]) {
      throw FormatError("bad or repeated theta in LUT line: '" + line + "'");
    }
    seen[static_cast<std::size_t>(theta)] = true;
    rates[static_cast<std::size_t>(theta)] = rate;
    ++lines;
  }
  if (lines != kEntries) throw FormatError("LUT must have exactly 16 entries, found " + std::to_string(lines));
  return CalibrationLut(rates);
}

void CalibrationLut::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  out << to_text();
}

CalibrationLut CalibrationLut::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return from_text(text.str());
}

CalibrationLut CalibrationLut::binomial(double p) {
  boost::math::binomial_distribution<double> dist(SramBiasArray::kCells, p);
  std::array<double, kEntries> rates{};
  for (int t = 0; t < kEntries; ++t) {
    rates[static_cast<std::size_t>(t)] = t >= SramBiasArray::kCells ? 0.0 : boost::math::cdf(boost::math::complement(dist, t));
  }
  return CalibrationLut(rates);
}

CalibrationLut calibrate(const SramBiasArray& biases, int n_cycles, std::uint64_t seed) {
  if (n_cycles < 100) throw ContractError("calibration needs at least 100 power-up cycles");
  std::array<std::uint64_t, SramBiasArray::kCells + 1> histogram{};
  for (int y = 0; y < biases.height(); ++y) {
    auto rng = row_stream(seed, 0x43414c49U, y);
    for (int c = 0; c < n_cycles; ++c) {
      for (int x = 0; x < biases.width(); ++x) {
        ++histogram[static_cast<std::size_t>(std::popcount(draw_word(biases.thresholds(x, y), rng)))];
      }
    }
  }
  const double total = static_cast<double>(biases.width()) * biases.height() * n_cycles;
  std::array<double, CalibrationLut::kEntries> rates{};
  std::uint64_t above = 0;
  for (int t = SramBiasArray::kCells; t >= 0; --t) {
    if (t < CalibrationLut::kEntries) rates[static_cast<std::size_t>(t)] = static_cast<double>(above) / total;
    above += histogram[static_cast<std::size_t>(t)];
  }
  return CalibrationLut(rates);
}

std::size_t SampleMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits.values().begin(), bits.values().end(), std::uint8_t{1}));
}

SampleMask sample_gate(const Grid<std::uint16_t>& words, int theta, const Roi& roi) {
  if (theta < 0 || theta >= CalibrationLut::kEntries) throw ContractError("theta must be in [0,15]");
  if (roi.x1 < 0 || roi.y1 < 0 || roi.x2 >= words.width() || roi.y2 >= words.height() || roi.x1 > roi.x2 ||
      roi.y1 > roi.y2) {
    throw ContractError("ROI outside the pixel array");
  }
  SampleMask mask{Grid<std::uint8_t>(words.width(), words.height()), roi, theta, 0.0, 0.0};
  std::size_t set = 0;
  for (int y = roi.y1; y <= roi.y2; ++y) {
    const auto in = words.row(y);
    auto out = mask.bits.row(y);
    for (int x = roi.x1; x <= roi.x2; ++x) {
      const bool on = std::popcount(static_cast<unsigned>(in[static_cast<std::size_t>(x)])) > theta;
      out[static_cast<std::size_t>(x)] = on ? 1 : 0;
      set += on ? 1 : 0;
    }
  }
  mask.achieved_rate = static_cast<double>(set) / static_cast<double>(roi.area());
  return mask;
}

}  // namespace bliss
