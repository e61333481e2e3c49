#include <doctest.h>

#include <random>

#include "bliss/config.hpp"
#include "bliss/energy.hpp"
#include "bliss/error.hpp"
#include "support/helpers.hpp"

using namespace bliss;

namespace {

EnergyCoefficients defaults() {
  const auto kv = KeyValueConfig::load(test::config_dir() / "default.cfg");
  return EnergyCoefficients::from_config(kv);
}

FrameTrace trace(const FrameWork& w, double exposure_start = 0.0, double sampling_end = 0.0) {
  FrameTrace t;
  t.work = w;
  t.at(Stage::exposure) = {exposure_start, exposure_start + 1e-3, true};
  if (sampling_end > 0.0) t.at(Stage::sampling) = {sampling_end - 1e-6, sampling_end, true};
  return t;
}

}  // namespace

TEST_CASE("empty trace list gives an all-zero report") {
  const auto r = account({}, VariantMode::BLISSCAM, defaults(), NodeScalingTable(16));
  CHECK(r.frames == 0);
  CHECK(r.total() == 0.0);
  CHECK(r.total_per_frame() == 0.0);
}

TEST_CASE("8-bit dense frame over the link costs 25.6 uJ") {
  EnergyCoefficients c;
  c.e_mipi_per_byte = 100e-12;
  FrameWork w;
  w.bytes_out = 640 * 400;
  const auto r = account({trace(w), trace(w)}, VariantMode::NPU_FULL, c, NodeScalingTable(16));
  CHECK(r.per_frame(EnergyComponent::mipi) == doctest::Approx(25.6e-6));
}

TEST_CASE("totals are exact component sums and link energy is linear in bytes") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::uint64_t> n(0, 400000);
  const auto c = defaults();
  for (auto mode : {VariantMode::NPU_FULL, VariantMode::NPU_ROI, VariantMode::S_NPU, VariantMode::BLISSCAM}) {
    std::vector<FrameTrace> traces;
    for (int i = 0; i < 5; ++i) {
      FrameWork w{n(rng), n(rng), n(rng), n(rng), n(rng), n(rng), n(rng) * 1000, n(rng)};
      traces.push_back(trace(w, i * 0.008, i * 0.008 + 0.0083));
    }
    const auto r = account(traces, mode, c, NodeScalingTable(16));
    double sum = 0.0;
    for (int k = 0; k < kEnergyComponentCount; ++k) sum += r.component(static_cast<EnergyComponent>(k));
    CHECK(r.total() == sum);
    for (double j : r.joules) CHECK(j >= 0.0);
    if (mode == VariantMode::NPU_FULL || mode == VariantMode::NPU_ROI) {
      CHECK(r.component(EnergyComponent::in_sensor_buffer) == 0.0);
      CHECK(r.component(EnergyComponent::rle_overhead) == 0.0);
    }
  }
  FrameWork a, b;
  a.bytes_out = 1000;
  b.bytes_out = 3000;
  const auto ra = account({trace(a)}, VariantMode::NPU_FULL, c, NodeScalingTable(16));
  const auto rb = account({trace(b)}, VariantMode::NPU_FULL, c, NodeScalingTable(16));
  CHECK(rb.component(EnergyComponent::mipi) == doctest::Approx(3 * ra.component(EnergyComponent::mipi)));
}

TEST_CASE("frame buffer leakage only in S_NPU, analog retention only in BLISSCAM") {
  EnergyCoefficients c;
  c.p_leak_frame_buffer = 1e-3;
  c.p_analog_retention = 2e-3;
  FrameWork w;
  const auto s = account({trace(w, 0.0, 0.01)}, VariantMode::S_NPU, c, NodeScalingTable(16));
  const auto b = account({trace(w, 0.0, 0.01)}, VariantMode::BLISSCAM, c, NodeScalingTable(16));
  CHECK(s.component(EnergyComponent::in_sensor_buffer) == doctest::Approx(1e-3 * 0.01));
  CHECK(b.component(EnergyComponent::in_sensor_buffer) == doctest::Approx(2e-3 * 0.01));
}

TEST_CASE("node scaling multiplies the compute terms") {
  auto c = defaults();
  FrameWork w;
  w.macs_in_sensor = 1000000;
  w.macs_on_host = 5000000;
  auto table = NodeScalingTable::load(test::config_dir() / "nodes.csv");
  const auto ref = account({trace(w)}, VariantMode::BLISSCAM, c, table);
  c.sensor_node = 65;
  const auto old = account({trace(w)}, VariantMode::BLISSCAM, c, table);
  CHECK(old.component(EnergyComponent::in_sensor_npu) ==
        doctest::Approx(ref.component(EnergyComponent::in_sensor_npu) * table.at(65).logic_energy));
  CHECK(old.component(EnergyComponent::host_npu) == doctest::Approx(ref.component(EnergyComponent::host_npu)));
  c.sensor_node = 3;
  CHECK_THROWS_AS(account({trace(w)}, VariantMode::BLISSCAM, c, table), ConfigError);
}

TEST_CASE("node table parsing") {
  const auto t = NodeScalingTable::parse("# comment\n16,1,1,1,1\n7, 0.5, 0.7, 0.6, 0.8\n");
  CHECK(t.at(7).sram_energy == doctest::Approx(0.6));
  CHECK(t.nodes() == std::vector<int>{7, 16});
  CHECK_THROWS_AS(NodeScalingTable::parse("16,1,1,2,1\n"), ConfigError);
  CHECK_THROWS_AS(NodeScalingTable::parse("7,1,1\n"), ConfigError);
  CHECK_THROWS_AS(NodeScalingTable::parse("7,0,1,1,1\n"), ConfigError);
  for (int node : NodeScalingTable::load(test::config_dir() / "nodes.csv").nodes()) CHECK(node > 0);
}

TEST_CASE("ratio table") {
  EnergyReport a;
  a.frames = 1;
  a.joules[0] = 2.0;
  std::map<VariantMode, EnergyReport> same{{VariantMode::NPU_FULL, a}, {VariantMode::BLISSCAM, a}};
  same[VariantMode::BLISSCAM].mode = VariantMode::BLISSCAM;
  const auto t = compare_variants(same);
  CHECK(t.get(VariantMode::NPU_FULL, VariantMode::BLISSCAM) == 1.0);
  same[VariantMode::BLISSCAM].joules[0] = 0.5;
  CHECK(compare_variants(same).get(VariantMode::NPU_FULL, VariantMode::BLISSCAM) == doctest::Approx(4.0));
  CHECK_THROWS_AS((void)t.get(VariantMode::S_NPU, VariantMode::BLISSCAM), ContractError);
}

TEST_CASE("shipped ADC energy is the 66 percent readout calibration") {
  const auto c = defaults();
  const double e = calibrate_adc_energy(c, 640 * 400, 320000, 0.66);
  CHECK(c.e_adc_per_pixel == doctest::Approx(e).epsilon(1e-6));
  FrameWork w;
  w.pixels_quantized = 640 * 400;
  w.pixels_read = 640 * 400;
  w.bytes_out = 320000;
  const auto r = account({trace(w)}, VariantMode::NPU_FULL, c, NodeScalingTable(16));
  CHECK(r.component(EnergyComponent::readout) / r.sensor_side() == doctest::Approx(0.66).epsilon(1e-6));
  CHECK_THROWS_AS(calibrate_adc_energy(c, 0, 1, 0.5), ContractError);
  CHECK_THROWS_AS(calibrate_adc_energy(c, 1, 1, 1.0), ContractError);
}

TEST_CASE("coefficient keys and validation") {
  const auto c = EnergyCoefficients::from_config(KeyValueConfig::parse("energy.e_mac_host_pj = 0.5\nnode.sensor_nm = 7\n"));
  CHECK(c.e_mac_host == doctest::Approx(0.5e-12));
  CHECK(c.sensor_node == 7);
  CHECK_THROWS_AS(EnergyCoefficients::from_config(KeyValueConfig::parse("energy.e_dram_per_byte_pj = -1\n")), ConfigError);
}
