#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "bliss/config.hpp"
#include "bliss/timing.hpp"

namespace bliss {

/// Per-operation energies at the reference process node.
struct EnergyCoefficients {
  double e_adc_per_pixel = 0.0;         // J per conversion
  double e_mipi_per_byte = 100e-12;     // J
  double e_mac_sensor = 0.0;            // J per MAC
  double e_mac_host = 0.0;              // J per MAC
  double e_sram_per_access = 0.0;       // J per pixel access of the in-sensor frame buffer
  double p_leak_frame_buffer = 0.0;     // W, digital frame buffer retaining the previous frame
  double p_analog_retention = 0.0;      // W, analog hold of the previous frame
  double e_dram_per_byte = 0.0;         // J
  double e_exposure_per_frame = 0.0;    // J
  double e_host_buffer_per_mac = 0.0;   // J of host on-chip buffer traffic per MAC
  double e_rle_per_element = 0.0;       // J per readout-buffer element encoded and decoded
  int sensor_node = 16;                 // nm, looked up in the node table
  int host_node = 16;

  void validate() const;
  static EnergyCoefficients from_config(const KeyValueConfig& kv);
};

struct NodeScale {
  double logic_energy = 1.0;
  double logic_delay = 1.0;
  double sram_energy = 1.0;
  double sram_delay = 1.0;
};

/// Process node (nm) -> scale factors relative to the reference node.
/// Text form: `node_nm,logic_energy,logic_delay,sram_energy,sram_delay` rows;
/// `#` lines are comments; the reference row must be all ones.
class NodeScalingTable {
 public:
  explicit NodeScalingTable(int reference_node = 16);

  void set(int node, const NodeScale& scale);
  [[nodiscard]] const NodeScale& at(int node) const;  // throws ConfigError on an unknown node
  [[nodiscard]] bool contains(int node) const noexcept { return table_.count(node) != 0; }
  [[nodiscard]] int reference_node() const noexcept { return reference_; }
  [[nodiscard]] std::vector<int> nodes() const;

  static NodeScalingTable parse(const std::string& text, int reference_node = 16);
  static NodeScalingTable load(const std::filesystem::path& path, int reference_node = 16);

 private:
  int reference_;
  std::map<int, NodeScale> table_;
};

enum class EnergyComponent : int {
  exposure,
  readout,
  mipi,
  feedback,
  in_sensor_npu,
  in_sensor_buffer,
  host_npu,
  host_buffer,
  dram,
  rle_overhead,
};
inline constexpr int kEnergyComponentCount = 10;
std::string_view to_string(EnergyComponent c) noexcept;

struct EnergyReport {
  VariantMode mode = VariantMode::NPU_FULL;
  int frames = 0;
  std::array<double, kEnergyComponentCount> joules{};  // summed over all frames

  [[nodiscard]] double component(EnergyComponent c) const noexcept { return joules[static_cast<std::size_t>(c)]; }
  [[nodiscard]] double total() const noexcept;
  [[nodiscard]] double per_frame(EnergyComponent c) const noexcept;
  [[nodiscard]] double total_per_frame() const noexcept;
  /// Exposure, readout, both link directions and the in-sensor terms.
  [[nodiscard]] double sensor_side() const noexcept;
};

EnergyReport account(const std::vector<FrameTrace>& traces, VariantMode mode, const EnergyCoefficients& coeffs,
                     const NodeScalingTable& nodes);

/// ratio[a][b] = per-frame total of a / per-frame total of b, over the modes present.
struct RatioTable {
  std::vector<VariantMode> modes;
  std::vector<std::vector<double>> ratio;
  [[nodiscard]] double get(VariantMode a, VariantMode b) const;
};
RatioTable compare_variants(const std::map<VariantMode, EnergyReport>& reports);

/// ADC energy per pixel that makes readout `share` of the NPU_FULL sensor-side
/// energy (exposure + readout + dense link) for the given frame.
double calibrate_adc_energy(const EnergyCoefficients& coeffs, std::uint64_t frame_pixels, std::uint64_t dense_bytes,
                            double share);

}  // namespace bliss
