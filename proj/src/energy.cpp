#include "bliss/energy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bliss/error.hpp"

namespace bliss {

void EnergyCoefficients::validate() const {
  const std::pair<const char*, double> fields[] = {
      {"energy.e_adc_per_pixel", e_adc_per_pixel},       {"energy.e_mipi_per_byte", e_mipi_per_byte},
      {"energy.e_mac_sensor", e_mac_sensor},             {"energy.e_mac_host", e_mac_host},
      {"energy.e_sram_per_access", e_sram_per_access},   {"energy.p_leak_frame_buffer", p_leak_frame_buffer},
      {"energy.p_analog_retention", p_analog_retention}, {"energy.e_dram_per_byte", e_dram_per_byte},
      {"energy.e_exposure_per_frame", e_exposure_per_frame}, {"energy.e_host_buffer_per_mac", e_host_buffer_per_mac},
      {"energy.e_rle_per_element", e_rle_per_element},
  };
  for (const auto& [name, v] : fields) {
    if (!std::isfinite(v) || v < 0.0) throw ConfigError(std::string(name) + " must be finite and >= 0");
  }
}

EnergyCoefficients EnergyCoefficients::from_config(const KeyValueConfig& kv) {
  EnergyCoefficients c;
  auto pj = [&](const std::string& key, double fallback) { return kv.get_double(key + "_pj", fallback * 1e12) * 1e-12; };
  auto mw = [&](const std::string& key, double fallback) { return kv.get_double(key + "_mw", fallback * 1e3) * 1e-3; };
  c.e_adc_per_pixel = pj("energy.e_adc_per_pixel", c.e_adc_per_pixel);
  c.e_mipi_per_byte = pj("energy.e_mipi_per_byte", c.e_mipi_per_byte);
  c.e_mac_sensor = pj("energy.e_mac_sensor", c.e_mac_sensor);
  c.e_mac_host = pj("energy.e_mac_host", c.e_mac_host);
  c.e_sram_per_access = pj("energy.e_sram_per_access", c.e_sram_per_access);
  c.p_leak_frame_buffer = mw("energy.p_leak_frame_buffer", c.p_leak_frame_buffer);
  c.p_analog_retention = mw("energy.p_analog_retention", c.p_analog_retention);
  c.e_dram_per_byte = pj("energy.e_dram_per_byte", c.e_dram_per_byte);
  c.e_exposure_per_frame = pj("energy.e_exposure_per_frame", c.e_exposure_per_frame);
  c.e_host_buffer_per_mac = pj("energy.e_host_buffer_per_mac", c.e_host_buffer_per_mac);
  c.e_rle_per_element = pj("energy.e_rle_per_element", c.e_rle_per_element);
  c.sensor_node = static_cast<int>(kv.get_int("node.sensor_nm", c.sensor_node));
  c.host_node = static_cast<int>(kv.get_int("node.host_nm", c.host_node));
  c.validate();
  return c;
}

NodeScalingTable::NodeScalingTable(int reference_node) : reference_(reference_node) {
  table_[reference_node] = NodeScale{};
}

void NodeScalingTable::set(int node, const NodeScale& s) {
  for (double v : {s.logic_energy, s.logic_delay, s.sram_energy, s.sram_delay}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("node " + std::to_string(node) + " has a non-positive scale");
  }
  if (node == reference_ && (s.logic_energy != 1.0 || s.logic_delay != 1.0 || s.sram_energy != 1.0 || s.sram_delay != 1.0)) {
    throw ConfigError("reference node " + std::to_string(node) + " must scale by 1.0");
  }
  table_[node] = s;
}

const NodeScale& NodeScalingTable::at(int node) const {
  const auto it = table_.find(node);
  if (it == table_.end()) throw ConfigError("node " + std::to_string(node) + " nm is not in the node scaling table");
  return it->second;
}

std::vector<int> NodeScalingTable::nodes() const {
  std::vector<int> out;
  for (const auto& [n, s] : table_) out.push_back(n);
  return out;
}

NodeScalingTable NodeScalingTable::parse(const std::string& text, int reference_node) {
  NodeScalingTable t(reference_node);
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    int node = 0;
    NodeScale s;
    if (!(fields >> node >> s.logic_energy >> s.logic_delay >> s.sram_energy >> s.sram_delay)) {
      throw ConfigError("node table line " + std::to_string(line_no) + " needs 5 numeric fields");
    }
    t.set(node, s);
  }
  return t;
}

NodeScalingTable NodeScalingTable::load(const std::filesystem::path& path, int reference_node) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open node table '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), reference_node);
}

std::string_view to_string(EnergyComponent c) noexcept {
  switch (c) {
    case EnergyComponent::exposure: return "exposure";
    case EnergyComponent::readout: return "readout";
    case EnergyComponent::mipi: return "mipi";
    case EnergyComponent::feedback: return "feedback";
    case EnergyComponent::in_sensor_npu: return "in_sensor_npu";
    case EnergyComponent::in_sensor_buffer: return "in_sensor_buffer";
    case EnergyComponent::host_npu: return "host_npu";
    case EnergyComponent::host_buffer: return "host_buffer";
    case EnergyComponent::dram: return "dram";
    case EnergyComponent::rle_overhead: return "rle_overhead";
  }
  return "?";
}

double EnergyReport::total() const noexcept {
  double sum = 0.0;
  for (double j : joules) sum += j;
  return sum;
}

double EnergyReport::per_frame(EnergyComponent c) const noexcept {
  return frames > 0 ? component(c) / frames : 0.0;
}

double EnergyReport::total_per_frame() const noexcept { return frames > 0 ? total() / frames : 0.0; }

double EnergyReport::sensor_side() const noexcept {
  double sum = 0.0;
  for (auto c : {EnergyComponent::exposure, EnergyComponent::readout, EnergyComponent::mipi, EnergyComponent::feedback,
                 EnergyComponent::in_sensor_npu, EnergyComponent::in_sensor_buffer}) {
    sum += component(c);
  }
  return sum;
}

EnergyReport account(const std::vector<FrameTrace>& traces, VariantMode mode, const EnergyCoefficients& coeffs,
                     const NodeScalingTable& nodes) {
  coeffs.validate();
  const NodeScale& sensor = nodes.at(coeffs.sensor_node);
  const NodeScale& host = nodes.at(coeffs.host_node);
  EnergyReport r;
  r.mode = mode;
  r.frames = static_cast<int>(traces.size());
  auto add = [&](EnergyComponent c, double j) { r.joules[static_cast<std::size_t>(c)] += j; };
  for (const auto& tr : traces) {
    const FrameWork& w = tr.work;
    add(EnergyComponent::exposure, coeffs.e_exposure_per_frame);
    add(EnergyComponent::readout, static_cast<double>(w.pixels_quantized) * coeffs.e_adc_per_pixel);
    add(EnergyComponent::mipi, static_cast<double>(w.bytes_out) * coeffs.e_mipi_per_byte);
    add(EnergyComponent::feedback, static_cast<double>(w.bytes_feedback) * coeffs.e_mipi_per_byte);
    add(EnergyComponent::in_sensor_npu, static_cast<double>(w.macs_in_sensor) * coeffs.e_mac_sensor * sensor.logic_energy);
    if (in_sensor_sampling(mode)) {
      const double retention = tr.at(Stage::sampling).end - tr.at(Stage::exposure).start;
      if (mode == VariantMode::S_NPU) {
        const double accesses = 2.0 * static_cast<double>(w.pixels_quantized);
        add(EnergyComponent::in_sensor_buffer,
            (coeffs.p_leak_frame_buffer * retention + accesses * coeffs.e_sram_per_access) * sensor.sram_energy);
      } else {
        add(EnergyComponent::in_sensor_buffer, coeffs.p_analog_retention * retention);
      }
      add(EnergyComponent::rle_overhead, static_cast<double>(w.rle_elements) * coeffs.e_rle_per_element * sensor.logic_energy);
    }
    add(EnergyComponent::host_npu, static_cast<double>(w.macs_on_host) * coeffs.e_mac_host * host.logic_energy);
    add(EnergyComponent::host_buffer, static_cast<double>(w.macs_on_host) * coeffs.e_host_buffer_per_mac * host.sram_energy);
    add(EnergyComponent::dram, 2.0 * static_cast<double>(w.bytes_out) * coeffs.e_dram_per_byte);
  }
  return r;
}

double RatioTable::get(VariantMode a, VariantMode b) const {
  const auto ia = std::find(modes.begin(), modes.end(), a);
  const auto ib = std::find(modes.begin(), modes.end(), b);
  if (ia == modes.end() || ib == modes.end()) throw ContractError("mode missing from ratio table");
  return ratio[static_cast<std::size_t>(ia - modes.begin())][static_cast<std::size_t>(ib - modes.begin())];
}

RatioTable compare_variants(const std::map<VariantMode, EnergyReport>& reports) {
  RatioTable t;
  for (const auto& [m, r] : reports) t.modes.push_back(m);
  for (const auto& [ma, ra] : reports) {
    std::vector<double> row;
    for (const auto& [mb, rb] : reports) {
      const double a = ra.total_per_frame();
      const double b = rb.total_per_frame();
      row.push_back(a == b ? 1.0 : a / b);
    }
    t.ratio.push_back(std::move(row));
  }
  return t;
}

double calibrate_adc_energy(const EnergyCoefficients& coeffs, std::uint64_t frame_pixels, std::uint64_t dense_bytes,
                            double share) {
  if (!(share > 0.0 && share < 1.0)) throw ContractError("readout share must be in (0,1)");
  if (frame_pixels == 0) throw ContractError("frame has no pixels");
  const double rest = coeffs.e_exposure_per_frame + static_cast<double>(dense_bytes) * coeffs.e_mipi_per_byte;
  return share / (1.0 - share) * rest / static_cast<double>(frame_pixels);
}

}  // namespace bliss
