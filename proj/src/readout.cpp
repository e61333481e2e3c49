#include "bliss/readout.hpp"

#include <algorithm>
#include <cstring>
#include <limits>

#include "bliss/error.hpp"

namespace bliss {
namespace {

constexpr std::uint8_t kMagic[4] = {'B', 'R', 'L', 'E'};
constexpr std::size_t kMaxRun = std::numeric_limits<std::uint16_t>::max();

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint16_t get16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t get32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

}  // namespace

std::size_t ReadoutBuffer::nonzero() const noexcept {
  return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](std::uint16_t v) { return v != 0; }));
}

ReadoutBuffer sparse_readout(const Frame& frame, const Roi& roi, const SampleMask& mask) {
  if (!(mask.roi == roi)) throw ContractError("sample mask was gated by a different ROI");
  if (frame.width() != mask.bits.width() || frame.height() != mask.bits.height()) throw ContractError("sample mask and frame dimensions differ");
  if (roi.x1 < 0 || roi.y1 < 0 || roi.x2 >= frame.width() || roi.y2 >= frame.height() || roi.x1 > roi.x2 ||
      roi.y1 > roi.y2) {
    throw ContractError("ROI outside the frame");
  }
  ReadoutBuffer buf{std::vector<std::uint16_t>(static_cast<std::size_t>(roi.area()), 0), roi, frame.index};
  std::size_t i = 0;
  for (int x = roi.x1; x <= roi.x2; ++x) {
    for (int y = roi.y1; y <= roi.y2; ++y, ++i) {
      if (mask.bits(x, y) != 0) buf.values[i] = std::max<std::uint16_t>(frame.pixels(x, y), 1);
    }
  }
  return buf;
}

Grid<std::uint16_t> buffer_to_grid(const ReadoutBuffer& buffer) {
  const Roi& r = buffer.roi;
  if (buffer.values.size() != static_cast<std::size_t>(r.area())) throw ContractError("buffer length != ROI area");
  Grid<std::uint16_t> grid(r.width(), r.height());
  std::size_t i = 0;
  for (int x = 0; x < r.width(); ++x) {
    for (int y = 0; y < r.height(); ++y) grid(x, y) = buffer.values[i++];
  }
  return grid;
}

std::vector<std::uint8_t> RleStream::to_bytes() const {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  out.reserve(byte_size());
  put16(out, kVersion);
  put32(out, header.frame_index);
  for (int v : {header.roi.x1, header.roi.y1, header.roi.x2, header.roi.y2}) {
    if (v < 0 || v > 0xFFFF) throw ContractError("ROI corner " + std::to_string(v) + " does not fit the u16 header field");
    put16(out, static_cast<std::uint16_t>(v));
  }
  put32(out, header.total_length);
  for (auto w : records) put16(out, w);
  return out;
}

RleStream RleStream::from_bytes(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes) throw CorruptStreamError("truncated header");
  if (!std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) throw CorruptStreamError("bad magic");
  if (get16(bytes, 4) != kVersion) throw CorruptStreamError("unsupported version " + std::to_string(get16(bytes, 4)));
  if ((bytes.size() - kHeaderBytes) % 2 != 0) throw CorruptStreamError("record area ends mid-word");
  RleStream s;
  s.header.frame_index = get32(bytes, 6);
  s.header.roi = {get16(bytes, 10), get16(bytes, 12), get16(bytes, 14), get16(bytes, 16)};
  s.header.total_length = get32(bytes, 18);
  s.records.reserve((bytes.size() - kHeaderBytes) / 2);
  for (std::size_t at = kHeaderBytes; at < bytes.size(); at += 2) s.records.push_back(get16(bytes, at));
  return s;
}

RleStream rle_encode(const ReadoutBuffer& buffer) {
  RleStream s;
  s.header = {static_cast<std::uint32_t>(buffer.frame_index), buffer.roi,
              static_cast<std::uint32_t>(buffer.values.size())};
  const auto& v = buffer.values;
  const std::size_t n = v.size();
  std::size_t i = 0;
  while (i < n) {
    std::size_t lit_end = i;
    while (lit_end < n && v[lit_end] != 0 && lit_end - i < kMaxRun) ++lit_end;
    s.records.push_back(static_cast<std::uint16_t>(lit_end - i));
    s.records.insert(s.records.end(), v.begin() + static_cast<std::ptrdiff_t>(i), v.begin() + static_cast<std::ptrdiff_t>(lit_end));
    std::size_t zero_end = lit_end;
    while (zero_end < n && v[zero_end] == 0 && zero_end - lit_end < kMaxRun) ++zero_end;
    s.records.push_back(static_cast<std::uint16_t>(zero_end - lit_end));
    i = zero_end;
  }
  return s;
}

ReadoutBuffer rle_decode(const RleStream& stream) {
  ReadoutBuffer buf{{}, stream.header.roi, static_cast<int>(stream.header.frame_index)};
  const std::size_t expected = stream.header.total_length;
  buf.values.reserve(expected);
  const auto& r = stream.records;
  std::size_t at = 0;
  while (at < r.size()) {
    const std::size_t lits = r[at++];
    if (r.size() - at < lits + 1) throw CorruptStreamError("record truncated at word " + std::to_string(at - 1));
    for (std::size_t k = 0; k < lits; ++k) {
      if (r[at + k] == 0) throw CorruptStreamError("zero literal at word " + std::to_string(at + k));
    }
    if (buf.values.size() + lits + r[at + lits] > expected) {
      throw CorruptStreamError("decoded length exceeds header length " + std::to_string(expected));
    }
    buf.values.insert(buf.values.end(), r.begin() + static_cast<std::ptrdiff_t>(at),
                      r.begin() + static_cast<std::ptrdiff_t>(at + lits));
    at += lits;
    buf.values.resize(buf.values.size() + r[at++], 0);
  }
  if (buf.values.size() != expected) {
    throw CorruptStreamError("decoded length " + std::to_string(buf.values.size()) + " != header length " +
                             std::to_string(expected));
  }
  return buf;
}

ReadoutBuffer rle_decode(std::span<const std::uint8_t> bytes) { return rle_decode(RleStream::from_bytes(bytes)); }

void MipiConfig::validate() const {
  if (lanes < 1) throw ConfigError("mipi.lanes must be >= 1");
  if (!(lane_rate > 0.0)) throw ConfigError("mipi.lane_rate must be > 0");
  if (!(energy_per_byte >= 0.0)) throw ConfigError("mipi.energy_per_byte must be >= 0");
}

MipiCost mipi_transfer(std::uint64_t n_bytes, const MipiConfig& cfg) {
  cfg.validate();
  const double bytes = static_cast<double>(n_bytes);
  return {bytes * 8.0 / (cfg.lanes * cfg.lane_rate), bytes * cfg.energy_per_byte};
}

std::uint64_t dense_frame_bytes(int width, int height, int bits_per_pixel) noexcept {
  const auto bits = static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height) *
                    static_cast<std::uint64_t>(bits_per_pixel);
  return (bits + 7) / 8;
}

}  // namespace bliss
