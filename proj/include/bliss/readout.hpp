#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bliss/sampler.hpp"
#include "bliss/types.hpp"

namespace bliss {

/// ROI pixels in column-major order (x1..x2 outer, y1..y2 inner); 0 marks an unsampled pixel.
struct ReadoutBuffer {
  std::vector<std::uint16_t> values;
  Roi roi;
  int frame_index = 0;

  [[nodiscard]] std::size_t nonzero() const noexcept;
  friend bool operator==(const ReadoutBuffer&, const ReadoutBuffer&) = default;
};

/// Sampled pixels keep their value (floored to 1); everything else reads 0.
/// Throws ContractError when the mask was gated by a different ROI or frame size.
ReadoutBuffer sparse_readout(const Frame& frame, const Roi& roi, const SampleMask& mask);

/// Scatters a buffer back into a ROI-sized grid (row-major).
Grid<std::uint16_t> buffer_to_grid(const ReadoutBuffer& buffer);

struct RleHeader {
  std::uint32_t frame_index = 0;
  Roi roi;
  std::uint32_t total_length = 0;
  friend bool operator==(const RleHeader&, const RleHeader&) = default;
};

/// Run-length stream: header plus records [literal_count][literals...][zero_run],
/// all u16 little-endian on the wire.
///
/// Wire header: "BRLE" | version u16 | frame_index u32 | x1 y1 x2 y2 u16 | total_length u32.
struct RleStream {
  static constexpr std::uint16_t kVersion = 1;
  static constexpr std::size_t kHeaderBytes = 22;

  RleHeader header;
  std::vector<std::uint16_t> records;

  [[nodiscard]] std::size_t byte_size() const noexcept { return kHeaderBytes + 2 * records.size(); }
  /// Throws ContractError when an ROI corner does not fit the u16 header field.
  [[nodiscard]] std::vector<std::uint8_t> to_bytes() const;
  /// Throws CorruptStreamError on a bad magic/version or a truncated header or record area.
  static RleStream from_bytes(std::span<const std::uint8_t> bytes);
  friend bool operator==(const RleStream&, const RleStream&) = default;
};

RleStream rle_encode(const ReadoutBuffer& buffer);
/// Throws CorruptStreamError on truncation, a zero literal or a length mismatch.
ReadoutBuffer rle_decode(const RleStream& stream);
ReadoutBuffer rle_decode(std::span<const std::uint8_t> bytes);

struct MipiConfig {
  int lanes = 4;
  double lane_rate = 2.25e9;         // bits/s per lane
  double energy_per_byte = 100e-12;  // J
  void validate() const;
};

struct MipiCost {
  double latency = 0.0;  // s
  double energy = 0.0;   // J
};

MipiCost mipi_transfer(std::uint64_t n_bytes, const MipiConfig& cfg);

/// Bytes of a dense frame with `bits_per_pixel` packed bits per pixel (RAW10 -> 10).
std::uint64_t dense_frame_bytes(int width, int height, int bits_per_pixel) noexcept;

}  // namespace bliss
