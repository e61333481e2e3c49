#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "bliss/types.hpp"

namespace bliss {

/// Binary inter-frame change map.
struct EventMap {
  Grid<std::uint8_t> bits;  // 0 or 1
  int frame_index = 0;

  [[nodiscard]] int width() const noexcept { return bits.width(); }
  [[nodiscard]] int height() const noexcept { return bits.height(); }
  [[nodiscard]] std::size_t count() const noexcept;
};

/// bit(x,y) = 1 iff |curr(x,y) - prev(x,y)| > sigma.
EventMap eventify(const Grid<std::uint16_t>& prev, const Grid<std::uint16_t>& curr, int sigma, int frame_index = 0);
EventMap eventify(const Frame& prev, const Frame& curr, int sigma);

/// 1-bit packed raster, row-major, MSB first, each row padded to a byte (PBM P4 payload).
std::vector<std::uint8_t> pack_event_bits(const EventMap& events);
EventMap unpack_event_bits(const std::vector<std::uint8_t>& packed, int width, int height, int frame_index = 0);

/// Debug dump as a binary PBM (P4) file.
void write_event_map(const EventMap& events, const std::filesystem::path& path);
EventMap read_event_map(const std::filesystem::path& path);

}  // namespace bliss
