#include "bliss/eventify.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>

#include "bliss/error.hpp"

namespace bliss {

std::size_t EventMap::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits.values().begin(), bits.values().end(), std::uint8_t{1}));
}

EventMap eventify(const Grid<std::uint16_t>& prev, const Grid<std::uint16_t>& curr, int sigma, int frame_index) {
  if (!prev.same_shape(curr)) throw ContractError("eventify: frame dimensions differ");
  if (sigma < 0) throw ContractError("eventify: sigma must be non-negative");
  EventMap out{Grid<std::uint8_t>(curr.width(), curr.height()), frame_index};
  const auto a = prev.values();
  const auto b = curr.values();
  auto dst = out.bits.values();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int diff = static_cast<int>(b[i]) - static_cast<int>(a[i]);
    dst[i] = (diff > sigma || -diff > sigma) ? 1 : 0;
  }
  return out;
}

EventMap eventify(const Frame& prev, const Frame& curr, int sigma) {
  return eventify(prev.pixels, curr.pixels, sigma, curr.index);
}

std::vector<std::uint8_t> pack_event_bits(const EventMap& events) {
  const std::size_t row_bytes = (static_cast<std::size_t>(events.width()) + 7) / 8;
  std::vector<std::uint8_t> out(row_bytes * static_cast<std::size_t>(events.height()), 0);
  for (int y = 0; y < events.height(); ++y) {
    for (int x = 0; x < events.width(); ++x) {
      if (events.bits(x, y)) out[y * row_bytes + x / 8] |= static_cast<std::uint8_t>(0x80u >> (x % 8));
    }
  }
  return out;
}

EventMap unpack_event_bits(const std::vector<std::uint8_t>& packed, int width, int height, int frame_index) {
  const std::size_t row_bytes = (static_cast<std::size_t>(width) + 7) / 8;
  if (packed.size() != row_bytes * static_cast<std::size_t>(height)) {
    throw FormatError("packed event map has " + std::to_string(packed.size()) + " bytes, expected " +
                      std::to_string(row_bytes * static_cast<std::size_t>(height)));
  }
  EventMap out{Grid<std::uint8_t>(width, height), frame_index};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      out.bits(x, y) = (packed[y * row_bytes + x / 8] >> (7 - x % 8)) & 1u;
    }
  }
  return out;
}

void write_event_map(const EventMap& events, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  const auto packed = pack_event_bits(events);
  out << "P4\n" << events.width() << ' ' << events.height() << '\n';
  out.write(reinterpret_cast<const char*>(packed.data()), static_cast<std::streamsize>(packed.size()));
}

EventMap read_event_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  std::string magic;
  int width = 0;
  int height = 0;
  in >> magic >> width >> height;
  if (magic != "P4" || !in || width <= 0 || height <= 0) throw FormatError(path.string() + ": not a PBM (P4) event map");
  in.get();
  const std::vector<std::uint8_t> packed((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return unpack_event_bits(packed, width, height);
}

}  // namespace bliss
