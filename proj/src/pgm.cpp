#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <map>
#include <regex>

#include "bliss/error.hpp"
#include "bliss/scene.hpp"

namespace bliss {
namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string next_token(const std::vector<char>& bytes, std::size_t& pos, const std::string& name) {
  while (pos < bytes.size()) {
    const auto c = static_cast<unsigned char>(bytes[pos]);
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(c)) {
      ++pos;
    } else {
      break;
    }
  }
  std::string tok;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) tok += bytes[pos++];
  if (tok.empty()) throw FormatError(name + ": truncated PGM header");
  return tok;
}

int parse_header_int(const std::string& tok, const std::string& name) {
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](unsigned char c) { return std::isdigit(c); })) {
    throw FormatError(name + ": bad PGM header field '" + tok + "'");
  }
  return std::stoi(tok);
}

}  // namespace

Grid<std::uint8_t> read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  const std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto name = path.string();
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw FormatError(name + ": not a binary PGM (magic P5)");
  std::size_t pos = 2;
  const int width = parse_header_int(next_token(bytes, pos, name), name);
  const int height = parse_header_int(next_token(bytes, pos, name), name);
  const int maxval = parse_header_int(next_token(bytes, pos, name), name);
  if (width <= 0 || height <= 0) throw FormatError(name + ": non-positive PGM dimensions");
  if (maxval != 255) throw FormatError(name + ": only maxval 255 is supported");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw FormatError(name + ": missing whitespace after PGM header");
  }
  ++pos;
  const std::size_t need = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() - pos < need) throw FormatError(name + ": truncated PGM pixel data");
  Grid<std::uint8_t> img(width, height);
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), need, img.values().begin());
  return img;
}

void write_pgm(const Grid<std::uint8_t>& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  out << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.values().data()), static_cast<std::streamsize>(image.size()));
  if (!out) throw FormatError("write failed for '" + path.string() + "'");
}

std::vector<Grid<std::uint8_t>> load_sequence(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw FormatError("'" + dir.string() + "' is not a directory");
  static const std::regex pattern(R"(frame_(\d{6})\.pgm)");
  std::map<long, std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    std::smatch m;
    const auto fname = entry.path().filename().string();
    if (entry.is_regular_file() && std::regex_match(fname, m, pattern)) files.emplace(std::stol(m[1].str()), entry.path());
  }
  if (files.empty()) throw FormatError("'" + dir.string() + "' contains no frame_%06d.pgm files");
  std::vector<Grid<std::uint8_t>> frames;
  long expected = files.begin()->first;
  for (const auto& [index, path] : files) {
    if (index != expected) throw SequenceGapError("frame index " + std::to_string(expected) + " is missing in '" + dir.string() + "'");
    ++expected;
    auto img = read_pgm(path);
    if (!frames.empty() && !img.same_shape(frames.front())) {
      throw FormatError(path.string() + ": dimensions differ from the first frame");
    }
    frames.push_back(std::move(img));
  }
  return frames;
}

void save_sequence(const std::vector<Grid<std::uint8_t>>& frames, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  char name[32];
  for (std::size_t i = 0; i < frames.size(); ++i) {
    std::snprintf(name, sizeof name, "frame_%06zu.pgm", i);
    write_pgm(frames[i], dir / name);
  }
}

}  // namespace bliss
