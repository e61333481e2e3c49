#include "bliss/weights.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>

#include "bliss/error.hpp"

namespace bliss {
namespace {

static_assert(std::endian::native == std::endian::little, "weight bundles assume a little-endian host");
static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

constexpr std::uint8_t kMagic[4] = {'B', 'L', 'W', 'B'};

template <class T>
void put(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  out.insert(out.end(), raw, raw + sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <class T>
  T take(const std::string& what) {
    T value;
    need(sizeof(T), what);
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::span<const std::uint8_t> take_bytes(std::size_t n, const std::string& what) {
    need(n, what);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  [[nodiscard]] bool done() const noexcept { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n, const std::string& what) const {
    if (bytes_.size() - pos_ < n) throw FormatError("truncated bundle while reading " + what);
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t Tensor::element_count() const noexcept {
  std::uint64_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

void WeightBundle::add(Tensor tensor) {
  if (contains(tensor.name)) throw FormatError("duplicate tensor name '" + tensor.name + "'");
  if (tensor.name.size() > std::numeric_limits<std::uint16_t>::max()) throw FormatError("tensor name too long");
  if (tensor.dims.size() > std::numeric_limits<std::uint8_t>::max()) throw FormatError("tensor '" + tensor.name + "' rank too large");
  if (tensor.element_count() != tensor.data.size()) {
    throw FormatError("tensor '" + tensor.name + "' payload has " + std::to_string(tensor.data.size()) +
                      " elements but dims imply " + std::to_string(tensor.element_count()));
  }
  tensors_.push_back(std::move(tensor));
}

void WeightBundle::add(std::string name, std::vector<std::uint32_t> dims, std::vector<float> data) {
  add(Tensor{std::move(name), std::move(dims), std::move(data)});
}

bool WeightBundle::contains(const std::string& name) const noexcept { return find(name) != nullptr; }

const Tensor* WeightBundle::find(const std::string& name) const noexcept {
  const auto it = std::find_if(tensors_.begin(), tensors_.end(), [&](const Tensor& t) { return t.name == name; });
  return it == tensors_.end() ? nullptr : &*it;
}

const Tensor& WeightBundle::require(const std::string& name, std::span<const std::uint32_t> expected) const {
  const Tensor* t = find(name);
  if (t == nullptr) throw FormatError("missing tensor '" + name + "'");
  if (!std::equal(t->dims.begin(), t->dims.end(), expected.begin(), expected.end())) {
    auto fmt = [](auto dims) {
      std::string s = "[";
      for (std::size_t i = 0; i < dims.size(); ++i) s += (i ? "," : "") + std::to_string(dims[i]);
      return s + "]";
    };
    throw FormatError("tensor '" + name + "' has shape " + fmt(std::span<const std::uint32_t>(t->dims)) +
                      ", expected " + fmt(expected));
  }
  return *t;
}

std::vector<std::uint8_t> WeightBundle::to_bytes() const {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors_.size()));
  for (const auto& t : tensors_) {
    put<std::uint16_t>(out, static_cast<std::uint16_t>(t.name.size()));
    out.insert(out.end(), t.name.begin(), t.name.end());
    put<std::uint8_t>(out, static_cast<std::uint8_t>(t.dims.size()));
    for (auto d : t.dims) put<std::uint32_t>(out, d);
    const auto* raw = reinterpret_cast<const std::uint8_t*>(t.data.data());
    out.insert(out.end(), raw, raw + t.data.size() * sizeof(float));
  }
  return out;
}

WeightBundle WeightBundle::from_bytes(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const auto magic = r.take_bytes(4, "magic");
  if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic))) throw FormatError("bad magic, expected 'BLWB'");
  const auto version = r.take<std::uint32_t>("version");
  if (version != kVersion) throw FormatError("unsupported bundle version " + std::to_string(version));
  const auto count = r.take<std::uint32_t>("tensor count");
  WeightBundle bundle;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto label = "tensor #" + std::to_string(i);
    const auto name_len = r.take<std::uint16_t>(label + " name length");
    const auto name_bytes = r.take_bytes(name_len, label + " name");
    Tensor t;
    t.name.assign(name_bytes.begin(), name_bytes.end());
    const auto rank = r.take<std::uint8_t>("rank of '" + t.name + "'");
    std::uint64_t elements = 1;
    for (std::uint8_t k = 0; k < rank; ++k) {
      const auto d = r.take<std::uint32_t>("dims of '" + t.name + "'");
      if (d != 0 && elements > std::numeric_limits<std::uint64_t>::max() / sizeof(float) / d) {
        throw FormatError("dims of tensor '" + t.name + "' overflow");
      }
      elements *= d;
      t.dims.push_back(d);
    }
    if (elements > (bytes.size() / sizeof(float))) throw FormatError("truncated bundle while reading payload of '" + t.name + "'");
    const auto payload = r.take_bytes(static_cast<std::size_t>(elements) * sizeof(float), "payload of '" + t.name + "'");
    t.data.resize(static_cast<std::size_t>(elements));
    std::memcpy(t.data.data(), payload.data(), payload.size());
    if (bundle.contains(t.name)) throw FormatError("duplicate tensor name '" + t.name + "'");
    bundle.tensors_.push_back(std::move(t));
  }
  if (!r.done()) throw FormatError("trailing bytes after last tensor");
  return bundle;
}

WeightBundle random_bundle(const std::vector<TensorSpec>& specs, std::uint64_t seed, float stddev) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> dist(0.0f, stddev);
  WeightBundle bundle;
  for (const auto& [name, dims] : specs) {
    Tensor t{name, dims, {}};
    t.data.resize(static_cast<std::size_t>(t.element_count()));
    const bool is_norm = name.find("norm") != std::string::npos;
    const bool is_bias = name.size() >= 5 && name.compare(name.size() - 5, 5, ".bias") == 0;
    for (auto& v : t.data) v = is_norm ? (is_bias ? 0.0f : 1.0f) : dist(rng);
    bundle.add(std::move(t));
  }
  return bundle;
}

WeightBundle zero_bundle(const std::vector<TensorSpec>& specs) {
  WeightBundle bundle;
  for (const auto& [name, dims] : specs) {
    Tensor t{name, dims, {}};
    t.data.assign(static_cast<std::size_t>(t.element_count()), 0.0f);
    bundle.add(std::move(t));
  }
  return bundle;
}

WeightBundle read_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return WeightBundle::from_bytes(bytes);
}

void write_bundle(const WeightBundle& bundle, const std::filesystem::path& path) {
  const auto bytes = bundle.to_bytes();
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write '" + tmp.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace bliss
