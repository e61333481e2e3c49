#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace bliss {

/// One named float32 tensor, row-major.
struct Tensor {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  [[nodiscard]] std::uint64_t element_count() const noexcept;
  friend bool operator==(const Tensor&, const Tensor&) = default;
};

/// Ordered collection of uniquely named tensors.
///
/// Byte layout (all integers little-endian):
///   "BLWB" | version u32 = 1 | tensor_count u32 |
///   per tensor: name_len u16 | name bytes (UTF-8) | rank u8 | dims u32 x rank | float32 payload
class WeightBundle {
 public:
  static constexpr std::uint32_t kVersion = 1;

  /// Appends a tensor; throws FormatError on a duplicate name or a payload/dims mismatch.
  void add(Tensor tensor);
  void add(std::string name, std::vector<std::uint32_t> dims, std::vector<float> data);

  [[nodiscard]] const std::vector<Tensor>& tensors() const noexcept { return tensors_; }
  [[nodiscard]] std::size_t size() const noexcept { return tensors_.size(); }
  [[nodiscard]] bool contains(const std::string& name) const noexcept;

  /// Throws FormatError when the tensor is missing or its dims differ from `expected_dims`.
  [[nodiscard]] const Tensor& require(const std::string& name, std::span<const std::uint32_t> expected_dims) const;
  [[nodiscard]] const Tensor* find(const std::string& name) const noexcept;

  [[nodiscard]] std::vector<std::uint8_t> to_bytes() const;
  static WeightBundle from_bytes(std::span<const std::uint8_t> bytes);

  friend bool operator==(const WeightBundle&, const WeightBundle&) = default;

 private:
  std::vector<Tensor> tensors_;
};

using TensorSpec = std::pair<std::string, std::vector<std::uint32_t>>;

/// Bundle with every tensor in `specs` drawn from N(0, stddev); tensors whose
/// name contains "norm" are set to ones (weights) or zeros (biases).
WeightBundle random_bundle(const std::vector<TensorSpec>& specs, std::uint64_t seed, float stddev);
/// Bundle with every tensor in `specs` set to zero.
WeightBundle zero_bundle(const std::vector<TensorSpec>& specs);

WeightBundle read_bundle(const std::filesystem::path& path);
/// Writes to a temporary sibling and renames it into place.
void write_bundle(const WeightBundle& bundle, const std::filesystem::path& path);

}  // namespace bliss
