#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bliss/error.hpp"

namespace bliss {

/// Row-major 2-D array addressed as (x, y).
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 0 || height < 0) throw ContractError("negative grid dimensions");
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] int height() const noexcept { return height_; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  [[nodiscard]] T& operator()(int x, int y) noexcept {
    return data_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)];
  }
  [[nodiscard]] const T& operator()(int x, int y) const noexcept {
    return data_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)];
  }

  [[nodiscard]] std::span<T> row(int y) noexcept {
    return {data_.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(width_), static_cast<std::size_t>(width_)};
  }
  [[nodiscard]] std::span<const T> row(int y) const noexcept {
    return {data_.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(width_), static_cast<std::size_t>(width_)};
  }

  [[nodiscard]] std::span<T> values() noexcept { return data_; }
  [[nodiscard]] std::span<const T> values() const noexcept { return data_; }

  [[nodiscard]] bool same_shape(const Grid& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

}  // namespace bliss
