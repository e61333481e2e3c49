#pragma once

#include <cstdint>

#include "bliss/grid.hpp"

namespace bliss {

struct PointF {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const PointF&, const PointF&) = default;
};

/// Gaze direction in degrees; positive horizontal is toward +x, positive vertical is toward -y (up).
struct GazeVector {
  double vertical = 0.0;
  double horizontal = 0.0;
  friend bool operator==(const GazeVector&, const GazeVector&) = default;
};

/// Eye-part classes used by every segmentation map.
enum class EyeClass : std::uint8_t { background = 0, sclera = 1, iris = 2, pupil = 3 };
inline constexpr int kClassCount = 4;

using IrradianceGrid = Grid<double>;  // photo-electrons per second
using LabelGrid = Grid<std::uint8_t>;

/// Digital frame in ADC codes (DN).
struct Frame {
  Grid<std::uint16_t> pixels;
  int index = 0;
  double timestamp = 0.0;  // seconds
  [[nodiscard]] int width() const noexcept { return pixels.width(); }
  [[nodiscard]] int height() const noexcept { return pixels.height(); }
};

/// Axis-aligned rectangle with inclusive corners.
struct Roi {
  int x1 = 0;
  int y1 = 0;
  int x2 = 0;
  int y2 = 0;

  [[nodiscard]] int width() const noexcept { return x2 - x1 + 1; }
  [[nodiscard]] int height() const noexcept { return y2 - y1 + 1; }
  [[nodiscard]] long long area() const noexcept { return static_cast<long long>(width()) * height(); }
  [[nodiscard]] bool contains(int x, int y) const noexcept { return x >= x1 && x <= x2 && y >= y1 && y <= y2; }
  static Roi full(int width, int height) noexcept { return {0, 0, width - 1, height - 1}; }
  friend bool operator==(const Roi&, const Roi&) = default;
};

/// Class labels over a ROI; labels(0,0) is frame pixel (roi.x1, roi.y1).
struct SegMap {
  LabelGrid labels;
  Roi roi;
  int frame_index = 0;
};

}  // namespace bliss
