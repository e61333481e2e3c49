#include "bliss/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "bliss/error.hpp"

namespace bliss {
namespace {

bool inside_ellipse(const EyeScene& s, double x, double y) noexcept {
  const double dx = (x - s.eye_center.x) / s.eye_radius_x;
  const double dy = (y - s.eye_center.y) / s.eye_radius_y;
  return dx * dx + dy * dy <= 1.0;
}

// Irradiance of a point once its class is known; iris texture rotates with the track.
double point_rate(const EyeScene& s, EyeClass cls, PointF c, double x, double y, double phase,
                  double background) noexcept {
  switch (cls) {
    case EyeClass::pupil:
      return s.pupil_rate;
    case EyeClass::iris: {
      const double angle = std::atan2(y - c.y, x - c.x);
      return s.iris_rate * (1.0 + s.iris_texture * std::cos(12.0 * angle + phase));
    }
    case EyeClass::sclera:
      return s.sclera_rate;
    case EyeClass::background:
      break;
  }
  return background;
}

// Smooth value-noise texture in [-1, 1] on a coarse lattice, bilinearly interpolated.
Grid<double> value_noise(int width, int height, int cell, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const int lw = width / cell + 2;
  const int lh = height / cell + 2;
  Grid<double> lattice(lw, lh);
  for (auto& v : lattice.values()) v = uni(rng);
  Grid<double> out(width, height);
  for (int y = 0; y < height; ++y) {
    const double fy = (y + 0.5) / cell;
    const int iy = static_cast<int>(fy);
    const double ty = fy - iy;
    for (int x = 0; x < width; ++x) {
      const double fx = (x + 0.5) / cell;
      const int ix = static_cast<int>(fx);
      const double tx = fx - ix;
      const double top = lattice(ix, iy) * (1 - tx) + lattice(ix + 1, iy) * tx;
      const double bot = lattice(ix, iy + 1) * (1 - tx) + lattice(ix + 1, iy + 1) * tx;
      out(x, y) = top * (1 - ty) + bot * ty;
    }
  }
  return out;
}

}  // namespace

void EyeScene::validate() const {
  if (width <= 0 || height <= 0) throw ConfigError("scene dimensions must be positive");
  if (background.width() != width || background.height() != height) {
    throw ConfigError("scene background must match scene dimensions");
  }
  if (!(pupil_radius > 0.0) || !(pupil_radius < iris_radius)) {
    throw ConfigError("pupil radius must be positive and smaller than the iris radius");
  }
  if (supersample < 1) throw ConfigError("scene.supersample must be >= 1");
  for (double r : background.values()) {
    if (!(r >= 0.0)) throw ConfigError("background irradiance must be non-negative");
  }
  if (sclera_rate < 0 || iris_rate < 0 || pupil_rate < 0) throw ConfigError("irradiance levels must be non-negative");
  for (std::size_t i = 0; i < pupil_track.size(); ++i) {
    const auto p = pupil_track[i];
    if (!(p.x >= 0.0 && p.x < width && p.y >= 0.0 && p.y < height)) {
      throw ConfigError("track point " + std::to_string(i) + " lies outside the frame");
    }
    for (int k = 0; k < 360; ++k) {
      const double a = k * std::numbers::pi / 180.0;
      if (!inside_ellipse(*this, p.x + iris_radius * std::cos(a), p.y + iris_radius * std::sin(a))) {
        throw ConfigError("iris leaves the eye region at track point " + std::to_string(i));
      }
    }
  }
}

SceneConfig SceneConfig::from_config(const KeyValueConfig& kv) {
  SceneConfig c;
  c.width = static_cast<int>(kv.get_int("scene.width", c.width));
  c.height = static_cast<int>(kv.get_int("scene.height", c.height));
  c.eye_center_x = kv.get_double("scene.eye_center_x", c.width / 2.0);
  c.eye_center_y = kv.get_double("scene.eye_center_y", c.height / 2.0);
  c.eye_radius_x = kv.get_double("scene.eye_radius_x", c.eye_radius_x);
  c.eye_radius_y = kv.get_double("scene.eye_radius_y", c.eye_radius_y);
  c.iris_radius = kv.get_double("scene.iris_radius", c.iris_radius);
  c.pupil_radius = kv.get_double("scene.pupil_radius", c.pupil_radius);
  c.background_rate = kv.get_double("scene.background_rate", c.background_rate);
  c.background_texture = kv.get_double("scene.background_texture", c.background_texture);
  c.sclera_rate = kv.get_double("scene.sclera_rate", c.sclera_rate);
  c.iris_rate = kv.get_double("scene.iris_rate", c.iris_rate);
  c.pupil_rate = kv.get_double("scene.pupil_rate", c.pupil_rate);
  c.iris_texture = kv.get_double("scene.iris_texture", c.iris_texture);
  c.supersample = static_cast<int>(kv.get_int("scene.supersample", c.supersample));
  const auto track = kv.get_string("scene.track", "sinusoid");
  if (track == "stationary") {
    c.track = TrackKind::stationary;
  } else if (track == "linear") {
    c.track = TrackKind::linear;
  } else if (track == "sinusoid") {
    c.track = TrackKind::sinusoid;
  } else {
    throw ConfigError("key 'scene.track' must be stationary|linear|sinusoid, got '" + track + "'");
  }
  c.velocity_x = kv.get_double("scene.velocity_x", c.velocity_x);
  c.velocity_y = kv.get_double("scene.velocity_y", c.velocity_y);
  c.amplitude_x = kv.get_double("scene.amplitude_x", c.amplitude_x);
  c.amplitude_y = kv.get_double("scene.amplitude_y", c.amplitude_y);
  c.period_x = kv.get_double("scene.period_x", c.period_x);
  c.period_y = kv.get_double("scene.period_y", c.period_y);
  c.deg_per_px_horizontal = kv.get_double("scene.deg_per_px_horizontal", c.deg_per_px_horizontal);
  c.deg_per_px_vertical = kv.get_double("scene.deg_per_px_vertical", c.deg_per_px_vertical);
  return c;
}

EyeScene make_scene(const SceneConfig& cfg, int n_frames, std::uint64_t seed) {
  if (cfg.width <= 0 || cfg.height <= 0) throw ConfigError("scene dimensions must be positive");
  if (n_frames < 0) throw ConfigError("frame count must be non-negative");
  EyeScene s;
  s.width = cfg.width;
  s.height = cfg.height;
  s.eye_center = {cfg.eye_center_x, cfg.eye_center_y};
  s.eye_radius_x = cfg.eye_radius_x;
  s.eye_radius_y = cfg.eye_radius_y;
  s.iris_radius = cfg.iris_radius;
  s.pupil_radius = cfg.pupil_radius;
  s.sclera_rate = cfg.sclera_rate;
  s.iris_rate = cfg.iris_rate;
  s.pupil_rate = cfg.pupil_rate;
  s.iris_texture = cfg.iris_texture;
  s.supersample = cfg.supersample;
  s.gaze = {s.eye_center, cfg.deg_per_px_horizontal, cfg.deg_per_px_vertical};

  const auto noise = value_noise(cfg.width, cfg.height, 16, seed);
  s.background = IrradianceGrid(cfg.width, cfg.height);
  for (int y = 0; y < cfg.height; ++y) {
    for (int x = 0; x < cfg.width; ++x) {
      s.background(x, y) = std::max(0.0, cfg.background_rate * (1.0 + cfg.background_texture * noise(x, y)));
    }
  }

  s.pupil_track.reserve(static_cast<std::size_t>(n_frames));
  for (int t = 0; t < n_frames; ++t) {
    PointF p = s.eye_center;
    switch (cfg.track) {
      case TrackKind::stationary:
        break;
      case TrackKind::linear:
        p.x += cfg.velocity_x * t;
        p.y += cfg.velocity_y * t;
        break;
      case TrackKind::sinusoid:
        p.x += cfg.amplitude_x * std::sin(2.0 * std::numbers::pi * t / cfg.period_x);
        p.y += cfg.amplitude_y * std::sin(2.0 * std::numbers::pi * t / cfg.period_y);
        break;
    }
    s.pupil_track.push_back(p);
  }
  s.validate();
  return s;
}

EyeClass classify_point(const EyeScene& scene, PointF c, double x, double y) noexcept {
  const double dx = x - c.x;
  const double dy = y - c.y;
  const double d2 = dx * dx + dy * dy;
  if (d2 <= scene.pupil_radius * scene.pupil_radius) return EyeClass::pupil;
  if (d2 <= scene.iris_radius * scene.iris_radius) return EyeClass::iris;
  if (inside_ellipse(scene, x, y)) return EyeClass::sclera;
  return EyeClass::background;
}

SyntheticSequence generate_sequence(const EyeScene& scene, int n_frames, std::uint64_t seed) {
  scene.validate();
  if (n_frames < 2) throw ConfigError("a sequence needs at least 2 frames");
  if (static_cast<std::size_t>(n_frames) > scene.pupil_track.size()) {
    throw ConfigError("pupil track has " + std::to_string(scene.pupil_track.size()) + " points but " +
                      std::to_string(n_frames) + " frames were requested");
  }
  std::mt19937_64 rng(seed);
  const double phase = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);

  const int ss = scene.supersample;
  const double step = 1.0 / ss;
  const double inv = 1.0 / (ss * ss);

  // Static part: background and sclera with anti-aliased ellipse boundary.
  const PointF far_away{-1e9, -1e9};
  IrradianceGrid base(scene.width, scene.height);
  LabelGrid base_labels(scene.width, scene.height);
  for (int y = 0; y < scene.height; ++y) {
    for (int x = 0; x < scene.width; ++x) {
      double acc = 0.0;
      for (int sy = 0; sy < ss; ++sy) {
        for (int sx = 0; sx < ss; ++sx) {
          const double px = x + (sx + 0.5) * step;
          const double py = y + (sy + 0.5) * step;
          const auto cls = inside_ellipse(scene, px, py) ? EyeClass::sclera : EyeClass::background;
          acc += point_rate(scene, cls, far_away, px, py, phase, scene.background(x, y));
        }
      }
      base(x, y) = acc * inv;
      base_labels(x, y) = static_cast<std::uint8_t>(classify_point(scene, far_away, x + 0.5, y + 0.5));
    }
  }

  SyntheticSequence out;
  out.frames.reserve(static_cast<std::size_t>(n_frames));
  for (int t = 0; t < n_frames; ++t) {
    const PointF c = scene.pupil_track[static_cast<std::size_t>(t)];
    IrradianceGrid frame = base;
    LabelGrid labels = base_labels;
    const int x0 = std::max(0, static_cast<int>(std::floor(c.x - scene.iris_radius)) - 1);
    const int x1 = std::min(scene.width - 1, static_cast<int>(std::ceil(c.x + scene.iris_radius)) + 1);
    const int y0 = std::max(0, static_cast<int>(std::floor(c.y - scene.iris_radius)) - 1);
    const int y1 = std::min(scene.height - 1, static_cast<int>(std::ceil(c.y + scene.iris_radius)) + 1);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        double acc = 0.0;
        for (int sy = 0; sy < ss; ++sy) {
          for (int sx = 0; sx < ss; ++sx) {
            const double px = x + (sx + 0.5) * step;
            const double py = y + (sy + 0.5) * step;
            acc += point_rate(scene, classify_point(scene, c, px, py), c, px, py, phase, scene.background(x, y));
          }
        }
        frame(x, y) = acc * inv;
        labels(x, y) = static_cast<std::uint8_t>(classify_point(scene, c, x + 0.5, y + 0.5));
      }
    }
    out.frames.push_back(std::move(frame));
    out.truth.seg_maps.push_back(std::move(labels));
    out.truth.gaze_angles.push_back(scene.gaze.gaze_for(c));
    out.truth.pupil_centers.push_back(c);
  }
  return out;
}

}  // namespace bliss
