#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bliss/config.hpp"
#include "bliss/types.hpp"

namespace bliss {

/// Linear map from pupil-centre offset (pixels) to gaze angles (degrees).
struct GazeModel {
  PointF rest_center{320.0, 200.0};
  double deg_per_px_horizontal = 0.3;
  double deg_per_px_vertical = 0.3;

  [[nodiscard]] GazeVector gaze_for(PointF pupil_center) const noexcept {
    return {deg_per_px_vertical * (rest_center.y - pupil_center.y),
            deg_per_px_horizontal * (pupil_center.x - rest_center.x)};
  }
};

/// Synthetic near-eye scene: static textured background, a static elliptical
/// eye region (sclera) and concentric iris/pupil discs that follow a track.
struct EyeScene {
  int width = 640;
  int height = 400;
  IrradianceGrid background;  // e-/s, static across frames
  std::vector<PointF> pupil_track;
  PointF eye_center{320.0, 200.0};
  double eye_radius_x = 150.0;
  double eye_radius_y = 90.0;
  double iris_radius = 40.0;
  double pupil_radius = 16.0;
  double sclera_rate = 9.6e5;
  double iris_rate = 4.2e5;
  double pupil_rate = 7.2e4;
  double iris_texture = 0.08;  // relative amplitude of the angular iris pattern
  int supersample = 4;         // sub-samples per axis for area coverage
  GazeModel gaze;
  static constexpr int class_count = kClassCount;

  /// Throws ConfigError when an invariant does not hold.
  void validate() const;
};

/// Track shapes the scene builder knows about.
enum class TrackKind { stationary, linear, sinusoid };

/// Parameters for building an EyeScene; every field has a `scene.` config key.
struct SceneConfig {
  int width = 640;
  int height = 400;
  double eye_center_x = 320.0;
  double eye_center_y = 200.0;
  double eye_radius_x = 150.0;
  double eye_radius_y = 90.0;
  double iris_radius = 40.0;
  double pupil_radius = 16.0;
  double background_rate = 2.4e5;  // stays below full well at 30 FPS
  double background_texture = 0.15;
  double sclera_rate = 9.6e5;
  double iris_rate = 4.2e5;
  double pupil_rate = 7.2e4;
  double iris_texture = 0.08;
  int supersample = 4;
  TrackKind track = TrackKind::sinusoid;
  double velocity_x = 0.0;  // px/frame for linear tracks
  double velocity_y = 0.0;
  double amplitude_x = 60.0;  // px for sinusoid tracks
  double amplitude_y = 25.0;
  double period_x = 90.0;  // frames
  double period_y = 130.0;
  double deg_per_px_horizontal = 0.3;
  double deg_per_px_vertical = 0.3;

  static SceneConfig from_config(const KeyValueConfig& kv);
};

struct GroundTruth {
  std::vector<LabelGrid> seg_maps;
  std::vector<GazeVector> gaze_angles;
  std::vector<PointF> pupil_centers;
};

struct SyntheticSequence {
  std::vector<IrradianceGrid> frames;
  GroundTruth truth;
};

/// Builds a scene with `n_frames` track points; the seed drives the background texture.
EyeScene make_scene(const SceneConfig& cfg, int n_frames, std::uint64_t seed);

/// Renders irradiance frames and ground truth. Pure function of (scene, seed):
/// the seed only selects the iris texture phase, which moves with the iris.
SyntheticSequence generate_sequence(const EyeScene& scene, int n_frames, std::uint64_t seed);

/// Class of a single point in the scene for a given pupil centre.
EyeClass classify_point(const EyeScene& scene, PointF pupil_center, double x, double y) noexcept;

// Recorded sequences: directory of binary PGM files named frame_%06d.pgm.

std::vector<Grid<std::uint8_t>> load_sequence(const std::filesystem::path& dir);
void save_sequence(const std::vector<Grid<std::uint8_t>>& frames, const std::filesystem::path& dir);

Grid<std::uint8_t> read_pgm(const std::filesystem::path& path);
void write_pgm(const Grid<std::uint8_t>& image, const std::filesystem::path& path);

}  // namespace bliss
