#include <doctest.h>

#include <cmath>
#include <fstream>

#include "bliss/config.hpp"
#include "bliss/error.hpp"
#include "bliss/scene.hpp"
#include "support/helpers.hpp"

using namespace bliss;

namespace {

SceneConfig small_scene(TrackKind track) {
  SceneConfig c;
  c.width = 160;
  c.height = 100;
  c.eye_center_x = 80;
  c.eye_center_y = 50;
  c.eye_radius_x = 60;
  c.eye_radius_y = 40;
  c.iris_radius = 20;
  c.pupil_radius = 8;
  c.amplitude_x = 10;
  c.amplitude_y = 5;
  c.track = track;
  return c;
}

}  // namespace

TEST_CASE("stationary pupil renders identical frames") {
  const auto scene = make_scene(small_scene(TrackKind::stationary), 2, 3);
  const auto seq = generate_sequence(scene, 2, 3);
  REQUIRE(seq.frames.size() == 2);
  CHECK(seq.frames[0] == seq.frames[1]);
  CHECK(seq.truth.gaze_angles[0] == seq.truth.gaze_angles[1]);
}

TEST_CASE("linear motion gives strictly increasing horizontal gaze") {
  auto cfg = small_scene(TrackKind::linear);
  cfg.velocity_x = 3.0;
  cfg.eye_center_x = 60;
  const auto scene = make_scene(cfg, 6, 1);
  const auto seq = generate_sequence(scene, 6, 1);
  for (std::size_t i = 1; i < seq.truth.gaze_angles.size(); ++i) {
    CHECK(seq.truth.gaze_angles[i].horizontal > seq.truth.gaze_angles[i - 1].horizontal);
    CHECK(seq.truth.gaze_angles[i].horizontal - seq.truth.gaze_angles[i - 1].horizontal ==
          doctest::Approx(3.0 * cfg.deg_per_px_horizontal));
  }
}

TEST_CASE("same seed is bit identical, different seed changes texture") {
  const auto cfg = small_scene(TrackKind::sinusoid);
  const auto a = generate_sequence(make_scene(cfg, 4, 9), 4, 9);
  const auto b = generate_sequence(make_scene(cfg, 4, 9), 4, 9);
  const auto c = generate_sequence(make_scene(cfg, 4, 10), 4, 10);
  CHECK(a.frames == b.frames);
  CHECK(a.truth.seg_maps == b.truth.seg_maps);
  CHECK_FALSE(a.frames[0] == c.frames[0]);
}

TEST_CASE("pixels outside every iris disc never change") {
  const auto cfg = small_scene(TrackKind::sinusoid);
  const auto scene = make_scene(cfg, 12, 2);
  const auto seq = generate_sequence(scene, 12, 2);
  const double reach = cfg.iris_radius + 1.5;
  int checked = 0;
  for (int y = 0; y < cfg.height; ++y) {
    for (int x = 0; x < cfg.width; ++x) {
      bool near_iris = false;
      for (const auto& c : scene.pupil_track) {
        if (std::hypot(x + 0.5 - c.x, y + 0.5 - c.y) <= reach) near_iris = true;
      }
      if (near_iris) continue;
      ++checked;
      for (std::size_t f = 1; f < seq.frames.size(); ++f) {
        if (seq.frames[f](x, y) != seq.frames[0](x, y)) {
          FAIL("pixel (" << x << "," << y << ") changed in frame " << f);
        }
      }
    }
  }
  CHECK(checked > cfg.width * cfg.height / 2);
}

TEST_CASE("ground-truth classes are concentric") {
  const auto cfg = small_scene(TrackKind::sinusoid);
  const auto scene = make_scene(cfg, 5, 4);
  const auto seq = generate_sequence(scene, 5, 4);
  for (std::size_t f = 0; f < seq.truth.seg_maps.size(); ++f) {
    const auto& labels = seq.truth.seg_maps[f];
    const auto c = seq.truth.pupil_centers[f];
    CHECK(labels.width() == cfg.width);
    CHECK(labels.height() == cfg.height);
    for (int y = 0; y < labels.height(); ++y) {
      for (int x = 0; x < labels.width(); ++x) {
        const int l = labels(x, y);
        REQUIRE(l < kClassCount);
        const double r = std::hypot(x + 0.5 - c.x, y + 0.5 - c.y);
        const double ex = (x + 0.5 - cfg.eye_center_x) / cfg.eye_radius_x;
        const double ey = (y + 0.5 - cfg.eye_center_y) / cfg.eye_radius_y;
        if (l == static_cast<int>(EyeClass::pupil)) CHECK(r <= cfg.pupil_radius);
        if (l == static_cast<int>(EyeClass::iris)) CHECK(r <= cfg.iris_radius);
        if (l != static_cast<int>(EyeClass::background)) CHECK(ex * ex + ey * ey <= 1.0);
        if (r <= cfg.pupil_radius) CHECK(l == static_cast<int>(EyeClass::pupil));
      }
    }
  }
}

TEST_CASE("configuration errors") {
  const auto scene = make_scene(small_scene(TrackKind::sinusoid), 3, 1);
  CHECK_THROWS_AS(generate_sequence(scene, 5, 1), ConfigError);
  CHECK_THROWS_AS(generate_sequence(scene, 1, 1), ConfigError);
  auto bad = small_scene(TrackKind::stationary);
  bad.pupil_radius = 25;
  CHECK_THROWS_AS(make_scene(bad, 2, 1), ConfigError);
  auto off = small_scene(TrackKind::linear);
  off.velocity_x = 100;
  CHECK_THROWS_AS(make_scene(off, 3, 1), ConfigError);
  CHECK_THROWS_AS(SceneConfig::from_config(KeyValueConfig::parse("scene.track = zigzag\n")), ConfigError);
}

TEST_CASE("PGM sequences round-trip and report gaps and bad files") {
  const auto dir = test::scratch_dir("pgm");
  std::mt19937_64 rng(5);
  std::vector<Grid<std::uint8_t>> frames;
  for (int i = 0; i < 3; ++i) {
    Grid<std::uint8_t> g(640, 400);
    for (auto& v : g.values()) v = static_cast<std::uint8_t>(rng());
    frames.push_back(g);
  }
  save_sequence(frames, dir);
  const auto back = load_sequence(dir);
  REQUIRE(back.size() == 3);
  CHECK(back == frames);

  std::filesystem::remove(dir / "frame_000001.pgm");
  CHECK_THROWS_AS(load_sequence(dir), SequenceGapError);

  const auto empty = test::scratch_dir("pgm_empty");
  CHECK_THROWS_AS(load_sequence(empty), FormatError);

  const auto bad = test::scratch_dir("pgm_bad");
  std::ofstream(bad / "frame_000000.pgm", std::ios::binary) << "P6\n2 2\n255\nxxxxxxxxxxxx";
  CHECK_THROWS_AS(load_sequence(bad), FormatError);

  const auto mixed = test::scratch_dir("pgm_mixed");
  save_sequence({Grid<std::uint8_t>(4, 4), Grid<std::uint8_t>(4, 5)}, mixed);
  CHECK_THROWS_AS(load_sequence(mixed), FormatError);
}
