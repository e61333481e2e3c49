#include <doctest.h>

#include <numeric>

#include "bliss/config.hpp"
#include "bliss/error.hpp"
#include "bliss/vit.hpp"
#include "oracles/oracles.hpp"
#include "support/helpers.hpp"

using namespace bliss;

namespace {

VitConfig load_cfg(const char* name) { return VitConfig::from_config(KeyValueConfig::load(test::data_dir() / name)); }

Grid<std::uint16_t> sparse_codes(int w, int h, double density, std::mt19937_64& rng) {
  auto g = test::random_codes(w, h, rng);
  const auto keep = test::random_bits(w, h, density, rng);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (keep(x, y) == 0) g(x, y) = 0;
    }
  }
  return g;
}

oracle::VitShape tiny_shape() { return {4, 16, 2, 1, 1, 2, 4, 16, 1023.0, 1e-6}; }

}  // namespace

TEST_CASE("64x64 input at patch 16 gives 16 tokens and a 64x64 map") {
  const auto cfg = load_cfg("p16.cfg");
  const VitSegmenter vit(read_bundle(test::data_dir() / "vit_p16.bwt"), cfg);
  std::mt19937_64 rng(1);
  const auto input = sparse_codes(64, 64, 0.2, rng);
  const auto out = vit.run(input, Roi{100, 50, 163, 113}, 7, true);
  CHECK(out.grid_width * out.grid_height == 16);
  CHECK(out.logits.rows() == 16);
  CHECK(out.logits.cols() == 4 * 16 * 16);
  CHECK(out.seg.labels.width() == 64);
  CHECK(out.seg.labels.height() == 64);
  CHECK(out.seg.roi == Roi{100, 50, 163, 113});
  CHECK(out.seg.frame_index == 7);
  for (auto l : out.seg.labels.values()) CHECK(l < 4);
  CHECK(out.logits.allFinite());
  REQUIRE(out.attention.size() == 2 * 2);
  for (const auto& a : out.attention) {
    CHECK(a.rows() == 16);
    for (Eigen::Index r = 0; r < a.rows(); ++r) CHECK(std::abs(a.row(r).sum() - 1.0f) < 1e-5f);
  }
}

TEST_CASE("ROI is zero-padded to patch multiples") {
  const auto cfg = load_cfg("tiny.cfg");
  const VitSegmenter vit(read_bundle(test::data_dir() / "vit_tiny.bwt"), cfg);
  Grid<std::uint16_t> g(6, 5);
  g(5, 4) = 1023;
  g(0, 0) = 0;
  int gw = 0, gh = 0;
  const auto p = vit.patchify(g, gw, gh);
  CHECK(gw == 2);
  CHECK(gh == 2);
  CHECK(p.rows() == 4);
  CHECK(p(3, 0 * 4 + 1) == 1.0f);
  CHECK(p(3, 16 + 0 * 4 + 1) == 1.0f);
  CHECK(p.sum() == 2.0f);
}

TEST_CASE("tiny forward matches the scalar oracle") {
  const auto cfg = load_cfg("tiny.cfg");
  const auto w = read_bundle(test::data_dir() / "vit_tiny.bwt");
  const VitSegmenter vit(w, cfg);
  std::mt19937_64 rng(2);
  for (auto [wd, ht] : {std::pair{30, 22}, std::pair{4, 4}, std::pair{17, 9}, std::pair{64, 40}}) {
    const auto input = sparse_codes(wd, ht, 0.3, rng);
    const auto out = vit.run(input, Roi{0, 0, wd - 1, ht - 1}, 0);
    int gw = 0, gh = 0;
    const auto shape = tiny_shape();
    const auto patches = oracle::vit_patches(input, shape, gw, gh);
    const auto want = oracle::vit_tokens(w, shape, patches, gw, gh);
    REQUIRE(static_cast<Eigen::Index>(want.size()) == out.logits.rows());
    double worst = 0;
    for (std::size_t r = 0; r < want.size(); ++r) {
      for (std::size_t c = 0; c < want[r].size(); ++c) {
        const double d = std::abs(want[r][c] - out.logits(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
        worst = std::isnan(d) ? INFINITY : std::max(worst, d);
      }
    }
    CAPTURE(worst);
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("fixture logits are frozen") {
  const auto cfg = load_cfg("tiny.cfg");
  const VitSegmenter vit(read_bundle(test::data_dir() / "vit_tiny.bwt"), cfg);
  Grid<std::uint16_t> g(8, 4);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 8; ++x) g(x, y) = static_cast<std::uint16_t>((x * 37 + y * 101) % 1024 * ((x + y) % 2));
  }
  const auto out = vit.run(g, Roi{0, 0, 7, 3}, 0);
  // Scalar oracle logits for tokens 0 and 1 at four output channels, frozen.
  const int channels[] = {0, 5, 17, 63};
  const double frozen[4][2] = {{1.15005687, 1.62439623},
                               {1.77297795, 1.51898893},
                               {2.64935236, 2.2631131},
                               {0.906936305, 0.817007393}};
  for (int i = 0; i < 4; ++i) {
    for (int t = 0; t < 2; ++t) CHECK(out.logits(t, channels[i]) == doctest::Approx(frozen[i][t]).epsilon(1e-5));
  }
}

TEST_CASE("token permutation equivariance with zeroed positional embeddings") {
  const auto cfg = load_cfg("p16.cfg");
  WeightBundle zeroed;
  const auto original = read_bundle(test::data_dir() / "vit_p16.bwt");
  for (const auto& t : original.tensors()) {
    Tensor copy = t;
    if (copy.name == "vit.pos_embed") std::fill(copy.data.begin(), copy.data.end(), 0.0f);
    zeroed.add(std::move(copy));
  }
  const VitSegmenter vit(zeroed, cfg);
  std::mt19937_64 rng(3);
  const auto input = sparse_codes(64, 64, 0.25, rng);
  std::vector<int> perm(16);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  // Output patch t holds input patch perm[t].
  Grid<std::uint16_t> shuffled(64, 64);
  for (int t = 0; t < 16; ++t) {
    const int sx = (perm[static_cast<std::size_t>(t)] % 4) * 16, sy = (perm[static_cast<std::size_t>(t)] / 4) * 16;
    const int dx = (t % 4) * 16, dy = (t / 4) * 16;
    for (int y = 0; y < 16; ++y) {
      for (int x = 0; x < 16; ++x) shuffled(dx + x, dy + y) = input(sx + x, sy + y);
    }
  }
  const auto a = vit.run(input, Roi{0, 0, 63, 63}, 0);
  const auto b = vit.run(shuffled, Roi{0, 0, 63, 63}, 0);
  for (int t = 0; t < 16; ++t) {
    const int src = perm[static_cast<std::size_t>(t)];
    CHECK((a.logits.row(src) - b.logits.row(t)).cwiseAbs().maxCoeff() < 1e-4f);
    const int sx = (src % 4) * 16, sy = (src / 4) * 16;
    const int dx = (t % 4) * 16, dy = (t / 4) * 16;
    for (int y = 0; y < 16; ++y) {
      for (int x = 0; x < 16; ++x) {
        if (a.seg.labels(sx + x, sy + y) != b.seg.labels(dx + x, dy + y)) FAIL("label mismatch in patch " << t);
      }
    }
  }
}

TEST_CASE("MAC count: linear part proportional to tokens, attention quadratic") {
  const VitConfig cfg;
  const auto one = vit_macs(cfg, 1);
  const auto many = vit_macs(cfg, 100);
  CHECK(many.linear == 100 * one.linear);
  CHECK(many.attention == 10000 * one.attention);
  CHECK(static_cast<double>(one.linear) / (16.0 * 16.0) == doctest::Approx(25344.0));
  CHECK(vit_macs(cfg, 0).total() == 0);
}

TEST_CASE("configuration and shape errors") {
  CHECK_THROWS_AS(VitConfig::from_config(KeyValueConfig::parse("vit.embed_dim = 10\nvit.heads = 3\n")), ConfigError);
  const auto cfg = load_cfg("tiny.cfg");
  auto w = read_bundle(test::data_dir() / "vit_tiny.bwt");
  WeightBundle partial;
  for (const auto& t : w.tensors()) {
    if (t.name != "vit.head.bias") partial.add(t);
  }
  try {
    VitSegmenter bad(partial, cfg);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("vit.head.bias") != std::string::npos);
  }
  const VitSegmenter vit(w, cfg);
  CHECK_THROWS_AS(vit.run(Grid<std::uint16_t>(68, 4), Roi{0, 0, 67, 3}, 0), ContractError);
  CHECK_THROWS_AS(vit.run(Grid<std::uint16_t>(8, 4), Roi{0, 0, 8, 3}, 0), ContractError);
}
