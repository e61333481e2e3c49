// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "bliss/energy.hpp"
#include "bliss/eventify.hpp"
#include "bliss/experiment.hpp"
#include "bliss/readout.hpp"
#include "bliss/sampler.hpp"
#include "bliss/timing.hpp"
#include "bliss/vit.hpp"
#include "oracles/oracles.hpp"
#include "support/helpers.hpp"

using namespace bliss;

namespace {

// Pinned tolerances.
constexpr double kRleBudget = 10.0;          // s
constexpr double kSamplingBudget = 30.0;     // s
constexpr double kEnergyBudget = 60.0;       // s
constexpr double kEndToEndBudget = 120.0;    // s
constexpr double kRateTolerance = 0.02;      // absolute
constexpr double kCorrelationLimit = 0.02;
constexpr double kMipiWatts = 0.299;
constexpr double kMipiRelTol = 0.01;
constexpr double kExposureCutMin = 0.015;
constexpr double kExposureCutMax = 0.021;
constexpr double kLatencyRatioMin = 1.3;
constexpr double kSegSpeedup = 7.7;
constexpr double kSegSpeedupRelTol = 0.15;
constexpr double kBlissPixelFraction = 0.108;
constexpr double kReadoutShare = 0.66;
constexpr double kReadoutShareTol = 0.01;
constexpr double kFeedbackShareMax = 0.01;
constexpr double kAttentionTol = 1e-5;
constexpr double kOracleTol = 1e-4;
constexpr double kRetentionMax = 0.12;
constexpr double kReductionMin = 15.0;
constexpr double kGazeRatioMax = 1.5;
constexpr int kEnergyFrames = 40;
constexpr int kEndToEndFrames = 200;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail.str("");
      detail << "failed: " << what;
    }
  }
};

int failures = 0;

void criterion(const char* name, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail.str("");
    o.detail << "exception: " << e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s %-22s %6.2fs  %s\n", o.pass ? "PASS" : "FAIL", name, secs, o.detail.str().c_str());
  std::fflush(stdout);
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double adjacent_correlation(const Grid<std::uint8_t>& m, const Roi& r) {
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0, n = 0;
  for (int y = r.y1; y <= r.y2; ++y) {
    for (int x = r.x1; x < r.x2; ++x) {
      const double a = m(x, y), b = m(x + 1, y);
      sx += a;
      sy += b;
      sxx += a * a;
      syy += b * b;
      sxy += a * b;
      n += 1;
    }
  }
  const double cov = sxy / n - (sx / n) * (sy / n);
  return cov / std::sqrt((sxx / n - (sx / n) * (sx / n)) * (syy / n - (sy / n) * (sy / n)));
}

RunConfig default_run(VariantMode mode, int frames) {
  auto kv = KeyValueConfig::load(test::config_dir() / "default.cfg");
  kv.set("run.frames", std::to_string(frames));
  kv.set("run.mode", std::string(to_string(mode)));
  return RunConfig::from_config(kv, test::config_dir());
}

void check_rle_round_trip(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> width(1, 640);
  std::uniform_real_distribution<double> density(0.0, 0.6);
  std::uniform_int_distribution<int> code(1, 1023);
  int ok = 0;
  std::size_t shortest = SIZE_MAX, longest = 0;
  for (int i = 0; i < 1000; ++i) {
    // ROI-shaped buffers inside a 640x400 frame, lengths 1..100000; the first two pin the extremes.
    int w = width(rng);
    int h = std::uniform_int_distribution<int>(1, std::min(400, 100000 / w))(rng);
    if (i == 0) w = h = 1;
    if (i == 1) w = 400, h = 250;
    const auto n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    shortest = std::min(shortest, n);
    longest = std::max(longest, n);
    std::bernoulli_distribution keep(density(rng));
    ReadoutBuffer b{std::vector<std::uint16_t>(n, 0), Roi{0, 0, w - 1, h - 1}, i};
    for (auto& v : b.values) {
      if (keep(rng)) v = static_cast<std::uint16_t>(code(rng));
    }
    if (rle_decode(rle_encode(b).to_bytes()) == b) ++ok;
  }
  o.require(ok == 1000, "round trip");
  const ReadoutBuffer pattern{{1, 1, 1, 0, 0, 0, 0, 0, 0, 0}, Roi{0, 0, 9, 0}, 0};
  const auto records = rle_encode(pattern).records;
  o.require(records == std::vector<std::uint16_t>{3, 1, 1, 1, 7}, "1110000000 -> (3 literals)(7 zeros)");
  const double secs = elapsed_since(t0);
  o.require(secs < kRleBudget, "runtime");
  o.detail << ok << "/1000 round trips (lengths " << shortest << ".." << longest << "), pattern records {3,1,1,1,7}, " << secs << " s";
}

void check_eventify_oracle(Outcome& o) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> dim(1, 96);
  std::uniform_int_distribution<int> sig(0, 300);
  int ok = 0;
  for (int i = 0; i < 1000; ++i) {
    const int w = dim(rng), h = dim(rng), s = sig(rng);
    const auto a = test::random_codes(w, h, rng);
    const auto b = test::random_codes(w, h, rng);
    if (eventify(a, b, s).bits == oracle::eventify(a, b, s)) ++ok;
  }
  o.require(ok == 1000, "oracle equivalence");
  Grid<std::uint16_t> prev(2, 1, 100), curr(2, 1, 100);
  curr(0, 0) = 160;
  curr(1, 0) = 161;
  const auto e = eventify(prev, curr, 60);
  o.require(e.bits(0, 0) == 0 && e.bits(1, 0) == 1, "|diff| == sigma gives no event");
  o.detail << ok << "/1000 exact, boundary |diff|=sigma -> 0";
}

void check_sampling_calibration(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto biases = SramBiasArray::uniform(640, 400, 0.5);
  const auto lut = calibrate(biases, 100, 31);
  const int theta = lut.theta_for(0.20);
  const double exact = oracle::binomial_tail(10, 0.5, 6);
  o.require(theta == 6, "theta for 20% is 6");
  o.require(std::abs(exact - 0.1719) < 5e-5, "binomial oracle P(s>=7)");
  o.require(std::abs(lut.rate(6) - exact) < 0.005, "calibrated rate(6)");
  o.detail << "theta=" << theta << " rate=" << lut.rate(6) << " oracle=" << exact << ";";
  const Roi roi = Roi::full(640, 400);
  double worst_rate = 0.0;
  double worst_corr = 0.0;
  std::uint64_t seed = 500;
  for (double target : {0.05, 0.10, 0.20, 0.50}) {
    const int t = lut.theta_for(target);
    const auto mask = sample_gate(power_up(biases, seed++), t, roi);
    worst_rate = std::max(worst_rate, std::abs(mask.achieved_rate - lut.rate(t)));
    worst_corr = std::max(worst_corr, std::abs(adjacent_correlation(mask.bits, roi)));
    o.detail << ' ' << target * 100 << "%->" << mask.achieved_rate;
  }
  o.require(worst_rate <= kRateTolerance, "achieved rate within 2 pp of the calibrated rate");
  o.require(worst_corr < kCorrelationLimit, "adjacent correlation");
  const double secs = elapsed_since(t0);
  o.require(secs < kSamplingBudget, "runtime");
  o.detail << "; max |achieved-lut|=" << worst_rate << " max |corr|=" << worst_corr;
}

void check_mipi_model(Outcome& o) {
  const auto t = mipi_transfer(3840ull * 2160ull * 3ull, MipiConfig{});
  const double watts = t.energy * 120.0;
  o.require(std::abs(watts - kMipiWatts) <= kMipiRelTol * kMipiWatts, "power");
  o.detail << watts << " W";
}

FrameWork dense_work(const TimingConfig& t) {
  FrameWork w;
  w.pixels_quantized = t.frame_pixels;
  w.pixels_read = t.frame_pixels;
  w.bytes_out = dense_frame_bytes(640, 400, 10);
  w.seg_pixels = t.frame_pixels;
  return w;
}

FrameWork bliss_work(const TimingConfig& t, double fraction) {
  FrameWork w;
  const auto px = static_cast<std::uint64_t>(std::llround(fraction * static_cast<double>(t.frame_pixels)));
  w.pixels_quantized = px;
  w.pixels_read = px;
  w.bytes_out = 22 + 4 * px;
  w.bytes_feedback = 8 + (px * 2 + 7) / 8;
  w.seg_pixels = px;
  return w;
}

void check_pipeline_timing(Outcome& o) {
  const auto cfg = default_run(VariantMode::BLISSCAM, 60);
  const auto& t = cfg.pipeline.timing;
  const double cut = 1.0 - t.exposure_for(VariantMode::BLISSCAM) / t.period();
  o.require(t.fps == 120.0, "default rate is 120 FPS");
  o.require(cut >= kExposureCutMin && cut <= kExposureCutMax, "exposure reduction");
  const auto traces = execute(cfg).result.traces;
  o.require(stall_count(traces) == 0, "no stalls");
  bool cadence = true;
  bool dependency = true;
  for (std::size_t i = 1; i < traces.size(); ++i) {
    const double gap = traces[i].at(Stage::exposure).start - traces[i - 1].at(Stage::exposure).start;
    cadence = cadence && std::abs(gap - 1.0 / 120.0) < 1e-9;
    dependency = dependency && traces[i].at(Stage::roi_prediction).start >= traces[i - 1].at(Stage::mipi_feedback).end;
  }
  o.require(cadence, "exposure starts 1/120 s apart");
  o.require(dependency, "ROI(t) starts after feedback(t-1)");
  check_trace(VariantMode::BLISSCAM, traces);
  o.detail << "exposure cut " << cut * 100 << "%, " << traces.size() << " frames, 0 stalls";
}

void check_latency_ratio(Outcome& o) {
  const TimingConfig t;
  const auto full = tracking_latency(schedule(VariantMode::NPU_FULL, t, std::vector<FrameWork>(60, dense_work(t))));
  std::vector<FrameWork> work(60, bliss_work(t, kBlissPixelFraction));
  work.front() = dense_work(t);
  const auto ours = tracking_latency(schedule(VariantMode::BLISSCAM, t, work));
  const double ratio = full.mean / ours.mean;
  const double seg_full = t.segmentation_time(t.frame_pixels);
  const double seg_ours =
      t.segmentation_time(static_cast<std::uint64_t>(std::llround(kBlissPixelFraction * static_cast<double>(t.frame_pixels))));
  const double speedup = seg_full / seg_ours;
  o.require(ratio >= kLatencyRatioMin, "latency ratio");
  o.require(std::abs(speedup - kSegSpeedup) <= kSegSpeedupRelTol * kSegSpeedup, "segmentation speedup");
  o.detail << "latency ratio " << ratio << ", segmentation " << seg_full * 1e3 << " ms full, speedup " << speedup;
}

void check_energy_ordering(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  std::map<VariantMode, EnergyReport> reports;
  for (auto mode : {VariantMode::NPU_FULL, VariantMode::NPU_ROI, VariantMode::S_NPU, VariantMode::BLISSCAM}) {
    reports[mode] = execute(default_run(mode, kEnergyFrames)).energy;
  }
  const double full = reports[VariantMode::NPU_FULL].total_per_frame();
  const double roi = reports[VariantMode::NPU_ROI].total_per_frame();
  const double snpu = reports[VariantMode::S_NPU].total_per_frame();
  const double ours = reports[VariantMode::BLISSCAM].total_per_frame();
  o.require(ours < roi && roi < snpu && snpu < full, "BLISSCAM < NPU_ROI < S_NPU < NPU_FULL");
  const auto& f = reports[VariantMode::NPU_FULL];
  const double share = f.component(EnergyComponent::readout) / f.sensor_side();
  o.require(std::abs(share - kReadoutShare) <= kReadoutShareTol, "readout share");
  const auto& b = reports[VariantMode::BLISSCAM];
  const double fb = b.component(EnergyComponent::feedback) / b.total();
  o.require(fb < kFeedbackShareMax, "feedback share");
  o.detail << "uJ/frame " << ours * 1e6 << " < " << roi * 1e6 << " < " << snpu * 1e6 << " < " << full * 1e6
           << "; readout share " << share * 100 << "%; feedback share " << fb * 100 << "%;";

  auto kv = KeyValueConfig::load(test::config_dir() / "default.cfg");
  kv.set("run.frames", std::to_string(kEnergyFrames));
  const std::vector<std::string> fps{"30", "60", "120", "240", "360", "500"};
  const auto rows = run_sweep(kv, test::config_dir(), SweepAxis::fps, fps);
  bool monotone = true;
  double prev = 0.0;
  o.detail << " savings";
  for (const auto& r : rows) {
    o.require(r.status == "ok", "sweep point " + r.value + ": " + r.status);
    const double saving = r.baseline_uj_per_frame / r.energy_uj_per_frame;
    monotone = monotone && saving > prev;
    prev = saving;
    o.detail << ' ' << r.value << ":" << saving;
  }
  o.require(monotone, "FPS sweep savings increase");
  const double secs = elapsed_since(t0);
  o.require(secs < kEnergyBudget, "runtime");
}

void check_vit_forward(Outcome& o) {
  const auto p16 = VitConfig::from_config(KeyValueConfig::load(test::data_dir() / "p16.cfg"));
  const auto p16_w = read_bundle(test::data_dir() / "vit_p16.bwt");
  std::mt19937_64 rng(77);
  auto input = test::random_codes(64, 64, rng);
  const auto keep = test::random_bits(64, 64, 0.2, rng);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      if (keep(x, y) == 0) input(x, y) = 0;
    }
  }
  {
    const VitSegmenter vit(p16_w, p16);
    const auto out = vit.run(input, Roi{0, 0, 63, 63}, 0, true);
    const bool labels_ok = std::all_of(out.seg.labels.values().begin(), out.seg.labels.values().end(),
                                       [](std::uint8_t l) { return l < 4; });
    o.require(out.grid_width * out.grid_height == 16 && out.seg.labels.width() == 64 && out.seg.labels.height() == 64 &&
                  labels_ok && out.logits.cols() == 4 * 16 * 16,
              "shape");
    double worst = 0.0;
    for (const auto& a : out.attention) {
      for (Eigen::Index r = 0; r < a.rows(); ++r) worst = std::max(worst, std::abs(static_cast<double>(a.row(r).sum()) - 1.0));
    }
    o.require(!out.attention.empty() && worst <= kAttentionTol, "attention rows sum to 1");
    o.detail << "16 tokens -> 64x64x4, attention |sum-1|<=" << worst << ";";
  }
  {
    const auto tiny = VitConfig::from_config(KeyValueConfig::load(test::data_dir() / "tiny.cfg"));
    const auto w = read_bundle(test::data_dir() / "vit_tiny.bwt");
    const VitSegmenter vit(w, tiny);
    const oracle::VitShape shape{4, 16, 2, 1, 1, 2, 4, 16, 1023.0, 1e-6};
    double worst = 0.0;
    for (auto [wd, ht] : {std::pair{30, 22}, std::pair{64, 40}, std::pair{5, 3}}) {
      auto g = test::random_codes(wd, ht, rng);
      const auto mask = test::random_bits(wd, ht, 0.3, rng);
      for (int y = 0; y < ht; ++y) {
        for (int x = 0; x < wd; ++x) {
          if (mask(x, y) == 0) g(x, y) = 0;
        }
      }
      const auto out = vit.run(g, Roi{0, 0, wd - 1, ht - 1}, 0);
      int gw = 0, gh = 0;
      const auto patches = oracle::vit_patches(g, shape, gw, gh);
      const auto want = oracle::vit_tokens(w, shape, patches, gw, gh);
      if (static_cast<Eigen::Index>(want.size()) != out.logits.rows()) worst = INFINITY;
      for (std::size_t r = 0; r < want.size() && std::isfinite(worst); ++r) {
        for (std::size_t c = 0; c < want[r].size(); ++c) {
          const double d = std::abs(want[r][c] - out.logits(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
          worst = std::isnan(d) ? INFINITY : std::max(worst, d);
        }
      }
    }
    o.require(worst < kOracleTol, "tiny forward vs scalar oracle");
    o.detail << " oracle max diff " << worst << ";";
  }
  {
    WeightBundle zeroed;
    for (const auto& t : p16_w.tensors()) {
      Tensor copy = t;
      if (copy.name == "vit.pos_embed") std::fill(copy.data.begin(), copy.data.end(), 0.0f);
      zeroed.add(std::move(copy));
    }
    const VitSegmenter vit(zeroed, p16);
    std::vector<int> perm(16);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Grid<std::uint16_t> shuffled(64, 64);
    for (int t = 0; t < 16; ++t) {
      const int sx = (perm[static_cast<std::size_t>(t)] % 4) * 16, sy = (perm[static_cast<std::size_t>(t)] / 4) * 16;
      for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) shuffled((t % 4) * 16 + x, (t / 4) * 16 + y) = input(sx + x, sy + y);
      }
    }
    const auto a = vit.run(input, Roi{0, 0, 63, 63}, 0);
    const auto b = vit.run(shuffled, Roi{0, 0, 63, 63}, 0);
    bool exact = true;
    for (int t = 0; t < 16; ++t) {
      const int src = perm[static_cast<std::size_t>(t)];
      for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
          exact = exact && a.seg.labels((src % 4) * 16 + x, (src / 4) * 16 + y) == b.seg.labels((t % 4) * 16 + x, (t / 4) * 16 + y);
        }
      }
    }
    o.require(exact, "label permutation");
    o.detail << " permutation exact";
  }
}

void check_end_to_end(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto ours_cfg = default_run(VariantMode::BLISSCAM, kEndToEndFrames);
  o.require(!ours_cfg.pipeline.segmenter && !ours_cfg.pipeline.roi_model, "oracle segmenter and ROI heuristic");
  o.require(std::abs(ours_cfg.pipeline.target_rate - 0.2) < 1e-12, "20% in-ROI rate");
  const auto ours = execute(ours_cfg).summary;
  const auto full = execute(default_run(VariantMode::NPU_FULL, kEndToEndFrames)).summary;
  const double err = std::hypot(ours.gaze_error_vertical, ours.gaze_error_horizontal);
  const double full_err = std::hypot(full.gaze_error_vertical, full.gaze_error_horizontal);
  o.require(ours.retention <= kRetentionMax, "retention");
  o.require(ours.compression >= kReductionMin, "data reduction");
  o.require(ours.gaze_error_vertical <= kGazeRatioMax * full.gaze_error_vertical &&
                ours.gaze_error_horizontal <= kGazeRatioMax * full.gaze_error_horizontal,
            "gaze error ratio");
  const double secs = elapsed_since(t0);
  o.require(secs < kEndToEndBudget, "runtime");
  o.detail << "retention " << ours.retention * 100 << "%, reduction " << ours.compression << "x, gaze error " << err
           << " deg vs full-frame " << full_err << " deg";
}

}  // namespace

int main() {
  criterion("rle_round_trip", check_rle_round_trip);
  criterion("eventify_oracle", check_eventify_oracle);
  criterion("sampling_calibration", check_sampling_calibration);
  criterion("mipi_model", check_mipi_model);
  criterion("pipeline_timing", check_pipeline_timing);
  criterion("latency_ratio", check_latency_ratio);
  criterion("energy_ordering", check_energy_ordering);
  criterion("vit_forward", check_vit_forward);
  criterion("end_to_end", check_end_to_end);
  std::printf("%s: %d failed\n", failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL", failures);
  return failures == 0 ? 0 : 1;
}
