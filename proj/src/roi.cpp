#include "bliss/roi.hpp"

#include <algorithm>
#include <cmath>

#include "bliss/error.hpp"

namespace bliss {

Roi validate_roi(Roi roi, int width, int height) noexcept {
  if (roi.x1 > roi.x2) std::swap(roi.x1, roi.x2);
  if (roi.y1 > roi.y2) std::swap(roi.y1, roi.y2);
  roi.x1 = std::clamp(roi.x1, 0, width - 1);
  roi.x2 = std::clamp(roi.x2, 0, width - 1);
  roi.y1 = std::clamp(roi.y1, 0, height - 1);
  roi.y2 = std::clamp(roi.y2, 0, height - 1);
  return roi;
}

Roi predict_roi_heuristic(const EventMap& events, const std::optional<Roi>& prev_roi, int margin) {
  if (margin < 0) throw ContractError("ROI margin must be >= 0");
  const int w = events.width();
  const int h = events.height();
  int x1 = w, y1 = h, x2 = -1, y2 = -1;
  for (int y = 0; y < h; ++y) {
    const auto row = events.bits.row(y);
    for (int x = 0; x < w; ++x) {
      if (row[static_cast<std::size_t>(x)] == 0) continue;
      x1 = std::min(x1, x);
      x2 = std::max(x2, x);
      y1 = std::min(y1, y);
      y2 = std::max(y2, y);
    }
  }
  if (x2 < 0) return prev_roi ? validate_roi(*prev_roi, w, h) : Roi::full(w, h);
  return validate_roi({x1 - margin, y1 - margin, x2 + margin, y2 + margin}, w, h);
}

TensorShape RoiNetConfig::input_shape() const {
  return {in_channels(), (frame_height + input_pool - 1) / input_pool, (frame_width + input_pool - 1) / input_pool};
}

std::vector<TensorShape> RoiNetConfig::conv_shapes() const {
  std::vector<TensorShape> shapes;
  TensorShape s = input_shape();
  for (const auto& c : convs) {
    s = {c.out_channels, (s.height + 2 * c.padding - c.kernel) / c.stride + 1,
         (s.width + 2 * c.padding - c.kernel) / c.stride + 1};
    shapes.push_back(s);
  }
  return shapes;
}

std::uint64_t RoiNetConfig::macs() const {
  std::uint64_t total = 0;
  std::uint64_t in_c = static_cast<std::uint64_t>(in_channels());
  const auto shapes = conv_shapes();
  for (std::size_t i = 0; i < convs.size(); ++i) {
    const auto k = static_cast<std::uint64_t>(convs[i].kernel);
    total += static_cast<std::uint64_t>(shapes[i].size()) * in_c * k * k;
    in_c = static_cast<std::uint64_t>(convs[i].out_channels);
  }
  std::uint64_t in_f = shapes.back().size();
  for (int h : fc_hidden) {
    total += in_f * static_cast<std::uint64_t>(h);
    in_f = static_cast<std::uint64_t>(h);
  }
  return total + in_f * kOutputs;
}

std::vector<TensorSpec> RoiNetConfig::tensor_specs() const {
  std::vector<TensorSpec> specs;
  auto u = [](auto v) { return static_cast<std::uint32_t>(v); };
  int in_c = in_channels();
  for (std::size_t i = 0; i < convs.size(); ++i) {
    const auto& c = convs[i];
    const auto base = "roi.conv" + std::to_string(i + 1);
    specs.push_back({base + ".weight", {u(c.out_channels), u(in_c), u(c.kernel), u(c.kernel)}});
    specs.push_back({base + ".bias", {u(c.out_channels)}});
    in_c = c.out_channels;
  }
  std::size_t in_f = conv_shapes().back().size();
  std::vector<int> widths = fc_hidden;
  widths.push_back(kOutputs);
  for (std::size_t i = 0; i < widths.size(); ++i) {
    const auto base = "roi.fc" + std::to_string(i + 1);
    specs.push_back({base + ".weight", {u(widths[i]), u(in_f)}});
    specs.push_back({base + ".bias", {u(widths[i])}});
    in_f = static_cast<std::size_t>(widths[i]);
  }
  return specs;
}

void RoiNetConfig::validate() const {
  if (frame_width <= 0 || frame_height <= 0) throw ConfigError("roi.frame size must be positive");
  if (input_pool < 1) throw ConfigError("roi.input_pool must be >= 1");
  if (convs.empty()) throw ConfigError("roi net needs at least one conv layer");
  for (const auto& c : convs) {
    if (c.out_channels < 1 || c.kernel < 1 || c.stride < 1 || c.padding < 0) {
      throw ConfigError("roi conv layer has a non-positive size");
    }
  }
  for (const auto& s : conv_shapes()) {
    if (s.width < 1 || s.height < 1) throw ConfigError("roi conv stack shrinks the input to nothing");
  }
  for (int h : fc_hidden) {
    if (h < 1) throw ConfigError("roi fc width must be >= 1");
  }
}

RoiNetConfig RoiNetConfig::from_config(const KeyValueConfig& kv) {
  RoiNetConfig cfg;
  cfg.frame_width = static_cast<int>(kv.get_int("sensor.width", cfg.frame_width));
  cfg.frame_height = static_cast<int>(kv.get_int("sensor.height", cfg.frame_height));
  cfg.input_pool = static_cast<int>(kv.get_int("roi.input_pool", cfg.input_pool));
  cfg.use_prev_seg = kv.get_bool("roi.use_prev_seg", cfg.use_prev_seg);
  for (std::size_t i = 0; i < cfg.convs.size(); ++i) {
    const auto base = "roi.conv" + std::to_string(i + 1);
    auto& c = cfg.convs[i];
    c.out_channels = static_cast<int>(kv.get_int(base + ".channels", c.out_channels));
    c.kernel = static_cast<int>(kv.get_int(base + ".kernel", c.kernel));
    c.stride = static_cast<int>(kv.get_int(base + ".stride", c.stride));
    c.padding = static_cast<int>(kv.get_int(base + ".padding", c.padding));
  }
  cfg.fc_hidden[0] = static_cast<int>(kv.get_int("roi.fc1.width", cfg.fc_hidden[0]));
  cfg.validate();
  return cfg;
}

std::vector<float> roi_net_input(const EventMap& events, const SegMap* prev_seg, const RoiNetConfig& cfg) {
  if (events.width() != cfg.frame_width || events.height() != cfg.frame_height) {
    throw ContractError("event map size does not match the ROI net frame size");
  }
  const auto shape = cfg.input_shape();
  const int pool = cfg.input_pool;
  const std::size_t plane = static_cast<std::size_t>(shape.height) * static_cast<std::size_t>(shape.width);
  std::vector<float> input(shape.size(), 0.0f);
  for (int y = 0; y < cfg.frame_height; ++y) {
    const auto row = events.bits.row(y);
    for (int x = 0; x < cfg.frame_width; ++x) {
      if (row[static_cast<std::size_t>(x)] != 0) {
        input[static_cast<std::size_t>(y / pool) * static_cast<std::size_t>(shape.width) + static_cast<std::size_t>(x / pool)] = 1.0f;
      }
    }
  }
  if (cfg.use_prev_seg && prev_seg != nullptr) {
    const auto& r = prev_seg->roi;
    const float scale = 1.0f / static_cast<float>(kClassCount - 1);
    for (int y = 0; y < prev_seg->labels.height(); ++y) {
      for (int x = 0; x < prev_seg->labels.width(); ++x) {
        const int fx = r.x1 + x;
        const int fy = r.y1 + y;
        if (fx < 0 || fy < 0 || fx >= cfg.frame_width || fy >= cfg.frame_height) continue;
        float& cell = input[plane + static_cast<std::size_t>(fy / pool) * static_cast<std::size_t>(shape.width) +
                            static_cast<std::size_t>(fx / pool)];
        cell = std::max(cell, static_cast<float>(prev_seg->labels(x, y)) * scale);
      }
    }
  }
  return input;
}

RoiNet::RoiNet(const WeightBundle& weights, RoiNetConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const auto specs = cfg_.tensor_specs();
  for (std::size_t i = 0; i < specs.size(); i += 2) {
    const auto& w = weights.require(specs[i].first, specs[i].second);
    const auto& b = weights.require(specs[i + 1].first, specs[i + 1].second);
    Layer layer{w.data, b.data};
    if (i / 2 < cfg_.convs.size()) {
      convs_.push_back(std::move(layer));
    } else {
      fcs_.push_back(std::move(layer));
    }
  }
}

namespace {

std::vector<float> conv2d_relu(const std::vector<float>& in, const TensorShape& is, const ConvSpec& c,
                               const TensorShape& os, const std::vector<float>& weight, const std::vector<float>& bias) {
  std::vector<float> out(os.size());
  const int k = c.kernel;
  for (int oc = 0; oc < os.channels; ++oc) {
    for (int oy = 0; oy < os.height; ++oy) {
      for (int ox = 0; ox < os.width; ++ox) {
        float acc = bias[static_cast<std::size_t>(oc)];
        for (int ic = 0; ic < is.channels; ++ic) {
          const float* w = weight.data() + (static_cast<std::size_t>(oc) * static_cast<std::size_t>(is.channels) +
                                            static_cast<std::size_t>(ic)) * static_cast<std::size_t>(k * k);
          const float* plane = in.data() + static_cast<std::size_t>(ic) * static_cast<std::size_t>(is.height) *
                                               static_cast<std::size_t>(is.width);
          for (int ky = 0; ky < k; ++ky) {
            const int iy = oy * c.stride - c.padding + ky;
            if (iy < 0 || iy >= is.height) continue;
            const float* src = plane + static_cast<std::size_t>(iy) * static_cast<std::size_t>(is.width);
            for (int kx = 0; kx < k; ++kx) {
              const int ix = ox * c.stride - c.padding + kx;
              if (ix < 0 || ix >= is.width) continue;
              acc += w[ky * k + kx] * src[ix];
            }
          }
        }
        out[(static_cast<std::size_t>(oc) * static_cast<std::size_t>(os.height) + static_cast<std::size_t>(oy)) *
                static_cast<std::size_t>(os.width) + static_cast<std::size_t>(ox)] = std::max(acc, 0.0f);
      }
    }
  }
  return out;
}

std::vector<float> dense(const std::vector<float>& in, const std::vector<float>& weight, const std::vector<float>& bias,
                         bool relu) {
  std::vector<float> out(bias.size());
  const std::size_t n = in.size();
  for (std::size_t o = 0; o < out.size(); ++o) {
    const float* w = weight.data() + o * n;
    float acc = bias[o];
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * in[i];
    out[o] = relu ? std::max(acc, 0.0f) : acc;
  }
  return out;
}

}  // namespace

std::array<float, 4> RoiNet::forward(const std::vector<float>& input) const {
  TensorShape shape = cfg_.input_shape();
  if (input.size() != shape.size()) throw ContractError("ROI net input has the wrong size");
  const auto shapes = cfg_.conv_shapes();
  std::vector<float> x = input;
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    x = conv2d_relu(x, shape, cfg_.convs[i], shapes[i], convs_[i].weight, convs_[i].bias);
    shape = shapes[i];
  }
  for (std::size_t i = 0; i < fcs_.size(); ++i) {
    x = dense(x, fcs_[i].weight, fcs_[i].bias, i + 1 < fcs_.size());
  }
  return {x[0], x[1], x[2], x[3]};
}

Roi roi_from_outputs(const std::array<float, 4>& out, int width, int height) noexcept {
  auto coord = [](float v, int extent) {
    const double n = std::isfinite(v) ? std::clamp(static_cast<double>(v), 0.0, 1.0) : 0.0;
    return static_cast<int>(std::lround(n * static_cast<double>(extent - 1)));
  };
  return validate_roi({coord(out[0], width), coord(out[1], height), coord(out[2], width), coord(out[3], height)}, width,
                      height);
}

Roi RoiNet::predict(const EventMap& events, const SegMap* prev_seg) const {
  return roi_from_outputs(forward(roi_net_input(events, prev_seg, cfg_)), cfg_.frame_width, cfg_.frame_height);
}

Roi predict_roi_dnn(const EventMap& events, const SegMap* prev_seg, const WeightBundle& weights, const RoiNetConfig& cfg) {
  return RoiNet(weights, cfg).predict(events, prev_seg);
}

}  // namespace bliss
