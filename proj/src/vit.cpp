#include "bliss/vit.hpp"

#include <cmath>

#include "bliss/error.hpp"

namespace bliss {
namespace {

std::vector<std::string> block_names(const VitConfig& cfg) {
  std::vector<std::string> names;
  for (int i = 0; i < cfg.encoder_blocks; ++i) names.push_back("vit.encoder." + std::to_string(i));
  for (int i = 0; i < cfg.decoder_blocks; ++i) names.push_back("vit.decoder." + std::to_string(i));
  return names;
}

MatrixRM to_matrix(const Tensor& t, int rows, int cols) {
  return Eigen::Map<const MatrixRM>(t.data.data(), rows, cols);
}

Eigen::RowVectorXf to_row(const Tensor& t) {
  return Eigen::Map<const Eigen::RowVectorXf>(t.data.data(), static_cast<Eigen::Index>(t.data.size()));
}

float gelu(float x) { return 0.5f * x * (1.0f + std::erf(x * static_cast<float>(M_SQRT1_2))); }

}  // namespace

std::vector<TensorSpec> VitConfig::tensor_specs() const {
  auto u = [](int v) { return static_cast<std::uint32_t>(v); };
  const auto d = u(embed_dim);
  const auto hidden = u(embed_dim * mlp_ratio);
  std::vector<TensorSpec> specs{
      {"vit.patch_embed.weight", {d, u(patch_dim())}},
      {"vit.patch_embed.bias", {d}},
      {"vit.pos_embed", {u(max_grid_height), u(max_grid_width), d}},
  };
  for (const auto& b : block_names(*this)) {
    specs.push_back({b + ".norm1.weight", {d}});
    specs.push_back({b + ".norm1.bias", {d}});
    specs.push_back({b + ".attn.qkv.weight", {3 * d, d}});
    specs.push_back({b + ".attn.qkv.bias", {3 * d}});
    specs.push_back({b + ".attn.proj.weight", {d, d}});
    specs.push_back({b + ".attn.proj.bias", {d}});
    specs.push_back({b + ".norm2.weight", {d}});
    specs.push_back({b + ".norm2.bias", {d}});
    specs.push_back({b + ".mlp.fc1.weight", {hidden, d}});
    specs.push_back({b + ".mlp.fc1.bias", {hidden}});
    specs.push_back({b + ".mlp.fc2.weight", {d, hidden}});
    specs.push_back({b + ".mlp.fc2.bias", {d}});
  }
  specs.push_back({"vit.norm.weight", {d}});
  specs.push_back({"vit.norm.bias", {d}});
  specs.push_back({"vit.head.weight", {u(class_count * patch_size * patch_size), d}});
  specs.push_back({"vit.head.bias", {u(class_count * patch_size * patch_size)}});
  return specs;
}

void VitConfig::validate() const {
  if (patch_size < 1) throw ConfigError("vit.patch_size must be >= 1");
  if (embed_dim < 1 || heads < 1) throw ConfigError("vit.embed_dim and vit.heads must be >= 1");
  if (embed_dim % heads != 0) throw ConfigError("vit.embed_dim must be divisible by vit.heads");
  if (encoder_blocks < 0 || decoder_blocks < 0) throw ConfigError("vit block counts must be >= 0");
  if (class_count < 2) throw ConfigError("vit.class_count must be >= 2");
  if (mlp_ratio < 1) throw ConfigError("vit.mlp_ratio must be >= 1");
  if (max_grid_width < 1 || max_grid_height < 1) throw ConfigError("vit positional grid must be non-empty");
  if (!(max_code > 0.0)) throw ConfigError("vit.max_code must be > 0");
}

VitConfig VitConfig::from_config(const KeyValueConfig& kv) {
  VitConfig c;
  c.patch_size = static_cast<int>(kv.get_int("vit.patch_size", c.patch_size));
  c.embed_dim = static_cast<int>(kv.get_int("vit.embed_dim", c.embed_dim));
  c.heads = static_cast<int>(kv.get_int("vit.heads", c.heads));
  c.encoder_blocks = static_cast<int>(kv.get_int("vit.encoder_blocks", c.encoder_blocks));
  c.decoder_blocks = static_cast<int>(kv.get_int("vit.decoder_blocks", c.decoder_blocks));
  c.mlp_ratio = static_cast<int>(kv.get_int("vit.mlp_ratio", c.mlp_ratio));
  c.max_grid_width = static_cast<int>(kv.get_int("vit.max_grid_width", c.max_grid_width));
  c.max_grid_height = static_cast<int>(kv.get_int("vit.max_grid_height", c.max_grid_height));
  c.validate();
  return c;
}

VitMacs vit_macs(const VitConfig& cfg, std::uint64_t tokens) {
  const auto d = static_cast<std::uint64_t>(cfg.embed_dim);
  const auto hidden = d * static_cast<std::uint64_t>(cfg.mlp_ratio);
  const auto blocks = static_cast<std::uint64_t>(cfg.encoder_blocks + cfg.decoder_blocks);
  const auto head_out = static_cast<std::uint64_t>(cfg.class_count) * cfg.patch_size * cfg.patch_size;
  VitMacs m;
  const std::uint64_t per_token = static_cast<std::uint64_t>(cfg.patch_dim()) * d +
                                  blocks * (3 * d * d + d * d + 2 * d * hidden) + d * head_out;
  m.linear = tokens * per_token;
  m.attention = blocks * 2 * tokens * tokens * d;
  return m;
}

VitSegmenter::VitSegmenter(const WeightBundle& weights, VitConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const auto specs = cfg_.tensor_specs();
  auto get = [&](const std::string& name) -> const Tensor& {
    for (const auto& [n, dims] : specs) {
      if (n == name) return weights.require(n, dims);
    }
    throw FormatError("unknown tensor '" + name + "'");
  };
  const int d = cfg_.embed_dim;
  const int hidden = d * cfg_.mlp_ratio;
  auto linear = [&](const std::string& base, int out, int in) {
    return Linear{to_matrix(get(base + ".weight"), out, in), to_row(get(base + ".bias"))};
  };
  auto norm = [&](const std::string& base) { return Norm{to_row(get(base + ".weight")), to_row(get(base + ".bias"))}; };
  patch_embed_ = linear("vit.patch_embed", d, cfg_.patch_dim());
  pos_embed_ = to_matrix(get("vit.pos_embed"), cfg_.max_grid_height * cfg_.max_grid_width, d);
  for (const auto& b : block_names(cfg_)) {
    blocks_.push_back(Block{norm(b + ".norm1"), norm(b + ".norm2"), linear(b + ".attn.qkv", 3 * d, d),
                            linear(b + ".attn.proj", d, d), linear(b + ".mlp.fc1", hidden, d),
                            linear(b + ".mlp.fc2", d, hidden)});
  }
  final_norm_ = norm("vit.norm");
  head_ = linear("vit.head", cfg_.class_count * cfg_.patch_size * cfg_.patch_size, d);
}

MatrixRM VitSegmenter::patchify(const Grid<std::uint16_t>& sparse_roi, int& grid_width, int& grid_height) const {
  const int p = cfg_.patch_size;
  grid_width = (sparse_roi.width() + p - 1) / p;
  grid_height = (sparse_roi.height() + p - 1) / p;
  MatrixRM patches = MatrixRM::Zero(grid_width * grid_height, cfg_.patch_dim());
  const float scale = static_cast<float>(1.0 / cfg_.max_code);
  for (int y = 0; y < sparse_roi.height(); ++y) {
    for (int x = 0; x < sparse_roi.width(); ++x) {
      const std::uint16_t v = sparse_roi(x, y);
      if (v == 0) continue;
      const int token = (y / p) * grid_width + (x / p);
      const int offset = (y % p) * p + (x % p);
      patches(token, offset) = static_cast<float>(v) * scale;
      patches(token, p * p + offset) = 1.0f;
    }
  }
  return patches;
}

MatrixRM VitSegmenter::layer_norm(const MatrixRM& x, const Norm& n) const {
  MatrixRM out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const float mean = x.row(r).mean();
    const Eigen::RowVectorXf centred = x.row(r).array() - mean;
    const float var = centred.squaredNorm() / static_cast<float>(x.cols());
    out.row(r) = (centred / std::sqrt(var + cfg_.layer_norm_eps)).cwiseProduct(n.gamma) + n.beta;
  }
  return out;
}

MatrixRM VitSegmenter::block_forward(const MatrixRM& x, const Block& b, std::vector<MatrixRM>* attention) const {
  const int d = cfg_.embed_dim;
  const int dh = cfg_.head_dim();
  const float inv_sqrt = 1.0f / std::sqrt(static_cast<float>(dh));
  const Eigen::Index n = x.rows();

  const MatrixRM h = layer_norm(x, b.norm1);
  const MatrixRM qkv = (h * b.qkv.weight.transpose()).rowwise() + b.qkv.bias;
  MatrixRM heads_out(n, d);
  for (int head = 0; head < cfg_.heads; ++head) {
    const auto q = qkv.middleCols(head * dh, dh);
    const auto k = qkv.middleCols(d + head * dh, dh);
    const auto v = qkv.middleCols(2 * d + head * dh, dh);
    MatrixRM scores = (q * k.transpose()) * inv_sqrt;
    for (Eigen::Index r = 0; r < n; ++r) {
      auto row = scores.row(r);
      row = (row.array() - row.maxCoeff()).exp();
      row /= row.sum();
    }
    heads_out.middleCols(head * dh, dh) = scores * v;
    if (attention != nullptr) attention->push_back(std::move(scores));
  }
  MatrixRM y = x + ((heads_out * b.proj.weight.transpose()).rowwise() + b.proj.bias);

  const MatrixRM h2 = layer_norm(y, b.norm2);
  MatrixRM mid = (h2 * b.fc1.weight.transpose()).rowwise() + b.fc1.bias;
  mid = mid.unaryExpr([](float v) { return gelu(v); });
  y += (mid * b.fc2.weight.transpose()).rowwise() + b.fc2.bias;
  return y;
}

MatrixRM VitSegmenter::forward_tokens(const MatrixRM& patches, int grid_width, int grid_height,
                                      std::vector<MatrixRM>* attention) const {
  if (patches.cols() != cfg_.patch_dim() || patches.rows() != static_cast<Eigen::Index>(grid_width) * grid_height) {
    throw ContractError("patch matrix does not match the token grid");
  }
  if (grid_width > cfg_.max_grid_width || grid_height > cfg_.max_grid_height) {
    throw ContractError("ROI of " + std::to_string(grid_width) + "x" + std::to_string(grid_height) +
                        " patches exceeds the positional table");
  }
  MatrixRM x = (patches * patch_embed_.weight.transpose()).rowwise() + patch_embed_.bias;
  for (int gy = 0; gy < grid_height; ++gy) {
    for (int gx = 0; gx < grid_width; ++gx) x.row(gy * grid_width + gx) += pos_embed_.row(gy * cfg_.max_grid_width + gx);
  }
  for (const auto& b : blocks_) x = block_forward(x, b, attention);
  x = layer_norm(x, final_norm_);
  return (x * head_.weight.transpose()).rowwise() + head_.bias;
}

LabelGrid VitSegmenter::unfold_labels(const MatrixRM& logits, int grid_width, int grid_height, int width,
                                      int height) const {
  const int p = cfg_.patch_size;
  const int pp = p * p;
  if (width > grid_width * p || height > grid_height * p) throw ContractError("label grid larger than token grid");
  LabelGrid labels(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const auto token = (y / p) * grid_width + (x / p);
      const int offset = (y % p) * p + (x % p);
      int best = 0;
      float best_v = logits(token, offset);
      for (int c = 1; c < cfg_.class_count; ++c) {
        const float v = logits(token, c * pp + offset);
        if (v > best_v) {
          best = c;
          best_v = v;
        }
      }
      labels(x, y) = static_cast<std::uint8_t>(best);
    }
  }
  return labels;
}

VitOutput VitSegmenter::run(const Grid<std::uint16_t>& sparse_roi, const Roi& roi, int frame_index,
                            bool keep_attention) const {
  if (sparse_roi.width() != roi.width() || sparse_roi.height() != roi.height()) {
    throw ContractError("sparse ROI grid does not match the ROI size");
  }
  VitOutput out;
  const MatrixRM patches = patchify(sparse_roi, out.grid_width, out.grid_height);
  out.logits = forward_tokens(patches, out.grid_width, out.grid_height, keep_attention ? &out.attention : nullptr);
  out.seg = SegMap{unfold_labels(out.logits, out.grid_width, out.grid_height, roi.width(), roi.height()), roi,
                   frame_index};
  return out;
}

SegMap vit_forward(const Grid<std::uint16_t>& sparse_roi, const Roi& roi, const WeightBundle& weights,
                   const VitConfig& cfg, int frame_index) {
  return VitSegmenter(weights, cfg).run(sparse_roi, roi, frame_index).seg;
}

}  // namespace bliss
