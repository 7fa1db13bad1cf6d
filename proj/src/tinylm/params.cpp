#include "speechalign/tinylm/params.hpp"

#include <cmath>
#include <random>

#include "speechalign/common/error.hpp"

namespace speechalign::tinylm {

namespace {

struct SlotSpec {
  const char* name;
  ParamGroup group;
  bool is_gain;
  bool is_bias;
};

// Indexed by LayerSlot.
constexpr SlotSpec kLayerSpecs[kLayerSlots] = {
    {"ln1.gain", ParamGroup::kLayerNorm, true, false},
    {"ln1.bias", ParamGroup::kLayerNorm, false, true},
    {"attn.wq", ParamGroup::kAttentionQuery, false, false},
    {"attn.bq", ParamGroup::kAttentionQuery, false, true},
    {"attn.wk", ParamGroup::kAttentionKey, false, false},
    {"attn.bk", ParamGroup::kAttentionKey, false, true},
    {"attn.wv", ParamGroup::kAttentionValue, false, false},
    {"attn.bv", ParamGroup::kAttentionValue, false, true},
    {"attn.wo", ParamGroup::kAttentionOutput, false, false},
    {"attn.bo", ParamGroup::kAttentionOutput, false, true},
    {"ln2.gain", ParamGroup::kLayerNorm, true, false},
    {"ln2.bias", ParamGroup::kLayerNorm, false, true},
    {"mlp.w1", ParamGroup::kMlpIn, false, false},
    {"mlp.b1", ParamGroup::kMlpIn, false, true},
    {"mlp.w2", ParamGroup::kMlpOut, false, false},
    {"mlp.b2", ParamGroup::kMlpOut, false, true},
};

constexpr SlotSpec kHeadSpecs[kHeadSlots] = {
    {"lm_head.norm.gain", ParamGroup::kLmHead, true, false},
    {"lm_head.norm.bias", ParamGroup::kLmHead, false, true},
    {"lm_head.weight", ParamGroup::kLmHead, false, false},
    {"lm_head.bias", ParamGroup::kLmHead, false, true},
};

std::pair<std::size_t, std::size_t> layer_shape(const ModelConfig& c, LayerSlot s) {
  const auto d = static_cast<std::size_t>(c.d_model);
  const auto f = static_cast<std::size_t>(c.ff_width());
  switch (s) {
    case kWq: case kWk: case kWv: case kWo: return {d, d};
    case kW1: return {d, f};
    case kB1: return {1, f};
    case kW2: return {f, d};
    default: return {1, d};
  }
}

std::pair<std::size_t, std::size_t> head_shape(const ModelConfig& c, HeadSlot s) {
  const auto d = static_cast<std::size_t>(c.d_model);
  const auto v = static_cast<std::size_t>(c.vocab_size);
  switch (s) {
    case kLmWeight: return {d, v};
    case kLmBias: return {1, v};
    default: return {1, d};
  }
}

Tensor make_tensor(std::string name, ParamGroup g, int layer,
                   std::pair<std::size_t, std::size_t> shape) {
  Tensor t;
  t.name = std::move(name);
  t.group = g;
  t.layer = layer;
  t.rows = shape.first;
  t.cols = shape.second;
  t.data.assign(t.rows * t.cols, 0.0);
  return t;
}

}  // namespace

std::string_view to_string(ParamGroup g) {
  switch (g) {
    case ParamGroup::kEmbedding: return "embedding";
    case ParamGroup::kAttentionKey: return "attention.key";
    case ParamGroup::kAttentionQuery: return "attention.query";
    case ParamGroup::kAttentionValue: return "attention.value";
    case ParamGroup::kAttentionOutput: return "attention.output";
    case ParamGroup::kMlpIn: return "mlp.in";
    case ParamGroup::kMlpOut: return "mlp.out";
    case ParamGroup::kLayerNorm: return "layernorm";
    case ParamGroup::kLmHead: return "lm_head";
  }
  return "?";
}

ParamGroup parse_group(std::string_view s) {
  for (auto g : {ParamGroup::kEmbedding, ParamGroup::kAttentionKey, ParamGroup::kAttentionQuery,
                 ParamGroup::kAttentionValue, ParamGroup::kAttentionOutput, ParamGroup::kMlpIn,
                 ParamGroup::kMlpOut, ParamGroup::kLayerNorm, ParamGroup::kLmHead}) {
    if (to_string(g) == s) return g;
  }
  throw ValidationError("unknown parameter group: " + std::string(s));
}

void ModelConfig::validate() const {
  if (n_layers < 0) throw ValidationError("n_layers must be >= 0");
  if (d_model <= 0) throw ValidationError("d_model must be positive");
  if (n_heads <= 0 || d_model % n_heads != 0) {
    throw ValidationError("n_heads must be positive and divide d_model");
  }
  if (context <= 0) throw ValidationError("context must be positive");
  if (vocab_size < 4) throw ValidationError("vocab_size must be at least 4");
  if (d_ff < 0) throw ValidationError("d_ff must be >= 0");
}

ModelParams::ModelParams(const ModelConfig& config) : config_(config) {
  config_.validate();
  const auto d = static_cast<std::size_t>(config.d_model);
  tensors_.push_back(make_tensor("tok_emb", ParamGroup::kEmbedding, -1,
                                 {static_cast<std::size_t>(config.vocab_size), d}));
  tensors_.push_back(make_tensor("pos_emb", ParamGroup::kEmbedding, -1,
                                 {static_cast<std::size_t>(config.context), d}));
  for (int l = 0; l < config.n_layers; ++l) {
    for (std::size_t s = 0; s < kLayerSlots; ++s) {
      const auto& spec = kLayerSpecs[s];
      tensors_.push_back(make_tensor("layers." + std::to_string(l) + "." + spec.name, spec.group,
                                     l, layer_shape(config, static_cast<LayerSlot>(s))));
    }
  }
  for (std::size_t s = 0; s < kHeadSlots; ++s) {
    const auto& spec = kHeadSpecs[s];
    tensors_.push_back(
        make_tensor(spec.name, spec.group, -1, head_shape(config, static_cast<HeadSlot>(s))));
  }
}

ModelParams ModelParams::zeros(const ModelConfig& config) { return ModelParams(config); }

ModelParams ModelParams::init(const ModelConfig& config, std::uint64_t seed, double init_std) {
  ModelParams p(config);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, init_std);
  auto fill_normal = [&](Tensor& t) {
    for (double& v : t.data) v = normal(rng);
  };
  fill_normal(p.token_embedding());
  fill_normal(p.position_embedding());
  for (int l = 0; l < config.n_layers; ++l) {
    for (std::size_t s = 0; s < kLayerSlots; ++s) {
      Tensor& t = p.layer(l, static_cast<LayerSlot>(s));
      if (kLayerSpecs[s].is_gain) {
        std::fill(t.data.begin(), t.data.end(), 1.0);
      } else if (!kLayerSpecs[s].is_bias) {
        fill_normal(t);
      }
    }
  }
  std::fill(p.head(kNormGain).data.begin(), p.head(kNormGain).data.end(), 1.0);
  fill_normal(p.head(kLmWeight));
  return p;
}

const Tensor& ModelParams::find(std::string_view name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) return t;
  }
  throw ValidationError("no tensor named " + std::string(name));
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.size();
  return n;
}

void ModelParams::validate() const {
  config_.validate();
  const ModelParams expected(config_);
  if (expected.tensors_.size() != tensors_.size()) {
    throw ValidationError("tensor count does not match config");
  }
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    const auto& a = tensors_[i];
    const auto& e = expected.tensors_[i];
    if (a.name != e.name || a.group != e.group || a.layer != e.layer || a.rows != e.rows ||
        a.cols != e.cols || a.data.size() != a.rows * a.cols) {
      throw ValidationError("tensor " + a.name + " does not match the layout for this config");
    }
    for (double v : a.data) {
      if (!std::isfinite(v)) throw ValidationError("tensor " + a.name + " has a non-finite value");
    }
  }
}

bool ModelParams::same_shape(const ModelParams& other) const {
  if (!(config_ == other.config_) || tensors_.size() != other.tensors_.size()) return false;
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    if (tensors_[i].name != other.tensors_[i].name || tensors_[i].rows != other.tensors_[i].rows ||
        tensors_[i].cols != other.tensors_[i].cols) {
      return false;
    }
  }
  return true;
}

bool ModelParams::operator==(const ModelParams& other) const {
  if (!same_shape(other)) return false;
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    if (tensors_[i].data != other.tensors_[i].data) return false;
  }
  return true;
}

GradientSet::GradientSet(const ModelParams& like) : grads_(like.config()) {}

void GradientSet::zero() {
  for (auto& t : grads_.tensors_) std::fill(t.data.begin(), t.data.end(), 0.0);
}

void GradientSet::scale(double s) {
  for (auto& t : grads_.tensors_) {
    for (double& v : t.data) v *= s;
  }
}

void GradientSet::add(const GradientSet& other, double s) {
  if (!grads_.same_shape(other.grads_)) throw ValidationError("gradient shape mismatch");
  for (std::size_t i = 0; i < grads_.tensors_.size(); ++i) {
    auto& dst = grads_.tensors_[i].data;
    const auto& src = other.grads_.tensors_[i].data;
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += s * src[j];
  }
}

bool GradientSet::all_finite() const {
  for (const auto& t : grads_.tensors_) {
    for (double v : t.data) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

bool GradientSet::keys_match(const ModelParams& params) const {
  return grads_.same_shape(params);
}

}  // namespace speechalign::tinylm
