#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace speechalign::tinylm {

enum class ParamGroup {
  kEmbedding,
  kAttentionKey,
  kAttentionQuery,
  kAttentionValue,
  kAttentionOutput,
  kMlpIn,
  kMlpOut,
  kLayerNorm,
  kLmHead,
};

std::string_view to_string(ParamGroup g);
ParamGroup parse_group(std::string_view s);

struct ModelConfig {
  int n_layers = 2;
  int d_model = 64;
  int n_heads = 4;
  int context = 128;
  int vocab_size = 0;
  // MLP hidden width; 0 means 4 * d_model.
  int d_ff = 0;

  int ff_width() const { return d_ff > 0 ? d_ff : 4 * d_model; }
  int head_dim() const { return d_model / n_heads; }
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

// Row-major 2-D tensor. Vectors are stored as 1 x n.
struct Tensor {
  std::string name;
  ParamGroup group = ParamGroup::kEmbedding;
  int layer = -1;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  std::size_t size() const { return data.size(); }
};

// Tensor order inside a transformer layer.
enum LayerSlot : std::size_t {
  kLn1Gain,
  kLn1Bias,
  kWq,
  kBq,
  kWk,
  kBk,
  kWv,
  kBv,
  kWo,
  kBo,
  kLn2Gain,
  kLn2Bias,
  kW1,
  kB1,
  kW2,
  kB2,
  kLayerSlots
};

enum HeadSlot : std::size_t { kNormGain, kNormBias, kLmWeight, kLmBias, kHeadSlots };

// Named, group-tagged tensors of the toy decoder. Canonical order: token
// embedding, position embedding, layers 0..n-1 (kLayerSlots each), head.
// Embedding and head tensors carry layer index -1; the head includes the
// final LayerNorm.
class ModelParams {
 public:
  ModelParams() = default;

  // Gaussian(0, init_std) weights and embeddings, zero biases, LayerNorm gain 1.
  static ModelParams init(const ModelConfig& config, std::uint64_t seed, double init_std = 0.02);
  // Every value zero, including LayerNorm gains.
  static ModelParams zeros(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  std::vector<Tensor>& tensors() { return tensors_; }
  const std::vector<Tensor>& tensors() const { return tensors_; }

  Tensor& token_embedding() { return tensors_[0]; }
  const Tensor& token_embedding() const { return tensors_[0]; }
  Tensor& position_embedding() { return tensors_[1]; }
  const Tensor& position_embedding() const { return tensors_[1]; }
  Tensor& layer(int l, LayerSlot s) { return tensors_[layer_index(l, s)]; }
  const Tensor& layer(int l, LayerSlot s) const { return tensors_[layer_index(l, s)]; }
  Tensor& head(HeadSlot s) { return tensors_[head_index(s)]; }
  const Tensor& head(HeadSlot s) const { return tensors_[head_index(s)]; }

  const Tensor& find(std::string_view name) const;
  std::size_t parameter_count() const;

  // Checks names, tags, shapes against the config and that values are finite.
  void validate() const;
  // Same config and tensor shapes.
  bool same_shape(const ModelParams& other) const;
  bool operator==(const ModelParams& other) const;

 private:
  explicit ModelParams(const ModelConfig& config);
  std::size_t layer_index(int l, LayerSlot s) const {
    return 2 + static_cast<std::size_t>(l) * kLayerSlots + s;
  }
  std::size_t head_index(HeadSlot s) const {
    return 2 + static_cast<std::size_t>(config_.n_layers) * kLayerSlots + s;
  }

  ModelConfig config_;
  std::vector<Tensor> tensors_;

  friend class GradientSet;
};

// Gradients keyed exactly like a ModelParams.
class GradientSet {
 public:
  explicit GradientSet(const ModelParams& like);

  std::vector<Tensor>& tensors() { return grads_.tensors_; }
  const std::vector<Tensor>& tensors() const { return grads_.tensors_; }
  // Gradients reuse the ModelParams layout so model code can index them the
  // same way.
  ModelParams& as_params() { return grads_; }
  const ModelParams& as_params() const { return grads_; }

  void zero();
  void scale(double s);
  void add(const GradientSet& other, double s = 1.0);
  bool all_finite() const;
  bool keys_match(const ModelParams& params) const;

 private:
  ModelParams grads_;
};

}  // namespace speechalign::tinylm
