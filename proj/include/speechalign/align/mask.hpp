#pragma once

#include <compare>
#include <set>
#include <string>
#include <string_view>

#include "speechalign/tinylm/params.hpp"

namespace speechalign::align {

struct MaskKey {
  tinylm::ParamGroup group;
  int layer;
  auto operator<=>(const MaskKey&) const = default;
};

// Set of (group tag, layer index) pairs whose tensors are trainable.
// Non-empty, and every key names at least one tensor of the target model.
class ParamMask {
 public:
  ParamMask(std::set<MaskKey> keys, const tinylm::ModelParams& target);

  const std::set<MaskKey>& keys() const { return keys_; }
  bool contains(const tinylm::Tensor& t) const { return keys_.count({t.group, t.layer}) > 0; }
  std::size_t trainable_parameter_count(const tinylm::ModelParams& params) const;

 private:
  std::set<MaskKey> keys_;
};

struct MaskStrategy {
  enum class Kind { kKqLn, kTopLayers, kNone };
  Kind kind = Kind::kKqLn;
  int top_n = 4;

  // "kqln", "top:N" / "toplayers:N", "none"
  static MaskStrategy parse(std::string_view s);
  std::string to_string() const;
  bool operator==(const MaskStrategy&) const = default;
};

// attention.key, attention.query and layernorm of every transformer layer.
ParamMask build_mask_kqln(const tinylm::ModelParams& params);
// Every tensor of the n highest-indexed layers.
ParamMask build_mask_toplayers(const tinylm::ModelParams& params, int n);
// Every tensor, including embeddings and the head.
ParamMask build_mask_all(const tinylm::ModelParams& params);
ParamMask build_mask(const tinylm::ModelParams& params, const MaskStrategy& strategy);

}  // namespace speechalign::align
