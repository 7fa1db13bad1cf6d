#include "speechalign/align/mask.hpp"

#include <charconv>

#include "speechalign/common/error.hpp"

namespace speechalign::align {

using tinylm::ParamGroup;

ParamMask::ParamMask(std::set<MaskKey> keys, const tinylm::ModelParams& target)
    : keys_(std::move(keys)) {
  if (keys_.empty()) throw ValidationError("parameter mask is empty");
  for (const auto& k : keys_) {
    bool found = false;
    for (const auto& t : target.tensors()) {
      if (t.group == k.group && t.layer == k.layer) {
        found = true;
        break;
      }
    }
    if (!found) {
      throw ValidationError("mask key (" + std::string(tinylm::to_string(k.group)) + ", layer " +
                            std::to_string(k.layer) + ") names no tensor");
    }
  }
}

std::size_t ParamMask::trainable_parameter_count(const tinylm::ModelParams& params) const {
  std::size_t n = 0;
  for (const auto& t : params.tensors()) {
    if (contains(t)) n += t.size();
  }
  return n;
}

MaskStrategy MaskStrategy::parse(std::string_view s) {
  if (s == "kqln" || s == "KQ_LN" || s == "kq-ln") return {Kind::kKqLn, 4};
  if (s == "none" || s == "NONE" || s == "all") return {Kind::kNone, 4};
  for (std::string_view prefix : {"top:", "toplayers:", "TOP_LAYERS:"}) {
    if (s.substr(0, prefix.size()) == prefix) {
      const auto num = s.substr(prefix.size());
      int n = 0;
      auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), n);
      if (ec != std::errc() || ptr != num.data() + num.size() || n <= 0) {
        throw ValidationError("invalid layer count in mask strategy: " + std::string(s));
      }
      return {Kind::kTopLayers, n};
    }
  }
  throw ValidationError("unknown mask strategy: " + std::string(s) +
                        " (expected kqln, top:N or none)");
}

std::string MaskStrategy::to_string() const {
  switch (kind) {
    case Kind::kKqLn: return "kqln";
    case Kind::kTopLayers: return "top:" + std::to_string(top_n);
    case Kind::kNone: return "none";
  }
  return "?";
}

ParamMask build_mask_kqln(const tinylm::ModelParams& params) {
  std::set<MaskKey> keys;
  for (int l = 0; l < params.config().n_layers; ++l) {
    keys.insert({ParamGroup::kAttentionKey, l});
    keys.insert({ParamGroup::kAttentionQuery, l});
    keys.insert({ParamGroup::kLayerNorm, l});
  }
  return ParamMask(std::move(keys), params);
}

ParamMask build_mask_toplayers(const tinylm::ModelParams& params, int n) {
  const int layers = params.config().n_layers;
  if (n <= 0) throw ValidationError("top-layers count must be positive");
  if (n > layers) {
    throw ValidationError("top-layers count " + std::to_string(n) + " exceeds layer count " +
                          std::to_string(layers));
  }
  std::set<MaskKey> keys;
  for (const auto& t : params.tensors()) {
    if (t.layer >= layers - n) keys.insert({t.group, t.layer});
  }
  return ParamMask(std::move(keys), params);
}

ParamMask build_mask_all(const tinylm::ModelParams& params) {
  std::set<MaskKey> keys;
  for (const auto& t : params.tensors()) keys.insert({t.group, t.layer});
  return ParamMask(std::move(keys), params);
}

ParamMask build_mask(const tinylm::ModelParams& params, const MaskStrategy& strategy) {
  switch (strategy.kind) {
    case MaskStrategy::Kind::kKqLn: return build_mask_kqln(params);
    case MaskStrategy::Kind::kTopLayers: return build_mask_toplayers(params, strategy.top_n);
    case MaskStrategy::Kind::kNone: return build_mask_all(params);
  }
  throw ValidationError("unknown mask strategy");
}

}  // namespace speechalign::align
