#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "speechalign/align/mask.hpp"
#include "speechalign/align/preference.hpp"
#include "speechalign/tinylm/params.hpp"

namespace speechalign::align {

enum class Optimizer { kSgd, kAdam };

struct AlignConfig {
  double beta = 0.1;
  double dpo_weight = 0.9;
  double learning_rate = 5e-6;
  int epochs = 2;
  MaskStrategy mask;
  std::uint64_t seed = 1234;
  Optimizer optimizer = Optimizer::kSgd;
  // Examples per update; losses are averaged over the batch.
  int batch_size = 1;
  bool shuffle = true;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
  nlohmann::json to_json() const;
  static AlignConfig from_json(const nlohmann::json& j);
};

struct StepRecord {
  std::size_t step = 0;
  int epoch = 0;
  double dpo_loss = 0.0;
  double sft_loss = 0.0;
  double combined_loss = 0.0;
  double margin = 0.0;
};

struct PreferenceEval {
  double accuracy = 0.0;     // share of examples with margin > 0
  double mean_margin = 0.0;
};

struct TrainReport {
  std::vector<StepRecord> steps;
  std::optional<PreferenceEval> heldout;
};

struct TrainResult {
  tinylm::ModelParams policy;
  TrainReport report;
};

// Gradient descent on w * L_dpo + (1 - w) * L_sft. Only tensors inside the
// mask move; everything else stays bit-identical. The reference is never
// modified. Deterministic for a fixed config. Throws NumericError on a
// non-finite loss or gradient.
TrainResult train(const tinylm::ModelParams& policy, const tinylm::ModelParams& reference,
                  std::span<const PreferenceExample> dataset, const AlignConfig& config,
                  std::span<const PreferenceExample> heldout = {});

PreferenceEval evaluate_preferences(const tinylm::ModelParams& policy,
                                    const tinylm::ModelParams& reference,
                                    std::span<const PreferenceExample> examples, double beta);

nlohmann::json step_to_json(const StepRecord& r);
// Per-step JSONL lines followed by a {"heldout": ...} summary line when present.
std::vector<nlohmann::json> report_to_jsonl(const TrainReport& report);

}  // namespace speechalign::align
