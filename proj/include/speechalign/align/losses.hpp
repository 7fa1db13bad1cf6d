#pragma once

#include "speechalign/align/preference.hpp"
#include "speechalign/tinylm/params.hpp"

namespace speechalign::align {

// log(1 + exp(x)) without overflow.
double softplus(double x);
// log(sigmoid(x)) = -softplus(-x)
double log_sigmoid(double x);
double sigmoid(double x);

struct ReferenceLogprobs {
  double chosen = 0.0;
  double rejected = 0.0;
};

// Reference-model log-probabilities; constant during training, so the trainer
// computes them once per example.
ReferenceLogprobs reference_logprobs(const tinylm::ModelParams& reference,
                                     const PreferenceExample& ex);

// beta * [(log pi(y_w|x) - log ref(y_w|x)) - (log pi(y_l|x) - log ref(y_l|x))]
double implicit_reward_margin(const tinylm::ModelParams& policy,
                              const tinylm::ModelParams& reference, const PreferenceExample& ex,
                              double beta);

struct DpoResult {
  double loss = 0.0;
  double margin = 0.0;
};

// loss = -log sigmoid(margin) = softplus(-margin)
DpoResult dpo_loss(const tinylm::ModelParams& policy, const tinylm::ModelParams& reference,
                   const PreferenceExample& ex, double beta);

// -log pi(y_w | x). Ignores the rejected response.
double sft_loss(const tinylm::ModelParams& policy, const PreferenceExample& ex);

// w * dpo + (1 - w) * sft
double combined_loss(const tinylm::ModelParams& policy, const tinylm::ModelParams& reference,
                     const PreferenceExample& ex, double beta, double dpo_weight);

struct LossBreakdown {
  double dpo = 0.0;
  double sft = 0.0;
  double combined = 0.0;
  double margin = 0.0;
};

// Evaluates the combined loss and accumulates scale * d(combined)/d(policy)
// into `grads`. The DPO and SFT terms share the policy forward pass on y_w.
LossBreakdown combined_loss_grad(const tinylm::ModelParams& policy, const ReferenceLogprobs& ref,
                                 const PreferenceExample& ex, double beta, double dpo_weight,
                                 double scale, tinylm::GradientSet& grads);

}  // namespace speechalign::align
