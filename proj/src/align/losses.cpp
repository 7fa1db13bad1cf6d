#include "speechalign/align/losses.hpp"

#include <cmath>

#include "speechalign/common/error.hpp"
#include "speechalign/tinylm/model.hpp"

namespace speechalign::align {

using tinylm::ModelParams;

double softplus(double x) {
  // log(1 + e^x) = max(x, 0) + log1p(e^-|x|)
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double log_sigmoid(double x) { return -softplus(-x); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

void check_pair(const ModelParams& policy, const ModelParams& reference) {
  if (!policy.same_shape(reference)) {
    throw ValidationError("policy and reference models differ in shape or vocabulary");
  }
}

double logprob(const ModelParams& m, const PreferenceExample& ex, const tinylm::TokenSequence& y) {
  return tinylm::sequence_logprob(m, ex.prompt, y, ex.scoring);
}

}  // namespace

ReferenceLogprobs reference_logprobs(const ModelParams& reference, const PreferenceExample& ex) {
  return {logprob(reference, ex, ex.chosen), logprob(reference, ex, ex.rejected)};
}

double implicit_reward_margin(const ModelParams& policy, const ModelParams& reference,
                              const PreferenceExample& ex, double beta) {
  check_pair(policy, reference);
  const auto ref = reference_logprobs(reference, ex);
  const double dw = logprob(policy, ex, ex.chosen) - ref.chosen;
  const double dl = logprob(policy, ex, ex.rejected) - ref.rejected;
  return beta * (dw - dl);
}

DpoResult dpo_loss(const ModelParams& policy, const ModelParams& reference,
                   const PreferenceExample& ex, double beta) {
  const double m = implicit_reward_margin(policy, reference, ex, beta);
  return {softplus(-m), m};
}

double sft_loss(const ModelParams& policy, const PreferenceExample& ex) {
  return -logprob(policy, ex, ex.chosen);
}

double combined_loss(const ModelParams& policy, const ModelParams& reference,
                     const PreferenceExample& ex, double beta, double dpo_weight) {
  const double w = dpo_weight;
  // Each term is only evaluated when its weight is non-zero so that w = 0 and
  // w = 1 reduce exactly to the single objective.
  double total = 0.0;
  if (w != 0.0) total += w * dpo_loss(policy, reference, ex, beta).loss;
  if (w != 1.0) total += (1.0 - w) * sft_loss(policy, ex);
  return total;
}

LossBreakdown combined_loss_grad(const ModelParams& policy, const ReferenceLogprobs& ref,
                                 const PreferenceExample& ex, double beta, double dpo_weight,
                                 double scale, tinylm::GradientSet& grads) {
  const auto tw = tinylm::record_sequence(policy, ex.prompt, ex.chosen, ex.scoring);
  const auto tl = tinylm::record_sequence(policy, ex.prompt, ex.rejected, ex.scoring);
  LossBreakdown out;
  out.margin = beta * ((tw.logprob - ref.chosen) - (tl.logprob - ref.rejected));
  out.dpo = softplus(-out.margin);
  out.sft = -tw.logprob;
  const double w = dpo_weight;
  out.combined = 0.0;
  if (w != 0.0) out.combined += w * out.dpo;
  if (w != 1.0) out.combined += (1.0 - w) * out.sft;

  // d dpo / d margin = -sigmoid(-margin); d margin / d lp_w = beta = -d margin / d lp_l
  const double g_margin = -sigmoid(-out.margin);
  const double coef_w = w * g_margin * beta - (1.0 - w);
  const double coef_l = -w * g_margin * beta;
  tinylm::backward_sequence(policy, tw, scale * coef_w, grads);
  tinylm::backward_sequence(policy, tl, scale * coef_l, grads);
  return out;
}

}  // namespace speechalign::align
