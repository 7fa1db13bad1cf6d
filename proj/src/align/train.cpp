#include "speechalign/align/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "speechalign/align/losses.hpp"
#include "speechalign/common/error.hpp"

namespace speechalign::align {

using tinylm::GradientSet;
using tinylm::ModelParams;

void AlignConfig::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be positive");
  if (!(dpo_weight >= 0.0 && dpo_weight <= 1.0)) {
    throw ValidationError("dpo_weight must lie in [0, 1]");
  }
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("learning_rate must be non-negative");
  }
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (mask.kind == MaskStrategy::Kind::kTopLayers && mask.top_n < 1) {
    throw ValidationError("top-layers count must be positive");
  }
}

nlohmann::json AlignConfig::to_json() const {
  return {{"beta", beta},
          {"dpo_weight", dpo_weight},
          {"learning_rate", learning_rate},
          {"epochs", epochs},
          {"mask", mask.to_string()},
          {"seed", seed},
          {"optimizer", optimizer == Optimizer::kAdam ? "adam" : "sgd"},
          {"batch_size", batch_size},
          {"shuffle", shuffle}};
}

AlignConfig AlignConfig::from_json(const nlohmann::json& j) {
  AlignConfig c;
  c.beta = j.value("beta", c.beta);
  c.dpo_weight = j.value("dpo_weight", c.dpo_weight);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.epochs = j.value("epochs", c.epochs);
  if (j.contains("mask")) c.mask = MaskStrategy::parse(j.at("mask").get<std::string>());
  c.seed = j.value("seed", c.seed);
  const std::string opt = j.value("optimizer", std::string("sgd"));
  if (opt == "adam") {
    c.optimizer = Optimizer::kAdam;
  } else if (opt != "sgd") {
    throw ValidationError("unknown optimizer: " + opt);
  }
  c.batch_size = j.value("batch_size", c.batch_size);
  c.shuffle = j.value("shuffle", c.shuffle);
  c.validate();
  return c;
}

namespace {

class Updater {
 public:
  Updater(const AlignConfig& cfg, const ModelParams& params, const ParamMask& mask)
      : cfg_(cfg) {
    for (std::size_t i = 0; i < params.tensors().size(); ++i) {
      if (mask.contains(params.tensors()[i])) trainable_.push_back(i);
    }
    if (cfg.optimizer == Optimizer::kAdam) {
      m_.resize(params.tensors().size());
      v_.resize(params.tensors().size());
      for (std::size_t i : trainable_) {
        m_[i].assign(params.tensors()[i].size(), 0.0);
        v_[i].assign(params.tensors()[i].size(), 0.0);
      }
    }
  }

  void apply(ModelParams& params, const GradientSet& grads) {
    ++t_;
    const double lr = cfg_.learning_rate;
    for (std::size_t i : trainable_) {
      auto& p = params.tensors()[i].data;
      const auto& g = grads.tensors()[i].data;
      if (cfg_.optimizer == Optimizer::kSgd) {
        for (std::size_t j = 0; j < p.size(); ++j) p[j] -= lr * g[j];
        continue;
      }
      const double b1 = cfg_.adam_beta1;
      const double b2 = cfg_.adam_beta2;
      const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
      const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
      auto& m = m_[i];
      auto& v = v_[i];
      for (std::size_t j = 0; j < p.size(); ++j) {
        m[j] = b1 * m[j] + (1.0 - b1) * g[j];
        v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
        p[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + cfg_.adam_eps);
      }
    }
  }

 private:
  const AlignConfig& cfg_;
  std::vector<std::size_t> trainable_;
  std::vector<std::vector<double>> m_, v_;
  long t_ = 0;
};

[[noreturn]] void abort_non_finite(const StepRecord& r, const std::string& what) {
  std::ostringstream os;
  os << "non-finite " << what << " at step " << r.step << " (epoch " << r.epoch
     << "): dpo=" << r.dpo_loss << " sft=" << r.sft_loss << " combined=" << r.combined_loss
     << " margin=" << r.margin;
  throw NumericError(os.str());
}

}  // namespace

TrainResult train(const ModelParams& policy, const ModelParams& reference,
                  std::span<const PreferenceExample> dataset, const AlignConfig& config,
                  std::span<const PreferenceExample> heldout) {
  config.validate();
  if (dataset.empty()) throw ValidationError("training dataset is empty");
  policy.validate();
  if (!policy.same_shape(reference)) {
    throw ValidationError("policy and reference models differ in shape or vocabulary");
  }
  for (const auto& ex : dataset) validate_example(ex, policy.config().context);

  const ParamMask mask = build_mask(policy, config.mask);
  TrainResult result{policy, {}};
  ModelParams& model = result.policy;

  std::vector<ReferenceLogprobs> ref;
  ref.reserve(dataset.size());
  for (const auto& ex : dataset) ref.push_back(reference_logprobs(reference, ex));

  Updater updater(config, model, mask);
  GradientSet grads(model);
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(dataset.size());
  const auto batch = static_cast<std::size_t>(config.batch_size);
  std::size_t step = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (config.shuffle) std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      const double inv = 1.0 / static_cast<double>(end - start);
      grads.zero();
      StepRecord rec;
      rec.step = step;
      rec.epoch = epoch;
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        const auto b = combined_loss_grad(model, ref[i], dataset[i], config.beta,
                                          config.dpo_weight, inv, grads);
        rec.dpo_loss += inv * b.dpo;
        rec.sft_loss += inv * b.sft;
        rec.combined_loss += inv * b.combined;
        rec.margin += inv * b.margin;
      }
      if (!std::isfinite(rec.combined_loss) || !std::isfinite(rec.margin)) {
        abort_non_finite(rec, "loss");
      }
      if (!grads.all_finite()) abort_non_finite(rec, "gradient");
      updater.apply(model, grads);
      result.report.steps.push_back(rec);
      ++step;
    }
  }

  if (!heldout.empty()) {
    result.report.heldout = evaluate_preferences(model, reference, heldout, config.beta);
  }
  return result;
}

PreferenceEval evaluate_preferences(const ModelParams& policy, const ModelParams& reference,
                                    std::span<const PreferenceExample> examples, double beta) {
  if (examples.empty()) throw ValidationError("no examples to evaluate");
  PreferenceEval ev;
  std::size_t wins = 0;
  for (const auto& ex : examples) {
    const double m = implicit_reward_margin(policy, reference, ex, beta);
    if (m > 0.0) ++wins;
    ev.mean_margin += m;
  }
  ev.accuracy = static_cast<double>(wins) / static_cast<double>(examples.size());
  ev.mean_margin /= static_cast<double>(examples.size());
  return ev;
}

nlohmann::json step_to_json(const StepRecord& r) {
  return {{"step", r.step},       {"epoch", r.epoch},
          {"dpo_loss", r.dpo_loss}, {"sft_loss", r.sft_loss},
          {"combined_loss", r.combined_loss}, {"margin", r.margin}};
}

std::vector<nlohmann::json> report_to_jsonl(const TrainReport& report) {
  std::vector<nlohmann::json> lines;
  lines.reserve(report.steps.size() + 1);
  for (const auto& r : report.steps) lines.push_back(step_to_json(r));
  if (report.heldout) {
    lines.push_back({{"heldout",
                      {{"accuracy", report.heldout->accuracy},
                       {"mean_margin", report.heldout->mean_margin}}}});
  }
  return lines;
}

}  // namespace speechalign::align
