#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "speechalign/tinylm/params.hpp"
#include "speechalign/tinylm/vocab.hpp"

namespace speechalign::tinylm {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const double& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// Activations recorded by forward() and consumed by backward().
class ForwardTrace {
 public:
  bool empty() const { return ids_.empty(); }
  const Matrix& logits() const { return logits_; }
  std::span<const TokenId> ids() const { return ids_; }

 private:
  struct LayerNormCache {
    Matrix xhat;
    std::vector<double> rstd;
  };
  struct LayerCache {
    LayerNormCache ln1;
    Matrix h1, q, k, v;
    // probs[h][t * T + u], u <= t
    std::vector<std::vector<double>> probs;
    Matrix attn_out;
    LayerNormCache ln2;
    Matrix h2, pre_act, act;
  };

  std::vector<TokenId> ids_;
  std::vector<LayerCache> layers_;
  LayerNormCache final_ln_;
  Matrix final_h_;
  Matrix logits_;

  friend ForwardTrace forward(const ModelParams&, std::span<const TokenId>);
  friend void backward(const ModelParams&, const ForwardTrace&, const Matrix&, GradientSet&);
};

// Records every activation needed for backward(). Throws ValidationError when
// the input is empty, longer than the context, or holds an id outside the
// vocabulary.
ForwardTrace forward(const ModelParams& params, std::span<const TokenId> ids);

// One row of next-token logits per input position.
Matrix forward_logits(const ModelParams& params, std::span<const TokenId> ids);

// Accumulates d(loss)/d(params) into `grads`, where `logit_adjoint` holds
// d(loss)/d(logits) for the recorded pass. Throws if `trace` is empty.
void backward(const ModelParams& params, const ForwardTrace& trace, const Matrix& logit_adjoint,
              GradientSet& grads);

// Response ids with trailing padding after <eos> removed. Throws if any
// non-padding token follows <eos>.
std::vector<TokenId> effective_response(std::span<const TokenId> response, TokenId eos,
                                        TokenId pad);

struct SequenceScoring {
  TokenId eos = -1;
  TokenId pad = -1;
};

// sum_t log p(y_t | x, y_<t) over response tokens only; no length
// normalization. Prompt must contain at least one token.
double sequence_logprob(const ModelParams& params, const TokenSequence& prompt,
                        const TokenSequence& response, const SequenceScoring& scoring = {});

// A scored sequence whose backward pass can be run later with a scale that
// depends on other sequences' log-probabilities (as DPO needs).
struct SequenceTape {
  double logprob = 0.0;
  ForwardTrace trace;
  // d(logprob)/d(logits)
  Matrix adjoint;
};

SequenceTape record_sequence(const ModelParams& params, const TokenSequence& prompt,
                             const TokenSequence& response, const SequenceScoring& scoring = {});
// Accumulates scale * d(logprob)/d(params).
void backward_sequence(const ModelParams& params, const SequenceTape& tape, double scale,
                       GradientSet& grads);

// As sequence_logprob, and also accumulates scale * d(logprob)/d(params).
double sequence_logprob_grad(const ModelParams& params, const TokenSequence& prompt,
                             const TokenSequence& response, double scale, GradientSet& grads,
                             const SequenceScoring& scoring = {});

// Argmax decoding, lowest id wins ties. Stops after emitting `eos`, after
// max_len tokens, or when the context is full. The returned ids include the
// terminating <eos> if one was produced.
TokenSequence greedy_decode(const ModelParams& params, const TokenSequence& prompt,
                            std::size_t max_len, TokenId eos);

// Softmax sampling at `temperature` (> 0). Rollout plumbing only.
TokenSequence sample_decode(const ModelParams& params, const TokenSequence& prompt,
                            std::size_t max_len, TokenId eos, double temperature,
                            std::mt19937_64& rng);

}  // namespace speechalign::tinylm
