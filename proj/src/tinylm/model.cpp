#include "speechalign/tinylm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "speechalign/common/error.hpp"
#include "speechalign/kernels/kernels.hpp"

namespace speechalign::tinylm {

namespace {

constexpr double kLnEps = 1e-5;
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluA = 0.044715;

void check_ids(const ModelParams& params, std::span<const TokenId> ids) {
  const auto& c = params.config();
  if (ids.empty()) throw ValidationError("forward: empty input");
  if (ids.size() > static_cast<std::size_t>(c.context)) {
    throw ValidationError("sequence of length " + std::to_string(ids.size()) +
                          " exceeds context length " + std::to_string(c.context));
  }
  for (TokenId id : ids) {
    if (id < 0 || id >= c.vocab_size) {
      throw ValidationError("invalid token id " + std::to_string(id));
    }
  }
}

// out[t] = bias + in[t] * W
void linear_forward(const Matrix& in, const Tensor& w, const Tensor& b, Matrix& out) {
  const auto& k = kernels::active();
  out = Matrix(in.rows, w.cols);
  for (std::size_t t = 0; t < in.rows; ++t) {
    auto o = out.row(t);
    std::copy(b.data.begin(), b.data.end(), o.begin());
    for (std::size_t i = 0; i < in.cols; ++i) {
      k.axpy(in(t, i), w.row(i).data(), o.data(), o.size());
    }
  }
}

// Accumulates weight/bias gradients and, if `din` is non-null, input gradients.
void linear_backward(const Matrix& in, const Tensor& w, const Matrix& dout, Matrix* din,
                     Tensor& dw, Tensor& db) {
  const auto& k = kernels::active();
  for (std::size_t t = 0; t < in.rows; ++t) {
    const auto g = dout.row(t);
    k.axpy(1.0, g.data(), db.data.data(), g.size());
    for (std::size_t i = 0; i < in.cols; ++i) {
      if (din != nullptr) (*din)(t, i) += k.dot(g.data(), w.row(i).data(), g.size());
      k.axpy(in(t, i), g.data(), dw.row(i).data(), g.size());
    }
  }
}

void layernorm_forward(const Matrix& x, const Tensor& gain, const Tensor& bias, Matrix& xhat,
                       std::vector<double>& rstd, Matrix& out) {
  const std::size_t n = x.cols;
  xhat = Matrix(x.rows, n);
  out = Matrix(x.rows, n);
  rstd.assign(x.rows, 0.0);
  for (std::size_t t = 0; t < x.rows; ++t) {
    const auto r = x.row(t);
    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : r) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    const double rs = 1.0 / std::sqrt(var + kLnEps);
    rstd[t] = rs;
    for (std::size_t i = 0; i < n; ++i) {
      const double xh = (r[i] - mean) * rs;
      xhat(t, i) = xh;
      out(t, i) = gain.data[i] * xh + bias.data[i];
    }
  }
}

// dx += d(layernorm)/dx applied to dy.
void layernorm_backward(const Matrix& xhat, const std::vector<double>& rstd, const Tensor& gain,
                        const Matrix& dy, Matrix& dx, Tensor& dgain, Tensor& dbias) {
  const std::size_t n = xhat.cols;
  std::vector<double> dxhat(n);
  for (std::size_t t = 0; t < xhat.rows; ++t) {
    double m1 = 0.0;
    double m2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double g = dy(t, i);
      dgain.data[i] += g * xhat(t, i);
      dbias.data[i] += g;
      dxhat[i] = g * gain.data[i];
      m1 += dxhat[i];
      m2 += dxhat[i] * xhat(t, i);
    }
    m1 /= static_cast<double>(n);
    m2 /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      dx(t, i) += rstd[t] * (dxhat[i] - m1 - xhat(t, i) * m2);
    }
  }
}

double gelu(double u) { return 0.5 * u * (1.0 + std::tanh(kGeluC * (u + kGeluA * u * u * u))); }

double gelu_grad(double u) {
  const double th = std::tanh(kGeluC * (u + kGeluA * u * u * u));
  return 0.5 * (1.0 + th) + 0.5 * u * (1.0 - th * th) * kGeluC * (1.0 + 3.0 * kGeluA * u * u);
}

void add_into(Matrix& dst, const Matrix& src) {
  for (std::size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += src.data[i];
}

// Log-softmax of one logit row evaluated at `target`.
double log_softmax_at(std::span<const double> row, TokenId target) {
  const double m = *std::max_element(row.begin(), row.end());
  double s = 0.0;
  for (double v : row) s += std::exp(v - m);
  return row[static_cast<std::size_t>(target)] - m - std::log(s);
}

std::vector<TokenId> concat_for_scoring(const ModelParams& params, const TokenSequence& prompt,
                                        const std::vector<TokenId>& response) {
  if (prompt.ids.empty()) {
    throw ValidationError("prompt must hold at least one token (begin-of-sequence)");
  }
  if (response.empty()) throw ValidationError("response must be non-empty");
  const std::size_t total = prompt.ids.size() + response.size();
  if (total > static_cast<std::size_t>(params.config().context)) {
    throw ValidationError("prompt + response length " + std::to_string(total) +
                          " exceeds context length " +
                          std::to_string(params.config().context));
  }
  std::vector<TokenId> input(prompt.ids);
  // The final response token is only a target, never an input.
  input.insert(input.end(), response.begin(), response.end() - 1);
  return input;
}

}  // namespace

ForwardTrace forward(const ModelParams& params, std::span<const TokenId> ids) {
  check_ids(params, ids);
  const auto& c = params.config();
  const auto& kt = kernels::active();
  const std::size_t T = ids.size();
  const auto D = static_cast<std::size_t>(c.d_model);
  const auto H = static_cast<std::size_t>(c.n_heads);
  const auto dh = static_cast<std::size_t>(c.head_dim());
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  ForwardTrace tr;
  tr.ids_.assign(ids.begin(), ids.end());
  tr.layers_.resize(static_cast<std::size_t>(c.n_layers));

  Matrix x(T, D);
  for (std::size_t t = 0; t < T; ++t) {
    const auto te = params.token_embedding().row(static_cast<std::size_t>(ids[t]));
    const auto pe = params.position_embedding().row(t);
    for (std::size_t i = 0; i < D; ++i) x(t, i) = te[i] + pe[i];
  }

  for (int l = 0; l < c.n_layers; ++l) {
    auto& lc = tr.layers_[static_cast<std::size_t>(l)];
    layernorm_forward(x, params.layer(l, kLn1Gain), params.layer(l, kLn1Bias), lc.ln1.xhat,
                      lc.ln1.rstd, lc.h1);
    linear_forward(lc.h1, params.layer(l, kWq), params.layer(l, kBq), lc.q);
    linear_forward(lc.h1, params.layer(l, kWk), params.layer(l, kBk), lc.k);
    linear_forward(lc.h1, params.layer(l, kWv), params.layer(l, kBv), lc.v);

    lc.attn_out = Matrix(T, D);
    lc.probs.assign(H, std::vector<double>(T * T, 0.0));
    for (std::size_t h = 0; h < H; ++h) {
      const std::size_t off = h * dh;
      auto& P = lc.probs[h];
      for (std::size_t t = 0; t < T; ++t) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t u = 0; u <= t; ++u) {
          const double s = kt.dot(&lc.q(t, off), &lc.k(u, off), dh) * scale;
          P[t * T + u] = s;
          mx = std::max(mx, s);
        }
        double z = 0.0;
        for (std::size_t u = 0; u <= t; ++u) {
          P[t * T + u] = std::exp(P[t * T + u] - mx);
          z += P[t * T + u];
        }
        for (std::size_t u = 0; u <= t; ++u) {
          P[t * T + u] /= z;
          kt.axpy(P[t * T + u], &lc.v(u, off), &lc.attn_out(t, off), dh);
        }
      }
    }
    Matrix a;
    linear_forward(lc.attn_out, params.layer(l, kWo), params.layer(l, kBo), a);
    add_into(x, a);

    layernorm_forward(x, params.layer(l, kLn2Gain), params.layer(l, kLn2Bias), lc.ln2.xhat,
                      lc.ln2.rstd, lc.h2);
    linear_forward(lc.h2, params.layer(l, kW1), params.layer(l, kB1), lc.pre_act);
    lc.act = Matrix(lc.pre_act.rows, lc.pre_act.cols);
    for (std::size_t i = 0; i < lc.act.data.size(); ++i) lc.act.data[i] = gelu(lc.pre_act.data[i]);
    Matrix m;
    linear_forward(lc.act, params.layer(l, kW2), params.layer(l, kB2), m);
    add_into(x, m);
  }

  layernorm_forward(x, params.head(kNormGain), params.head(kNormBias), tr.final_ln_.xhat,
                    tr.final_ln_.rstd, tr.final_h_);
  linear_forward(tr.final_h_, params.head(kLmWeight), params.head(kLmBias), tr.logits_);
  return tr;
}

Matrix forward_logits(const ModelParams& params, std::span<const TokenId> ids) {
  return forward(params, ids).logits();
}

void backward(const ModelParams& params, const ForwardTrace& tr, const Matrix& dlogits,
              GradientSet& grads) {
  if (tr.empty()) throw ValidationError("backward: no recorded forward pass");
  if (!grads.keys_match(params)) throw ValidationError("backward: gradient set does not match params");
  const auto& c = params.config();
  const auto& kt = kernels::active();
  const std::size_t T = tr.ids_.size();
  if (dlogits.rows != T || dlogits.cols != static_cast<std::size_t>(c.vocab_size)) {
    throw ValidationError("backward: logit adjoint has the wrong shape");
  }
  const auto D = static_cast<std::size_t>(c.d_model);
  const auto H = static_cast<std::size_t>(c.n_heads);
  const auto dh = static_cast<std::size_t>(c.head_dim());
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  ModelParams& g = grads.as_params();

  Matrix dh_final(T, D);
  linear_backward(tr.final_h_, params.head(kLmWeight), dlogits, &dh_final, g.head(kLmWeight),
                  g.head(kLmBias));
  Matrix dx(T, D);
  layernorm_backward(tr.final_ln_.xhat, tr.final_ln_.rstd, params.head(kNormGain), dh_final, dx,
                     g.head(kNormGain), g.head(kNormBias));

  for (int l = c.n_layers - 1; l >= 0; --l) {
    const auto& lc = tr.layers_[static_cast<std::size_t>(l)];

    // MLP branch: x_out = x_mid + W2 gelu(W1 ln2(x_mid))
    Matrix dact(T, lc.act.cols);
    linear_backward(lc.act, params.layer(l, kW2), dx, &dact, g.layer(l, kW2), g.layer(l, kB2));
    for (std::size_t i = 0; i < dact.data.size(); ++i) dact.data[i] *= gelu_grad(lc.pre_act.data[i]);
    Matrix dh2(T, D);
    linear_backward(lc.h2, params.layer(l, kW1), dact, &dh2, g.layer(l, kW1), g.layer(l, kB1));
    layernorm_backward(lc.ln2.xhat, lc.ln2.rstd, params.layer(l, kLn2Gain), dh2, dx,
                       g.layer(l, kLn2Gain), g.layer(l, kLn2Bias));

    // Attention branch: x_mid = x_in + Wo attn(ln1(x_in))
    Matrix dattn(T, D);
    linear_backward(lc.attn_out, params.layer(l, kWo), dx, &dattn, g.layer(l, kWo),
                    g.layer(l, kBo));
    Matrix dq(T, D), dk(T, D), dv(T, D);
    std::vector<double> dp(T);
    for (std::size_t h = 0; h < H; ++h) {
      const std::size_t off = h * dh;
      const auto& P = lc.probs[h];
      for (std::size_t t = 0; t < T; ++t) {
        double sum = 0.0;
        for (std::size_t u = 0; u <= t; ++u) {
          dp[u] = kt.dot(&dattn(t, off), &lc.v(u, off), dh);
          kt.axpy(P[t * T + u], &dattn(t, off), &dv(u, off), dh);
          sum += P[t * T + u] * dp[u];
        }
        for (std::size_t u = 0; u <= t; ++u) {
          const double ds = P[t * T + u] * (dp[u] - sum) * scale;
          kt.axpy(ds, &lc.k(u, off), &dq(t, off), dh);
          kt.axpy(ds, &lc.q(t, off), &dk(u, off), dh);
        }
      }
    }
    Matrix dh1(T, D);
    linear_backward(lc.h1, params.layer(l, kWq), dq, &dh1, g.layer(l, kWq), g.layer(l, kBq));
    linear_backward(lc.h1, params.layer(l, kWk), dk, &dh1, g.layer(l, kWk), g.layer(l, kBk));
    linear_backward(lc.h1, params.layer(l, kWv), dv, &dh1, g.layer(l, kWv), g.layer(l, kBv));
    layernorm_backward(lc.ln1.xhat, lc.ln1.rstd, params.layer(l, kLn1Gain), dh1, dx,
                       g.layer(l, kLn1Gain), g.layer(l, kLn1Bias));
  }

  for (std::size_t t = 0; t < T; ++t) {
    const auto src = dx.row(t);
    kt.axpy(1.0, src.data(), g.token_embedding().row(static_cast<std::size_t>(tr.ids_[t])).data(),
            D);
    kt.axpy(1.0, src.data(), g.position_embedding().row(t).data(), D);
  }
}

std::vector<TokenId> effective_response(std::span<const TokenId> response, TokenId eos,
                                        TokenId pad) {
  std::vector<TokenId> out;
  std::size_t i = 0;
  for (; i < response.size(); ++i) {
    out.push_back(response[i]);
    if (eos >= 0 && response[i] == eos) {
      ++i;
      break;
    }
  }
  for (; i < response.size(); ++i) {
    if (response[i] != pad) throw ValidationError("non-padding token after end-of-sequence");
  }
  // Without an <eos>, trailing padding is still dropped.
  if (pad >= 0 && (out.empty() || out.back() != eos)) {
    while (!out.empty() && out.back() == pad) out.pop_back();
  }
  return out;
}

double sequence_logprob(const ModelParams& params, const TokenSequence& prompt,
                        const TokenSequence& response, const SequenceScoring& scoring) {
  const auto resp = effective_response(response.ids, scoring.eos, scoring.pad);
  const auto input = concat_for_scoring(params, prompt, resp);
  const Matrix logits = forward_logits(params, input);
  const std::size_t first = prompt.ids.size() - 1;
  double lp = 0.0;
  for (std::size_t j = 0; j < resp.size(); ++j) {
    lp += log_softmax_at(logits.row(first + j), resp[j]);
  }
  return lp;
}

SequenceTape record_sequence(const ModelParams& params, const TokenSequence& prompt,
                             const TokenSequence& response, const SequenceScoring& scoring) {
  const auto resp = effective_response(response.ids, scoring.eos, scoring.pad);
  const auto input = concat_for_scoring(params, prompt, resp);
  SequenceTape tape;
  tape.trace = forward(params, input);
  const Matrix& logits = tape.trace.logits();
  const std::size_t first = prompt.ids.size() - 1;
  tape.adjoint = Matrix(logits.rows, logits.cols);
  for (std::size_t j = 0; j < resp.size(); ++j) {
    const auto row = logits.row(first + j);
    const double m = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double v : row) z += std::exp(v - m);
    const double lse = m + std::log(z);
    const auto target = static_cast<std::size_t>(resp[j]);
    tape.logprob += row[target] - m - std::log(z);
    // d log p(target) / d logits = onehot - softmax
    auto a = tape.adjoint.row(first + j);
    for (std::size_t v = 0; v < row.size(); ++v) a[v] = -std::exp(row[v] - lse);
    a[target] += 1.0;
  }
  return tape;
}

void backward_sequence(const ModelParams& params, const SequenceTape& tape, double scale,
                       GradientSet& grads) {
  if (scale == 0.0) return;
  Matrix adj = tape.adjoint;
  for (double& v : adj.data) v *= scale;
  backward(params, tape.trace, adj, grads);
}

double sequence_logprob_grad(const ModelParams& params, const TokenSequence& prompt,
                             const TokenSequence& response, double scale, GradientSet& grads,
                             const SequenceScoring& scoring) {
  const SequenceTape tape = record_sequence(params, prompt, response, scoring);
  backward_sequence(params, tape, scale, grads);
  return tape.logprob;
}

namespace {

template <class Pick>
TokenSequence decode_loop(const ModelParams& params, const TokenSequence& prompt,
                          std::size_t max_len, TokenId eos, Pick&& pick) {
  if (prompt.ids.empty()) throw ValidationError("decode: prompt must be non-empty");
  const auto ctx = static_cast<std::size_t>(params.config().context);
  if (prompt.ids.size() > ctx) throw ValidationError("decode: prompt exceeds context length");
  TokenSequence out{{}, SequenceRole::kResponse};
  std::vector<TokenId> seq(prompt.ids);
  // Keeps prompt + response within the context so the result can be scored.
  while (out.ids.size() < max_len && seq.size() < ctx) {
    const Matrix logits = forward_logits(params, seq);
    const TokenId next = pick(logits.row(logits.rows - 1));
    out.ids.push_back(next);
    if (next == eos) break;
    seq.push_back(next);
  }
  return out;
}

}  // namespace

TokenSequence greedy_decode(const ModelParams& params, const TokenSequence& prompt,
                            std::size_t max_len, TokenId eos) {
  return decode_loop(params, prompt, max_len, eos, [](std::span<const double> row) {
    std::size_t best = 0;
    for (std::size_t v = 1; v < row.size(); ++v) {
      if (row[v] > row[best]) best = v;
    }
    return static_cast<TokenId>(best);
  });
}

TokenSequence sample_decode(const ModelParams& params, const TokenSequence& prompt,
                            std::size_t max_len, TokenId eos, double temperature,
                            std::mt19937_64& rng) {
  if (!(temperature > 0.0)) throw ValidationError("temperature must be positive");
  return decode_loop(params, prompt, max_len, eos, [&](std::span<const double> row) {
    const double m = *std::max_element(row.begin(), row.end());
    std::vector<double> w(row.size());
    for (std::size_t v = 0; v < row.size(); ++v) w[v] = std::exp((row[v] - m) / temperature);
    std::discrete_distribution<TokenId> dist(w.begin(), w.end());
    return dist(rng);
  });
}

}  // namespace speechalign::tinylm
