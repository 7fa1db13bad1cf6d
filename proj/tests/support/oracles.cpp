#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

namespace oracle {

using speechalign::tinylm::ModelParams;
using speechalign::tinylm::Tensor;

namespace {

const Tensor& T(const ModelParams& p, const std::string& name) { return p.find(name); }

double at(const Tensor& t, std::size_t r, std::size_t c) { return t.data[r * t.cols + c]; }

Rows linear(const Rows& x, const Tensor& w, const Tensor& b) {
  Rows y(x.size(), std::vector<double>(w.cols));
  for (std::size_t t = 0; t < x.size(); ++t) {
    for (std::size_t j = 0; j < w.cols; ++j) {
      double s = b.data[j];
      for (std::size_t i = 0; i < w.rows; ++i) s += x[t][i] * at(w, i, j);
      y[t][j] = s;
    }
  }
  return y;
}

Rows layer_norm(const Rows& x, const Tensor& g, const Tensor& b) {
  Rows y = x;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double n = static_cast<double>(x[t].size());
    double mean = 0;
    for (double v : x[t]) mean += v;
    mean /= n;
    double var = 0;
    for (double v : x[t]) var += (v - mean) * (v - mean);
    var /= n;
    for (std::size_t i = 0; i < x[t].size(); ++i) {
      y[t][i] = g.data[i] * (x[t][i] - mean) / std::sqrt(var + 1e-5) + b.data[i];
    }
  }
  return y;
}

double gelu(double u) {
  return 0.5 * u * (1 + std::tanh(std::sqrt(2 / M_PI) * (u + 0.044715 * u * u * u)));
}

}  // namespace

Rows forward_logits(const ModelParams& p, const std::vector<int>& ids) {
  const auto& c = p.config();
  const std::size_t D = c.d_model;
  const std::size_t H = c.n_heads;
  const std::size_t dh = D / H;
  Rows x(ids.size(), std::vector<double>(D));
  for (std::size_t t = 0; t < ids.size(); ++t) {
    for (std::size_t i = 0; i < D; ++i) {
      x[t][i] = at(T(p, "tok_emb"), ids[t], i) + at(T(p, "pos_emb"), t, i);
    }
  }
  for (int l = 0; l < c.n_layers; ++l) {
    const std::string pre = "layers." + std::to_string(l) + ".";
    Rows h = layer_norm(x, T(p, pre + "ln1.gain"), T(p, pre + "ln1.bias"));
    Rows q = linear(h, T(p, pre + "attn.wq"), T(p, pre + "attn.bq"));
    Rows k = linear(h, T(p, pre + "attn.wk"), T(p, pre + "attn.bk"));
    Rows v = linear(h, T(p, pre + "attn.wv"), T(p, pre + "attn.bv"));
    Rows att(ids.size(), std::vector<double>(D, 0.0));
    for (std::size_t head = 0; head < H; ++head) {
      for (std::size_t t = 0; t < ids.size(); ++t) {
        std::vector<double> w(t + 1);
        for (std::size_t u = 0; u <= t; ++u) {
          double s = 0;
          for (std::size_t i = 0; i < dh; ++i) s += q[t][head * dh + i] * k[u][head * dh + i];
          w[u] = std::exp(s / std::sqrt(static_cast<double>(dh)));
        }
        double z = 0;
        for (double e : w) z += e;
        for (std::size_t u = 0; u <= t; ++u) {
          for (std::size_t i = 0; i < dh; ++i) att[t][head * dh + i] += w[u] / z * v[u][head * dh + i];
        }
      }
    }
    Rows o = linear(att, T(p, pre + "attn.wo"), T(p, pre + "attn.bo"));
    for (std::size_t t = 0; t < x.size(); ++t) {
      for (std::size_t i = 0; i < D; ++i) x[t][i] += o[t][i];
    }
    Rows h2 = layer_norm(x, T(p, pre + "ln2.gain"), T(p, pre + "ln2.bias"));
    Rows f = linear(h2, T(p, pre + "mlp.w1"), T(p, pre + "mlp.b1"));
    for (auto& row : f) {
      for (double& u : row) u = gelu(u);
    }
    Rows m = linear(f, T(p, pre + "mlp.w2"), T(p, pre + "mlp.b2"));
    for (std::size_t t = 0; t < x.size(); ++t) {
      for (std::size_t i = 0; i < D; ++i) x[t][i] += m[t][i];
    }
  }
  Rows fin = layer_norm(x, T(p, "lm_head.norm.gain"), T(p, "lm_head.norm.bias"));
  return linear(fin, T(p, "lm_head.weight"), T(p, "lm_head.bias"));
}

double sequence_logprob(const ModelParams& p, const std::vector<int>& prompt,
                        const std::vector<int>& response) {
  std::vector<int> seq = prompt;
  seq.insert(seq.end(), response.begin(), response.end());
  seq.pop_back();
  Rows logits = forward_logits(p, seq);
  double total = 0;
  for (std::size_t j = 0; j < response.size(); ++j) {
    const auto& row = logits[prompt.size() - 1 + j];
    double z = 0;
    for (double v : row) z += std::exp(v);
    total += std::log(std::exp(row[response[j]]) / z);
  }
  return total;
}

std::vector<int> greedy(const ModelParams& p, std::vector<int> prompt, std::size_t max_len, int eos) {
  std::vector<int> out;
  while (out.size() < max_len && prompt.size() < static_cast<std::size_t>(p.config().context)) {
    Rows logits = forward_logits(p, prompt);
    const auto& last = logits.back();
    int best = 0;
    for (int v = 1; v < static_cast<int>(last.size()); ++v) {
      if (last[v] > last[best]) best = v;
    }
    out.push_back(best);
    if (best == eos) break;
    prompt.push_back(best);
  }
  return out;
}

std::vector<Pair> filter_group(const std::vector<double>& scores, double min_max, double factor,
                               bool all_rejected) {
  double mx = *std::max_element(scores.begin(), scores.end());
  if (mx < min_max) return {};
  std::size_t chosen = 0;
  while (scores[chosen] != mx) ++chosen;
  std::vector<Pair> cands;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (j != chosen && scores[j] * factor < scores[chosen]) cands.push_back({chosen, j});
  }
  std::sort(cands.begin(), cands.end(), [&](const Pair& a, const Pair& b) {
    if (scores[a.rejected] != scores[b.rejected]) return scores[a.rejected] < scores[b.rejected];
    return a.rejected < b.rejected;
  });
  if (!all_rejected && cands.size() > 1) cands.resize(1);
  return cands;
}

int tree_depth(const std::vector<int>& heads) {
  const int n = static_cast<int>(heads.size());
  std::function<int(int)> dfs = [&](int node) {
    int best = 0;
    for (int c = 1; c <= n; ++c) {
      if (heads[c - 1] == node) best = std::max(best, dfs(c));
    }
    return best + 1;
  };
  int root = 0;
  for (int i = 1; i <= n; ++i) {
    if (heads[i - 1] == 0) root = i;
  }
  return dfs(root);
}

std::u32string decode(const std::string& s) {
  std::u32string out;
  for (std::size_t i = 0; i < s.size();) {
    auto b = static_cast<unsigned char>(s[i]);
    int len = b < 0x80 ? 1 : b < 0xE0 ? 2 : b < 0xF0 ? 3 : 4;
    char32_t cp = len == 1 ? b : len == 2 ? (b & 0x1F) : len == 3 ? (b & 0x0F) : (b & 0x07);
    for (int k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    out.push_back(cp);
    i += len;
  }
  return out;
}

namespace {

const std::set<char32_t>& vocalizable_set() {
  static const std::set<char32_t> set = [] {
    std::set<char32_t> s;
    auto span = [&](char32_t a, char32_t b) {
      for (char32_t c = a; c <= b; ++c) s.insert(c);
    };
    span(U'0', U'9');
    span(U'A', U'Z');
    span(U'a', U'z');
    for (char32_t c : std::u32string(U".,!?'。、！？・「」『』ー々")) s.insert(c);
    span(U'ぁ', U'ゖ');
    span(U'ゝ', U'ゟ');
    span(U'ァ', U'ヿ');
    span(0x31F0, 0x31FF);
    span(0x3400, 0x4DBF);
    span(0x4E00, 0x9FFF);
    span(0xF900, 0xFAFF);
    span(U'０', U'９');
    span(U'Ａ', U'Ｚ');
    span(U'ａ', U'ｚ');
    span(0xFF66, 0xFF9F);
    return s;
  }();
  return set;
}

bool space(char32_t c) {
  static const std::u32string ws = U" \t\n\r\v\f\u00A0\u3000\uFEFF";
  return ws.find(c) != std::u32string::npos || (c >= 0x2000 && c <= 0x200B);
}

int script(char32_t c) {
  if (c >= U'ぁ' && c <= U'ゟ') return 1;
  if ((c >= U'ァ' && c <= U'ヺ') || c == U'ー' || (c >= 0x31F0 && c <= 0x31FF) ||
      (c >= 0xFF66 && c <= 0xFF9F)) {
    return 2;
  }
  if ((c >= 0x4E00 && c <= 0x9FFF) || (c >= 0x3400 && c <= 0x4DBF) || (c >= 0xF900 && c <= 0xFAFF) ||
      c == U'々') {
    return 3;
  }
  if ((c >= U'A' && c <= U'Z') || (c >= U'a' && c <= U'z') || (c >= U'Ａ' && c <= U'Ｚ') ||
      (c >= U'ａ' && c <= U'ｚ')) {
    return 4;
  }
  if ((c >= U'0' && c <= U'9') || (c >= U'０' && c <= U'９')) return 5;
  return 0;
}

}  // namespace

double nv_percent(const std::string& utf8) {
  int total = 0;
  int nv = 0;
  for (char32_t c : decode(utf8)) {
    if (space(c)) continue;
    ++total;
    if (!vocalizable_set().contains(c)) ++nv;
  }
  return total == 0 ? 0.0 : 100.0 * nv / total;
}

std::size_t word_count(const std::string& utf8, const std::vector<std::string>& lexicon) {
  std::vector<std::u32string> lex;
  for (const auto& e : lexicon) lex.push_back(decode(e));
  const std::u32string boundary = U"。！？!?";

  std::u32string text = decode(utf8);
  std::size_t total = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    if (space(text[i])) {
      ++i;
      continue;
    }
    if (boundary.find(text[i]) != std::u32string::npos) {
      ++total;
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && !space(text[j]) && boundary.find(text[j]) == std::u32string::npos) ++j;
    std::u32string span = text.substr(i, j - i);
    const std::size_t n = span.size();

    std::vector<std::size_t> match(n, 0);
    for (std::size_t a = 0; a < n; ++a) {
      for (const auto& e : lex) {
        if (e.size() <= n - a && span.compare(a, e.size(), e) == 0) match[a] = std::max(match[a], e.size());
      }
    }
    // count[a] = tokens needed for span[a..n) once a token starts at a.
    std::vector<std::size_t> count(n + 1, 0);
    for (std::size_t a = n; a-- > 0;) {
      std::size_t len = match[a];
      if (len == 0) {
        len = 1;
        if (script(span[a]) != 0) {
          while (a + len < n && script(span[a + len]) == script(span[a]) && match[a + len] == 0) ++len;
        }
      }
      count[a] = 1 + count[a + len];
    }
    total += count[0];
    i = j;
  }
  return total;
}

}  // namespace oracle
