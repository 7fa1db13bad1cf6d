#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <random>

#include "speechalign/common/error.hpp"
#include "speechalign/tinylm/checkpoint.hpp"
#include "speechalign/tinylm/model.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

using namespace speechalign;
using namespace speechalign::tinylm;

namespace {

ModelConfig small_config(int layers = 2, int vocab = 16) {
  ModelConfig c;
  c.n_layers = layers;
  c.d_model = 16;
  c.n_heads = 2;
  c.context = 16;
  c.vocab_size = vocab;
  return c;
}

TokenSequence prompt_of(std::vector<TokenId> ids) { return {std::move(ids), SequenceRole::kPrompt}; }
TokenSequence response_of(std::vector<TokenId> ids) { return {std::move(ids), SequenceRole::kResponse}; }

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("speechalign_tinylm_" + name);
}

}  // namespace

TEST_SUITE("vocab") {
  TEST_CASE("from_corpus puts specials first then sorted code points") {
    std::vector<std::string> corpus{"ba", "あa"};
    Vocab v = Vocab::from_corpus(corpus);
    CHECK(v.size() == 7);
    CHECK(v.pad() == 0);
    CHECK(v.bos() == 1);
    CHECK(v.eos() == 2);
    CHECK(v.unk() == 3);
    CHECK(v.token(4) == "a");
    CHECK(v.token(5) == "b");
    CHECK(v.token(6) == "あ");
  }

  TEST_CASE("constructor enforces invariants") {
    CHECK_THROWS_AS(Vocab({"<pad>", "<bos>", "<eos>"}), ValidationError);
    CHECK_THROWS_AS(Vocab({"<pad>", "<bos>", "a", "b"}), ValidationError);
    CHECK_THROWS_AS(Vocab({"<pad>", "<bos>", "<eos>", "a", "a"}), ValidationError);
    CHECK_THROWS_AS(Vocab({"<pad>", "<bos>", "<eos>", ""}), ValidationError);
    Vocab ok({"<eos>", "x", "<pad>", "<bos>"});
    CHECK(ok.eos() == 0);
    CHECK_FALSE(ok.unk().has_value());
  }

  TEST_CASE("encode and decode") {
    std::vector<std::string> corpus{"こんにちは"};
    Vocab v = Vocab::from_corpus(corpus);
    auto ids = v.encode("こんにちは");
    CHECK(ids.size() == 5);
    CHECK(v.decode(ids) == "こんにちは");
    auto unk = v.encode("こx");
    CHECK(unk[1] == *v.unk());
    std::vector<TokenId> with_specials{v.bos(), ids[0], v.eos(), v.pad()};
    CHECK(v.decode(with_specials) == "こ");

    Vocab strict({"<pad>", "<bos>", "<eos>", "a"});
    CHECK_THROWS_AS(strict.encode("ab"), ValidationError);
    CHECK_THROWS_AS(v.encode("\xff"), ValidationError);
  }

  TEST_CASE("save and load round trip with escaped characters") {
    std::vector<std::string> corpus{"a\nb\t\\c"};
    Vocab v = Vocab::from_corpus(corpus);
    auto path = temp_path("vocab.txt");
    v.save(path);
    Vocab back = Vocab::load(path);
    CHECK(back.tokens() == v.tokens());
    std::filesystem::remove(path);
  }

  TEST_CASE("prompt and response sequences") {
    std::vector<std::string> corpus{"ab"};
    Vocab v = Vocab::from_corpus(corpus);
    auto p = make_prompt(v, "ab");
    auto r = make_response(v, "ba");
    CHECK(p.role == SequenceRole::kPrompt);
    CHECK(p.ids.front() == v.bos());
    CHECK(p.ids.size() == 3);
    CHECK(r.ids.back() == v.eos());
    CHECK(r.ids.size() == 3);
  }
}

TEST_SUITE("params") {
  TEST_CASE("initialization follows the stated scheme") {
    auto p = ModelParams::init(ModelConfig{2, 64, 4, 128, 40, 0}, 42);
    double sum2 = 0;
    std::size_t n = 0;
    for (const auto& t : p.tensors()) {
      const bool is_gain = t.name.ends_with("gain");
      const bool is_bias = t.name.ends_with("bias") || t.name.ends_with(".bq") || t.name.ends_with(".bk") ||
                           t.name.ends_with(".bv") || t.name.ends_with(".bo") || t.name.ends_with(".b1") ||
                           t.name.ends_with(".b2");
      for (double v : t.data) {
        if (is_gain) {
          CHECK(v == 1.0);
        } else if (is_bias) {
          CHECK(v == 0.0);
        } else {
          sum2 += v * v;
          ++n;
        }
      }
    }
    CHECK(std::sqrt(sum2 / static_cast<double>(n)) == doctest::Approx(0.02).epsilon(0.02));
  }

  TEST_CASE("every tensor has one group tag and a layer index") {
    auto p = ModelParams::init(small_config(3), 1);
    for (const auto& t : p.tensors()) {
      if (t.group == ParamGroup::kEmbedding || t.group == ParamGroup::kLmHead) {
        CHECK(t.layer == -1);
      } else {
        CHECK(t.layer >= 0);
        CHECK(t.layer < 3);
        CHECK(t.name.starts_with("layers." + std::to_string(t.layer) + "."));
      }
    }
    CHECK(p.tensors().size() == 2 + 3 * kLayerSlots + kHeadSlots);
    CHECK(parse_group(to_string(ParamGroup::kAttentionKey)) == ParamGroup::kAttentionKey);
    CHECK_THROWS_AS(parse_group("attention.bogus"), ValidationError);
  }

  TEST_CASE("same seed gives identical parameters, different seed does not") {
    auto a = ModelParams::init(small_config(), 9);
    auto b = ModelParams::init(small_config(), 9);
    auto c = ModelParams::init(small_config(), 10);
    CHECK(a == b);
    CHECK_FALSE(a == c);
  }

  TEST_CASE("validate rejects non-finite values and config errors") {
    auto p = ModelParams::init(small_config(), 1);
    p.layer(0, kWq).data[3] = std::nan("");
    CHECK_THROWS_AS(p.validate(), ValidationError);
    ModelConfig bad = small_config();
    bad.n_heads = 3;
    CHECK_THROWS_AS(ModelParams::init(bad, 1), ValidationError);
    CHECK_THROWS_AS(ModelParams::init(small_config(2, 3), 1), ValidationError);
  }

  TEST_CASE("gradient set mirrors parameter keys") {
    auto p = ModelParams::init(small_config(), 1);
    GradientSet g(p);
    CHECK(g.keys_match(p));
    CHECK(g.tensors().size() == p.tensors().size());
    for (const auto& t : g.tensors()) {
      for (double v : t.data) CHECK(v == 0.0);
    }
    CHECK_FALSE(g.keys_match(ModelParams::init(small_config(1), 1)));
  }
}

TEST_SUITE("forward") {
  TEST_CASE("zero parameters give uniform, position-independent logits") {
    auto p = ModelParams::zeros(small_config());
    auto logits = forward_logits(p, std::vector<TokenId>{1, 4, 5, 6});
    for (std::size_t t = 0; t < logits.rows; ++t) {
      for (std::size_t v = 0; v < logits.cols; ++v) CHECK(logits(t, v) == logits(0, 0));
    }
  }

  TEST_CASE("forward is deterministic") {
    auto p = ModelParams::init(small_config(), 7, 0.3);
    std::vector<TokenId> ids{1, 2, 3, 4, 5};
    CHECK(forward_logits(p, ids).data == forward_logits(p, ids).data);
  }

  TEST_CASE("forward matches the straight-line oracle") {
    auto p = ModelParams::init(small_config(), 5, 0.3);
    std::vector<TokenId> ids{1, 7, 3, 3, 12, 15, 0, 9};
    auto got = forward_logits(p, ids);
    auto want = oracle::forward_logits(p, {ids.begin(), ids.end()});
    REQUIRE(got.rows == 8);
    for (std::size_t t = 0; t < 8; ++t) {
      for (std::size_t v = 0; v < 16; ++v) CHECK(std::abs(got(t, v) - want[t][v]) <= 1e-6);
    }
  }

  TEST_CASE("input validation") {
    auto p = ModelParams::init(small_config(), 5);
    CHECK_THROWS_AS(forward_logits(p, std::vector<TokenId>(17, 1)), ValidationError);
    CHECK_THROWS_AS(forward_logits(p, std::vector<TokenId>{1, 16}), ValidationError);
    CHECK_THROWS_AS(forward_logits(p, std::vector<TokenId>{-1}), ValidationError);
    CHECK_THROWS_AS(forward_logits(p, std::vector<TokenId>{}), ValidationError);
  }
}

TEST_SUITE("sequence_logprob") {
  TEST_CASE("uniform model scores -L ln V") {
    auto p = ModelParams::zeros(small_config());
    for (std::size_t L : {1u, 3u, 7u}) {
      std::vector<TokenId> resp(L, 5);
      CHECK(sequence_logprob(p, prompt_of({1, 4}), response_of(resp)) ==
            doctest::Approx(-static_cast<double>(L) * std::log(16.0)).epsilon(1e-14));
    }
  }

  TEST_CASE("single response token equals the log-softmax of the last prompt row") {
    auto p = ModelParams::init(small_config(), 3, 0.3);
    std::vector<TokenId> prompt{1, 6, 8};
    auto logits = forward_logits(p, prompt);
    auto row = logits.row(2);
    double z = 0;
    for (double v : row) z += std::exp(v);
    CHECK(sequence_logprob(p, prompt_of(prompt), response_of({11})) ==
          doctest::Approx(row[11] - std::log(z)).epsilon(1e-12));
  }

  TEST_CASE("three-token response matches per-position softmax oracle") {
    auto p = ModelParams::init(small_config(), 4, 0.3);
    std::vector<int> prompt{1, 9, 2, 14};
    std::vector<int> resp{3, 7, 2};
    const double got = sequence_logprob(p, prompt_of({prompt.begin(), prompt.end()}),
                                        response_of({resp.begin(), resp.end()}));
    CHECK(got == doctest::Approx(oracle::sequence_logprob(p, prompt, resp)).epsilon(1e-10));
    CHECK(got <= 0.0);
  }

  TEST_CASE("padding after end-of-sequence does not change the score") {
    auto p = ModelParams::init(small_config(), 4, 0.3);
    SequenceScoring sc{2, 0};
    const double a = sequence_logprob(p, prompt_of({1, 5}), response_of({6, 7, 2}), sc);
    const double b = sequence_logprob(p, prompt_of({1, 5}), response_of({6, 7, 2, 0, 0, 0}), sc);
    CHECK(a == b);
    CHECK_THROWS_AS(sequence_logprob(p, prompt_of({1, 5}), response_of({6, 2, 7}), sc), ValidationError);
  }

  TEST_CASE("probabilities of all single-token responses sum to one") {
    auto p = ModelParams::init(small_config(2, 32), 8, 0.5);
    double total = 0;
    for (TokenId v = 0; v < 32; ++v) total += std::exp(sequence_logprob(p, prompt_of({1, 3, 4}), response_of({v})));
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("context overflow and empty inputs are rejected") {
    auto p = ModelParams::init(small_config(), 4);
    CHECK_THROWS_AS(sequence_logprob(p, prompt_of(std::vector<TokenId>(10, 1)),
                                     response_of(std::vector<TokenId>(7, 2))),
                    ValidationError);
    CHECK_NOTHROW(sequence_logprob(p, prompt_of(std::vector<TokenId>(10, 1)), response_of(std::vector<TokenId>(6, 2))));
    CHECK_THROWS_AS(sequence_logprob(p, prompt_of({}), response_of({2})), ValidationError);
    CHECK_THROWS_AS(sequence_logprob(p, prompt_of({1}), response_of({})), ValidationError);
  }
}

TEST_SUITE("backward") {
  TEST_CASE("every parameter matches central finite differences") {
    auto p = ModelParams::init(small_config(), 21, 0.2);
    auto prompt = prompt_of({1, 4, 9, 3});
    auto resp = response_of({5, 12, 7, 2});
    GradientSet g(p);
    sequence_logprob_grad(p, prompt, resp, -1.0, g);
    auto loss = [&](const ModelParams& m) { return -sequence_logprob(m, prompt, resp); };
    auto r = gradcheck::check(p, loss, g, [](const Tensor&) { return true; });
    CHECK(r.checked == p.parameter_count());
    CHECK_MESSAGE(r.failed == 0, "worst " << r.worst_name << " rel " << r.worst_rel);
  }

  TEST_CASE("tensors the loss does not touch get exactly zero gradient") {
    auto p = ModelParams::init(small_config(), 2, 0.3);
    GradientSet g(p);
    sequence_logprob_grad(p, prompt_of({1, 4}), response_of({5, 2}), 1.0, g);
    const auto& pos = g.as_params().position_embedding();
    for (std::size_t r = 3; r < pos.rows; ++r) {
      for (double v : pos.row(r)) CHECK(v == 0.0);
    }
    const auto& tok = g.as_params().token_embedding();
    for (TokenId unused : {0, 3, 6, 15}) {
      for (double v : tok.row(static_cast<std::size_t>(unused))) CHECK(v == 0.0);
    }

    auto p0 = ModelParams::init(small_config(0), 2, 0.3);
    GradientSet g0(p0);
    sequence_logprob_grad(p0, prompt_of({1}), response_of({5}), 1.0, g0);
    CHECK(g0.all_finite());
  }

  TEST_CASE("doubling the loss doubles every gradient exactly") {
    auto p = ModelParams::init(small_config(), 2, 0.3);
    GradientSet g1(p);
    GradientSet g2(p);
    sequence_logprob_grad(p, prompt_of({1, 4, 6}), response_of({5, 8, 2}), 1.0, g1);
    sequence_logprob_grad(p, prompt_of({1, 4, 6}), response_of({5, 8, 2}), 2.0, g2);
    for (std::size_t k = 0; k < g1.tensors().size(); ++k) {
      for (std::size_t i = 0; i < g1.tensors()[k].data.size(); ++i) {
        CHECK(g2.tensors()[k].data[i] == 2.0 * g1.tensors()[k].data[i]);
      }
    }
  }

  TEST_CASE("backward without a recorded pass is an error") {
    auto p = ModelParams::init(small_config(), 2);
    GradientSet g(p);
    ForwardTrace empty;
    CHECK_THROWS_AS(backward(p, empty, Matrix(1, 16), g), ValidationError);
  }
}

TEST_SUITE("decode") {
  TEST_CASE("max_len zero gives an empty response") {
    auto p = ModelParams::init(small_config(), 2);
    CHECK(greedy_decode(p, prompt_of({1, 3}), 0, 2).ids.empty());
  }

  TEST_CASE("a model that always prefers end-of-sequence stops after one token") {
    auto p = ModelParams::init(small_config(), 2);
    p.head(kLmBias).data[2] = 50.0;
    auto out = greedy_decode(p, prompt_of({1, 3}), 10, 2);
    CHECK(out.ids == std::vector<TokenId>{2});
    CHECK(out.role == SequenceRole::kResponse);
  }

  TEST_CASE("greedy decoding matches step-by-step argmax") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      auto p = ModelParams::init(small_config(), seed, 0.5);
      auto got = greedy_decode(p, prompt_of({1, 7}), 8, 2);
      auto want = oracle::greedy(p, {1, 7}, 8, 2);
      CHECK(std::vector<int>(got.ids.begin(), got.ids.end()) == want);
    }
  }

  TEST_CASE("ties go to the lowest token id") {
    auto p = ModelParams::zeros(small_config());
    auto out = greedy_decode(p, prompt_of({1}), 3, 2);
    CHECK(out.ids == std::vector<TokenId>{0, 0, 0});
  }

  TEST_CASE("decoding stops when the context is full") {
    auto p = ModelParams::zeros(small_config());
    auto out = greedy_decode(p, prompt_of(std::vector<TokenId>(14, 1)), 10, 2);
    CHECK(out.ids.size() == 2);
  }

  TEST_CASE("sampling is reproducible for a fixed seed") {
    auto p = ModelParams::init(small_config(), 2, 0.5);
    std::mt19937_64 a(5);
    std::mt19937_64 b(5);
    auto x = sample_decode(p, prompt_of({1}), 10, 2, 1.0, a);
    auto y = sample_decode(p, prompt_of({1}), 10, 2, 1.0, b);
    CHECK(x.ids == y.ids);
    CHECK_THROWS_AS(sample_decode(p, prompt_of({1}), 10, 2, 0.0, a), ValidationError);
  }
}

TEST_SUITE("checkpoint") {
  TEST_CASE("round trip is bit-exact and keeps the vocabulary") {
    std::vector<std::string> corpus{"abcdefghijkl"};
    Vocab v = Vocab::from_corpus(corpus);
    auto p = ModelParams::init(small_config(2, static_cast<int>(v.size())), 12, 0.3);
    auto path = temp_path("ckpt.json");
    save_checkpoint(path, p, &v);
    auto back = load_checkpoint(path);
    CHECK(back.params == p);
    REQUIRE(back.vocab.has_value());
    CHECK(back.vocab->tokens() == v.tokens());
    std::filesystem::remove(path);
  }

  TEST_CASE("malformed documents are rejected") {
    auto p = ModelParams::init(small_config(), 12);
    auto doc = checkpoint_to_json(p);
    CHECK(doc["format_version"] == kCheckpointFormatVersion);
    auto bad_version = doc;
    bad_version["format_version"] = 99;
    CHECK_THROWS_AS(checkpoint_from_json(bad_version), ValidationError);
    auto bad_shape = doc;
    bad_shape["tensors"][3]["data"].erase(0);
    CHECK_THROWS_AS(checkpoint_from_json(bad_shape), ValidationError);
    auto bad_tag = doc;
    bad_tag["tensors"][3]["group"] = "mlp.in";
    CHECK_THROWS_AS(checkpoint_from_json(bad_tag), ValidationError);
  }
}
