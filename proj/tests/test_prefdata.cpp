#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <random>

#include "speechalign/common/error.hpp"
#include "speechalign/prefdata/rollouts.hpp"
#include "speechalign/prefdata/select.hpp"
#include "support/oracles.hpp"

using namespace speechalign;
using namespace speechalign::prefdata;

namespace {

const std::filesystem::path kData = std::filesystem::path(SPEECHALIGN_TEST_DATA) / "prefdata";

RolloutGroup group(std::string id, std::vector<double> scores) {
  RolloutGroup g{id, "instruction " + id, {}};
  for (std::size_t i = 0; i < scores.size(); ++i) g.rollouts.push_back({id, "r" + std::to_string(i), scores[i]});
  return g;
}

std::vector<double> scores_of(const RolloutGroup& g) {
  std::vector<double> s;
  for (const auto& r : g.rollouts) s.push_back(r.score);
  return s;
}

std::vector<RolloutGroup> random_groups(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> size(1, 8);
  std::uniform_int_distribution<int> score(0, 100);
  std::uniform_int_distribution<int> coin(0, 3);
  std::vector<RolloutGroup> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> s(size(rng));
    for (auto& v : s) v = score(rng);
    // Plant boundary cases: the top score at the threshold and a rejected
    // score sitting exactly on the margin.
    if (coin(rng) == 0) {
      s[0] = 90;
      if (s.size() > 1) s[1] = 60;
    }
    if (coin(rng) == 0 && s.size() > 2) s[2] = s[0];
    out.push_back(group("g" + std::to_string(i), s));
  }
  return out;
}

// Maps library output back to (chosen, rejected) rollout indices per group.
std::vector<oracle::Pair> pairs_for(const RolloutGroup& g, const std::vector<CuratedPair>& pairs) {
  std::vector<oracle::Pair> out;
  auto index = [&](const RolloutRecord& r) {
    return static_cast<std::size_t>(std::stoul(r.text.substr(1)));
  };
  for (const auto& p : pairs) {
    if (p.instruction_id == g.instruction_id) out.push_back({index(p.chosen), index(p.rejected)});
  }
  return out;
}

class MapScorer : public judge::SuitabilityScorer {
 public:
  explicit MapScorer(std::map<std::string, int> scores, std::string fail_on = {})
      : scores_(std::move(scores)), fail_on_(std::move(fail_on)) {}
  judge::SuitabilityScore score(std::string_view, std::string_view candidate) override {
    judge::SuitabilityScore s;
    s.attempts = 1;
    if (candidate == fail_on_) {
      s.error = "scripted failure";
      s.attempts = 3;
      return s;
    }
    auto it = scores_.find(std::string(candidate));
    s.score = it == scores_.end() ? 50 : it->second;
    return s;
  }

 private:
  std::map<std::string, int> scores_;
  std::string fail_on_;
};

}  // namespace

TEST_SUITE("select_pairs") {
  TEST_CASE("worked examples") {
    FilterConfig cfg;
    std::vector<RolloutGroup> gs{group("a", {95, 60, 70}), group("b", {89, 50}), group("c", {90, 60})};
    auto sel = select_pairs_detailed(gs, cfg);
    REQUIRE(sel.pairs.size() == 1);
    CHECK(sel.pairs[0].instruction_id == "a");
    CHECK(sel.pairs[0].chosen.score == 95);
    CHECK(sel.pairs[0].rejected.score == 60);
    CHECK(sel.outcomes == std::vector<GroupOutcome>{GroupOutcome::kPaired, GroupOutcome::kMaxBelowThreshold,
                                                    GroupOutcome::kNoQualifyingRejected});
    auto h = sel.outcome_histogram();
    CHECK(h["paired"] == 1);
    CHECK(h["max_below_threshold"] == 1);
    CHECK(h["no_qualifying_rejected"] == 1);
  }

  TEST_CASE("ties go to the first rollout in input order") {
    auto sel = select_pairs(std::vector<RolloutGroup>{group("t", {40, 95, 10, 95, 10})}, FilterConfig{});
    REQUIRE(sel.size() == 1);
    CHECK(sel[0].chosen.text == "r1");
    CHECK(sel[0].rejected.text == "r2");
  }

  TEST_CASE("matches the brute-force oracle on 1000 random groups") {
    std::mt19937_64 rng(2024);
    auto gs = random_groups(rng, 1000);
    for (bool all : {false, true}) {
      for (auto [mn, f] : std::vector<std::pair<double, double>>{{90, 1.5}, {50, 1.2}, {0, 3.0}, {100, 1.01}}) {
        FilterConfig cfg{mn, f, all};
        auto pairs = select_pairs(gs, cfg);
        std::size_t total = 0;
        for (const auto& g : gs) {
          auto want = oracle::filter_group(scores_of(g), mn, f, all);
          auto got = pairs_for(g, pairs);
          total += want.size();
          REQUIRE(got.size() == want.size());
          for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].chosen == want[i].chosen);
            CHECK(got[i].rejected == want[i].rejected);
          }
        }
        CHECK(pairs.size() == total);
      }
    }
  }

  TEST_CASE("output is order-stable and every pair satisfies both inequalities") {
    std::mt19937_64 rng(5);
    auto gs = random_groups(rng, 300);
    FilterConfig cfg;
    auto a = select_pairs(gs, cfg);
    auto b = select_pairs(gs, cfg);
    REQUIRE(a.size() == b.size());
    std::size_t last = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].instruction_id == b[i].instruction_id);
      CHECK(a[i].rejected.text == b[i].rejected.text);
      CHECK(a[i].chosen.score >= cfg.min_max_score);
      CHECK(a[i].rejected.score * cfg.margin_factor < a[i].chosen.score);
      CHECK_NOTHROW(validate_pair(a[i], cfg));
      const auto pos = static_cast<std::size_t>(std::stoul(a[i].instruction_id.substr(1)));
      CHECK(pos >= last);
      last = pos;
    }
  }

  TEST_CASE("tightening either threshold never adds pairs") {
    std::mt19937_64 rng(77);
    auto gs = random_groups(rng, 400);
    for (bool all : {false, true}) {
      std::size_t prev = SIZE_MAX;
      for (double mn = 0; mn <= 100; mn += 5) {
        const auto n = select_pairs(gs, FilterConfig{mn, 1.5, all}).size();
        CHECK(n <= prev);
        prev = n;
      }
      prev = SIZE_MAX;
      for (double f = 1.01; f < 6; f += 0.25) {
        const auto n = select_pairs(gs, FilterConfig{50, f, all}).size();
        CHECK(n <= prev);
        prev = n;
      }
    }
  }

  TEST_CASE("all-rejected mode emits one pair per qualifying rollout, lowest first") {
    auto pairs = select_pairs(std::vector<RolloutGroup>{group("m", {95, 60, 10, 30, 70, 10})}, FilterConfig{90, 1.5, true});
    REQUIRE(pairs.size() == 4);
    CHECK(pairs[0].rejected.text == "r2");
    CHECK(pairs[1].rejected.text == "r5");
    CHECK(pairs[2].rejected.text == "r3");
    CHECK(pairs[3].rejected.text == "r1");
  }

  TEST_CASE("invalid inputs") {
    CHECK_THROWS_AS(select_pairs(std::vector<RolloutGroup>{group("e", {})}, FilterConfig{}), ValidationError);
    CHECK_THROWS_AS(select_pairs(std::vector<RolloutGroup>{group("s", {101, 3})}, FilterConfig{}), ValidationError);
    CHECK_THROWS_AS(select_pairs(std::vector<RolloutGroup>{group("s", {-1})}, FilterConfig{}), ValidationError);
    CHECK_THROWS_AS(select_pairs(std::vector<RolloutGroup>{group("s", {95})}, FilterConfig{90, 1.0}),
                    ValidationError);
    CHECK_THROWS_AS(select_pairs(std::vector<RolloutGroup>{group("s", {95})}, FilterConfig{120, 1.5}),
                    ValidationError);
    CuratedPair bad{"x", "", {"x", "a", 95}, {"x", "b", 70}};
    CHECK_THROWS_AS(validate_pair(bad, FilterConfig{}), ValidationError);
  }

  TEST_CASE("pairs convert to preference records") {
    auto pairs = select_pairs(std::vector<RolloutGroup>{group("a", {95, 60})}, FilterConfig{});
    auto pref = to_preference(pairs.at(0));
    CHECK(pref.id == "a");
    CHECK(pref.prompt == "instruction a");
    CHECK(pref.chosen == "r0");
    CHECK(pref.rejected == "r1");
  }
}

TEST_SUITE("rollouts") {
  TEST_CASE("reading the scored fixture") {
    auto drafts = read_rollouts(kData / "rollouts_scored.jsonl");
    REQUIRE(drafts.size() == 4);
    CHECK(fully_scored(drafts));
    auto groups = to_scored(drafts);
    auto sel = select_pairs_detailed(groups, FilterConfig{});
    REQUIRE(sel.pairs.size() == 2);
    CHECK(sel.pairs[0].instruction_id == "q1");
    CHECK(sel.pairs[0].rejected.text == "**晴れ**です");
    CHECK(sel.pairs[1].instruction_id == "q4");
    CHECK(sel.pairs[1].rejected.text == "1. 一\n2. 二");
  }

  TEST_CASE("unscored fixture needs a scorer") {
    auto drafts = read_rollouts(kData / "rollouts_unscored.jsonl");
    CHECK_FALSE(fully_scored(drafts));
    CHECK_THROWS_AS(to_scored(drafts), ValidationError);
  }

  TEST_CASE("a constant scorer leads to every instruction being discarded") {
    auto drafts = read_rollouts(kData / "rollouts_unscored.jsonl");
    MapScorer scorer({});
    auto res = score_rollouts(drafts, scorer, 2);
    CHECK(res.failures.empty());
    for (const auto& g : res.groups) {
      for (const auto& r : g.rollouts) CHECK(r.score == 50);
    }
    auto sel = select_pairs_detailed(res.groups, FilterConfig{});
    CHECK(sel.pairs.empty());
    CHECK(sel.outcome_histogram()["max_below_threshold"] == 2);
  }

  TEST_CASE("fixture map scores land on the right rollouts") {
    auto drafts = read_rollouts(kData / "rollouts_unscored.jsonl");
    std::map<std::string, int> m{{"今日の東京は晴れです。", 97}, {"**晴れ**です", 20}, {"こんにちは。", 92},
                                 {"- こんにちは", 15}, {"こんにちは！", 61}};
    MapScorer scorer(m);
    auto res = score_rollouts(drafts, scorer, 3);
    REQUIRE(res.groups.size() == 2);
    for (const auto& g : res.groups) {
      for (const auto& r : g.rollouts) CHECK(r.score == m.at(r.text));
    }
    CHECK(res.groups[1].rollouts[2].text == "こんにちは！");
    auto pairs = select_pairs(res.groups, FilterConfig{});
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[1].rejected.text == "- こんにちは");
  }

  TEST_CASE("a failing rollout is dropped and reported, the rest are scored") {
    auto drafts = read_rollouts(kData / "rollouts_unscored.jsonl");
    MapScorer scorer({{"今日の東京は晴れです。", 97}}, "- こんにちは");
    auto res = score_rollouts(drafts, scorer, 4);
    REQUIRE(res.failures.size() == 1);
    CHECK(res.failures[0].instruction_id == "u2");
    CHECK(res.failures[0].rollout_index == 1);
    CHECK(res.groups[1].rollouts.size() == 2);
    CHECK(res.groups[0].rollouts.size() == 2);
  }

  TEST_CASE("pre-scored rollouts are not sent to the scorer") {
    std::vector<DraftGroup> drafts{{"p", "q", {{"a", 91.0}, {"b", std::nullopt}}}};
    MapScorer scorer({{"a", 5}, {"b", 7}});
    auto res = score_rollouts(drafts, scorer);
    CHECK(res.groups[0].rollouts[0].score == 91.0);
    CHECK(res.groups[0].rollouts[1].score == 7.0);
  }

  TEST_CASE("malformed rollout files") {
    auto dir = std::filesystem::temp_directory_path() / "speechalign_prefdata_test";
    std::filesystem::create_directories(dir);
    auto expect_bad = [&](const std::string& body) {
      std::ofstream(dir / "r.jsonl") << body;
      CHECK_THROWS_AS(read_rollouts(dir / "r.jsonl"), ValidationError);
    };
    expect_bad("{\"instruction_id\":\"a\",\"instruction\":\"i\",\"rollouts\":[]}\n");
    expect_bad("{\"instruction_id\":\"a\",\"instruction\":\"i\",\"rollouts\":[{\"text\":\"\"}]}\n");
    expect_bad("{\"instruction_id\":\"a\",\"instruction\":\"i\",\"rollouts\":[{\"text\":\"t\",\"score\":140}]}\n");
    expect_bad("{\"instruction\":\"i\"}\n");
    expect_bad("[1, 2\n");
    CHECK_THROWS_AS(read_rollouts(dir / "absent.jsonl"), ValidationError);
    std::filesystem::remove_all(dir);
  }
}
