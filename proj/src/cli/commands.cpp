#include <cstdio>
#include <cstdlib>
#include <memory>

#include "json.hpp"
#include "speechalign/align/toy_corpus.hpp"
#include "speechalign/align/toy_protocol.hpp"
#include "speechalign/align/train.hpp"
#include "speechalign/cli/cli.hpp"
#include "speechalign/common/error.hpp"
#include "speechalign/common/jsonl.hpp"
#include "speechalign/judge/endpoint.hpp"
#include "speechalign/judge/judge.hpp"
#include "speechalign/metrics/report.hpp"
#include "speechalign/prefdata/rollouts.hpp"
#include "speechalign/prefdata/select.hpp"
#include "speechalign/tinylm/checkpoint.hpp"

namespace speechalign::cli {

using nlohmann::json;

namespace {

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

align::Optimizer parse_optimizer(const std::string& s) {
  if (s == "sgd") return align::Optimizer::kSgd;
  if (s == "adam") return align::Optimizer::kAdam;
  throw ValidationError("unknown optimizer '" + s + "' (expected sgd or adam)");
}

double mean_nv(const std::vector<std::string>& texts) {
  if (texts.empty()) return 0.0;
  double s = 0.0;
  for (const auto& t : texts) s += metrics::nv_percent(t);
  return s / static_cast<double>(texts.size());
}

void save_with_meta(const std::string& path, const tinylm::ModelParams& params,
                    const tinylm::Vocab& vocab, const json& meta) {
  json doc = tinylm::checkpoint_to_json(params, &vocab);
  doc["_meta"] = meta["_meta"];
  write_text_file(path, doc.dump() + "\n");
}

judge::EndpointConfig endpoint_config(const EndpointOptions& o) {
  if (o.url.empty()) throw ValidationError("--endpoint is required");
  if (o.model.empty()) throw ValidationError("--model is required");
  if (o.retries < 1) throw ValidationError("--retries must be at least 1");
  if (o.concurrency < 1) throw ValidationError("--concurrency must be at least 1");
  judge::EndpointConfig cfg;
  cfg.url = o.url;
  cfg.model = o.model;
  cfg.timeout_seconds = o.timeout_seconds;
  if (!o.api_key_env.empty()) {
    if (const char* key = std::getenv(o.api_key_env.c_str())) cfg.api_key = key;
  }
  return cfg;
}

json endpoint_json(const EndpointOptions& o) {
  // The API key never enters metadata.
  return {{"url", o.url},
          {"model", o.model},
          {"timeout_seconds", o.timeout_seconds},
          {"retries", o.retries},
          {"concurrency", o.concurrency}};
}

}  // namespace

std::string default_lexicon_path() {
  return std::string(SPEECHALIGN_DATA_DIR) + "/lexicon/ja_basic.txt";
}

int cmd_train_toy(const TrainToyOptions& o, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  align::AlignConfig ac;
  ac.beta = o.beta;
  ac.dpo_weight = o.dpo_weight;
  ac.learning_rate = o.lr;
  ac.epochs = o.epochs;
  ac.mask = align::MaskStrategy::parse(o.mask);
  ac.optimizer = parse_optimizer(o.optimizer);
  ac.batch_size = o.batch_size;
  ac.seed = seed + 2;
  ac.validate();

  align::PretrainConfig pc;
  pc.learning_rate = o.pretrain_lr;
  pc.epochs = o.pretrain_epochs;
  pc.seed = seed + 1;
  pc.spoken_share = o.spoken_share;
  if (pc.epochs < 0) throw ValidationError("--pretrain-epochs must be non-negative");
  if (!(pc.learning_rate > 0.0)) throw ValidationError("--pretrain-lr must be positive");

  std::vector<align::PreferenceText> corpus =
      o.data.empty() ? align::make_toy_style_corpus(o.pairs, o.corpus_seed)
                     : align::read_preferences(o.data);

  std::optional<tinylm::Checkpoint> init_ckpt;
  if (!o.init.empty()) {
    init_ckpt = tinylm::load_checkpoint(o.init);
    if (!init_ckpt->vocab) throw ValidationError(o.init + ": checkpoint carries no vocabulary");
  }
  align::ToySetup setup = align::setup_from_texts(std::move(corpus), o.heldout, o.corpus_seed,
                                                  init_ckpt ? &*init_ckpt->vocab : nullptr);

  json config{{"command", "train-toy"},
              {"data", o.data.empty() ? json("synthetic") : json(o.data)},
              {"pairs", setup.train.size() + setup.heldout.size()},
              {"corpus_seed", o.corpus_seed},
              {"heldout", o.heldout},
              {"init", o.init},
              {"align", ac.to_json()},
              {"decode_count", o.decode_count},
              {"decode_max_len", o.decode_max_len}};

  tinylm::ModelParams reference;
  if (init_ckpt) {
    reference = init_ckpt->params;
  } else {
    tinylm::ModelConfig mc;
    mc.n_layers = o.layers;
    mc.d_model = o.d_model;
    mc.n_heads = o.heads;
    mc.context = o.context;
    mc.vocab_size = static_cast<int>(setup.vocab.size());
    mc.validate();
    config["model"] = {{"layers", o.layers}, {"d_model", o.d_model}, {"heads", o.heads},
                       {"context", o.context}};
    config["pretrain"] = {{"epochs", pc.epochs}, {"learning_rate", pc.learning_rate},
                          {"spoken_share", pc.spoken_share}, {"seed", pc.seed}};
    for (const auto& ex : setup.train) align::validate_example(ex, mc.context);
    if (pc.epochs > 0) err << "pretraining reference on " << setup.train.size() << " prompts\n";
    reference = align::pretrain_reference(tinylm::ModelParams::init(mc, seed), setup.train, pc);
  }

  const json meta = make_meta(config, seed);
  auto ref_decodes = align::decode_prompts(reference, setup.vocab, setup.heldout, o.decode_count,
                                           o.decode_max_len);
  err << "aligning with w=" << ac.dpo_weight << " on " << setup.train.size() << " pairs\n";
  align::TrainResult result = align::train(reference, reference, setup.train, ac, setup.heldout);
  auto pol_decodes = align::decode_prompts(result.policy, setup.vocab, setup.heldout,
                                           o.decode_count, o.decode_max_len);

  const double ref_nv = mean_nv(ref_decodes);
  const double pol_nv = mean_nv(pol_decodes);
  std::vector<json> lines = align::report_to_jsonl(result.report);
  json summary{{"dpo_weight", ac.dpo_weight},
               {"steps", result.report.steps.size()},
               {"reference_nv_percent", ref_nv},
               {"policy_nv_percent", pol_nv},
               {"reference_decodes", ref_decodes},
               {"policy_decodes", pol_decodes}};
  if (result.report.heldout) {
    summary["heldout_accuracy"] = result.report.heldout->accuracy;
    summary["heldout_mean_margin"] = result.report.heldout->mean_margin;
  }
  lines.push_back({{"summary", summary}});
  write_jsonl(o.report_out, lines, &meta);
  save_with_meta(o.checkpoint_out, result.policy, setup.vocab, meta);
  if (!o.reference_out.empty()) save_with_meta(o.reference_out, reference, setup.vocab, meta);

  out << "steps: " << result.report.steps.size() << "\n";
  if (result.report.heldout) {
    out << "held-out accuracy: " << fixed(result.report.heldout->accuracy, 3)
        << "  mean margin: " << fixed(result.report.heldout->mean_margin, 4) << "\n";
  }
  out << "NV% of greedy decodes: reference " << fixed(ref_nv) << " -> policy " << fixed(pol_nv)
      << "\n";
  return kExitOk;
}

int cmd_make_pairs(const MakePairsOptions& o, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  prefdata::FilterConfig fc;
  fc.min_max_score = o.min_max_score;
  fc.margin_factor = o.margin_factor;
  fc.all_rejected = o.all_rejected;
  fc.validate();
  if (o.input.empty() || o.output.empty()) throw ValidationError("--input and --output are required");

  std::vector<prefdata::DraftGroup> drafts = prefdata::read_rollouts(o.input);
  std::vector<prefdata::RolloutGroup> groups;
  std::vector<prefdata::ScoringFailure> failures;
  json config{{"command", "make-pairs"},
              {"input", o.input},
              {"min_max_score", fc.min_max_score},
              {"margin_factor", fc.margin_factor},
              {"all_rejected", fc.all_rejected}};
  if (prefdata::fully_scored(drafts)) {
    groups = prefdata::to_scored(drafts);
  } else {
    if (o.endpoint.url.empty()) {
      throw ValidationError("input has unscored rollouts; pass --endpoint and --model to score them");
    }
    config["endpoint"] = endpoint_json(o.endpoint);
    judge::HttpChatEndpoint endpoint(endpoint_config(o.endpoint));
    judge::EndpointSuitabilityScorer scorer(endpoint, {o.endpoint.retries, 0});
    prefdata::ScoringResult scored = prefdata::score_rollouts(drafts, scorer, o.endpoint.concurrency);
    groups = std::move(scored.groups);
    failures = std::move(scored.failures);
    for (const auto& f : failures) {
      err << "warning: rollout " << f.rollout_index << " of instruction '" << f.instruction_id
          << "' could not be scored: " << f.error << "\n";
    }
  }

  // Groups whose every rollout failed to score cannot be filtered.
  std::size_t emptied = 0;
  std::erase_if(groups, [&](const prefdata::RolloutGroup& g) {
    if (!g.rollouts.empty()) return false;
    ++emptied;
    return true;
  });

  prefdata::Selection sel = prefdata::select_pairs_detailed(groups, fc);
  std::vector<align::PreferenceText> prefs;
  for (const auto& p : sel.pairs) prefs.push_back(prefdata::to_preference(p));
  const json meta = make_meta(config, seed);
  align::write_preferences(o.output, prefs, &meta);

  auto hist = sel.outcome_histogram();
  out << "instructions in: " << drafts.size() << "  pairs out: " << sel.pairs.size()
      << "  discarded:";
  for (const char* k : {"max_below_threshold", "no_qualifying_rejected"}) {
    out << " " << k << "=" << (hist.contains(k) ? hist.at(k) : 0);
  }
  if (emptied > 0) out << " unscored=" << emptied;
  out << "\n";
  if (!failures.empty()) out << "scoring failures: " << failures.size() << "\n";

  if (!o.summary_out.empty()) {
    json s = meta;
    s["instructions_in"] = drafts.size();
    s["pairs_out"] = sel.pairs.size();
    s["discards"] = json::object();
    for (const auto& [k, v] : hist) {
      if (k != "paired") s["discards"][k] = v;
    }
    s["discards"]["unscored"] = emptied;
    s["scoring_failures"] = failures.size();
    write_text_file(o.summary_out, s.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_eval_surface(const EvalSurfaceOptions& o, std::uint64_t seed, std::ostream& out,
                     std::ostream& err) {
  if (o.responses.empty()) throw ValidationError("--responses is required");
  metrics::SentenceAggregation agg;
  if (o.sentence_agg == "max") {
    agg = metrics::SentenceAggregation::kMax;
  } else if (o.sentence_agg == "mean") {
    agg = metrics::SentenceAggregation::kMean;
  } else {
    throw ValidationError("--sentence-agg must be max or mean");
  }
  const std::string lexicon_path = o.lexicon.empty() ? default_lexicon_path() : o.lexicon;
  auto lexicon = std::make_shared<const metrics::SegmenterLexicon>(
      metrics::SegmenterLexicon::load(lexicon_path));
  metrics::LongestMatchSegmenter segmenter(lexicon);
  std::optional<metrics::VocalizableTable> table;
  if (!o.vocalizable.empty()) table = metrics::VocalizableTable::load(o.vocalizable);

  auto responses = metrics::read_responses(o.responses);
  std::vector<metrics::ParserParses> parses;
  if (!o.parses.empty()) parses = metrics::load_parse_dir(o.parses);

  metrics::SurfaceOptions so;
  so.sentence_aggregation = agg;
  so.table = table ? &*table : nullptr;
  so.concurrency = std::max<std::size_t>(1, o.concurrency);
  metrics::CorpusReport rep = metrics::corpus_report(responses, parses, segmenter, so);
  for (const auto& w : rep.warnings) err << "warning: " << w << "\n";

  json config{{"command", "eval-surface"},
              {"responses", o.responses},
              {"parses", o.parses},
              {"lexicon", lexicon_path},
              {"lexicon_entries", lexicon->size()},
              {"vocalizable", o.vocalizable},
              {"sentence_agg", o.sentence_agg}};
  json doc = make_meta(config, seed);
  doc.update(rep.to_json());
  if (!o.json_out.empty()) write_text_file(o.json_out, doc.dump(2) + "\n");
  out << rep.to_table();
  return kExitOk;
}

int cmd_eval_judge(const EvalJudgeOptions& o, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  if (o.benchmark.empty() || o.candidates.empty()) {
    throw ValidationError("--benchmark and --candidates are required");
  }
  judge::EndpointConfig ec = endpoint_config(o.endpoint);
  auto items = judge::read_benchmark(o.benchmark);
  auto candidates = judge::read_candidates(o.candidates);
  judge::RubricSpec rubric = o.rubric.empty()
                                 ? judge::RubricSpec::speech_worthiness()
                                 : judge::RubricSpec::from_json(json::parse(read_text_file(o.rubric)));

  judge::HttpChatEndpoint endpoint(ec);
  judge::EvalOptions eo;
  eo.retry.max_attempts = o.endpoint.retries;
  eo.concurrency = o.endpoint.concurrency;

  json config{{"command", "eval-judge"},
              {"benchmark", o.benchmark},
              {"candidates", o.candidates},
              {"rubric", o.rubric.empty() ? json("speech-worthiness") : json(o.rubric)},
              {"endpoint", endpoint_json(o.endpoint)}};
  const json meta = make_meta(config, seed);

  judge::EvalSummary summary;
  try {
    summary = judge::evaluate_benchmark(items, candidates, rubric, endpoint, eo);
  } catch (const judge::NoSuccessfulItems&) {
    if (!o.json_out.empty()) {
      json doc = meta;
      doc["error"] = "no successful items";
      doc["failure_count"] = items.size();
      write_text_file(o.json_out, doc.dump(2) + "\n");
    }
    throw;
  }
  for (const auto& s : summary.items) {
    if (s.ok()) {
      out << s.item_id << "\t" << *s.score << "\tattempts=" << s.attempts << "\n";
    } else {
      out << s.item_id << "\tFAILED\tattempts=" << s.attempts << "\n";
      err << "warning: item '" << s.item_id << "' failed: " << s.error << "\n";
    }
  }
  out << "mean: " << summary.mean_text() << "  scored: " << summary.success_count
      << "  failures: " << summary.failure_count << "\n";
  if (!o.json_out.empty()) {
    json doc = meta;
    doc.update(summary.to_json());
    write_text_file(o.json_out, doc.dump(2) + "\n");
  }
  return kExitOk;
}

}  // namespace speechalign::cli
