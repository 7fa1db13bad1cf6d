#include <sstream>

#include "CLI11.hpp"
#include "speechalign/cli/cli.hpp"
#include "speechalign/common/error.hpp"
#include "speechalign/common/jsonl.hpp"

namespace speechalign::cli {

namespace {

void add_endpoint_options(CLI::App* cmd, EndpointOptions& e) {
  cmd->add_option("--endpoint", e.url, "Chat-completions base URL, e.g. http://localhost:8000/v1");
  cmd->add_option("--model", e.model, "Model id sent to the endpoint");
  cmd->add_option("--api-key-env", e.api_key_env, "Environment variable holding the API key")
      ->capture_default_str();
  cmd->add_option("--timeout", e.timeout_seconds, "Per-request timeout in seconds")
      ->capture_default_str();
  cmd->add_option("--retries", e.retries, "Attempts per item")->capture_default_str();
  cmd->add_option("--concurrency", e.concurrency, "Concurrent requests")->capture_default_str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Speech-worthy preference alignment toolkit", kToolName};
  app.set_version_flag("--version", kToolVersion);
  app.set_config("--config", "", "TOML or INI file; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = kDefaultSeed;
  app.add_option("--seed", seed, "Global seed")->capture_default_str();

  TrainToyOptions tt;
  auto* train = app.add_subcommand("train-toy", "Pretrain a toy reference and align it");
  train->add_option("--data", tt.data, "Preference JSONL {prompt, chosen, rejected}; default: synthetic corpus");
  train->add_option("--pairs", tt.pairs, "Synthetic corpus size")->capture_default_str();
  train->add_option("--corpus-seed", tt.corpus_seed, "Corpus generation and split seed")->capture_default_str();
  train->add_option("--heldout", tt.heldout, "Held-out pairs")->capture_default_str();
  train->add_option("--init", tt.init, "Checkpoint to use as reference instead of pretraining");
  train->add_option("--layers", tt.layers)->capture_default_str();
  train->add_option("--d-model", tt.d_model)->capture_default_str();
  train->add_option("--heads", tt.heads)->capture_default_str();
  train->add_option("--context", tt.context)->capture_default_str();
  train->add_option("--pretrain-epochs", tt.pretrain_epochs)->capture_default_str();
  train->add_option("--pretrain-lr", tt.pretrain_lr)->capture_default_str();
  train->add_option("--spoken-share", tt.spoken_share, "Share of spoken responses in pretraining")
      ->capture_default_str();
  train->add_option("--dpo-weight", tt.dpo_weight, "w in w*L_dpo + (1-w)*L_sft")->capture_default_str();
  train->add_option("--beta", tt.beta)->capture_default_str();
  train->add_option("--lr", tt.lr)->capture_default_str();
  train->add_option("--epochs", tt.epochs)->capture_default_str();
  train->add_option("--mask", tt.mask, "kqln, top:N or none")->capture_default_str();
  train->add_option("--optimizer", tt.optimizer, "sgd or adam")->capture_default_str();
  train->add_option("--batch-size", tt.batch_size)->capture_default_str();
  train->add_option("--decode-count", tt.decode_count, "Held-out prompts decoded for NV%")
      ->capture_default_str();
  train->add_option("--decode-max-len", tt.decode_max_len)->capture_default_str();
  train->add_option("--checkpoint", tt.checkpoint_out, "Output policy checkpoint")->capture_default_str();
  train->add_option("--reference-out", tt.reference_out, "Also write the reference checkpoint");
  train->add_option("--report", tt.report_out, "Output TrainReport JSONL")->capture_default_str();

  MakePairsOptions mp;
  auto* pairs = app.add_subcommand("make-pairs", "Filter scored rollouts into preference pairs");
  pairs->add_option("--input", mp.input, "Rollout JSONL")->required();
  pairs->add_option("--output", mp.output, "Preference JSONL")->required();
  pairs->add_option("--min-max-score", mp.min_max_score)->capture_default_str();
  pairs->add_option("--margin-factor", mp.margin_factor)->capture_default_str();
  pairs->add_flag("--all-rejected", mp.all_rejected, "One pair per qualifying rejected rollout");
  pairs->add_option("--summary", mp.summary_out, "Write the summary as JSON");
  add_endpoint_options(pairs, mp.endpoint);

  EvalSurfaceOptions es;
  auto* surface = app.add_subcommand("eval-surface", "Word count, dependency depth and NV%");
  surface->add_option("--responses", es.responses, "JSONL {id, response}")->required();
  surface->add_option("--parses", es.parses, "Directory of <parser>.conllu files");
  surface->add_option("--lexicon", es.lexicon, "Segmenter lexicon; default: bundled");
  surface->add_option("--vocalizable", es.vocalizable, "Vocalizable code point table");
  surface->add_option("--sentence-agg", es.sentence_agg, "max or mean")->capture_default_str();
  surface->add_option("--json", es.json_out, "Write the report as JSON");
  surface->add_option("--concurrency", es.concurrency)->capture_default_str();

  EvalJudgeOptions ej;
  auto* judge = app.add_subcommand("eval-judge", "Score candidates with an LLM judge");
  judge->add_option("--benchmark", ej.benchmark, "Benchmark JSONL")->required();
  judge->add_option("--candidates", ej.candidates, "JSONL {id, response}")->required();
  judge->add_option("--rubric", ej.rubric, "Rubric JSON; default: built-in");
  judge->add_option("--json", ej.json_out, "Write the summary as JSON");
  add_endpoint_options(judge, ej.endpoint);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o;
    std::ostringstream r;
    int code = app.exit(e, o, r);
    out << o.str();
    err << r.str();
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*train) return cmd_train_toy(tt, seed, out, err);
    if (*pairs) return cmd_make_pairs(mp, seed, out, err);
    if (*surface) return cmd_eval_surface(es, seed, out, err);
    if (*judge) return cmd_eval_judge(ej, seed, out, err);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace speechalign::cli
