#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace speechalign::cli {

inline constexpr std::uint64_t kDefaultSeed = 42;
inline constexpr const char* kDefaultApiKeyEnv = "SPEECHALIGN_API_KEY";

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitRuntime = 2 };

struct TrainToyOptions {
  std::string data;             // preference JSONL; empty: synthetic corpus
  std::size_t pairs = 500;      // synthetic corpus size
  std::uint64_t corpus_seed = 7;
  std::size_t heldout = 50;
  std::string init;             // checkpoint used as reference; skips pretraining
  int layers = 2;
  int d_model = 64;
  int heads = 4;
  int context = 128;
  int pretrain_epochs = 3;
  double pretrain_lr = 1e-3;
  double spoken_share = 0.3;
  double dpo_weight = 0.9;
  double beta = 0.1;
  double lr = 3e-4;
  int epochs = 2;
  std::string mask = "kqln";
  std::string optimizer = "adam";
  int batch_size = 1;
  std::size_t decode_count = 10;
  std::size_t decode_max_len = 40;
  std::string checkpoint_out = "policy.ckpt.json";
  std::string reference_out;
  std::string report_out = "train_report.jsonl";
};

struct EndpointOptions {
  std::string url;
  std::string model;
  std::string api_key_env = kDefaultApiKeyEnv;
  int timeout_seconds = 120;
  int retries = 3;
  std::size_t concurrency = 4;
};

struct MakePairsOptions {
  std::string input;
  std::string output;
  double min_max_score = 90.0;
  double margin_factor = 1.5;
  bool all_rejected = false;
  std::string summary_out;
  EndpointOptions endpoint;
};

struct EvalSurfaceOptions {
  std::string responses;
  std::string parses;
  std::string lexicon;          // empty: bundled lexicon
  std::string vocalizable;      // empty: default table
  std::string sentence_agg = "max";
  std::string json_out;
  std::size_t concurrency = 1;
};

struct EvalJudgeOptions {
  std::string benchmark;
  std::string candidates;
  std::string rubric;           // empty: built-in rubric
  std::string json_out;
  EndpointOptions endpoint;
};

std::string default_lexicon_path();

// Each command returns an exit code. Library exceptions propagate; run()
// maps them to exit codes.
int cmd_train_toy(const TrainToyOptions& o, std::uint64_t seed, std::ostream& out, std::ostream& err);
int cmd_make_pairs(const MakePairsOptions& o, std::uint64_t seed, std::ostream& out, std::ostream& err);
int cmd_eval_surface(const EvalSurfaceOptions& o, std::uint64_t seed, std::ostream& out,
                     std::ostream& err);
int cmd_eval_judge(const EvalJudgeOptions& o, std::uint64_t seed, std::ostream& out, std::ostream& err);

// Full command line: global --seed and --config (TOML or INI; flags given on
// the command line win over the file), then one subcommand.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace speechalign::cli
