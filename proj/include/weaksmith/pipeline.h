#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "weaksmith/common.h"
#include "weaksmith/corpus_splitter.h"
#include "weaksmith/eval_metrics.h"
#include "weaksmith/scorer_gateway.h"
#include "weaksmith/task_forge.h"
#include "weaksmith/term_miner.h"

namespace weaksmith {

struct PathsConfig {
  std::string corpus;
  std::string corpus_format = "jsonl";  // jsonl | tsv | pretagged
  std::string lexicon_dir;
  std::string templates;      // empty: built-in templates
  std::string patterns;       // empty: built-in pattern table
  std::string abbreviations;  // empty: built-in list
  std::string output_dir;
  std::string gold;         // k-shot source, gold JSONL
  std::string predictions;  // eval, instruction JSONL
  std::string references;   // eval, instruction JSONL
};

// Everything a run needs. Relative paths are resolved against the directory
// of the config file. Output does not depend on `workers` or on output_dir.
struct RunConfig {
  std::uint64_t seed = 0;
  std::string domain = "general";
  std::size_t workers = 0;  // 0: available parallelism
  PathsConfig paths;

  int min_sentences = 3;
  bool drop_short_reviews = false;
  double top_fraction = 0.2;
  std::size_t min_ngram_count = 3;
  NegationOptions negation;
  double link_threshold = 0.75;
  double sentiment_threshold = 0.75;

  std::string scorer_backend = "stub";  // stub | remote
  RemoteConfig remote;

  double dropout_rate = 0.5;
  DropoutMode dropout_mode = DropoutMode::kBuild;
  double val_fraction = 0.06;
  bool opinion_disjoint = true;
  std::size_t k = 5;
  KShotAttribute kshot_attribute = KShotAttribute::kSentiment;
  std::string eval_task = "all";
  MetricKind eval_metric = MetricKind::kExact;

  nlohmann::json paths_echo = nlohmann::json::object();  // "paths" as written in the file

  // Normalized settings without output_dir and workers, keys sorted.
  nlohmann::json echo() const;
  // Hex stable hash of echo() minus paths; input files are hashed separately.
  std::string hash() const;
};

// Validates every field and reports all problems at once as a ConfigError
// with one "field: message" line each. `seed_override` replaces (or supplies)
// the mandatory seed. WEAKSMITH_SCORER_URL, when set, replaces scorer.url.
RunConfig parse_run_config(const nlohmann::json& j, const std::string& base_dir,
                           std::optional<std::uint64_t> seed_override = std::nullopt);
RunConfig load_run_config(const std::string& path,
                          std::optional<std::uint64_t> seed_override = std::nullopt);

// One line per config key: key, default, and whether the default is a
// published value or invented.
std::string config_reference();

enum class Stage { kIngest, kVocab, kAnnotate, kFactorize, kSplit, kKShot, kEval };
std::string_view to_string(Stage stage);
Stage parse_stage(std::string_view name);

// Wraps any non-config failure inside a stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& cause)
      : Error("stage " + stage + " failed: " + cause), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct RunOptions {
  bool force = false;
};

struct StageOutcome {
  Stage stage = Stage::kIngest;
  bool skipped = false;  // cache hit
  nlohmann::json stats;  // contents of <stage>.stats.json
  std::string report;    // human-readable summary for the console
};

// Runs one stage, writing its artifacts and <stage>.stats.json into
// paths.output_dir. The stage is skipped when its stats file records the same
// config hash and input hashes and every recorded output is unchanged.
StageOutcome run_stage(Stage stage, const RunConfig& config, const RunOptions& options = {});

// Runs the upstream chain ingest -> vocab -> annotate -> factorize -> split up
// to and including `stage` (cached stages are skipped). kshot and eval have
// no upstream stage.
std::vector<StageOutcome> run_through(Stage stage, const RunConfig& config,
                                      const RunOptions& options = {});

// ingest, vocab, annotate, factorize, split; then kshot and eval when their
// inputs are configured.
std::vector<StageOutcome> run_all(const RunConfig& config, const RunOptions& options = {});

// {"theta":[...],"theta_init":[...],"alpha":a,"beta":b,"ce":c,"squared"?:bool}
// -> {"loss":L,"gradient":[...]} where the gradient includes only the penalties.
nlohmann::json reg_check(const nlohmann::json& input);

}  // namespace weaksmith
