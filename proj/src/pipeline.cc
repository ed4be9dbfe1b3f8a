#include "weaksmith/pipeline.h"

#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>
#include <unordered_map>

#include "weaksmith/napt_reg.h"
#include "weaksmith/text_ingest.h"
#include "weaksmith/triplet_builder.h"

namespace weaksmith {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class Checker {
 public:
  void fail(const std::string& field, const std::string& message) {
    errors_.push_back(field + ": " + message);
  }
  bool ok() const { return errors_.empty(); }
  std::string message() const { return "invalid config\n  " + join(errors_, "\n  "); }

 private:
  std::vector<std::string> errors_;
};

void read(const json& v, const std::string& field, double& out, Checker& c) {
  if (!v.is_number()) return c.fail(field, "expected a number");
  out = v.get<double>();
}

void read(const json& v, const std::string& field, bool& out, Checker& c) {
  if (!v.is_boolean()) return c.fail(field, "expected true or false");
  out = v.get<bool>();
}

void read(const json& v, const std::string& field, std::string& out, Checker& c) {
  if (!v.is_string()) return c.fail(field, "expected a string");
  out = v.get<std::string>();
}

void read(const json& v, const std::string& field, std::size_t& out, Checker& c) {
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    return c.fail(field, "expected a non-negative integer");
  }
  out = v.get<std::size_t>();
}

void read(const json& v, const std::string& field, int& out, Checker& c) {
  if (!v.is_number_integer()) return c.fail(field, "expected an integer");
  out = v.get<int>();
}

void read(const json& v, const std::string& field, std::set<std::string>& out, Checker& c) {
  if (!v.is_array()) return c.fail(field, "expected an array of strings");
  std::set<std::string> words;
  for (const auto& w : v) {
    if (!w.is_string() || w.get<std::string>().empty()) {
      return c.fail(field, "expected an array of non-empty strings");
    }
    words.insert(to_lower(w.get<std::string>()));
  }
  out = std::move(words);
}

// Returns the named sub-object (an empty one when absent) and reports keys
// that are not in `known`.
const json& section(const json& root, const std::string& name,
                    std::initializer_list<const char*> known, Checker& c) {
  static const json empty = json::object();
  auto it = root.find(name);
  if (it == root.end()) return empty;
  if (!it->is_object()) {
    c.fail(name, "expected an object");
    return empty;
  }
  for (const auto& [key, value] : it->items()) {
    bool found = false;
    for (const char* k : known) found = found || key == k;
    if (!found) c.fail(name + "." + key, "unknown key");
  }
  return *it;
}

template <typename T>
void opt(const json& sec, const std::string& prefix, const char* key, T& out, Checker& c) {
  auto it = sec.find(key);
  if (it != sec.end()) read(*it, prefix.empty() ? key : prefix + "." + key, out, c);
}

void in_unit_closed(double v, const std::string& field, Checker& c) {
  if (!(v >= 0.0 && v <= 1.0)) c.fail(field, "must be in [0, 1]");
}

std::string resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return p;
  const fs::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal().string();
}

std::string content_hash(std::string_view content) { return hex64(stable_hash(content)); }

// Input files of a stage, hashed for the cache key.
class Inputs {
 public:
  const std::string& add(const std::string& name, const std::string& path) {
    auto content = read_file(path);
    hashes_[name] = content_hash(content);
    return contents_[name] = std::move(content);
  }
  const std::string& content(const std::string& name) const { return contents_.at(name); }
  bool has(const std::string& name) const { return contents_.count(name) > 0; }
  const json& hashes() const { return hashes_; }

 private:
  json hashes_ = json::object();
  std::map<std::string, std::string> contents_;
};

struct Artifact {
  std::string name;
  std::string content;
};

fs::path stats_path(const RunConfig& cfg, Stage stage) {
  return fs::path(cfg.paths.output_dir) / (std::string(to_string(stage)) + ".stats.json");
}

std::optional<json> cached(const RunConfig& cfg, Stage stage, const Inputs& inputs) {
  const auto path = stats_path(cfg, stage);
  if (!fs::exists(path)) return std::nullopt;
  json stats;
  try {
    stats = json::parse(read_file(path.string()));
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (stats.value("config_hash", "") != cfg.hash() || stats.value("inputs", json()) != inputs.hashes()) {
    return std::nullopt;
  }
  const json outputs = stats.value("outputs", json::object());
  for (const auto& [name, hash] : outputs.items()) {
    const auto file = fs::path(cfg.paths.output_dir) / name;
    if (!fs::exists(file) || content_hash(read_file(file.string())) != hash) return std::nullopt;
  }
  return stats;
}

// Writes the artifacts, then the stats file, so an interrupted stage never
// leaves a valid cache entry behind.
json commit(const RunConfig& cfg, Stage stage, const Inputs& inputs,
            const std::vector<Artifact>& artifacts, json counts) {
  fs::create_directories(cfg.paths.output_dir);
  json outputs = json::object();
  for (const auto& a : artifacts) {
    write_file((fs::path(cfg.paths.output_dir) / a.name).string(), a.content);
    outputs[a.name] = content_hash(a.content);
  }
  json stats{{"stage", to_string(stage)},
             {"config_hash", cfg.hash()},
             {"seed", cfg.seed},
             {"config", cfg.echo()},
             {"inputs", inputs.hashes()},
             {"outputs", outputs},
             {"counts", std::move(counts)}};
  write_file(stats_path(cfg, stage).string(), stats.dump(2) + "\n");
  return stats;
}

std::string artifact_path(const RunConfig& cfg, const char* name) {
  return (fs::path(cfg.paths.output_dir) / name).string();
}

const std::string& require(const std::string& path, const char* field, Stage stage) {
  if (path.empty()) {
    throw ConfigError(std::string(field) + ": required by " + std::string(to_string(stage)));
  }
  return path;
}

// Reads and hashes every file a stage depends on, before the cache lookup.
void declare_inputs(Stage stage, const RunConfig& cfg, Inputs& inputs) {
  const auto& p = cfg.paths;
  switch (stage) {
    case Stage::kIngest:
      inputs.add("corpus", require(p.corpus, "paths.corpus", stage));
      if (p.corpus_format != "pretagged" && !p.abbreviations.empty()) {
        inputs.add("abbreviations", p.abbreviations);
      }
      break;
    case Stage::kVocab:
      inputs.add("sentences", artifact_path(cfg, "sentences.jsonl"));
      if (!p.patterns.empty()) inputs.add("patterns", p.patterns);
      break;
    case Stage::kAnnotate: {
      inputs.add("sentences", artifact_path(cfg, "sentences.jsonl"));
      inputs.add("vocabulary", artifact_path(cfg, "vocabulary.json"));
      const auto& dir = require(p.lexicon_dir, "paths.lexicon_dir", stage);
      inputs.add("lexicon_positive", dir + "/positive-words.txt");
      inputs.add("lexicon_negative", dir + "/negative-words.txt");
      break;
    }
    case Stage::kFactorize:
      inputs.add("triplets", artifact_path(cfg, "triplets.jsonl"));
      if (!p.templates.empty()) inputs.add("templates", p.templates);
      break;
    case Stage::kSplit:
      inputs.add("triplets", artifact_path(cfg, "triplets.jsonl"));
      inputs.add("instructions", artifact_path(cfg, "instructions.jsonl"));
      break;
    case Stage::kKShot:
      inputs.add("gold", require(p.gold, "paths.gold", stage));
      break;
    case Stage::kEval:
      inputs.add("predictions", require(p.predictions, "paths.predictions", stage));
      inputs.add("references", require(p.references, "paths.references", stage));
      break;
  }
}

template <typename T>
std::vector<T> parse_lines(const std::string& contents) {
  std::vector<T> out;
  std::size_t lineno = 0;
  for (const auto& line : split(contents, '\n')) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      out.push_back(json::parse(line).get<T>());
    } catch (const json::exception& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return out;
}

json run_ingest(const RunConfig& cfg, const Inputs& inputs, std::vector<Artifact>& out) {
  std::istringstream in(inputs.content("corpus"));
  std::vector<TaggedSentence> sentences;
  json counts;
  if (cfg.paths.corpus_format == "pretagged") {
    sentences = read_pretagged(in, cfg.domain);
    counts["reviews"] = nullptr;
    counts["skipped_records"] = 0;
  } else {
    auto ingest = parse_reviews(in, parse_review_format(cfg.paths.corpus_format));
    for (auto& r : ingest.reviews) {
      if (r.domain.empty()) r.domain = cfg.domain;
    }
    SentenceSplitter splitter;
    if (inputs.has("abbreviations")) splitter = SentenceSplitter(load_abbreviations(cfg.paths.abbreviations));
    sentences = tag_reviews(ingest.reviews, splitter,
                            {cfg.min_sentences, cfg.drop_short_reviews, cfg.workers});
    counts["reviews"] = ingest.reviews.size();
    counts["skipped_records"] = ingest.skipped;
    counts["warnings"] = ingest.warnings;
  }
  counts["sentences"] = sentences.size();
  out.push_back({"sentences.jsonl", sentences_to_jsonl(sentences)});
  return counts;
}

json run_vocab(const RunConfig& cfg, const Inputs& inputs, std::vector<Artifact>& out) {
  const auto sentences =
      parse_lines<TaggedSentence>(inputs.content("sentences"));
  const auto patterns = inputs.has("patterns") ? load_patterns(cfg.paths.patterns) : default_patterns();
  const auto vocab =
      build_vocabulary(sentences, cfg.top_fraction, cfg.min_ngram_count, patterns, cfg.workers);
  out.push_back({"vocabulary.json", json(vocab).dump(2) + "\n"});
  return json{{"sentences", sentences.size()},
              {"unique_nouns", vocab.unique_nouns},
              {"kept_nouns", vocab.single_nouns.size()},
              {"noun_frequency_cutoff", vocab.noun_frequency_cutoff},
              {"multiword_terms", vocab.multiword.size()}};
}

json run_annotate(const RunConfig& cfg, const Inputs& inputs, std::vector<Artifact>& out) {
  const auto sentences =
      parse_lines<TaggedSentence>(inputs.content("sentences"));
  const auto vocab =
      json::parse(inputs.content("vocabulary")).get<CandidateVocabulary>();
  OpinionLexicon lexicon(OpinionLexicon::parse_word_list(inputs.content("lexicon_positive")),
                         OpinionLexicon::parse_word_list(inputs.content("lexicon_negative")));

  PipelineConfig pc;
  pc.link_threshold = cfg.link_threshold;
  pc.sentiment_threshold = cfg.sentiment_threshold;
  pc.negation = cfg.negation;
  pc.batch = cfg.remote.batch;
  pc.workers = cfg.workers;

  PipelineResult result;
  if (cfg.scorer_backend == "remote") {
    RemoteScorer scorer(cfg.remote);
    result = run_pipeline(sentences, vocab, lexicon, scorer, scorer, pc);
  } else {
    StubScorer scorer(lexicon, cfg.negation);
    result = run_pipeline(sentences, vocab, lexicon, scorer, scorer, pc);
  }
  const auto& s = result.stats;
  out.push_back({"triplets.jsonl", triplets_to_jsonl(result.records)});
  return json{{"input_sentences", s.input_sentences},
              {"no_aspect", s.no_aspect},
              {"no_opinion", s.no_opinion},
              {"pairs_scored", s.pairs_scored},
              {"pairs_linked", s.pairs_linked},
              {"no_link", s.no_link},
              {"pairs_below_sentiment", s.pairs_below_sentiment},
              {"no_sentiment", s.no_sentiment},
              {"scorer_failures", s.scorer_failures},
              {"output_sentences", s.output_sentences},
              {"triplets", s.triplets},
              {"warnings", result.warnings}};
}

json run_factorize(const RunConfig& cfg, const Inputs& inputs, std::vector<Artifact>& out) {
  const auto records = parse_triplets_jsonl(inputs.content("triplets"));
  std::optional<TemplateSet> loaded;
  if (inputs.has("templates")) loaded = TemplateSet::from_json(json::parse(inputs.content("templates")));
  const auto& templates = loaded ? *loaded : TemplateSet::defaults();
  const auto result = build_instruction_corpus(
      records, templates, ForgeConfig{cfg.dropout_rate, cfg.dropout_mode, cfg.seed});
  json per_task = json::object();
  std::size_t tuples = 0;
  for (const auto& ex : result.examples) {
    auto& n = per_task[std::string(to_string(ex.task))];
    n = n.is_null() ? 1 : n.get<std::size_t>() + 1;
    tuples += ex.tuples.size();
  }
  out.push_back({"instructions.jsonl", examples_to_jsonl(result.examples)});
  return json{{"records", records.size()},
              {"examples", result.examples.size()},
              {"examples_per_task", per_task},
              {"tuples_kept", tuples},
              {"tuples_dropped", result.dropped_tuples},
              {"rejected_triplets", result.rejected_triplets}};
}

json run_split(const RunConfig& cfg, const Inputs& inputs, std::vector<Artifact>& out) {
  const auto records = parse_triplets_jsonl(inputs.content("triplets"));
  const auto examples =
      parse_lines<InstructionExample>(inputs.content("instructions"));
  const auto items = split_items(records);
  const auto manifest =
      disjoint_split(items, SplitOptions{cfg.val_fraction, cfg.seed, cfg.opinion_disjoint});
  const std::set<std::string> val(manifest.val_ids.begin(), manifest.val_ids.end());
  std::vector<InstructionExample> train_ex, val_ex;
  for (const auto& ex : examples) (val.count(ex.sentence_id) ? val_ex : train_ex).push_back(ex);
  out.push_back({"split_manifest.json", json(manifest).dump(2) + "\n"});
  out.push_back({"train.jsonl", examples_to_jsonl(train_ex)});
  out.push_back({"val.jsonl", examples_to_jsonl(val_ex)});
  const double n = static_cast<double>(items.size());
  return json{{"sentences", items.size()},
              {"train_sentences", manifest.train_ids.size()},
              {"val_sentences", manifest.val_ids.size()},
              {"val_fraction", n > 0 ? static_cast<double>(manifest.val_ids.size()) / n : 0.0},
              {"train_examples", train_ex.size()},
              {"val_examples", val_ex.size()},
              {"warnings", manifest.warnings}};
}

json run_kshot(const RunConfig& cfg, const Inputs& inputs, std::vector<Artifact>& out) {
  const auto& contents = inputs.content("gold");
  const auto gold = parse_gold_jsonl(contents);
  const auto manifest = kshot_sample(gold, cfg.k, cfg.kshot_attribute, cfg.seed);
  std::unordered_map<std::string, std::string> lines;
  for (const auto& line : split(contents, '\n')) {
    if (trim(line).empty()) continue;
    lines.emplace(json::parse(line).at("sentence_id").get<std::string>(), std::string(trim(line)));
  }
  std::string selected;
  for (const auto& id : manifest.selected_ids) selected += lines.at(id) + "\n";
  out.push_back({"kshot_manifest.json", json(manifest).dump(2) + "\n"});
  out.push_back({"kshot.jsonl", selected});
  return json{{"gold_examples", gold.size()},
              {"selected", manifest.selected_ids.size()},
              {"per_value_counts", manifest.per_value_counts},
              {"deficient", manifest.deficient}};
}

json run_eval(const RunConfig& cfg, const Inputs& inputs, std::vector<Artifact>& out) {
  const auto preds = parse_lines<InstructionExample>(inputs.content("predictions"));
  const auto gold = parse_lines<InstructionExample>(inputs.content("references"));
  const auto report = score_examples(preds, gold, cfg.eval_task, cfg.eval_metric);
  out.push_back({"eval_report.json", report_to_json(report).dump(2) + "\n"});
  return json{{"predictions", preds.size()},
              {"references", gold.size()},
              {"f1", report.f1},
              {"parse_failures", report.parse_failures},
              {"table", format_report_table(report)}};
}

std::string summarize(Stage stage, const json& stats, bool skipped) {
  const auto& counts = stats.at("counts");
  if (stage == Stage::kEval && counts.contains("table")) {
    return (skipped ? "eval: up to date\n" : "") + counts.at("table").get<std::string>();
  }
  std::string line = std::string(to_string(stage)) + (skipped ? ": up to date" : ":");
  for (const auto& [key, value] : counts.items()) {
    if (value.is_number() || value.is_boolean()) line += " " + key + "=" + value.dump();
  }
  return line + "\n";
}

}  // namespace

json RunConfig::echo() const {
  json p = paths_echo;
  p.erase("output_dir");
  return json{
      {"seed", seed},
      {"domain", domain},
      {"paths", p},
      {"ingest", {{"min_sentences", min_sentences}, {"drop_short_reviews", drop_short_reviews}}},
      {"vocab", {{"top_fraction", top_fraction}, {"min_ngram_count", min_ngram_count}}},
      {"opinions", {{"negators", negation.negators}, {"window", negation.window}}},
      {"thresholds", {{"link", link_threshold}, {"sentiment", sentiment_threshold}}},
      {"scorer",
       {{"backend", scorer_backend},
        {"url", scorer_backend == "remote" ? remote.url : ""},
        {"timeout_s", remote.timeout_s},
        {"batch", remote.batch},
        {"inflight", remote.inflight}}},
      {"forge",
       {{"dropout_rate", dropout_rate},
        {"dropout_mode", dropout_mode == DropoutMode::kBuild ? "build" : "epoch"}}},
      {"split", {{"val_fraction", val_fraction}, {"opinion_disjoint", opinion_disjoint}}},
      {"kshot", {{"k", k}, {"attribute", to_string(kshot_attribute)}}},
      {"eval", {{"task", eval_task}, {"metric", eval_metric == MetricKind::kExact ? "exact" : "token"}}}};
}

std::string RunConfig::hash() const {
  auto e = echo();
  e.erase("paths");
  return hex64(stable_hash(e.dump()));
}

RunConfig parse_run_config(const json& j, const std::string& base_dir,
                           std::optional<std::uint64_t> seed_override) {
  Checker c;
  RunConfig cfg;
  if (!j.is_object()) throw ConfigError("invalid config\n  (root): expected a JSON object");

  for (const auto& [key, value] : j.items()) {
    static const std::set<std::string> known = {"seed",  "domain",   "workers",    "paths", "ingest",
                                                "vocab", "opinions", "thresholds", "scorer", "forge",
                                                "split", "kshot",    "eval"};
    if (!known.count(key)) c.fail(key, "unknown key");
  }
  if (seed_override) {
    cfg.seed = *seed_override;
  } else if (!j.contains("seed")) {
    c.fail("seed", "required (runs are never seeded from the clock)");
  } else {
    opt(j, "", "seed", cfg.seed, c);
  }
  opt(j, "", "domain", cfg.domain, c);
  opt(j, "", "workers", cfg.workers, c);

  const auto& paths = section(j, "paths",
                              {"corpus", "corpus_format", "lexicon_dir", "templates", "patterns",
                               "abbreviations", "output_dir", "gold", "predictions", "references"},
                              c);
  auto& P = cfg.paths;
  opt(paths, "paths", "corpus", P.corpus, c);
  opt(paths, "paths", "corpus_format", P.corpus_format, c);
  opt(paths, "paths", "lexicon_dir", P.lexicon_dir, c);
  opt(paths, "paths", "templates", P.templates, c);
  opt(paths, "paths", "patterns", P.patterns, c);
  opt(paths, "paths", "abbreviations", P.abbreviations, c);
  opt(paths, "paths", "output_dir", P.output_dir, c);
  opt(paths, "paths", "gold", P.gold, c);
  opt(paths, "paths", "predictions", P.predictions, c);
  opt(paths, "paths", "references", P.references, c);
  cfg.paths_echo = paths;
  if (P.corpus_format != "jsonl" && P.corpus_format != "tsv" && P.corpus_format != "pretagged") {
    c.fail("paths.corpus_format", "must be jsonl, tsv or pretagged");
  }
  if (P.output_dir.empty()) c.fail("paths.output_dir", "required");

  const fs::path base = base_dir.empty() ? fs::path(".") : fs::path(base_dir);
  auto check_path = [&](std::string& p, const char* field, bool directory) {
    if (p.empty()) return;
    p = resolve(base, p);
    if (directory ? !fs::is_directory(p) : !fs::is_regular_file(p)) {
      c.fail(field, (directory ? "no such directory: " : "no such file: ") + p);
    }
  };
  check_path(P.corpus, "paths.corpus", false);
  check_path(P.lexicon_dir, "paths.lexicon_dir", true);
  check_path(P.templates, "paths.templates", false);
  check_path(P.patterns, "paths.patterns", false);
  check_path(P.abbreviations, "paths.abbreviations", false);
  check_path(P.gold, "paths.gold", false);
  check_path(P.predictions, "paths.predictions", false);
  check_path(P.references, "paths.references", false);
  P.output_dir = resolve(base, P.output_dir);

  const auto& ingest = section(j, "ingest", {"min_sentences", "drop_short_reviews"}, c);
  opt(ingest, "ingest", "min_sentences", cfg.min_sentences, c);
  opt(ingest, "ingest", "drop_short_reviews", cfg.drop_short_reviews, c);
  if (cfg.min_sentences < 1) c.fail("ingest.min_sentences", "must be at least 1");

  const auto& vocab = section(j, "vocab", {"top_fraction", "min_ngram_count"}, c);
  opt(vocab, "vocab", "top_fraction", cfg.top_fraction, c);
  opt(vocab, "vocab", "min_ngram_count", cfg.min_ngram_count, c);
  if (!(cfg.top_fraction > 0.0 && cfg.top_fraction <= 1.0)) c.fail("vocab.top_fraction", "must be in (0, 1]");
  if (cfg.min_ngram_count < 1) c.fail("vocab.min_ngram_count", "must be at least 1");

  const auto& opinions = section(j, "opinions", {"negators", "window"}, c);
  opt(opinions, "opinions", "negators", cfg.negation.negators, c);
  opt(opinions, "opinions", "window", cfg.negation.window, c);

  const auto& thresholds = section(j, "thresholds", {"link", "sentiment"}, c);
  opt(thresholds, "thresholds", "link", cfg.link_threshold, c);
  opt(thresholds, "thresholds", "sentiment", cfg.sentiment_threshold, c);
  in_unit_closed(cfg.link_threshold, "thresholds.link", c);
  in_unit_closed(cfg.sentiment_threshold, "thresholds.sentiment", c);

  const auto& scorer = section(j, "scorer", {"backend", "url", "timeout_s", "batch", "inflight"}, c);
  opt(scorer, "scorer", "backend", cfg.scorer_backend, c);
  opt(scorer, "scorer", "url", cfg.remote.url, c);
  opt(scorer, "scorer", "timeout_s", cfg.remote.timeout_s, c);
  opt(scorer, "scorer", "batch", cfg.remote.batch, c);
  opt(scorer, "scorer", "inflight", cfg.remote.inflight, c);
  if (const char* env = std::getenv("WEAKSMITH_SCORER_URL"); env && *env) cfg.remote.url = env;
  if (cfg.scorer_backend != "stub" && cfg.scorer_backend != "remote") {
    c.fail("scorer.backend", "must be stub or remote");
  }
  if (cfg.scorer_backend == "remote" && cfg.remote.url.rfind("http://", 0) != 0) {
    c.fail("scorer.url", "remote backend needs an http:// URL (or WEAKSMITH_SCORER_URL)");
  }
  if (!(cfg.remote.timeout_s > 0.0)) c.fail("scorer.timeout_s", "must be positive");
  if (cfg.remote.batch < 1) c.fail("scorer.batch", "must be at least 1");
  if (cfg.remote.inflight < 1 || cfg.remote.inflight > 1024) c.fail("scorer.inflight", "must be in [1, 1024]");

  const auto& forge = section(j, "forge", {"dropout_rate", "dropout_mode"}, c);
  opt(forge, "forge", "dropout_rate", cfg.dropout_rate, c);
  std::string mode = "build";
  opt(forge, "forge", "dropout_mode", mode, c);
  if (!(cfg.dropout_rate >= 0.0 && cfg.dropout_rate < 1.0)) c.fail("forge.dropout_rate", "must be in [0, 1)");
  try {
    cfg.dropout_mode = parse_dropout_mode(mode);
  } catch (const Error& e) {
    c.fail("forge.dropout_mode", e.what());
  }

  const auto& split_sec = section(j, "split", {"val_fraction", "opinion_disjoint"}, c);
  opt(split_sec, "split", "val_fraction", cfg.val_fraction, c);
  opt(split_sec, "split", "opinion_disjoint", cfg.opinion_disjoint, c);
  if (!(cfg.val_fraction > 0.0 && cfg.val_fraction < 1.0)) c.fail("split.val_fraction", "must be in (0, 1)");

  const auto& kshot = section(j, "kshot", {"k", "attribute"}, c);
  opt(kshot, "kshot", "k", cfg.k, c);
  std::string attribute = "sentiment";
  opt(kshot, "kshot", "attribute", attribute, c);
  if (cfg.k < 1) c.fail("kshot.k", "must be at least 1");
  try {
    cfg.kshot_attribute = parse_kshot_attribute(attribute);
  } catch (const Error& e) {
    c.fail("kshot.attribute", e.what());
  }

  const auto& eval = section(j, "eval", {"task", "metric"}, c);
  opt(eval, "eval", "task", cfg.eval_task, c);
  std::string metric = "exact";
  opt(eval, "eval", "metric", metric, c);
  try {
    cfg.eval_metric = parse_metric(metric);
    if (cfg.eval_task != "all" && !cfg.eval_task.empty()) parse_task(cfg.eval_task);
    if (cfg.eval_metric == MetricKind::kToken && cfg.eval_task != "AESC" && cfg.eval_task != "all") {
      c.fail("eval.task", "token-level F1 is defined for AESC only");
    }
  } catch (const Error& e) {
    c.fail("eval", e.what());
  }

  if (!c.ok()) throw ConfigError(c.message());
  return cfg;
}

RunConfig load_run_config(const std::string& path, std::optional<std::uint64_t> seed_override) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const IoError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const json::exception& e) {
    throw ConfigError("config: " + path + " is not valid JSON: " + e.what());
  }
  return parse_run_config(j, fs::path(path).parent_path().string(), seed_override);
}

std::string config_reference() {
  return R"(config keys (JSON), default, origin:
  seed                        required      no clock seeding
  domain                      "general"     invented
  workers                     0             invented (0 = available parallelism)
  paths.corpus                -             review JSONL/TSV or pre-tagged sentences
  paths.corpus_format         "jsonl"       jsonl | tsv | pretagged
  paths.lexicon_dir           -             positive-words.txt + negative-words.txt
  paths.templates             built-in      instruction templates JSON
  paths.patterns              built-in      multi-word aspect POS patterns
  paths.abbreviations         built-in      sentence splitter abbreviations
  paths.output_dir            required
  paths.gold                  -             k-shot source (gold JSONL)
  paths.predictions           -             eval predictions (instruction JSONL)
  paths.references            -             eval references (instruction JSONL)
  ingest.min_sentences        3             published
  ingest.drop_short_reviews   false         invented
  vocab.top_fraction          0.2           published
  vocab.min_ngram_count       3             invented
  opinions.negators           ["no","not"]  published
  opinions.window             2             invented
  thresholds.link             0.75          published
  thresholds.sentiment        0.75          published
  scorer.backend              "stub"        stub | remote
  scorer.url                  -             env WEAKSMITH_SCORER_URL overrides
  scorer.timeout_s            30            invented
  scorer.batch                32            invented
  scorer.inflight             4             invented
  forge.dropout_rate          0.5           published
  forge.dropout_mode          "build"       invented (build | epoch)
  split.val_fraction          0.06          derived from published split sizes
  split.opinion_disjoint      true          invented
  kshot.k                     5             invented
  kshot.attribute             "sentiment"   sentiment | aspect_category
  eval.task                   "all"         AE | OE | AOE | AESC | ASTE | all
  eval.metric                 "exact"       exact | token (AESC only)
)";
}

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::kIngest: return "ingest";
    case Stage::kVocab: return "vocab";
    case Stage::kAnnotate: return "annotate";
    case Stage::kFactorize: return "factorize";
    case Stage::kSplit: return "split";
    case Stage::kKShot: return "kshot";
    case Stage::kEval: return "eval";
  }
  return "?";
}

Stage parse_stage(std::string_view name) {
  for (auto s : {Stage::kIngest, Stage::kVocab, Stage::kAnnotate, Stage::kFactorize, Stage::kSplit,
                 Stage::kKShot, Stage::kEval}) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown stage '" + std::string(name) + "'");
}

StageOutcome run_stage(Stage stage, const RunConfig& cfg, const RunOptions& options) {
  const std::string name(to_string(stage));
  try {
    Inputs inputs;
    declare_inputs(stage, cfg, inputs);
    if (!options.force) {
      if (auto stats = cached(cfg, stage, inputs)) {
        return {stage, true, *stats, summarize(stage, *stats, true)};
      }
    }
    std::vector<Artifact> artifacts;
    auto body = [&]() -> json {
      switch (stage) {
        case Stage::kIngest: return run_ingest(cfg, inputs, artifacts);
        case Stage::kVocab: return run_vocab(cfg, inputs, artifacts);
        case Stage::kAnnotate: return run_annotate(cfg, inputs, artifacts);
        case Stage::kFactorize: return run_factorize(cfg, inputs, artifacts);
        case Stage::kSplit: return run_split(cfg, inputs, artifacts);
        case Stage::kKShot: return run_kshot(cfg, inputs, artifacts);
        case Stage::kEval: return run_eval(cfg, inputs, artifacts);
      }
      return json();
    };
    auto stats = commit(cfg, stage, inputs, artifacts, body());
    return {stage, false, stats, summarize(stage, stats, false)};
  } catch (const ConfigError&) {
    throw;
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::vector<StageOutcome> run_through(Stage stage, const RunConfig& cfg, const RunOptions& options) {
  if (stage == Stage::kKShot || stage == Stage::kEval) return {run_stage(stage, cfg, options)};
  std::vector<StageOutcome> out;
  for (auto s : {Stage::kIngest, Stage::kVocab, Stage::kAnnotate, Stage::kFactorize, Stage::kSplit}) {
    out.push_back(run_stage(s, cfg, options));
    if (s == stage) break;
  }
  return out;
}

std::vector<StageOutcome> run_all(const RunConfig& cfg, const RunOptions& options) {
  std::vector<StageOutcome> out;
  for (auto s : {Stage::kIngest, Stage::kVocab, Stage::kAnnotate, Stage::kFactorize, Stage::kSplit}) {
    out.push_back(run_stage(s, cfg, options));
  }
  if (!cfg.paths.gold.empty()) out.push_back(run_stage(Stage::kKShot, cfg, options));
  if (!cfg.paths.predictions.empty() && !cfg.paths.references.empty()) {
    out.push_back(run_stage(Stage::kEval, cfg, options));
  }
  return out;
}

json reg_check(const json& input) {
  Checker c;
  if (!input.is_object()) throw ConfigError("reg-check input must be a JSON object");
  auto vec = [&](const char* key) {
    std::vector<double> v;
    auto it = input.find(key);
    if (it == input.end() || !it->is_array()) {
      c.fail(key, "expected an array of numbers");
      return v;
    }
    for (const auto& x : *it) {
      if (!x.is_number()) {
        c.fail(key, "expected an array of numbers");
        return std::vector<double>{};
      }
      v.push_back(x.get<double>());
    }
    return v;
  };
  const auto theta = vec("theta");
  const auto theta_init = vec("theta_init");
  RegConfig rc;
  double ce = 0.0;
  if (!input.contains("alpha")) c.fail("alpha", "required");
  if (!input.contains("beta")) c.fail("beta", "required");
  opt(input, "", "alpha", rc.alpha, c);
  opt(input, "", "beta", rc.beta, c);
  opt(input, "", "ce", ce, c);
  opt(input, "", "squared", rc.squared, c);
  if (!c.ok()) throw ConfigError(c.message());
  const ParamSnapshot snap{theta, theta_init};
  return json{{"loss", napt_loss(ce, snap, rc)}, {"gradient", napt_reg_gradient(snap, rc)}};
}

}  // namespace weaksmith
