#include "weaksmith/eval_metrics.h"

#include <algorithm>
#include <cstdio>
#include <unordered_map>

#include "weaksmith/text_ingest.h"

namespace weaksmith {

using nlohmann::json;

double F1Counts::precision() const {
  if (tp + fp == 0) return fn == 0 ? 1.0 : 0.0;
  return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double F1Counts::recall() const {
  if (tp + fn == 0) return fp == 0 ? 1.0 : 0.0;
  return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double F1Counts::f1() const {
  const double p = precision(), r = recall();
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

F1Report F1Report::from_counts(const F1Counts& c) {
  F1Report r;
  r.tp = c.tp;
  r.fp = c.fp;
  r.fn = c.fn;
  r.precision = c.precision();
  r.recall = c.recall();
  r.f1 = c.f1();
  return r;
}

F1Counts exact_match_counts(std::span<const Tuple> pred, std::span<const Tuple> gold) {
  std::map<Tuple, std::size_t> remaining;
  for (const auto& g : gold) ++remaining[g];
  F1Counts c;
  for (const auto& p : pred) {
    auto it = remaining.find(p);
    if (it != remaining.end() && it->second > 0) {
      --it->second;
      ++c.tp;
    } else {
      ++c.fp;
    }
  }
  c.fn = gold.size() - c.tp;
  return c;
}

namespace {

template <typename T>
std::unordered_map<std::string, const T*> index_by_id(std::span<const T> items, const char* side) {
  std::unordered_map<std::string, const T*> m;
  for (const auto& item : items) {
    if (!m.emplace(item.sentence_id, &item).second) {
      throw AlignmentError(std::string("duplicate sentence_id in ") + side + ": " + item.sentence_id);
    }
  }
  return m;
}

template <typename A, typename B>
void check_alignment(std::span<const A> pred, const std::unordered_map<std::string, const B*>& gold,
                     const std::unordered_map<std::string, const A*>& pred_index) {
  std::vector<std::string> offenders;
  for (const auto& p : pred) {
    if (!gold.count(p.sentence_id)) offenders.push_back(p.sentence_id + " (prediction only)");
  }
  for (const auto& [id, g] : gold) {
    if (!pred_index.count(id)) offenders.push_back(id + " (gold only)");
  }
  if (offenders.empty()) return;
  std::sort(offenders.begin(), offenders.end());
  std::string msg = "prediction/gold sentence ids do not align: ";
  for (std::size_t i = 0; i < offenders.size() && i < 10; ++i) msg += (i ? ", " : "") + offenders[i];
  if (offenders.size() > 10) msg += ", ... (" + std::to_string(offenders.size()) + " total)";
  throw AlignmentError(msg);
}

std::vector<std::string> token_texts(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokenize(text)) out.push_back(std::move(t.text));
  return out;
}

struct Labeling {
  std::vector<std::string> labels;  // "" is O
  std::size_t unplaced_tokens = 0;
};

Labeling label_tokens(std::span<const Tuple> tuples, std::span<const std::string> tokens) {
  Labeling l;
  l.labels.assign(tokens.size(), "");
  for (const auto& t : tuples) {
    if (t.size() < 2) continue;
    const auto aspect = token_texts(t[0]);
    if (aspect.empty()) continue;
    bool placed = false;
    for (std::size_t i = 0; i + aspect.size() <= tokens.size() && !placed; ++i) {
      if (!std::equal(aspect.begin(), aspect.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
        continue;
      }
      for (std::size_t k = i; k < i + aspect.size(); ++k) {
        if (l.labels[k].empty()) l.labels[k] = t[1];
      }
      placed = true;
    }
    if (!placed) l.unplaced_tokens += aspect.size();
  }
  return l;
}

}  // namespace

F1Report exact_tuple_f1(std::span<const SentenceTuples> pred, std::span<const SentenceTuples> gold) {
  const auto gold_index = index_by_id(gold, "gold");
  const auto pred_index = index_by_id(pred, "predictions");
  check_alignment(pred, gold_index, pred_index);
  F1Counts total;
  for (const auto& p : pred) total += exact_match_counts(p.tuples, gold_index.at(p.sentence_id)->tuples);
  return F1Report::from_counts(total);
}

F1Counts token_label_counts(std::span<const Tuple> pred, std::span<const Tuple> gold,
                            std::span<const std::string> tokens) {
  const auto p = label_tokens(pred, tokens);
  const auto g = label_tokens(gold, tokens);
  F1Counts c;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& pl = p.labels[i];
    const auto& gl = g.labels[i];
    if (!pl.empty() && pl == gl) {
      ++c.tp;
      continue;
    }
    if (!pl.empty()) ++c.fp;
    if (!gl.empty()) ++c.fn;
  }
  c.fp += p.unplaced_tokens;
  c.fn += g.unplaced_tokens;
  return c;
}

F1Report token_level_f1_aesc(std::span<const SentenceTuples> pred,
                             std::span<const SentenceTuples> gold,
                             std::span<const TokenizedSentence> sentences) {
  const auto gold_index = index_by_id(gold, "gold");
  const auto pred_index = index_by_id(pred, "predictions");
  const auto sent_index = index_by_id(sentences, "sentences");
  check_alignment(pred, gold_index, pred_index);
  F1Counts total;
  for (const auto& p : pred) {
    auto s = sent_index.find(p.sentence_id);
    if (s == sent_index.end()) throw AlignmentError("no tokens for sentence " + p.sentence_id);
    total += token_label_counts(p.tuples, gold_index.at(p.sentence_id)->tuples, s->second->tokens);
  }
  return F1Report::from_counts(total);
}

MetricKind parse_metric(std::string_view name) {
  if (name == "exact") return MetricKind::kExact;
  if (name == "token") return MetricKind::kToken;
  throw ConfigError("metric must be 'exact' or 'token'");
}

F1Report score_examples(std::span<const InstructionExample> predictions,
                        std::span<const InstructionExample> gold, const std::string& task,
                        MetricKind metric) {
  std::vector<TaskKind> tasks;
  if (!task.empty() && task != "all") {
    tasks.push_back(parse_task(task));
  } else if (metric == MetricKind::kToken) {
    tasks.push_back(TaskKind::kAESC);
  } else {
    std::set<TaskKind> present;
    for (const auto& g : gold) present.insert(g.task);
    tasks.assign(present.begin(), present.end());
  }
  if (metric == MetricKind::kToken && tasks != std::vector<TaskKind>{TaskKind::kAESC}) {
    throw ConfigError("token-level F1 is defined for AESC only");
  }

  F1Report report;
  F1Counts total;
  for (auto t : tasks) {
    const auto arity = task_arity(t);
    std::vector<SentenceTuples> p, g;
    std::vector<TokenizedSentence> sentences;
    for (const auto& ex : gold) {
      if (ex.task != t) continue;
      auto tuples = ex.tuples.empty() ? parse_target(ex.target, arity) : ex.tuples;
      g.push_back({ex.sentence_id, std::move(tuples)});
      if (metric == MetricKind::kToken) sentences.push_back({ex.sentence_id, token_texts(ex.input)});
    }
    for (const auto& ex : predictions) {
      if (ex.task != t) continue;
      auto parsed = parse_target_detailed(ex.target, arity);
      if (parsed.rejected_segments > 0 || (parsed.tuples.empty() && !trim(ex.target).empty())) {
        ++report.parse_failures;
      }
      p.push_back({ex.sentence_id, std::move(parsed.tuples)});
    }
    const auto r = metric == MetricKind::kExact ? exact_tuple_f1(p, g) : token_level_f1_aesc(p, g, sentences);
    report.per_task[std::string(to_string(t))] = r.counts();
    total += r.counts();
  }
  const auto failures = report.parse_failures;
  auto per_task = std::move(report.per_task);
  report = F1Report::from_counts(total);
  report.per_task = std::move(per_task);
  report.parse_failures = failures;
  return report;
}

F1Report score_run(const std::string& predictions_path, const std::string& gold_path,
                   const std::string& task, MetricKind metric) {
  const auto predictions = read_examples_jsonl(predictions_path);
  const auto gold = read_examples_jsonl(gold_path);
  return score_examples(predictions, gold, task, metric);
}

json report_to_json(const F1Report& r) {
  json per_task = json::object();
  for (const auto& [task, c] : r.per_task) {
    per_task[task] = {{"precision", c.precision()}, {"recall", c.recall()}, {"f1", c.f1()},
                      {"tp", c.tp},                 {"fp", c.fp},           {"fn", c.fn}};
  }
  return json{{"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1},
              {"tp", r.tp},               {"fp", r.fp},         {"fn", r.fn},
              {"per_task", per_task},     {"parse_failures", r.parse_failures}};
}

std::string format_report_table(const F1Report& r) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-8s %8s %8s %8s %9s %9s %9s\n", "task", "tp", "fp", "fn",
                "precision", "recall", "f1");
  out += line;
  auto row = [&](const std::string& name, const F1Counts& c) {
    std::snprintf(line, sizeof line, "%-8s %8zu %8zu %8zu %9.4f %9.4f %9.4f\n", name.c_str(), c.tp,
                  c.fp, c.fn, c.precision(), c.recall(), c.f1());
    out += line;
  };
  for (const auto& [task, c] : r.per_task) row(task, c);
  row("micro", r.counts());
  std::snprintf(line, sizeof line, "parse failures: %zu\n", r.parse_failures);
  out += line;
  return out;
}

}  // namespace weaksmith
