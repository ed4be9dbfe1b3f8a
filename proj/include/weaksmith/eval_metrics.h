#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "weaksmith/common.h"
#include "weaksmith/task_forge.h"

namespace weaksmith {

struct F1Counts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  F1Counts& operator+=(const F1Counts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  bool operator==(const F1Counts&) const = default;

  // Precision is 1 when nothing was predicted and nothing was missed (and
  // symmetrically for recall), so an empty prediction on empty gold scores 1.
  double precision() const;
  double recall() const;
  double f1() const;
};

struct F1Report {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::map<std::string, F1Counts> per_task;
  std::size_t parse_failures = 0;

  static F1Report from_counts(const F1Counts& c);
  F1Counts counts() const { return {tp, fp, fn}; }
};

struct SentenceTuples {
  std::string sentence_id;
  std::vector<Tuple> tuples;
};

class AlignmentError : public Error {
 public:
  using Error::Error;
};

// Micro-averaged exact match: a predicted tuple is a true positive when an
// unmatched, field-wise identical gold tuple remains. pred and gold must
// cover the same sentence ids (any order).
F1Report exact_tuple_f1(std::span<const SentenceTuples> pred, std::span<const SentenceTuples> gold);

// Per-sentence counts for exact_tuple_f1.
F1Counts exact_match_counts(std::span<const Tuple> pred, std::span<const Tuple> gold);

struct TokenizedSentence {
  std::string sentence_id;
  std::vector<std::string> tokens;
};

// Token-level AESC F1. Each (aspect, sentiment) tuple labels the tokens of
// the first occurrence of the aspect's tokens with its sentiment; all other
// tokens are O. An earlier tuple's label wins on overlap. An aspect that does
// not occur adds its token count to fp (pred) or fn (gold).
F1Report token_level_f1_aesc(std::span<const SentenceTuples> pred,
                             std::span<const SentenceTuples> gold,
                             std::span<const TokenizedSentence> sentences);

F1Counts token_label_counts(std::span<const Tuple> pred, std::span<const Tuple> gold,
                            std::span<const std::string> tokens);

enum class MetricKind { kExact, kToken };
MetricKind parse_metric(std::string_view name);

// Scores a predictions file against a gold file, both in the instruction
// JSONL schema. Predictions are parsed from "target"; gold uses "tuples" when
// present. `task` empty means every task present in gold (exact metric only).
F1Report score_run(const std::string& predictions_path, const std::string& gold_path,
                   const std::string& task, MetricKind metric);
F1Report score_examples(std::span<const InstructionExample> predictions,
                        std::span<const InstructionExample> gold, const std::string& task,
                        MetricKind metric);

nlohmann::json report_to_json(const F1Report& report);
std::string format_report_table(const F1Report& report);

}  // namespace weaksmith
