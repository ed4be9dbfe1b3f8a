#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "weaksmith/common.h"
#include "weaksmith/triplet_builder.h"

namespace weaksmith {

// The five pre-training tasks: aspects, opinions, aspect-opinion pairs,
// aspect-sentiment pairs, and full triplets.
enum class TaskKind { kAE, kOE, kAOE, kAESC, kASTE };

inline constexpr std::array<TaskKind, 5> kAllTasks = {TaskKind::kAE, TaskKind::kOE, TaskKind::kAOE,
                                                      TaskKind::kAESC, TaskKind::kASTE};

std::string_view to_string(TaskKind task);
TaskKind parse_task(std::string_view name);
std::size_t task_arity(TaskKind task);

using Tuple = std::vector<std::string>;

struct FactorizedTasks {
  std::array<std::vector<Tuple>, 5> lists;  // indexed by TaskKind
  const std::vector<Tuple>& operator[](TaskKind t) const { return lists[static_cast<std::size_t>(t)]; }
  std::vector<Tuple>& operator[](TaskKind t) { return lists[static_cast<std::size_t>(t)]; }
};

// Projects triplets onto each task, dropping exact duplicates while keeping
// first-occurrence order. Throws InputError for an empty triplet list.
FactorizedTasks factorize(std::span<const NoisyTriplet> triplets);

class GrammarError : public Error {
 public:
  using Error::Error;
};

// "<f1, f2, ...>" per tuple, tuples joined by "; ". Fields must be non-empty,
// free of surrounding whitespace, and must not contain '<', '>' or ','.
std::string serialize_target(std::span<const Tuple> tuples);
void check_field(std::string_view field);

struct ParsedTarget {
  std::vector<Tuple> tuples;
  std::size_t rejected_segments = 0;
};

// Total parser: every "<...>" segment whose trimmed fields are all non-empty
// and number exactly `arity` becomes a tuple; everything else is skipped.
ParsedTarget parse_target_detailed(std::string_view text, std::size_t arity);
std::vector<Tuple> parse_target(std::string_view text, std::size_t arity);

class TemplateSet {
 public:
  // Throws ConfigError when a task has no templates or a template does not
  // contain "{text}" exactly once.
  explicit TemplateSet(std::map<TaskKind, std::vector<std::string>> templates);

  static TemplateSet from_json(const nlohmann::json& j);
  static TemplateSet load(const std::string& path);
  static const TemplateSet& defaults();

  const std::vector<std::string>& for_task(TaskKind task) const;
  nlohmann::json to_json() const;

 private:
  std::map<TaskKind, std::vector<std::string>> templates_;
};

struct InstructionExample {
  std::string example_id;
  std::string sentence_id;
  TaskKind task = TaskKind::kAE;
  std::string instruction;
  std::string input;
  std::string target;
  std::vector<Tuple> tuples;
  bool operator==(const InstructionExample&) const = default;
};

std::string make_example_id(std::string_view sentence_id, TaskKind task);

// Picks a template uniformly with `rng` and substitutes the sentence.
InstructionExample render(const std::string& sentence_id, const std::string& sentence_text,
                          TaskKind task, std::vector<Tuple> tuples, const TemplateSet& templates,
                          std::mt19937_64& rng);

// Drops each tuple independently with probability `rate`; when every tuple
// would go, one is kept, chosen uniformly. Throws ConfigError unless 0 <= rate < 1.
InstructionExample tuple_dropout(const InstructionExample& example, double rate,
                                 std::mt19937_64& rng);

enum class DropoutMode { kBuild, kEpoch };
DropoutMode parse_dropout_mode(std::string_view name);

struct ForgeConfig {
  double dropout_rate = 0.5;
  DropoutMode dropout_mode = DropoutMode::kBuild;
  std::uint64_t seed = 0;
};

// One example per (sentence, task). Every random draw comes from a stream
// derived from (seed, example_id), so the corpus does not depend on ordering.
// Triplets with a field the target grammar cannot carry are skipped and counted.
struct ForgeResult {
  std::vector<InstructionExample> examples;
  std::size_t rejected_triplets = 0;
  std::size_t dropped_tuples = 0;
};

ForgeResult build_instruction_corpus(std::span<const TripletRecord> records,
                                     const TemplateSet& templates, const ForgeConfig& config);

// Per-epoch resampling for DropoutMode::kEpoch corpora.
std::vector<InstructionExample> epoch_dropout(std::span<const InstructionExample> examples,
                                              double rate, std::uint64_t seed, std::size_t epoch);

void to_json(nlohmann::json& j, const InstructionExample& e);
void from_json(const nlohmann::json& j, InstructionExample& e);
std::string examples_to_jsonl(std::span<const InstructionExample> examples);
std::vector<InstructionExample> read_examples_jsonl(const std::string& path);

}  // namespace weaksmith
