#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "weaksmith/task_forge.h"
#include "weaksmith/triplet_builder.h"

namespace weaksmith {

struct SplitItem {
  std::string sentence_id;
  std::vector<std::string> aspects;
  std::vector<std::string> opinions;
};

std::vector<SplitItem> split_items(std::span<const TripletRecord> records);

struct SplitManifest {
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
  std::set<std::string> train_aspects;
  std::set<std::string> val_aspects;
  std::set<std::string> train_opinions;
  std::set<std::string> val_opinions;
  std::uint64_t seed = 0;
  double target_val_fraction = 0.06;
  bool opinion_disjoint = true;
  std::vector<std::string> warnings;
  bool operator==(const SplitManifest&) const = default;
};

struct SplitOptions {
  double val_fraction = 0.06;
  std::uint64_t seed = 0;
  // When false only aspect vocabularies are kept disjoint.
  bool opinion_disjoint = true;
};

// Train/validation split with disjoint aspect (and opinion) vocabularies.
//
// Sentences that share a term must land on the same side, so terms are
// assigned in groups: aspect terms are visited in seeded shuffled order, and
// each unassigned one pulls in the closure of sentences reachable from it
// through shared terms. A group goes to validation when it fits in the
// remaining budget ceil(val_fraction * N); otherwise its terms go to train.
// Assignment stops once the budget is met. If nothing fits, the smallest
// group that leaves training non-empty is used and a warning is recorded.
//
// Throws ConfigError unless 0 < val_fraction < 1, and Error on an empty corpus.
SplitManifest disjoint_split(std::span<const SplitItem> corpus, const SplitOptions& options);

enum class KShotAttribute { kSentiment, kAspectCategory };
std::string_view to_string(KShotAttribute a);
KShotAttribute parse_kshot_attribute(std::string_view name);

struct GoldExample {
  std::string sentence_id;
  std::string text;
  std::vector<Tuple> tuples;
  std::string category;  // empty when absent
};

// Sentiment values are the last field of each tuple; the category value is
// the example's "category" field.
std::set<std::string> attribute_values(const GoldExample& example, KShotAttribute attribute);

struct KShotManifest {
  std::size_t k = 0;
  KShotAttribute attribute = KShotAttribute::kSentiment;
  std::uint64_t seed = 0;
  std::vector<std::string> selected_ids;  // selection order
  std::map<std::string, std::size_t> per_value_counts;
  std::map<std::string, std::size_t> deficient;  // value -> examples available (< k)
  bool operator==(const KShotManifest&) const = default;
};

// Greedy covering: values in lexicographic order; for each, candidates are
// drawn without replacement in seeded order until the value has k selected
// examples. Every selected example counts toward all values it carries.
// Throws ConfigError when k == 0.
KShotManifest kshot_sample(std::span<const GoldExample> examples, std::size_t k,
                           KShotAttribute attribute, std::uint64_t seed);

std::vector<GoldExample> parse_gold_jsonl(std::string_view contents);
std::vector<GoldExample> read_gold_jsonl(const std::string& path);

void to_json(nlohmann::json& j, const SplitManifest& m);
void from_json(const nlohmann::json& j, SplitManifest& m);
void to_json(nlohmann::json& j, const KShotManifest& m);

}  // namespace weaksmith
