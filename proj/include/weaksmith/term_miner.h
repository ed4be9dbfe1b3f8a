#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "weaksmith/text_ingest.h"

namespace weaksmith {

// One slot of a POS pattern: an exact tag ("IN") or a family wildcard ("NN*").
class TagMatcher {
 public:
  static TagMatcher parse(std::string_view text);

  bool matches(std::string_view tag) const;
  const std::string& text() const { return text_; }
  bool operator==(const TagMatcher&) const = default;

 private:
  std::string text_;
  std::vector<std::string> accepted_;
};

class PosPattern {
 public:
  // "JJ*-NN*-NN*": tags joined by '-', 2 to 4 slots.
  static PosPattern parse(std::string_view text);

  std::size_t size() const { return slots_.size(); }
  const std::vector<TagMatcher>& slots() const { return slots_; }
  std::string to_string() const;
  bool operator==(const PosPattern&) const = default;

 private:
  std::vector<TagMatcher> slots_;
};

bool match_pattern(std::span<const std::string> tags, const PosPattern& pattern);

// The multi-word aspect patterns, in table order.
const std::vector<PosPattern>& default_patterns();
std::vector<PosPattern> load_patterns(const std::string& path);

// The 45-tag Penn Treebank tag set (36 word tags plus 9 punctuation tags).
const std::vector<std::string>& penn_tagset();

bool is_noun_tag(std::string_view tag);

struct MultiwordEntry {
  std::size_t count = 0;
  std::string pattern;
  bool operator==(const MultiwordEntry&) const = default;
};

struct CandidateVocabulary {
  std::map<std::string, std::size_t> single_nouns;
  std::map<std::string, MultiwordEntry> multiword;
  // Frequency of the least frequent admitted noun (0 when none was admitted).
  std::size_t noun_frequency_cutoff = 0;
  std::size_t unique_nouns = 0;
  double top_fraction = 0.2;
  std::size_t min_ngram_count = 3;
  std::vector<PosPattern> patterns;

  bool operator==(const CandidateVocabulary&) const = default;
};

// Associative frequency reduction behind build_vocabulary. Counts from
// disjoint shards can be merged in any order with identical results.
class VocabularyCounts {
 public:
  explicit VocabularyCounts(const std::vector<PosPattern>& patterns) : patterns_(&patterns) {}

  void add(const TaggedSentence& sentence);
  void merge(const VocabularyCounts& other);
  CandidateVocabulary finalize(double top_fraction, std::size_t min_ngram_count) const;

  const std::map<std::string, std::size_t>& noun_counts() const { return nouns_; }

 private:
  struct NgramCount {
    std::size_t count = 0;
    std::size_t pattern_index = 0;  // smallest table index seen
  };
  const std::vector<PosPattern>* patterns_;
  std::map<std::string, std::size_t> nouns_;
  std::map<std::string, NgramCount> ngrams_;
};

// Keeps the ceil(top_fraction * |unique nouns|) most frequent lowercase
// NN*-tagged types (ties broken lexicographically) plus every 2-4 gram whose
// tags match a pattern at least `min_ngram_count` times. Throws Error on an
// empty corpus and ConfigError for top_fraction outside (0, 1].
CandidateVocabulary build_vocabulary(std::span<const TaggedSentence> sentences,
                                     double top_fraction = 0.2, std::size_t min_ngram_count = 3,
                                     const std::vector<PosPattern>& patterns = default_patterns(),
                                     std::size_t workers = 1);

void to_json(nlohmann::json& j, const CandidateVocabulary& v);
void from_json(const nlohmann::json& j, CandidateVocabulary& v);

enum class Polarity { kPositive, kNegative };
std::string_view to_string(Polarity p);
Polarity parse_polarity(std::string_view s);

// Hu & Liu style opinion lexicon: one lowercase word per line, ';' comments.
class OpinionLexicon {
 public:
  OpinionLexicon() = default;
  OpinionLexicon(std::set<std::string> positive, std::set<std::string> negative)
      : positive_(std::move(positive)), negative_(std::move(negative)) {}

  static OpinionLexicon load(const std::string& positive_path, const std::string& negative_path);
  // Expects positive-words.txt and negative-words.txt inside `dir`.
  static OpinionLexicon load_dir(const std::string& dir);
  static std::set<std::string> parse_word_list(std::string_view contents);

  bool contains(std::string_view word) const;
  // Empty for unknown words and for words listed under both polarities.
  std::optional<Polarity> polarity(std::string_view word) const;

  const std::set<std::string>& positive() const { return positive_; }
  const std::set<std::string>& negative() const { return negative_; }

 private:
  std::set<std::string> positive_;
  std::set<std::string> negative_;
};

// Token range [begin, end) plus the covered source text.
struct AspectSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string surface;
  bool operator==(const AspectSpan&) const = default;
};

struct OpinionSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string surface;
  bool negated = false;
  bool operator==(const OpinionSpan&) const = default;
};

struct TermAnnotatedSentence {
  TaggedSentence sentence;
  std::vector<AspectSpan> aspects;
  std::vector<OpinionSpan> opinions;
};

// Greedy left-to-right longest match: 4-, 3-, then 2-gram vocabulary entries
// whose tags in this sentence match a pattern, then single nouns.
std::vector<AspectSpan> extract_aspects(const TaggedSentence& sentence,
                                        const CandidateVocabulary& vocab);

struct NegationOptions {
  std::set<std::string> negators = {"no", "not"};
  std::size_t window = 2;
};

// Every lexicon token is an opinion. The nearest negator among the `window`
// preceding tokens extends the span back to itself and marks it negated; the
// extension never reaches into the previous opinion span.
std::vector<OpinionSpan> extract_opinions(const TaggedSentence& sentence,
                                          const OpinionLexicon& lexicon,
                                          const NegationOptions& negation = {});

TermAnnotatedSentence annotate_terms(const TaggedSentence& sentence,
                                     const CandidateVocabulary& vocab,
                                     const OpinionLexicon& lexicon,
                                     const NegationOptions& negation = {});

struct FilterResult {
  std::vector<TermAnnotatedSentence> kept;
  std::size_t no_aspect = 0;
  std::size_t no_opinion = 0;  // had aspects but no opinion
};

FilterResult filter_sentences(std::vector<TermAnnotatedSentence> sentences);

}  // namespace weaksmith
