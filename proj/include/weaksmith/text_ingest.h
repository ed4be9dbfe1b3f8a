#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace weaksmith {

struct RawReview {
  std::string review_id;
  std::string domain;
  std::string text;
  std::optional<int> rating;
};

// Byte offsets [begin, end) into TaggedSentence::text.
struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const CharSpan&) const = default;
};

struct TaggedSentence {
  std::string sentence_id;
  std::string domain;
  std::string text;
  std::vector<std::string> tokens;
  std::vector<std::string> pos_tags;
  std::vector<CharSpan> char_spans;

  bool operator==(const TaggedSentence&) const = default;

  std::size_t size() const { return tokens.size(); }
  // Source text covered by tokens [first, last).
  std::string_view surface(std::size_t first, std::size_t last) const;
};

// Throws ParseError unless tokens, tags and spans line up, are non-empty, and
// every span is increasing, non-overlapping and reproduces its token.
void validate(const TaggedSentence& sentence);

enum class ReviewFormat { kJsonl, kTsv };
ReviewFormat parse_review_format(std::string_view name);

struct IngestResult {
  std::vector<RawReview> reviews;
  std::size_t skipped = 0;
  std::vector<std::string> warnings;
};

// JSONL: {"review_id","domain","text","rating"?} per line.
// TSV: review_id <TAB> domain <TAB> text [<TAB> rating].
// Malformed records are skipped and counted; an unreadable file throws IoError.
IngestResult ingest_reviews(const std::string& path, ReviewFormat format);
IngestResult parse_reviews(std::istream& in, ReviewFormat format);

const std::set<std::string>& default_abbreviations();
// One lowercase abbreviation per line ("p.m."); '#' starts a comment.
std::set<std::string> load_abbreviations(const std::string& path);

// Rule-based splitter: a run of . ! ? ends a sentence when followed by
// whitespace and an uppercase letter, or by the end of the text, unless the
// word carrying the period is a known abbreviation.
class SentenceSplitter {
 public:
  SentenceSplitter() : SentenceSplitter(default_abbreviations()) {}
  explicit SentenceSplitter(std::set<std::string> abbreviations)
      : abbreviations_(std::move(abbreviations)) {}

  std::vector<std::string> segment(std::string_view text) const;

  // Reviews with at least `min_sentences` sentences come back split; shorter
  // reviews come back as one unsplit unit, or not at all with `drop_short`.
  std::vector<std::string> split(const RawReview& review, int min_sentences = 3,
                                 bool drop_short = false) const;

 private:
  bool is_boundary(std::string_view text, std::size_t pos, std::size_t run_end) const;

  std::set<std::string> abbreviations_;
};

std::vector<std::string> split_sentences(const RawReview& review, int min_sentences = 3);

enum class TagMode { kPretagged, kBuiltin };

struct Token {
  std::string text;
  CharSpan span;
};

// Words (with internal apostrophes, hyphens, and digit separators) and
// punctuation runs. Whitespace is discarded.
std::vector<Token> tokenize(std::string_view text);

// Deterministic suffix + lexicon tagger. Good enough for hermetic tests, not
// for real corpora.
std::string builtin_tag(std::string_view token, std::size_t position);

// kPretagged: `text` holds one "token<TAB>tag" row per line and the sentence
// text is rebuilt by joining tokens with single spaces.
// kBuiltin: `text` is raw text run through tokenize() and builtin_tag().
// Throws ParseError for empty input or a row without exactly two columns.
TaggedSentence pos_tag(std::string_view text, TagMode mode);

// Blank-line-separated sentences of "token<TAB>tag" rows, each optionally
// preceded by "# sentence_id = ..." (and "# domain = ...") comment lines.
std::vector<TaggedSentence> read_pretagged(std::istream& in, const std::string& default_domain);
std::vector<TaggedSentence> read_pretagged_file(const std::string& path,
                                                const std::string& default_domain);

struct TaggingOptions {
  int min_sentences = 3;
  bool drop_short_reviews = false;
  std::size_t workers = 1;
};

// Splits and tags every review with the builtin tagger. Sentence ids are
// "<review_id>-<ordinal>"; output follows input review order.
std::vector<TaggedSentence> tag_reviews(const std::vector<RawReview>& reviews,
                                        const SentenceSplitter& splitter,
                                        const TaggingOptions& options);

void to_json(nlohmann::json& j, const TaggedSentence& s);
void from_json(const nlohmann::json& j, TaggedSentence& s);

std::vector<TaggedSentence> read_sentences_jsonl(const std::string& path);
std::string sentences_to_jsonl(const std::vector<TaggedSentence>& sentences);

}  // namespace weaksmith
