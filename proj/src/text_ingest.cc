#include "weaksmith/text_ingest.h"

#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "weaksmith/common.h"
#include "weaksmith/parallel.h"

namespace weaksmith {

using nlohmann::json;

std::string_view TaggedSentence::surface(std::size_t first, std::size_t last) const {
  if (first >= last || last > char_spans.size()) return {};
  const auto b = char_spans[first].begin;
  const auto e = char_spans[last - 1].end;
  return std::string_view(text).substr(b, e - b);
}

void validate(const TaggedSentence& s) {
  if (s.tokens.empty()) throw ParseError("sentence " + s.sentence_id + " has no tokens");
  if (s.tokens.size() != s.pos_tags.size() || s.tokens.size() != s.char_spans.size()) {
    throw ParseError("sentence " + s.sentence_id + ": tokens, pos_tags and char_spans differ in length");
  }
  std::size_t prev_end = 0;
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    const auto& span = s.char_spans[i];
    if (span.begin >= span.end || span.end > s.text.size() || (i > 0 && span.begin < prev_end)) {
      throw ParseError("sentence " + s.sentence_id + ": bad char span at token " + std::to_string(i));
    }
    if (std::string_view(s.text).substr(span.begin, span.end - span.begin) != s.tokens[i]) {
      throw ParseError("sentence " + s.sentence_id + ": span does not reproduce token " +
                       std::to_string(i));
    }
    prev_end = span.end;
  }
}

ReviewFormat parse_review_format(std::string_view name) {
  if (name == "jsonl") return ReviewFormat::kJsonl;
  if (name == "tsv") return ReviewFormat::kTsv;
  throw ConfigError("unknown review format '" + std::string(name) + "' (expected jsonl or tsv)");
}

namespace {

std::optional<RawReview> review_from_json(const json& j, std::string& why) {
  if (!j.is_object()) {
    why = "record is not an object";
    return std::nullopt;
  }
  RawReview r;
  auto id = j.find("review_id");
  auto text = j.find("text");
  if (id == j.end() || !id->is_string() || id->get<std::string>().empty()) {
    why = "missing review_id";
    return std::nullopt;
  }
  if (text == j.end() || !text->is_string() || trim(text->get<std::string>()).empty()) {
    why = "missing text";
    return std::nullopt;
  }
  r.review_id = id->get<std::string>();
  r.text = text->get<std::string>();
  if (auto d = j.find("domain"); d != j.end() && d->is_string()) r.domain = d->get<std::string>();
  if (auto rt = j.find("rating"); rt != j.end() && !rt->is_null()) {
    if (!rt->is_number_integer() || rt->get<int>() < 1 || rt->get<int>() > 5) {
      why = "rating must be an integer in 1..5";
      return std::nullopt;
    }
    r.rating = rt->get<int>();
  }
  return r;
}

std::optional<RawReview> review_from_tsv(const std::string& line, std::string& why) {
  auto cols = split(line, '\t');
  if (cols.size() < 3 || cols.size() > 4) {
    why = "expected 3 or 4 tab-separated columns";
    return std::nullopt;
  }
  RawReview r{cols[0], cols[1], cols[2], std::nullopt};
  if (r.review_id.empty() || trim(r.text).empty()) {
    why = "missing review_id or text";
    return std::nullopt;
  }
  if (cols.size() == 4 && !trim(cols[3]).empty()) {
    const auto v = trim(cols[3]);
    if (v.size() != 1 || v[0] < '1' || v[0] > '5') {
      why = "rating must be an integer in 1..5";
      return std::nullopt;
    }
    r.rating = v[0] - '0';
  }
  return r;
}

}  // namespace

IngestResult parse_reviews(std::istream& in, ReviewFormat format) {
  IngestResult result;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::string why;
    std::optional<RawReview> review;
    if (format == ReviewFormat::kJsonl) {
      json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
      if (j.is_discarded()) {
        why = "invalid JSON";
      } else {
        review = review_from_json(j, why);
      }
    } else {
      review = review_from_tsv(line, why);
    }
    if (review && !seen.insert(review->review_id).second) {
      why = "duplicate review_id " + review->review_id;
      review.reset();
    }
    if (!review) {
      ++result.skipped;
      result.warnings.push_back("line " + std::to_string(lineno) + ": " + why);
      continue;
    }
    result.reviews.push_back(std::move(*review));
  }
  return result;
}

IngestResult ingest_reviews(const std::string& path, ReviewFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return parse_reviews(in, format);
}

const std::set<std::string>& default_abbreviations() {
  static const std::set<std::string> kAbbreviations = {
      "a.m.", "approx.", "ave.", "co.",  "corp.", "dept.", "dr.",  "e.g.", "est.",
      "etc.", "fig.",    "i.e.", "inc.", "jr.",   "lb.",   "lbs.", "ltd.", "min.",
      "mr.",  "mrs.",    "ms.",  "mt.",  "oz.",   "p.m.",  "prof.", "sr.", "st.",
      "u.k.", "u.s.",    "vol.", "vs.",
  };
  return kAbbreviations;
}

std::set<std::string> load_abbreviations(const std::string& path) {
  std::istringstream in(read_file(path));
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.insert(to_lower(t));
  }
  return out;
}

namespace {

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }
bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

bool SentenceSplitter::is_boundary(std::string_view text, std::size_t pos,
                                   std::size_t run_end) const {
  std::size_t next = run_end;
  while (next < text.size() && is_space(text[next])) ++next;
  if (next < text.size()) {
    if (next == run_end) return false;  // no whitespace after the terminator
    while (next + 1 < text.size() && (text[next] == '"' || text[next] == '\'' || text[next] == '(')) ++next;
    if (!std::isupper(static_cast<unsigned char>(text[next]))) return false;
  }
  if (text[pos] == '.') {
    std::size_t start = pos;
    while (start > 0 && !is_space(text[start - 1])) --start;
    while (start < pos && (text[start] == '(' || text[start] == '"' || text[start] == '\'')) ++start;
    if (abbreviations_.count(to_lower(text.substr(start, pos + 1 - start)))) return false;
  }
  return true;
}

std::vector<std::string> SentenceSplitter::segment(std::string_view text) const {
  std::vector<std::string> out;
  std::size_t start = 0;
  std::size_t i = 0;
  auto emit = [&](std::size_t end) {
    auto piece = trim(text.substr(start, end - start));
    if (!piece.empty()) out.emplace_back(piece);
    start = end;
  };
  while (i < text.size()) {
    if (!is_terminator(text[i])) {
      ++i;
      continue;
    }
    std::size_t terminators_end = i;
    while (terminators_end < text.size() && is_terminator(text[terminators_end])) ++terminators_end;
    std::size_t run_end = terminators_end;
    while (run_end < text.size() && is_closer(text[run_end])) ++run_end;
    if (is_boundary(text, terminators_end - 1, run_end)) emit(run_end);
    i = run_end;
  }
  emit(text.size());
  return out;
}

std::vector<std::string> SentenceSplitter::split(const RawReview& review, int min_sentences,
                                                 bool drop_short) const {
  auto sentences = segment(review.text);
  if (static_cast<int>(sentences.size()) >= min_sentences) return sentences;
  if (drop_short) return {};
  auto whole = trim(review.text);
  if (whole.empty()) return {};
  return {std::string(whole)};
}

std::vector<std::string> split_sentences(const RawReview& review, int min_sentences) {
  static const SentenceSplitter kSplitter;
  return kSplitter.split(review, min_sentences);
}

namespace {

bool is_word_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || u >= 0x80;
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_space(text[i])) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (is_word_byte(text[i])) {
      while (i < text.size()) {
        if (is_word_byte(text[i])) {
          ++i;
        } else if ((text[i] == '\'' || text[i] == '-') && i + 1 < text.size() &&
                   is_word_byte(text[i + 1])) {
          ++i;
        } else if ((text[i] == '.' || text[i] == ',') && i + 1 < text.size() &&
                   std::isdigit(static_cast<unsigned char>(text[i - 1])) &&
                   std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
          ++i;
        } else {
          break;
        }
      }
    } else {
      const char c = text[i];
      while (i < text.size() && text[i] == c) ++i;
    }
    out.push_back({std::string(text.substr(start, i - start)), {start, i}});
  }
  return out;
}

namespace {

const std::unordered_map<std::string, std::string>& closed_class() {
  static const std::unordered_map<std::string, std::string> kWords = [] {
    std::unordered_map<std::string, std::string> m;
    auto add = [&](const char* tag, std::initializer_list<const char*> words) {
      for (const char* w : words) m.emplace(w, tag);
    };
    add("DT", {"the", "a", "an", "this", "that", "these", "those", "every", "each", "some", "any",
               "no", "all", "both", "either", "neither", "another"});
    add("IN", {"of", "in", "on", "at", "by", "for", "with", "from", "into", "onto", "about",
               "over", "under", "after", "before", "between", "through", "during", "without",
               "within", "against", "among", "around", "behind", "near", "off", "than", "since",
               "until", "upon", "via", "although", "because", "if", "while", "though", "whether"});
    add("CC", {"and", "but", "or", "nor", "yet", "so"});
    add("PRP", {"i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us", "them"});
    add("PRP$", {"my", "your", "his", "its", "our", "their"});
    add("MD", {"can", "could", "will", "would", "shall", "should", "may", "might", "must"});
    add("VBZ", {"is", "has", "does", "'s"});
    add("VBP", {"am", "are", "have", "do", "'re", "'m"});
    add("VBD", {"was", "were", "had", "did"});
    add("VB", {"be"});
    add("VBN", {"been"});
    add("VBG", {"being"});
    add("RB", {"not", "n't", "very", "too", "also", "just", "really", "quite", "never", "always",
               "still", "even", "rather", "here", "now", "then", "again", "only", "as"});
    add("TO", {"to"});
    add("EX", {"there"});
    add("WDT", {"which", "what"});
    add("WP", {"who", "whom"});
    add("WRB", {"when", "where", "why", "how"});
    return m;
  }();
  return kWords;
}

const std::unordered_set<std::string>& adjective_lexicon() {
  static const std::unordered_set<std::string> kAdjectives = {
      "good",     "great",     "bad",      "terrible",  "excellent", "amazing",   "awful",
      "delicious", "tasty",    "fresh",    "slow",      "fast",      "friendly",  "rude",
      "nice",     "horrible",  "poor",     "cheap",     "expensive", "loud",      "quiet",
      "clean",    "dirty",     "cold",     "hot",       "small",     "large",     "big",
      "little",   "new",       "old",      "perfect",   "wonderful", "fantastic", "decent",
      "mediocre", "bland",     "stale",    "sweet",     "spicy",     "helpful",   "attentive",
      "comfortable", "heavy",  "light",    "long",      "short",     "high",      "low",
      "easy",     "hard",      "sharp",    "bright",    "dark",      "beautiful", "ugly",
      "happy",    "sad",       "best",     "worst",     "better",    "worse",     "overpriced",
      "reasonable", "responsive", "sturdy", "flimsy",   "reliable",  "fine",      "awesome",
      "lovely",   "superb",    "disappointing", "noisy", "crisp",    "soggy",     "greasy",
      "warm",     "pleasant",  "impressive", "useless", "solid",     "smooth",    "broken",
  };
  return kAdjectives;
}

const std::unordered_set<std::string>& noun_lexicon() {
  static const std::unordered_set<std::string> kNouns = {
      "food",    "pizza",   "service", "staff",   "waiter",   "waitress", "price",   "place",
      "restaurant", "meal", "dish",    "menu",    "drink",    "table",    "atmosphere",
      "ambience", "shoe",   "battery", "screen",  "keyboard", "laptop",   "phone",   "camera",
      "charger", "case",    "cable",   "sound",   "speaker",  "quality",  "design",  "size",
      "button",  "mouse",   "key",     "port",    "display",  "app",      "software", "memory",
      "drive",   "card",    "breast",  "chicken", "sandwich", "burger",   "fry",     "salad",
      "soup",    "dessert", "wine",    "beer",    "coffee",   "tea",      "portion", "room",
      "order",   "bill",    "thing",   "nothing", "something", "everything", "time", "day",
      "night",   "view",    "music",   "bread",   "sauce",    "steak",    "pasta",   "sushi",
      "fish",    "bar",     "seat",    "wait",    "life",     "power",    "cost",    "item",
  };
  return kNouns;
}

std::string punctuation_tag(std::string_view tok) {
  switch (tok.front()) {
    case '.':
      return tok.size() > 1 ? ":" : ".";
    case '!':
    case '?':
      return ".";
    case ',':
      return ",";
    case ';':
    case ':':
    case '-':
      return ":";
    case '(':
    case '[':
    case '{':
      return "-LRB-";
    case ')':
    case ']':
    case '}':
      return "-RRB-";
    case '"':
      return "''";
    case '`':
      return "``";
    case '$':
      return "$";
    case '#':
      return "#";
    default:
      return "SYM";
  }
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::string builtin_tag(std::string_view token, std::size_t position) {
  if (token.empty()) return "NN";
  const auto first = static_cast<unsigned char>(token.front());
  if (!std::isalnum(first) && first < 0x80 && token.front() != '\'') return punctuation_tag(token);
  if (std::isdigit(first)) return "CD";
  const std::string lower = to_lower(token);
  if (auto it = closed_class().find(lower); it != closed_class().end()) return it->second;
  if (position > 0 && std::isupper(first)) return "NNP";
  if (adjective_lexicon().count(lower)) return "JJ";
  if (noun_lexicon().count(lower)) return "NN";
  if (ends_with(lower, "s") && lower.size() > 2) {
    const auto stem = lower.substr(0, lower.size() - 1);
    if (noun_lexicon().count(stem)) return "NNS";
    if (ends_with(lower, "es") && noun_lexicon().count(lower.substr(0, lower.size() - 2))) return "NNS";
    if (ends_with(lower, "ies") && noun_lexicon().count(lower.substr(0, lower.size() - 3) + "y")) {
      return "NNS";
    }
  }
  if (ends_with(lower, "ing") && lower.size() > 4) return "VBG";
  if (ends_with(lower, "ed") && lower.size() > 3) return "VBN";
  if (ends_with(lower, "ly") && lower.size() > 3) return "RB";
  return "NN";
}

namespace {

TaggedSentence from_rows(const std::vector<std::pair<std::string, std::string>>& rows) {
  TaggedSentence s;
  for (const auto& [tok, tag] : rows) {
    if (!s.text.empty()) s.text += ' ';
    const std::size_t b = s.text.size();
    s.text += tok;
    s.tokens.push_back(tok);
    s.pos_tags.push_back(tag);
    s.char_spans.push_back({b, s.text.size()});
  }
  return s;
}

std::pair<std::string, std::string> parse_row(std::string_view line, std::size_t lineno) {
  auto cols = split(line, '\t');
  if (cols.size() != 2) {
    throw ParseError("expected 2 tab-separated columns, found " + std::to_string(cols.size()),
                     lineno);
  }
  if (cols[0].empty() || cols[1].empty()) throw ParseError("empty token or tag", lineno);
  if (cols[0].find(' ') != std::string::npos) throw ParseError("token contains a space", lineno);
  return {cols[0], cols[1]};
}

bool comment_value(std::string_view line, std::string_view key, std::string& value) {
  // "# key = value"
  if (line.empty() || line.front() != '#') return false;
  auto body = trim(line.substr(1));
  if (body.substr(0, key.size()) != key) return false;
  auto rest = trim(body.substr(key.size()));
  if (rest.empty() || rest.front() != '=') return false;
  value = std::string(trim(rest.substr(1)));
  return true;
}

}  // namespace

TaggedSentence pos_tag(std::string_view text, TagMode mode) {
  if (trim(text).empty()) throw ParseError("empty sentence");
  if (mode == TagMode::kPretagged) {
    std::vector<std::pair<std::string, std::string>> rows;
    std::size_t lineno = 0;
    for (auto& raw : split(text, '\n')) {
      ++lineno;
      std::string_view line = raw;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (trim(line).empty() || line.front() == '#') continue;
      rows.push_back(parse_row(line, lineno));
    }
    if (rows.empty()) throw ParseError("empty sentence");
    return from_rows(rows);
  }
  TaggedSentence s;
  s.text = std::string(text);
  std::size_t pos = 0;
  for (auto& tok : tokenize(text)) {
    s.pos_tags.push_back(builtin_tag(tok.text, pos++));
    s.tokens.push_back(std::move(tok.text));
    s.char_spans.push_back(tok.span);
  }
  return s;
}

std::vector<TaggedSentence> read_pretagged(std::istream& in, const std::string& default_domain) {
  std::vector<TaggedSentence> out;
  std::vector<std::pair<std::string, std::string>> rows;
  std::string id, domain = default_domain;
  std::string line;
  std::size_t lineno = 0;
  auto flush = [&] {
    if (rows.empty()) {
      if (!id.empty()) throw ParseError("sentence " + id + " has no tokens", lineno);
      return;
    }
    auto s = from_rows(rows);
    s.sentence_id = id.empty() ? "pretagged-" + std::to_string(out.size()) : id;
    s.domain = domain;
    out.push_back(std::move(s));
    rows.clear();
    id.clear();
    domain = default_domain;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) {
      flush();
      continue;
    }
    if (line.front() == '#') {
      std::string value;
      if (comment_value(line, "sentence_id", value)) {
        if (!rows.empty()) flush();
        id = value;
      } else if (comment_value(line, "domain", value)) {
        domain = value;
      }
      continue;
    }
    rows.push_back(parse_row(line, lineno));
  }
  flush();
  return out;
}

std::vector<TaggedSentence> read_pretagged_file(const std::string& path,
                                                const std::string& default_domain) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_pretagged(in, default_domain);
}

std::vector<TaggedSentence> tag_reviews(const std::vector<RawReview>& reviews,
                                        const SentenceSplitter& splitter,
                                        const TaggingOptions& options) {
  std::vector<std::vector<TaggedSentence>> per_review(reviews.size());
  parallel_for(reviews.size(), options.workers, [&](std::size_t i) {
    const auto& review = reviews[i];
    auto texts = splitter.split(review, options.min_sentences, options.drop_short_reviews);
    std::size_t ordinal = 0;
    for (const auto& text : texts) {
      auto s = pos_tag(text, TagMode::kBuiltin);
      s.sentence_id = review.review_id + "-" + std::to_string(ordinal++);
      s.domain = review.domain;
      per_review[i].push_back(std::move(s));
    }
  });
  std::vector<TaggedSentence> out;
  for (auto& group : per_review) {
    for (auto& s : group) out.push_back(std::move(s));
  }
  return out;
}

void to_json(json& j, const TaggedSentence& s) {
  json spans = json::array();
  for (const auto& sp : s.char_spans) spans.push_back({sp.begin, sp.end});
  j = json{{"sentence_id", s.sentence_id}, {"domain", s.domain},   {"text", s.text},
           {"tokens", s.tokens},           {"pos_tags", s.pos_tags}, {"char_spans", spans}};
}

void from_json(const json& j, TaggedSentence& s) {
  j.at("sentence_id").get_to(s.sentence_id);
  s.domain = j.value("domain", "");
  j.at("tokens").get_to(s.tokens);
  j.at("pos_tags").get_to(s.pos_tags);
  s.char_spans.clear();
  for (const auto& sp : j.at("char_spans")) {
    s.char_spans.push_back({sp.at(0).get<std::size_t>(), sp.at(1).get<std::size_t>()});
  }
  if (j.contains("text")) {
    j.at("text").get_to(s.text);
  } else {
    // Rebuild a text consistent with the spans, padding gaps with spaces.
    s.text.clear();
    for (std::size_t i = 0; i < s.tokens.size() && i < s.char_spans.size(); ++i) {
      if (s.text.size() < s.char_spans[i].begin) s.text.resize(s.char_spans[i].begin, ' ');
      s.text += s.tokens[i];
    }
  }
  validate(s);
}

std::vector<TaggedSentence> read_sentences_jsonl(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<TaggedSentence> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      out.push_back(json::parse(line).get<TaggedSentence>());
    } catch (const json::exception& e) {
      throw ParseError(path + ": " + e.what(), lineno);
    }
  }
  return out;
}

std::string sentences_to_jsonl(const std::vector<TaggedSentence>& sentences) {
  std::string out;
  for (const auto& s : sentences) {
    out += json(s).dump();
    out += '\n';
  }
  return out;
}

}  // namespace weaksmith
