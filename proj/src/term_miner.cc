#include "weaksmith/term_miner.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "weaksmith/common.h"
#include "weaksmith/parallel.h"

namespace weaksmith {

using nlohmann::json;

namespace {

const std::map<std::string, std::vector<std::string>, std::less<>>& tag_families() {
  static const std::map<std::string, std::vector<std::string>, std::less<>> kFamilies = {
      {"NN", {"NN", "NNS", "NNP", "NNPS"}},
      {"JJ", {"JJ", "JJR", "JJS"}},
      {"RB", {"RB", "RBR", "RBS"}},
      {"VB", {"VB", "VBD", "VBG", "VBN", "VBP", "VBZ"}},
  };
  return kFamilies;
}

constexpr const char* kPatternTable[] = {
    "NN*-NN*",     "JJ*-NN*",     "VBG-NN*",     "VBN-NN*",         "NN*-NN*-NN*",    "NN*-IN-NN*",
    "JJ*-NN*-NN*", "JJ*-JJ*-NN*", "VBN-JJ*-NN*", "NN*-NN*-NN*-NN*", "NN*-CC-NN*-NN*",
};

}  // namespace

TagMatcher TagMatcher::parse(std::string_view text) {
  TagMatcher m;
  m.text_ = std::string(text);
  if (text.empty()) throw ParseError("empty tag in pattern");
  if (text.back() == '*') {
    auto it = tag_families().find(text.substr(0, text.size() - 1));
    if (it == tag_families().end()) throw ParseError("unknown tag family '" + m.text_ + "'");
    m.accepted_ = it->second;
  } else {
    m.accepted_ = {m.text_};
  }
  return m;
}

bool TagMatcher::matches(std::string_view tag) const {
  return std::find(accepted_.begin(), accepted_.end(), tag) != accepted_.end();
}

PosPattern PosPattern::parse(std::string_view text) {
  PosPattern p;
  for (const auto& slot : split(trim(text), '-')) p.slots_.push_back(TagMatcher::parse(slot));
  if (p.slots_.size() < 2 || p.slots_.size() > 4) {
    throw ParseError("pattern '" + std::string(text) + "' must have 2 to 4 slots");
  }
  return p;
}

std::string PosPattern::to_string() const {
  std::string out;
  for (const auto& s : slots_) {
    if (!out.empty()) out += '-';
    out += s.text();
  }
  return out;
}

bool match_pattern(std::span<const std::string> tags, const PosPattern& pattern) {
  if (tags.size() != pattern.size()) return false;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (!pattern.slots()[i].matches(tags[i])) return false;
  }
  return true;
}

const std::vector<PosPattern>& default_patterns() {
  static const std::vector<PosPattern> kPatterns = [] {
    std::vector<PosPattern> v;
    for (const char* p : kPatternTable) v.push_back(PosPattern::parse(p));
    return v;
  }();
  return kPatterns;
}

std::vector<PosPattern> load_patterns(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<PosPattern> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    try {
      out.push_back(PosPattern::parse(t));
    } catch (const ParseError& e) {
      throw ParseError(path + ": " + e.what(), lineno);
    }
  }
  if (out.empty()) throw ParseError(path + ": no patterns");
  return out;
}

const std::vector<std::string>& penn_tagset() {
  static const std::vector<std::string> kTags = {
      "CC",  "CD",  "DT",  "EX",  "FW",   "IN",  "JJ",  "JJR", "JJS", "LS",  "MD",  "NN",
      "NNS", "NNP", "NNPS", "PDT", "POS", "PRP", "PRP$", "RB", "RBR", "RBS", "RP",  "SYM",
      "TO",  "UH",  "VB",  "VBD", "VBG",  "VBN", "VBP", "VBZ", "WDT", "WP",  "WP$", "WRB",
      "#",   "$",   "''",  "``",  "-LRB-", "-RRB-", ",", ".",  ":",
  };
  return kTags;
}

bool is_noun_tag(std::string_view tag) {
  return tag == "NN" || tag == "NNS" || tag == "NNP" || tag == "NNPS";
}

void VocabularyCounts::add(const TaggedSentence& s) {
  const std::size_t n = s.size();
  std::vector<std::string> lower(n);
  for (std::size_t i = 0; i < n; ++i) lower[i] = to_lower(s.tokens[i]);
  for (std::size_t i = 0; i < n; ++i) {
    if (is_noun_tag(s.pos_tags[i])) ++nouns_[lower[i]];
  }
  for (std::size_t len = 2; len <= 4; ++len) {
    for (std::size_t i = 0; i + len <= n; ++i) {
      std::span<const std::string> tags(s.pos_tags.data() + i, len);
      for (std::size_t p = 0; p < patterns_->size(); ++p) {
        if (!match_pattern(tags, (*patterns_)[p])) continue;
        std::string key = lower[i];
        for (std::size_t k = i + 1; k < i + len; ++k) key += ' ' + lower[k];
        auto [it, inserted] = ngrams_.try_emplace(std::move(key), NgramCount{0, p});
        ++it->second.count;
        it->second.pattern_index = std::min(it->second.pattern_index, p);
        break;
      }
    }
  }
}

void VocabularyCounts::merge(const VocabularyCounts& other) {
  for (const auto& [w, c] : other.nouns_) nouns_[w] += c;
  for (const auto& [g, c] : other.ngrams_) {
    auto [it, inserted] = ngrams_.try_emplace(g, c);
    if (!inserted) {
      it->second.count += c.count;
      it->second.pattern_index = std::min(it->second.pattern_index, c.pattern_index);
    }
  }
}

CandidateVocabulary VocabularyCounts::finalize(double top_fraction,
                                               std::size_t min_ngram_count) const {
  CandidateVocabulary v;
  v.top_fraction = top_fraction;
  v.min_ngram_count = min_ngram_count;
  v.patterns = *patterns_;
  v.unique_nouns = nouns_.size();

  std::vector<std::pair<std::string, std::size_t>> ranked(nouns_.begin(), nouns_.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  // The epsilon keeps 0.2 * 15 = 3.0000000000000004 from rounding up to 4.
  auto keep = static_cast<std::size_t>(
      std::ceil(top_fraction * static_cast<double>(ranked.size()) - 1e-9));
  keep = std::min(keep, ranked.size());
  for (std::size_t i = 0; i < keep; ++i) v.single_nouns.emplace(ranked[i].first, ranked[i].second);
  v.noun_frequency_cutoff = keep ? ranked[keep - 1].second : 0;

  for (const auto& [g, c] : ngrams_) {
    if (c.count >= min_ngram_count) {
      v.multiword.emplace(g, MultiwordEntry{c.count, (*patterns_)[c.pattern_index].to_string()});
    }
  }
  return v;
}

CandidateVocabulary build_vocabulary(std::span<const TaggedSentence> sentences,
                                     double top_fraction, std::size_t min_ngram_count,
                                     const std::vector<PosPattern>& patterns,
                                     std::size_t workers) {
  if (sentences.empty()) throw Error("empty corpus");
  if (!(top_fraction > 0.0 && top_fraction <= 1.0)) {
    throw ConfigError("top_fraction must be in (0, 1]");
  }
  workers = std::min(resolve_workers(workers), sentences.size());
  std::vector<VocabularyCounts> shards(workers, VocabularyCounts(patterns));
  const std::size_t chunk = (sentences.size() + workers - 1) / workers;
  parallel_for(workers, workers, [&](std::size_t w) {
    const std::size_t end = std::min(sentences.size(), (w + 1) * chunk);
    for (std::size_t i = w * chunk; i < end; ++i) shards[w].add(sentences[i]);
  });
  for (std::size_t w = 1; w < shards.size(); ++w) shards[0].merge(shards[w]);
  return shards[0].finalize(top_fraction, min_ngram_count);
}

void to_json(json& j, const CandidateVocabulary& v) {
  json multi = json::object();
  for (const auto& [g, e] : v.multiword) multi[g] = {{"count", e.count}, {"pattern", e.pattern}};
  json patterns = json::array();
  for (const auto& p : v.patterns) patterns.push_back(p.to_string());
  j = json{{"single_nouns", v.single_nouns},
           {"multiword", multi},
           {"cutoff",
            {{"top_fraction", v.top_fraction},
             {"unique_nouns", v.unique_nouns},
             {"kept_nouns", v.single_nouns.size()},
             {"noun_frequency_cutoff", v.noun_frequency_cutoff},
             {"min_ngram_count", v.min_ngram_count}}},
           {"patterns", patterns}};
}

void from_json(const json& j, CandidateVocabulary& v) {
  v = CandidateVocabulary{};
  j.at("single_nouns").get_to(v.single_nouns);
  for (const auto& [g, e] : j.at("multiword").items()) {
    v.multiword.emplace(g, MultiwordEntry{e.at("count").get<std::size_t>(),
                                          e.at("pattern").get<std::string>()});
  }
  const auto& c = j.at("cutoff");
  c.at("top_fraction").get_to(v.top_fraction);
  c.at("unique_nouns").get_to(v.unique_nouns);
  c.at("noun_frequency_cutoff").get_to(v.noun_frequency_cutoff);
  c.at("min_ngram_count").get_to(v.min_ngram_count);
  if (j.contains("patterns")) {
    for (const auto& p : j.at("patterns")) v.patterns.push_back(PosPattern::parse(p.get<std::string>()));
  } else {
    v.patterns = default_patterns();
  }
}

std::string_view to_string(Polarity p) { return p == Polarity::kPositive ? "positive" : "negative"; }

Polarity parse_polarity(std::string_view s) {
  if (s == "positive") return Polarity::kPositive;
  if (s == "negative") return Polarity::kNegative;
  throw ParseError("unknown sentiment '" + std::string(s) + "'");
}

std::set<std::string> OpinionLexicon::parse_word_list(std::string_view contents) {
  std::set<std::string> words;
  for (const auto& raw : split(contents, '\n')) {
    auto t = trim(raw);
    if (t.empty() || t.front() == ';') continue;
    words.insert(to_lower(t));
  }
  return words;
}

OpinionLexicon OpinionLexicon::load(const std::string& positive_path,
                                    const std::string& negative_path) {
  return OpinionLexicon(parse_word_list(read_file(positive_path)),
                        parse_word_list(read_file(negative_path)));
}

OpinionLexicon OpinionLexicon::load_dir(const std::string& dir) {
  return load(dir + "/positive-words.txt", dir + "/negative-words.txt");
}

bool OpinionLexicon::contains(std::string_view word) const {
  const std::string w(word);
  return positive_.count(w) || negative_.count(w);
}

std::optional<Polarity> OpinionLexicon::polarity(std::string_view word) const {
  const std::string w(word);
  const bool pos = positive_.count(w) > 0, neg = negative_.count(w) > 0;
  if (pos == neg) return std::nullopt;
  return pos ? Polarity::kPositive : Polarity::kNegative;
}

std::vector<AspectSpan> extract_aspects(const TaggedSentence& s, const CandidateVocabulary& vocab) {
  std::vector<AspectSpan> out;
  const std::size_t n = s.size();
  std::vector<std::string> lower(n);
  for (std::size_t i = 0; i < n; ++i) lower[i] = to_lower(s.tokens[i]);

  auto tags_match_any = [&](std::size_t i, std::size_t len) {
    std::span<const std::string> tags(s.pos_tags.data() + i, len);
    return std::any_of(vocab.patterns.begin(), vocab.patterns.end(),
                       [&](const PosPattern& p) { return match_pattern(tags, p); });
  };

  std::size_t i = 0;
  while (i < n) {
    std::size_t matched = 0;
    for (std::size_t len = 4; len >= 2 && !matched; --len) {
      if (i + len > n) continue;
      std::string key = lower[i];
      for (std::size_t k = i + 1; k < i + len; ++k) key += ' ' + lower[k];
      if (vocab.multiword.count(key) && tags_match_any(i, len)) matched = len;
    }
    if (!matched && vocab.single_nouns.count(lower[i])) matched = 1;
    if (matched) {
      out.push_back({i, i + matched, std::string(s.surface(i, i + matched))});
      i += matched;
    } else {
      ++i;
    }
  }
  return out;
}

std::vector<OpinionSpan> extract_opinions(const TaggedSentence& s, const OpinionLexicon& lexicon,
                                          const NegationOptions& negation) {
  std::vector<OpinionSpan> out;
  std::size_t floor = 0;  // first token not owned by an earlier span
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::string word = to_lower(s.tokens[i]);
    if (negation.negators.count(word) || !lexicon.contains(word)) continue;
    std::size_t begin = i;
    bool negated = false;
    for (std::size_t d = 1; d <= negation.window && d <= i; ++d) {
      const std::size_t j = i - d;
      if (j < floor) break;
      if (negation.negators.count(to_lower(s.tokens[j]))) {
        begin = j;
        negated = true;
        break;
      }
    }
    out.push_back({begin, i + 1, std::string(s.surface(begin, i + 1)), negated});
    floor = i + 1;
  }
  return out;
}

TermAnnotatedSentence annotate_terms(const TaggedSentence& sentence,
                                     const CandidateVocabulary& vocab,
                                     const OpinionLexicon& lexicon,
                                     const NegationOptions& negation) {
  return {sentence, extract_aspects(sentence, vocab), extract_opinions(sentence, lexicon, negation)};
}

FilterResult filter_sentences(std::vector<TermAnnotatedSentence> sentences) {
  FilterResult r;
  for (auto& s : sentences) {
    if (s.aspects.empty()) {
      ++r.no_aspect;
    } else if (s.opinions.empty()) {
      ++r.no_opinion;
    } else {
      r.kept.push_back(std::move(s));
    }
  }
  return r;
}

}  // namespace weaksmith
