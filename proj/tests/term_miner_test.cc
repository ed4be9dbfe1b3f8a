#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "support/synthetic.h"
#include "weaksmith/term_miner.h"

namespace weaksmith {
namespace {

TaggedSentence tagged(const std::string& text) { return pos_tag(text, TagMode::kBuiltin); }

TaggedSentence pretagged(std::initializer_list<std::pair<const char*, const char*>> rows) {
  std::string text;
  for (const auto& [tok, tag] : rows) text += std::string(tok) + "\t" + tag + "\n";
  return pos_tag(text, TagMode::kPretagged);
}

std::vector<std::string> surfaces(const std::vector<AspectSpan>& spans) {
  std::vector<std::string> out;
  for (const auto& s : spans) out.push_back(s.surface);
  return out;
}

const std::vector<std::string> kTableRows = {
    "NN*-NN*",     "JJ*-NN*",     "VBG-NN*",         "VBN-NN*",        "NN*-NN*-NN*",    "NN*-IN-NN*",
    "JJ*-NN*-NN*", "JJ*-JJ*-NN*", "VBN-JJ*-NN*", "NN*-NN*-NN*-NN*", "NN*-CC-NN*-NN*"};

TEST(Patterns, DefaultSetIsTheElevenTableRows) {
  std::vector<std::string> got;
  for (const auto& p : default_patterns()) got.push_back(p.to_string());
  EXPECT_EQ(got, kTableRows);
}

TEST(Patterns, ShippedDataFileMatchesDefaults) {
  EXPECT_EQ(load_patterns(testing::data_path("patterns.txt")), default_patterns());
}

TEST(Patterns, ParseRejectsBadSizes) {
  EXPECT_THROW(PosPattern::parse("NN*"), ParseError);
  EXPECT_THROW(PosPattern::parse("NN*-NN*-NN*-NN*-NN*"), ParseError);
  EXPECT_THROW(PosPattern::parse("NN*--NN*"), ParseError);
}

TEST(MatchPattern, Examples) {
  const auto nn_nn = PosPattern::parse("NN*-NN*");
  const auto jj_nn = PosPattern::parse("JJ*-NN*");
  const std::vector<std::string> a{"NNP", "NNS"}, b{"JJ", "VBD"}, c{"NN"};
  EXPECT_TRUE(match_pattern(a, nn_nn));
  EXPECT_FALSE(match_pattern(b, jj_nn));
  EXPECT_FALSE(match_pattern(c, nn_nn));
}

TEST(MatchPattern, WildcardFamilies) {
  const auto p = PosPattern::parse("NN*-JJ*");
  for (const char* n : {"NN", "NNS", "NNP", "NNPS"}) {
    for (const char* j : {"JJ", "JJR", "JJS"}) {
      const std::vector<std::string> tags{n, j};
      EXPECT_TRUE(match_pattern(tags, p)) << n << " " << j;
    }
  }
  const std::vector<std::string> vbg{"VBG", "NN"}, vbz{"VBZ", "NN"};
  EXPECT_TRUE(match_pattern(vbg, PosPattern::parse("VBG-NN*")));
  EXPECT_FALSE(match_pattern(vbz, PosPattern::parse("VBG-NN*")));
}

TEST(Tagset, FortyFivePennTags) {
  const auto& tags = penn_tagset();
  EXPECT_EQ(tags.size(), 45u);
  EXPECT_EQ(std::set<std::string>(tags.begin(), tags.end()).size(), 45u);
}

std::map<std::string, std::size_t> counts_of(std::initializer_list<std::pair<const char*, std::size_t>> l) {
  std::map<std::string, std::size_t> m;
  for (const auto& [k, v] : l) m[k] = v;
  return m;
}

TEST(BuildVocabulary, PizzaServiceNounsSurviveTopFraction) {
  std::vector<TaggedSentence> corpus;
  for (int i = 0; i < 4; ++i) corpus.push_back(tagged("The pizza was great, but the service was terrible."));
  corpus.push_back(tagged("The pizza and the service and the menu."));
  corpus.push_back(tagged("The table was fine."));
  corpus.push_back(tagged("The wine was cold and the bread was stale."));
  const auto v = build_vocabulary(corpus, 0.2, 3);
  // 6 unique nouns -> ceil(1.2) = 2 kept.
  EXPECT_EQ(v.unique_nouns, 6u);
  EXPECT_EQ(v.single_nouns, counts_of({{"pizza", 5}, {"service", 5}}));
  EXPECT_EQ(v.noun_frequency_cutoff, 5u);
}

TEST(BuildVocabulary, ChickenBreastBigram) {
  std::vector<TaggedSentence> corpus;
  for (int i = 0; i < 3; ++i) corpus.push_back(tagged("The chicken breast was dry."));
  corpus.push_back(tagged("The fish taco was fine."));
  const auto v = build_vocabulary(corpus, 0.2, 3);
  ASSERT_TRUE(v.multiword.count("chicken breast"));
  EXPECT_EQ(v.multiword.at("chicken breast").count, 3u);
  EXPECT_EQ(v.multiword.at("chicken breast").pattern, "NN*-NN*");
  EXPECT_FALSE(v.multiword.count("fish taco"));
}

TEST(BuildVocabulary, TieBreakIsLexicographic) {
  std::vector<TaggedSentence> corpus{tagged("The zebra and the apple and the mango.")};
  const auto v = build_vocabulary(corpus, 0.34, 1);
  EXPECT_EQ(v.single_nouns, counts_of({{"apple", 1}, {"mango", 1}}));
}

TEST(BuildVocabulary, Errors) {
  std::vector<TaggedSentence> none;
  EXPECT_THROW(build_vocabulary(none), Error);
  std::vector<TaggedSentence> one{tagged("The pizza.")};
  EXPECT_THROW(build_vocabulary(one, 0.0), ConfigError);
  EXPECT_THROW(build_vocabulary(one, 1.5), ConfigError);
}

// Brute-force reference: count every noun occurrence and every n-gram whose
// tags match some pattern, without sharing any code with the miner.
CandidateVocabulary brute_force_vocabulary(const std::vector<TaggedSentence>& corpus, double top_fraction,
                                           std::size_t min_count) {
  std::map<std::string, std::size_t> nouns;
  std::map<std::string, std::pair<std::size_t, std::size_t>> ngrams;  // count, first pattern index
  const auto& patterns = default_patterns();
  auto family = [](const std::string& slot, const std::string& tag) {
    if (slot == "NN*") return tag == "NN" || tag == "NNS" || tag == "NNP" || tag == "NNPS";
    if (slot == "JJ*") return tag == "JJ" || tag == "JJR" || tag == "JJS";
    return slot == tag;
  };
  for (const auto& s : corpus) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s.pos_tags[i].rfind("NN", 0) == 0) ++nouns[to_lower(s.tokens[i])];
      for (std::size_t n = 2; n <= 4 && i + n <= s.size(); ++n) {
        for (std::size_t p = 0; p < patterns.size(); ++p) {
          const auto& slots = patterns[p].slots();
          if (slots.size() != n) continue;
          bool ok = true;
          for (std::size_t k = 0; k < n; ++k) ok = ok && family(slots[k].text(), s.pos_tags[i + k]);
          if (!ok) continue;
          std::string key;
          for (std::size_t k = 0; k < n; ++k) key += (k ? " " : "") + to_lower(s.tokens[i + k]);
          auto& e = ngrams[key];
          if (e.first == 0) e.second = p;
          e.second = std::min(e.second, p);
          ++e.first;
          break;
        }
      }
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(nouns.begin(), nouns.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  const auto keep = static_cast<std::size_t>(std::ceil(top_fraction * static_cast<double>(ranked.size()) - 1e-9));
  CandidateVocabulary v;
  for (std::size_t i = 0; i < keep && i < ranked.size(); ++i) v.single_nouns.insert(ranked[i]);
  v.noun_frequency_cutoff = keep ? ranked[std::min(keep, ranked.size()) - 1].second : 0;
  for (const auto& [key, e] : ngrams) {
    if (e.first >= min_count) v.multiword[key] = {e.first, patterns[e.second].to_string()};
  }
  v.unique_nouns = ranked.size();
  v.top_fraction = top_fraction;
  v.min_ngram_count = min_count;
  v.patterns = patterns;
  return v;
}

TEST(BuildVocabulary, EqualsBruteForceOnSyntheticCorpora) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto corpus = testing::synthetic_sentences(50, seed);
    EXPECT_EQ(build_vocabulary(corpus, 0.2, 3), brute_force_vocabulary(corpus, 0.2, 3)) << seed;
    EXPECT_EQ(build_vocabulary(corpus, 0.5, 2), brute_force_vocabulary(corpus, 0.5, 2)) << seed;
  }
}

TEST(BuildVocabulary, OrderAndWorkerInsensitive) {
  auto corpus = testing::synthetic_sentences(120, 4);
  const auto base = build_vocabulary(corpus);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto rng = derived_rng(seed, "shuffle");
    stable_shuffle(corpus, rng);
    EXPECT_EQ(build_vocabulary(corpus, 0.2, 3, default_patterns(), 1 + seed), base);
  }
}

TEST(BuildVocabulary, JsonRoundTrip) {
  const auto corpus = testing::synthetic_sentences(80, 3);
  const auto v = build_vocabulary(corpus, 0.3, 2);
  nlohmann::json j = v;
  EXPECT_TRUE(j.contains("single_nouns"));
  EXPECT_TRUE(j.contains("multiword"));
  EXPECT_TRUE(j.contains("cutoff"));
  EXPECT_EQ(j.get<CandidateVocabulary>(), v);
}

TEST(Lexicon, HuLiuFormat) {
  const auto words = OpinionLexicon::parse_word_list(";comment\n\ngood\n  great \n;more\n");
  EXPECT_EQ(words, (std::set<std::string>{"good", "great"}));
  const auto lex = testing::sample_lexicon();
  EXPECT_EQ(lex.polarity("great"), Polarity::kPositive);
  EXPECT_EQ(lex.polarity("terrible"), Polarity::kNegative);
  EXPECT_FALSE(lex.polarity("table").has_value());
  OpinionLexicon both({"odd"}, {"odd"});
  EXPECT_TRUE(both.contains("odd"));
  EXPECT_FALSE(both.polarity("odd").has_value());
}

CandidateVocabulary vocab_of(std::set<std::string> singles, std::set<std::string> multi = {}) {
  CandidateVocabulary v;
  for (const auto& s : singles) v.single_nouns[s] = 1;
  for (const auto& m : multi) v.multiword[m] = {3, "NN*-NN*"};
  v.patterns = default_patterns();
  return v;
}

TEST(ExtractAspects, PizzaServiceSentence) {
  const auto s = tagged("The pizza was great, but the service was terrible.");
  const auto spans = extract_aspects(s, vocab_of({"pizza", "service"}));
  EXPECT_EQ(surfaces(spans), (std::vector<std::string>{"pizza", "service"}));
  EXPECT_EQ(spans[0].begin, 1u);
  EXPECT_EQ(spans[1].begin, 7u);
}

TEST(ExtractAspects, NoVocabularyToken) {
  EXPECT_TRUE(extract_aspects(tagged("It was fine."), vocab_of({"pizza"})).empty());
}

TEST(ExtractAspects, LongestMatchConsumesTokens) {
  const auto s = tagged("great chicken breast sandwich");
  const auto spans = extract_aspects(s, vocab_of({"sandwich", "chicken"}, {"chicken breast"}));
  EXPECT_EQ(surfaces(spans), (std::vector<std::string>{"chicken breast", "sandwich"}));
  EXPECT_EQ(spans[0].begin, 1u);
  EXPECT_EQ(spans[0].end, 3u);
}

TEST(ExtractAspects, MultiwordNeedsMatchingTagsHere) {
  const auto s = pretagged({{"chicken", "VB"}, {"breast", "NN"}});
  EXPECT_TRUE(extract_aspects(s, vocab_of({}, {"chicken breast"})).empty());
}

TEST(ExtractAspects, CaseInsensitiveSurfaceKeepsSourceCase) {
  const auto spans = extract_aspects(tagged("Pizza rocks."), vocab_of({"pizza"}));
  EXPECT_EQ(surfaces(spans), (std::vector<std::string>{"Pizza"}));
}

TEST(ExtractAspects, SpansNeverOverlapAndAreInVocabulary) {
  const auto vocab = testing::synthetic_vocabulary();
  for (const auto& s : testing::synthetic_sentences(300, 21)) {
    const auto spans = extract_aspects(s, vocab);
    for (std::size_t i = 0; i < spans.size(); ++i) {
      ASSERT_LT(spans[i].begin, spans[i].end);
      ASSERT_LE(spans[i].end, s.size());
      if (i) ASSERT_LE(spans[i - 1].end, spans[i].begin);
      const auto key = to_lower(spans[i].surface);
      EXPECT_TRUE(vocab.single_nouns.count(key) || vocab.multiword.count(key)) << key;
    }
  }
}

TEST(ExtractOpinions, PizzaServiceSentence) {
  const auto spans = extract_opinions(tagged("The pizza was great, but the service was terrible."),
                                      testing::sample_lexicon());
  ASSERT_EQ(spans.size(), 2u);
  EXPECT_EQ(spans[0].surface, "great");
  EXPECT_EQ(spans[1].surface, "terrible");
  EXPECT_FALSE(spans[0].negated);
}

TEST(ExtractOpinions, Negation) {
  const auto lex = testing::sample_lexicon();
  auto spans = extract_opinions(tagged("The battery is not good"), lex);
  ASSERT_EQ(spans.size(), 1u);
  EXPECT_EQ(spans[0].surface, "not good");
  EXPECT_TRUE(spans[0].negated);

  spans = extract_opinions(tagged("It is not very good"), lex);
  ASSERT_EQ(spans.size(), 1u);
  EXPECT_EQ(spans[0].surface, "not very good");
  EXPECT_EQ(spans[0].begin, 2u);

  spans = extract_opinions(tagged("It is not very very good"), lex);
  ASSERT_EQ(spans.size(), 1u);
  EXPECT_EQ(spans[0].surface, "good");
  EXPECT_FALSE(spans[0].negated);

  spans = extract_opinions(tagged("not very good"), lex, {{"no", "not"}, 1});
  ASSERT_EQ(spans.size(), 1u);
  EXPECT_FALSE(spans[0].negated);
}

TEST(ExtractOpinions, NegationStopsAtPreviousOpinion) {
  const auto spans = extract_opinions(tagged("not good great"), testing::sample_lexicon());
  ASSERT_EQ(spans.size(), 2u);
  EXPECT_EQ(spans[0].surface, "not good");
  EXPECT_EQ(spans[1].surface, "great");
  EXPECT_FALSE(spans[1].negated);
}

TEST(FilterSentences, TenSentenceFixture) {
  const auto vocab = vocab_of({"pizza", "service"});
  const auto lex = testing::sample_lexicon();
  const std::vector<std::string> texts = {
      "It was great.",  "Nothing good.",           "So bad.",                     // no aspect
      "The pizza.",     "The service was there.",                                 // no opinion
      "Great pizza.",   "The service was rude.",   "The pizza was not good.",
      "Bad service.",   "The pizza was great, but the service was terrible."};    // both
  std::vector<TermAnnotatedSentence> annotated;
  for (const auto& t : texts) annotated.push_back(annotate_terms(tagged(t), vocab, lex));
  const auto r = filter_sentences(annotated);
  EXPECT_EQ(r.kept.size(), 5u);
  EXPECT_EQ(r.no_aspect, 3u);
  EXPECT_EQ(r.no_opinion, 2u);
  EXPECT_EQ(r.kept.back().sentence.text, texts.back());
}

}  // namespace
}  // namespace weaksmith
