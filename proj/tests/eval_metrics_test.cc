#include <gtest/gtest.h>

#include <functional>

#include "support/synthetic.h"
#include "weaksmith/eval_metrics.h"

namespace weaksmith {
namespace {

// Largest number of disjoint (pred, gold) pairs of equal tuples, by exhaustive search.
std::size_t max_matching(const std::vector<Tuple>& pred, const std::vector<Tuple>& gold) {
  std::vector<bool> used(gold.size(), false);
  std::function<std::size_t(std::size_t)> go = [&](std::size_t i) -> std::size_t {
    if (i == pred.size()) return 0;
    std::size_t best = go(i + 1);
    for (std::size_t j = 0; j < gold.size(); ++j) {
      if (used[j] || gold[j] != pred[i]) continue;
      used[j] = true;
      best = std::max(best, 1 + go(i + 1));
      used[j] = false;
    }
    return best;
  };
  return go(0);
}

double f1_from(double tp, double fp, double fn) {
  const double p = tp + fp == 0 ? (fn == 0 ? 1.0 : 0.0) : tp / (tp + fp);
  const double r = tp + fn == 0 ? (fp == 0 ? 1.0 : 0.0) : tp / (tp + fn);
  return p + r == 0 ? 0.0 : 2 * p * r / (p + r);
}

std::vector<Tuple> small_tuples(std::mt19937_64& rng, std::size_t arity) {
  static const std::vector<std::string> kWords = {"food", "staff", "good", "bad", "positive", "negative"};
  std::vector<Tuple> out(uniform_index(rng, 5));
  for (auto& t : out) {
    for (std::size_t i = 0; i < arity; ++i) t.push_back(kWords[uniform_index(rng, 3) + (i % 2) * 3]);
  }
  return out;
}

TEST(ExactF1, MatchesBruteForce) {
  auto rng = derived_rng(41, "exact");
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t arity = 1 + uniform_index(rng, 3);
    const std::size_t n = 1 + uniform_index(rng, 4);
    std::vector<SentenceTuples> pred, gold;
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t s = 0; s < n; ++s) {
      const auto id = "s" + std::to_string(s);
      auto p = small_tuples(rng, arity), g = small_tuples(rng, arity);
      const double m = static_cast<double>(max_matching(p, g));
      tp += m;
      fp += static_cast<double>(p.size()) - m;
      fn += static_cast<double>(g.size()) - m;
      pred.push_back({id, p});
      gold.push_back({id, g});
    }
    std::reverse(gold.begin(), gold.end());
    const auto r = exact_tuple_f1(pred, gold);
    ASSERT_EQ(static_cast<double>(r.tp), tp);
    ASSERT_EQ(static_cast<double>(r.fp), fp);
    ASSERT_EQ(static_cast<double>(r.fn), fn);
    ASSERT_DOUBLE_EQ(r.f1, f1_from(tp, fp, fn));
  }
}

TEST(ExactF1, HalfRecall) {
  std::vector<SentenceTuples> pred{{"a", {{"pizza", "great", "positive"}}}};
  std::vector<SentenceTuples> gold{{"a", {{"pizza", "great", "positive"}, {"service", "terrible", "negative"}}}};
  const auto r = exact_tuple_f1(pred, gold);
  EXPECT_DOUBLE_EQ(r.precision, 1.0);
  EXPECT_DOUBLE_EQ(r.recall, 0.5);
  EXPECT_NEAR(r.f1, 2.0 / 3.0, 1e-12);
}

TEST(ExactF1, EmptySides) {
  EXPECT_DOUBLE_EQ((F1Counts{0, 0, 0}).f1(), 1.0);
  EXPECT_DOUBLE_EQ((F1Counts{0, 2, 0}).f1(), 0.0);
  EXPECT_DOUBLE_EQ((F1Counts{0, 0, 3}).f1(), 0.0);
}

TEST(ExactF1, MisalignedIdsAreNamed) {
  std::vector<SentenceTuples> pred{{"a", {}}, {"b", {}}};
  std::vector<SentenceTuples> gold{{"a", {}}, {"c", {}}};
  try {
    exact_tuple_f1(pred, gold);
    FAIL() << "expected AlignmentError";
  } catch (const AlignmentError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("b (prediction only)"), std::string::npos);
    EXPECT_NE(msg.find("c (gold only)"), std::string::npos);
  }
  std::vector<SentenceTuples> dup{{"a", {}}, {"a", {}}};
  EXPECT_THROW(exact_tuple_f1(dup, gold), AlignmentError);
}

// Labels tokens by scanning every start position; the first tuple to claim a token keeps it.
std::vector<std::string> oracle_labels(const std::vector<Tuple>& tuples, const std::vector<std::string>& tokens,
                                       std::size_t& unplaced) {
  std::vector<std::string> labels(tokens.size());
  for (const auto& t : tuples) {
    const auto words = split(t[0], ' ');
    std::size_t start = tokens.size();
    for (std::size_t i = 0; i + words.size() <= tokens.size(); ++i) {
      std::size_t k = 0;
      while (k < words.size() && tokens[i + k] == words[k]) ++k;
      if (k == words.size()) {
        start = i;
        break;
      }
    }
    if (start == tokens.size()) {
      unplaced += words.size();
      continue;
    }
    for (std::size_t k = 0; k < words.size(); ++k) {
      if (labels[start + k].empty()) labels[start + k] = t[1];
    }
  }
  return labels;
}

TEST(TokenF1, MatchesBruteForce) {
  static const std::vector<std::string> kWords = {"the", "food", "staff", "wine", "list", "was", "good"};
  static const std::vector<std::string> kPolarity = {"positive", "negative", "neutral"};
  auto rng = derived_rng(43, "token");
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<SentenceTuples> pred, gold;
    std::vector<TokenizedSentence> sentences;
    std::size_t tp = 0, fp = 0, fn = 0;
    const std::size_t n = 1 + uniform_index(rng, 3);
    for (std::size_t s = 0; s < n; ++s) {
      const auto id = "s" + std::to_string(s);
      std::vector<std::string> tokens(1 + uniform_index(rng, 8));
      for (auto& w : tokens) w = kWords[uniform_index(rng, kWords.size())];
      auto tuples = [&] {
        std::vector<Tuple> out(uniform_index(rng, 4));
        for (auto& t : out) {
          std::string aspect = kWords[1 + uniform_index(rng, 4)];
          if (uniform_unit(rng) < 0.3) aspect += " " + kWords[1 + uniform_index(rng, 4)];
          t = {aspect, kPolarity[uniform_index(rng, 3)]};
        }
        return out;
      };
      const auto p = tuples(), g = tuples();
      std::size_t pu = 0, gu = 0;
      const auto pl = oracle_labels(p, tokens, pu), gl = oracle_labels(g, tokens, gu);
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (!pl[i].empty() && pl[i] == gl[i]) {
          ++tp;
        } else {
          fp += !pl[i].empty();
          fn += !gl[i].empty();
        }
      }
      fp += pu;
      fn += gu;
      pred.push_back({id, p});
      gold.push_back({id, g});
      sentences.push_back({id, tokens});
    }
    const auto r = token_level_f1_aesc(pred, gold, sentences);
    ASSERT_EQ(r.tp, tp);
    ASSERT_EQ(r.fp, fp);
    ASSERT_EQ(r.fn, fn);
  }
}

TEST(TokenF1, MultiwordAspect) {
  const std::vector<std::string> tokens = {"the", "battery", "life", "is", "short"};
  const auto c = token_label_counts(std::vector<Tuple>{{"battery life", "negative"}},
                                    std::vector<Tuple>{{"battery life", "negative"}}, tokens);
  EXPECT_EQ(c, (F1Counts{2, 0, 0}));
  const auto wrong = token_label_counts(std::vector<Tuple>{{"battery", "positive"}},
                                        std::vector<Tuple>{{"battery life", "negative"}}, tokens);
  EXPECT_EQ(wrong, (F1Counts{0, 1, 2}));
}

InstructionExample ex(const std::string& id, TaskKind task, const std::string& target) {
  InstructionExample e;
  e.example_id = make_example_id(id, task);
  e.sentence_id = id;
  e.task = task;
  e.input = "The pizza was great";
  e.target = target;
  return e;
}

TEST(ScoreExamples, PerTaskAndParseFailures) {
  std::vector<InstructionExample> gold{ex("a", TaskKind::kAE, "<pizza>"),
                                       ex("a", TaskKind::kAESC, "<pizza, positive>"),
                                       ex("b", TaskKind::kAE, "<service>")};
  std::vector<InstructionExample> pred{ex("a", TaskKind::kAE, "<pizza>"),
                                       ex("a", TaskKind::kAESC, "pizza is positive"),
                                       ex("b", TaskKind::kAE, "<service>; <wine, list>")};
  const auto r = score_examples(pred, gold, "all", MetricKind::kExact);
  EXPECT_EQ(r.parse_failures, 2u);
  EXPECT_EQ(r.per_task.at("AE"), (F1Counts{2, 0, 0}));
  EXPECT_EQ(r.per_task.at("AESC"), (F1Counts{0, 0, 1}));
  EXPECT_EQ(r.counts(), (F1Counts{2, 0, 1}));

  const auto only = score_examples(pred, gold, "AE", MetricKind::kExact);
  EXPECT_DOUBLE_EQ(only.f1, 1.0);
  const auto tok = score_examples(gold, gold, "AESC", MetricKind::kToken);
  EXPECT_DOUBLE_EQ(tok.f1, 1.0);
  EXPECT_EQ(tok.tp, 1u);
  EXPECT_THROW(score_examples(gold, gold, "ASTE", MetricKind::kToken), ConfigError);
  EXPECT_THROW(parse_metric("fuzzy"), ConfigError);
}

TEST(Report, JsonAndTable) {
  F1Report r = F1Report::from_counts({1, 0, 1});
  r.per_task["ASTE"] = {1, 0, 1};
  const auto j = report_to_json(r);
  EXPECT_DOUBLE_EQ(j["recall"].get<double>(), 0.5);
  EXPECT_EQ(j["per_task"]["ASTE"]["tp"], 1);
  const auto table = format_report_table(r);
  EXPECT_NE(table.find("0.6667"), std::string::npos);
  EXPECT_NE(table.find("micro"), std::string::npos);
}

}  // namespace
}  // namespace weaksmith
