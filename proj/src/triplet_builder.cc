#include "weaksmith/triplet_builder.h"

#include <algorithm>
#include <numeric>
#include <optional>
#include <sstream>

#include "weaksmith/parallel.h"

namespace weaksmith {

using nlohmann::json;

Hypothesis make_hypothesis(const std::string& aspect, const std::string& opinion) {
  return {aspect + " is " + opinion, aspect, opinion};
}

namespace {

struct BatchOutcome {
  std::vector<std::size_t> failed_items;  // indices of items whose batch failed
  std::vector<std::string> errors;
};

// Scores `n` items in batches. score(begin, end) returns verdicts for the
// items [begin, end). Failed batches are retried `retries` times.
template <typename Verdict, typename ScoreFn>
std::vector<std::optional<Verdict>> score_batched(std::size_t n, std::size_t batch,
                                                  std::size_t workers, int retries, ScoreFn score,
                                                  BatchOutcome& outcome) {
  std::vector<std::optional<Verdict>> results(n);
  if (n == 0) return results;
  batch = std::max<std::size_t>(1, batch);
  const std::size_t batches = (n + batch - 1) / batch;
  std::vector<std::string> batch_error(batches);
  parallel_for(batches, workers, [&](std::size_t b) {
    const std::size_t begin = b * batch, end = std::min(n, begin + batch);
    for (int attempt = 0; attempt <= retries; ++attempt) {
      try {
        auto verdicts = score(begin, end);
        if (verdicts.size() != end - begin) throw BackendError("scorer returned wrong arity");
        for (std::size_t i = begin; i < end; ++i) results[i] = verdicts[i - begin];
        batch_error[b].clear();
        return;
      } catch (const std::exception& e) {
        batch_error[b] = e.what();
      }
    }
  });
  for (std::size_t b = 0; b < batches; ++b) {
    if (batch_error[b].empty()) continue;
    outcome.errors.push_back(batch_error[b]);
    for (std::size_t i = b * batch; i < std::min(n, (b + 1) * batch); ++i) outcome.failed_items.push_back(i);
  }
  return results;
}

}  // namespace

std::vector<LinkedPair> link_pairs(const TermAnnotatedSentence& sentence, EntailmentScorer& scorer,
                                   double link_threshold) {
  std::vector<PremiseHypothesis> requests;
  std::vector<Hypothesis> hyps;
  for (const auto& a : sentence.aspects) {
    for (const auto& o : sentence.opinions) {
      hyps.push_back(make_hypothesis(a.surface, o.surface));
      requests.push_back({sentence.sentence.text, hyps.back().text});
    }
  }
  BatchOutcome outcome;
  auto verdicts = score_batched<EntailmentVerdict>(
      requests.size(), requests.size(), 1, 1,
      [&](std::size_t b, std::size_t e) {
        return scorer.score_entailment_batch(std::span(requests).subspan(b, e - b));
      },
      outcome);
  if (!outcome.errors.empty()) throw ScorerStageError(sentence.sentence.sentence_id, outcome.errors.front());
  std::vector<LinkedPair> out;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    if (verdicts[i]->entailment >= link_threshold) {
      out.push_back({hyps[i].aspect, hyps[i].opinion, verdicts[i]->entailment});
    }
  }
  return out;
}

SentimentResult assign_sentiment(const std::string& sentence_id, std::span<const LinkedPair> pairs,
                                 SentimentScorer& scorer, double sentiment_threshold) {
  std::vector<std::string> texts;
  for (const auto& p : pairs) texts.push_back(make_hypothesis(p.aspect, p.opinion).text);
  BatchOutcome outcome;
  auto verdicts = score_batched<SentimentVerdict>(
      texts.size(), texts.size(), 1, 1,
      [&](std::size_t b, std::size_t e) {
        return scorer.score_sentiment_batch(std::span(texts).subspan(b, e - b));
      },
      outcome);
  if (!outcome.errors.empty()) throw ScorerStageError(sentence_id, outcome.errors.front());
  SentimentResult r;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& v = *verdicts[i];
    if (v.confidence >= sentiment_threshold) {
      r.triplets.push_back({sentence_id, pairs[i].aspect, pairs[i].opinion, v.label,
                            pairs[i].entail_score, v.confidence});
    } else {
      ++r.discarded;
    }
  }
  return r;
}

PipelineResult run_pipeline(std::span<const TaggedSentence> sentences,
                            const CandidateVocabulary& vocab, const OpinionLexicon& lexicon,
                            EntailmentScorer& entailment, SentimentScorer& sentiment,
                            const PipelineConfig& config) {
  PipelineResult result;
  auto& stats = result.stats;
  stats.input_sentences = sentences.size();

  // Steps 1-2: term extraction and the two sentence filters.
  std::vector<TermAnnotatedSentence> annotated(sentences.size());
  parallel_for(sentences.size(), config.workers, [&](std::size_t i) {
    annotated[i] = annotate_terms(sentences[i], vocab, lexicon, config.negation);
  });
  auto filtered = filter_sentences(std::move(annotated));
  stats.no_aspect = filtered.no_aspect;
  stats.no_opinion = filtered.no_opinion;
  const auto& kept = filtered.kept;

  // Step 3: every aspect x opinion hypothesis, premise = the sentence.
  struct PairRef {
    std::size_t sentence;
    Hypothesis hyp;
  };
  std::vector<PairRef> pairs;
  std::vector<PremiseHypothesis> requests;
  for (std::size_t s = 0; s < kept.size(); ++s) {
    for (const auto& a : kept[s].aspects) {
      for (const auto& o : kept[s].opinions) {
        pairs.push_back({s, make_hypothesis(a.surface, o.surface)});
        requests.push_back({kept[s].sentence.text, pairs.back().hyp.text});
      }
    }
  }
  stats.pairs_scored = pairs.size();

  std::vector<bool> failed(kept.size(), false);
  BatchOutcome link_outcome;
  auto entail_verdicts = score_batched<EntailmentVerdict>(
      requests.size(), config.batch, config.workers, config.scorer_retries,
      [&](std::size_t b, std::size_t e) {
        return entailment.score_entailment_batch(std::span(requests).subspan(b, e - b));
      },
      link_outcome);
  for (auto i : link_outcome.failed_items) failed[pairs[i].sentence] = true;
  for (const auto& e : link_outcome.errors) result.warnings.push_back("entailment: " + e);

  std::vector<std::size_t> linked;  // indices into pairs
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (failed[pairs[i].sentence]) continue;
    if (entail_verdicts[i]->entailment >= config.link_threshold) linked.push_back(i);
  }
  stats.pairs_linked = linked.size();

  // Step 4: sentiment of the hypothesis text.
  std::vector<std::string> texts;
  texts.reserve(linked.size());
  for (auto i : linked) texts.push_back(pairs[i].hyp.text);
  BatchOutcome sent_outcome;
  auto sent_verdicts = score_batched<SentimentVerdict>(
      texts.size(), config.batch, config.workers, config.scorer_retries,
      [&](std::size_t b, std::size_t e) {
        return sentiment.score_sentiment_batch(std::span(texts).subspan(b, e - b));
      },
      sent_outcome);
  for (auto k : sent_outcome.failed_items) failed[pairs[linked[k]].sentence] = true;
  for (const auto& e : sent_outcome.errors) result.warnings.push_back("sentiment: " + e);

  std::vector<std::vector<NoisyTriplet>> per_sentence(kept.size());
  std::vector<bool> had_link(kept.size(), false);
  for (std::size_t k = 0; k < linked.size(); ++k) {
    const auto& p = pairs[linked[k]];
    if (failed[p.sentence]) continue;
    had_link[p.sentence] = true;
    const auto& v = *sent_verdicts[k];
    if (v.confidence < config.sentiment_threshold) {
      ++stats.pairs_below_sentiment;
      continue;
    }
    per_sentence[p.sentence].push_back({kept[p.sentence].sentence.sentence_id, p.hyp.aspect,
                                        p.hyp.opinion, v.label, entail_verdicts[linked[k]]->entailment,
                                        v.confidence});
  }

  std::vector<std::size_t> order;
  for (std::size_t s = 0; s < kept.size(); ++s) {
    if (failed[s]) {
      ++stats.scorer_failures;
    } else if (!had_link[s]) {
      ++stats.no_link;
    } else if (per_sentence[s].empty()) {
      ++stats.no_sentiment;
    } else {
      order.push_back(s);
    }
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sentence_id_less(kept[a].sentence.sentence_id, kept[b].sentence.sentence_id);
  });
  for (auto s : order) {
    const auto& src = kept[s].sentence;
    stats.triplets += per_sentence[s].size();
    result.records.push_back({src.sentence_id, src.domain, src.text, std::move(per_sentence[s])});
  }
  stats.output_sentences = result.records.size();
  return result;
}

std::string triplet_record_to_json(const TripletRecord& r) {
  std::string out = "{\"sentence_id\":" + json(r.sentence_id).dump() +
                    ",\"domain\":" + json(r.domain).dump() + ",\"text\":" + json(r.text).dump() +
                    ",\"triplets\":[";
  for (std::size_t i = 0; i < r.triplets.size(); ++i) {
    const auto& t = r.triplets[i];
    if (i) out += ',';
    out += "{\"aspect\":" + json(t.aspect).dump() + ",\"opinion\":" + json(t.opinion).dump() +
           ",\"sentiment\":\"" + std::string(to_string(t.sentiment)) +
           "\",\"entail_score\":" + format_score(t.entail_score) +
           ",\"sentiment_confidence\":" + format_score(t.sentiment_confidence) + "}";
  }
  out += "]}";
  return out;
}

std::string triplets_to_jsonl(const std::vector<TripletRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += triplet_record_to_json(r);
    out += '\n';
  }
  return out;
}

std::vector<TripletRecord> parse_triplets_jsonl(std::string_view contents) {
  std::vector<TripletRecord> out;
  std::size_t lineno = 0;
  for (const auto& line : split(contents, '\n')) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      TripletRecord r;
      j.at("sentence_id").get_to(r.sentence_id);
      r.domain = j.value("domain", "");
      j.at("text").get_to(r.text);
      for (const auto& t : j.at("triplets")) {
        r.triplets.push_back({r.sentence_id, t.at("aspect").get<std::string>(),
                              t.at("opinion").get<std::string>(),
                              parse_polarity(t.at("sentiment").get<std::string>()),
                              t.value("entail_score", 1.0), t.value("sentiment_confidence", 1.0)});
      }
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ParseError(std::string("triplet record: ") + e.what(), lineno);
    }
  }
  return out;
}

std::vector<TripletRecord> read_triplets_jsonl(const std::string& path) {
  return parse_triplets_jsonl(read_file(path));
}

}  // namespace weaksmith
