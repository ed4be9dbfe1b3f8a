#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "weaksmith/common.h"
#include "weaksmith/scorer_gateway.h"
#include "weaksmith/term_miner.h"
#include "weaksmith/text_ingest.h"

namespace weaksmith {

struct NoisyTriplet {
  std::string sentence_id;
  std::string aspect;
  std::string opinion;
  Polarity sentiment = Polarity::kPositive;
  double entail_score = 0.0;
  double sentiment_confidence = 0.0;
  bool operator==(const NoisyTriplet&) const = default;
};

// "<aspect> is <opinion>", verbatim: no number agreement, negators kept.
struct Hypothesis {
  std::string text;
  std::string aspect;
  std::string opinion;
};

Hypothesis make_hypothesis(const std::string& aspect, const std::string& opinion);

struct LinkedPair {
  std::string aspect;
  std::string opinion;
  double entail_score = 0.0;
};

// A scorer kept failing for this sentence after its retry.
class ScorerStageError : public Error {
 public:
  ScorerStageError(const std::string& sentence_id, const std::string& cause)
      : Error("scorer failed for sentence " + sentence_id + ": " + cause), sentence_id_(sentence_id) {}
  const std::string& sentence_id() const { return sentence_id_; }

 private:
  std::string sentence_id_;
};

// Scores every aspect x opinion hypothesis against the sentence text and keeps
// pairs with entail_score >= link_threshold.
std::vector<LinkedPair> link_pairs(const TermAnnotatedSentence& sentence, EntailmentScorer& scorer,
                                   double link_threshold = 0.75);

struct SentimentResult {
  std::vector<NoisyTriplet> triplets;
  std::size_t discarded = 0;
};

// Classifies each pair's hypothesis; keeps those with confidence >= threshold.
SentimentResult assign_sentiment(const std::string& sentence_id, std::span<const LinkedPair> pairs,
                                 SentimentScorer& scorer, double sentiment_threshold = 0.75);

struct PipelineConfig {
  double link_threshold = 0.75;
  double sentiment_threshold = 0.75;
  NegationOptions negation;
  std::size_t batch = 32;
  std::size_t workers = 1;
  int scorer_retries = 1;
};

// Attrition per step; sentence counts unless named pairs/triplets.
struct PipelineStats {
  std::size_t input_sentences = 0;
  std::size_t no_aspect = 0;
  std::size_t no_opinion = 0;
  std::size_t pairs_scored = 0;
  std::size_t pairs_linked = 0;
  std::size_t no_link = 0;
  std::size_t pairs_below_sentiment = 0;
  std::size_t no_sentiment = 0;
  std::size_t scorer_failures = 0;
  std::size_t output_sentences = 0;
  std::size_t triplets = 0;
};

struct TripletRecord {
  std::string sentence_id;
  std::string domain;
  std::string text;
  std::vector<NoisyTriplet> triplets;
};

struct PipelineResult {
  std::vector<TripletRecord> records;  // ordered by sentence id
  PipelineStats stats;
  std::vector<std::string> warnings;
};

// Aspect extraction, opinion extraction, entailment linking and sentiment
// assignment. Pairs are scored in batches of config.batch across sentences;
// a failing batch is retried config.scorer_retries times, after which its
// sentences are dropped and counted as scorer failures.
PipelineResult run_pipeline(std::span<const TaggedSentence> sentences,
                            const CandidateVocabulary& vocab, const OpinionLexicon& lexicon,
                            EntailmentScorer& entailment, SentimentScorer& sentiment,
                            const PipelineConfig& config = {});

// {"sentence_id","domain","text","triplets":[{"aspect","opinion","sentiment",
// "entail_score","sentiment_confidence"}]}, scores with six decimals.
std::string triplet_record_to_json(const TripletRecord& record);
std::string triplets_to_jsonl(const std::vector<TripletRecord>& records);
std::vector<TripletRecord> read_triplets_jsonl(const std::string& path);
std::vector<TripletRecord> parse_triplets_jsonl(std::string_view contents);

}  // namespace weaksmith
