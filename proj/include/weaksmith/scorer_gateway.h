#pragma once

#include <cstddef>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "weaksmith/common.h"
#include "weaksmith/term_miner.h"

namespace weaksmith {

// A three-way NLI distribution; components lie in [0, 1] and sum to 1 +- 1e-6.
struct EntailmentVerdict {
  double entailment = 0.0;
  double neutral = 0.0;
  double contradiction = 0.0;
  bool operator==(const EntailmentVerdict&) const = default;
};

struct SentimentVerdict {
  Polarity label = Polarity::kPositive;
  double confidence = 0.0;
  bool operator==(const SentimentVerdict&) const = default;
};

struct PremiseHypothesis {
  std::string premise;
  std::string hypothesis;
};

// Remote service answered with a non-200 status, bad JSON, or the wrong arity.
class BackendError : public Error {
 public:
  using Error::Error;
};

class TimeoutError : public BackendError {
 public:
  using BackendError::BackendError;
};

// Caller passed an empty batch or an empty premise, hypothesis or text.
class InputError : public Error {
 public:
  using Error::Error;
};

class EntailmentScorer {
 public:
  virtual ~EntailmentScorer() = default;
  // One verdict per pair, in input order.
  virtual std::vector<EntailmentVerdict> score_entailment_batch(
      std::span<const PremiseHypothesis> pairs) = 0;
};

class SentimentScorer {
 public:
  virtual ~SentimentScorer() = default;
  virtual std::vector<SentimentVerdict> score_sentiment_batch(std::span<const std::string> texts) = 0;
};

void check_verdict(const EntailmentVerdict& v);
void check_verdict(const SentimentVerdict& v);

// Lowercased word sets of the clauses of `premise`, split at ',' ';' and the
// standalone words "but" / "and". Empty clauses are dropped.
std::vector<std::set<std::string>> stub_clause_split(std::string_view premise);

// Deterministic stand-in for both models.
//  - entailment is 1 when every word of the hypothesis' aspect and opinion
//    ("<aspect> is <opinion>") occurs in one premise clause, else 0 (neutral 1);
//  - sentiment is the lexicon polarity of the opinion word with confidence 1,
//    flipped by a preceding negator; unknown words get confidence 0.
class StubScorer : public EntailmentScorer, public SentimentScorer {
 public:
  explicit StubScorer(OpinionLexicon lexicon, NegationOptions negation = {})
      : lexicon_(std::move(lexicon)), negation_(std::move(negation)) {}

  std::vector<EntailmentVerdict> score_entailment_batch(
      std::span<const PremiseHypothesis> pairs) override;
  std::vector<SentimentVerdict> score_sentiment_batch(std::span<const std::string> texts) override;

  EntailmentVerdict entail(std::string_view premise, std::string_view hypothesis) const;
  SentimentVerdict classify(std::string_view text) const;

 private:
  OpinionLexicon lexicon_;
  NegationOptions negation_;
};

struct RemoteConfig {
  std::string url;  // "http://host:port"
  double timeout_s = 30.0;
  std::size_t batch = 32;
  std::size_t inflight = 4;
};

struct HealthInfo {
  std::string status;
  std::string nli_model;
  std::string sentiment_model;
};

// JSON-over-HTTP client for the scorer service:
//   POST /v1/entailment {"pairs":[{"premise","hypothesis"}]} -> {"scores":[...]}
//   POST /v1/sentiment  {"texts":[...]} -> {"predictions":[{"label","confidence"}]}
//   GET  /v1/health -> {"status":"ok","models":{"nli","sentiment"}}
// Batches larger than config.batch are chunked; at most config.inflight
// requests run at once across all threads sharing the client.
class RemoteScorer : public EntailmentScorer, public SentimentScorer {
 public:
  explicit RemoteScorer(RemoteConfig config);
  ~RemoteScorer() override;

  std::vector<EntailmentVerdict> score_entailment_batch(
      std::span<const PremiseHypothesis> pairs) override;
  std::vector<SentimentVerdict> score_sentiment_batch(std::span<const std::string> texts) override;
  HealthInfo health();

  const RemoteConfig& config() const { return config_; }

 private:
  struct Impl;
  nlohmann::json post(const std::string& path, const nlohmann::json& body);

  RemoteConfig config_;
  std::unique_ptr<Impl> impl_;
};

void to_json(nlohmann::json& j, const EntailmentVerdict& v);
void from_json(const nlohmann::json& j, EntailmentVerdict& v);
void to_json(nlohmann::json& j, const SentimentVerdict& v);
void from_json(const nlohmann::json& j, SentimentVerdict& v);

nlohmann::json entailment_request(std::span<const PremiseHypothesis> pairs);
nlohmann::json sentiment_request(std::span<const std::string> texts);
// Throw BackendError on schema violations, invalid verdicts or arity mismatch.
std::vector<EntailmentVerdict> parse_entailment_response(const nlohmann::json& body,
                                                         std::size_t expected);
std::vector<SentimentVerdict> parse_sentiment_response(const nlohmann::json& body,
                                                       std::size_t expected);

}  // namespace weaksmith
