#include "weaksmith/scorer_gateway.h"

#include <chrono>
#include <cmath>
#include <future>
#include <semaphore>

#include "httplib.h"
#include "weaksmith/text_ingest.h"

namespace weaksmith {

using nlohmann::json;

void check_verdict(const EntailmentVerdict& v) {
  for (double p : {v.entailment, v.neutral, v.contradiction}) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) throw BackendError("entailment probability outside [0,1]");
  }
  if (std::abs(v.entailment + v.neutral + v.contradiction - 1.0) > 1e-6) {
    throw BackendError("entailment distribution does not sum to 1");
  }
}

void check_verdict(const SentimentVerdict& v) {
  if (!std::isfinite(v.confidence) || v.confidence < 0.0 || v.confidence > 1.0) {
    throw BackendError("sentiment confidence outside [0,1]");
  }
}

namespace {

std::vector<std::string> lower_words(std::string_view text) {
  std::vector<std::string> out;
  for (auto& tok : tokenize(text)) {
    const auto c = static_cast<unsigned char>(tok.text.front());
    if (std::isalnum(c) || c >= 0x80) out.push_back(to_lower(tok.text));
  }
  return out;
}

// "<aspect> is <opinion>" -> (aspect, opinion); empty aspect when " is " is absent.
std::pair<std::string_view, std::string_view> split_hypothesis(std::string_view h) {
  const auto at = h.find(" is ");
  if (at == std::string_view::npos) return {{}, h};
  return {h.substr(0, at), h.substr(at + 4)};
}

}  // namespace

std::vector<std::set<std::string>> stub_clause_split(std::string_view premise) {
  std::vector<std::set<std::string>> clauses(1);
  for (auto& tok : tokenize(premise)) {
    const std::string lower = to_lower(tok.text);
    if (tok.text.front() == ',' || tok.text.front() == ';' || lower == "but" || lower == "and") {
      clauses.emplace_back();
      continue;
    }
    const auto c = static_cast<unsigned char>(tok.text.front());
    if (std::isalnum(c) || c >= 0x80) clauses.back().insert(lower);
  }
  std::erase_if(clauses, [](const auto& c) { return c.empty(); });
  return clauses;
}

EntailmentVerdict StubScorer::entail(std::string_view premise, std::string_view hypothesis) const {
  if (trim(premise).empty()) throw InputError("empty premise");
  if (trim(hypothesis).empty()) throw InputError("empty hypothesis");
  const auto [aspect, opinion] = split_hypothesis(hypothesis);
  auto needed = lower_words(aspect);
  const auto opinion_words = lower_words(opinion);
  if (needed.empty() || opinion_words.empty()) return {0.0, 1.0, 0.0};
  needed.insert(needed.end(), opinion_words.begin(), opinion_words.end());
  for (const auto& clause : stub_clause_split(premise)) {
    bool all = true;
    for (const auto& w : needed) {
      if (!clause.count(w)) {
        all = false;
        break;
      }
    }
    if (all) return {1.0, 0.0, 0.0};
  }
  return {0.0, 1.0, 0.0};
}

SentimentVerdict StubScorer::classify(std::string_view text) const {
  if (trim(text).empty()) throw InputError("empty text");
  const auto words = lower_words(split_hypothesis(text).second);
  for (std::size_t i = words.size(); i-- > 0;) {
    auto polarity = lexicon_.polarity(words[i]);
    if (!polarity) continue;
    bool negated = false;
    for (std::size_t j = 0; j < i; ++j) negated = negated || negation_.negators.count(words[j]) > 0;
    if (negated) {
      polarity = *polarity == Polarity::kPositive ? Polarity::kNegative : Polarity::kPositive;
    }
    return {*polarity, 1.0};
  }
  return {Polarity::kPositive, 0.0};
}

std::vector<EntailmentVerdict> StubScorer::score_entailment_batch(
    std::span<const PremiseHypothesis> pairs) {
  if (pairs.empty()) throw InputError("empty batch");
  std::vector<EntailmentVerdict> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(entail(p.premise, p.hypothesis));
  return out;
}

std::vector<SentimentVerdict> StubScorer::score_sentiment_batch(std::span<const std::string> texts) {
  if (texts.empty()) throw InputError("empty batch");
  std::vector<SentimentVerdict> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(classify(t));
  return out;
}

void to_json(json& j, const EntailmentVerdict& v) {
  j = json{{"entailment", v.entailment}, {"neutral", v.neutral}, {"contradiction", v.contradiction}};
}

void from_json(const json& j, EntailmentVerdict& v) {
  j.at("entailment").get_to(v.entailment);
  j.at("neutral").get_to(v.neutral);
  j.at("contradiction").get_to(v.contradiction);
}

void to_json(json& j, const SentimentVerdict& v) {
  j = json{{"label", to_string(v.label)}, {"confidence", v.confidence}};
}

void from_json(const json& j, SentimentVerdict& v) {
  v.label = parse_polarity(j.at("label").get<std::string>());
  j.at("confidence").get_to(v.confidence);
}

json entailment_request(std::span<const PremiseHypothesis> pairs) {
  json arr = json::array();
  for (const auto& p : pairs) arr.push_back({{"premise", p.premise}, {"hypothesis", p.hypothesis}});
  return json{{"pairs", std::move(arr)}};
}

json sentiment_request(std::span<const std::string> texts) {
  return json{{"texts", std::vector<std::string>(texts.begin(), texts.end())}};
}

namespace {

template <typename Verdict>
std::vector<Verdict> parse_array(const json& body, const char* field, std::size_t expected) {
  if (!body.is_object() || !body.contains(field) || !body.at(field).is_array()) {
    throw BackendError(std::string("response lacks array '") + field + "'");
  }
  const auto& arr = body.at(field);
  if (arr.size() != expected) {
    throw BackendError("response arity " + std::to_string(arr.size()) + " != request arity " +
                       std::to_string(expected));
  }
  std::vector<Verdict> out;
  out.reserve(arr.size());
  for (const auto& item : arr) {
    Verdict v;
    try {
      v = item.get<Verdict>();
    } catch (const std::exception& e) {
      throw BackendError(std::string("malformed ") + field + " entry: " + e.what());
    }
    check_verdict(v);
    out.push_back(v);
  }
  return out;
}

}  // namespace

std::vector<EntailmentVerdict> parse_entailment_response(const json& body, std::size_t expected) {
  return parse_array<EntailmentVerdict>(body, "scores", expected);
}

std::vector<SentimentVerdict> parse_sentiment_response(const json& body, std::size_t expected) {
  return parse_array<SentimentVerdict>(body, "predictions", expected);
}

struct RemoteScorer::Impl {
  explicit Impl(std::size_t inflight)
      : slots(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, inflight))) {}
  std::counting_semaphore<1024> slots;
};

RemoteScorer::RemoteScorer(RemoteConfig config) : config_(std::move(config)) {
  if (config_.url.rfind("http://", 0) != 0) {
    throw ConfigError("scorer.url must start with http:// (got '" + config_.url + "')");
  }
  while (!config_.url.empty() && config_.url.back() == '/') config_.url.pop_back();
  if (!(config_.timeout_s > 0.0)) throw ConfigError("scorer.timeout_s must be positive");
  if (config_.batch == 0) throw ConfigError("scorer.batch must be positive");
  if (config_.inflight == 0 || config_.inflight > 1024) {
    throw ConfigError("scorer.inflight must be in 1..1024");
  }
  impl_ = std::make_unique<Impl>(config_.inflight);
}

RemoteScorer::~RemoteScorer() = default;

namespace {

void configure(httplib::Client& client, double timeout_s) {
  const auto usec = std::chrono::microseconds(static_cast<long long>(timeout_s * 1e6));
  const auto sec = std::chrono::duration_cast<std::chrono::seconds>(usec);
  const auto rest = (usec - sec).count();
  client.set_connection_timeout(sec.count(), rest);
  client.set_read_timeout(sec.count(), rest);
  client.set_write_timeout(sec.count(), rest);
}

std::string excerpt(const std::string& body) {
  return body.size() <= 200 ? body : body.substr(0, 200) + "...";
}

[[noreturn]] void raise_transport(httplib::Error err, const std::string& where, double elapsed_s,
                                  double timeout_s) {
  const std::string what = where + ": " + httplib::to_string(err);
  if (err == httplib::Error::ConnectionTimeout ||
      ((err == httplib::Error::Read || err == httplib::Error::Write) && elapsed_s >= 0.9 * timeout_s)) {
    throw TimeoutError(what + " (timeout " + std::to_string(timeout_s) + " s)");
  }
  throw BackendError(what);
}

}  // namespace

json RemoteScorer::post(const std::string& path, const json& body) {
  impl_->slots.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{impl_->slots};

  httplib::Client client(config_.url);
  configure(client, config_.timeout_s);
  const auto start = std::chrono::steady_clock::now();
  auto res = client.Post(path, body.dump(), "application/json");
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!res) raise_transport(res.error(), "POST " + path, elapsed, config_.timeout_s);
  if (res->status != 200) {
    throw BackendError("POST " + path + " returned " + std::to_string(res->status) + ": " +
                       excerpt(res->body));
  }
  json parsed = json::parse(res->body, nullptr, false);
  if (parsed.is_discarded()) throw BackendError("POST " + path + " returned malformed JSON: " + excerpt(res->body));
  return parsed;
}

namespace {

// Splits [0, n) into chunks of `batch`, runs fn(begin, end) for each chunk
// concurrently, and concatenates the results in chunk order.
template <typename Verdict, typename Fn>
std::vector<Verdict> chunked(std::size_t n, std::size_t batch, Fn fn) {
  std::vector<std::future<std::vector<Verdict>>> futures;
  for (std::size_t b = 0; b < n; b += batch) {
    const std::size_t e = std::min(n, b + batch);
    futures.push_back(std::async(std::launch::async, fn, b, e));
  }
  std::vector<Verdict> out;
  out.reserve(n);
  std::exception_ptr first_error;
  for (auto& f : futures) {
    try {
      auto part = f.get();
      out.insert(out.end(), part.begin(), part.end());
    } catch (...) {
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

}  // namespace

std::vector<EntailmentVerdict> RemoteScorer::score_entailment_batch(
    std::span<const PremiseHypothesis> pairs) {
  if (pairs.empty()) throw InputError("empty batch");
  for (const auto& p : pairs) {
    if (trim(p.premise).empty()) throw InputError("empty premise");
    if (trim(p.hypothesis).empty()) throw InputError("empty hypothesis");
  }
  return chunked<EntailmentVerdict>(pairs.size(), config_.batch, [&](std::size_t b, std::size_t e) {
    auto part = pairs.subspan(b, e - b);
    return parse_entailment_response(post("/v1/entailment", entailment_request(part)), part.size());
  });
}

std::vector<SentimentVerdict> RemoteScorer::score_sentiment_batch(std::span<const std::string> texts) {
  if (texts.empty()) throw InputError("empty batch");
  for (const auto& t : texts) {
    if (trim(t).empty()) throw InputError("empty text");
  }
  return chunked<SentimentVerdict>(texts.size(), config_.batch, [&](std::size_t b, std::size_t e) {
    auto part = texts.subspan(b, e - b);
    return parse_sentiment_response(post("/v1/sentiment", sentiment_request(part)), part.size());
  });
}

HealthInfo RemoteScorer::health() {
  httplib::Client client(config_.url);
  configure(client, config_.timeout_s);
  const auto start = std::chrono::steady_clock::now();
  auto res = client.Get("/v1/health");
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!res) raise_transport(res.error(), "GET /v1/health", elapsed, config_.timeout_s);
  if (res->status != 200) {
    throw BackendError("GET /v1/health returned " + std::to_string(res->status) + ": " + excerpt(res->body));
  }
  try {
    const json j = json::parse(res->body);
    HealthInfo h;
    j.at("status").get_to(h.status);
    if (j.contains("models")) {
      h.nli_model = j.at("models").value("nli", "");
      h.sentiment_model = j.at("models").value("sentiment", "");
    }
    return h;
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed health response: ") + e.what());
  }
}

}  // namespace weaksmith
