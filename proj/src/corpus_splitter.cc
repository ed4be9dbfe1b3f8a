#include "weaksmith/corpus_splitter.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace weaksmith {

using nlohmann::json;

std::vector<SplitItem> split_items(std::span<const TripletRecord> records) {
  std::vector<SplitItem> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    SplitItem item{r.sentence_id, {}, {}};
    std::set<std::string> seen_a, seen_o;
    for (const auto& t : r.triplets) {
      if (seen_a.insert(t.aspect).second) item.aspects.push_back(t.aspect);
      if (seen_o.insert(t.opinion).second) item.opinions.push_back(t.opinion);
    }
    out.push_back(std::move(item));
  }
  return out;
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }
  std::size_t size_of(std::size_t x) { return size_[find(x)]; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

}  // namespace

SplitManifest disjoint_split(std::span<const SplitItem> corpus, const SplitOptions& options) {
  if (!(options.val_fraction > 0.0 && options.val_fraction < 1.0)) {
    throw ConfigError("val_fraction must be in (0, 1)");
  }
  if (corpus.empty()) throw Error("cannot split an empty corpus");
  const std::size_t n = corpus.size();
  {
    std::unordered_set<std::string> ids;
    for (const auto& item : corpus) {
      if (!ids.insert(item.sentence_id).second) throw Error("duplicate sentence_id " + item.sentence_id);
    }
  }

  // Group sentences connected through a shared aspect (or opinion) term.
  DisjointSets groups(n);
  std::map<std::string, std::size_t> aspect_first, opinion_first;
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& a : corpus[i].aspects) {
      auto [it, inserted] = aspect_first.emplace(a, i);
      if (!inserted) groups.unite(it->second, i);
    }
    if (!options.opinion_disjoint) continue;
    for (const auto& o : corpus[i].opinions) {
      auto [it, inserted] = opinion_first.emplace(o, i);
      if (!inserted) groups.unite(it->second, i);
    }
  }

  std::vector<std::string> terms;
  terms.reserve(aspect_first.size());
  for (const auto& [term, first] : aspect_first) terms.push_back(term);
  auto rng = derived_rng(options.seed, "disjoint_split");
  stable_shuffle(terms, rng);

  const auto budget = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(options.val_fraction * static_cast<double>(n) - 1e-9)));
  std::set<std::size_t> val_groups, decided;
  std::size_t val_count = 0;
  SplitManifest m;
  m.seed = options.seed;
  m.target_val_fraction = options.val_fraction;
  m.opinion_disjoint = options.opinion_disjoint;

  std::size_t smallest_group = n, smallest_size = n;
  for (const auto& term : terms) {
    if (val_count >= budget) break;
    const std::size_t root = groups.find(aspect_first.at(term));
    if (!decided.insert(root).second) continue;
    const std::size_t size = groups.size_of(root);
    if (val_count + size <= budget) {
      val_groups.insert(root);
      val_count += size;
    } else if (size < smallest_size) {
      smallest_group = root;
      smallest_size = size;
    }
  }
  if (val_count == 0) {
    if (smallest_group != n && smallest_size < n) {
      val_groups.insert(smallest_group);
      m.warnings.push_back("no term group fits the validation budget of " + std::to_string(budget) +
                           " sentences; using the smallest group (" + std::to_string(smallest_size) +
                           " sentences)");
    } else {
      m.warnings.push_back(
          "every sentence is connected through shared terms; validation split is empty");
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sentence_id_less(corpus[a].sentence_id, corpus[b].sentence_id);
  });
  for (auto i : order) {
    const auto& item = corpus[i];
    const bool val = val_groups.count(groups.find(i)) > 0;
    (val ? m.val_ids : m.train_ids).push_back(item.sentence_id);
    auto& aspects = val ? m.val_aspects : m.train_aspects;
    auto& opinions = val ? m.val_opinions : m.train_opinions;
    aspects.insert(item.aspects.begin(), item.aspects.end());
    opinions.insert(item.opinions.begin(), item.opinions.end());
  }
  return m;
}

std::string_view to_string(KShotAttribute a) {
  return a == KShotAttribute::kSentiment ? "sentiment" : "aspect_category";
}

KShotAttribute parse_kshot_attribute(std::string_view name) {
  if (name == "sentiment") return KShotAttribute::kSentiment;
  if (name == "aspect_category") return KShotAttribute::kAspectCategory;
  throw ConfigError("k-shot attribute must be 'sentiment' or 'aspect_category'");
}

std::set<std::string> attribute_values(const GoldExample& example, KShotAttribute attribute) {
  std::set<std::string> values;
  if (attribute == KShotAttribute::kAspectCategory) {
    if (!example.category.empty()) values.insert(example.category);
    return values;
  }
  for (const auto& t : example.tuples) {
    if (!t.empty()) values.insert(t.back());
  }
  return values;
}

KShotManifest kshot_sample(std::span<const GoldExample> examples, std::size_t k,
                           KShotAttribute attribute, std::uint64_t seed) {
  if (k == 0) throw ConfigError("k must be positive");
  KShotManifest m;
  m.k = k;
  m.attribute = attribute;
  m.seed = seed;

  std::vector<std::set<std::string>> values(examples.size());
  std::map<std::string, std::size_t> available;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    values[i] = attribute_values(examples[i], attribute);
    for (const auto& v : values[i]) ++available[v];
  }

  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  auto rng = derived_rng(seed, "kshot");
  stable_shuffle(order, rng);

  std::vector<bool> selected(examples.size(), false);
  std::map<std::string, std::size_t> counts;
  for (const auto& [value, avail] : available) {
    for (auto i : order) {
      if (counts[value] >= k) break;
      if (selected[i] || !values[i].count(value)) continue;
      selected[i] = true;
      m.selected_ids.push_back(examples[i].sentence_id);
      for (const auto& v : values[i]) ++counts[v];
    }
    if (avail < k) m.deficient[value] = avail;
  }
  for (const auto& [value, c] : counts) {
    if (c > 0) m.per_value_counts[value] = c;
  }
  return m;
}

namespace {

Tuple tuple_from_json(const json& t) {
  if (t.is_array()) return t.get<Tuple>();
  if (t.is_string()) {
    const auto text = t.get<std::string>();
    auto s = trim(text);
    if (s.size() >= 2 && s.front() == '<' && s.back() == '>') s = s.substr(1, s.size() - 2);
    Tuple out;
    for (const auto& f : split(s, ',')) out.emplace_back(trim(f));
    return out;
  }
  throw ParseError("tuple must be an array of strings or a \"<a, b, ...>\" string");
}

}  // namespace

std::vector<GoldExample> parse_gold_jsonl(std::string_view contents) {
  std::vector<GoldExample> out;
  std::size_t lineno = 0;
  for (const auto& line : split(contents, '\n')) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      GoldExample g;
      j.at("sentence_id").get_to(g.sentence_id);
      g.text = j.value("text", "");
      for (const auto& t : j.at("tuples")) g.tuples.push_back(tuple_from_json(t));
      if (j.contains("category") && j.at("category").is_string()) j.at("category").get_to(g.category);
      out.push_back(std::move(g));
    } catch (const json::exception& e) {
      throw ParseError(std::string("gold record: ") + e.what(), lineno);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return out;
}

std::vector<GoldExample> read_gold_jsonl(const std::string& path) {
  return parse_gold_jsonl(read_file(path));
}

void to_json(json& j, const SplitManifest& m) {
  j = json{{"train_ids", m.train_ids},
           {"val_ids", m.val_ids},
           {"train_aspects", m.train_aspects},
           {"val_aspects", m.val_aspects},
           {"train_opinions", m.train_opinions},
           {"val_opinions", m.val_opinions},
           {"seed", m.seed},
           {"target_val_fraction", m.target_val_fraction},
           {"opinion_disjoint", m.opinion_disjoint},
           {"warnings", m.warnings}};
}

void from_json(const json& j, SplitManifest& m) {
  j.at("train_ids").get_to(m.train_ids);
  j.at("val_ids").get_to(m.val_ids);
  j.at("train_aspects").get_to(m.train_aspects);
  j.at("val_aspects").get_to(m.val_aspects);
  j.at("train_opinions").get_to(m.train_opinions);
  j.at("val_opinions").get_to(m.val_opinions);
  j.at("seed").get_to(m.seed);
  j.at("target_val_fraction").get_to(m.target_val_fraction);
  m.opinion_disjoint = j.value("opinion_disjoint", true);
  m.warnings = j.value("warnings", std::vector<std::string>{});
}

void to_json(json& j, const KShotManifest& m) {
  j = json{{"k", m.k},
           {"attribute", to_string(m.attribute)},
           {"seed", m.seed},
           {"selected_ids", m.selected_ids},
           {"per_value_counts", m.per_value_counts},
           {"deficient", m.deficient}};
}

}  // namespace weaksmith
