#include "weaksmith/task_forge.h"

#include <algorithm>
#include <set>
#include <sstream>

namespace weaksmith {

using nlohmann::json;

std::string_view to_string(TaskKind task) {
  switch (task) {
    case TaskKind::kAE:
      return "AE";
    case TaskKind::kOE:
      return "OE";
    case TaskKind::kAOE:
      return "AOE";
    case TaskKind::kAESC:
      return "AESC";
    case TaskKind::kASTE:
      return "ASTE";
  }
  return "?";
}

TaskKind parse_task(std::string_view name) {
  for (auto t : kAllTasks) {
    if (to_string(t) == name) return t;
  }
  throw ConfigError("unknown task '" + std::string(name) + "' (expected AE, OE, AOE, AESC or ASTE)");
}

std::size_t task_arity(TaskKind task) {
  switch (task) {
    case TaskKind::kAE:
    case TaskKind::kOE:
      return 1;
    case TaskKind::kAOE:
    case TaskKind::kAESC:
      return 2;
    case TaskKind::kASTE:
      return 3;
  }
  return 0;
}

FactorizedTasks factorize(std::span<const NoisyTriplet> triplets) {
  if (triplets.empty()) throw InputError("factorize needs at least one triplet");
  FactorizedTasks out;
  std::array<std::set<Tuple>, 5> seen;
  auto add = [&](TaskKind t, Tuple tuple) {
    const auto idx = static_cast<std::size_t>(t);
    if (seen[idx].insert(tuple).second) out.lists[idx].push_back(std::move(tuple));
  };
  for (const auto& t : triplets) {
    const std::string sentiment(to_string(t.sentiment));
    add(TaskKind::kAE, {t.aspect});
    add(TaskKind::kOE, {t.opinion});
    add(TaskKind::kAOE, {t.aspect, t.opinion});
    add(TaskKind::kAESC, {t.aspect, sentiment});
    add(TaskKind::kASTE, {t.aspect, t.opinion, sentiment});
  }
  return out;
}

void check_field(std::string_view field) {
  if (field.empty()) throw GrammarError("empty tuple field");
  if (trim(field).size() != field.size()) {
    throw GrammarError("tuple field '" + std::string(field) + "' has surrounding whitespace");
  }
  if (field.find_first_of("<>,") != std::string_view::npos) {
    throw GrammarError("tuple field '" + std::string(field) + "' contains '<', '>' or ','");
  }
}

std::string serialize_target(std::span<const Tuple> tuples) {
  if (tuples.empty()) throw GrammarError("cannot serialize an empty tuple list");
  std::string out;
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    if (tuples[i].empty()) throw GrammarError("cannot serialize an empty tuple");
    if (i) out += "; ";
    out += '<';
    for (std::size_t f = 0; f < tuples[i].size(); ++f) {
      check_field(tuples[i][f]);
      if (f) out += ", ";
      out += tuples[i][f];
    }
    out += '>';
  }
  return out;
}

ParsedTarget parse_target_detailed(std::string_view text, std::size_t arity) {
  ParsedTarget out;
  std::size_t pos = 0;
  while (true) {
    const auto open = text.find('<', pos);
    if (open == std::string_view::npos) break;
    const auto close = text.find('>', open + 1);
    if (close == std::string_view::npos) {
      ++out.rejected_segments;
      break;
    }
    auto body = text.substr(open + 1, close - open - 1);
    pos = close + 1;
    if (body.find('<') != std::string_view::npos) {
      // "<a <b, c>": the inner '<' starts the real segment.
      ++out.rejected_segments;
      pos = open + 1 + body.rfind('<');
      continue;
    }
    Tuple tuple;
    bool ok = true;
    for (const auto& raw : split(body, ',')) {
      auto f = trim(raw);
      if (f.empty()) {
        ok = false;
        break;
      }
      tuple.emplace_back(f);
    }
    if (ok && tuple.size() == arity) {
      out.tuples.push_back(std::move(tuple));
    } else {
      ++out.rejected_segments;
    }
  }
  return out;
}

std::vector<Tuple> parse_target(std::string_view text, std::size_t arity) {
  return parse_target_detailed(text, arity).tuples;
}

namespace {

std::size_t count_placeholders(std::string_view s) {
  std::size_t n = 0;
  for (auto at = s.find("{text}"); at != std::string_view::npos; at = s.find("{text}", at + 1)) ++n;
  return n;
}

}  // namespace

TemplateSet::TemplateSet(std::map<TaskKind, std::vector<std::string>> templates)
    : templates_(std::move(templates)) {
  for (auto t : kAllTasks) {
    auto it = templates_.find(t);
    if (it == templates_.end() || it->second.empty()) {
      throw ConfigError("no templates for task " + std::string(to_string(t)));
    }
    for (const auto& tmpl : it->second) {
      if (count_placeholders(tmpl) != 1) {
        throw ConfigError("template for " + std::string(to_string(t)) +
                          " must contain {text} exactly once: \"" + tmpl + "\"");
      }
    }
  }
}

TemplateSet TemplateSet::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("template file must hold a JSON object");
  std::map<TaskKind, std::vector<std::string>> m;
  for (const auto& [name, list] : j.items()) {
    if (!list.is_array()) throw ConfigError("templates for " + name + " must be an array");
    for (const auto& s : list) {
      if (!s.is_string()) throw ConfigError("templates for " + name + " must be strings");
      m[parse_task(name)].push_back(s.get<std::string>());
    }
  }
  return TemplateSet(std::move(m));
}

TemplateSet TemplateSet::load(const std::string& path) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw ConfigError(path + ": invalid JSON");
  return from_json(j);
}

const TemplateSet& TemplateSet::defaults() {
  static const TemplateSet kDefaults(std::map<TaskKind, std::vector<std::string>>{
      {TaskKind::kAE,
       {"Given the text: {text}, what are the aspect terms?",
        "What are the aspect terms in the text: {text}?",
        "Extract the aspect terms from the text: {text}"}},
      {TaskKind::kOE,
       {"Given the text: {text}, what are the opinion terms?",
        "What are the opinion terms in the text: {text}?",
        "Extract the opinion terms from the text: {text}"}},
      {TaskKind::kAOE,
       {"Given the text: {text}, what are the aspect terms and their opinion terms?",
        "What are the aspect term and opinion term pairs in the text: {text}?",
        "Extract the aspect term and opinion term pairs from the text: {text}"}},
      {TaskKind::kAESC,
       {"Given the text: {text}, what are the aspect terms and their sentiments?",
        "What are the aspect terms and their sentiments in the text: {text}?",
        "Extract the aspect terms and their sentiments from the text: {text}"}},
      {TaskKind::kASTE,
       {"Given the text: {text}, what are the aspect term, opinion term, and sentiment triplets?",
        "What are the aspect term, opinion term, and sentiment triplets in the text: {text}?",
        "Extract the aspect term, opinion term, and sentiment triplets from the text: {text}"}},
  });
  return kDefaults;
}

const std::vector<std::string>& TemplateSet::for_task(TaskKind task) const {
  return templates_.at(task);
}

json TemplateSet::to_json() const {
  json j = json::object();
  for (const auto& [t, list] : templates_) j[std::string(to_string(t))] = list;
  return j;
}

std::string make_example_id(std::string_view sentence_id, TaskKind task) {
  return std::string(sentence_id) + "/" + std::string(to_string(task));
}

InstructionExample render(const std::string& sentence_id, const std::string& sentence_text,
                          TaskKind task, std::vector<Tuple> tuples, const TemplateSet& templates,
                          std::mt19937_64& rng) {
  const auto& options = templates.for_task(task);
  std::string instruction = options[uniform_index(rng, options.size())];
  instruction.replace(instruction.find("{text}"), 6, sentence_text);
  InstructionExample e;
  e.example_id = make_example_id(sentence_id, task);
  e.sentence_id = sentence_id;
  e.task = task;
  e.instruction = std::move(instruction);
  e.input = sentence_text;
  e.target = serialize_target(tuples);
  e.tuples = std::move(tuples);
  return e;
}

InstructionExample tuple_dropout(const InstructionExample& example, double rate,
                                 std::mt19937_64& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout rate must be in [0, 1)");
  if (example.tuples.empty()) throw InputError("example " + example.example_id + " has no tuples");
  InstructionExample out = example;
  out.tuples.clear();
  for (const auto& t : example.tuples) {
    if (uniform_unit(rng) >= rate) out.tuples.push_back(t);
  }
  if (out.tuples.empty()) out.tuples.push_back(example.tuples[uniform_index(rng, example.tuples.size())]);
  out.target = serialize_target(out.tuples);
  return out;
}

DropoutMode parse_dropout_mode(std::string_view name) {
  if (name == "build") return DropoutMode::kBuild;
  if (name == "epoch") return DropoutMode::kEpoch;
  throw ConfigError("dropout mode must be 'build' or 'epoch'");
}

ForgeResult build_instruction_corpus(std::span<const TripletRecord> records,
                                     const TemplateSet& templates, const ForgeConfig& config) {
  if (!(config.dropout_rate >= 0.0 && config.dropout_rate < 1.0)) {
    throw ConfigError("dropout rate must be in [0, 1)");
  }
  ForgeResult result;
  for (const auto& record : records) {
    std::vector<NoisyTriplet> usable;
    for (const auto& t : record.triplets) {
      try {
        check_field(t.aspect);
        check_field(t.opinion);
        usable.push_back(t);
      } catch (const GrammarError&) {
        ++result.rejected_triplets;
      }
    }
    if (usable.empty()) continue;
    const auto tasks = factorize(usable);
    for (auto task : kAllTasks) {
      auto rng = derived_rng(config.seed, make_example_id(record.sentence_id, task));
      auto example = render(record.sentence_id, record.text, task, tasks[task], templates, rng);
      if (config.dropout_mode == DropoutMode::kBuild && config.dropout_rate > 0.0) {
        const auto before = example.tuples.size();
        example = tuple_dropout(example, config.dropout_rate, rng);
        result.dropped_tuples += before - example.tuples.size();
      }
      result.examples.push_back(std::move(example));
    }
  }
  return result;
}

std::vector<InstructionExample> epoch_dropout(std::span<const InstructionExample> examples,
                                              double rate, std::uint64_t seed, std::size_t epoch) {
  std::vector<InstructionExample> out;
  out.reserve(examples.size());
  for (const auto& e : examples) {
    auto rng = derived_rng(seed, e.example_id + "#epoch" + std::to_string(epoch));
    out.push_back(tuple_dropout(e, rate, rng));
  }
  return out;
}

void to_json(json& j, const InstructionExample& e) {
  j = json{{"example_id", e.example_id}, {"sentence_id", e.sentence_id},
           {"task", to_string(e.task)},  {"instruction", e.instruction},
           {"input", e.input},           {"target", e.target},
           {"tuples", e.tuples}};
}

void from_json(const json& j, InstructionExample& e) {
  j.at("example_id").get_to(e.example_id);
  j.at("sentence_id").get_to(e.sentence_id);
  e.task = parse_task(j.at("task").get<std::string>());
  e.instruction = j.value("instruction", "");
  e.input = j.value("input", "");
  e.target = j.value("target", "");
  e.tuples.clear();
  if (j.contains("tuples")) j.at("tuples").get_to(e.tuples);
}

std::string examples_to_jsonl(std::span<const InstructionExample> examples) {
  std::string out;
  for (const auto& e : examples) {
    out += json(e).dump();
    out += '\n';
  }
  return out;
}

std::vector<InstructionExample> read_examples_jsonl(const std::string& path) {
  std::vector<InstructionExample> out;
  std::size_t lineno = 0;
  for (const auto& line : split(read_file(path), '\n')) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      out.push_back(json::parse(line).get<InstructionExample>());
    } catch (const json::exception& e) {
      throw ParseError(path + ": " + e.what(), lineno);
    }
  }
  return out;
}

}  // namespace weaksmith
