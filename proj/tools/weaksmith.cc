#include <cstdint>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "weaksmith/napt_reg.h"
#include "weaksmith/pipeline.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitStage = 1;
constexpr int kExitConfig = 2;

struct CommonArgs {
  std::string config;
  bool force = false;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--config", args.config, "run config (JSON)")->required();
  sub->add_flag("--force", args.force, "ignore cached stage outputs");
  sub->add_option("--seed", args.seed, "override the config seed");
}

int run_stages(const std::string& name, const CommonArgs& args) {
  const auto cfg = weaksmith::load_run_config(args.config, args.seed);
  const weaksmith::RunOptions options{args.force};
  const auto outcomes = name == "all"
                            ? weaksmith::run_all(cfg, options)
                            : weaksmith::run_through(weaksmith::parse_stage(name), cfg, options);
  for (const auto& o : outcomes) std::cout << o.report;
  return kExitOk;
}

int reg_check(const std::string& input) {
  std::string text;
  if (input == "-") {
    text.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  } else {
    text = weaksmith::read_file(input);
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw weaksmith::ConfigError(std::string("reg-check input is not valid JSON: ") + e.what());
  }
  std::cout << weaksmith::reg_check(j).dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weaksmith: weakly supervised ABSA corpus construction"};
  app.footer(weaksmith::config_reference());
  app.require_subcommand(1);

  CommonArgs args;
  const char* stages[][2] = {
      {"ingest", "read reviews, split and tag sentences"},
      {"vocab", "mine the aspect candidate vocabulary"},
      {"annotate", "extract, link and label aspect/opinion triplets"},
      {"factorize", "build the instruction corpus from triplets"},
      {"split", "train/validation split with disjoint term vocabularies"},
      {"kshot", "sample a k-shot subset of gold data"},
      {"eval", "score predictions against references"},
      {"all", "every stage whose inputs are configured"},
  };
  for (const auto& [name, description] : stages) add_common(app.add_subcommand(name, description), args);

  std::string reg_input;
  auto* reg = app.add_subcommand("reg-check", "loss and penalty gradient for one parameter vector");
  reg->add_option("--input", reg_input, "JSON {theta, theta_init, alpha, beta, ce} or - for stdin")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (name == "reg-check") return reg_check(reg_input);
    return run_stages(name, args);
  } catch (const weaksmith::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const weaksmith::StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << name << ": " << e.what() << "\n";
    return kExitStage;
  }
}
