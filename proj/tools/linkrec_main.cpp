#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "linkrec/error.hpp"
#include "linkrec/pipeline.hpp"

namespace {

struct Options {
  std::string config_path;
  bool force = false;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> rankings;
  std::vector<std::string> report_inputs;
};

void add_common(CLI::App* cmd, Options& opts) {
  cmd->add_option("--config", opts.config_path, "Run config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_flag("--force", opts.force, "Rerun stages even when inputs are unchanged");
  cmd->add_option("--seed", opts.seed, "Seed for split and sampling (overrides config)");
}

void print_stage(const linkrec::StageResult& r) {
  if (r.skipped) {
    std::printf("%-9s skipped (up to date)\n", r.stage.c_str());
  } else {
    std::printf("%-9s done in %.3f s\n", r.stage.c_str(), r.seconds);
  }
}

int run(const std::string& command, const Options& opts) {
  auto config = linkrec::load_config(opts.config_path);
  if (opts.seed) config.seed = opts.seed;
  linkrec::Pipeline pipeline(std::move(config), opts.force);

  for (const auto& spec : opts.rankings) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
      throw linkrec::Error(linkrec::ErrorCode::ConfigInvalid, "--rankings expects name=path, got '" + spec + "'");
    }
    pipeline.add_external_rankings(spec.substr(0, eq), spec.substr(eq + 1));
  }
  pipeline.add_report_inputs(opts.report_inputs);

  if (command == "run-all") {
    const auto summary = pipeline.run_all();
    double total = 0;
    for (const auto& r : summary.stages) {
      print_stage(r);
      total += r.seconds;
    }
    std::printf("total     %.3f s\n\n", total);
    std::cout << linkrec::read_file(pipeline.artifact(linkrec::artifacts::kReportTable));
    return 0;
  }
  const auto result = pipeline.run_stage(command);
  print_stage(result);
  for (const auto& out : result.outputs) std::printf("  %s\n", out.c_str());
  if (command == "report") std::cout << '\n' << linkrec::read_file(pipeline.artifact(linkrec::artifacts::kReportTable));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"linkrec: issue-commit link recovery pipeline"};
  app.require_subcommand(1);
  Options opts;

  std::vector<std::pair<std::string, std::string>> commands = {
      {"mine", "Mine the git repository into a commit pool"},
      {"dataset", "Split ground truth and build the evaluation dataset"},
      {"index", "Embed the commit pool into a vector index"},
      {"retrieve", "Rank candidate commits per issue (embedding and TF-IDF)"},
      {"rerank", "Rerank the top retrieved commits with the LLM client"},
      {"evaluate", "Score ranking files against the dataset"},
      {"report", "Render the metric tables"},
      {"run-all", "Run every stage in order"},
  };
  for (const auto& [name, help] : commands) {
    auto* cmd = app.add_subcommand(name, help);
    add_common(cmd, opts);
    if (name == "evaluate") {
      cmd->add_option("--rankings", opts.rankings, "Extra ranking file to score, as name=path (repeatable)");
    }
    if (name == "report") {
      cmd->add_option("--inputs", opts.report_inputs, "report.json files of other projects to average in");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    return run(app.get_subcommands().front()->get_name(), opts);
  } catch (const linkrec::Error& e) {
    std::fprintf(stderr, "linkrec: %s\n", e.what());
    return linkrec::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "linkrec: internal error: %s\n", e.what());
    return 5;
  }
}
