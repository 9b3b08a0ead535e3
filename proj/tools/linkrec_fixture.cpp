#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "linkrec/error.hpp"
#include "linkrec/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Materialize a fixture project (git repository, links, config)"};
  std::string fixture_dir, out_dir;
  app.add_option("fixture_dir", fixture_dir, "Directory with commits/issues/links.jsonl and config.json")
      ->required()
      ->check(CLI::ExistingDirectory);
  app.add_option("out_dir", out_dir, "Where to create the project")->required();
  CLI11_PARSE(app, argc, argv);

  try {
    const auto project = linkrec::materialize_fixture_project(fixture_dir, out_dir);
    std::printf("repository: %s\nconfig:     %s\n", project.repo_path.c_str(), project.config_file.c_str());
  } catch (const linkrec::Error& e) {
    std::fprintf(stderr, "linkrec_fixture: %s\n", e.what());
    return linkrec::exit_code_for(e.code());
  }
  return 0;
}
