#pragma once

#include <map>
#include <string>
#include <vector>

namespace linkrec {

struct ProcessResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs argv[0] (PATH lookup) with the given arguments, capturing stdout and
// stderr. Extra environment entries are added on top of the inherited
// environment. Throws IoError if the process cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv,
                          const std::string& working_dir = {},
                          const std::map<std::string, std::string>& extra_env = {},
                          const std::string& stdin_data = {});

}  // namespace linkrec
