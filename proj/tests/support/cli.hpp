#pragma once

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hafcp/io.hpp"

namespace hafcp::testing {

struct CliResult {
  int exit_code = -1;
  std::string stderr_text;
};

inline std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

/// Runs the hafcp binary with `args`, optionally prefixed by environment assignments.
inline CliResult run_cli(const std::vector<std::string>& args, const std::string& env = {}) {
  static int counter = 0;
  const auto err_path =
      std::filesystem::temp_directory_path() / ("hafcp_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::string cmd = env.empty() ? "" : env + " ";
  cmd += shell_quote(HAFCP_CLI_PATH);
  for (const auto& a : args) cmd += " " + shell_quote(a);
  cmd += " 2>" + shell_quote(err_path.string()) + " >/dev/null";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(err_path);
  std::ostringstream ss;
  ss << in.rdbuf();
  r.stderr_text = ss.str();
  std::filesystem::remove(err_path);
  return r;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("hafcp_" + std::to_string(::getpid()) + "_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) { return read_file(p); }

}  // namespace hafcp::testing
