#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace quadland::cli {

// Fully resolved experiment settings. Zero counts mean "use the command's
// default" until resolve() fills them in.
// Marks a count not given on the command line or in a config file.
inline constexpr long kUnset = std::numeric_limits<long>::min();

struct ExperimentConfig {
  std::string command;
  long d = kUnset;
  long m = kUnset;
  long m_hat = kUnset;
  long n = kUnset;
  long trials = kUnset;
  unsigned jobs = 1;
  std::string dist = "gaussian";
  std::string teacher;
  std::uint64_t seed = 0;
  std::string config_path;
  std::string out_dir;
  // gd-run
  std::string init = "identity";
  std::string scale = "m";
  std::string objective = "empirical";
  std::string step = "backtracking";
  double eta = 1e-3;
  double grad_tol = 1e-9;
  long max_iters = 1000000;
  long record_every = 100;
  // geometry-check / recovery
  std::string design = "random";
  std::string data_path;
  std::string student_path;
  double delta = 0.0;  // 0: default sigma_min(W*)^2
};

// Flat `key = value` lines; '#' starts a comment. Keys use the long flag
// names (dashes or underscores). Throws InvalidArgument on unknown keys.
void apply_config_file(const std::string& path, ExperimentConfig& config);

// Exit codes: 0 success, 2 invalid arguments, 1 contract or numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace quadland::cli
