#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qmux/core.hpp"
#include "qmux/kv.hpp"

// Sweep front end shared by the qmux binary and the test suites. A sweep is
// described by a target, a parameter tree, an output path, and a seed; it
// writes one CSV (deterministic bytes for a fixed config+seed, independent of
// thread count) plus a JSON metadata sidecar that can reproduce the run.

namespace qmux::cli {

inline constexpr const char* kVersion = "0.1.0";

enum class Target {
  window,
  limits,
  eg_curve,
  eg_gain,
  rsp_curve,
  rsp_gain,
  ms_curve,
  ms_gain,
  ms_sample,
};

Target target_from_string(const std::string& name);
std::string to_string(Target target);

struct SweepSpec {
  Target target = Target::window;
  kv::Node params;  // the target's parameter section
  std::string output_path;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = leave the OpenMP default
};

struct SweepOutcome {
  std::string csv_path;
  std::string sidecar_path;
  std::size_t rows = 0;
  std::string config_hash;
};

/// Loads a SweepSpec from a kv config file or from a JSON sidecar produced by
/// an earlier run (recognized by content).
SweepSpec parse_config(const std::string& path);

/// Executes the sweep and writes CSV + sidecar. Throws ConfigError /
/// InfeasibleError / IoError; the binary maps those onto exit codes 2/3/4.
SweepOutcome run_sweep(const SweepSpec& spec);

/// Exit-code mapping used by the qmux binary (0 ok, 2 config, 3 infeasible,
/// 4 io, 1 anything else).
int exit_code_for(const std::exception& error);

}  // namespace qmux::cli
