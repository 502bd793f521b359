#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "spincm/io.hpp"

namespace spincm::cli {

enum ExitCode : int {
  kOk = 0,
  kOverThreshold = 1,
  kValidation = 2,
  kBreakdown = 3,
  kBlowUp = 4,
  kUnsupported = 5,
};

struct RunConfig {
  std::string command;
  std::string model_file;
  std::string init_file;
  std::string preset;
  double t_end = 1.0;
  int samples = 21;
  double tol = 1e-10;
  std::string z_samples;
  std::uint64_t seed = 0;
  std::string out;
  bool dump_factors = false;
  double threshold = 1e-6;
};

/// Model and initial data resolved from files or a preset.
struct Resolved {
  io::json model_json;
  io::json init_json;
  ModelSpec spec;
  io::InitialData init;
  std::vector<cplx> z_samples;
  std::string config_hash;
};

Resolved resolve(const RunConfig& cfg);

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_exact(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_compare(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_audit(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_curve(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses `args` (without the program name) and runs one command. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spincm::cli
