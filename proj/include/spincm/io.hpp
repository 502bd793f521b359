#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "spincm/integrator.hpp"
#include "spincm/models.hpp"
#include "spincm/solver_rational.hpp"
#include "spincm/solver_trig.hpp"
#include "spincm/spectral_elliptic.hpp"

namespace spincm::io {

using json = nlohmann::json;

const char* version();

/// Complex numbers are [re, im]; a bare number is read as real.
json to_json(cplx z);
cplx complex_from_json(const json& j);
json to_json(const Vec& v);
json to_json(const Mat& m);
Vec vec_from_json(const json& j, const char* what);
Mat mat_from_json(const json& j, const char* what);

/// {"N": 3, "family": "rational", "delta_prime": "full" | {"blocks": [[1,2],[3]]} | {"roots": [[1,2],[2,1]]}}
/// {"N": 3, "family": "trigonometric", "pi_prime": "full" | [1]}
/// {"N": 2, "family": "elliptic", "omega1": [1,0], "omega2": [0.3,1.1]}
/// Indices are 1-based.
ModelSpec model_from_json(const json& j);
json model_to_json(const ModelSpec& spec);

/// Initial data: {"q": [...], "p": [...], "xi": [[...]]} or, for a reduced point,
/// {"reduced": true, "q", "p", "s"}. {"random": true} draws a point from the seed.
struct InitialData {
  PhasePoint point;
  bool reduced = false;
};

InitialData init_from_json(const json& j, const ModelSpec& spec, std::uint64_t seed);
json init_to_json(const InitialData& init);

/// Uniform in [−1, 1) from the top 53 bits, so the stream is the same on every platform.
double uniform_pm1(std::mt19937_64& rng);

/// On-shell (zero ξ diagonal) regular point with well separated q.
PhasePoint random_point(const ModelSpec& spec, std::uint64_t seed);

struct Preset {
  std::string name;
  std::string description;
  json model;
  json init;
};

/// Looks in $SPINCM_PRESET_DIR/<name>.json first, then the built-in table.
/// Throws ValidationError for unknown names.
Preset find_preset(const std::string& name);
std::vector<std::string> builtin_preset_names();

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t v);

/// Values above the CSV header row.
struct CsvHeader {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string provenance;
  int n = 0;
  bool reduced = false;
};

/// "%.17g"
std::string format_double(double x);

/// Header comments, column row, one row per sample, then `footer` as "# key value" lines.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const CsvHeader& header,
                          const std::vector<std::pair<std::string, std::string>>& footer);

json factors_to_json(const RationalFactorization& f);
json factors_to_json(const TrigFactorization& f);
json invariant_report_to_json(const InvariantReport& rep);
json branch_report_to_json(int n, const GenericityReport& gen, const std::optional<BranchReport>& rep);

/// "0.7,1.3i,0.4+0.4i" style lists.
std::vector<cplx> parse_complex_list(const std::string& text);

}  // namespace spincm::io
