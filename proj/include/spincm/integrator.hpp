#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "spincm/models.hpp"

namespace spincm {

enum class Provenance { oracle, exact_rational, exact_trig };
const char* to_string(Provenance p);

struct StepStats {
  long accepted = 0;
  long rejected = 0;
  long evaluations = 0;
};

/// Time-stamped states. For reduced trajectories `states[k].xi` holds s.
struct Trajectory {
  std::vector<double> times;
  std::vector<PhasePoint> states;
  bool reduced = false;
  Provenance provenance = Provenance::oracle;
  StepStats stats;
  bool blow_up = false;
  double last_good_time = 0.0;
  std::string message;

  std::size_t size() const { return times.size(); }
};

namespace ode {

using RealVec = Eigen::VectorXd;
/// dy = f(t, y). May throw DomainError; the step is then rejected.
using Rhs = std::function<void(double, const RealVec&, RealVec&)>;
/// Returns false when y is too close to the singular set.
using Guard = std::function<bool(const RealVec&)>;

struct Options {
  double rtol = 1e-10;
  double atol = 1e-10;
  long max_steps = 2000000;
  double h_min = 1e-14;
  /// true: fill output times from the continuous extension; false: shorten
  /// steps so that every output time is a step end point.
  bool interpolate = true;
};

struct Result {
  std::vector<double> t;
  std::vector<RealVec> y;
  StepStats stats;
  bool blow_up = false;
  double last_good_time = 0.0;
  std::string reason;
};

/// Dormand–Prince 5(4) with the 4th-order-accurate continuous extension;
/// reports y at each of `out_times` (ascending, starting at t0).
Result dopri5(const Rhs& f, const RealVec& y0, double t0, const std::vector<double>& out_times,
              const Options& opt, const Guard& guard = {});

/// Same tableau, n equal steps, no error control. Returns y(t1).
RealVec dopri5_fixed(const Rhs& f, const RealVec& y0, double t0, double t1, int n_steps);

}  // namespace ode

/// Packing of (q, p, ξ) into stacked real/imaginary coordinates.
ode::RealVec pack(const PhasePoint& pt);
PhasePoint unpack(const ode::RealVec& y, int n);

/// `samples` equally spaced times on [0, t_end] (both ends included).
std::vector<double> sample_times(double t_end, int samples);

Trajectory integrate(const ModelSpec& spec, const PhasePoint& pt0, double t_end, int samples, double tol);
Trajectory integrate_reduced(const ModelSpec& spec, const ReducedPoint& rpt0, double t_end, int samples,
                             double tol);

struct InvariantReport {
  std::vector<double> times;
  std::vector<cplx> energy;
  std::vector<Vec> momentum;  // Π_hξ diagonal
  std::vector<cplx> z_samples;
  /// eigenvalues[t][k] = matched eigenvalues of L(z_k) at time t
  std::vector<std::vector<Vec>> eigenvalues;
  double energy_drift = 0.0;
  double momentum_drift = 0.0;
  double spectrum_drift = 0.0;
};

/// Default spectral-parameter samples {0.7, 1.3i, 0.4+0.4i}, shrunk for the
/// elliptic family so that they stay well inside the period parallelogram.
std::vector<cplx> default_z_samples(const ModelSpec& spec);

InvariantReport audit(const ModelSpec& spec, const Trajectory& traj, const std::vector<cplx>& z_samples);

/// Permutation perm minimizing Σ_i cost(i, perm[i]) (Hungarian method).
std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost);

/// Reorders `next` to follow `prev` with minimal total distance.
Vec match_eigenvalues(const Vec& prev, const Vec& next);

}  // namespace spincm
