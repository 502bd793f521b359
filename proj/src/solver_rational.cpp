#include "spincm/solver_rational.hpp"

#include <algorithm>

#include <Eigen/Dense>

#include "spincm/errors.hpp"
#include "exact_common.hpp"

namespace spincm {

namespace {

double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

namespace detail {

void require_exact_preconditions(const ModelSpec& spec, const PhasePoint& pt0, const std::vector<double>& times) {
  check_point(spec, pt0);
  check_regular(spec, pt0.q);
  const double scale = 1.0 + max_abs(pt0.xi);
  if (pt0.xi.diagonal().cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw ContractError("exact solver requires J^-1(0): the diagonal of xi must vanish");
  if (times.empty() || times.front() != 0.0) throw ValidationError("exact solver: times must start at 0");
  for (size_t j = 1; j < times.size(); ++j)
    if (!(times[j] > times[j - 1])) throw ValidationError("exact solver: times must be strictly increasing");
}

}  // namespace detail

RationalSolution solve_rational(const ModelSpec& spec, const PhasePoint& pt0, const std::vector<double>& times) {
  if (spec.family() != Family::rational) throw ValidationError("solve_rational: needs the rational family");
  detail::require_exact_preconditions(spec, pt0, times);

  const Mat Q0 = pt0.q.asDiagonal();
  const Mat Linf = lax_limit(spec, pt0, LaxLimit::rational_inf);
  const levi::MatrixPath F = [&](double t) -> Mat { return Q0 + t * Linf; };

  levi::TrackOptions opt;
  const levi::TrackResult tr = levi::track(spec.subset(), F, times, opt);

  RationalSolution out;
  RationalFactorization& fac = out.factors;
  Trajectory& traj = out.trajectory;
  traj.provenance = Provenance::exact_rational;
  fac.breakdown = tr.breakdown;
  fac.min_gap = tr.min_gap;
  fac.substeps = tr.substeps;
  fac.rejected = tr.rejected;
  fac.reanchors = tr.reanchors;

  for (const levi::TrackedPoint& tp : tr.points) {
    const Mat& g = tp.frame.g;
    const Mat k = g * tp.h.asDiagonal();
    const auto lu = k.partialPivLu();
    const Mat target = F(tp.t);

    PhasePoint s;
    s.q = tp.frame.d;
    s.xi = lu.solve(pt0.xi * k);
    s.p = lu.solve(Linf * k).diagonal();

    fac.identity_residual =
        std::max(fac.identity_residual, max_abs(g * tp.frame.d.asDiagonal() * g.inverse() - target));
    fac.key_residual = std::max(fac.key_residual, max_abs(k * s.q.asDiagonal() * lu.inverse() - target));

    fac.times.push_back(tp.t);
    fac.g.push_back(g);
    fac.d.push_back(tp.frame.d);
    fac.h.push_back(tp.h);
    fac.k.push_back(k);
    traj.times.push_back(tp.t);
    traj.states.push_back(std::move(s));
  }
  traj.last_good_time = traj.times.empty() ? 0.0 : traj.times.back();
  if (fac.breakdown) {
    traj.message = fac.breakdown->reason;
    traj.last_good_time = fac.breakdown->time;
  }
  return out;
}

RationalSolution solve_rational_reduced(const ModelSpec& spec, const ReducedPoint& rpt0,
                                        const std::vector<double>& times) {
  PhasePoint lift{rpt0.q, rpt0.p, rpt0.s};
  RationalSolution sol = solve_rational(spec, lift, times);
  for (PhasePoint& st : sol.trajectory.states) st.xi = lie::reduce_point(spec.ctx(), st).s;
  sol.trajectory.reduced = true;
  return sol;
}

}  // namespace spincm
