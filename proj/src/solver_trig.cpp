#include "spincm/solver_trig.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "spincm/errors.hpp"
#include "exact_common.hpp"

namespace spincm {

namespace {

double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

Mat block_diagonal_part(const lie::ValidatedSubset& blocks, const Mat& A) {
  Mat g = Mat::Zero(A.rows(), A.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j)
      if (blocks.block_of(i) == blocks.block_of(j)) g(i, j) = A(i, j);
  return g;
}

/// Largest entry of A outside the parabolic pattern of `side`.
double outside_parabolic(const lie::ValidatedSubset& blocks, const Mat& A, Parabolic side) {
  double worst = 0.0;
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j) {
      const int bi = blocks.block_of(i), bj = blocks.block_of(j);
      const bool bad = side == Parabolic::upper ? bi > bj : bi < bj;
      if (bad) worst = std::max(worst, std::abs(A(i, j)));
    }
  return worst;
}

}  // namespace

ParabolicFactors parabolic_factor(const lie::ValidatedSubset& blocks, const Mat& A, Parabolic side) {
  if (A.rows() != A.cols() || A.rows() == 0) throw ValidationError("parabolic_factor: A must be square");
  if (outside_parabolic(blocks, A, side) > 1e-9 * (1.0 + max_abs(A)))
    throw ValidationError("parabolic_factor: A is not block-triangular on the requested side");
  ParabolicFactors f;
  f.g = block_diagonal_part(blocks, A);
  for (const auto& idx : blocks.blocks()) {
    const int m = static_cast<int>(idx.size());
    Mat b(m, m);
    for (int a = 0; a < m; ++a)
      for (int c = 0; c < m; ++c) b(a, c) = f.g(idx[a], idx[c]);
    const double det = std::abs(b.determinant());
    if (!(det > 1e-14 * std::pow(1.0 + max_abs(b), m)))
      throw BreakdownError("parabolic_factor: singular diagonal block", 0.0, det);
  }
  f.n = f.g.transpose().partialPivLu().solve(A.transpose()).transpose();
  return f;
}

LeviFrame levi_conjugation_solve(const lie::ValidatedSubset& blocks, const Mat& B, const LeviFrame* prev,
                                 double time) {
  return diagonalize_in_levi(blocks, B, prev, time);
}

std::vector<Vec> cartan_log(const std::vector<Vec>& d, const Vec& q0) {
  std::vector<Vec> q;
  if (d.empty()) return q;
  const int n = static_cast<int>(q0.size());
  for (const Vec& v : d) {
    if (v.size() != n) throw ValidationError("cartan_log: size mismatch");
    for (int i = 0; i < n; ++i)
      if (std::abs(v(i)) < 1e-300) throw DomainError("cartan_log: d has a vanishing entry");
  }
  const Vec e0 = (2.0 * kI * q0).array().exp().matrix();
  if ((e0 - d.front()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + d.front().cwiseAbs().maxCoeff()))
    throw ValidationError("cartan_log: d(0) differs from exp(2i q0)");
  Vec cur = q0;
  q.push_back(cur);
  for (size_t k = 1; k < d.size(); ++k) {
    for (int i = 0; i < n; ++i) {
      const cplx r = d[k](i) / d[k - 1](i);
      if (!(std::abs(std::arg(r)) < 0.5 * kPi)) {
        std::ostringstream os;
        os << "cartan_log: grid too coarse (entry " << i + 1 << " turns by " << std::arg(r) << " between samples)";
        throw DomainError(os.str());
      }
      cur(i) += std::log(r) / (2.0 * kI);
    }
    q.push_back(cur);
  }
  return q;
}

TrigSolution solve_trig(const ModelSpec& spec, const PhasePoint& pt0, const std::vector<double>& times) {
  if (spec.family() != Family::trigonometric) throw ValidationError("solve_trig: needs the trigonometric family");
  detail::require_exact_preconditions(spec, pt0, times);
  const lie::ValidatedSubset& blocks = spec.subset();

  const Mat Lp = lax_limit(spec, pt0, LaxLimit::trig_plus_i_inf);
  const Mat Lm = lax_limit(spec, pt0, LaxLimit::trig_minus_i_inf);
  const Vec e2iq = (2.0 * kI * pt0.q).array().exp().matrix();
  const Mat E = e2iq.asDiagonal();

  struct Pieces {
    Mat Ap, Am;
    ParabolicFactors fp, fm;
    Mat B;
  };
  const auto pieces = [&](double t) {
    Pieces p;
    p.Ap = (kI * t * Lp).exp();
    p.Am = (-kI * t * Lm).exp();
    p.fp = parabolic_factor(blocks, p.Ap, Parabolic::upper);
    p.fm = parabolic_factor(blocks, p.Am, Parabolic::lower);
    p.B = p.fm.g.partialPivLu().solve(E * p.fp.g);
    return p;
  };
  const levi::MatrixPath F = [&](double t) -> Mat { return pieces(t).B; };

  levi::TrackOptions opt;
  opt.multiplicative = true;
  opt.initial_log = 2.0 * kI * pt0.q;
  const levi::TrackResult tr = levi::track(blocks, F, times, opt);

  TrigSolution out;
  TrigFactorization& fac = out.factors;
  Trajectory& traj = out.trajectory;
  traj.provenance = Provenance::exact_trig;
  fac.breakdown = tr.breakdown;
  fac.min_gap = tr.min_gap;
  fac.substeps = tr.substeps;
  fac.rejected = tr.rejected;
  fac.reanchors = tr.reanchors;

  for (const levi::TrackedPoint& tp : tr.points) {
    const Pieces pc = pieces(tp.t);
    const Mat& x = tp.frame.g;
    const Mat k = x * tp.h.asDiagonal();
    const auto lu = k.partialPivLu();

    PhasePoint s;
    s.q = tp.log_d / (2.0 * kI);
    s.q.array() -= s.q.mean();
    s.xi = lu.solve(pt0.xi * k);
    const Vec p_plus = lu.solve(Lp * k).diagonal();
    const Vec p_minus = lu.solve(Lm * k).diagonal();
    s.p = p_plus;

    fac.sign_mismatch = std::max(fac.sign_mismatch, (p_plus - p_minus).cwiseAbs().maxCoeff());
    fac.levi_residual = std::max(fac.levi_residual, max_abs(x * tp.frame.d.asDiagonal() * x.inverse() - pc.B));
    fac.parabolic_residual = std::max({fac.parabolic_residual, max_abs(pc.fp.n * pc.fp.g - pc.Ap),
                                       max_abs(pc.fm.n * pc.fm.g - pc.Am)});
    fac.membership_defect =
        std::max({fac.membership_defect, outside_parabolic(blocks, pc.Ap * k, Parabolic::upper),
                  outside_parabolic(blocks, pc.Am * k, Parabolic::lower)});

    fac.times.push_back(tp.t);
    fac.n_plus.push_back(pc.fp.n);
    fac.g_plus.push_back(pc.fp.g);
    fac.n_minus.push_back(pc.fm.n);
    fac.g_minus.push_back(pc.fm.g);
    fac.x.push_back(x);
    fac.d.push_back(tp.frame.d);
    fac.h.push_back(tp.h);
    fac.k.push_back(k);
    traj.times.push_back(tp.t);
    traj.states.push_back(std::move(s));
  }
  if (fac.sign_mismatch > kSignMismatchTolerance) {
    std::ostringstream os;
    os << "solve_trig: the two sign choices for p(t) disagree by " << fac.sign_mismatch;
    throw InternalError(os.str());
  }
  traj.last_good_time = traj.times.empty() ? 0.0 : traj.times.back();
  if (fac.breakdown) {
    traj.message = fac.breakdown->reason;
    traj.last_good_time = fac.breakdown->time;
  }
  return out;
}

TrigSolution solve_trig_reduced(const ModelSpec& spec, const ReducedPoint& rpt0, const std::vector<double>& times) {
  PhasePoint lift{rpt0.q, rpt0.p, rpt0.s};
  TrigSolution sol = solve_trig(spec, lift, times);
  for (PhasePoint& st : sol.trajectory.states) st.xi = lie::reduce_point(spec.ctx(), st).s;
  sol.trajectory.reduced = true;
  return sol;
}

}  // namespace spincm
