#include "spincm/levi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "spincm/errors.hpp"
#include "spincm/integrator.hpp"

namespace spincm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_block_diagonal(const lie::ValidatedSubset& blocks, const Mat& M) {
  const int n = static_cast<int>(M.rows());
  const double tol = 1e-9 * (1.0 + M.cwiseAbs().maxCoeff());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (blocks.block_of(i) != blocks.block_of(j) && std::abs(M(i, j)) > tol) {
        std::ostringstream os;
        os << "diagonalize_in_levi: entry (" << i + 1 << "," << j + 1 << ") couples two blocks";
        throw ValidationError(os.str());
      }
}

int largest_entry(const Vec& v) {
  int best = 0;
  v.cwiseAbs().maxCoeff(&best);
  return best;
}

enum class RefMode { fresh, inherit, current };

LeviFrame build_frame(const lie::ValidatedSubset& blocks, const Mat& M, const LeviFrame* prev, RefMode mode,
                      double time) {
  const int n = static_cast<int>(M.rows());
  if (n == 0 || M.cols() != n) throw ValidationError("diagonalize_in_levi: bad size");
  check_block_diagonal(blocks, M);
  if (prev && prev->d.size() != n) throw ValidationError("diagonalize_in_levi: prev has the wrong size");

  LeviFrame f;
  f.g = Mat::Zero(n, n);
  f.d = Vec::Zero(n);
  f.ref = Mat::Zero(n, n);
  f.gaps = Eigen::VectorXd::Constant(n, kInf);

  Eigen::ComplexEigenSolver<Mat> es;
  for (const auto& idx : blocks.blocks()) {
    const int m = static_cast<int>(idx.size());
    Mat Mb(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) Mb(a, b) = M(idx[a], idx[b]);

    Vec lam(m);
    Mat V(m, m);
    if (m == 1) {
      lam(0) = Mb(0, 0);
      V(0, 0) = 1.0;
    } else {
      es.compute(Mb, true);
      if (es.info() != Eigen::Success) throw BreakdownError("diagonalize_in_levi: eigensolver failed", time, 0.0);
      lam = es.eigenvalues();
      V = es.eigenvectors();
    }

    double block_gap = kInf;
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b) block_gap = std::min(block_gap, std::abs(lam(a) - lam(b)));
    if (block_gap < kCollisionGap) {
      std::ostringstream os;
      os << "eigenvalue collision in a Levi block at t = " << time << " (gap " << block_gap << ")";
      throw BreakdownError(os.str(), time, block_gap);
    }

    Eigen::MatrixXd cost(m, m);
    for (int a = 0; a < m; ++a) {
      const cplx target = prev ? prev->d(idx[a]) : Mb(a, a);
      for (int b = 0; b < m; ++b) cost(a, b) = std::abs(target - lam(b));
    }
    const std::vector<int> perm = m == 1 ? std::vector<int>{0} : min_cost_assignment(cost);

    for (int a = 0; a < m; ++a) {
      Vec v = V.col(perm[a]);
      v.normalize();
      Vec r = Vec::Zero(m);
      if (mode == RefMode::fresh || !prev) {
        r(largest_entry(v)) = 1.0;
      } else {
        for (int b = 0; b < m; ++b) r(b) = mode == RefMode::inherit ? prev->ref(idx[b], idx[a]) : prev->g(idx[b], idx[a]);
        r.normalize();
      }
      const cplx ov = r.dot(v);
      if (std::abs(ov) < 1e-12) throw BreakdownError("diagonalize_in_levi: gauge reference is orthogonal to the eigenvector", time, 0.0);
      v *= std::conj(ov) / std::abs(ov);
      for (int b = 0; b < m; ++b) {
        f.g(idx[b], idx[a]) = v(b);
        f.ref(idx[b], idx[a]) = r(b);
      }
      f.d(idx[a]) = lam(perm[a]);
    }
    for (int a = 0; a < m; ++a) {
      double gi = kInf;
      for (int b = 0; b < m; ++b)
        if (b != a) gi = std::min(gi, std::abs(f.d(idx[a]) - f.d(idx[b])));
      f.gaps(idx[a]) = gi;
    }
  }

  const cplx det = f.g.determinant();
  if (std::abs(det) < 1e-300) throw BreakdownError("diagonalize_in_levi: eigenvector matrix is singular", time, 0.0);
  const cplx anchor = prev ? prev->scale : cplx(1.0, 0.0);
  const double rad = std::pow(std::abs(det), 1.0 / n);
  const double arg = std::arg(det);
  cplx best = 0.0;
  double best_dist = kInf;
  for (int k = 0; k < n; ++k) {
    const cplx c = std::polar(rad, (arg + 2.0 * kPi * k) / n);
    if (std::abs(c - anchor) < best_dist) {
      best_dist = std::abs(c - anchor);
      best = c;
    }
  }
  f.g /= best;
  f.scale = best;
  return f;
}

}  // namespace

double LeviFrame::min_gap() const { return gaps.size() ? gaps.minCoeff() : kInf; }

LeviFrame diagonalize_in_levi(const lie::ValidatedSubset& blocks, const Mat& M, const LeviFrame* prev, double time) {
  return build_frame(blocks, M, prev, prev ? RefMode::inherit : RefMode::fresh, time);
}

LeviFrame reanchor(const lie::ValidatedSubset& blocks, const Mat& M, const LeviFrame& frame, double time) {
  return build_frame(blocks, M, &frame, RefMode::current, time);
}

Vec cartan_part(const Mat& x) {
  Vec v = x.diagonal();
  v.array() -= v.mean();
  return v;
}

namespace levi {

namespace {

struct Walker {
  const lie::ValidatedSubset& blocks;
  const MatrixPath& F;
  const TrackOptions& opt;
  TrackResult& res;

  bool compatible(const LeviFrame& from, const LeviFrame& to) const {
    for (int i = 0; i < from.d.size(); ++i) {
      if (!(std::abs(to.d(i) - from.d(i)) < 0.5 * from.gaps(i))) return false;
      if (opt.multiplicative && !(std::abs(std::arg(to.d(i) / from.d(i))) < 0.5 * kPi)) return false;
    }
    return true;
  }

  /// Moves `frame` (and log d) from t0 to t1, refining on demand.
  void advance(LeviFrame& frame, Vec& log_d, double t0, double t1) {
    const double span = t1 - t0;
    const double min_step = span / std::ldexp(1.0, opt.max_halvings);
    double t = t0;
    double step = span;
    while (t < t1) {
      const bool last = step >= t1 - t;
      const double tn = last ? t1 : t + step;
      bool ok = false;
      LeviFrame cand;
      try {
        cand = diagonalize_in_levi(blocks, F(tn), &frame, tn);
        ok = compatible(frame, cand);
      } catch (const BreakdownError&) {
        ok = false;
      }
      if (!ok) {
        ++res.rejected;
        step *= 0.5;
        if (step < min_step * (1.0 - 1e-12)) {
          std::ostringstream os;
          os << "factorization breakdown near t = " << t << ": eigenvalue gap " << frame.min_gap();
          throw BreakdownError(os.str(), t, frame.min_gap());
        }
        continue;
      }
      ++res.substeps;
      if (opt.multiplicative)
        for (int i = 0; i < log_d.size(); ++i) log_d(i) += std::log(cand.d(i) / frame.d(i));
      frame = std::move(cand);
      res.min_gap = std::min(res.min_gap, frame.min_gap());
      t = tn;
      step = std::min(2.0 * step, span);
    }
  }

  /// Π_h(g⁻¹ġ) at τ in the gauge of `frame`.
  Vec integrand(const LeviFrame& frame, double tau) {
    const double delta = opt.fd_step;
    const LeviFrame fp = diagonalize_in_levi(blocks, F(tau + delta), &frame, tau + delta);
    const LeviFrame fm = diagonalize_in_levi(blocks, F(tau - delta), &frame, tau - delta);
    if (!compatible(frame, fp) || !compatible(frame, fm)) {
      std::ostringstream os;
      os << "factorization breakdown near t = " << tau << ": frame not differentiable at this resolution";
      throw BreakdownError(os.str(), tau, frame.min_gap());
    }
    const Mat gdot = (fp.g - fm.g) / (2.0 * delta);
    return cartan_part(frame.g.partialPivLu().solve(gdot));
  }

  bool needs_reanchor(const LeviFrame& f) const {
    for (int c = 0; c < f.g.cols(); ++c)
      if (std::abs(f.ref.col(c).dot(f.g.col(c).normalized())) < opt.anchor_floor) return true;
    return false;
  }
};

}  // namespace

TrackResult track(const lie::ValidatedSubset& blocks, const MatrixPath& F, const std::vector<double>& times,
                  const TrackOptions& opt) {
  if (times.empty() || times.front() != 0.0) throw ValidationError("track: times must start at 0");
  for (size_t j = 1; j < times.size(); ++j)
    if (!(times[j] > times[j - 1])) throw ValidationError("track: times must be strictly increasing");

  TrackResult res;
  res.min_gap = kInf;
  Walker w{blocks, F, opt, res};

  LeviFrame frame;
  try {
    frame = diagonalize_in_levi(blocks, F(0.0), nullptr, 0.0);
  } catch (const BreakdownError& e) {
    res.breakdown = Breakdown{0.0, e.gap(), e.what()};
    return res;
  }
  res.min_gap = frame.min_gap();
  const int n = static_cast<int>(frame.d.size());
  Vec h = Vec::Ones(n);
  Vec log_d = opt.multiplicative ? opt.initial_log : Vec(Vec::Zero(n));
  if (opt.multiplicative && log_d.size() != n) throw ValidationError("track: initial_log has the wrong size");
  res.points.push_back({0.0, frame, h, log_d});

  try {
    for (size_t j = 1; j < times.size(); ++j) {
      const double t0 = times[j - 1];
      const int panels = 2 * std::max(1, static_cast<int>(std::ceil((times[j] - t0) / (4.0 * opt.max_spacing))));
      const double dt = (times[j] - t0) / (2.0 * panels);
      for (int panel = 0; panel < panels; ++panel) {
        const double a = t0 + 2.0 * panel * dt;
        if (w.needs_reanchor(frame)) {
          LeviFrame fresh = reanchor(blocks, F(a), frame, a);
          for (int c = 0; c < n; ++c) {
            const cplx ratio = frame.g.col(c).dot(fresh.g.col(c)) / frame.g.col(c).squaredNorm();
            h(c) /= ratio;
          }
          frame = std::move(fresh);
          ++res.reanchors;
        }
        const Vec f0 = w.integrand(frame, a);
        LeviFrame mid = frame;
        w.advance(mid, log_d, a, a + dt);
        const Vec f1 = w.integrand(mid, a + dt);
        LeviFrame end = mid;
        const double b = panel + 1 == panels ? times[j] : a + 2.0 * dt;
        w.advance(end, log_d, a + dt, b);
        const Vec f2 = w.integrand(end, b);
        const Vec I = (b - a) / 6.0 * (f0 + 4.0 * f1 + f2);
        for (int c = 0; c < n; ++c) h(c) *= std::exp(-I(c));
        frame = std::move(end);
      }
      res.points.push_back({times[j], frame, h, log_d});
    }
  } catch (const BreakdownError& e) {
    res.breakdown = Breakdown{e.time(), e.gap(), e.what()};
  }
  return res;
}

}  // namespace levi

}  // namespace spincm
