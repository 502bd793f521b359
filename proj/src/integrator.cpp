#include "spincm/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "spincm/errors.hpp"

namespace spincm {

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::oracle: return "oracle";
    case Provenance::exact_rational: return "exact-rational";
    case Provenance::exact_trig: return "exact-trig";
  }
  return "?";
}

namespace ode {

namespace {

// Dormand–Prince 5(4) tableau
constexpr double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9.0;
constexpr double a21 = 0.2;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                 a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// continuous extension
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

struct Stages {
  RealVec k2, k3, k4, k5, k6, k7, ynew, tmp;
  explicit Stages(Eigen::Index n) : k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ynew(n), tmp(n) {}
};

// One step from (t, y) with k1 = f(t, y). Fills ynew and k7 = f(t+h, ynew).
void step(const Rhs& f, double t, const RealVec& y, const RealVec& k1, double h, Stages& s) {
  s.tmp = y + h * a21 * k1;
  f(t + c2 * h, s.tmp, s.k2);
  s.tmp = y + h * (a31 * k1 + a32 * s.k2);
  f(t + c3 * h, s.tmp, s.k3);
  s.tmp = y + h * (a41 * k1 + a42 * s.k2 + a43 * s.k3);
  f(t + c4 * h, s.tmp, s.k4);
  s.tmp = y + h * (a51 * k1 + a52 * s.k2 + a53 * s.k3 + a54 * s.k4);
  f(t + c5 * h, s.tmp, s.k5);
  s.tmp = y + h * (a61 * k1 + a62 * s.k2 + a63 * s.k3 + a64 * s.k4 + a65 * s.k5);
  f(t + h, s.tmp, s.k6);
  s.ynew = y + h * (a71 * k1 + a73 * s.k3 + a74 * s.k4 + a75 * s.k5 + a76 * s.k6);
  f(t + h, s.ynew, s.k7);
}

double initial_step(const Rhs& f, double t0, const RealVec& y0, const RealVec& f0, double hmax,
                    const Options& opt, long& evals) {
  const RealVec sk = (opt.atol + opt.rtol * y0.array().abs()).matrix();
  const double dnf = (f0.array() / sk.array()).square().sum();
  const double dny = (y0.array() / sk.array()).square().sum();
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
  h = std::min(h, hmax);
  RealVec f1(y0.size());
  try {
    f(t0 + h, y0 + h * f0, f1);
    ++evals;
  } catch (const DomainError&) {
    return std::min(hmax, 1e-6);
  }
  const double der2 = std::sqrt(((f1 - f0).array() / sk.array()).square().sum()) / h;
  const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
  return std::min({100.0 * h, h1, hmax});
}

}  // namespace

Result dopri5(const Rhs& f, const RealVec& y0, double t0, const std::vector<double>& out_times,
              const Options& opt, const Guard& guard) {
  Result res;
  if (out_times.empty()) return res;
  const double tend = out_times.back();
  const Eigen::Index n = y0.size();
  std::size_t next = 0;
  while (next < out_times.size() && out_times[next] <= t0) {
    res.t.push_back(out_times[next]);
    res.y.push_back(y0);
    ++next;
  }
  res.last_good_time = t0;
  if (next == out_times.size()) return res;

  RealVec y = y0, k1(n);
  f(t0, y, k1);
  res.stats.evaluations = 1;
  double t = t0;
  double h = initial_step(f, t0, y0, k1, tend - t0, opt, res.stats.evaluations);

  constexpr double safe = 0.9, facl = 0.2, facr = 10.0, beta = 0.04;
  const double expo1 = 0.2 - beta * 0.75;
  double facold = 1e-4;
  bool last_rejected = false;
  Stages s(n);
  RealVec err(n), r5(n);

  auto fail = [&](const std::string& why) {
    res.blow_up = true;
    res.last_good_time = t;
    res.reason = why;
  };

  while (next < out_times.size()) {
    if (res.stats.accepted + res.stats.rejected >= opt.max_steps) {
      fail("maximum number of steps exceeded");
      break;
    }
    const double target = opt.interpolate ? tend : out_times[next];
    const double h_wanted = h;
    bool clipped = false;
    if (t + 1.01 * h >= target) {
      h = target - t;
      clipped = true;
    }
    const bool last = clipped && target == tend;
    if (h < opt.h_min * std::max(1.0, std::abs(t))) {
      fail("step size underflow");
      break;
    }
    bool ok = true;
    try {
      step(f, t, y, k1, h, s);
      res.stats.evaluations += 6;
    } catch (const DomainError&) {
      ok = false;
    }
    double e = 0.0;
    if (ok) {
      err = h * (e1 * k1 + e3 * s.k3 + e4 * s.k4 + e5 * s.k5 + e6 * s.k6 + e7 * s.k7);
      const RealVec sk = (opt.atol + opt.rtol * y.array().abs().max(s.ynew.array().abs())).matrix();
      e = (err.array() / sk.array()).abs().maxCoeff();
      ok = std::isfinite(e) && s.ynew.allFinite() && s.k7.allFinite();
    }
    if (!ok) {
      ++res.stats.rejected;
      h *= 0.25;
      last_rejected = true;
      continue;
    }
    const double fac11 = std::pow(e, expo1);
    if (e <= 1.0) {
      if (guard && !guard(s.ynew)) {
        fail("state reached the singular-set margin");
        break;
      }
      double fac = fac11 / std::pow(facold, beta);
      fac = std::clamp(fac / safe, 1.0 / facr, 1.0 / facl);
      double hnew = h / fac;
      facold = std::max(e, 1e-4);
      const double tnew = clipped ? target : t + h;
      const RealVec ydiff = s.ynew - y;
      const RealVec bspl = h * k1 - ydiff;
      const RealVec r4 = ydiff - h * s.k7 - bspl;
      r5 = h * (d1 * k1 + d3 * s.k3 + d4 * s.k4 + d5 * s.k5 + d6 * s.k6 + d7 * s.k7);
      while (next < out_times.size() && (out_times[next] <= tnew || last)) {
        const double th = (out_times[next] - t) / h;
        const double th1 = 1.0 - th;
        res.t.push_back(out_times[next]);
        res.y.push_back(out_times[next] == tnew
                            ? RealVec(s.ynew)
                            : RealVec(y + th * (ydiff + th1 * (bspl + th * (r4 + th1 * r5)))));
        ++next;
      }
      k1 = s.k7;
      y = s.ynew;
      t = tnew;
      res.last_good_time = t;
      ++res.stats.accepted;
      if (last_rejected) hnew = std::min(hnew, h);
      if (clipped && !last_rejected) hnew = std::max(hnew, h_wanted);
      last_rejected = false;
      h = hnew;
    } else {
      h /= std::min(1.0 / facl, fac11 / safe);
      ++res.stats.rejected;
      last_rejected = true;
    }
  }
  return res;
}

RealVec dopri5_fixed(const Rhs& f, const RealVec& y0, double t0, double t1, int n_steps) {
  if (n_steps < 1) throw ValidationError("dopri5_fixed needs at least one step");
  const double h = (t1 - t0) / n_steps;
  RealVec y = y0, k1(y0.size());
  Stages s(y0.size());
  for (int i = 0; i < n_steps; ++i) {
    const double t = t0 + i * h;
    f(t, y, k1);
    step(f, t, y, k1, h, s);
    y = s.ynew;
  }
  return y;
}

}  // namespace ode

ode::RealVec pack(const PhasePoint& pt) {
  const int n = pt.dim();
  ode::RealVec y(4 * n + 2 * n * n);
  for (int i = 0; i < n; ++i) {
    y(i) = pt.q(i).real();
    y(n + i) = pt.q(i).imag();
    y(2 * n + i) = pt.p(i).real();
    y(3 * n + i) = pt.p(i).imag();
  }
  const int o = 4 * n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      y(o + i * n + j) = pt.xi(i, j).real();
      y(o + n * n + i * n + j) = pt.xi(i, j).imag();
    }
  }
  return y;
}

PhasePoint unpack(const ode::RealVec& y, int n) {
  PhasePoint pt{Vec(n), Vec(n), Mat(n, n)};
  for (int i = 0; i < n; ++i) {
    pt.q(i) = cplx(y(i), y(n + i));
    pt.p(i) = cplx(y(2 * n + i), y(3 * n + i));
  }
  const int o = 4 * n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) pt.xi(i, j) = cplx(y(o + i * n + j), y(o + n * n + i * n + j));
  return pt;
}

std::vector<double> sample_times(double t_end, int samples) {
  if (samples < 2) throw ValidationError("need at least 2 samples");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ValidationError("t_end must be positive and finite");
  std::vector<double> ts(static_cast<size_t>(samples));
  for (int k = 0; k < samples; ++k) ts[static_cast<size_t>(k)] = t_end * k / (samples - 1);
  ts.back() = t_end;
  return ts;
}

namespace {

Trajectory run(const ModelSpec& spec, const PhasePoint& pt0, double t_end, int samples, double tol,
               bool reduced) {
  if (!(tol >= 1e-13 && tol <= 1e-3)) throw ValidationError("tol must lie in [1e-13, 1e-3]");
  check_point(spec, pt0);
  check_regular(spec, pt0.q);
  const int n = spec.n();
  const auto times = sample_times(t_end, samples);
  ode::Rhs f = [&](double, const ode::RealVec& y, ode::RealVec& dy) {
    const PhasePoint pt = unpack(y, n);
    const Tangent v = reduced ? reduced_eom(spec, ReducedPoint{pt.q, pt.p, pt.xi}) : eom(spec, pt);
    dy = pack(PhasePoint{v.dq, v.dp, v.dxi});
  };
  ode::Guard guard = [&](const ode::RealVec& y) {
    Vec q(n);
    for (int i = 0; i < n; ++i) q(i) = cplx(y(i), y(n + i));
    return singular_distance(spec, q) >= kRegularityMargin;
  };
  ode::Options opt;
  opt.rtol = opt.atol = tol;
  opt.interpolate = false;
  const auto r = ode::dopri5(f, pack(pt0), 0.0, times, opt, guard);
  Trajectory tr;
  tr.reduced = reduced;
  tr.provenance = Provenance::oracle;
  tr.stats = r.stats;
  tr.times = r.t;
  for (const auto& y : r.y) tr.states.push_back(unpack(y, n));
  tr.blow_up = r.blow_up;
  tr.last_good_time = r.last_good_time;
  tr.message = r.reason;
  return tr;
}

}  // namespace

Trajectory integrate(const ModelSpec& spec, const PhasePoint& pt0, double t_end, int samples, double tol) {
  return run(spec, pt0, t_end, samples, tol, false);
}

Trajectory integrate_reduced(const ModelSpec& spec, const ReducedPoint& rpt0, double t_end, int samples,
                             double tol) {
  return run(spec, PhasePoint{rpt0.q, rpt0.p, rpt0.s}, t_end, samples, tol, true);
}

std::vector<cplx> default_z_samples(const ModelSpec& spec) {
  std::vector<cplx> zs{cplx(0.7, 0.0), cplx(0.0, 1.3), cplx(0.4, 0.4)};
  if (spec.family() == Family::elliptic) {
    const double s = std::min(1.0, 0.5 * spec.lattice().min_period() / 1.3);
    for (auto& z : zs) z *= s;
  }
  return zs;
}

std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost) {
  // Kuhn–Munkres with potentials, rows 1..n matched to columns 1..n.
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> perm(n);
  for (int j = 1; j <= n; ++j) perm[p[j] - 1] = j - 1;
  return perm;
}

Vec match_eigenvalues(const Vec& prev, const Vec& next) {
  const auto n = prev.size();
  Eigen::MatrixXd cost(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) cost(i, j) = std::abs(prev(i) - next(j));
  const auto perm = min_cost_assignment(cost);
  Vec out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = next(perm[static_cast<size_t>(i)]);
  return out;
}

InvariantReport audit(const ModelSpec& spec, const Trajectory& traj, const std::vector<cplx>& z_samples) {
  InvariantReport rep;
  rep.times = traj.times;
  rep.z_samples = z_samples;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const PhasePoint& pt = traj.states[k];
    rep.energy.push_back(hamiltonian(spec, pt));
    rep.momentum.push_back(momentum(pt));
    const auto Ls = lax_batch(spec, pt, z_samples);
    std::vector<Vec> eig;
    for (std::size_t iz = 0; iz < Ls.size(); ++iz) {
      Eigen::ComplexEigenSolver<Mat> es(Ls[iz], false);
      Vec ev = es.eigenvalues();
      if (k == 0) {
        std::sort(ev.data(), ev.data() + ev.size(), [](cplx a, cplx b) {
          return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
        });
      } else {
        ev = match_eigenvalues(rep.eigenvalues[k - 1][iz], ev);
      }
      eig.push_back(ev);
    }
    rep.eigenvalues.push_back(std::move(eig));
  }
  for (std::size_t k = 0; k < traj.size(); ++k) {
    rep.energy_drift = std::max(rep.energy_drift, std::abs(rep.energy[k] - rep.energy[0]));
    rep.momentum_drift = std::max(rep.momentum_drift, (rep.momentum[k] - rep.momentum[0]).cwiseAbs().maxCoeff());
    for (std::size_t iz = 0; iz < z_samples.size(); ++iz) {
      rep.spectrum_drift = std::max(
          rep.spectrum_drift, (rep.eigenvalues[k][iz] - rep.eigenvalues[0][iz]).cwiseAbs().maxCoeff());
    }
  }
  return rep;
}

}  // namespace spincm
