#pragma once
// Shared fixtures for the unit and acceptance tests.

#include <random>

#include "spincm/integrator.hpp"
#include "spincm/lie.hpp"
#include "spincm/models.hpp"

namespace testing_support {

using namespace spincm;

inline lie::RootSubset delta_blocks(const std::vector<std::vector<int>>& blocks) {
  lie::RootSubset s;
  s.kind = lie::RootSubset::Kind::delta;
  for (const auto& b : blocks)
    for (int i : b)
      for (int j : b)
        if (i != j) s.delta_members.push_back({i, j});
  return s;
}

inline lie::RootSubset pi_subset(std::vector<int> members) {
  lie::RootSubset s;
  s.kind = lie::RootSubset::Kind::pi;
  s.pi_members = std::move(members);
  return s;
}

inline ModelSpec rational_full(int n) { return ModelSpec::rational(n, lie::full_delta(lie::LieContext(n))); }
inline ModelSpec trig_full(int n) { return ModelSpec::trigonometric(n, lie::full_pi(lie::LieContext(n))); }
inline ModelSpec elliptic_std(int n) { return ModelSpec::elliptic(n, cplx(1.0, 0.0), cplx(0.3, 1.1)); }

/// Random regular point. q entries are well separated and sized for the family
/// (|α(q)| < π for trig, inside the period parallelogram for elliptic).
inline PhasePoint random_point(const ModelSpec& spec, std::mt19937_64& rng, bool on_shell) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = spec.n();
  const double span = spec.family() == Family::elliptic ? 1.3 : (spec.family() == Family::trigonometric ? 2.4 : 3.0);
  PhasePoint pt{Vec(n), Vec(n), Mat(n, n)};
  for (int i = 0; i < n; ++i) {
    const double base = -0.5 * span + span * (i + 0.5 + 0.15 * u(rng)) / n;
    pt.q(i) = cplx(base, 0.1 * u(rng));
    pt.p(i) = cplx(u(rng), 0.3 * u(rng));
    for (int j = 0; j < n; ++j) pt.xi(i, j) = cplx(u(rng), u(rng));
  }
  pt.q.array() -= pt.q.sum() / double(n);
  pt.p.array() -= pt.p.sum() / double(n);
  if (on_shell) {
    pt.xi.diagonal().setZero();
  } else {
    pt.xi.diagonal().array() -= pt.xi.trace() / double(n);
  }
  return pt;
}

/// Sup-norm gap over q, p, ξ between two trajectories on the same grid.
inline double sup_gap(const Trajectory& a, const Trajectory& b) {
  double g = 0.0;
  const size_t n = std::min(a.size(), b.size());
  for (size_t k = 0; k < n; ++k) {
    g = std::max(g, (a.states[k].q - b.states[k].q).cwiseAbs().maxCoeff());
    g = std::max(g, (a.states[k].p - b.states[k].p).cwiseAbs().maxCoeff());
    g = std::max(g, (a.states[k].xi - b.states[k].xi).cwiseAbs().maxCoeff());
  }
  return g;
}

inline Mat comm(const Mat& a, const Mat& b) { return a * b - b * a; }

}  // namespace testing_support
