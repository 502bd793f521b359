#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "spincm/errors.hpp"
#include "spincm/integrator.hpp"
#include "support.hpp"

using namespace spincm;
using namespace testing_support;

namespace {

PhasePoint sl2_point(double q, double p, bool spin) {
  PhasePoint pt{Vec(2), Vec(2), Mat::Zero(2, 2)};
  pt.q << q, -q;
  pt.p << p, -p;
  if (spin) pt.xi(0, 1) = pt.xi(1, 0) = 1.0;
  return pt;
}

}  // namespace

TEST_SUITE("integrator") {

TEST_CASE("free flight") {
  const auto spec = rational_full(2);
  const auto tr = integrate(spec, sl2_point(1.0, 2.0, false), 1.0, 11, 1e-10);
  REQUIRE(tr.size() == 11);
  CHECK_FALSE(tr.blow_up);
  CHECK(std::abs(tr.states.back().q(0) - 3.0) < 1e-10);
  CHECK(std::abs(tr.states.back().q(1) + 3.0) < 1e-10);
  for (size_t k = 0; k < tr.size(); ++k) CHECK(std::abs(tr.states[k].q(0) - (1.0 + 2.0 * tr.times[k])) < 1e-10);
  const auto rep = audit(spec, tr, default_z_samples(spec));
  CHECK(rep.energy_drift <= 1e-12);
  CHECK(rep.momentum_drift <= 1e-12);
  CHECK(rep.spectrum_drift <= 1e-12);
}

TEST_CASE("energy conservation on the standard rational datum") {
  const auto spec = rational_full(2);
  const auto tr = integrate(spec, sl2_point(1.0, 2.0, true), 1.0, 21, 1e-10);
  CHECK_FALSE(tr.blow_up);
  const auto rep = audit(spec, tr, default_z_samples(spec));
  CHECK(rep.energy_drift <= 1e-9);
}

TEST_CASE("collision raises the blow-up flag") {
  // q⁰ + tL∞ has an eigenvalue collision at t* = 0.5
  const auto spec = rational_full(2);
  const auto tr = integrate(spec, sl2_point(0.5, 0.0, true), 1.0, 11, 1e-10);
  CHECK(tr.blow_up);
  CHECK(tr.last_good_time < 0.5);
  CHECK(tr.last_good_time > 0.49);
  CHECK(tr.size() == 5);
  for (const auto& s : tr.states) CHECK(s.xi.allFinite());
}

TEST_CASE("tolerance validation") {
  const auto spec = rational_full(2);
  CHECK_THROWS_AS(integrate(spec, sl2_point(1.0, 2.0, true), 1.0, 11, 1e-2), ValidationError);
  CHECK_THROWS_AS(integrate(spec, sl2_point(1.0, 2.0, true), 1.0, 1, 1e-8), ValidationError);
}

TEST_CASE("fixed-step order") {
  // Free flight is integrated exactly by any RK method; the order is measured
  // on the interacting rational sl(2) flow against a tight adaptive reference.
  const auto spec = rational_full(2);
  const auto pt0 = sl2_point(1.0, 2.0, true);
  ode::Rhs f = [&](double, const ode::RealVec& y, ode::RealVec& dy) {
    const Tangent v = eom(spec, unpack(y, 2));
    dy = pack(PhasePoint{v.dq, v.dp, v.dxi});
  };
  ode::Options opt;
  opt.rtol = opt.atol = 1e-14;
  const auto ref = ode::dopri5(f, pack(pt0), 0.0, {0.0, 1.0}, opt);
  const ode::RealVec yr = ref.y.back();
  double prev = 0.0;
  for (int steps : {10, 20, 40}) {
    const double err = (ode::dopri5_fixed(f, pack(pt0), 0.0, 1.0, steps) - yr).cwiseAbs().maxCoeff();
    if (prev > 0.0) {
      const double ratio = prev / err;
      CHECK(ratio >= 16.0);
      CHECK(ratio <= 64.0);
    }
    prev = err;
  }
}

TEST_CASE("dense output matches restarted integration") {
  const auto spec = trig_full(2);
  const auto pt0 = sl2_point(kPi / 8, 1.0, true);
  const auto a = integrate(spec, pt0, 0.5, 6, 1e-12);
  const auto b = integrate(spec, pt0, 0.3, 2, 1e-12);
  CHECK((a.states[3].xi - b.states[1].xi).norm() < 1e-9);
}

TEST_CASE("continuous extension") {
  // y' = i y (as a real 2-vector), exact solution e^{it}
  ode::Rhs f = [](double, const ode::RealVec& y, ode::RealVec& dy) {
    dy.resize(2);
    dy << -y(1), y(0);
  };
  ode::RealVec y0(2);
  y0 << 1.0, 0.0;
  ode::Options opt;
  opt.rtol = opt.atol = 1e-9;
  std::vector<double> ts;
  for (int k = 0; k <= 50; ++k) ts.push_back(0.2 * k);
  const auto r = ode::dopri5(f, y0, 0.0, ts, opt);
  REQUIRE(r.y.size() == ts.size());
  for (size_t k = 0; k < ts.size(); ++k) {
    CHECK(std::abs(r.y[k](0) - std::cos(ts[k])) < 1e-7);
    CHECK(std::abs(r.y[k](1) - std::sin(ts[k])) < 1e-7);
  }
  opt.interpolate = false;
  const auto r2 = ode::dopri5(f, y0, 0.0, ts, opt);
  CHECK(r2.stats.accepted >= r.stats.accepted);
  CHECK(std::abs(r2.y.back()(0) - std::cos(10.0)) < 1e-7);
}

TEST_CASE("sl3 rational audit") {
  std::mt19937_64 rng(23);
  const auto spec = rational_full(3);
  const auto pt0 = random_point(spec, rng, true);
  const auto tr = integrate(spec, pt0, 2.0, 41, 1e-10);
  REQUIRE_FALSE(tr.blow_up);
  const auto rep = audit(spec, tr, default_z_samples(spec));
  CHECK(rep.spectrum_drift <= 1e-7);
  CHECK(rep.momentum_drift <= 1e-9);
  const auto rep2 = audit(spec, tr, default_z_samples(spec));
  CHECK(rep2.spectrum_drift == rep.spectrum_drift);
  CHECK(rep2.energy == rep.energy);
}

TEST_CASE("reduced integration stays in g_red") {
  std::mt19937_64 rng(29);
  const auto spec = trig_full(3);
  const auto r0 = lie::reduce_point(spec.ctx(), random_point(spec, rng, true));
  const auto tr = integrate_reduced(spec, r0, 0.5, 6, 1e-11);
  REQUIRE_FALSE(tr.blow_up);
  CHECK(tr.reduced);
  for (const auto& s : tr.states) {
    CHECK(std::abs(s.xi(0, 1) - 1.0) < 1e-9);
    CHECK(std::abs(s.xi(1, 2) - 1.0) < 1e-9);
  }
}

TEST_CASE("assignment") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n = 1; n <= 6; ++n) {
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::MatrixXd c(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) c(i, j) = u(rng);
      const auto perm = min_cost_assignment(c);
      double got = 0.0;
      for (int i = 0; i < n; ++i) got += c(i, perm[i]);
      std::vector<int> p(n);
      std::iota(p.begin(), p.end(), 0);
      double best = 1e300;
      do {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += c(i, p[i]);
        best = std::min(best, s);
      } while (std::next_permutation(p.begin(), p.end()));
      CHECK(got == doctest::Approx(best).epsilon(1e-12));
    }
  }
  Vec a(3), b(3);
  a << 1.0, 2.0, 3.0;
  b << 3.01, 0.99, 2.02;
  const Vec m = match_eigenvalues(a, b);
  CHECK(m(0) == cplx(0.99));
  CHECK(m(2) == cplx(3.01));
}

}
