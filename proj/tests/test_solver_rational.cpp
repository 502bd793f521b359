#include <doctest.h>

#include <Eigen/Dense>

#include "spincm/errors.hpp"
#include "spincm/solver_rational.hpp"
#include "support.hpp"

using namespace spincm;
using namespace testing_support;

namespace {

PhasePoint sl2_datum(double q, double p) {
  PhasePoint pt{Vec(2), Vec(2), Mat::Zero(2, 2)};
  pt.q << q, -q;
  pt.p << p, -p;
  pt.xi(0, 1) = pt.xi(1, 0) = 1.0;
  return pt;
}

lie::ValidatedSubset blocks_of(int n, const std::vector<std::vector<int>>& b) {
  return lie::validate_root_subset(lie::LieContext(n), delta_blocks(b));
}

}  // namespace

TEST_SUITE("solver_rational") {

TEST_CASE("diagonal input gives the identity frame") {
  const auto part = blocks_of(3, {{0, 1, 2}});
  Mat M = Mat::Zero(3, 3);
  M.diagonal() << 1.0, cplx(-0.2, 0.3), cplx(-0.8, -0.3);
  const LeviFrame f = diagonalize_in_levi(part, M);
  CHECK((f.g - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((f.d - M.diagonal()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("2x2 eigenproblem from the standard datum at t = 1") {
  const auto part = blocks_of(2, {{0, 1}});
  Mat M(2, 2);
  M << 3.0, 0.5, -0.5, -3.0;
  const LeviFrame f = diagonalize_in_levi(part, M);
  const double lam = std::sqrt(9.0 - 0.25);
  CHECK(std::abs(f.d(0) - lam) < 1e-12);
  CHECK(std::abs(f.d(1) + lam) < 1e-12);
  CHECK(std::abs(f.g.determinant() - 1.0) < 1e-12);
  CHECK((f.g * f.d.asDiagonal() * f.g.inverse() - M).cwiseAbs().maxCoeff() < 1e-12);
  for (int c = 0; c < 2; ++c) {
    int row = 0;
    f.g.col(c).cwiseAbs().maxCoeff(&row);
    const cplx piv = f.g(row, c);
    CHECK(std::abs(piv.imag()) < 1e-14);
    CHECK(piv.real() > 0.0);
  }
}

TEST_CASE("blocks are handled independently") {
  const auto part = blocks_of(3, {{0, 1}, {2}});
  Mat M = Mat::Zero(3, 3);
  M.topLeftCorner(2, 2) << 1.0, 0.4, 0.3, -0.5;
  M(2, 2) = cplx(-0.5, 0.2);
  const LeviFrame f = diagonalize_in_levi(part, M);
  CHECK(f.d(2) == M(2, 2));
  CHECK(std::abs(f.g(2, 0)) == 0.0);
  CHECK(std::abs(f.g(0, 2)) == 0.0);
  CHECK((f.g * f.d.asDiagonal() * f.g.inverse() - M).cwiseAbs().maxCoeff() < 1e-12);
  Mat bad = M;
  bad(0, 2) = 0.1;
  CHECK_THROWS_AS(diagonalize_in_levi(part, bad), ValidationError);
}

TEST_CASE("collision inside a block is a breakdown") {
  const auto part = blocks_of(2, {{0, 1}});
  Mat M(2, 2);
  M << 1.0, 1.0, 0.0, 1.0;
  CHECK_THROWS_AS(diagonalize_in_levi(part, M, nullptr, 0.25), BreakdownError);
  try {
    diagonalize_in_levi(part, M, nullptr, 0.25);
  } catch (const BreakdownError& e) {
    CHECK(e.time() == 0.25);
  }
}

TEST_CASE("continuation keeps the ordering of the previous frame") {
  const auto part = blocks_of(2, {{0, 1}});
  Mat M(2, 2);
  M << -1.0, 0.2, 0.1, 1.0;
  const LeviFrame f0 = diagonalize_in_levi(part, M);
  CHECK(f0.d(0).real() < 0.0);
  Mat M1 = M;
  M1(0, 1) += 0.01;
  const LeviFrame f1 = diagonalize_in_levi(part, M1, &f0);
  CHECK(std::abs(f1.d(0) - f0.d(0)) < 0.01);
  CHECK((f1.g - f0.g).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("free flight") {
  const auto spec = rational_full(3);
  PhasePoint pt{Vec(3), Vec(3), Mat::Zero(3, 3)};
  pt.q << 1.0, 0.0, -1.0;
  pt.p << 0.5, cplx(0.1, 0.2), cplx(-0.6, -0.2);
  const auto times = sample_times(1.0, 6);
  const auto sol = solve_rational(spec, pt, times);
  REQUIRE(sol.trajectory.size() == 6);
  for (size_t k = 0; k < times.size(); ++k) {
    const auto& s = sol.trajectory.states[k];
    CHECK((s.q - (pt.q + times[k] * pt.p)).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((s.p - pt.p).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(s.xi.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("standard sl(2) datum matches the RK oracle") {
  const auto spec = rational_full(2);
  const auto pt = sl2_datum(1.0, 2.0);
  const auto oracle = integrate(spec, pt, 1.0, 21, 1e-12);
  const auto sol = solve_rational(spec, pt, oracle.times);
  REQUIRE_FALSE(sol.factors.breakdown);
  REQUIRE(sol.trajectory.size() == oracle.size());
  const double gap = sup_gap(sol.trajectory, oracle);
  MESSAGE("sl(2) exact vs oracle: " << gap);
  CHECK(gap <= 1e-6);
  CHECK(sol.factors.identity_residual <= 1e-10);
  CHECK(sol.factors.key_residual <= 1e-9);
}

TEST_CASE("sl(3) with a block partition matches the RK oracle") {
  const auto spec = ModelSpec::rational(3, delta_blocks({{0, 1}, {2}}));
  std::mt19937_64 rng(7);
  const auto pt = random_point(spec, rng, true);
  const auto oracle = integrate(spec, pt, 0.5, 11, 1e-12);
  const auto sol = solve_rational(spec, pt, oracle.times);
  REQUIRE_FALSE(sol.factors.breakdown);
  const double gap = sup_gap(sol.trajectory, oracle);
  MESSAGE("sl(3) block exact vs oracle: " << gap);
  CHECK(gap <= 1e-6);
}

TEST_CASE("sl(3) full set matches the RK oracle, isospectral, key identity") {
  const auto spec = rational_full(3);
  std::mt19937_64 rng(11);
  const auto pt = random_point(spec, rng, true);
  const auto oracle = integrate(spec, pt, 1.0, 21, 1e-12);
  const auto sol = solve_rational(spec, pt, oracle.times);
  REQUIRE_FALSE(sol.factors.breakdown);
  CHECK(sup_gap(sol.trajectory, oracle) <= 1e-6);
  CHECK(sol.factors.key_residual <= 1e-9);
  const auto rep = audit(spec, sol.trajectory, default_z_samples(spec));
  CHECK(rep.spectrum_drift <= 1e-8);
  CHECK(rep.momentum_drift <= 1e-9);
}

TEST_CASE("k satisfies the Cartan condition") {
  const auto spec = rational_full(2);
  const auto times = sample_times(0.5, 101);
  const auto sol = solve_rational(spec, sl2_datum(1.0, 2.0), times);
  const auto& k = sol.factors.k;
  const double dt = times[1] - times[0];
  double worst = 0.0;
  for (size_t j = 1; j + 1 < k.size(); ++j) {
    const Mat kdot = (k[j + 1] - k[j - 1]) / (2.0 * dt);
    worst = std::max(worst, cartan_part(k[j].inverse() * kdot).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("engineered collision reports the breakdown time") {
  // q⁰ + tL∞ = [[1/2, t], [−t, −1/2]] has eigenvalues ±√(1/4 − t²)
  const auto spec = rational_full(2);
  const auto sol = solve_rational(spec, sl2_datum(0.5, 0.0), sample_times(1.0, 11));
  REQUIRE(sol.factors.breakdown);
  CHECK(std::abs(sol.factors.breakdown->time - 0.5) <= 1e-3);
  CHECK(sol.trajectory.size() <= 6);
  CHECK(sol.trajectory.times.back() <= 0.5);
  CHECK(std::abs(sol.trajectory.last_good_time - 0.5) <= 1e-3);
}

TEST_CASE("reduced flow") {
  const auto spec = rational_full(2);
  const auto rpt = make_reduced_point(sl2_datum(1.0, 2.0).q, sl2_datum(1.0, 2.0).p, sl2_datum(1.0, 2.0).xi);
  const auto times = sample_times(1.0, 11);
  const auto red = solve_rational_reduced(spec, rpt, times);
  CHECK(red.trajectory.reduced);
  for (const auto& s : red.trajectory.states) CHECK(std::abs(s.xi(0, 1) - 1.0) < 1e-10);

  const auto full = solve_rational(spec, sl2_datum(1.0, 2.0), times);
  for (size_t k = 0; k < times.size(); ++k) {
    const auto r = lie::reduce_point(spec.ctx(), full.trajectory.states[k]);
    CHECK((r.s - red.trajectory.states[k].xi).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("sl(3) reduced flow matches the reduced RK oracle") {
  const auto spec = rational_full(3);
  std::mt19937_64 rng(5);
  const auto pt = random_point(spec, rng, true);
  const auto r0 = lie::reduce_point(spec.ctx(), pt);
  const auto oracle = integrate_reduced(spec, r0, 1.0, 11, 1e-12);
  const auto red = solve_rational_reduced(spec, r0, oracle.times);
  REQUIRE_FALSE(red.factors.breakdown);
  CHECK(sup_gap(red.trajectory, oracle) <= 1e-6);
}

TEST_CASE("reduced flow depends only on s0") {
  const auto spec = rational_full(3);
  std::mt19937_64 rng(9);
  const auto pt = random_point(spec, rng, true);
  Vec dvec(3);
  dvec << cplx(1.3, 0.2), cplx(0.7, -0.4), 1.0;
  dvec /= std::pow(dvec.prod(), 1.0 / 3.0);
  PhasePoint other = pt;
  other.xi = dvec.asDiagonal() * pt.xi * dvec.cwiseInverse().asDiagonal();
  const auto times = sample_times(0.8, 9);
  const auto a = solve_rational(spec, pt, times);
  const auto b = solve_rational(spec, other, times);
  for (size_t k = 0; k < times.size(); ++k) {
    const auto ra = lie::reduce_point(spec.ctx(), a.trajectory.states[k]);
    const auto rb = lie::reduce_point(spec.ctx(), b.trajectory.states[k]);
    CHECK((ra.s - rb.s).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((ra.p - rb.p).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("preconditions") {
  const auto spec = rational_full(2);
  PhasePoint off = sl2_datum(1.0, 2.0);
  off.xi(0, 0) = 0.1;
  off.xi(1, 1) = -0.1;
  CHECK_THROWS_AS(solve_rational(spec, off, sample_times(1.0, 3)), ContractError);
  CHECK_THROWS_AS(solve_rational(spec, sl2_datum(1.0, 2.0), {0.1, 0.2}), ValidationError);
  CHECK_THROWS_AS(solve_rational(spec, sl2_datum(0.0, 2.0), sample_times(1.0, 3)), DomainError);
  CHECK_THROWS_AS(solve_rational(trig_full(2), sl2_datum(1.0, 2.0), sample_times(1.0, 3)), ValidationError);
}

}  // TEST_SUITE
