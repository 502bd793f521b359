#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "spincm/errors.hpp"
#include "spincm/spectral_elliptic.hpp"
#include "support.hpp"

using namespace spincm;
using namespace testing_support;

namespace {

PhasePoint sl2_datum() {
  PhasePoint pt{Vec(2), Vec(2), Mat::Zero(2, 2)};
  pt.q << 0.4, -0.4;
  pt.p << 0.5, -0.5;
  pt.xi(0, 1) = pt.xi(1, 0) = 1.0;
  return pt;
}

/// e_m of the eigenvalues, by expanding Π(x − λ_i) directly.
std::vector<cplx> elementary_symmetric(const Vec& lam) {
  std::vector<cplx> e(static_cast<size_t>(lam.size()) + 1, 0.0);
  e[0] = 1.0;
  for (int i = 0; i < lam.size(); ++i)
    for (int m = i + 1; m >= 1; --m) e[static_cast<size_t>(m)] += lam(i) * e[static_cast<size_t>(m) - 1];
  return e;
}

double coeff_gap(const SpectralSample& a, const SpectralSample& b) {
  double g = 0.0;
  for (size_t k = 0; k < a.a.size(); ++k) g = std::max(g, std::abs(a.a[k] - b.a[k]));
  return g;
}

}  // namespace

TEST_SUITE("spectral_elliptic") {

TEST_CASE("diagonal Lax matrix") {
  const auto spec = elliptic_std(2);
  PhasePoint pt{Vec(2), Vec(2), Mat::Zero(2, 2)};
  pt.q << 0.3, -0.3;
  pt.p << 2.0, -2.0;
  const auto s = char_poly_coeffs(spec, pt, cplx(0.2, 0.3));
  CHECK(std::abs(s.a[0] + 4.0) < 1e-14);
  CHECK(std::abs(s.a[1]) < 1e-14);
}

TEST_CASE("coefficients agree with the eigenvalues") {
  std::mt19937_64 rng(4);
  for (int n : {2, 3, 4}) {
    const auto spec = elliptic_std(n);
    const auto pt = random_point(spec, rng, false);
    const cplx z(0.21, 0.17);
    const Mat L = lax(spec, pt, z);
    const auto s = char_poly_coeffs(spec, pt, z);
    Eigen::ComplexEigenSolver<Mat> es(L, false);
    const auto e = elementary_symmetric(es.eigenvalues());
    for (int k = 0; k < n; ++k) CHECK(std::abs(s.a[static_cast<size_t>(k)] - e[static_cast<size_t>(n - k)]) < 1e-10 * (1.0 + std::abs(e[static_cast<size_t>(n - k)])));
    CHECK(std::abs(s.a[static_cast<size_t>(n - 1)]) < 1e-12);
  }
}

TEST_CASE("coefficients are doubly periodic") {
  std::mt19937_64 rng(6);
  for (int n : {2, 3}) {
    const auto spec = elliptic_std(n);
    const auto pt = n == 2 ? sl2_datum() : random_point(spec, rng, true);
    const auto& lat = spec.lattice();
    for (cplx z : {cplx(0.31, 0.12), cplx(-0.2, 0.4)}) {
      const auto s0 = char_poly_coeffs(spec, pt, z);
      CHECK(coeff_gap(s0, char_poly_coeffs(spec, pt, z + 2.0 * lat.omega1())) <= 1e-9);
      CHECK(coeff_gap(s0, char_poly_coeffs(spec, pt, z + 2.0 * lat.omega2())) <= 1e-9);
    }
  }
}

TEST_CASE("gauge-transformed Lax matrix") {
  const auto spec = elliptic_std(3);
  std::mt19937_64 rng(13);
  const auto& lat = spec.lattice();
  for (int trial = 0; trial < 5; ++trial) {
    const auto pt = random_point(spec, rng, true);
    const cplx z(0.27, -0.15 + 0.05 * trial);
    const Mat Le = gauge_lax(spec, pt, z);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(Le(i, i) - pt.p(i)) < 1e-14);
    CHECK((gauge_lax(spec, pt, z + 2.0 * lat.omega1()) - Le).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((gauge_lax(spec, pt, z + 2.0 * lat.omega2()) - Le).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(coeff_gap(char_poly_coeffs(Le, z), char_poly_coeffs(spec, pt, z)) <= 1e-10);
  }
  PhasePoint off = random_point(spec, rng, false);
  CHECK_THROWS_AS(gauge_lax(spec, off, cplx(0.3, 0.1)), ContractError);
  CHECK_THROWS_AS(gauge_lax(spec, random_point(spec, rng, true), 2.0 * lat.omega1()), PoleError);
}

TEST_CASE("genericity") {
  const auto spec = elliptic_std(2);
  const auto rep = genericity_check(spec, sl2_datum(), 20);
  CHECK(rep.ga2_ok);
  CHECK(std::abs(rep.ga2_gap - 2.0) < 1e-12);
  CHECK(rep.ga1_ok);
  CHECK(rep.ga1_min >= kGenericityThreshold);
  CHECK(rep.grid == 20);

  PhasePoint nil = sl2_datum();
  nil.xi(1, 0) = 0.0;
  CHECK_FALSE(genericity_check(spec, nil).ga2_ok);
}

TEST_CASE("branch points and genus") {
  std::mt19937_64 rng(42);
  for (int n : {2, 3}) {
    const auto spec = elliptic_std(n);
    const auto pt = n == 2 ? sl2_datum() : random_point(spec, rng, true);
    const auto rep = branch_count_genus(spec, pt);
    CHECK(rep.branch_points == n * (n - 1));
    CHECK(rep.pole_order == n * (n - 1));
    CHECK(rep.genus == (n * n - n + 2) / 2);
    CHECK(rep.matches_formula);
    const auto finer = branch_count_genus(spec, pt, 6);
    CHECK(finer.branch_points == rep.branch_points);
  }
}

TEST_CASE("sl(2) discriminant in closed form") {
  // N = 2 on J⁻¹(0): discriminant −4 det L = 4(p₁² + ξ₁₂ξ₂₁ (℘(z) − ℘(α))),
  // an elliptic function with a double pole at 0, hence two zeros.
  const auto spec = elliptic_std(2);
  const auto pt = sl2_datum();
  const auto& lat = spec.lattice();
  const cplx a = pt.q(0) - pt.q(1);
  for (cplx z : {cplx(0.3, 0.2), cplx(-0.45, 0.6), cplx(0.05, -0.02)}) {
    const cplx closed = 4.0 * (pt.p(0) * pt.p(0) + pt.xi(0, 1) * pt.xi(1, 0) * (lat.wp(z) - lat.wp(a)));
    const auto s = char_poly_coeffs(spec, pt, z);
    CHECK(std::abs(-4.0 * s.a[0] - closed) < 1e-10 * (1.0 + std::abs(closed)));
  }
  CHECK(branch_count_genus(spec, pt).branch_points == 2);
}

TEST_CASE("discriminant zero close to the pole") {
  const auto spec = elliptic_std(3);
  PhasePoint pt{Vec(3), Vec(3), Mat::Zero(3, 3)};
  pt.q << cplx(0.45, 0.02), cplx(0.0, -0.04), cplx(-0.45, 0.02);
  pt.p << cplx(0.6, 0.1), cplx(-0.2, 0.2), cplx(-0.4, -0.3);
  pt.xi << 0.0, cplx(0.7, 0.2), cplx(-0.4, 0.5), cplx(0.3, -0.6), 0.0, cplx(0.8, 0.1), cplx(-0.5, -0.2),
      cplx(0.6, 0.4), 0.0;
  const auto rep = branch_count_genus(spec, pt);
  CHECK(rep.pole_order == 6);
  CHECK(rep.branch_points == 6);
  CHECK(rep.genus == 4);
}

TEST_CASE("degenerate spin is rejected") {
  const auto spec = elliptic_std(2);
  PhasePoint pt = sl2_datum();
  pt.xi.setZero();
  CHECK_THROWS_AS(branch_count_genus(spec, pt), PreconditionError);
}

TEST_CASE("isospectral drift along oracle flows") {
  const auto spec2 = elliptic_std(2);
  PhasePoint free_pt = sl2_datum();
  free_pt.xi.setZero();
  const auto z2 = default_z_samples(spec2);
  CHECK(isospectral_drift(spec2, integrate(spec2, free_pt, 1.0, 11, 1e-10), z2) <= 1e-12);

  const auto tr2 = integrate(spec2, sl2_datum(), 1.0, 21, 1e-10);
  REQUIRE_FALSE(tr2.blow_up);
  CHECK(isospectral_drift(spec2, tr2, z2) <= 1e-7);

  const auto spec3 = elliptic_std(3);
  std::mt19937_64 rng(77);
  const auto tr3 = integrate(spec3, random_point(spec3, rng, true), 1.0, 21, 1e-10);
  REQUIRE_FALSE(tr3.blow_up);
  CHECK(isospectral_drift(spec3, tr3, default_z_samples(spec3)) <= 1e-6);
}

}  // TEST_SUITE
