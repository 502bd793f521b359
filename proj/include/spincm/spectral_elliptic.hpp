#pragma once

#include <string>
#include <vector>

#include "spincm/integrator.hpp"
#include "spincm/models.hpp"

namespace spincm {

/// det(L(z) − wI) = (−w)^N + a_{N−1}(−w)^{N−1} + … + a_0, so a_k = e_{N−k}(eigenvalues).
struct SpectralSample {
  cplx z;
  std::vector<cplx> a;  // a[0] .. a[N−1]
};

/// Coefficients w_k of w^N + c_1 w^{N−1} + … + c_N = det(wI − X) (Faddeev–LeVerrier); c[0] = 1.
std::vector<cplx> characteristic_coefficients(const Mat& x);

SpectralSample char_poly_coeffs(const ModelSpec& spec, const PhasePoint& pt, cplx z);
SpectralSample char_poly_coeffs(const Mat& lax_matrix, cplx z);

/// e^{−ζ(z)q} L(z) e^{ζ(z)q}. Throws ContractError off J⁻¹(0), PoleError at lattice points.
Mat gauge_lax(const ModelSpec& spec, const PhasePoint& pt, cplx z);

inline constexpr double kGenericityThreshold = 1e-8;

struct GenericityReport {
  bool ga1_ok = false;
  /// min over sampled curve points of |∂I/∂w| + |∂I/∂z|
  double ga1_min = 0.0;
  bool ga2_ok = false;
  /// minimal eigenvalue gap of ξ
  double ga2_gap = 0.0;
  int grid = 0;
  std::string details;
};

/// GA2 from the eigenvalues of ξ; GA1 by sampling the curve over a grid×grid
/// net of the period parallelogram (∂I/∂z by central differences).
GenericityReport genericity_check(const ModelSpec& spec, const PhasePoint& pt, int grid = 20);

struct BranchReport {
  /// Zeros of the w-discriminant in one period parallelogram, with multiplicity.
  int branch_points = 0;
  int genus = 0;
  /// (N² − N + 2)/2
  int expected_genus = 0;
  bool matches_formula = false;
  /// Pole order of the discriminant at z = 0 measured on a small circle.
  int pole_order = 0;
  int grid = 0;
  int refined_cells = 0;
  int attempts = 0;
  long evaluations = 0;
  GenericityReport genericity;
};

/// Counts discriminant zeros by the argument principle on a grid×grid subdivision
/// of a jittered period parallelogram (cells with ambiguous winding are split
/// 2×2), and returns the genus from Riemann–Hurwitz for a cover of the torus,
/// 2g − 2 = B. Throws PreconditionError when GA1 or GA2 fails.
BranchReport branch_count_genus(const ModelSpec& spec, const PhasePoint& pt, int grid = 4);

/// max over t, z, k of |a_k(z; t) − a_k(z; 0)|.
double isospectral_drift(const ModelSpec& spec, const Trajectory& traj, const std::vector<cplx>& z_samples);

}  // namespace spincm
