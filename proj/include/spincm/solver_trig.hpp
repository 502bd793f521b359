#pragma once

#include <optional>
#include <vector>

#include "spincm/integrator.hpp"
#include "spincm/levi.hpp"
#include "spincm/models.hpp"

namespace spincm {

enum class Parabolic { upper, lower };

struct ParabolicFactors {
  Mat n;  // block-unipotent
  Mat g;  // block-diagonal
};

/// A = n g with g the block-diagonal part of A and n = A g⁻¹.
/// Throws ValidationError when A has entries on the wrong side of the block
/// structure, BreakdownError when a diagonal block is singular.
ParabolicFactors parabolic_factor(const lie::ValidatedSubset& blocks, const Mat& A, Parabolic side);

/// B = x d x⁻¹ with the gauge contract of diagonalize_in_levi.
LeviFrame levi_conjugation_solve(const lie::ValidatedSubset& blocks, const Mat& B, const LeviFrame* prev = nullptr,
                                 double time = 0.0);

/// q_k = (1/2i) log d_k, unwrapped along the path starting from q0.
/// Throws DomainError on a vanishing entry and on a turn of π/2 or more
/// between consecutive samples (grid too coarse).
std::vector<Vec> cartan_log(const std::vector<Vec>& d, const Vec& q0);

struct TrigFactorization {
  std::vector<double> times;
  std::vector<Mat> n_plus, g_plus, n_minus, g_minus;
  std::vector<Mat> x;
  std::vector<Vec> d;
  std::vector<Vec> h;  // diagonal entries
  std::vector<Mat> k;  // k₊(0,t) = x h
  /// max_t of the Levi problem residual ‖x d x⁻¹ − g₋⁻¹e^{2iq⁰}g₊‖
  double levi_residual = 0.0;
  /// max_t ‖e^{±itL(±i∞)} − n_± g_±‖
  double parabolic_residual = 0.0;
  /// max_t of entries of e^{itL(i∞)}k outside P⁺ and of e^{−itL(−i∞)}k outside P⁻
  double membership_defect = 0.0;
  /// max_t |p₊(t) − p₋(t)| between the two sign choices
  double sign_mismatch = 0.0;
  double min_gap = 0.0;
  long substeps = 0;
  long rejected = 0;
  long reanchors = 0;
  std::optional<Breakdown> breakdown;
};

struct TrigSolution {
  Trajectory trajectory;
  TrigFactorization factors;
};

/// Threshold on factors.sign_mismatch above which solve_trig throws InternalError.
inline constexpr double kSignMismatchTolerance = 1e-8;

/// Flow of the trigonometric system on J⁻¹(0) by factorization; breakdown
/// semantics as in solve_rational.
TrigSolution solve_trig(const ModelSpec& spec, const PhasePoint& pt0, const std::vector<double>& times);

TrigSolution solve_trig_reduced(const ModelSpec& spec, const ReducedPoint& rpt0, const std::vector<double>& times);

}  // namespace spincm
