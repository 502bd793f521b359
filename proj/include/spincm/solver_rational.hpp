#pragma once

#include <optional>
#include <vector>

#include "spincm/integrator.hpp"
#include "spincm/levi.hpp"
#include "spincm/models.hpp"

namespace spincm {

/// Factors of q⁰ + t·L∞ = g d g⁻¹ and k = g h at the output times.
struct RationalFactorization {
  std::vector<double> times;
  std::vector<Mat> g;
  std::vector<Vec> d;
  std::vector<Vec> h;  // diagonal entries
  std::vector<Mat> k;
  /// max_t ‖g d g⁻¹ − (q⁰ + t·L∞)‖ (max entry)
  double identity_residual = 0.0;
  /// max_t ‖k q(t) k⁻¹ − (q⁰ + t·L∞)‖
  double key_residual = 0.0;
  double min_gap = 0.0;
  long substeps = 0;
  long rejected = 0;
  long reanchors = 0;
  std::optional<Breakdown> breakdown;
};

struct RationalSolution {
  /// Covers the output times reached before any breakdown.
  Trajectory trajectory;
  RationalFactorization factors;
};

/// Flow of the rational system on J⁻¹(0) by factorization. A breakdown does
/// not throw: the trajectory stops at the last valid time and
/// factors.breakdown describes the failure.
/// Throws ContractError when Π_hξ⁰ ≠ 0, DomainError when q⁰ is singular,
/// ValidationError on bad times or a non-rational spec.
RationalSolution solve_rational(const ModelSpec& spec, const PhasePoint& pt0, const std::vector<double>& times);

/// Reduced flow, lifting ξ⁰ := s⁰ (g(s⁰) = 1) and projecting with reduce_point.
RationalSolution solve_rational_reduced(const ModelSpec& spec, const ReducedPoint& rpt0,
                                        const std::vector<double>& times);

}  // namespace spincm
