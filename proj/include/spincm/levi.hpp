#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spincm/lie.hpp"
#include "spincm/types.hpp"

namespace spincm {

/// Eigenvalue collision inside a block below this gap is a breakdown.
inline constexpr double kCollisionGap = 1e-10;

/// Blockwise eigendecomposition M = g d g⁻¹ inside the block-diagonal subgroup.
///
/// Gauge: each column v has unit norm and ⟨r, v⟩ real positive for a fixed
/// reference column r, then g is divided by a continuously chosen N-th root
/// of det g so that det g = 1. The gauge is a smooth function of M for fixed
/// references.
struct LeviFrame {
  Mat g;
  Vec d;
  /// Reference columns (unit norm, supported in the block of their column).
  Mat ref;
  /// The root c with g = (unit-normalized columns) / c.
  cplx scale{1.0, 0.0};
  /// Distance from d_i to the nearest other eigenvalue of its block (inf for 1×1 blocks).
  Eigen::VectorXd gaps;

  double min_gap() const;
};

/// Without `prev`: d follows the order of M's diagonal and r is the unit
/// vector at the largest entry of each column (so the largest entry is real
/// positive). With `prev`: eigenvalues are matched to prev.d, references and
/// the root branch are inherited.
/// Throws BreakdownError (carrying `time`) when a block has a gap below kCollisionGap,
/// ValidationError when M is not block-diagonal.
LeviFrame diagonalize_in_levi(const lie::ValidatedSubset& blocks, const Mat& M, const LeviFrame* prev = nullptr,
                              double time = 0.0);

/// Frame of M whose references are the current (normalized) columns of `frame`.
LeviFrame reanchor(const lie::ValidatedSubset& blocks, const Mat& M, const LeviFrame& frame, double time);

struct Breakdown {
  double time = 0.0;
  double gap = 0.0;
  std::string reason;
};

namespace levi {

struct TrackOptions {
  /// Track log d along the path (d = e^{2iq}); steps whose eigenvalue ratio
  /// turns by π/2 or more are refined.
  bool multiplicative = false;
  Vec initial_log;
  int max_halvings = 12;
  /// Quadrature nodes are at most this far apart (and at least 4 per output interval).
  double max_spacing = 1e-3;
  double fd_step = 1e-5;
  /// Re-anchor when some |⟨r, v⟩| drops below this value.
  double anchor_floor = 0.9;
};

struct TrackedPoint {
  double t = 0.0;
  LeviFrame frame;
  /// Diagonal of h(t) = exp(−∫ Π_h(g⁻¹ġ)).
  Vec h;
  /// Unwrapped log d (multiplicative mode only).
  Vec log_d;
};

struct TrackResult {
  std::vector<TrackedPoint> points;
  std::optional<Breakdown> breakdown;
  long substeps = 0;
  long rejected = 0;
  long reanchors = 0;
  double min_gap = 0.0;
};

using MatrixPath = std::function<Mat(double)>;

/// Follows the frame of F(t) over `times` (ascending, times[0] = 0). Each
/// output interval is split into 4m sub-intervals (m ≥ 1, spacing at most
/// max_spacing); Π_h(g⁻¹ġ) is sampled there
/// with ġ by central differences and integrated by composite Simpson.
/// Between nodes the step halves (up to max_halvings) while an eigenvalue
/// moves by half its gap or more. Stops early and fills `breakdown` if that fails.
TrackResult track(const lie::ValidatedSubset& blocks, const MatrixPath& F, const std::vector<double>& times,
                  const TrackOptions& opt);

}  // namespace levi

/// Diagonal of Π_h(X) = diag X − (tr X / N).
Vec cartan_part(const Mat& x);

}  // namespace spincm
