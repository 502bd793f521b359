#pragma once

#include "spincm/types.hpp"

namespace spincm {

/// A point (q, p, ξ) of TU × g. q and p are traceless diagonals stored as their
/// N diagonal entries; ξ is a traceless N×N matrix.
struct PhasePoint {
  Vec q;
  Vec p;
  Mat xi;

  int dim() const { return static_cast<int>(q.size()); }
};

/// A point (q, p, s) of TU × g_red. s has zero diagonal and unit simple-root
/// coefficients; use make_reduced_point() to construct one from raw data.
struct ReducedPoint {
  Vec q;
  Vec p;
  Mat s;

  int dim() const { return static_cast<int>(q.size()); }
};

/// Time derivative of a phase point (also used for reduced points, with dxi = ṡ).
struct Tangent {
  Vec dq;
  Vec dp;
  Mat dxi;
};

/// Checks that s lies in g_red (zero diagonal, s_{α_i} = 1 within 1e-8) and
/// snaps the simple-root coefficients to exactly 1.
ReducedPoint make_reduced_point(Vec q, Vec p, Mat s);

}  // namespace spincm
