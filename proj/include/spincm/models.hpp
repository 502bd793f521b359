#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "spincm/lie.hpp"
#include "spincm/phase_space.hpp"
#include "spincm/special_fns.hpp"
#include "spincm/types.hpp"

namespace spincm {

enum class Family { rational, trigonometric, elliptic };

const char* to_string(Family f);

/// Model description: sl(N) context plus the family and its parameter
/// (Δ′ for rational, π′ for trigonometric, the lattice for elliptic).
class ModelSpec {
 public:
  static ModelSpec rational(int n, const lie::RootSubset& delta_prime);
  static ModelSpec trigonometric(int n, const lie::RootSubset& pi_prime);
  static ModelSpec elliptic(int n, cplx omega1, cplx omega2);

  Family family() const { return family_; }
  int n() const { return ctx_->n(); }
  const lie::LieContext& ctx() const { return *ctx_; }
  /// Δ′ / π′ data; for the elliptic family every root is in the span.
  const lie::ValidatedSubset& subset() const { return *subset_; }
  const EllipticLattice& lattice() const;

  /// Roots whose coefficient in L depends on q.
  bool q_dependent(lie::Root a) const;

 private:
  ModelSpec() = default;
  Family family_ = Family::rational;
  std::shared_ptr<const lie::LieContext> ctx_;
  std::shared_ptr<const lie::ValidatedSubset> subset_;
  std::shared_ptr<const EllipticLattice> lattice_;
};

/// Minimal distance |α(q) − singular point| accepted by the evaluators.
inline constexpr double kRegularityMargin = 1e-6;

/// min over q-dependent roots of |α(q) − nearest singular point|.
double singular_distance(const ModelSpec& spec, const Vec& q);
/// Throws DomainError naming the offending root if q is not regular.
void check_regular(const ModelSpec& spec, const Vec& q);
/// Throws ValidationError on size mismatch or non-traceless data.
void check_point(const ModelSpec& spec, const PhasePoint& pt);

cplx hamiltonian(const ModelSpec& spec, const PhasePoint& pt);
Mat lax(const ModelSpec& spec, const PhasePoint& pt, cplx z);
std::vector<Mat> lax_batch(const ModelSpec& spec, const PhasePoint& pt, std::span<const cplx> zs);

enum class LaxLimit { rational_inf, trig_plus_i_inf, trig_minus_i_inf };
Mat lax_limit(const ModelSpec& spec, const PhasePoint& pt, LaxLimit which);

/// Gradient δ_ξℋ; the spin equation is ξ̇ = [ξ, δ_ξℋ].
Mat spin_gradient(const ModelSpec& spec, const PhasePoint& pt);
Tangent eom(const ModelSpec& spec, const PhasePoint& pt);

cplx reduced_hamiltonian(const ModelSpec& spec, const ReducedPoint& rpt);
/// ℳ = δℋ(s) + Σ_{i,j} C_ji [s, δℋ(s)]_{α_j} h_{α_i}
Mat reduced_generator(const ModelSpec& spec, const ReducedPoint& rpt);
Tangent reduced_eom(const ModelSpec& spec, const ReducedPoint& rpt);

/// (R(q)M)(z) with M = L/z; only valid on J⁻¹(0).
Mat r_action_on_M(const ModelSpec& spec, const PhasePoint& pt, cplx z);

enum class Difference { central, richardson };

/// ‖dL(z)/dt − [L(z), (R(q)M)(z)]‖ (Frobenius) with dL/dt by a central difference
/// along eom; `richardson` combines steps δ and δ/2 to cancel the O(δ²) term.
double lax_residual(const ModelSpec& spec, const PhasePoint& pt, cplx z, double delta = 1e-4,
                    Difference scheme = Difference::central);

/// Default circle radius for contour_hamiltonian.
double contour_radius(const ModelSpec& spec);
/// ½∮ tr L(z)² dz/(2πiz) by the trapezoidal rule.
cplx contour_hamiltonian(const ModelSpec& spec, const PhasePoint& pt, int n_samples,
                         std::optional<double> radius = std::nullopt);

/// Π_hξ as the vector of diagonal entries.
Vec momentum(const PhasePoint& pt);

PhasePoint advance(const PhasePoint& pt, const Tangent& v, double h);

}  // namespace spincm
