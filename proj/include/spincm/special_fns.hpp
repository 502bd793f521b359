#pragma once

#include <span>
#include <vector>

#include "spincm/lie.hpp"
#include "spincm/theta_kernel.hpp"
#include "spincm/types.hpp"

namespace spincm {

/// Distance to a pole below which evaluators raise PoleError.
inline constexpr double kPoleThreshold = 1e-8;

/// cot z, stable for large |Im z| (tends to ∓i).
cplx cot_c(cplx z);

/// Trigonometric r-matrix kernel φ_α(q, z) with w = α(q):
///   span:     −sin(w+z)/(sin w sin z)
///   plusbar:  −e^{−iz}/sin z
///   minusbar: −e^{iz}/sin z
cplx phi_alpha(cplx w, cplx z, lie::RootClass cls);

/// ζ, ℘, ℘′ and σ at one point.
struct WeierstrassJet {
  cplx zeta;
  cplx wp;
  cplx wp_prime;
  cplx sigma;
  bool at_pole = false;  // z within kPoleThreshold of Λ; only sigma (= 0) is meaningful
  cplx nearest;          // nearest lattice point
};

/// Period lattice Λ = 2ω₁ℤ + 2ω₂ℤ with its Weierstrass functions, evaluated through
/// the θ₁ series in the nome e^{iπτ}, τ = ω₂/ω₁, after reduction of z to the
/// period parallelogram centred at 0.
class EllipticLattice {
 public:
  EllipticLattice(cplx omega1, cplx omega2);

  cplx omega1() const { return w1_; }
  cplx omega2() const { return w2_; }
  cplx eta1() const { return eta1_; }
  cplx eta2() const { return eta2_; }
  cplx g2() const { return g2_; }
  cplx g3() const { return g3_; }
  cplx tau() const { return tau_; }
  cplx nome() const { return nome_; }
  const kernels::ThetaSeries& series() const { return series_; }

  /// Lattice point nearest to z (in the sense of the centred period parallelogram).
  cplx nearest_lattice_point(cplx z) const { return reduce(z).w; }

  /// Shortest nonzero lattice vector length.
  double min_period() const;

  cplx wp(cplx z) const;
  cplx wp_prime(cplx z) const;
  cplx zeta(cplx z) const;
  cplx sigma(cplx z) const;
  /// l(w, z) = −σ(w+z)/(σ(w)σ(z)).
  cplx l(cplx w, cplx z) const;

  /// Batched evaluation; never throws on poles, flags them instead.
  std::vector<WeierstrassJet> jets(std::span<const cplx> z,
                                   kernels::Backend backend = kernels::Backend::automatic) const;
  WeierstrassJet jet(cplx z) const;

 private:
  struct Reduced {
    cplx r;  // z − w
    int m = 0, n = 0;
    cplx w;  // 2mω₁ + 2nω₂
  };
  Reduced reduce(cplx z) const;
  void finish(const Reduced& red, cplx th0, cplx th1, cplx th2, cplx th3, WeierstrassJet& out) const;

  cplx w1_, w2_, tau_, nome_, k_;
  cplx eta1_, eta2_, g2_, g3_;
  cplx theta1_prime0_;
  kernels::ThetaSeries series_;
};

inline cplx wp(const EllipticLattice& lat, cplx z) { return lat.wp(z); }
inline cplx wp_prime(const EllipticLattice& lat, cplx z) { return lat.wp_prime(z); }
inline cplx zeta_w(const EllipticLattice& lat, cplx z) { return lat.zeta(z); }
inline cplx sigma_w(const EllipticLattice& lat, cplx z) { return lat.sigma(z); }
inline cplx l_func(const EllipticLattice& lat, cplx w, cplx z) { return lat.l(w, z); }

}  // namespace spincm
