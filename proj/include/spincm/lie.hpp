#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "spincm/phase_space.hpp"
#include "spincm/types.hpp"

namespace spincm::lie {

/// The root ε_i − ε_j of sl(N) (0-based indices, i ≠ j).
struct Root {
  int i = 0;
  int j = 0;

  bool positive() const { return i < j; }
  Root negated() const { return {j, i}; }
  friend bool operator==(const Root&, const Root&) = default;
};

std::string to_string(Root a);

/// Root data, Chevalley basis and pairing of sl(N, ℂ) in its defining
/// representation. The pairing everywhere is (X, Y) = tr(XY), so that
/// (e_α, e_{-α}) = 1 and [e_α, e_{-α}] = H_α with e_α = E_ij, H_α = E_ii − E_jj.
/// Roots are enumerated lexicographically in (i, j).
class LieContext {
 public:
  explicit LieContext(int n);

  int n() const { return n_; }
  int rank() const { return n_ - 1; }

  std::span<const Root> roots() const { return roots_; }
  int root_index(Root a) const;
  /// ε_i − ε_j if i ≠ j and both are in range.
  std::optional<Root> make_root(int i, int j) const;

  Mat root_vector(Root a) const;
  Mat coroot(Root a) const;
  /// h_{α} = 2/(α,α) H_α; equals H_α for the trace pairing.
  Mat coroot_normalized(Root a) const { return coroot(a); }

  /// Orthonormal basis x_1..x_{N-1} of the diagonal Cartan subalgebra.
  const std::vector<Mat>& cartan_basis() const { return cartan_basis_; }

  /// α_k = ε_k − ε_{k+1}, k = 0..rank-1.
  Root simple_root(int k) const { return {k, k + 1}; }
  const Eigen::MatrixXd& cartan_matrix() const { return cartan_; }
  const Eigen::MatrixXd& inverse_cartan() const { return inverse_cartan_; }

  /// α + β if it is a root.
  std::optional<Root> sum(Root a, Root b) const;
  /// N_{α,β} with [e_α, e_β] = N_{α,β} e_{α+β}; 0 when α + β is not a root.
  int structure_constant(Root a, Root b) const;

  /// α(q) for q given by its diagonal entries.
  static cplx evaluate(Root a, const Vec& q) { return q(a.i) - q(a.j); }

 private:
  int n_;
  std::vector<Root> roots_;
  std::vector<Mat> cartan_basis_;
  Eigen::MatrixXd cartan_;
  Eigen::MatrixXd inverse_cartan_;
};

LieContext build_sl_context(int n);

/// Diagonal part Π_h X of a traceless matrix.
Mat project_cartan(const Mat& x);

/// (X, e_{-α}) = X_ij for α = ε_i − ε_j.
cplx root_coefficient(const Mat& x, Root a);

enum class RootClass { span, plusbar, minusbar };

/// Raw root-subset parameter as read from a model description.
struct RootSubset {
  enum class Kind { delta, pi };
  Kind kind = Kind::delta;
  std::vector<Root> delta_members;  // kind == delta
  std::vector<int> pi_members;      // kind == pi, simple-root indices 0..rank-1
};

/// A root subset that passed validation, with its derived block structure.
/// For Δ′ the blocks are the classes of i ~ j ⇔ ε_i − ε_j ∈ Δ′. For π′ the
/// blocks are the runs of consecutive indices joined by simple roots of π′;
/// ⟨π′⟩ is the set of roots inside a block and ōπ′^± the positive/negative
/// roots between blocks.
class ValidatedSubset {
 public:
  RootSubset::Kind kind() const { return raw_.kind; }
  const RootSubset& raw() const { return raw_; }
  const std::vector<std::vector<int>>& blocks() const { return blocks_; }
  int block_of(int i) const { return block_of_[static_cast<size_t>(i)]; }

  /// Δ′ membership (kind delta) or ⟨π′⟩ membership (kind pi).
  bool contains(Root a) const { return block_of(a.i) == block_of(a.j); }
  RootClass classify(Root a) const;

  const std::vector<Root>& span() const { return span_; }
  const std::vector<Root>& plusbar() const { return plusbar_; }
  const std::vector<Root>& minusbar() const { return minusbar_; }

 private:
  friend ValidatedSubset validate_root_subset(const LieContext&, const RootSubset&);
  RootSubset raw_;
  std::vector<std::vector<int>> blocks_;
  std::vector<int> block_of_;
  std::vector<Root> span_;
  std::vector<Root> plusbar_;
  std::vector<Root> minusbar_;
};

ValidatedSubset validate_root_subset(const LieContext& ctx, const RootSubset& spec);

/// Δ′ = Δ and π′ = π conveniences.
RootSubset full_delta(const LieContext& ctx);
RootSubset full_pi(const LieContext& ctx);

/// g(ξ) = exp(Σ_{i,j} C_ji log ξ_{α_j} h_{α_i}), principal log. Diagonal, det 1.
/// Throws DomainError when some ξ_{α_i} vanishes (ξ outside 𝒰).
Mat gauge_group_element(const LieContext& ctx, const Mat& xi);

/// Ad_{g(ξ)^{-1}} ξ.
Mat reduce_matrix(const LieContext& ctx, const Mat& xi);

/// π_0(q, p, ξ) = (q, p, Ad_{g(ξ)^{-1}} ξ).
ReducedPoint reduce_point(const LieContext& ctx, const PhasePoint& pt);

}  // namespace spincm::lie
