#include "spincm/lie.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "spincm/errors.hpp"

namespace spincm {

ReducedPoint make_reduced_point(Vec q, Vec p, Mat s) {
  const Eigen::Index n = q.size();
  if (n < 2 || p.size() != n || s.rows() != n || s.cols() != n) {
    throw ValidationError("reduced point: inconsistent dimensions");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(s(i, i)) > 1e-8) {
      throw ValidationError("reduced point: s must have zero diagonal");
    }
    s(i, i) = 0.0;
  }
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    if (std::abs(s(k, k + 1) - 1.0) > 1e-8) {
      std::ostringstream os;
      os << "reduced point: s_{alpha_" << k + 1 << "} = " << s(k, k + 1) << ", expected 1";
      throw ValidationError(os.str());
    }
    s(k, k + 1) = 1.0;
  }
  return ReducedPoint{std::move(q), std::move(p), std::move(s)};
}

}  // namespace spincm

namespace spincm::lie {

std::string to_string(Root a) {
  std::ostringstream os;
  os << "e" << a.i + 1 << "-e" << a.j + 1;
  return os.str();
}

LieContext::LieContext(int n) : n_(n) {
  if (n < 2) {
    throw ValidationError("sl(N) context requires N >= 2, got " + std::to_string(n));
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) roots_.push_back({i, j});
    }
  }
  for (int k = 1; k < n; ++k) {
    Mat x = Mat::Zero(n, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(k * (k + 1)));
    for (int m = 0; m < k; ++m) x(m, m) = scale;
    x(k, k) = -k * scale;
    cartan_basis_.push_back(std::move(x));
  }
  const int r = n - 1;
  cartan_ = Eigen::MatrixXd::Zero(r, r);
  for (int a = 0; a < r; ++a) {
    cartan_(a, a) = 2.0;
    if (a + 1 < r) {
      cartan_(a, a + 1) = -1.0;
      cartan_(a + 1, a) = -1.0;
    }
  }
  inverse_cartan_ = cartan_.inverse();
}

int LieContext::root_index(Root a) const {
  if (a.i < 0 || a.j < 0 || a.i >= n_ || a.j >= n_ || a.i == a.j) {
    throw ValidationError("invalid root " + to_string(a) + " for sl(" + std::to_string(n_) + ")");
  }
  // Lexicographic over i ≠ j: row i holds n-1 roots.
  return a.i * (n_ - 1) + (a.j < a.i ? a.j : a.j - 1);
}

std::optional<Root> LieContext::make_root(int i, int j) const {
  if (i < 0 || j < 0 || i >= n_ || j >= n_ || i == j) return std::nullopt;
  return Root{i, j};
}

Mat LieContext::root_vector(Root a) const {
  root_index(a);
  Mat e = Mat::Zero(n_, n_);
  e(a.i, a.j) = 1.0;
  return e;
}

Mat LieContext::coroot(Root a) const {
  root_index(a);
  Mat h = Mat::Zero(n_, n_);
  h(a.i, a.i) = 1.0;
  h(a.j, a.j) = -1.0;
  return h;
}

std::optional<Root> LieContext::sum(Root a, Root b) const {
  if (a.j == b.i && a.i != b.j) return Root{a.i, b.j};
  if (b.j == a.i && b.i != a.j) return Root{b.i, a.j};
  return std::nullopt;
}

int LieContext::structure_constant(Root a, Root b) const {
  // [E_ij, E_kl] = δ_jk E_il − δ_li E_kj
  if (a.j == b.i && a.i != b.j) return 1;
  if (b.j == a.i && b.i != a.j) return -1;
  return 0;
}

LieContext build_sl_context(int n) { return LieContext(n); }

namespace {

double trace_tolerance(const Mat& x) { return 1e-10 * std::max(1.0, x.cwiseAbs().maxCoeff()); }

}  // namespace

Mat project_cartan(const Mat& x) {
  if (x.rows() != x.cols()) throw ValidationError("project_cartan: matrix must be square");
  if (std::abs(x.trace()) > trace_tolerance(x)) {
    throw ValidationError("project_cartan: matrix is not traceless");
  }
  return x.diagonal().asDiagonal();
}

cplx root_coefficient(const Mat& x, Root a) {
  const auto n = static_cast<int>(x.rows());
  if (a.i < 0 || a.j < 0 || a.i >= n || a.j >= n || a.i == a.j) {
    throw ValidationError("root_coefficient: invalid root " + to_string(a));
  }
  return x(a.i, a.j);
}

RootClass ValidatedSubset::classify(Root a) const {
  if (contains(a)) return RootClass::span;
  return a.positive() ? RootClass::plusbar : RootClass::minusbar;
}

namespace {

// Union-find over {0..n-1}.
struct Partition {
  std::vector<int> parent;
  explicit Partition(int n) : parent(static_cast<size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int i) {
    while (parent[static_cast<size_t>(i)] != i) i = parent[static_cast<size_t>(i)];
    return i;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<size_t>(std::max(a, b))] = std::min(a, b);
  }
};

}  // namespace

ValidatedSubset validate_root_subset(const LieContext& ctx, const RootSubset& spec) {
  const int n = ctx.n();
  ValidatedSubset out;
  out.raw_ = spec;
  Partition part(n);

  if (spec.kind == RootSubset::Kind::delta) {
    std::vector<char> member(ctx.roots().size(), 0);
    for (const Root& a : spec.delta_members) member[static_cast<size_t>(ctx.root_index(a))] = 1;
    for (const Root& a : ctx.roots()) {
      if (!member[static_cast<size_t>(ctx.root_index(a))]) continue;
      if (!member[static_cast<size_t>(ctx.root_index(a.negated()))]) {
        throw ValidationError("root subset not symmetric: " + to_string(a) + " present, " +
                              to_string(a.negated()) + " missing");
      }
      for (const Root& b : ctx.roots()) {
        if (!member[static_cast<size_t>(ctx.root_index(b))]) continue;
        if (auto c = ctx.sum(a, b); c && !member[static_cast<size_t>(ctx.root_index(*c))]) {
          throw ValidationError("root subset not closed: " + to_string(a) + " + " + to_string(b) +
                                " = " + to_string(*c) + " missing");
        }
      }
      part.unite(a.i, a.j);
    }
  } else {
    for (int k : spec.pi_members) {
      if (k < 0 || k >= ctx.rank()) {
        throw ValidationError("simple root index " + std::to_string(k + 1) + " out of range");
      }
      part.unite(k, k + 1);
    }
  }

  std::vector<int> label(static_cast<size_t>(n), -1);
  out.block_of_.assign(static_cast<size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    const int r = part.find(i);
    if (label[static_cast<size_t>(r)] < 0) {
      label[static_cast<size_t>(r)] = static_cast<int>(out.blocks_.size());
      out.blocks_.emplace_back();
    }
    out.block_of_[static_cast<size_t>(i)] = label[static_cast<size_t>(r)];
    out.blocks_[static_cast<size_t>(label[static_cast<size_t>(r)])].push_back(i);
  }
  for (const Root& a : ctx.roots()) {
    switch (out.classify(a)) {
      case RootClass::span: out.span_.push_back(a); break;
      case RootClass::plusbar: out.plusbar_.push_back(a); break;
      case RootClass::minusbar: out.minusbar_.push_back(a); break;
    }
  }
  return out;
}

RootSubset full_delta(const LieContext& ctx) {
  RootSubset s;
  s.kind = RootSubset::Kind::delta;
  s.delta_members.assign(ctx.roots().begin(), ctx.roots().end());
  return s;
}

RootSubset full_pi(const LieContext& ctx) {
  RootSubset s;
  s.kind = RootSubset::Kind::pi;
  for (int k = 0; k < ctx.rank(); ++k) s.pi_members.push_back(k);
  return s;
}

Mat gauge_group_element(const LieContext& ctx, const Mat& xi) {
  const int n = ctx.n();
  if (xi.rows() != n || xi.cols() != n) throw ValidationError("gauge_group_element: wrong size");
  const int r = ctx.rank();
  Eigen::VectorXcd logs(r);
  for (int j = 0; j < r; ++j) {
    const cplx v = xi(j, j + 1);
    if (v == 0.0) {
      throw DomainError("xi outside U: simple-root coefficient xi_{alpha_" + std::to_string(j + 1) +
                        "} vanishes");
    }
    logs(j) = std::log(v);
  }
  // exponent = Σ_i c_i h_{α_i} with c_i = Σ_j C_ji log ξ_{α_j}
  const Eigen::VectorXcd c = ctx.inverse_cartan().transpose().cast<cplx>() * logs;
  Vec diag = Vec::Zero(n);
  for (int i = 0; i < r; ++i) {
    diag(i) += c(i);
    diag(i + 1) -= c(i);
  }
  return diag.array().exp().matrix().asDiagonal();
}

Mat reduce_matrix(const LieContext& ctx, const Mat& xi) {
  const Vec g = gauge_group_element(ctx, xi).diagonal();
  Mat s = xi;
  for (int i = 0; i < ctx.n(); ++i) {
    for (int j = 0; j < ctx.n(); ++j) s(i, j) *= g(j) / g(i);
  }
  return s;
}

ReducedPoint reduce_point(const LieContext& ctx, const PhasePoint& pt) {
  Mat s = reduce_matrix(ctx, pt.xi);
  for (int k = 0; k < ctx.rank(); ++k) {
    if (std::abs(s(k, k + 1) - 1.0) > 1e-8) {
      throw InternalError("reduce_point: simple-root coefficient not normalised");
    }
    s(k, k + 1) = 1.0;
  }
  return ReducedPoint{pt.q, pt.p, std::move(s)};
}

}  // namespace spincm::lie
