#include "spincm/models.hpp"

#include <cmath>
#include <sstream>

#include "spincm/errors.hpp"

namespace spincm {

using lie::Root;
using lie::RootClass;

const char* to_string(Family f) {
  switch (f) {
    case Family::rational: return "rational";
    case Family::trigonometric: return "trigonometric";
    case Family::elliptic: return "elliptic";
  }
  return "?";
}

ModelSpec ModelSpec::rational(int n, const lie::RootSubset& delta_prime) {
  if (delta_prime.kind != lie::RootSubset::Kind::delta) {
    throw ValidationError("rational model expects a closed symmetric root subset (kind delta)");
  }
  ModelSpec m;
  m.family_ = Family::rational;
  m.ctx_ = std::make_shared<lie::LieContext>(n);
  m.subset_ = std::make_shared<lie::ValidatedSubset>(lie::validate_root_subset(*m.ctx_, delta_prime));
  return m;
}

ModelSpec ModelSpec::trigonometric(int n, const lie::RootSubset& pi_prime) {
  if (pi_prime.kind != lie::RootSubset::Kind::pi) {
    throw ValidationError("trigonometric model expects a subset of simple roots (kind pi)");
  }
  ModelSpec m;
  m.family_ = Family::trigonometric;
  m.ctx_ = std::make_shared<lie::LieContext>(n);
  m.subset_ = std::make_shared<lie::ValidatedSubset>(lie::validate_root_subset(*m.ctx_, pi_prime));
  return m;
}

ModelSpec ModelSpec::elliptic(int n, cplx omega1, cplx omega2) {
  ModelSpec m;
  m.family_ = Family::elliptic;
  m.ctx_ = std::make_shared<lie::LieContext>(n);
  m.subset_ = std::make_shared<lie::ValidatedSubset>(lie::validate_root_subset(*m.ctx_, lie::full_delta(*m.ctx_)));
  m.lattice_ = std::make_shared<EllipticLattice>(omega1, omega2);
  return m;
}

const EllipticLattice& ModelSpec::lattice() const {
  if (!lattice_) throw ValidationError("model has no period lattice (not elliptic)");
  return *lattice_;
}

bool ModelSpec::q_dependent(Root a) const {
  return family_ == Family::elliptic || subset_->contains(a);
}

namespace {

cplx alpha_q(Root a, const Vec& q) { return lie::LieContext::evaluate(a, q); }

double scale_of(const Mat& x) { return std::max(1.0, x.cwiseAbs().maxCoeff()); }

cplx csc2(cplx w) {
  const cplx c = cot_c(w);
  return 1.0 + c * c;
}

Mat commutator(const Mat& a, const Mat& b) { return a * b - b * a; }

// L(z) = p + a(z)Π_hξ + Σ_α K_α(z) ξ_α e_α
struct LaxKernel {
  cplx a;
  Mat K;  // K(i,j) for i ≠ j
};

LaxKernel kernel(const ModelSpec& spec, const Vec& q, cplx z) {
  const int n = spec.n();
  LaxKernel k{0.0, Mat::Zero(n, n)};
  switch (spec.family()) {
    case Family::rational: {
      if (std::abs(z) < kPoleThreshold) throw PoleError("rational Lax operator: pole at z = 0", 0.0);
      k.a = 1.0 / z;
      for (const Root& r : spec.ctx().roots()) {
        k.K(r.i, r.j) = k.a + (spec.subset().contains(r) ? 1.0 / alpha_q(r, q) : cplx(0.0));
      }
      break;
    }
    case Family::trigonometric: {
      k.a = cot_c(z);
      for (const Root& r : spec.ctx().roots()) {
        k.K(r.i, r.j) = -phi_alpha(alpha_q(r, q), z, spec.subset().classify(r));
      }
      break;
    }
    case Family::elliptic: {
      const auto& lat = spec.lattice();
      k.a = lat.zeta(z);
      for (const Root& r : spec.ctx().roots()) k.K(r.i, r.j) = -lat.l(alpha_q(r, q), z);
      break;
    }
  }
  return k;
}

Mat assemble(const PhasePoint& pt, const LaxKernel& k) {
  Mat L = k.K.cwiseProduct(pt.xi);
  for (int i = 0; i < pt.dim(); ++i) L(i, i) = pt.p(i) + k.a * pt.xi(i, i);
  return L;
}

void require_on_shell(const PhasePoint& pt, const char* what) {
  if (pt.xi.diagonal().cwiseAbs().maxCoeff() > 1e-12 * scale_of(pt.xi)) {
    throw ContractError(std::string(what) + " requires J^-1(0): xi has a nonzero diagonal");
  }
}

}  // namespace

namespace {

struct Nearest {
  double dist = INFINITY;
  Root root;
  cplx value, singular;
};

Nearest nearest_singularity(const ModelSpec& spec, const Vec& q) {
  Nearest best;
  for (const Root& r : spec.ctx().roots()) {
    if (!r.positive() || !spec.q_dependent(r)) continue;
    const cplx w = alpha_q(r, q);
    cplx s = 0.0;
    switch (spec.family()) {
      case Family::rational: break;
      case Family::trigonometric: s = std::round(w.real() / kPi) * kPi; break;
      case Family::elliptic: s = spec.lattice().nearest_lattice_point(w); break;
    }
    const double d = std::abs(w - s);
    if (!(d >= best.dist)) best = Nearest{d, r, w, s};
  }
  return best;
}

}  // namespace

double singular_distance(const ModelSpec& spec, const Vec& q) { return nearest_singularity(spec, q).dist; }

void check_regular(const ModelSpec& spec, const Vec& q) {
  const Nearest n = nearest_singularity(spec, q);
  if (!(n.dist >= kRegularityMargin)) {
    std::ostringstream os;
    os << "singular configuration: alpha(q) for root " << lie::to_string(n.root) << " is " << n.value
       << ", within " << kRegularityMargin << " of the singular point " << n.singular;
    throw DomainError(os.str());
  }
}

void check_point(const ModelSpec& spec, const PhasePoint& pt) {
  const int n = spec.n();
  if (pt.q.size() != n || pt.p.size() != n || pt.xi.rows() != n || pt.xi.cols() != n) {
    throw ValidationError("phase point dimensions do not match sl(" + std::to_string(n) + ")");
  }
  const double tol = 1e-9;
  if (std::abs(pt.q.sum()) > tol * std::max(1.0, pt.q.cwiseAbs().maxCoeff()) ||
      std::abs(pt.p.sum()) > tol * std::max(1.0, pt.p.cwiseAbs().maxCoeff()) ||
      std::abs(pt.xi.trace()) > tol * scale_of(pt.xi)) {
    throw ValidationError("q, p and xi must be traceless");
  }
}

cplx hamiltonian(const ModelSpec& spec, const PhasePoint& pt) {
  check_regular(spec, pt.q);
  cplx h = 0.5 * (pt.p.array() * pt.p.array()).sum();
  for (const Root& r : spec.ctx().roots()) {
    const cplx xx = pt.xi(r.i, r.j) * pt.xi(r.j, r.i);
    const cplx w = alpha_q(r, pt.q);
    switch (spec.family()) {
      case Family::rational:
        if (spec.subset().contains(r)) h -= 0.5 * xx / (w * w);
        break;
      case Family::trigonometric:
        if (spec.subset().contains(r)) {
          h -= 0.5 * (csc2(w) - 1.0 / 3.0) * xx;
        } else {
          h += xx / 6.0;
        }
        break;
      case Family::elliptic: h -= 0.5 * spec.lattice().wp(w) * xx; break;
    }
  }
  if (spec.family() == Family::trigonometric) {
    h -= (pt.xi.diagonal().array() * pt.xi.diagonal().array()).sum() / 3.0;
  }
  return h;
}

Mat lax(const ModelSpec& spec, const PhasePoint& pt, cplx z) {
  check_regular(spec, pt.q);
  return assemble(pt, kernel(spec, pt.q, z));
}

std::vector<Mat> lax_batch(const ModelSpec& spec, const PhasePoint& pt, std::span<const cplx> zs) {
  check_regular(spec, pt.q);
  std::vector<Mat> out;
  out.reserve(zs.size());
  if (spec.family() != Family::elliptic) {
    for (cplx z : zs) out.push_back(assemble(pt, kernel(spec, pt.q, z)));
    return out;
  }
  const auto& lat = spec.lattice();
  const auto roots = spec.ctx().roots();
  const size_t nr = roots.size(), nz = zs.size();
  std::vector<cplx> pts;
  pts.reserve(nz + nr + nr * nz);
  pts.insert(pts.end(), zs.begin(), zs.end());
  for (const Root& r : roots) pts.push_back(alpha_q(r, pt.q));
  for (size_t iz = 0; iz < nz; ++iz)
    for (const Root& r : roots) pts.push_back(alpha_q(r, pt.q) + zs[iz]);
  const auto jets = lat.jets(pts);
  for (size_t iz = 0; iz < nz; ++iz) {
    const auto& jz = jets[iz];
    if (jz.at_pole) throw PoleError("elliptic Lax operator: z at a lattice point", jz.nearest);
    LaxKernel k{jz.zeta, Mat::Zero(spec.n(), spec.n())};
    for (size_t ir = 0; ir < nr; ++ir) {
      const Root& r = roots[ir];
      k.K(r.i, r.j) = jets[nz + nr + iz * nr + ir].sigma / (jets[nz + ir].sigma * jz.sigma);
    }
    out.push_back(assemble(pt, k));
  }
  return out;
}

Mat lax_limit(const ModelSpec& spec, const PhasePoint& pt, LaxLimit which) {
  check_regular(spec, pt.q);
  const int n = spec.n();
  Mat L = Mat::Zero(n, n);
  if (which == LaxLimit::rational_inf) {
    if (spec.family() != Family::rational) throw ValidationError("lax_limit: rational_inf needs the rational family");
    for (const Root& r : spec.ctx().roots()) {
      if (spec.subset().contains(r)) L(r.i, r.j) = pt.xi(r.i, r.j) / alpha_q(r, pt.q);
    }
    L.diagonal() = pt.p;
    return L;
  }
  if (spec.family() != Family::trigonometric) throw ValidationError("lax_limit: ±i∞ limits need the trigonometric family");
  const double s = (which == LaxLimit::trig_plus_i_inf) ? 1.0 : -1.0;
  // cot z → ∓i as z → ±i∞
  const cplx c_inf = -s * kI;
  for (const Root& r : spec.ctx().roots()) {
    const cplx x = pt.xi(r.i, r.j);
    switch (spec.subset().classify(r)) {
      case RootClass::span: L(r.i, r.j) = (cot_c(alpha_q(r, pt.q)) + c_inf) * x; break;
      case RootClass::plusbar: L(r.i, r.j) = (c_inf - kI) * x; break;
      case RootClass::minusbar: L(r.i, r.j) = (c_inf + kI) * x; break;
    }
  }
  for (int i = 0; i < n; ++i) L(i, i) = pt.p(i) + c_inf * pt.xi(i, i);
  return L;
}

Mat spin_gradient(const ModelSpec& spec, const PhasePoint& pt) {
  check_regular(spec, pt.q);
  const int n = spec.n();
  Mat B = Mat::Zero(n, n);
  for (const Root& r : spec.ctx().roots()) {
    const cplx x = pt.xi(r.i, r.j);
    const cplx w = alpha_q(r, pt.q);
    switch (spec.family()) {
      case Family::rational:
        if (spec.subset().contains(r)) B(r.i, r.j) = -x / (w * w);
        break;
      case Family::trigonometric:
        B(r.i, r.j) = spec.subset().contains(r) ? -(csc2(w) - 1.0 / 3.0) * x : x / 3.0;
        break;
      case Family::elliptic: B(r.i, r.j) = -spec.lattice().wp(w) * x; break;
    }
  }
  if (spec.family() == Family::trigonometric) {
    B.diagonal() = -(2.0 / 3.0) * pt.xi.diagonal();
  }
  return B;
}

namespace {

Vec force(const ModelSpec& spec, const Vec& q, const Mat& xi) {
  Vec f = Vec::Zero(spec.n());
  for (const Root& r : spec.ctx().roots()) {
    if (!spec.q_dependent(r)) continue;
    const cplx xx = xi(r.i, r.j) * xi(r.j, r.i);
    const cplx w = alpha_q(r, q);
    cplx c = 0.0;
    switch (spec.family()) {
      case Family::rational: c = -xx / (w * w * w); break;
      case Family::trigonometric: {
        const cplx ct = cot_c(w);
        c = -ct * (1.0 + ct * ct) * xx;
        break;
      }
      case Family::elliptic: c = 0.5 * spec.lattice().wp_prime(w) * xx; break;
    }
    f(r.i) += c;
    f(r.j) -= c;
  }
  return f;
}

}  // namespace

Tangent eom(const ModelSpec& spec, const PhasePoint& pt) {
  const Mat B = spin_gradient(spec, pt);
  return Tangent{pt.p, force(spec, pt.q, pt.xi), commutator(pt.xi, B)};
}

cplx reduced_hamiltonian(const ModelSpec& spec, const ReducedPoint& rpt) {
  return hamiltonian(spec, PhasePoint{rpt.q, rpt.p, rpt.s});
}

Mat reduced_generator(const ModelSpec& spec, const ReducedPoint& rpt) {
  const PhasePoint pt{rpt.q, rpt.p, rpt.s};
  Mat M = spin_gradient(spec, pt);
  const Mat sb = commutator(rpt.s, M);
  const auto& ctx = spec.ctx();
  const int r = ctx.rank();
  // c_i = Σ_j C_ji [s, B]_{α_j}
  for (int i = 0; i < r; ++i) {
    cplx c = 0.0;
    for (int j = 0; j < r; ++j) c += ctx.inverse_cartan()(j, i) * sb(j, j + 1);
    M(i, i) += c;
    M(i + 1, i + 1) -= c;
  }
  return M;
}

Tangent reduced_eom(const ModelSpec& spec, const ReducedPoint& rpt) {
  const Mat M = reduced_generator(spec, rpt);
  return Tangent{rpt.p, force(spec, rpt.q, rpt.s), commutator(rpt.s, M)};
}

Mat r_action_on_M(const ModelSpec& spec, const PhasePoint& pt, cplx z) {
  require_on_shell(pt, "r_action_on_M");
  const Mat L = lax(spec, pt, z);
  const Mat M = L / z;
  const int n = spec.n();
  Mat R = Mat::Zero(n, n);
  switch (spec.family()) {
    case Family::rational: {
      R = -0.5 * M;
      for (const Root& r : spec.ctx().roots()) {
        if (!spec.subset().contains(r)) continue;
        const cplx w = alpha_q(r, pt.q);
        R(r.i, r.j) -= pt.xi(r.i, r.j) / (w * w);
      }
      break;
    }
    case Family::trigonometric: {
      const cplx cz = cot_c(z);
      R = 0.5 * M;
      R.diagonal() -= cz * pt.p;
      for (const Root& r : spec.ctx().roots()) {
        const cplx w = alpha_q(r, pt.q);
        const RootClass cls = spec.subset().classify(r);
        const cplx phi = phi_alpha(w, z, cls);
        const cplx coef = cls == RootClass::span ? phi * (cot_c(w) + cz - cot_c(w + z)) : phi * cz;
        R(r.i, r.j) += coef * pt.xi(r.i, r.j);
      }
      break;
    }
    case Family::elliptic: {
      const auto& lat = spec.lattice();
      const cplx zz = lat.zeta(z);
      R = 0.5 * M;
      R.diagonal() -= zz * pt.p;
      for (const Root& r : spec.ctx().roots()) {
        const cplx w = alpha_q(r, pt.q);
        const cplx coef = lat.l(w, z) * (lat.zeta(w) + zz - lat.zeta(w + z));
        R(r.i, r.j) += coef * pt.xi(r.i, r.j);
      }
      break;
    }
  }
  return R;
}

PhasePoint advance(const PhasePoint& pt, const Tangent& v, double h) {
  return PhasePoint{pt.q + h * v.dq, pt.p + h * v.dp, pt.xi + h * v.dxi};
}

double lax_residual(const ModelSpec& spec, const PhasePoint& pt, cplx z, double delta, Difference scheme) {
  const Mat RM = r_action_on_M(spec, pt, z);
  const Mat L = lax(spec, pt, z);
  const Tangent v = eom(spec, pt);
  auto central = [&](double h) {
    return Mat((lax(spec, advance(pt, v, h), z) - lax(spec, advance(pt, v, -h), z)) / (2.0 * h));
  };
  Mat dL = central(delta);
  if (scheme == Difference::richardson) dL = (4.0 * central(0.5 * delta) - dL) / 3.0;
  return (dL - commutator(L, RM)).norm();
}

double contour_radius(const ModelSpec& spec) {
  switch (spec.family()) {
    case Family::rational: return 0.5;
    case Family::trigonometric: return kPi / 2;
    case Family::elliptic: return 0.5 * spec.lattice().min_period();
  }
  return 0.5;
}

cplx contour_hamiltonian(const ModelSpec& spec, const PhasePoint& pt, int n_samples, std::optional<double> radius) {
  if (n_samples < 16) throw ValidationError("contour_hamiltonian needs at least 16 samples");
  const double r = radius.value_or(contour_radius(spec));
  std::vector<cplx> zs(static_cast<size_t>(n_samples));
  for (int k = 0; k < n_samples; ++k) zs[static_cast<size_t>(k)] = std::polar(r, 2.0 * kPi * k / n_samples);
  std::vector<Mat> Ls;
  try {
    Ls = lax_batch(spec, pt, zs);
  } catch (const PoleError& e) {
    throw DomainError(std::string("contour radius hits a singularity of L: ") + e.what());
  }
  cplx acc = 0.0;
  for (const Mat& L : Ls) acc += (L * L).trace();
  return 0.5 * acc / double(n_samples);
}

Vec momentum(const PhasePoint& pt) { return pt.xi.diagonal(); }

}  // namespace spincm
