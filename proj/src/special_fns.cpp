#include "spincm/special_fns.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "spincm/errors.hpp"

namespace spincm {

namespace {

// e^{x} − 1 for complex x without cancellation near 0.
cplx expm1_c(cplx x) {
  const double a = x.real(), b = x.imag();
  const double sh = std::sin(0.5 * b);
  return {std::expm1(a) * std::cos(b) - 2.0 * sh * sh, std::exp(a) * std::sin(b)};
}

std::string fmt(cplx z) {
  std::ostringstream os;
  os.precision(6);
  os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
  return os.str();
}

}  // namespace

cplx cot_c(cplx z) {
  const double m = std::round(z.real() / kPi);
  const cplx nearest{m * kPi, 0.0};
  if (std::abs(z - nearest) < kPoleThreshold) {
    throw PoleError("cot: pole at " + fmt(nearest), nearest);
  }
  if (z.imag() >= 0.0) {
    const cplx e = std::exp(2.0 * kI * z);
    return kI * (e + 1.0) / expm1_c(2.0 * kI * z);
  }
  const cplx e = std::exp(-2.0 * kI * z);
  return -kI * (e + 1.0) / expm1_c(-2.0 * kI * z);
}

cplx phi_alpha(cplx w, cplx z, lie::RootClass cls) {
  switch (cls) {
    case lie::RootClass::span: return -(cot_c(w) + cot_c(z));
    case lie::RootClass::plusbar: return -(cot_c(z) - kI);
    case lie::RootClass::minusbar: return -(cot_c(z) + kI);
  }
  return 0.0;
}

EllipticLattice::EllipticLattice(cplx omega1, cplx omega2) : w1_(omega1), w2_(omega2) {
  if (std::abs(omega1) == 0.0 || !std::isfinite(std::abs(omega1)) || !std::isfinite(std::abs(omega2))) {
    throw ValidationError("lattice: half-periods must be finite and nonzero");
  }
  tau_ = w2_ / w1_;
  if (!(tau_.imag() > 0.0)) {
    throw ValidationError("lattice: Im(omega2/omega1) must be positive");
  }
  k_ = kPi / (2.0 * w1_);
  nome_ = std::exp(kI * kPi * tau_);

  const double Q = kPi * tau_.imag();
  const int nterms = static_cast<int>(std::ceil(std::sqrt(42.0 / Q + 0.25))) + 1;
  if (nterms > 2000) throw ValidationError("lattice: omega2/omega1 too close to the real axis");
  cplx th1 = 0.0, th3 = 0.0;
  for (int n = 0; n < nterms; ++n) {
    const double h = n + 0.5;
    const cplx c = (n % 2 == 0 ? 2.0 : -2.0) * std::exp(kI * kPi * tau_ * (h * h));
    series_.c_re.push_back(c.real());
    series_.c_im.push_back(c.imag());
    const double m = 2.0 * n + 1.0;
    th1 += c * m;
    th3 -= c * (m * m * m);
  }
  theta1_prime0_ = th1;
  eta1_ = -(kPi * kPi / (12.0 * w1_)) * th3 / th1;
  eta2_ = (eta1_ * w2_ - kI * kPi / 2.0) / w1_;

  const cplx e1 = jet(w1_).wp;
  const cplx e2 = jet(w2_).wp;
  const cplx e3 = jet(w1_ + w2_).wp;
  g2_ = -4.0 * (e1 * e2 + e1 * e3 + e2 * e3);
  g3_ = 4.0 * e1 * e2 * e3;
}

double EllipticLattice::min_period() const {
  double best = INFINITY;
  for (int m = -4; m <= 4; ++m) {
    for (int n = -4; n <= 4; ++n) {
      if (m == 0 && n == 0) continue;
      best = std::min(best, std::abs(2.0 * (double(m) * w1_ + double(n) * w2_)));
    }
  }
  return best;
}

EllipticLattice::Reduced EllipticLattice::reduce(cplx z) const {
  const cplx t = z / (2.0 * w1_);
  const double y = t.imag() / tau_.imag();
  const double x = t.real() - y * tau_.real();
  Reduced red;
  red.m = static_cast<int>(std::lround(x));
  red.n = static_cast<int>(std::lround(y));
  red.w = 2.0 * (double(red.m) * w1_ + double(red.n) * w2_);
  red.r = z - red.w;
  return red;
}

void EllipticLattice::finish(const Reduced& red, cplx th0, cplx th1, cplx th2, cplx th3,
                             WeierstrassJet& out) const {
  const cplx r = red.r;
  out.nearest = red.w;
  out.at_pole = std::abs(r) < kPoleThreshold;

  const cplx eta_w = 2.0 * (double(red.m) * eta1_ + double(red.n) * eta2_);
  const int parity = red.m + red.n + red.m * red.n;
  const double sign = (parity % 2 == 0) ? 1.0 : -1.0;
  const cplx sig_r = std::exp(eta1_ * r * r / (2.0 * w1_)) * th0 / (k_ * theta1_prime0_);
  out.sigma = (th0 == 0.0) ? cplx(0.0) : sign * std::exp(eta_w * (r + 0.5 * red.w)) * sig_r;
  if (out.at_pole) {
    out.zeta = out.wp = out.wp_prime = cplx(NAN, NAN);
    return;
  }
  const cplx a = th1 / th0;
  const cplx b = th2 / th0;
  const cplx c = th3 / th0;
  out.zeta = eta1_ * r / w1_ + k_ * a + eta_w;
  out.wp = -eta1_ / w1_ - k_ * k_ * (b - a * a);
  out.wp_prime = -k_ * k_ * k_ * (c - 3.0 * a * b + 2.0 * a * a * a);
}

WeierstrassJet EllipticLattice::jet(cplx z) const {
  const Reduced red = reduce(z);
  const cplx v = k_ * red.r;
  const cplx u = std::exp(kI * v), w = std::exp(-kI * v), s = std::sin(v);
  const double ur = u.real(), ui = u.imag(), wr = w.real(), wi = w.imag(), sr = s.real(), si = s.imag();
  std::array<double, 4> re{}, im{};
  kernels::ThetaInput in{&ur, &ui, &wr, &wi, &sr, &si, 1};
  kernels::ThetaOutput out{{&re[0], &re[1], &re[2], &re[3]}, {&im[0], &im[1], &im[2], &im[3]}};
  kernels::theta_scalar(series_, in, out);
  WeierstrassJet j;
  finish(red, {re[0], im[0]}, {re[1], im[1]}, {re[2], im[2]}, {re[3], im[3]}, j);
  return j;
}

std::vector<WeierstrassJet> EllipticLattice::jets(std::span<const cplx> z, kernels::Backend backend) const {
  const std::size_t n = z.size();
  std::vector<Reduced> red(n);
  std::vector<double> buf(14 * n);
  double* ur = buf.data();
  double* ui = ur + n;
  double* wr = ui + n;
  double* wi = wr + n;
  double* sr = wi + n;
  double* si = sr + n;
  double* o = si + n;
  for (std::size_t p = 0; p < n; ++p) {
    red[p] = reduce(z[p]);
    const cplx v = k_ * red[p].r;
    const cplx u = std::exp(kI * v), w = std::exp(-kI * v), s = std::sin(v);
    ur[p] = u.real(); ui[p] = u.imag();
    wr[p] = w.real(); wi[p] = w.imag();
    sr[p] = s.real(); si[p] = s.imag();
  }
  kernels::ThetaInput in{ur, ui, wr, wi, sr, si, n};
  kernels::ThetaOutput out{{o, o + n, o + 2 * n, o + 3 * n}, {o + 4 * n, o + 5 * n, o + 6 * n, o + 7 * n}};
  kernels::theta_eval(series_, in, out, backend);
  std::vector<WeierstrassJet> res(n);
  for (std::size_t p = 0; p < n; ++p) {
    finish(red[p], {out.re[0][p], out.im[0][p]}, {out.re[1][p], out.im[1][p]},
           {out.re[2][p], out.im[2][p]}, {out.re[3][p], out.im[3][p]}, res[p]);
  }
  return res;
}

namespace {

const WeierstrassJet& regular(const WeierstrassJet& j, const char* fn) {
  if (j.at_pole) {
    throw PoleError(std::string(fn) + ": pole at lattice point " + fmt(j.nearest), j.nearest);
  }
  return j;
}

}  // namespace

cplx EllipticLattice::wp(cplx z) const { return regular(jet(z), "wp").wp; }
cplx EllipticLattice::wp_prime(cplx z) const { return regular(jet(z), "wp'").wp_prime; }
cplx EllipticLattice::zeta(cplx z) const { return regular(jet(z), "zeta").zeta; }
cplx EllipticLattice::sigma(cplx z) const { return jet(z).sigma; }

cplx EllipticLattice::l(cplx w, cplx z) const {
  const WeierstrassJet jw = regular(jet(w), "l(w,z)");
  const WeierstrassJet jz = regular(jet(z), "l(w,z)");
  return -jet(w + z).sigma / (jw.sigma * jz.sigma);
}

}  // namespace spincm
