#include "spincm/theta_kernel.hpp"

namespace spincm::kernels {

// Reference kernel. With U_n = u^{2n+1}, W_n = w^{2n+1} and m = 2n+1:
//   θ   = c_0 s + Σ_{n≥1} c_n (U_n − W_n)/(2i)
//   θ'  = Σ c_n m   (U_n + W_n)/2
//   θ'' = −Σ c_n m² (U_n − W_n)/(2i)   (n = 0 term from s)
//   θ'''= −Σ c_n m³ (U_n + W_n)/2
void theta_scalar(const ThetaSeries& series, const ThetaInput& in, ThetaOutput& out) {
  const std::size_t nt = series.terms();
  for (std::size_t p = 0; p < in.n; ++p) {
    const double ur = in.u_re[p], ui = in.u_im[p];
    const double wr = in.w_re[p], wi = in.w_im[p];
    const double u2r = ur * ur - ui * ui, u2i = 2.0 * ur * ui;
    const double w2r = wr * wr - wi * wi, w2i = 2.0 * wr * wi;

    // D = Σ c m^k (U − W), A = Σ c m^k (U + W)
    double d0r = 0, d0i = 0, d2r = 0, d2i = 0;
    double a1r = 0, a1i = 0, a3r = 0, a3i = 0;
    double Ur = ur, Ui = ui, Wr = wr, Wi = wi;
    for (std::size_t n = 0; n < nt; ++n) {
      const double cr = series.c_re[n], ci = series.c_im[n];
      const double m = static_cast<double>(2 * n + 1);
      const double dr = Ur - Wr, di = Ui - Wi;
      const double sr = Ur + Wr, si = Ui + Wi;
      const double cdr = cr * dr - ci * di, cdi = cr * di + ci * dr;
      const double csr = cr * sr - ci * si, csi = cr * si + ci * sr;
      if (n > 0) {
        d0r += cdr;
        d0i += cdi;
        d2r += m * m * cdr;
        d2i += m * m * cdi;
      }
      a1r += m * csr;
      a1i += m * csi;
      a3r += m * m * m * csr;
      a3i += m * m * m * csi;

      const double nUr = Ur * u2r - Ui * u2i, nUi = Ur * u2i + Ui * u2r;
      const double nWr = Wr * w2r - Wi * w2i, nWi = Wr * w2i + Wi * w2r;
      Ur = nUr; Ui = nUi; Wr = nWr; Wi = nWi;
    }
    // c_0 sin v
    const double c0r = series.c_re[0], c0i = series.c_im[0];
    const double sr = in.s_re[p], si = in.s_im[p];
    const double c0sr = c0r * sr - c0i * si, c0si = c0r * si + c0i * sr;

    // X/(2i) = (Im X − i Re X)/2
    out.re[0][p] = c0sr + 0.5 * d0i;
    out.im[0][p] = c0si - 0.5 * d0r;
    out.re[1][p] = 0.5 * a1r;
    out.im[1][p] = 0.5 * a1i;
    out.re[2][p] = -(c0sr + 0.5 * d2i);
    out.im[2][p] = -(c0si - 0.5 * d2r);
    out.re[3][p] = -0.5 * a3r;
    out.im[3][p] = -0.5 * a3i;
  }
}

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

void theta_eval(const ThetaSeries& series, const ThetaInput& in, ThetaOutput& out, Backend backend) {
  if (backend != Backend::scalar && avx2_supported()) {
    theta_avx2(series, in, out);
  } else {
    theta_scalar(series, in, out);
  }
}

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
    case Backend::automatic: return avx2_supported() ? "avx2" : "scalar";
  }
  return "scalar";
}

}  // namespace spincm::kernels
