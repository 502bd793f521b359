// Built with -mavx2 -mfma; only reached through theta_eval after a CPU check.
#include "spincm/theta_kernel.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#endif

namespace spincm::kernels {

#if defined(__AVX2__) && defined(__FMA__)

namespace {

struct C4 {
  __m256d r, i;
};

inline C4 cmul(C4 a, C4 b) {
  return {_mm256_fmsub_pd(a.r, b.r, _mm256_mul_pd(a.i, b.i)),
          _mm256_fmadd_pd(a.r, b.i, _mm256_mul_pd(a.i, b.r))};
}

// acc += (c scalar complex) * x * m
inline void cmadd(C4& acc, __m256d cr, __m256d ci, C4 x, __m256d m) {
  const __m256d pr = _mm256_fmsub_pd(cr, x.r, _mm256_mul_pd(ci, x.i));
  const __m256d pi = _mm256_fmadd_pd(cr, x.i, _mm256_mul_pd(ci, x.r));
  acc.r = _mm256_fmadd_pd(m, pr, acc.r);
  acc.i = _mm256_fmadd_pd(m, pi, acc.i);
}

}  // namespace

void theta_avx2(const ThetaSeries& series, const ThetaInput& in, ThetaOutput& out) {
  const std::size_t nt = series.terms();
  const std::size_t vec_end = in.n / 4 * 4;
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d zero = _mm256_setzero_pd();

  for (std::size_t p = 0; p < vec_end; p += 4) {
    const C4 u{_mm256_loadu_pd(in.u_re + p), _mm256_loadu_pd(in.u_im + p)};
    const C4 w{_mm256_loadu_pd(in.w_re + p), _mm256_loadu_pd(in.w_im + p)};
    const C4 u2 = cmul(u, u);
    const C4 w2 = cmul(w, w);
    C4 U = u, W = w;
    C4 d0{zero, zero}, d2{zero, zero}, a1{zero, zero}, a3{zero, zero};
    for (std::size_t n = 0; n < nt; ++n) {
      const __m256d cr = _mm256_set1_pd(series.c_re[n]);
      const __m256d ci = _mm256_set1_pd(series.c_im[n]);
      const double md = static_cast<double>(2 * n + 1);
      const __m256d m1 = _mm256_set1_pd(md);
      const __m256d m2 = _mm256_set1_pd(md * md);
      const __m256d m3 = _mm256_set1_pd(md * md * md);
      const C4 dif{_mm256_sub_pd(U.r, W.r), _mm256_sub_pd(U.i, W.i)};
      const C4 sum{_mm256_add_pd(U.r, W.r), _mm256_add_pd(U.i, W.i)};
      if (n > 0) {
        cmadd(d0, cr, ci, dif, _mm256_set1_pd(1.0));
        cmadd(d2, cr, ci, dif, m2);
      }
      cmadd(a1, cr, ci, sum, m1);
      cmadd(a3, cr, ci, sum, m3);
      U = cmul(U, u2);
      W = cmul(W, w2);
    }
    const __m256d c0r = _mm256_set1_pd(series.c_re[0]);
    const __m256d c0i = _mm256_set1_pd(series.c_im[0]);
    const __m256d sr = _mm256_loadu_pd(in.s_re + p);
    const __m256d si = _mm256_loadu_pd(in.s_im + p);
    const __m256d c0sr = _mm256_fmsub_pd(c0r, sr, _mm256_mul_pd(c0i, si));
    const __m256d c0si = _mm256_fmadd_pd(c0r, si, _mm256_mul_pd(c0i, sr));

    const __m256d t0r = _mm256_fmadd_pd(half, d0.i, c0sr);
    const __m256d t0i = _mm256_fnmadd_pd(half, d0.r, c0si);
    const __m256d t2r = _mm256_fmadd_pd(half, d2.i, c0sr);
    const __m256d t2i = _mm256_fnmadd_pd(half, d2.r, c0si);
    _mm256_storeu_pd(out.re[0] + p, t0r);
    _mm256_storeu_pd(out.im[0] + p, t0i);
    _mm256_storeu_pd(out.re[1] + p, _mm256_mul_pd(half, a1.r));
    _mm256_storeu_pd(out.im[1] + p, _mm256_mul_pd(half, a1.i));
    _mm256_storeu_pd(out.re[2] + p, _mm256_sub_pd(zero, t2r));
    _mm256_storeu_pd(out.im[2] + p, _mm256_sub_pd(zero, t2i));
    _mm256_storeu_pd(out.re[3] + p, _mm256_mul_pd(_mm256_set1_pd(-0.5), a3.r));
    _mm256_storeu_pd(out.im[3] + p, _mm256_mul_pd(_mm256_set1_pd(-0.5), a3.i));
  }

  if (vec_end < in.n) {
    ThetaInput tail{in.u_re + vec_end, in.u_im + vec_end, in.w_re + vec_end, in.w_im + vec_end,
                    in.s_re + vec_end, in.s_im + vec_end, in.n - vec_end};
    ThetaOutput tail_out{};
    for (int k = 0; k < 4; ++k) {
      tail_out.re[k] = out.re[k] + vec_end;
      tail_out.im[k] = out.im[k] + vec_end;
    }
    theta_scalar(series, tail, tail_out);
  }
}

#else

void theta_avx2(const ThetaSeries& series, const ThetaInput& in, ThetaOutput& out) {
  theta_scalar(series, in, out);
}

#endif

}  // namespace spincm::kernels
