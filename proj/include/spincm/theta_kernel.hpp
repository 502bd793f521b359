#pragma once

#include <cstddef>
#include <vector>

namespace spincm::kernels {

/// Coefficients c_n of θ₁(v) = Σ_{n≥0} c_n sin((2n+1)v).
struct ThetaSeries {
  std::vector<double> c_re;
  std::vector<double> c_im;

  std::size_t terms() const { return c_re.size(); }
};

/// Structure-of-arrays batch input. u = e^{iv}, w = e^{-iv}, s = sin v.
/// s is passed separately so θ₁ keeps full relative accuracy near v = 0.
struct ThetaInput {
  const double* u_re;
  const double* u_im;
  const double* w_re;
  const double* w_im;
  const double* s_re;
  const double* s_im;
  std::size_t n;
};

/// d[k] holds the k-th v-derivative of θ₁ (k = 0..3), split into re/im arrays.
struct ThetaOutput {
  double* re[4];
  double* im[4];
};

enum class Backend { automatic, scalar, avx2 };

void theta_scalar(const ThetaSeries& series, const ThetaInput& in, ThetaOutput& out);
void theta_avx2(const ThetaSeries& series, const ThetaInput& in, ThetaOutput& out);

bool avx2_supported();

/// Runs the requested backend; `automatic` picks AVX2 when the CPU has it.
/// Requesting avx2 on a CPU without it falls back to scalar.
void theta_eval(const ThetaSeries& series, const ThetaInput& in, ThetaOutput& out,
                Backend backend = Backend::automatic);

const char* backend_name(Backend b);

}  // namespace spincm::kernels
