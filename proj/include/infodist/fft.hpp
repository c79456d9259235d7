#pragma once

// Thin FFTW3 wrapper: in-place complex transforms, trapezoid-consistent
// discrete convolution, and characteristic-function inversion onto a grid.
//
// FFTW plan creation/destruction is not thread-safe, so both are guarded by a
// process-wide mutex; plan execution runs outside the lock. Plans use
// FFTW_ESTIMATE, which is deterministic run-to-run (a requirement here).

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <functional>
#include <mutex>
#include <vector>

#include "infodist/common.hpp"
#include "infodist/grid.hpp"

namespace infodist {

namespace detail {
inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

// In-place DFT; sign = FFTW_FORWARD (-1) or FFTW_BACKWARD (+1), unnormalized.
inline void fft_inplace(std::vector<std::complex<double>>& a, int sign) {
  auto* buf = reinterpret_cast<fftw_complex*>(a.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(a.size()), buf, buf, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
    fftw_destroy_plan(plan);
  }
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Discrete convolution of two sampled functions with common step h,
// approximating (f*g)(x) = \int f(s) g(x-s) ds on the combined grid.
//
// The endpoint samples of each factor are halved first, making the sum a
// trapezoid rule in s for every output point. This matters: densities with a
// hard support edge (truncation at x = T/16 in the counterexample law) would
// otherwise receive full weight h at the jump, an O(h) error large enough to
// swamp the e^{-cT^2}-scale difference distances this library measures.
inline std::vector<double> convolve_trapezoid(const std::vector<double>& f,
                                              const std::vector<double>& g,
                                              double h) {
  if (f.size() < 2 || g.size() < 2)
    fail(ErrorCode::InvalidDensity, "convolve: need at least 2 samples per factor");
  std::size_t out_n = f.size() + g.size() - 1;
  std::size_t m = next_pow2(out_n);
  std::vector<std::complex<double>> A(m, 0.0), B(m, 0.0);
  for (std::size_t j = 0; j < f.size(); ++j) A[j] = f[j];
  for (std::size_t j = 0; j < g.size(); ++j) B[j] = g[j];
  A[0] *= 0.5;
  A[f.size() - 1] *= 0.5;
  B[0] *= 0.5;
  B[g.size() - 1] *= 0.5;
  fft_inplace(A, FFTW_FORWARD);
  fft_inplace(B, FFTW_FORWARD);
  for (std::size_t j = 0; j < m; ++j) A[j] *= B[j];
  fft_inplace(A, FFTW_BACKWARD);
  std::vector<double> out(out_n);
  double scale = h / static_cast<double>(m);
  for (std::size_t j = 0; j < out_n; ++j) out[j] = A[j].real() * scale;
  return out;
}

struct InversionDiagnostics {
  double max_imag_residue = 0.0;  // largest |Im| discarded when taking the real part
  std::size_t fft_size = 0;
  double t_step = 0.0;
  double normalization_defect = 0.0;  // |integral - 1| before renormalization
};

struct InversionPlan {
  std::size_t N = 0;  // power-of-two t-sample count
  double dt = 0.0;    // t_j = dt * (j - N/2)
};

// Sizes the t-grid for inverting a CF onto x = x0 + k h, k = 0..n-1: with
// dt = 2pi/(N h) the discretization error equals (by Poisson summation) the
// aliased images p(x +- N h), so N h must exceed the requested window plus a
// caller-supplied margin containing essentially all of p's mass. min_N lets a
// caller force room for a batch source transform of known length.
inline InversionPlan plan_cf_inversion(double x0, double h, std::size_t n,
                                       double margin, std::size_t min_N = 0) {
  if (h <= 0.0 || n < 2) fail(ErrorCode::InvalidConfig, "cf inversion: bad grid");
  double span = h * static_cast<double>(n - 1);
  double width = 2.0 * (std::max(std::abs(x0), std::abs(x0 + span)) + margin);
  std::size_t need = static_cast<std::size_t>(std::ceil(width / h)) + n;
  InversionPlan plan;
  plan.N = next_pow2(std::max(need, min_N));
  plan.dt = 2.0 * kPi / (h * static_cast<double>(plan.N));
  return plan;
}

// Core inversion step: given F[j] = f(t_j) on the planned t-grid, returns
// p(x) = (1/2pi) \int e^{-itx} f(t) dt at x = x0 + k h. F is consumed.
inline std::vector<double> invert_cf_values(std::vector<std::complex<double>>& F,
                                            double dt, double x0,
                                            [[maybe_unused]] double h,
                                            std::size_t n,
                                            InversionDiagnostics* diag = nullptr) {
  const std::size_t N = F.size();
  if (n > N) fail(ErrorCode::InvalidConfig, "cf inversion: output exceeds FFT size");
  double half = static_cast<double>(N) / 2.0;
  for (std::size_t j = 0; j < N; ++j) {
    double t = dt * (static_cast<double>(j) - half);
    // Absorbing e^{-i t x0} centers the output window at x0 without any grid
    // phase-alignment constraint; the remaining kernel is a plain DFT up to
    // the (-1)^k factor from the centered t-grid: t_j k h = 2pi jk/N - pi k.
    F[j] *= std::polar(1.0, -t * x0);
  }
  fft_inplace(F, FFTW_FORWARD);
  std::vector<double> out(n);
  double scale = dt / (2.0 * kPi);
  double max_imag = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> v = F[k] * scale;
    if (k % 2 == 1) v = -v;
    out[k] = v.real();
    max_imag = std::max(max_imag, std::abs(v.imag()));
  }
  if (diag) {
    diag->max_imag_residue = max_imag;
    diag->fft_size = N;
    diag->t_step = dt;
  }
  return out;
}

// Convenience wrapper: `eval` is called at every t-node; integrands are
// expected to underflow to zero outside their analytic decay range.
inline std::vector<double> invert_cf_to_grid(
    const std::function<std::complex<double>(double)>& eval, double x0, double h,
    std::size_t n, double margin, InversionDiagnostics* diag = nullptr) {
  InversionPlan plan = plan_cf_inversion(x0, h, n, margin);
  std::vector<std::complex<double>> F(plan.N);
  double half = static_cast<double>(plan.N) / 2.0;
  for (std::size_t j = 0; j < plan.N; ++j)
    F[j] = eval(plan.dt * (static_cast<double>(j) - half));
  return invert_cf_values(F, plan.dt, x0, h, n, diag);
}

}  // namespace infodist
