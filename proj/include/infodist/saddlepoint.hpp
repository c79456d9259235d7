#pragma once

// Contour-shifted Fourier inversion of regularized laws. For the density (and
// its first two derivatives) of X + sigma Z at a point x, the contour is moved
// to Im t = y(x), the solution of the saddle equation
//     d/dy log f(iy) + sigma^2 y = -x,
// giving the representation
//     p^(k)(x) = e^{yx} e^{sigma^2 y^2/2} f(iy) * I_k(x, y),
//     I_k = (1/2pi) \int (y - it)^k \hat f_y(t) e^{-it(x + sigma^2 y)}
//                      e^{-sigma^2 t^2/2} dt,
// where \hat f_y(t) = f(t + iy)/f(iy) is the CF of the tilted law. The left
// side of the saddle equation is strictly increasing in y (tilted variance
// plus sigma^2), so Newton with bracket maintenance converges globally.
// A direct FFT inversion along the real axis cross-validates the whole path.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "infodist/char_fn.hpp"
#include "infodist/common.hpp"
#include "infodist/fft.hpp"
#include "infodist/grid.hpp"

namespace infodist {

struct SaddleSolution {
  double x = 0.0;
  double y = 0.0;
  double residual = 0.0;
  double tilted_variance = 0.0;
  int iterations = 0;
};

inline SaddleSolution solve_saddle(const CharFn& cf, double sigma, double x) {
  if (sigma < 0.0) fail(ErrorCode::InvalidConfig, "solve_saddle: sigma < 0");
  if (sigma == 0.0 && cf.kind == CfKind::Mixed)
    fail(ErrorCode::InvalidConfig,
         "solve_saddle: sigma > 0 required for mixed sources");
  const double s2 = sigma * sigma;
  // The cubic closed form is only log-convex for y > -c T / 6; the saddle of
  // interest stays well inside (y >= -cT/12 on the admissible x range).
  const bool bounded_below = cf.kind == CfKind::Cubic;
  const double dom_lo = bounded_below
                            ? -cf.cubic.c() * cf.cubic.T / 6.0 * (1.0 - 1e-12)
                            : -std::numeric_limits<double>::infinity();
  auto g = [&](double y, double* slope = nullptr) {
    LogEvalResult L = log_eval_imag(cf, y);
    if (slope) *slope = L.d2log + s2;
    return L.dlog + s2 * y + x;
  };
  const double tol = 1e-13 * (1.0 + std::abs(x));
  SaddleSolution sol;
  sol.x = x;
  double slope0 = 0.0;
  double g0 = g(0.0, &slope0);
  if (std::abs(g0) <= tol) {
    sol.residual = g0;
    sol.tilted_variance = log_eval_imag(cf, 0.0).d2log;
    return sol;
  }
  double step = std::abs(x) / std::max(slope0, 1e-8) + 1.0;
  double lo, hi, glo, ghi;
  if (g0 > 0.0) {
    hi = 0.0;
    ghi = g0;
    lo = std::max(dom_lo, -step);
    glo = g(lo);
    int guard = 0;
    while (glo > 0.0 && guard++ < 200) {
      if (lo <= dom_lo)
        fail(ErrorCode::DomainError, "solve_saddle: no root in the cf domain");
      step *= 2.0;
      hi = lo;
      ghi = glo;
      lo = std::max(dom_lo, lo - step);
      glo = g(lo);
    }
    if (glo > 0.0) fail(ErrorCode::NoConvergence, "solve_saddle: bracketing failed");
  } else {
    lo = 0.0;
    glo = g0;
    hi = step;
    ghi = g(hi);
    int guard = 0;
    while (ghi < 0.0 && guard++ < 200) {
      step *= 2.0;
      lo = hi;
      glo = ghi;
      hi += step;
      ghi = g(hi);
    }
    if (ghi < 0.0) fail(ErrorCode::NoConvergence, "solve_saddle: bracketing failed");
  }
  double y = 0.5 * (lo + hi);
  for (int it = 1; it <= 200; ++it) {
    double slope = 0.0;
    double gy = g(y, &slope);
    if (std::abs(gy) <= tol) {
      sol.y = y;
      sol.residual = gy;
      sol.iterations = it;
      sol.tilted_variance = log_eval_imag(cf, y).d2log;
      if (!(sol.tilted_variance + s2 > 0.0))
        fail(ErrorCode::NumericalError, "solve_saddle: degenerate tilted variance");
      return sol;
    }
    if (gy > 0.0)
      hi = y;
    else
      lo = y;
    double ynew = slope > 0.0 ? y - gy / slope : 0.5 * (lo + hi);
    if (!(ynew > lo && ynew < hi)) ynew = 0.5 * (lo + hi);
    if (bounded_below && ynew < dom_lo) ynew = dom_lo;
    y = ynew;
  }
  fail(ErrorCode::NoConvergence, "solve_saddle: iteration cap exceeded");
}

struct InversionResult {
  double x = 0.0;
  int k = 0;
  double value = 0.0;
  std::complex<double> I_k = 0.0;
  double quadrature_error = 0.0;  // refinement disagreement + tail estimate
};

namespace detail {

// CF of the e^{-yx}-tilted source, evaluated at real t. Mixed sources carry
// precomputed tilted weights (max exponent subtracted); closed forms tilt
// analytically.
struct TiltedCf {
  CfKind kind = CfKind::Gaussian;
  std::vector<double> xs, ws;  // mixed: normalized tilted point weights
  double mean = 0.0, sd = 1.0;  // gaussian: tilted law N(a - b^2 y, b^2)
  double alpha = 0.0, lin = 0.0, T = 1.0;  // cubic: e^{-alpha t^2/2 + i(t^3/T - lin t)}

  std::complex<double> operator()(double t) const {
    if (kind == CfKind::Gaussian)
      return std::exp(std::complex<double>(-0.5 * sd * sd * t * t, mean * t));
    if (kind == CfKind::Cubic)
      return std::exp(
          std::complex<double>(-0.5 * alpha * t * t, t * t * t / T - lin * t));
    KahanSum re, im;
    for (std::size_t j = 0; j < xs.size(); ++j) {
      double c = std::cos(t * xs[j]), s = std::sin(t * xs[j]);
      re.add(ws[j] * c);
      im.add(ws[j] * s);
    }
    return {re.value(), im.value()};
  }
};

inline TiltedCf make_tilted(const CharFn& cf, double y) {
  TiltedCf tc;
  tc.kind = cf.kind;
  if (cf.kind == CfKind::Gaussian) {
    tc.mean = cf.gauss.a - cf.gauss.b * cf.gauss.b * y;
    tc.sd = cf.gauss.b;
    return tc;
  }
  if (cf.kind == CfKind::Cubic) {
    double c = cf.cubic.c();
    tc.T = cf.cubic.T;
    tc.alpha = c + 6.0 * y / tc.T;
    tc.lin = c * y + 3.0 * y * y / tc.T;
    if (!(tc.alpha > 0.0))
      fail(ErrorCode::DomainError, "tilted cubic cf outside its convex domain");
    return tc;
  }
  double m_star = -1e308;
  const std::size_t n = cf.grid_p.size();
  for (std::size_t j = 0; j < n; ++j)
    if (cf.grid_p[j] > 0.0) m_star = std::max(m_star, -y * cf.grid_x(j));
  for (const Atom& a : cf.atoms) m_star = std::max(m_star, -y * a.location);
  KahanSum total;
  for (std::size_t j = 0; j < n; ++j) {
    if (cf.grid_p[j] == 0.0) continue;
    double w = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
    double wt = w * cf.grid_h * cf.grid_p[j] * std::exp(-y * cf.grid_x(j) - m_star);
    if (wt == 0.0) continue;
    tc.xs.push_back(cf.grid_x(j));
    tc.ws.push_back(wt);
    total.add(wt);
  }
  for (const Atom& a : cf.atoms) {
    double wt = a.mass * std::exp(-y * a.location - m_star);
    if (wt == 0.0) continue;
    tc.xs.push_back(a.location);
    tc.ws.push_back(wt);
    total.add(wt);
  }
  if (!(total.value() > 0.0))
    fail(ErrorCode::NumericalError, "tilted source mass underflowed");
  for (double& w : tc.ws) w /= total.value();
  return tc;
}

// Frequency content bound of the tilted CF (how fast \hat f_y(t) oscillates),
// used to pick a trapezoid step for the oscillatory I_k integrand.
inline double tilted_frequency_bound(const CharFn& cf, const TiltedCf& tc,
                                     double L) {
  if (cf.kind == CfKind::Gaussian) return std::abs(tc.mean) + 10.0 * tc.sd;
  if (cf.kind == CfKind::Cubic)
    return 3.0 * L * L / tc.T + std::abs(tc.lin) + 10.0 / std::sqrt(tc.alpha);
  return cf.support_radius;
}

}  // namespace detail

// p^(k)(x) for the law of (cf's source) + sigma Z via the saddle form.
inline InversionResult density_via_saddle(const CharFn& cf, double sigma, double x,
                                          int k) {
  if (k < 0 || k > 2) fail(ErrorCode::InvalidConfig, "density_via_saddle: k in {0,1,2}");
  SaddleSolution sol = solve_saddle(cf, sigma, x);
  const double s2 = sigma * sigma;
  const double y = sol.y;
  const double sigma_eff = std::sqrt(sol.tilted_variance + s2);
  // Contour cutoff: Gaussian/cubic tilted CFs decay like exp(-(var+s2)t^2/2),
  // but a mixed law with atoms has |f_y(t)| bounded away from 0 for all t, so
  // only the sigma kernel can be relied on for truncation.
  const double L = cf.kind == CfKind::Mixed ? 12.0 / sigma : 12.0 / sigma_eff;
  detail::TiltedCf tc = detail::make_tilted(cf, y);
  const double carrier = x + s2 * y;
  double freq = detail::tilted_frequency_bound(cf, tc, L) + std::abs(carrier) + 1.0;
  double dt = std::min(sigma_eff / 10.0, kPi / (2.0 * freq));
  // (y - it)^k \hat f_y(t) e^{-it(x+s2 y)} e^{-s2 t^2/2}, conjugate-symmetric
  // in t, so integrate the half line and double the real part.
  auto integrand = [&](double t) {
    std::complex<double> v = tc(t);
    v *= std::exp(std::complex<double>(-0.5 * s2 * t * t, -t * carrier));
    std::complex<double> base(y, -t);
    for (int i = 0; i < k; ++i) v *= base;
    return v;
  };
  double tail = 0.0;
  auto half_line = [&](double step, double* abs_int) {
    std::size_t m = static_cast<std::size_t>(std::ceil(L / step));
    double st = L / static_cast<double>(m);
    KahanSum s, a;
    std::complex<double> g0 = integrand(0.0);
    s.add(g0.real());
    a.add(std::abs(g0));
    for (std::size_t j = 1; j <= m; ++j) {
      std::complex<double> gj = integrand(st * static_cast<double>(j));
      double w = j == m ? 1.0 : 2.0;
      s.add(w * gj.real());
      a.add(w * std::abs(gj));
      if (j == m) tail = std::abs(gj) / (2.0 * kPi * sigma_eff * std::max(L, 1.0));
    }
    if (abs_int) *abs_int = st * a.value() / (2.0 * kPi);
    return st * s.value() / (2.0 * kPi);
  };
  double abs_int = 0.0;
  double coarse = half_line(dt, nullptr);
  double fine = half_line(0.5 * dt, &abs_int);
  double diff = std::abs(fine - coarse);
  if (diff > std::max(1e-7 * std::abs(fine), 1e-12 * abs_int + 1e-300))
    fail(ErrorCode::QuadratureError,
         "density_via_saddle: refinement disagreement " + std::to_string(diff));
  InversionResult r;
  r.x = x;
  r.k = k;
  r.I_k = fine;
  r.quadrature_error = diff + tail;
  double log_pre = y * x + 0.5 * s2 * y * y + log_eval_imag(cf, y).log_f;
  r.value = std::exp(log_pre) * fine;
  if (k == 0 && r.value < -1e-12)
    fail(ErrorCode::NumericalError,
         "density_via_saddle: negative density " + std::to_string(r.value));
  return r;
}

// Direct inversion of f(t) e^{-sigma^2 t^2/2} along the real axis onto `grid`.
// The t-band is |t| <= 12/sigma (beyond which the Gaussian factor is < 1e-31);
// mixed sources whose grid step equals the output step are batch-evaluated
// with a single FFT instead of per-node quadrature.
inline GridDensity fft_invert(const CharFn& cf, double sigma, const GridSpec& grid,
                              InversionDiagnostics* diag_out = nullptr) {
  if (!(sigma > 0.0)) fail(ErrorCode::InvalidConfig, "fft_invert: sigma > 0 required");
  const double t_band = 12.0 / sigma;
  const double s2 = sigma * sigma;
  // Margin: the output window must cover the source's mass plus ~8 sigma of
  // kernel spread, otherwise the periodized images alias into the window.
  double margin = 10.0 * sigma + 1.0;
  std::size_t min_N = 0;
  bool fast = cf.kind == CfKind::Mixed && !cf.grid_p.empty() &&
              std::abs(cf.grid_h - grid.h) <= 1e-12 * std::max(cf.grid_h, grid.h);
  if (fast) min_N = cf.grid_p.size();
  InversionPlan plan = plan_cf_inversion(grid.x0, grid.h, grid.n, margin, min_N);
  std::vector<std::complex<double>> F(plan.N);
  double half = static_cast<double>(plan.N) / 2.0;
  if (fast) {
    // One unnormalized backward FFT gives the grid part of f at every t-node:
    // with dt*h = 2pi/N,  sum_m c_m e^{i t_j x_m}
    //   = e^{i t_j x0s} sum_m c_m (-1)^m e^{+2pi i jm/N}.
    std::vector<std::complex<double>> A(plan.N, 0.0);
    for (std::size_t m = 0; m < cf.grid_p.size(); ++m) {
      double w = (m == 0 || m + 1 == cf.grid_p.size()) ? 0.5 : 1.0;
      double c = w * cf.grid_h * cf.grid_p[m] / cf.norm;
      A[m] = (m % 2 == 0) ? c : -c;
    }
    fft_inplace(A, FFTW_BACKWARD);
    for (std::size_t j = 0; j < plan.N; ++j) {
      double t = plan.dt * (static_cast<double>(j) - half);
      if (std::abs(t) > t_band) {
        F[j] = 0.0;
        continue;
      }
      std::complex<double> v = A[j] * std::polar(1.0, t * cf.grid_x0);
      for (const Atom& a : cf.atoms)
        v += (a.mass / cf.norm) * std::polar(1.0, t * a.location);
      F[j] = v * std::exp(-0.5 * s2 * t * t);
    }
  } else {
    for (std::size_t j = 0; j < plan.N; ++j) {
      double t = plan.dt * (static_cast<double>(j) - half);
      if (std::abs(t) > t_band) {
        F[j] = 0.0;
        continue;
      }
      F[j] = cf_eval(cf, t).value * std::exp(-0.5 * s2 * t * t);
    }
  }
  InversionDiagnostics diag;
  std::vector<double> vals =
      invert_cf_values(F, plan.dt, grid.x0, grid.h, grid.n, &diag);
  GridDensity out;
  out.x0 = grid.x0;
  out.h = grid.h;
  out.values = std::move(vals);
  if (std::abs(out.values.front()) > 1e-10 || std::abs(out.values.back()) > 1e-10)
    fail(ErrorCode::AliasingDetected,
         "fft_invert: noticeable mass at the window boundary");
  for (double& v : out.values) v = std::max(v, 0.0);
  double defect = std::abs(out.integral() - 1.0);
  diag.normalization_defect = defect;
  if (diag_out) *diag_out = diag;
  if (defect > 1e-6)
    fail(ErrorCode::NumericalError,
         "fft_invert: normalization defect " + std::to_string(defect));
  return normalize(out);
}

}  // namespace infodist
