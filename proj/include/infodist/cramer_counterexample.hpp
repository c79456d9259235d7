#pragma once

// The sharpness construction: the cubic-phase function
//     f_sigma(t) = exp{ -(1+sigma^2) t^2/2 + i t^3/T },
// its inverse transform v_sigma (positive up to x = (1+sigma^2)^2 T/16, with
// two-sided exponential envelopes in |x y(x)|), the compactly cut probability
// law p = d0 * v_0 * 1_{(-inf, T/16]}, and the asymptotics of the distances
// D and J_st for the regularized variable U_sigma and the difference
// U_sigma - V_sigma of an i.i.d. pair. These laws witness that the stability
// lower bounds for the relative entropy under convolution cannot be improved
// beyond exponential decay in 1/D.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "infodist/char_fn.hpp"
#include "infodist/common.hpp"
#include "infodist/dist_core.hpp"
#include "infodist/fft.hpp"
#include "infodist/grid.hpp"
#include "infodist/info_metrics.hpp"

namespace infodist {

// Densities assembled from convolution differences carry ~1e-16 FFT residue
// in regions of exact cancellation; statistics of such laws mask below this.
inline constexpr double kCounterexampleFloor = 1e-13;

// Saddle point of e^{-ixt} f_sigma(t): the contour shift t -> t + iy with
//   y(x) = (T/6) ( -(1+sigma^2) + sqrt((1+sigma^2)^2 - 12 x / T) ),
// the root of 3y^2/T + (1+sigma^2) y + x = 0 on the branch where the tilted
// curvature alpha = (1+sigma^2) + 6y/T stays positive.
inline double saddle_y(double sigma, double T, double x) {
  double c = 1.0 + sigma * sigma;
  double cap = c * c * T / 16.0;
  if (x > cap * (1.0 + 1e-12) + 1e-300)
    fail(ErrorCode::DomainError,
         "saddle_y: x exceeds the positivity threshold (1+sigma^2)^2 T/16");
  double disc = c * c - 12.0 * x / T;
  if (disc < 0.0) disc = 0.0;  // only reachable by the tolerance sliver above
  return T / 6.0 * (-c + std::sqrt(disc));
}

namespace detail {

// Direct saddle-form evaluation: with y = y(x), alpha = c + 6y/T and
// E = yx + c y^2/2 + y^3/T,
//   v_sigma(x) = e^E (1/pi) \int_0^inf e^{-alpha t^2/2} cos(t^3/T) dt.
inline double saddle_v(double sigma, double T, double x) {
  double c = 1.0 + sigma * sigma;
  double y = saddle_y(sigma, T, x);
  double alpha = c + 6.0 * y / T;
  if (!(alpha > 0.0))
    fail(ErrorCode::DomainError, "saddle_v: nonpositive tilted curvature");
  double E = y * x + 0.5 * c * y * y + y * y * y / T;
  double t_end = 9.5 / std::sqrt(alpha);
  double freq = 3.0 * t_end * t_end / T + 1.0;
  double dt = std::min(0.05 / std::sqrt(alpha), kPi / (4.0 * freq));
  auto quad = [&](double step) {
    std::size_t m = static_cast<std::size_t>(std::ceil(t_end / step));
    double st = t_end / static_cast<double>(m);
    KahanSum s;
    s.add(0.5);  // integrand at t = 0
    for (std::size_t j = 1; j <= m; ++j) {
      double t = st * static_cast<double>(j);
      double w = j == m ? 0.5 : 1.0;
      s.add(w * std::exp(-0.5 * alpha * t * t) * std::cos(t * t * t / T));
    }
    return st * s.value();
  };
  double coarse = quad(dt);
  double fine = 0.0;
  bool converged = false;
  for (int pass = 0; pass < 14; ++pass) {
    dt *= 0.5;
    fine = quad(dt);
    if (std::abs(fine - coarse) <= 1e-13 * (1.0 + std::abs(fine))) {
      converged = true;
      break;
    }
    coarse = fine;
  }
  if (!converged)
    fail(ErrorCode::QuadratureError, "saddle_v: oscillatory quadrature stalled");
  return std::exp(E) * fine / kPi;
}

// Smallest x <= 0 where the upper envelope e^{-4|x y(x)|/9} drops below
// e^{-target_exponent} (the left reach of v_sigma's numeric support).
inline double left_reach(double sigma, double T, double target_exponent) {
  double x = 0.0;
  for (int i = 0; i < 10000; ++i) {
    double y = saddle_y(sigma, T, x);
    if (4.0 / 9.0 * std::abs(x * y) >= target_exponent) return x;
    x -= 0.5;
  }
  fail(ErrorCode::NumericalError, "left_reach: envelope never reached target");
}

// Right reach: past the positivity threshold, |v_sigma(x)| <= e^{-c T x/32}.
inline double right_reach(double sigma, double T, double target_exponent) {
  double c = 1.0 + sigma * sigma;
  return std::max(c * c * T / 16.0, 32.0 * target_exponent / (c * T)) + 2.0;
}

}  // namespace detail

// Samples v_sigma on `grid` by FFT inversion of f_sigma (band |t| <= 10,
// where |f_sigma| < 2e-22), cross-checked against the independent saddle-form
// evaluation at in-domain probe points. The result is a signed sample set:
// values below the FFT noise floor (~1e-16) are kept as-is here.
inline GridDensity build_v(double sigma, double T, const GridSpec& grid,
                           double* max_path_gap = nullptr) {
  if (!(sigma >= 0.0 && sigma <= 2.0))
    fail(ErrorCode::InvalidConfig, "build_v: sigma in [0, 2] required");
  if (!(T > 1.0)) fail(ErrorCode::InvalidConfig, "build_v: T > 1 required");
  double c = 1.0 + sigma * sigma;
  double t_band = 10.0 * std::max(1.0, 1.0 / std::sqrt(c));
  auto eval = [&](double t) -> std::complex<double> {
    if (std::abs(t) > t_band) return 0.0;
    return std::exp(
        std::complex<double>(-0.5 * c * t * t, t * t * t / T));
  };
  double margin = std::max(std::abs(detail::left_reach(sigma, T, 52.0)),
                           detail::right_reach(sigma, T, 52.0)) +
                  4.0;
  InversionDiagnostics diag;
  GridDensity v;
  v.x0 = grid.x0;
  v.h = grid.h;
  v.values = invert_cf_to_grid(eval, grid.x0, grid.h, grid.n, margin, &diag);
  if (diag.max_imag_residue > 1e-10)
    fail(ErrorCode::NumericalError,
         "build_v: imaginary residue " + std::to_string(diag.max_imag_residue));
  double cap = c * c * T / 16.0;
  double gap = 0.0;
  for (std::size_t j = 0; j < v.n(); j += 8) {
    double x = v.x(j);
    if (x > cap) continue;
    gap = std::max(gap, std::abs(v.values[j] - detail::saddle_v(sigma, T, x)));
  }
  if (max_path_gap) *max_path_gap = gap;
  if (gap > 1e-10)
    fail(ErrorCode::NumericalError,
         "build_v: FFT and saddle paths disagree by " + std::to_string(gap));
  return v;
}

struct CounterexampleLaw {
  double T = 0.0;
  double d0 = 0.0;  // normalizer of the cut: p = d0 v_0 on (-inf, T/16]
  GridDensity p;    // law of U
  double a0 = 0.0;  // mean of U
  double b0 = 0.0;  // SD of U
  double left_end = 0.0;
};

// Builds the law of U: v_0 cut at T/16 (exactly the positivity threshold for
// sigma = 0) and renormalized, on a grid whose left end is where the upper
// envelope drops below 1e-22 and whose last node is exactly T/16.
//
// sigma_reg only influences the grid step, so that the later regularization
// p (*) phi_sigma runs on this exact grid (step <= sigma/8 precondition).
inline CounterexampleLaw build_law(double sigma_reg, double T) {
  if (!(T >= 20.0)) fail(ErrorCode::InvalidConfig, "build_law: T >= 20 required");
  if (!(sigma_reg > 0.0))
    fail(ErrorCode::InvalidConfig, "build_law: sigma_reg > 0 required");
  double h = std::min(1.0 / 128.0, sigma_reg / 8.0);
  double right = T / 16.0;
  double left = detail::left_reach(0.0, T, 22.0 * std::log(10.0));
  std::size_t n =
      static_cast<std::size_t>(std::ceil((right - left) / h)) + 1;
  GridSpec spec{right - h * static_cast<double>(n - 1), h, n};
  GridDensity v = build_v(0.0, T, spec);
  double vmax = 0.0;
  for (double x : v.values) vmax = std::max(vmax, std::abs(x));
  for (double& x : v.values) {
    if (x < -1e-14)
      fail(ErrorCode::ConstructionError,
           "build_law: v_0 negative inside the positivity window");
    // below the inversion noise floor the sign of v is not resolvable;
    // clamp, so p is a valid density
    if (x < 0.0) x = 0.0;
  }
  double mass = trapezoid(v.values, h);
  if (!(mass > 0.0)) fail(ErrorCode::ConstructionError, "build_law: zero mass");
  CounterexampleLaw law;
  law.T = T;
  law.d0 = 1.0 / mass;
  law.left_end = spec.x0;
  for (double& x : v.values) x *= law.d0;
  law.p = normalize(std::move(v));
  auto [a0, var0] = grid_moments(law.p);
  law.a0 = a0;
  law.b0 = std::sqrt(var0);
  // |1 - d0| <= e^{-cT^2} for an absolute constant c; numerically ~4e-3 at
  // T = 40 and ~3e-8 at T = 80, so the 1e-6 closeness assertion is only
  // enforceable from T = 80 up (recorded: monotone decay is tested instead
  // at smaller T).
  if (T >= 80.0 && std::abs(1.0 - law.d0) >= 1e-6)
    fail(ErrorCode::ConstructionError,
         "build_law: |1 - d0| = " + std::to_string(std::abs(1.0 - law.d0)));
  return law;
}

inline GridDensity regularize_u(const CounterexampleLaw& law, double sigma) {
  MixedDistribution m = MixedDistribution::from_density(law.p);
  return regularize(m, sigma);
}

struct AsymptoticsReport {
  double sigma = 0.0;
  double target = 0.0;  // 3/(1+sigma^2)^3, the T^2 D limit
  std::vector<double> Ts;
  std::vector<double> D;         // D(U_sigma)
  std::vector<double> scaled_D;  // T^2 D
  std::vector<double> J;         // J_st(U_sigma)
  std::vector<double> scaled_J;
  std::vector<double> D_diff;  // D(U_sigma - V_sigma), clamped at 0
  std::vector<double> J_diff;
  std::vector<bool> below_floor;  // D_diff not resolvable above 1e-13
  std::vector<double> ln_ratio;   // ln D_diff(2T) / ln D_diff(T) where defined
  double extrapolated_scaled_D = 0.0;  // linear-in-1/T limit from last two Ts
  double calibration_sup = 0.0;  // sup |v (*) v-bar - phi| when computed
};

namespace detail {

inline void require_sweep_Ts(const std::vector<double>& Ts) {
  if (Ts.empty()) fail(ErrorCode::InvalidConfig, "sweep: empty T list");
  for (std::size_t i = 0; i < Ts.size(); ++i) {
    if (!(Ts[i] >= 40.0))
      fail(ErrorCode::InvalidConfig, "sweep: every T must be >= 40");
    if (i > 0 && !(Ts[i] > Ts[i - 1]))
      fail(ErrorCode::InvalidConfig, "sweep: Ts must be ascending");
  }
}

inline void extrapolate_scaled(AsymptoticsReport& rep) {
  std::size_t m = rep.Ts.size();
  if (m >= 2) {
    double t1 = rep.Ts[m - 2], t2 = rep.Ts[m - 1];
    double s1 = rep.scaled_D[m - 2], s2 = rep.scaled_D[m - 1];
    rep.extrapolated_scaled_D = (s2 * t2 - s1 * t1) / (t2 - t1);
  } else {
    rep.extrapolated_scaled_D = rep.scaled_D.empty() ? 0.0 : rep.scaled_D[0];
  }
  if (rep.extrapolated_scaled_D < 0.0) rep.extrapolated_scaled_D = 0.0;
}

}  // namespace detail

// T^2 D(U_sigma) -> 3/(1+sigma^2)^3: the sweep plus a linear-in-1/T
// extrapolation through the two largest T values.
inline AsymptoticsReport lemma_11_2_sweep(double sigma,
                                          const std::vector<double>& Ts) {
  detail::require_sweep_Ts(Ts);
  double c = 1.0 + sigma * sigma;
  AsymptoticsReport rep;
  rep.sigma = sigma;
  rep.target = 3.0 / (c * c * c);
  for (double T : Ts) {
    CounterexampleLaw law = build_law(sigma, T);
    GridDensity ps = regularize_u(law, sigma);
    double D = std::max(
        0.0, relative_entropy_to_normal(ps, kCounterexampleFloor).D);
    double J =
        std::max(0.0, standardized_fisher(ps, kCounterexampleFloor).J_st);
    rep.Ts.push_back(T);
    rep.D.push_back(D);
    rep.scaled_D.push_back(T * T * D);
    rep.J.push_back(J);
    rep.scaled_J.push_back(T * T * J);
  }
  detail::extrapolate_scaled(rep);
  return rep;
}

// Exact-identity calibration: v_sigma (*) v_sigma(-x) = phi_{0, sqrt(2(1+s^2))}
// in closed form (|f_sigma|^2 is exactly the Gaussian CF), so the sup-norm of
// the numerically convolved difference measures the whole pipeline's error.
inline double calibration_sup_norm(double sigma, double T) {
  double c = 1.0 + sigma * sigma;
  double W = std::ceil(std::max(std::abs(detail::left_reach(sigma, T, 52.0)),
                                detail::right_reach(sigma, T, 52.0)));
  double h = 1.0 / 128.0;
  std::size_t n = 2 * static_cast<std::size_t>(std::llround(W / h)) + 1;
  GridSpec spec{-W, h, n};
  GridDensity v = build_v(sigma, T, spec);
  std::vector<double> mirrored(v.values.rbegin(), v.values.rend());
  std::vector<double> conv = convolve_trapezoid(v.values, mirrored, h);
  double sd = std::sqrt(2.0 * c);
  double sup = 0.0;
  for (std::size_t k = 0; k < conv.size(); ++k) {
    double x = -2.0 * W + h * static_cast<double>(k);
    sup = std::max(sup, std::abs(conv[k] - normal_pdf(x, 0.0, sd)));
  }
  return sup;
}

// D(U_sigma - V_sigma) <= e^{-cT^2}: the difference law via convolution with
// the reflected regularized density, plus the calibration identity above and
// the ln-ratio trend across T-doublings.
inline AsymptoticsReport lemma_11_3_check(double sigma,
                                          const std::vector<double>& Ts) {
  detail::require_sweep_Ts(Ts);
  double c = 1.0 + sigma * sigma;
  AsymptoticsReport rep;
  rep.sigma = sigma;
  rep.target = 3.0 / (c * c * c);
  for (double T : Ts) {
    CounterexampleLaw law = build_law(sigma, T);
    GridDensity ps = regularize_u(law, sigma);
    rep.Ts.push_back(T);
    rep.D.push_back(std::max(
        0.0, relative_entropy_to_normal(ps, kCounterexampleFloor).D));
    rep.scaled_D.push_back(T * T * rep.D.back());
    rep.J.push_back(
        std::max(0.0, standardized_fisher(ps, kCounterexampleFloor).J_st));
    rep.scaled_J.push_back(T * T * rep.J.back());
    GridDensity diff = convolve(ps, reflect(ps));
    double dd = relative_entropy_to_normal(diff, kCounterexampleFloor).D;
    double jd = standardized_fisher(diff, kCounterexampleFloor).J_st;
    rep.below_floor.push_back(dd < kCounterexampleFloor);
    rep.D_diff.push_back(std::max(0.0, dd));
    rep.J_diff.push_back(std::max(0.0, jd));
  }
  for (std::size_t i = 0; i + 1 < rep.Ts.size(); ++i) {
    if (std::abs(rep.Ts[i + 1] - 2.0 * rep.Ts[i]) > 1e-9 * rep.Ts[i]) continue;
    if (rep.below_floor[i] || rep.below_floor[i + 1]) continue;
    rep.ln_ratio.push_back(std::log(rep.D_diff[i + 1]) /
                           std::log(rep.D_diff[i]));
  }
  detail::extrapolate_scaled(rep);
  rep.calibration_sup = calibration_sup_norm(sigma, Ts.front());
  if (rep.calibration_sup > 1e-8)
    fail(ErrorCode::NumericalError,
         "calibration identity violated: sup = " +
             std::to_string(rep.calibration_sup));
  return rep;
}

struct CertificateReport {
  double sigma = 0.0;
  double T = 0.0;
  double D_X = 0.0;
  double J_X = 0.0;
  double D_diff = 0.0;
  double J_diff = 0.0;
  double fitted_c_D = 0.0;  // largest c with D_diff <= 2 e^{-c/D_X}
  double fitted_c_J = 0.0;
  bool below_floor_D = false;  // fitted value is then only a lower bound
  bool below_floor_J = false;
  bool pass = false;  // both fitted constants >= 1e-3
};

// Both displayed inequalities of the sharpness theorem at one (sigma, T):
// X = (U - a0)/b0 and an i.i.d. copy Y, with
//   D(X_sigma - Y_sigma)    <= 2 e^{-c/D(X_sigma)},
//   J_st(X_sigma - Y_sigma) <= 2 e^{-c/J_st(X_sigma)},
// reporting the largest constants c for which each holds here.
inline CertificateReport theorem_1_3_certificate(double sigma, double T) {
  if (!(T >= 40.0))
    fail(ErrorCode::InvalidConfig, "theorem_1_3_certificate: T >= 40 required");
  CounterexampleLaw law = build_law(sigma, T);
  GridDensity x_law = affine(law.p, -law.a0 / law.b0, 1.0 / law.b0);
  GridDensity ps = regularize(MixedDistribution::from_density(x_law), sigma);
  CertificateReport rep;
  rep.sigma = sigma;
  rep.T = T;
  rep.D_X = std::max(0.0, relative_entropy_to_normal(ps, kCounterexampleFloor).D);
  rep.J_X = std::max(0.0, standardized_fisher(ps, kCounterexampleFloor).J_st);
  GridDensity diff = convolve(ps, reflect(ps));
  double dd = relative_entropy_to_normal(diff, kCounterexampleFloor).D;
  double jd = standardized_fisher(diff, kCounterexampleFloor).J_st;
  rep.below_floor_D = dd < kCounterexampleFloor;
  rep.below_floor_J = jd < kCounterexampleFloor;
  rep.D_diff = std::max(0.0, dd);
  rep.J_diff = std::max(0.0, jd);
  auto fit = [](double dist, double diff_dist, bool below) {
    if (!(dist > 0.0)) return 1e308;  // exactly normal: any c works
    double effective = below ? kCounterexampleFloor : diff_dist;
    return dist * std::log(2.0 / effective);
  };
  rep.fitted_c_D = fit(rep.D_X, rep.D_diff, rep.below_floor_D);
  rep.fitted_c_J = fit(rep.J_X, rep.J_diff, rep.below_floor_J);
  rep.pass = rep.fitted_c_D >= 1e-3 && rep.fitted_c_J >= 1e-3;
  return rep;
}

struct EnvelopeFit {
  double sigma = 0.0;
  double T = 0.0;
  double C2 = 0.0;        // |v| <= C2 e^{-4|xy|/9}
  double C1_weak = 0.0;   // C1 e^{-2(5-sqrt7)|xy|/4} <= |v| (stated form)
  double C1_proof = 0.0;  // exponent 2(5-sqrt7)/9 variant (proof display)
};

// Fits the envelope constants over the positivity window; the constants are
// outputs (the bounds hold for SOME C1, C2 > 0), asserted finite/positive and
// compared across T for stability by the tests.
inline EnvelopeFit fit_envelope(double sigma, double T) {
  double c = 1.0 + sigma * sigma;
  double cap = c * c * T / 16.0;
  double left = detail::left_reach(sigma, T, 30.0);
  double h = 1.0 / 64.0;
  std::size_t n = static_cast<std::size_t>(std::ceil((cap - left) / h)) + 1;
  GridSpec spec{cap - h * static_cast<double>(n - 1), h, n};
  GridDensity v = build_v(sigma, T, spec);
  const double k_upper = 4.0 / 9.0;
  const double k_weak = 2.0 * (5.0 - std::sqrt(7.0)) / 4.0;
  const double k_proof = 2.0 * (5.0 - std::sqrt(7.0)) / 9.0;
  EnvelopeFit fit;
  fit.sigma = sigma;
  fit.T = T;
  fit.C1_weak = 1e308;
  fit.C1_proof = 1e308;
  for (std::size_t j = 0; j < v.n(); ++j) {
    double x = v.x(j);
    if (x > cap) continue;
    double e = std::abs(x * saddle_y(sigma, T, x));
    double av = std::abs(v.values[j]);
    if (k_upper * e < 650.0)
      fit.C2 = std::max(fit.C2, av * std::exp(k_upper * e));
    if (av < 1e-14) continue;  // below the inversion noise floor
    if (k_weak * e < 650.0)
      fit.C1_weak = std::min(fit.C1_weak, av * std::exp(k_weak * e));
    if (k_proof * e < 650.0)
      fit.C1_proof = std::min(fit.C1_proof, av * std::exp(k_proof * e));
  }
  return fit;
}

}  // namespace infodist
