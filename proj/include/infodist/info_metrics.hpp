#pragma once

// Entropy, entropy power, relative entropy to the matching normal D(X),
// Fisher information I(X), standardized Fisher distance J_st(X), and the
// always-true inequality suite (EPI, Stam, Pinsker, the convexity upper
// bounds, and the regularized-entropy bound).
//
// Every headline quantity is computed along two independent routes that must
// agree: D by direct KL quadrature vs the entropy gap; J_st by b^2 I - 1 vs
// the score-gap integral. Logarithms are natural throughout.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "infodist/common.hpp"
#include "infodist/dist_core.hpp"
#include "infodist/grid.hpp"

namespace infodist {

struct EntropyResult {
  double h = 0.0;
  double entropy_power = 0.0;  // exp(2h)
  double tail_truncation_bound = 0.0;
};

struct DistanceResult {
  double D = 0.0;
  double J_st = 0.0;
  NormalParams matching_normal;
  // Cross-check routes (direct KL vs entropy gap; b^2 I - 1 vs score gap).
  double D_path_kl = 0.0;
  double D_path_gap = 0.0;
  double J_path_info = 0.0;
  double J_path_score = 0.0;
  double clamped_mass = 0.0;
};

inline void require_normalized(const GridDensity& d, const char* who) {
  double z = d.integral();
  if (std::abs(z - 1.0) > 1e-6)
    fail(ErrorCode::InvalidDensity,
         std::string(who) + ": density integrates to " + std::to_string(z));
}

inline double normal_logpdf(double x, double mean, double sd) {
  double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd * kSqrt2Pi);
}

inline EntropyResult shannon_entropy(const GridDensity& d) {
  require_normalized(d, "shannon_entropy");
  KahanSum s;
  for (std::size_t j = 0; j < d.n(); ++j) {
    double w = (j == 0 || j + 1 == d.n()) ? 0.5 : 1.0;
    double p = d.values[j];
    if (p >= kEntropyFloor) s.add(-w * p * std::log(p));
  }
  EntropyResult r;
  r.h = d.h * s.value();
  r.entropy_power = std::exp(2.0 * r.h);
  // Heuristic scale of what the omitted tails could add to -int p log p.
  double pe = std::max(d.values.front(), d.values.back());
  r.tail_truncation_bound =
      pe * d.h * (1.0 + std::abs(std::log(std::max(pe, kEntropyFloor))));
  return r;
}

// KL(d1 || d2) on a common grid; q is clamped at the entropy floor where the
// p-mass demands a value (an upper-bound convention for vanishing q).
inline double kl_divergence(const GridDensity& d1, const GridDensity& d2) {
  if (!grids_match(d1, d2))
    fail(ErrorCode::GridMismatch, "kl_divergence: densities must share a grid");
  KahanSum s;
  for (std::size_t j = 0; j < d1.n(); ++j) {
    double w = (j == 0 || j + 1 == d1.n()) ? 0.5 : 1.0;
    double p = d1.values[j];
    if (p < kEntropyFloor) continue;
    double q = std::max(d2.values[j], kEntropyFloor);
    s.add(w * p * (std::log(p) - std::log(q)));
  }
  return d1.h * s.value();
}

// D(X) = h(Z) - h(X) with Z the normal law matching mean/variance. The value
// is the direct KL quadrature (with an optional noise-floor mask for densities
// assembled from long convolution chains whose dead regions carry ~1e-16 FFT
// residue); the entropy-gap route is the independent cross-check.
inline DistanceResult relative_entropy_to_normal(const GridDensity& d,
                                                 double noise_floor = 0.0) {
  require_normalized(d, "relative_entropy_to_normal");
  auto [a, var] = grid_moments(d);
  if (!(var > 0.0)) fail(ErrorCode::DegenerateVariance, "variance is not positive");
  double b = std::sqrt(var);
  double mask = std::max(noise_floor, kEntropyFloor);
  KahanSum s;
  for (std::size_t j = 0; j < d.n(); ++j) {
    double w = (j == 0 || j + 1 == d.n()) ? 0.5 : 1.0;
    double q = d.values[j];
    if (q < mask) continue;
    s.add(w * q * (std::log(q) - normal_logpdf(d.x(j), a, b)));
  }
  DistanceResult r;
  r.matching_normal = {a, b};
  r.D_path_kl = d.h * s.value();
  r.D_path_gap = 0.5 * std::log(2.0 * kPi * std::exp(1.0) * var) - shannon_entropy(d).h;
  if (std::abs(r.D_path_kl - r.D_path_gap) > 1e-9)
    fail(ErrorCode::NumericalError,
         "relative entropy routes disagree: KL=" + std::to_string(r.D_path_kl) +
             " gap=" + std::to_string(r.D_path_gap));
  r.D = r.D_path_kl;
  if (r.D < -1e-10)
    fail(ErrorCode::NumericalError, "negative relative entropy " + std::to_string(r.D));
  return r;
}

struct FisherResult {
  double value = 0.0;
  double clamped_mass = 0.0;    // probability mass where the integrand was dropped
  double cramer_rao_slack = 0.0;  // I - 1/Var, a sanity floor (>= ~0), recorded only
};

// 5-point central differences at steps h and 2h combined by one Richardson
// step; simple one-sided differences at the four edge samples (whose mass is
// negligible for any admissible input).
inline std::vector<double> fd_derivative(const GridDensity& d) {
  std::size_t n = d.n();
  std::vector<double> out(n, 0.0);
  auto five_point = [&](std::size_t j, std::size_t stride) {
    double hm = d.h * static_cast<double>(stride);
    return (-d.values[j + 2 * stride] + 8.0 * d.values[j + stride] -
            8.0 * d.values[j - stride] + d.values[j - 2 * stride]) /
           (12.0 * hm);
  };
  for (std::size_t j = 0; j < n; ++j) {
    if (j >= 4 && j + 4 < n) {
      double d1 = five_point(j, 1);
      double d2 = five_point(j, 2);
      out[j] = (16.0 * d1 - d2) / 15.0;
    } else if (j >= 1 && j + 1 < n) {
      out[j] = (d.values[j + 1] - d.values[j - 1]) / (2.0 * d.h);
    } else if (j == 0) {
      out[j] = (d.values[1] - d.values[0]) / d.h;
    } else {
      out[j] = (d.values[n - 1] - d.values[n - 2]) / d.h;
    }
  }
  return out;
}

inline FisherResult fisher_information(
    const GridDensity& d, double noise_floor = 0.0,
    const std::optional<std::vector<double>>& derivative = std::nullopt) {
  require_normalized(d, "fisher_information");
  double mask = std::max(noise_floor, kFisherFloor);
  double pmax = *std::max_element(d.values.begin(), d.values.end());
  // Interior zeros (density vanishing between positive regions) make p'^2/p
  // meaningless; a boundary jump does the same for the difference quotient.
  std::size_t lo = 0, hi = d.n() - 1;
  while (lo < d.n() && d.values[lo] < mask) ++lo;
  while (hi > lo && d.values[hi] < mask) --hi;
  for (std::size_t j = lo; j <= hi; ++j)
    if (d.values[j] < mask)
      fail(ErrorCode::NonsmoothDensity, "density has interior zeros");
  const std::vector<double>* dp = nullptr;
  std::vector<double> fd;
  if (derivative) {
    if (derivative->size() != d.n())
      fail(ErrorCode::GridMismatch, "fisher_information: derivative length mismatch");
    dp = &*derivative;
  } else if (d.deriv) {
    dp = &*d.deriv;
  } else {
    if (d.values.front() > 1e-8 * pmax || d.values.back() > 1e-8 * pmax)
      fail(ErrorCode::NonsmoothDensity,
           "boundary jump: finite differences need a decayed or exactly "
           "differentiated density");
    fd = fd_derivative(d);
    dp = &fd;
  }
  KahanSum s, clamped;
  for (std::size_t j = 0; j < d.n(); ++j) {
    double w = (j == 0 || j + 1 == d.n()) ? 0.5 : 1.0;
    double p = d.values[j];
    if (p < mask) {
      clamped.add(w * p);
      continue;
    }
    double g = (*dp)[j];
    s.add(w * g * g / p);
  }
  FisherResult r;
  r.value = d.h * s.value();
  r.clamped_mass = d.h * clamped.value();
  auto [mean, var] = grid_moments(d);
  (void)mean;
  r.cramer_rao_slack = var > 0.0 ? r.value - 1.0 / var : 0.0;
  return r;
}

// J_st = b^2 (I(X) - 1/b^2): reported from the score-gap integral, checked
// against b^2 I - 1.
inline DistanceResult standardized_fisher(
    const GridDensity& d, double noise_floor = 0.0,
    const std::optional<std::vector<double>>& derivative = std::nullopt) {
  auto [a, var] = grid_moments(d);
  if (!(var > 0.0)) fail(ErrorCode::DegenerateVariance, "variance is not positive");
  FisherResult fi = fisher_information(d, noise_floor, derivative);
  const std::vector<double>& dp =
      derivative ? *derivative : (d.deriv ? *d.deriv : fd_derivative(d));
  double mask = std::max(noise_floor, kFisherFloor);
  KahanSum s;
  for (std::size_t j = 0; j < d.n(); ++j) {
    double w = (j == 0 || j + 1 == d.n()) ? 0.5 : 1.0;
    double p = d.values[j];
    if (p < mask) continue;
    double gap = dp[j] / p + (d.x(j) - a) / var;
    s.add(w * gap * gap * p);
  }
  DistanceResult r;
  r.matching_normal = {a, std::sqrt(var)};
  r.J_path_score = var * d.h * s.value();
  r.J_path_info = var * fi.value - 1.0;
  r.clamped_mass = fi.clamped_mass;
  if (!nearly_equal(r.J_path_score, r.J_path_info, 1e-7, 1e-10))
    fail(ErrorCode::NumericalError,
         "Fisher distance routes disagree: score=" + std::to_string(r.J_path_score) +
             " info=" + std::to_string(r.J_path_info));
  r.J_st = r.J_path_score;
  if (r.J_st < -1e-10)
    fail(ErrorCode::NumericalError, "negative J_st " + std::to_string(r.J_st));
  return r;
}

// Both distances plus the (1.5)-style internal consistency D <= J_st/2.
inline DistanceResult compute_distances(
    const GridDensity& d, double noise_floor = 0.0,
    const std::optional<std::vector<double>>& derivative = std::nullopt) {
  DistanceResult r = relative_entropy_to_normal(d, noise_floor);
  DistanceResult j = standardized_fisher(d, noise_floor, derivative);
  r.J_st = j.J_st;
  r.J_path_info = j.J_path_info;
  r.J_path_score = j.J_path_score;
  r.clamped_mass = j.clamped_mass;
  if (0.5 * r.J_st + 1e-8 < r.D)
    fail(ErrorCode::NumericalError,
         "J_st/2 >= D violated: J=" + std::to_string(r.J_st) +
             " D=" + std::to_string(r.D));
  return r;
}

struct InequalityReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // signed margin; the inequality direction makes it >= 0
  bool pass = false;
};

inline InequalityReport make_report(const std::string& name, double lhs, double rhs,
                                    double slack, double tol) {
  return {name, lhs, rhs, slack, slack >= -tol};
}

// Entropy power inequality N(X+Y) >= N(X) + N(Y).
inline InequalityReport check_epi(const GridDensity& dX, const GridDensity& dY,
                                  double tol = 1e-7) {
  GridDensity sum = convolve(dX, dY);
  double lhs = shannon_entropy(sum).entropy_power;
  double rhs = shannon_entropy(dX).entropy_power + shannon_entropy(dY).entropy_power;
  return make_report("epi", lhs, rhs, lhs - rhs, tol);
}

// FFT-backed convolutions carry ~1e-15 absolute noise in their far tails
// (clamped to zero); a relative floor keeps score-based integrands on the
// signal region only.
inline double fft_noise_floor(const GridDensity& d) {
  double peak = 0.0;
  for (double v : d.values) peak = std::max(peak, v);
  return 1e-12 * peak;
}

// Stam's inequality 1/I(X+Y) >= 1/I(X) + 1/I(Y).
inline InequalityReport check_stam(const GridDensity& dX, const GridDensity& dY,
                                   double tol = 1e-7) {
  GridDensity sum = convolve(dX, dY);
  double lhs = 1.0 / fisher_information(sum, fft_noise_floor(sum)).value;
  double rhs = 1.0 / fisher_information(dX).value + 1.0 / fisher_information(dY).value;
  return make_report("stam", lhs, rhs, lhs - rhs, tol);
}

// Pinsker: TV(p, q)^2 <= 2 KL(p || q).
inline InequalityReport check_pinsker(const GridDensity& d1, const GridDensity& d2,
                                      double tol = 1e-7) {
  double tv = tv_distance(d1, d2);
  double kl = kl_divergence(d1, d2);
  return make_report("pinsker", tv * tv, 2.0 * kl, 2.0 * kl - tv * tv, tol);
}

// The convexity upper bounds for the sum: with variance weights normalized to
// v_x + v_y = 1 (both sides of each bound are affine-invariant, so the checks
// are evaluated without physically rescaling the laws),
//   D(X+Y)    <= v_x D(X)    + v_y D(Y)
//   J_st(X+Y) <= v_x J_st(X) + v_y J_st(Y).
struct UpperBoundReport {
  InequalityReport d_bound;
  InequalityReport j_bound;
};

inline UpperBoundReport check_upper_bounds(const GridDensity& dX, const GridDensity& dY,
                                           double tol = 1e-7) {
  auto [ax, vx] = grid_moments(dX);
  auto [ay, vy] = grid_moments(dY);
  (void)ax;
  (void)ay;
  double wx = vx / (vx + vy), wy = vy / (vx + vy);
  GridDensity sum = convolve(dX, dY);
  DistanceResult rs = compute_distances(sum, fft_noise_floor(sum));
  DistanceResult rx = compute_distances(dX);
  DistanceResult ry = compute_distances(dY);
  UpperBoundReport rep;
  double rhsD = wx * rx.D + wy * ry.D;
  rep.d_bound = make_report("sum_D_bound", rs.D, rhsD, rhsD - rs.D, tol);
  double rhsJ = wx * rx.J_st + wy * ry.J_st;
  rep.j_bound = make_report("sum_J_bound", rs.J_st, rhsJ, rhsJ - rs.J_st, tol);
  return rep;
}

// D(X_sigma) <= (1/2) log(2e Var(X_sigma)/sigma^2), together with the sharper
// factor-e variant (both follow from h(X + sigma Z) >= h(sigma Z)).
struct RegularizedEntropyBound {
  InequalityReport bound_2e;
  InequalityReport bound_e;
};

inline RegularizedEntropyBound check_regularized_entropy_bound(
    const GridDensity& d_sigma, double sigma, double tol = 1e-7) {
  DistanceResult r = relative_entropy_to_normal(d_sigma);
  double var = r.matching_normal.b * r.matching_normal.b;
  RegularizedEntropyBound out;
  double rhs2e = 0.5 * std::log(2.0 * std::exp(1.0) * var / (sigma * sigma));
  out.bound_2e = make_report("D_le_half_log_2e_var", r.D, rhs2e, rhs2e - r.D, tol);
  double rhse = 0.5 * std::log(std::exp(1.0) * var / (sigma * sigma));
  out.bound_e = make_report("D_le_half_log_e_var", r.D, rhse, rhse - r.D, tol);
  return out;
}

}  // namespace infodist
