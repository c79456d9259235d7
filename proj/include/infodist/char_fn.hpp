#pragma once

// Characteristic functions of compactly supported mixed laws as entire
// functions of a complex argument, plus the two closed-form families used
// throughout (Gaussian, and the cubic-phase function behind the sharpness
// construction). The imaginary-axis path is always evaluated in log scale
// with max-exponent subtraction, so tilting never overflows; the direct
// complex path carries a hard |Im t| * radius <= 700 overflow guard.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "infodist/common.hpp"
#include "infodist/dist_core.hpp"

namespace infodist {

enum class CfKind { Mixed, Gaussian, Cubic };

struct CubicParams {
  double sigma = 1.0;
  double T = 40.0;
  double c() const { return 1.0 + sigma * sigma; }
};

struct EvalResult {
  std::complex<double> value;
  double error_estimate = 0.0;  // refinement (h vs 2h Richardson) heuristic
};

struct LogEvalResult {
  double log_f = 0.0;   // log f(iy) = log E e^{-yX}
  double dlog = 0.0;    // d/dy log f(iy) = -(tilted mean)
  double d2log = 0.0;   // d^2/dy^2 log f(iy) = tilted variance
};

struct CharFn {
  CfKind kind = CfKind::Gaussian;
  // Mixed source: grid samples (already scaled by the continuous weight) and
  // atoms, with the quadrature normalization captured so eval(0) == 1 exactly.
  double grid_x0 = 0.0;
  double grid_h = 0.0;
  std::vector<double> grid_p;  // w_ac * p(x_j)
  std::vector<Atom> atoms;
  double norm = 1.0;
  NormalParams gauss{0.0, 1.0};
  CubicParams cubic;
  double support_radius = 0.0;

  double grid_x(std::size_t j) const {
    return grid_x0 + grid_h * static_cast<double>(j);
  }
};

inline CharFn make_char_fn(const MixedDistribution& m) {
  validate_mixed(m);
  CharFn cf;
  cf.kind = CfKind::Mixed;
  double radius = 0.0;
  if (m.ac && m.w_ac > 0.0) {
    cf.grid_x0 = m.ac->x0;
    cf.grid_h = m.ac->h;
    cf.grid_p.resize(m.ac->n());
    for (std::size_t j = 0; j < m.ac->n(); ++j)
      cf.grid_p[j] = m.w_ac * m.ac->values[j];
    radius = std::max(std::abs(m.ac->x0), std::abs(m.ac->x_last()));
  }
  cf.atoms = m.atoms;
  for (const Atom& a : cf.atoms) radius = std::max(radius, std::abs(a.location));
  cf.support_radius = radius;
  KahanSum z;
  for (std::size_t j = 0; j < cf.grid_p.size(); ++j) {
    double w = (j == 0 || j + 1 == cf.grid_p.size()) ? 0.5 : 1.0;
    z.add(w * cf.grid_h * cf.grid_p[j]);
  }
  for (const Atom& a : cf.atoms) z.add(a.mass);
  cf.norm = z.value();
  if (!(cf.norm > 0.0))
    fail(ErrorCode::InvalidDensity, "characteristic function of a zero measure");
  return cf;
}

inline CharFn make_gaussian_cf(double a, double b) {
  if (!(b > 0.0)) fail(ErrorCode::InvalidConfig, "gaussian cf needs b > 0");
  CharFn cf;
  cf.kind = CfKind::Gaussian;
  cf.gauss = {a, b};
  cf.support_radius = std::abs(a) + 40.0 * b;  // effective numeric support
  return cf;
}

inline CharFn make_cubic_cf(double sigma, double T) {
  if (!(T > 0.0)) fail(ErrorCode::InvalidConfig, "cubic cf needs T > 0");
  CharFn cf;
  cf.kind = CfKind::Cubic;
  cf.cubic = {sigma, T};
  cf.support_radius = T;  // nominal scale; closed forms guard per-exponent
  return cf;
}

// f(t) for complex t. Mixed sources integrate e^{itx} p(x) by trapezoid (with
// a coarsened pass for the attached error estimate) and add exact atom sums.
inline EvalResult cf_eval(const CharFn& cf, std::complex<double> t) {
  EvalResult r;
  if (cf.kind == CfKind::Gaussian) {
    std::complex<double> z =
        std::complex<double>(0.0, 1.0) * (cf.gauss.a * t) -
        0.5 * cf.gauss.b * cf.gauss.b * t * t;
    if (std::abs(z.real()) > 700.0)
      fail(ErrorCode::UseLogScale, "gaussian cf exponent out of double range");
    r.value = std::exp(z);
    r.error_estimate = std::abs(r.value) * 1e-16;
    return r;
  }
  if (cf.kind == CfKind::Cubic) {
    std::complex<double> z = -0.5 * cf.cubic.c() * t * t +
                             std::complex<double>(0.0, 1.0) * (t * t * t) /
                                 cf.cubic.T;
    if (std::abs(z.real()) > 700.0)
      fail(ErrorCode::UseLogScale, "cubic cf exponent out of double range");
    r.value = std::exp(z);
    r.error_estimate = std::abs(r.value) * 1e-16;
    return r;
  }
  if (std::abs(t.imag()) * cf.support_radius > 700.0)
    fail(ErrorCode::UseLogScale,
         "|Im t| * support_radius exceeds the overflow guard");
  const std::size_t n = cf.grid_p.size();
  std::complex<double> fine = 0.0, coarse = 0.0;
  if (n >= 3) {
    KahanSum fre, fim;
    for (std::size_t j = 0; j < n; ++j) {
      if (cf.grid_p[j] == 0.0) continue;
      double w = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
      std::complex<double> e =
          std::exp(std::complex<double>(0.0, 1.0) * t * cf.grid_x(j));
      fre.add(w * cf.grid_p[j] * e.real());
      fim.add(w * cf.grid_p[j] * e.imag());
    }
    fine = cf.grid_h * std::complex<double>(fre.value(), fim.value());
    std::size_t last = ((n - 1) / 2) * 2;
    KahanSum cre, cim;
    for (std::size_t j = 0; j <= last; j += 2) {
      double w = (j == 0 || j == last) ? 0.5 : 1.0;
      std::complex<double> e =
          std::exp(std::complex<double>(0.0, 1.0) * t * cf.grid_x(j));
      cre.add(w * cf.grid_p[j] * e.real());
      cim.add(w * cf.grid_p[j] * e.imag());
    }
    coarse = 2.0 * cf.grid_h * std::complex<double>(cre.value(), cim.value());
    if (last + 1 < n) {
      // odd point count: close the coarse pass with one trapezoid cell of
      // width h so both passes cover the same interval
      std::complex<double> ea =
          std::exp(std::complex<double>(0.0, 1.0) * t * cf.grid_x(last));
      std::complex<double> eb =
          std::exp(std::complex<double>(0.0, 1.0) * t * cf.grid_x(n - 1));
      coarse += 0.5 * cf.grid_h *
                (cf.grid_p[last] * ea + cf.grid_p[n - 1] * eb);
    }
  }
  std::complex<double> atom_sum = 0.0;
  for (const Atom& a : cf.atoms)
    atom_sum +=
        a.mass * std::exp(std::complex<double>(0.0, 1.0) * t * a.location);
  r.value = (fine + atom_sum) / cf.norm;
  r.error_estimate = std::abs(fine - coarse) / (3.0 * cf.norm);
  return r;
}

inline EvalResult cf_eval(const CharFn& cf, double t) {
  return cf_eval(cf, std::complex<double>(t, 0.0));
}

// log f(iy) with first two derivatives in y. For mixed sources the tilted
// moments are computed under the renormalized weights e^{-yx} dF with the
// max exponent subtracted, so the path is total in y on compact support.
inline LogEvalResult log_eval_imag(const CharFn& cf, double y) {
  LogEvalResult r;
  if (cf.kind == CfKind::Gaussian) {
    double a = cf.gauss.a, b2 = cf.gauss.b * cf.gauss.b;
    r.log_f = -a * y + 0.5 * b2 * y * y;
    r.dlog = -a + b2 * y;
    r.d2log = b2;
    return r;
  }
  if (cf.kind == CfKind::Cubic) {
    double c = cf.cubic.c(), T = cf.cubic.T;
    r.log_f = 0.5 * c * y * y + y * y * y / T;
    r.dlog = c * y + 3.0 * y * y / T;
    r.d2log = c + 6.0 * y / T;  // may be negative: not a probability source
    return r;
  }
  const std::size_t n = cf.grid_p.size();
  double m_star = -1e308;
  for (std::size_t j = 0; j < n; ++j)
    if (cf.grid_p[j] > 0.0) m_star = std::max(m_star, -y * cf.grid_x(j));
  for (const Atom& a : cf.atoms) m_star = std::max(m_star, -y * a.location);
  KahanSum s0, s1, s2;
  auto accumulate = [&](double x, double w) {
    double e = w * std::exp(-y * x - m_star);
    s0.add(e);
    s1.add(x * e);
    s2.add(x * x * e);
  };
  for (std::size_t j = 0; j < n; ++j) {
    if (cf.grid_p[j] == 0.0) continue;
    double w = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
    accumulate(cf.grid_x(j), w * cf.grid_h * cf.grid_p[j]);
  }
  for (const Atom& a : cf.atoms) accumulate(a.location, a.mass);
  if (!(s0.value() > 0.0))
    fail(ErrorCode::NumericalError, "tilted mass underflowed to zero");
  double mean = s1.value() / s0.value();
  double var = s2.value() / s0.value() - mean * mean;
  r.log_f = m_star + std::log(s0.value()) - std::log(cf.norm);
  r.dlog = -mean;
  r.d2log = std::max(0.0, var);
  return r;
}

struct SandwichReport {
  double T = 0.0;
  std::size_t n_samples = 0;  // total sampled points over all circles
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  std::vector<double> radii;
  std::vector<double> min_by_circle;
  std::vector<double> max_by_circle;
  bool within_band = false;  // [1/2, 3/2]
};

// Samples the product |f_X(t) f_Y(t)| against |e^{-t^2/2}| on four concentric
// circles |t| in {T/4, T/2, 3T/4, T}; n_samples is the per-circle angle count.
inline SandwichReport sandwich_check(const CharFn& cfX, const CharFn& cfY,
                                     double T, std::size_t n_samples) {
  if (n_samples < 64)
    fail(ErrorCode::InvalidConfig, "sandwich_check needs n_samples >= 64");
  if (!(T > 0.0)) fail(ErrorCode::InvalidConfig, "sandwich_check needs T > 0");
  SandwichReport rep;
  rep.T = T;
  rep.min_ratio = 1e308;
  rep.max_ratio = -1e308;
  for (int k = 1; k <= 4; ++k) {
    double radius = T * static_cast<double>(k) / 4.0;
    double lo = 1e308, hi = -1e308;
    for (std::size_t j = 0; j < n_samples; ++j) {
      double theta = 2.0 * kPi * static_cast<double>(j) /
                     static_cast<double>(n_samples);
      std::complex<double> t(radius * std::cos(theta),
                             radius * std::sin(theta));
      std::complex<double> prod = cf_eval(cfX, t).value * cf_eval(cfY, t).value;
      double ratio = std::abs(prod) * std::exp(0.5 * (t * t).real());
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
      ++rep.n_samples;
    }
    rep.radii.push_back(radius);
    rep.min_by_circle.push_back(lo);
    rep.max_by_circle.push_back(hi);
    rep.min_ratio = std::min(rep.min_ratio, lo);
    rep.max_ratio = std::max(rep.max_ratio, hi);
  }
  rep.within_band = rep.min_ratio >= 0.5 && rep.max_ratio <= 1.5;
  return rep;
}

}  // namespace infodist
