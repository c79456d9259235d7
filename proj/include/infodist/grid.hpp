#pragma once

// Uniform-grid sampled densities: the universal output type of regularization
// and convolution. A GridDensity may carry an exact-derivative companion
// (filled by `regularize`, propagated by convolve/reflect/affine) so that
// Fisher-information integrals never rely on finite differences when an exact
// kernel derivative is available.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "infodist/common.hpp"

namespace infodist {

struct GridSpec {
  double x0 = 0.0;
  double h = 0.0;
  std::size_t n = 0;
  double x(std::size_t j) const { return x0 + h * static_cast<double>(j); }
  double x_last() const { return x(n ? n - 1 : 0); }
};

struct GridDensity {
  double x0 = 0.0;
  double h = 0.0;
  std::vector<double> values;
  // Exact pointwise derivative of the density, when known (same grid).
  std::optional<std::vector<double>> deriv;

  std::size_t n() const { return values.size(); }
  double x(std::size_t j) const { return x0 + h * static_cast<double>(j); }
  double x_last() const { return x(values.empty() ? 0 : values.size() - 1); }
  GridSpec spec() const { return {x0, h, values.size()}; }
  double integral() const { return trapezoid(values, h); }
};

inline bool grids_match(const GridDensity& a, const GridDensity& b) {
  return a.n() == b.n() && std::abs(a.h - b.h) <= 1e-12 * std::max(a.h, b.h) &&
         std::abs(a.x0 - b.x0) <= 1e-9 * std::max(1.0, std::abs(a.x0));
}

inline bool steps_match(double h1, double h2) {
  return std::abs(h1 - h2) <= 1e-12 * std::max(h1, h2);
}

// Invariant check for densities that represent laws (signed intermediates such
// as the raw cubic-phase inversion skip this until they become laws).
inline void validate_density(const GridDensity& d, const std::string& who) {
  if (d.h <= 0.0) fail(ErrorCode::InvalidDensity, who + ": grid step must be positive");
  if (d.n() < 3) fail(ErrorCode::InvalidDensity, who + ": need at least 3 samples");
  for (double v : d.values) {
    if (!std::isfinite(v)) fail(ErrorCode::InvalidDensity, who + ": non-finite sample");
    if (v < 0.0) fail(ErrorCode::InvalidDensity, who + ": negative sample");
  }
}

inline GridDensity normalize(const GridDensity& d) {
  double z = d.integral();
  if (!std::isfinite(z) || z <= 0.0)
    fail(ErrorCode::InvalidDensity, "normalize: integral is " + std::to_string(z));
  GridDensity out = d;
  double inv = 1.0 / z;
  for (double& v : out.values) v *= inv;
  if (out.deriv)
    for (double& v : *out.deriv) v *= inv;
  return out;
}

// Mean and variance by trapezoid quadrature.
inline std::pair<double, double> grid_moments(const GridDensity& d) {
  KahanSum m0, m1;
  auto w = [&](std::size_t j) { return (j == 0 || j + 1 == d.n()) ? 0.5 : 1.0; };
  for (std::size_t j = 0; j < d.n(); ++j) m0.add(w(j) * d.values[j] * d.x(j));
  double mass = d.integral();
  double mean = d.h * m0.value() / mass;
  for (std::size_t j = 0; j < d.n(); ++j) {
    double c = d.x(j) - mean;
    m1.add(w(j) * d.values[j] * c * c);
  }
  double var = d.h * m1.value() / mass;
  return {mean, std::max(var, 0.0)};
}

// CDF sampled at the grid points (trapezoid cumulative sum).
inline std::vector<double> grid_cdf(const GridDensity& d) {
  std::vector<double> F(d.n(), 0.0);
  KahanSum s;
  for (std::size_t j = 1; j < d.n(); ++j) {
    s.add(0.5 * d.h * (d.values[j - 1] + d.values[j]));
    F[j] = s.value();
  }
  return F;
}

// Law of alpha + beta * X for X ~ d (beta != 0).
inline GridDensity affine(const GridDensity& d, double alpha, double beta) {
  if (beta == 0.0) fail(ErrorCode::DomainError, "affine: beta must be nonzero");
  GridDensity out;
  out.h = std::abs(beta) * d.h;
  double inv = 1.0 / std::abs(beta);
  std::size_t n = d.n();
  out.values.resize(n);
  if (d.deriv) out.deriv = std::vector<double>(n);
  // dp_Y/dy = p'((y-alpha)/beta) / (beta*|beta|) by the chain rule.
  double dfac = 1.0 / (beta * std::abs(beta));
  if (beta > 0) {
    out.x0 = alpha + beta * d.x0;
    for (std::size_t j = 0; j < n; ++j) out.values[j] = d.values[j] * inv;
    if (d.deriv)
      for (std::size_t j = 0; j < n; ++j) (*out.deriv)[j] = (*d.deriv)[j] * dfac;
  } else {
    out.x0 = alpha + beta * d.x_last();
    for (std::size_t j = 0; j < n; ++j) out.values[j] = d.values[n - 1 - j] * inv;
    if (d.deriv)
      for (std::size_t j = 0; j < n; ++j) (*out.deriv)[j] = (*d.deriv)[n - 1 - j] * dfac;
  }
  return out;
}

// Zero-extend d onto a wider spec sharing the same step and grid phase.
inline GridDensity embed(const GridDensity& d, const GridSpec& spec) {
  if (!steps_match(d.h, spec.h))
    fail(ErrorCode::GridMismatch, "embed: step mismatch");
  double off = (d.x0 - spec.x0) / spec.h;
  double off_round = std::round(off);
  if (std::abs(off - off_round) > 1e-6)
    fail(ErrorCode::GridMismatch, "embed: grids are not phase-aligned");
  long k0 = static_cast<long>(off_round);
  if (k0 < 0 || static_cast<std::size_t>(k0) + d.n() > spec.n)
    fail(ErrorCode::InsufficientCoverage, "embed: target spec does not cover source");
  GridDensity out;
  out.x0 = spec.x0;
  out.h = spec.h;
  out.values.assign(spec.n, 0.0);
  std::copy(d.values.begin(), d.values.end(), out.values.begin() + k0);
  if (d.deriv) {
    out.deriv = std::vector<double>(spec.n, 0.0);
    std::copy(d.deriv->begin(), d.deriv->end(), out.deriv->begin() + k0);
  }
  return out;
}

// Sample a closed-form density (and optionally its derivative) on a grid.
template <class F>
GridDensity sample_on_grid(const GridSpec& spec, F&& pdf) {
  GridDensity d;
  d.x0 = spec.x0;
  d.h = spec.h;
  d.values.resize(spec.n);
  for (std::size_t j = 0; j < spec.n; ++j) d.values[j] = pdf(spec.x(j));
  return d;
}

}  // namespace infodist
