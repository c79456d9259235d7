#pragma once

// Representations of one-dimensional probability laws and the measure-level
// operations used throughout: moments, Gaussian regularization X -> X + sigma Z,
// truncation at a level N (mass outside [-N, N] collapses to an atom at 0),
// convolution/reflection, and distribution-level distances.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "infodist/common.hpp"
#include "infodist/fft.hpp"
#include "infodist/grid.hpp"

namespace infodist {

struct Atom {
  double location = 0.0;
  double mass = 0.0;
};

struct NormalParams {
  double a = 0.0;  // mean
  double b = 1.0;  // standard deviation
};

// Absolutely continuous part (weight w_ac) plus finitely many atoms. The ac
// GridDensity is stored normalized; w_ac scales it.
struct MixedDistribution {
  std::optional<GridDensity> ac;
  double w_ac = 0.0;
  std::vector<Atom> atoms;

  static MixedDistribution from_density(GridDensity d) {
    MixedDistribution m;
    m.ac = normalize(std::move(d));
    m.w_ac = 1.0;
    return m;
  }
  static MixedDistribution from_atoms(std::vector<Atom> atoms) {
    MixedDistribution m;
    m.atoms = std::move(atoms);
    return m;
  }
};

inline void validate_mixed(const MixedDistribution& m) {
  double mass = m.ac ? m.w_ac : 0.0;
  std::set<double> locs;
  for (const Atom& a : m.atoms) {
    if (!(a.mass > 0.0)) fail(ErrorCode::InvalidDensity, "atom with non-positive mass");
    if (!locs.insert(a.location).second)
      fail(ErrorCode::InvalidDensity, "duplicate atom locations");
    mass += a.mass;
  }
  if (std::abs(mass - 1.0) > 1e-9)
    fail(ErrorCode::InvalidDensity,
         "total mass " + std::to_string(mass) + " not within 1e-9 of 1");
  if (m.ac) {
    validate_density(*m.ac, "mixed ac part");
    // the ac part is stored unit-normalized; w_ac carries its weight
    double I = m.ac->integral();
    if (std::abs(I - 1.0) > 1e-6)
      fail(ErrorCode::InvalidDensity,
           "ac integral " + std::to_string(I) + " not within 1e-6 of 1");
  }
}

inline std::pair<double, double> support_bounds(const MixedDistribution& m) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  if (m.ac && m.w_ac > 0.0) {
    lo = std::min(lo, m.ac->x0);
    hi = std::max(hi, m.ac->x_last());
  }
  for (const Atom& a : m.atoms) {
    lo = std::min(lo, a.location);
    hi = std::max(hi, a.location);
  }
  if (!(lo <= hi)) fail(ErrorCode::InvalidDensity, "empty distribution");
  return {lo, hi};
}

// Mean and variance: trapezoid over the ac part plus exact atom sums.
inline std::pair<double, double> moments(const MixedDistribution& m) {
  if ((!m.ac || !(m.w_ac > 0.0)) && m.atoms.empty())
    fail(ErrorCode::InvalidConfig, "moments: empty distribution");
  KahanSum m1, m2;
  if (m.ac && m.w_ac > 0.0) {
    const GridDensity& d = *m.ac;
    for (std::size_t j = 0; j < d.n(); ++j) {
      double w = (j == 0 || j + 1 == d.n()) ? 0.5 : 1.0;
      double x = d.x(j);
      m1.add(w * d.values[j] * x * d.h * m.w_ac);
      m2.add(w * d.values[j] * x * x * d.h * m.w_ac);
    }
  }
  for (const Atom& a : m.atoms) {
    m1.add(a.mass * a.location);
    m2.add(a.mass * a.location * a.location);
  }
  double mean = m1.value();
  double var = std::max(m2.value() - mean * mean, 0.0);
  return {mean, var};
}

// Truncation level per the regularization scheme: N depends on the target
// closeness epsilon and the noise level sigma; T = N/64 is the matching
// characteristic-function disk radius.
struct TruncationParams {
  double epsilon = 0.0;
  double sigma = 0.0;
  double N = 0.0;
  double T = 0.0;

  static TruncationParams make(double epsilon, double sigma) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
      fail(ErrorCode::InvalidConfig, "TruncationParams: epsilon must be in (0,1)");
    if (!(sigma > 0.0 && sigma <= 1.0))
      fail(ErrorCode::InvalidConfig, "TruncationParams: sigma must be in (0,1]");
    TruncationParams p;
    p.epsilon = epsilon;
    p.sigma = sigma;
    p.N = std::sqrt(1.0 + 2.0 * sigma * sigma) *
          (1.0 + std::sqrt(2.0 * std::log(1.0 / epsilon)));
    p.T = p.N / 64.0;
    return p;
  }
};

// ---------------------------------------------------------------------------
// regularize: density of X + sigma Z.
//
// The ac part is convolved with the Gaussian kernel by FFT (trapezoid-
// consistent); atoms contribute mass_i * phi_sigma(x - loc_i) analytically.
// The exact kernel derivative (ac part against phi'_sigma plus analytic atom
// terms) is attached as the derivative companion. A sparse direct-quadrature
// probe cross-checks the FFT path on every call; `dense_check` (used by the
// property tests) compares the two paths on the full grid.
// ---------------------------------------------------------------------------

// Default output grid: step min(sigma/8, b/100) (b = input standard deviation)
// unless a hint is given, support out to mean +- 10 post-regularization SDs and
// at least 8.5 sigma beyond the input support, phase-aligned with the ac grid.
inline GridSpec grid_for_regularize(const MixedDistribution& m, double sigma,
                                    double step_hint = 0.0) {
  auto [lo, hi] = support_bounds(m);
  auto [mean, var] = moments(m);
  double h = step_hint > 0.0 ? step_hint : sigma / 8.0;
  // degenerate (atom-only) laws have var == 0; the kernel scale alone governs
  if (!(step_hint > 0.0) && var > 0.0) h = std::min(h, std::sqrt(var) / 100.0);
  if (m.ac)
    h = m.ac->h <= h * (1.0 + 1e-9)
            ? m.ac->h
            : m.ac->h / std::ceil(m.ac->h / h - 1e-9);
  double sd_reg = std::sqrt(var + sigma * sigma);
  double want_lo = std::min(lo, mean - 10.0 * sd_reg) - 8.5 * sigma;
  double want_hi = std::max(hi, mean + 10.0 * sd_reg) + 8.5 * sigma;
  double anchor = m.ac ? m.ac->x0 : 0.0;
  double x0 = anchor - std::ceil((anchor - want_lo) / h) * h;
  std::size_t n = static_cast<std::size_t>(std::ceil((want_hi - x0) / h)) + 1;
  return {x0, h, n};
}

namespace detail {

// Direct-quadrature evaluation of (ac * phi_sigma)(x) + atom terms at one point.
inline double regularize_direct_at(const MixedDistribution& m, double sigma, double x,
                                   bool derivative) {
  KahanSum s;
  if (m.ac && m.w_ac > 0.0) {
    const GridDensity& d = *m.ac;
    for (std::size_t j = 0; j < d.n(); ++j) {
      double w = (j == 0 || j + 1 == d.n()) ? 0.5 : 1.0;
      double k = derivative ? normal_pdf_deriv(x, d.x(j), sigma)
                            : normal_pdf(x, d.x(j), sigma);
      s.add(w * d.values[j] * k * d.h * m.w_ac);
    }
  }
  for (const Atom& a : m.atoms)
    s.add(a.mass * (derivative ? normal_pdf_deriv(x, a.location, sigma)
                               : normal_pdf(x, a.location, sigma)));
  return s.value();
}

}  // namespace detail

struct RegularizeDiagnostics {
  double probe_max_diff = 0.0;       // sparse FFT-vs-direct cross-check
  double dense_max_diff = 0.0;       // full-grid cross-check (when requested)
  double normalization_defect = 0.0; // |integral - 1| before the final normalize
};

inline GridDensity regularize(const MixedDistribution& m, double sigma,
                              const GridSpec& grid, bool dense_check = false,
                              RegularizeDiagnostics* diag = nullptr) {
  if (!(sigma > 0.0)) fail(ErrorCode::InvalidConfig, "regularize: sigma must be > 0");
  if (grid.h > sigma / 8.0 + 1e-15)
    fail(ErrorCode::GridTooCoarse, "regularize: grid step " + std::to_string(grid.h) +
                                       " exceeds sigma/8");
  auto [lo, hi] = support_bounds(m);
  if (grid.x0 > lo - 8.0 * sigma + 1e-12 || grid.x_last() < hi + 8.0 * sigma - 1e-12)
    fail(ErrorCode::InsufficientCoverage, "regularize: grid must cover 8 sigma tails");

  GridDensity out;
  out.x0 = grid.x0;
  out.h = grid.h;
  out.values.assign(grid.n, 0.0);
  out.deriv = std::vector<double>(grid.n, 0.0);

  if (m.ac && m.w_ac > 0.0) {
    const GridDensity& d = *m.ac;
    if (steps_match(d.h, grid.h)) {
      double off = (d.x0 - grid.x0) / grid.h;
      if (std::abs(off - std::round(off)) > 1e-6)
        fail(ErrorCode::GridMismatch, "regularize: output grid must be phase-aligned "
                                      "with the ac grid");
      // Gaussian kernel on [-14 sigma, 14 sigma]: the omitted tail is below
      // 1e-42 relative, far under every tolerance in this library.
      long half = static_cast<long>(std::ceil(14.0 * sigma / grid.h));
      std::vector<double> kernel(2 * half + 1), dkernel(2 * half + 1);
      for (long j = -half; j <= half; ++j) {
        double u = static_cast<double>(j) * grid.h;
        kernel[j + half] = normal_pdf(u, 0.0, sigma);
        dkernel[j + half] = normal_pdf_deriv(u, 0.0, sigma);
      }
      std::vector<double> conv = convolve_trapezoid(d.values, kernel, grid.h);
      std::vector<double> dconv = convolve_trapezoid(d.values, dkernel, grid.h);
      // Convolution output starts at d.x0 - half*h; map onto the requested grid.
      double conv_x0 = d.x0 - static_cast<double>(half) * grid.h;
      long k0 = static_cast<long>(std::llround((conv_x0 - grid.x0) / grid.h));
      for (std::size_t j = 0; j < conv.size(); ++j) {
        long k = k0 + static_cast<long>(j);
        if (k < 0 || k >= static_cast<long>(grid.n)) continue;  // sub-1e-42 tails
        out.values[k] += m.w_ac * conv[j];
        (*out.deriv)[k] += m.w_ac * dconv[j];
      }
    } else {
      // Output step refines the ac step (coarse input): fall back to direct
      // quadrature of the smoothing integral at every output point. The FFT
      // and direct routes coincide when steps match; this branch keeps any
      // step combination correct at O(n_out * n_ac) cost.
      MixedDistribution ac_only;
      ac_only.ac = d;
      ac_only.w_ac = 1.0;
      for (std::size_t k = 0; k < grid.n; ++k) {
        double x = grid.x(k);
        out.values[k] += m.w_ac * detail::regularize_direct_at(ac_only, sigma, x, false);
        (*out.deriv)[k] += m.w_ac * detail::regularize_direct_at(ac_only, sigma, x, true);
      }
    }
  }
  for (const Atom& a : m.atoms) {
    for (std::size_t k = 0; k < grid.n; ++k) {
      double x = grid.x(k);
      out.values[k] += a.mass * normal_pdf(x, a.location, sigma);
      (*out.deriv)[k] += a.mass * normal_pdf_deriv(x, a.location, sigma);
    }
  }

  // FFT round-off can leave values like -1e-17 in dead regions; these are far
  // below the noise floors used by the entropy integrals, so clamp them.
  for (double& v : out.values)
    if (v < 0.0 && v > -1e-12) v = 0.0;

  RegularizeDiagnostics local;
  std::size_t probes = std::min<std::size_t>(9, grid.n);
  for (std::size_t i = 0; i < probes; ++i) {
    std::size_t k = (grid.n - 1) * i / (probes > 1 ? probes - 1 : 1);
    double direct = detail::regularize_direct_at(m, sigma, grid.x(k), false);
    local.probe_max_diff = std::max(local.probe_max_diff,
                                    std::abs(direct - out.values[k]));
  }
  if (local.probe_max_diff > 1e-10)
    fail(ErrorCode::NumericalError,
         "regularize: FFT and direct quadrature disagree by " +
             std::to_string(local.probe_max_diff));
  if (dense_check) {
    for (std::size_t k = 0; k < grid.n; ++k) {
      double direct = detail::regularize_direct_at(m, sigma, grid.x(k), false);
      local.dense_max_diff = std::max(local.dense_max_diff,
                                      std::abs(direct - out.values[k]));
    }
    if (local.dense_max_diff > 1e-10)
      fail(ErrorCode::NumericalError, "regularize: dense path disagreement");
  }

  local.normalization_defect = std::abs(out.integral() - 1.0);
  if (local.normalization_defect > 1e-9)
    fail(ErrorCode::NumericalError, "regularize: normalization defect " +
                                        std::to_string(local.normalization_defect));
  if (diag) *diag = local;
  return normalize(out);
}

inline GridDensity regularize(const MixedDistribution& m, double sigma) {
  return regularize(m, sigma, grid_for_regularize(m, sigma));
}

// ---------------------------------------------------------------------------
// truncate: X* = X on {|X| <= N}, X* = 0 otherwise. The grid is cut at the
// sample points nearest +-N from inside; all removed mass (ac tails plus atoms
// outside the window) merges into a single atom at 0.
// ---------------------------------------------------------------------------
inline MixedDistribution truncate(const MixedDistribution& m, double N) {
  if (!(N > 0.0)) fail(ErrorCode::InvalidConfig, "truncate: N must be positive");
  MixedDistribution out;
  double moved = 0.0;
  if (m.ac && m.w_ac > 0.0) {
    const GridDensity& d = *m.ac;
    std::size_t first = 0, last = d.n() - 1;
    while (first < d.n() && d.x(first) < -N - 1e-12) ++first;
    while (last > first && d.x(last) > N + 1e-12) --last;
    if (last > first + 1) {
      GridDensity cut;
      cut.x0 = d.x(first);
      cut.h = d.h;
      cut.values.assign(d.values.begin() + first, d.values.begin() + last + 1);
      double kept = trapezoid(cut.values, cut.h) * m.w_ac;
      moved += m.w_ac - kept;
      if (kept > 0.0) {
        out.ac = normalize(cut);
        out.w_ac = kept;
      }
    } else {
      moved += m.w_ac;
    }
  }
  for (const Atom& a : m.atoms) {
    if (std::abs(a.location) <= N + 1e-12)
      out.atoms.push_back(a);
    else
      moved += a.mass;
  }
  if (moved > 0.0) {
    auto at_zero = std::find_if(out.atoms.begin(), out.atoms.end(),
                                [](const Atom& a) { return a.location == 0.0; });
    if (at_zero != out.atoms.end())
      at_zero->mass += moved;
    else
      out.atoms.push_back({0.0, moved});
  }
  return out;
}

// ---------------------------------------------------------------------------
// convolve / reflect on grid densities.
// ---------------------------------------------------------------------------
inline GridDensity convolve(const GridDensity& d1, const GridDensity& d2) {
  if (!steps_match(d1.h, d2.h))
    fail(ErrorCode::GridMismatch, "convolve: mismatched grid steps");
  GridDensity out;
  out.x0 = d1.x0 + d2.x0;
  out.h = d1.h;
  out.values = convolve_trapezoid(d1.values, d2.values, d1.h);
  // d(f*g)/dx = f' * g: propagate whichever factor has an exact derivative.
  if (d1.deriv)
    out.deriv = convolve_trapezoid(*d1.deriv, d2.values, d1.h);
  else if (d2.deriv)
    out.deriv = convolve_trapezoid(d1.values, *d2.deriv, d1.h);
  for (double& v : out.values)
    if (v < 0.0 && v > -1e-12) v = 0.0;
  return normalize(out);
}

inline GridDensity reflect(const GridDensity& d) { return affine(d, 0.0, -1.0); }

// ---------------------------------------------------------------------------
// Distances between laws.
// ---------------------------------------------------------------------------

// CDF of a mixed law at x (atoms counted when location <= x).
inline double cdf_at(const MixedDistribution& m, double x) {
  KahanSum s;
  if (m.ac && m.w_ac > 0.0) {
    const GridDensity& d = *m.ac;
    if (x >= d.x0) {
      std::size_t last = std::min<std::size_t>(
          d.n() - 1, static_cast<std::size_t>(std::floor((x - d.x0) / d.h)));
      for (std::size_t j = 1; j <= last; ++j)
        s.add(0.5 * d.h * (d.values[j - 1] + d.values[j]) * m.w_ac);
      if (last + 1 < d.n()) {  // partial cell up to x, linear interpolation
        double frac = (x - d.x(last)) / d.h;
        double pl = d.values[last];
        double pr = d.values[last + 1];
        double px = pl + frac * (pr - pl);
        s.add(0.5 * frac * d.h * (pl + px) * m.w_ac);
      }
    }
  }
  for (const Atom& a : m.atoms)
    if (a.location <= x) s.add(a.mass);
  return s.value();
}

// sup_x |F1(x) - F2(x)| over the merged grid/atom evaluation points, probing
// both sides of every atom.
inline double kolmogorov_distance(const MixedDistribution& m1,
                                  const MixedDistribution& m2) {
  std::vector<double> pts;
  auto collect = [&pts](const MixedDistribution& m) {
    if (m.ac)
      for (std::size_t j = 0; j < m.ac->n(); ++j) pts.push_back(m.ac->x(j));
    for (const Atom& a : m.atoms) {
      pts.push_back(a.location);
      pts.push_back(std::nextafter(a.location, -1e308));
    }
  };
  collect(m1);
  collect(m2);
  double sup = 0.0;
  for (double x : pts)
    sup = std::max(sup, std::abs(cdf_at(m1, x) - cdf_at(m2, x)));
  return sup;
}

// Total variation as the integral of |p - q| (the distribution-function TV;
// twice the measure-theoretic supremum gap).
inline double tv_distance(const GridDensity& d1, const GridDensity& d2) {
  if (!grids_match(d1, d2))
    fail(ErrorCode::GridMismatch, "tv_distance: densities must share a grid");
  std::vector<double> diff(d1.n());
  for (std::size_t j = 0; j < d1.n(); ++j)
    diff[j] = std::abs(d1.values[j] - d2.values[j]);
  return trapezoid(diff, d1.h);
}

// Finite normal mixture: the random-family generator's (and the JSON input
// schema's) closed-form law descriptor.
struct GaussianMixture {
  struct Component {
    double weight = 0.0;
    double mean = 0.0;
    double sd = 1.0;
  };
  std::vector<Component> components;

  double total_weight() const {
    double s = 0.0;
    for (const Component& c : components) s += c.weight;
    return s;
  }
  double mean() const {
    double s = 0.0;
    for (const Component& c : components) s += c.weight * c.mean;
    return s / total_weight();
  }
  double variance() const {
    double m = mean(), s = 0.0;
    for (const Component& c : components)
      s += c.weight * (c.sd * c.sd + c.mean * c.mean);
    return s / total_weight() - m * m;
  }
  double pdf(double x) const {
    double s = 0.0;
    for (const Component& c : components)
      s += c.weight * normal_pdf(x, c.mean, c.sd);
    return s / total_weight();
  }
  double pdf_deriv(double x) const {
    double s = 0.0;
    for (const Component& c : components)
      s += c.weight * normal_pdf_deriv(x, c.mean, c.sd);
    return s / total_weight();
  }
};

inline void validate_mixture(const GaussianMixture& gm) {
  if (gm.components.empty())
    fail(ErrorCode::InvalidConfig, "gaussian mixture: no components");
  double tot = 0.0;
  for (const auto& c : gm.components) {
    if (!(c.weight > 0.0) || !std::isfinite(c.weight) || !std::isfinite(c.mean) ||
        !(c.sd > 0.0) || !std::isfinite(c.sd))
      fail(ErrorCode::InvalidConfig, "gaussian mixture: bad component");
    tot += c.weight;
  }
  if (std::abs(tot - 1.0) > 1e-9)
    fail(ErrorCode::InvalidConfig, "gaussian mixture: weights must sum to 1");
}

// Samples the mixture (with its exact derivative) on a grid covering every
// component to n_sigmas standard deviations, phase-anchored at multiples of
// the step so that independently materialized laws share grid alignment.
inline MixedDistribution materialize(const GaussianMixture& gm, double step,
                                     double n_sigmas = 9.0) {
  validate_mixture(gm);
  if (!(step > 0.0)) fail(ErrorCode::InvalidConfig, "materialize: step <= 0");
  double lo = 1e308, hi = -1e308;
  for (const auto& c : gm.components) {
    lo = std::min(lo, c.mean - n_sigmas * c.sd);
    hi = std::max(hi, c.mean + n_sigmas * c.sd);
  }
  double x0 = std::floor(lo / step) * step;
  std::size_t n = static_cast<std::size_t>(std::ceil((hi - x0) / step)) + 1;
  GridDensity d;
  d.x0 = x0;
  d.h = step;
  d.values.resize(n);
  d.deriv = std::vector<double>(n);
  for (std::size_t j = 0; j < n; ++j) {
    double x = d.x(j);
    d.values[j] = gm.pdf(x);
    (*d.deriv)[j] = gm.pdf_deriv(x);
  }
  return MixedDistribution::from_density(d);
}

}  // namespace infodist
