// Saddle-point inversion: the tilt equation solver, the contour-shifted
// density representation for k in {0,1,2}, and agreement with direct FFT
// inversion. The uniform-law saddle pin comes from an independent
// bisection-only root finder on the closed-form cf.

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "infodist/char_fn.hpp"
#include "infodist/dist_core.hpp"
#include "infodist/saddlepoint.hpp"

using namespace infodist;

namespace {

MixedDistribution uniform_law(std::size_t n) {
  MixedDistribution u;
  u.w_ac = 1.0;
  GridDensity d;
  d.x0 = -1.0;
  d.h = 2.0 / static_cast<double>(n);
  d.values.assign(n + 1, 0.5);
  u.ac = d;
  return u;
}

GridDensity gaussian_grid(double mean, double sd, double h, double half) {
  GridDensity d;
  d.h = h;
  d.x0 = mean - half;
  std::size_t n = static_cast<std::size_t>(std::round(2.0 * half / h)) + 1;
  d.values.resize(n);
  for (std::size_t j = 0; j < n; ++j) d.values[j] = normal_pdf(d.x(j), mean, sd);
  return d;
}

// The three compact-support cross-validation laws.
MixedDistribution law_trunc_normal() {
  MixedDistribution g;
  g.w_ac = 1.0;
  g.ac = gaussian_grid(0.0, std::sqrt(0.5), 1.0 / 128, 8.0);
  return truncate(g, 4.0);
}

MixedDistribution law_two_atom() {
  MixedDistribution m;
  m.w_ac = 0.0;
  m.atoms = {{-1.0, 0.5}, {1.0, 0.5}};
  return m;
}

MixedDistribution law_mixed() {
  MixedDistribution m;
  m.w_ac = 0.7;
  GridDensity d;
  d.h = 1.0 / 128;
  d.x0 = -2.0;
  std::size_t n = static_cast<std::size_t>(std::round(4.0 / d.h)) + 1;
  d.values.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    double x = d.x(j);
    d.values[j] = 0.6 * normal_pdf(x, -0.8, 0.35) + 0.4 * normal_pdf(x, 0.9, 0.3);
  }
  m.ac = normalize(d);
  m.atoms = {{0.25, 0.3}};
  return m;
}

}  // namespace

TEST_CASE("Gaussian saddle: y(x) = -x/(1+sigma^2) closed form") {
  CharFn g = make_gaussian_cf(0.0, 1.0);
  SaddleSolution s = solve_saddle(g, 1.0, 2.0);
  CHECK(s.y == Catch::Approx(-1.0).margin(1e-12));
  CHECK(std::abs(s.residual) <= 1e-10 * 3.0);
  CHECK(s.tilted_variance + 1.0 > 0.0);

  SaddleSolution zero = solve_saddle(g, 0.7, 0.0);
  CHECK(zero.y == 0.0);
  CHECK(zero.residual == 0.0);
}

TEST_CASE("uniform saddle pin and O(h^2) convergence of the representation") {
  const double pin = -1.267318873172095;
  double prev_err = 0.0;
  for (std::size_t n : {std::size_t(1) << 14, std::size_t(1) << 16}) {
    CharFn cf = make_char_fn(uniform_law(n));
    double err = std::abs(solve_saddle(cf, 0.5, 0.7).y - pin);
    if (prev_err > 0.0) CHECK(err < prev_err / 8.0);  // ~h^2 => factor 16
    prev_err = err;
  }
  // fine grid reaches the oracle to 1e-12
  CharFn fine = make_char_fn(uniform_law(std::size_t(1) << 21));
  SaddleSolution s = solve_saddle(fine, 0.5, 0.7);
  CHECK(s.y == Catch::Approx(pin).margin(1e-12));
  CHECK(std::abs(s.residual) <= 1e-10 * 1.7);
}

TEST_CASE("tilt is strictly decreasing and sign-opposed to x") {
  CharFn cf = make_char_fn(law_two_atom());
  double prev = 1e308;
  for (double x = -2.5; x <= 2.5; x += 0.25) {
    double y = solve_saddle(cf, 0.8, x).y;
    CHECK(y < prev);
    if (x > 1e-12) CHECK(y < 0.0);
    if (x < -1e-12) CHECK(y > 0.0);
    prev = y;
  }
}

TEST_CASE("saddle exponent is concave along x") {
  CharFn cf = make_char_fn(law_trunc_normal());
  double sigma = 1.0;
  std::vector<double> E;
  for (double x = -3.0; x <= 3.0 + 1e-9; x += 0.125) {
    SaddleSolution s = solve_saddle(cf, sigma, x);
    LogEvalResult le = log_eval_imag(cf, s.y);
    E.push_back(s.y * x + 0.5 * sigma * sigma * s.y * s.y + le.log_f);
  }
  for (std::size_t j = 1; j + 1 < E.size(); ++j)
    CHECK(E[j + 1] - 2.0 * E[j] + E[j - 1] <= 1e-10);
}

TEST_CASE("Gaussian reconstruction at machine precision") {
  CharFn g = make_gaussian_cf(0.0, 1.0);
  InversionResult r = density_via_saddle(g, 1.0, 1.3, 0);
  double expect = normal_pdf(1.3, 0.0, std::sqrt(2.0));
  CHECK(std::abs(r.value - expect) / expect < 1e-9);
  CHECK(r.value >= -1e-12);

  // 6-sigma core sweep, relative 1e-9 (criterion-5 regime)
  double sd = std::sqrt(2.0);
  for (double x = -6.0 * sd; x <= 6.0 * sd + 1e-9; x += sd / 2.0) {
    InversionResult rr = density_via_saddle(g, 1.0, x, 0);
    double e = normal_pdf(x, 0.0, sd);
    CHECK(std::abs(rr.value - e) / e < 1e-9);
  }
}

TEST_CASE("k=1 vanishes at the center of a symmetric law") {
  CharFn cf = make_char_fn(law_two_atom());
  InversionResult r = density_via_saddle(cf, 1.0, 0.0, 1);
  CHECK(std::abs(r.value) < 1e-10);
}

TEST_CASE("saddle density equals FFT inversion on all three laws") {
  for (int which = 0; which < 3; ++which) {
    MixedDistribution law =
        which == 0 ? law_trunc_normal() : which == 1 ? law_two_atom() : law_mixed();
    CharFn cf = make_char_fn(law);
    auto [mean, var] = moments(law);
    for (double sigma : {0.3, 1.0}) {
      double sd = std::sqrt(var + sigma * sigma);
      GridSpec grid;
      grid.h = sigma / 8.0;
      grid.x0 = std::floor((mean - 8.0 * sd) / grid.h) * grid.h;
      grid.n = static_cast<std::size_t>(std::ceil(16.0 * sd / grid.h)) + 1;
      GridDensity fft = fft_invert(cf, sigma, grid);
      double peak = *std::max_element(fft.values.begin(), fft.values.end());
      std::vector<std::size_t> bulk;
      for (std::size_t j = 0; j < grid.n; ++j)
        if (fft.values[j] > 1e-6 * peak) bulk.push_back(j);
      REQUIRE(bulk.size() >= 11);
      std::size_t step = bulk.size() / 11;
      double worst = 0.0;
      for (std::size_t q = step / 2; q < bulk.size(); q += step) {
        std::size_t j = bulk[q];
        InversionResult r = density_via_saddle(cf, sigma, grid.x(j), 0);
        double rel = std::abs(r.value - fft.values[j]) /
                     std::max(std::abs(r.value), 1e-300);
        worst = std::max(worst, rel);
      }
      INFO("law " << which << " sigma " << sigma);
      CHECK(worst < 1e-7);
    }
  }
}

TEST_CASE("k=1 equals finite differences of k=0") {
  CharFn cf = make_char_fn(law_mixed());
  double sigma = 0.5, h = 1e-3;
  for (double x : {-0.9, 0.1, 0.8, 1.6}) {
    double p1 = density_via_saddle(cf, sigma, x, 1).value;
    auto p0 = [&](double xx) { return density_via_saddle(cf, sigma, xx, 0).value; };
    double fd_h = (p0(x + h) - p0(x - h)) / (2.0 * h);
    double fd_h2 = (p0(x + h / 2) - p0(x - h / 2)) / h;
    double fd = (4.0 * fd_h2 - fd_h) / 3.0;  // Richardson
    double scale = std::max(std::abs(fd), 1e-8);
    CHECK(std::abs(p1 - fd) / scale < 1e-6);
  }
}

TEST_CASE("k=2 equals second differences of k=0") {
  CharFn cf = make_char_fn(law_two_atom());
  double sigma = 1.0, h = 5e-3;
  for (double x : {-0.6, 0.4, 1.2}) {
    double p2 = density_via_saddle(cf, sigma, x, 2).value;
    auto p0 = [&](double xx) { return density_via_saddle(cf, sigma, xx, 0).value; };
    double sd_h = (p0(x + h) - 2.0 * p0(x) + p0(x - h)) / (h * h);
    double sd_h2 =
        (p0(x + h / 2) - 2.0 * p0(x) + p0(x - h / 2)) / (h * h / 4.0);
    double sd = (4.0 * sd_h2 - sd_h) / 3.0;
    CHECK(std::abs(p2 - sd) / std::max(std::abs(sd), 1e-6) < 1e-5);
  }
}

TEST_CASE("fft_invert closed-form cases") {
  // point mass -> the kernel itself
  MixedDistribution d0;
  d0.w_ac = 0.0;
  d0.atoms = {{0.0, 1.0}};
  GridSpec g1{-8.0, 1.0 / 8.0, 129};
  GridDensity f0 = fft_invert(make_char_fn(d0), 1.0, g1);
  double worst = 0.0;
  for (std::size_t j = 0; j < f0.n(); ++j)
    worst = std::max(worst, std::abs(f0.values[j] - normal_pdf(f0.x(j), 0.0, 1.0)));
  CHECK(worst < 1e-10);

  // two-atom, sigma = 0.5 -> closed-form mixture
  GridSpec g2{-5.5, 0.5 / 8.0, 177};
  GridDensity f2 = fft_invert(make_char_fn(law_two_atom()), 0.5, g2);
  worst = 0.0;
  for (std::size_t j = 0; j < f2.n(); ++j) {
    double x = f2.x(j);
    double truth = 0.5 * normal_pdf(x, -1.0, 0.5) + 0.5 * normal_pdf(x, 1.0, 0.5);
    worst = std::max(worst, std::abs(f2.values[j] - truth));
  }
  CHECK(worst < 1e-9);

  // Gaussian source: moments of the output recover (a, b^2 + sigma^2)
  GridSpec g3{-10.0, 1.0 / 8.0, 161};
  GridDensity f3 = fft_invert(make_gaussian_cf(0.25, 1.0), 1.0, g3);
  auto [m3, v3] = grid_moments(f3);
  CHECK(m3 == Catch::Approx(0.25).margin(1e-10));
  CHECK(v3 == Catch::Approx(2.0).margin(1e-9));
}

TEST_CASE("aliasing and domain guards") {
  // window far too narrow for the regularized two-atom law
  GridSpec tight{-1.5, 0.5 / 8.0, 49};
  CHECK_THROWS_AS(fft_invert(make_char_fn(law_two_atom()), 0.5, tight), Error);
  // sigma = 0 has no decay on the inversion contour
  CHECK_THROWS_AS(fft_invert(make_char_fn(law_two_atom()), 0.0, tight), Error);
  CHECK_THROWS_AS(solve_saddle(make_char_fn(law_two_atom()), 0.0, 0.5), Error);
}
