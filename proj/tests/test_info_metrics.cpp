// Information metrics: differential entropy, relative entropy to the matching
// normal (D), Fisher information and its standardized form (J_st), and the
// classical inequality reports. Pins frozen from an independent adaptive
// quadrature implementation.

#include <catch_amalgamated.hpp>

#include <cmath>

#include "infodist/dist_core.hpp"
#include "infodist/info_metrics.hpp"

using namespace infodist;

namespace {

GridDensity analytic_grid(double h, double half, double center,
                          double (*f)(double), double (*df)(double)) {
  GridDensity d;
  d.h = h;
  d.x0 = center - half;
  std::size_t n = static_cast<std::size_t>(std::round(2.0 * half / h)) + 1;
  d.values.resize(n);
  std::vector<double> dv(n);
  for (std::size_t j = 0; j < n; ++j) {
    d.values[j] = f(d.x(j));
    dv[j] = df(d.x(j));
  }
  d.deriv = std::move(dv);
  return normalize(d);
}

double g_pdf(double x) { return normal_pdf(x, 0.0, std::sqrt(1.5)); }
double g_dpdf(double x) { return normal_pdf_deriv(x, 0.0, std::sqrt(1.5)); }

double bimodal_pdf(double x) {
  return 0.5 * normal_pdf(x, -2.0, 1.0) + 0.5 * normal_pdf(x, 2.0, 1.0);
}
double bimodal_dpdf(double x) {
  return 0.5 * normal_pdf_deriv(x, -2.0, 1.0) + 0.5 * normal_pdf_deriv(x, 2.0, 1.0);
}

double smooth2_pdf(double x) {
  return 0.5 * normal_pdf(x, -1.0, 1.0) + 0.5 * normal_pdf(x, 1.0, 1.0);
}
double smooth2_dpdf(double x) {
  return 0.5 * normal_pdf_deriv(x, -1.0, 1.0) + 0.5 * normal_pdf_deriv(x, 1.0, 1.0);
}

}  // namespace

TEST_CASE("entropy of a normal law: closed form and entropy power") {
  GridDensity d = analytic_grid(0.005, 14.0, 0.0, g_pdf, g_dpdf);
  EntropyResult e = shannon_entropy(d);
  double expect = 0.5 * std::log(2.0 * M_PI * std::exp(1.0) * 1.5);
  CHECK(e.h == Catch::Approx(expect).margin(1e-10));
  CHECK(e.h == Catch::Approx(1.4189385332 + 0.5 * std::log(1.5)).margin(1e-9));
  CHECK(e.entropy_power == Catch::Approx(std::exp(2.0 * expect)).margin(1e-8));
}

TEST_CASE("D and J_st vanish exactly on Gaussians") {
  GridDensity d = analytic_grid(0.005, 14.0, 0.0, g_pdf, g_dpdf);
  DistanceResult r = compute_distances(d);
  CHECK(std::abs(r.D) < 1e-12);
  CHECK(std::abs(r.J_st) < 1e-10);
  CHECK(r.matching_normal.a == Catch::Approx(0.0).margin(1e-12));
  CHECK(r.matching_normal.b == Catch::Approx(std::sqrt(1.5)).margin(1e-10));
  // internal ordering D <= J_st/2 is certified by construction
  CHECK(r.D <= 0.5 * r.J_st + 1e-8);
}

TEST_CASE("D of the uniform law is (1/2) ln(pi e / 6)") {
  GridDensity u;
  u.h = 1.0 / 2048;
  u.x0 = 0.0;
  u.values.assign(2049, 1.0);
  u = normalize(u);
  DistanceResult r = relative_entropy_to_normal(u);
  CHECK(r.D == Catch::Approx(0.1764852083).margin(2e-4));  // trapezoid edge bias
}

TEST_CASE("D of the bimodal mixture matches the quadrature pin") {
  GridDensity d = analytic_grid(0.005, 16.0, 0.0, bimodal_pdf, bimodal_dpdf);
  DistanceResult r = relative_entropy_to_normal(d);
  CHECK(r.D == Catch::Approx(0.171998762480).margin(1e-9));
  // both internal routes agreed (the call would have thrown otherwise)
  CHECK(r.D_path_kl == Catch::Approx(r.D_path_gap).margin(1e-8));
}

TEST_CASE("J_st pins for the regularized two-atom law") {
  // law of (+-1 coin) + N(0,1): p = (phi(x+1)+phi(x-1))/2, variance 2
  GridDensity d = analytic_grid(0.005, 14.0, 0.0, smooth2_pdf, smooth2_dpdf);
  DistanceResult j = standardized_fisher(d);
  CHECK(j.J_st == Catch::Approx(0.100800981587).margin(1e-9));
  FisherResult fi = fisher_information(d);
  CHECK(fi.value == Catch::Approx(0.550400490793).margin(1e-9));
  CHECK(fi.cramer_rao_slack >= -1e-10);  // I >= 1/Var
  DistanceResult r = relative_entropy_to_normal(d);
  CHECK(r.D == Catch::Approx(0.009742769933).margin(1e-9));
  CHECK(0.5 * j.J_st - r.D == Catch::Approx(4.066e-2).margin(1e-4));
}

TEST_CASE("finite-difference fallback agrees with the exact derivative") {
  GridDensity with = analytic_grid(0.005, 14.0, 0.0, smooth2_pdf, smooth2_dpdf);
  GridDensity without = with;
  without.deriv.reset();
  double exact = fisher_information(with).value;
  double fd = fisher_information(without).value;
  CHECK(fd == Catch::Approx(exact).epsilon(1e-9));
}

TEST_CASE("interior zeros and boundary jumps are rejected for Fisher") {
  GridDensity gap;
  gap.h = 0.01;
  gap.x0 = -2.0;
  gap.values.assign(401, 0.0);
  for (std::size_t j = 0; j < 80; ++j) gap.values[j] = 1.0;
  for (std::size_t j = 321; j < 401; ++j) gap.values[j] = 1.0;
  gap = normalize(gap);
  CHECK_THROWS_AS(fisher_information(gap), Error);

  GridDensity u;  // uniform: boundary jump, no derivative companion
  u.h = 0.001;
  u.x0 = 0.0;
  u.values.assign(1001, 1.0);
  u = normalize(u);
  CHECK_THROWS_AS(fisher_information(u), Error);

  GridDensity d = analytic_grid(0.01, 12.0, 0.0, g_pdf, g_dpdf);
  std::vector<double> short_deriv(3, 0.0);
  CHECK_THROWS_AS(fisher_information(d, 0.0, short_deriv), Error);
}

TEST_CASE("inequality reports: EPI, Stam, Pinsker on a smooth pair") {
  GridDensity dx = analytic_grid(0.005, 14.0, 0.0, smooth2_pdf, smooth2_dpdf);
  GridDensity dy = analytic_grid(0.005, 14.0, 0.0, g_pdf, g_dpdf);
  InequalityReport epi = check_epi(dx, dy);
  CHECK(epi.pass);
  CHECK(epi.slack >= -1e-7);
  InequalityReport stam = check_stam(dx, dy);
  CHECK(stam.pass);
  InequalityReport pinsker = check_pinsker(
      dx, analytic_grid(0.005, 14.0, 0.0, g_pdf, g_dpdf));
  CHECK(pinsker.pass);
}

TEST_CASE("variance-weighted convexity bounds for D and J_st") {
  GridDensity dx = analytic_grid(0.005, 14.0, 0.0, smooth2_pdf, smooth2_dpdf);
  GridDensity dy = analytic_grid(0.005, 14.0, 0.0, bimodal_pdf, bimodal_dpdf);
  UpperBoundReport ub = check_upper_bounds(dx, dy);
  CHECK(ub.d_bound.pass);
  CHECK(ub.j_bound.pass);
  CHECK(ub.d_bound.slack >= -1e-7);
  CHECK(ub.j_bound.slack >= -1e-7);
}

TEST_CASE("regularized-entropy upper bound, both constants") {
  GridDensity d = analytic_grid(0.005, 14.0, 0.0, smooth2_pdf, smooth2_dpdf);
  RegularizedEntropyBound b = check_regularized_entropy_bound(d, 1.0);
  // D <= (1/2) log(2e Var / s^2), and the sharper e-variant
  CHECK(b.bound_2e.pass);
  CHECK(b.bound_e.pass);
  CHECK(b.bound_2e.rhs == Catch::Approx(0.5 * std::log(2.0 * std::exp(1.0) * 2.0))
                              .margin(1e-9));
}

TEST_CASE("metrics reject unnormalized input") {
  GridDensity d = analytic_grid(0.01, 12.0, 0.0, g_pdf, g_dpdf);
  for (double& v : d.values) v *= 1.5;
  CHECK_THROWS_AS(shannon_entropy(d), Error);
  CHECK_THROWS_AS(relative_entropy_to_normal(d), Error);
  CHECK_THROWS_AS(fisher_information(d), Error);
}
