// infodist — command-line front end.
//
// Subcommands:
//   distances       D, J_st, h, N for one input law at each --sigma
//   pair            full stability report for two input laws
//   suite           seeded random Gaussian-mixture property suite
//   counterexample  cubic-tilt family: T^2 D sweep, difference decay, certificate
//   sandwich        CF product vs Gaussian ratio band for two truncated laws
//   invert          saddle-point vs FFT density comparison table
//
// Exit codes: 0 success, 2 assertion failure, 1 usage/config error.

#include <cinttypes>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "infodist/char_fn.hpp"
#include "infodist/cramer_counterexample.hpp"
#include "infodist/info_metrics.hpp"
#include "infodist/json_io.hpp"
#include "infodist/saddlepoint.hpp"
#include "infodist/stability_harness.hpp"

namespace {

using infodist::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitAssert = 2;

struct Output {
  std::string path;    // empty: report to stdout
  std::string format;  // "json" or "csv"
};

void emit(const Output& out, const std::string& text) {
  if (out.path.empty())
    std::cout << text;
  else
    infodist::write_text_file(out.path, text);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Materializes a mixture recipe at the sigma-appropriate step; explicit laws
// pass through.
infodist::MixedDistribution realize(const infodist::ParsedInput& in,
                                    double sigma) {
  if (in.law) return *in.law;
  const infodist::GaussianMixture& gm = *in.mixture;
  double b = std::sqrt(gm.variance());
  return infodist::materialize(gm, std::min(sigma / 8.0, b / 100.0));
}

// Pair-level commands materialize both mixture recipes at one common step so
// the two regularized grids stay commensurable.
std::pair<infodist::MixedDistribution, infodist::MixedDistribution> realize_pair(
    const infodist::ParsedInput& ax, const infodist::ParsedInput& ay,
    double sigma) {
  double step = sigma / 8.0;
  for (const infodist::ParsedInput* p : {&ax, &ay})
    if (p->mixture)
      step = std::min(step, std::sqrt(p->mixture->variance()) / 100.0);
  auto mk = [&](const infodist::ParsedInput& in) {
    return in.law ? *in.law : infodist::materialize(*in.mixture, step);
  };
  return {mk(ax), mk(ay)};
}

double relative_floor(const infodist::GridDensity& g) {
  return 1e-12 * *std::max_element(g.values.begin(), g.values.end());
}

std::vector<double> parse_list(const std::string& csv, const char* what) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw CLI::ValidationError(std::string(what) + ": bad number '" + tok + "'");
    }
  }
  if (out.empty()) throw CLI::ValidationError(std::string(what) + ": empty list");
  return out;
}

int cmd_distances(const std::string& input, const std::string& sigmas_csv,
                  const Output& out) {
  std::vector<double> sigmas = parse_list(sigmas_csv, "--sigma");
  for (double s : sigmas)
    if (!(s > 0.0 && s <= 2.0))
      throw CLI::ValidationError("--sigma: values must lie in (0, 2]");
  infodist::ParsedInput in = infodist::load_distribution(input);
  json rows = json::array();
  std::string csv = "sigma,D,Jst,h,entropy_power\n";
  double last_D = 0.0, last_J = 0.0;
  for (double s : sigmas) {
    infodist::MixedDistribution law = realize(in, s);
    infodist::GridDensity g = infodist::regularize(law, s);
    double floor = relative_floor(g);
    infodist::DistanceResult r = infodist::compute_distances(g, floor);
    infodist::EntropyResult e = infodist::shannon_entropy(g);
    rows.push_back(json{{"sigma", s},
                        {"D", r.D},
                        {"Jst", r.J_st},
                        {"h", e.h},
                        {"entropy_power", e.entropy_power},
                        {"matching_normal",
                         json{{"a", r.matching_normal.a}, {"b", r.matching_normal.b}}}});
    csv += fmt(s) + "," + fmt(r.D) + "," + fmt(r.J_st) + "," + fmt(e.h) + "," +
           fmt(e.entropy_power) + "\n";
    last_D = r.D;
    last_J = r.J_st;
  }
  json rep = json{{"input", input}, {"rows", std::move(rows)}};
  emit(out, out.format == "csv" ? csv : infodist::dump_report(rep));
  std::printf("distances: %zu sigma value(s), last D=%.6g Jst=%.6g\n",
              sigmas.size(), last_D, last_J);
  return kExitOk;
}

int cmd_pair(const std::vector<std::string>& inputs, double sigma,
             double epsilon, const Output& out) {
  if (inputs.size() != 2)
    throw CLI::ValidationError("pair: exactly two --input files required");
  infodist::ParsedInput ax = infodist::load_distribution(inputs[0]);
  infodist::ParsedInput ay = infodist::load_distribution(inputs[1]);
  auto [lx, ly] = realize_pair(ax, ay, sigma);
  infodist::StabilityReport rep = infodist::run_pair(lx, ly, sigma, epsilon);
  rep.input_X = inputs[0];
  rep.input_Y = inputs[1];
  bool ok = rep.valid;
  for (const infodist::InequalityReport* q : infodist::always_true_set(rep))
    ok = ok && q->pass;
  json j = infodist::to_json(rep);
  if (out.format == "csv") {
    std::string csv =
        "name,lhs,rhs,slack,pass\n";
    for (const infodist::InequalityReport* q : infodist::always_true_set(rep))
      csv += csv_escape(q->name) + "," + fmt(q->lhs) + "," + fmt(q->rhs) + "," +
             fmt(q->slack) + "," + (q->pass ? "1" : "0") + "\n";
    emit(out, csv);
  } else {
    emit(out, infodist::dump_report(j));
  }
  std::printf("pair: valid=%d all_bounds_pass=%d D_sum=%.6g Jst_sum=%.6g\n",
              rep.valid ? 1 : 0, ok ? 1 : 0, rep.dist.D_sum, rep.dist.Jst_sum);
  return ok ? kExitOk : kExitAssert;
}

int cmd_suite(std::uint64_t seed, int cases, int jobs, const Output& out) {
  infodist::SuiteReport s = infodist::random_family_suite(seed, cases, jobs);
  if (out.format == "csv") {
    std::string csv = "index,sigma,valid,pass,min_slack,worst\n";
    for (const auto& c : s.results)
      csv += std::to_string(c.index) + "," + fmt(c.sigma) + "," +
             (c.report.valid ? "1" : "0") + "," + (c.pass ? "1" : "0") + "," +
             fmt(c.min_slack) + "," + csv_escape(c.worst_name) + "\n";
    emit(out, csv);
  } else {
    emit(out, infodist::dump_report(infodist::to_json(s)));
  }
  std::printf("suite: seed=%" PRIu64 " passed=%d/%d min_slack=%.6g (%s)\n",
              s.seed, s.passed, s.cases, s.min_slack,
              s.min_slack_name.c_str());
  return s.all_pass ? kExitOk : kExitAssert;
}

int cmd_counterexample(const std::string& Ts_csv, const std::string& sigmas_csv,
                       const Output& out) {
  std::vector<double> Ts = parse_list(Ts_csv, "--T");
  std::vector<double> sigmas = parse_list(sigmas_csv, "--sigma");
  for (double T : Ts)
    if (!(T >= 20.0)) throw CLI::ValidationError("--T: values must be >= 20");
  for (double s : sigmas)
    if (!(s > 0.0 && s <= 2.0))
      throw CLI::ValidationError("--sigma: values must lie in (0, 2]");
  json reports = json::array();
  std::string csv = "sigma,T,D,T2_D,Jst,T2_Jst,D_diff,Jst_diff\n";
  bool pass = true;
  double last_scaled = 0.0, last_target = 0.0;
  for (double s : sigmas) {
    infodist::AsymptoticsReport sweep = infodist::lemma_11_2_sweep(s, Ts);
    infodist::AsymptoticsReport diff = infodist::lemma_11_3_check(s, Ts);
    infodist::CertificateReport cert =
        infodist::theorem_1_3_certificate(s, Ts.back());
    pass = pass && cert.pass;
    for (std::size_t i = 0; i < Ts.size(); ++i)
      csv += fmt(s) + "," + fmt(Ts[i]) + "," + fmt(sweep.D[i]) + "," +
             fmt(sweep.scaled_D[i]) + "," + fmt(sweep.J[i]) + "," +
             fmt(sweep.scaled_J[i]) + "," + fmt(diff.D_diff[i]) + "," +
             fmt(diff.J_diff[i]) + "\n";
    reports.push_back(json{{"sigma", s},
                           {"sweep", infodist::to_json(sweep)},
                           {"difference_decay", infodist::to_json(diff)},
                           {"certificate", infodist::to_json(cert)}});
    last_scaled = sweep.scaled_D.back();
    last_target = sweep.target;
  }
  emit(out, out.format == "csv" ? csv
                                : infodist::dump_report(json{{"reports", reports}}));
  std::printf(
      "counterexample: last T2*D=%.6g (limit %.6g), certificate pass=%d\n",
      last_scaled, last_target, pass ? 1 : 0);
  return pass ? kExitOk : kExitAssert;
}

int cmd_sandwich(const std::vector<std::string>& inputs, double sigma,
                 double epsilon, std::size_t n_samples, const Output& out) {
  if (inputs.size() != 2)
    throw CLI::ValidationError("sandwich: exactly two --input files required");
  infodist::ParsedInput ax = infodist::load_distribution(inputs[0]);
  infodist::ParsedInput ay = infodist::load_distribution(inputs[1]);
  infodist::TruncationParams tp = infodist::TruncationParams::make(epsilon, sigma);
  auto [lx, ly] = realize_pair(ax, ay, sigma);
  infodist::CharFn cfx = infodist::make_char_fn(infodist::truncate(lx, tp.N));
  infodist::CharFn cfy = infodist::make_char_fn(infodist::truncate(ly, tp.N));
  infodist::SandwichReport rep =
      infodist::sandwich_check(cfx, cfy, tp.T, n_samples);
  if (out.format == "csv") {
    std::string csv = "radius,min_ratio,max_ratio\n";
    for (std::size_t i = 0; i < rep.radii.size(); ++i)
      csv += fmt(rep.radii[i]) + "," + fmt(rep.min_by_circle[i]) + "," +
             fmt(rep.max_by_circle[i]) + "\n";
    emit(out, csv);
  } else {
    json j = infodist::to_json(rep);
    j["N"] = tp.N;
    emit(out, infodist::dump_report(j));
  }
  std::printf("sandwich: T=%.6g ratio range [%.6g, %.6g] within_band=%d\n",
              rep.T, rep.min_ratio, rep.max_ratio, rep.within_band ? 1 : 0);
  return rep.within_band ? kExitOk : kExitAssert;
}

int cmd_invert(const std::string& input, const std::string& sigmas_csv,
               int points, const Output& out) {
  std::vector<double> sigmas = parse_list(sigmas_csv, "--sigma");
  for (double s : sigmas)
    if (!(s > 0.0 && s <= 2.0))
      throw CLI::ValidationError("--sigma: values must lie in (0, 2]");
  if (points < 2) throw CLI::ValidationError("--points: need at least 2");
  infodist::ParsedInput in = infodist::load_distribution(input);
  json rows = json::array();
  std::string csv = "sigma,x,saddle,fft,rel_diff\n";
  double worst = 0.0;
  for (double s : sigmas) {
    infodist::MixedDistribution law = realize(in, s);
    infodist::CharFn cf = infodist::make_char_fn(law);
    auto [mean, var] = infodist::moments(law);
    double sd = std::sqrt(var + s * s);
    // Invert on a wide window (the aliasing detector needs negligible mass at
    // the boundary) but tabulate only the +-3 sd core, at the FFT grid's own
    // nodes so the comparison is exact.
    infodist::GridSpec grid;
    grid.h = s / 8.0;
    grid.x0 = std::floor((mean - 8.5 * sd) / grid.h) * grid.h;
    grid.n = static_cast<std::size_t>(std::ceil(17.0 * sd / grid.h)) + 1;
    infodist::GridDensity fft = infodist::fft_invert(cf, s, grid);
    std::size_t j0 = static_cast<std::size_t>(
        std::max(0.0, std::ceil((mean - 3.0 * sd - grid.x0) / grid.h)));
    std::size_t j1 = std::min(
        grid.n - 1, static_cast<std::size_t>(std::max(
                        0.0, std::floor((mean + 3.0 * sd - grid.x0) / grid.h))));
    std::size_t stride =
        std::max<std::size_t>(1, (j1 - j0) / static_cast<std::size_t>(points));
    for (std::size_t j = j0; j <= j1 && rows.size() < 4096; j += stride) {
      double x = grid.x(j);
      double sp = infodist::density_via_saddle(cf, s, x, 0).value;
      double ff = fft.values[j];
      double rel = std::abs(sp - ff) / std::max(std::abs(sp), 1e-300);
      worst = std::max(worst, rel);
      rows.push_back(json{{"sigma", s},
                          {"x", x},
                          {"saddle", sp},
                          {"fft", ff},
                          {"rel_diff", rel}});
      csv += fmt(s) + "," + fmt(x) + "," + fmt(sp) + "," + fmt(ff) + "," +
             fmt(rel) + "\n";
    }
  }
  json rep = json{{"input", input}, {"max_rel_diff", worst}, {"rows", rows}};
  emit(out, out.format == "csv" ? csv : infodist::dump_report(rep));
  std::printf("invert: max_rel_diff=%.6g over %zu points\n", worst,
              rows.size());
  return worst <= 1e-7 ? kExitOk : kExitAssert;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "infodist: information distances to normality, saddle-point/FFT "
      "inversion, and stability experiments"};
  app.require_subcommand(1);

  Output out;
  std::string sigmas = "1";
  std::string Ts = "40,80";
  std::vector<std::string> inputs;
  double epsilon = 0.0;
  std::uint64_t seed = 42;
  int cases = 100, jobs = 1, points = 11;
  std::size_t n_samples = 64;

  auto add_output = [&](CLI::App* c) {
    c->add_option("--out", out.path, "write the report to this path (default stdout)");
    c->add_option("--format", out.format, "report format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->default_val("json");
    c->add_option("--jobs", jobs, "worker threads for sweeps (default 1)")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* c_dist = app.add_subcommand(
      "distances", "relative entropy D, standardized Fisher J_st, entropy h, "
                   "entropy power for one law");
  c_dist->add_option("--input", inputs, "distribution JSON file")->required();
  c_dist->add_option("--sigma", sigmas,
                     "comma-separated regularization levels in (0,2]");
  add_output(c_dist);

  CLI::App* c_pair = app.add_subcommand(
      "pair", "stability report for a pair (CSV columns: name,lhs,rhs,slack,pass)");
  c_pair->add_option("--input", inputs, "two distribution JSON files")->required();
  c_pair->add_option("--sigma", sigmas, "regularization level");
  c_pair->add_option("--epsilon", epsilon,
                     "closeness parameter (default: self-consistent)");
  add_output(c_pair);

  CLI::App* c_suite = app.add_subcommand(
      "suite", "random mixture property suite (CSV columns: "
               "index,sigma,valid,pass,min_slack,worst)");
  c_suite->add_option("--seed", seed, "RNG seed");
  c_suite->add_option("--cases", cases, "number of cases")->check(CLI::PositiveNumber);
  add_output(c_suite);

  CLI::App* c_cex = app.add_subcommand(
      "counterexample", "cubic-tilt family sweep (CSV columns: "
                        "sigma,T,D,T2_D,Jst,T2_Jst,D_diff,Jst_diff)");
  c_cex->add_option("--T", Ts, "comma-separated frequency scales, each >= 20");
  c_cex->add_option("--sigma", sigmas, "comma-separated noise levels in (0,2]");
  add_output(c_cex);

  CLI::App* c_sand = app.add_subcommand(
      "sandwich", "CF-product ratio band on four circles (CSV columns: "
                  "radius,min_ratio,max_ratio)");
  c_sand->add_option("--input", inputs, "two distribution JSON files")->required();
  c_sand->add_option("--sigma", sigmas, "regularization level");
  c_sand->add_option("--epsilon", epsilon, "closeness parameter")->required();
  c_sand->add_option("--n-samples", n_samples, "angles per circle (>= 64)");
  add_output(c_sand);

  CLI::App* c_inv = app.add_subcommand(
      "invert", "saddle-point vs FFT density table (CSV columns: "
                "sigma,x,saddle,fft,rel_diff)");
  c_inv->add_option("--input", inputs, "distribution JSON file")->required();
  c_inv->add_option("--sigma", sigmas, "comma-separated noise levels in (0,2]");
  c_inv->add_option("--points", points, "approximate table rows per sigma");
  add_output(c_inv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Collapse CLI11's fine-grained exit codes onto the documented contract:
    // help is success, every other parse problem is a usage error.
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    double sigma_single = 1.0;
    if (c_pair->parsed() || c_sand->parsed()) {
      std::vector<double> list = parse_list(sigmas, "--sigma");
      if (list.size() != 1)
        throw CLI::ValidationError("--sigma: exactly one value for this subcommand");
      sigma_single = list[0];
      if (!(sigma_single > 0.0 && sigma_single <= 2.0))
        throw CLI::ValidationError("--sigma: values must lie in (0, 2]");
    }
    if (c_dist->parsed()) {
      if (inputs.size() != 1)
        throw CLI::ValidationError("distances: exactly one --input file");
      return cmd_distances(inputs[0], sigmas, out);
    }
    if (c_pair->parsed()) return cmd_pair(inputs, sigma_single, epsilon, out);
    if (c_suite->parsed()) return cmd_suite(seed, cases, jobs, out);
    if (c_cex->parsed()) return cmd_counterexample(Ts, sigmas, out);
    if (c_sand->parsed())
      return cmd_sandwich(inputs, sigma_single, epsilon, n_samples, out);
    if (c_inv->parsed()) {
      if (inputs.size() != 1)
        throw CLI::ValidationError("invert: exactly one --input file");
      return cmd_invert(inputs[0], sigmas, points, out);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const infodist::Error& e) {
    if (e.code() == infodist::ErrorCode::InvalidConfig) {
      std::cerr << "config error: " << e.what() << "\n";
      return kExitUsage;
    }
    std::cerr << "computation failed: " << e.what() << "\n";
    return kExitAssert;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAssert;
  }
  return kExitUsage;
}
