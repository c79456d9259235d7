#pragma once

// JSON input/output: the distribution schema
//   {"kind":"grid","x0":..,"h":..,"values":[..]}
//   {"kind":"atoms","atoms":[[loc,mass],..]}
//   {"kind":"mixed","w_ac":..,"ac":{..grid..},"atoms":[[loc,mass],..]}
//   {"kind":"gauss_mixture","components":[[weight,mean,sd],..]}
// and serializers for every report type. All doubles go through the library's
// shortest round-trip formatting, and object keys keep insertion order, so a
// fixed computation serializes byte-identically.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "infodist/common.hpp"
#include "infodist/cramer_counterexample.hpp"
#include "infodist/dist_core.hpp"
#include "infodist/grid.hpp"
#include "infodist/info_metrics.hpp"
#include "infodist/stability_harness.hpp"

namespace infodist {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Distribution schema
// ---------------------------------------------------------------------------

// Either an explicit law or a Gaussian-mixture recipe (which only becomes a
// grid once a sampling step is chosen, typically sigma-dependent).
struct ParsedInput {
  std::optional<MixedDistribution> law;
  std::optional<GaussianMixture> mixture;
  std::string kind;
};

namespace detail {

inline double want_number(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number())
    fail(ErrorCode::InvalidConfig,
         std::string("distribution JSON: missing numeric field '") + key + "'");
  return j[key].get<double>();
}

inline GridDensity parse_grid_body(const json& j) {
  GridDensity d;
  d.x0 = want_number(j, "x0");
  d.h = want_number(j, "h");
  if (!j.contains("values") || !j["values"].is_array())
    fail(ErrorCode::InvalidConfig, "distribution JSON: 'values' array required");
  for (const auto& v : j["values"]) {
    if (!v.is_number())
      fail(ErrorCode::InvalidConfig, "distribution JSON: non-numeric value");
    d.values.push_back(v.get<double>());
  }
  return d;
}

inline std::vector<Atom> parse_atoms_body(const json& arr) {
  std::vector<Atom> atoms;
  for (const auto& a : arr) {
    if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
      fail(ErrorCode::InvalidConfig,
           "distribution JSON: atoms must be [location, mass] pairs");
    atoms.push_back({a[0].get<double>(), a[1].get<double>()});
  }
  return atoms;
}

}  // namespace detail

inline ParsedInput parse_distribution(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    fail(ErrorCode::InvalidConfig, "distribution JSON: object with 'kind' required");
  ParsedInput in;
  in.kind = j["kind"].get<std::string>();
  if (in.kind == "grid") {
    MixedDistribution m;
    m.w_ac = 1.0;
    m.ac = detail::parse_grid_body(j);
    validate_mixed(m);
    in.law = std::move(m);
  } else if (in.kind == "atoms") {
    if (!j.contains("atoms") || !j["atoms"].is_array())
      fail(ErrorCode::InvalidConfig, "distribution JSON: 'atoms' array required");
    MixedDistribution m;
    m.w_ac = 0.0;
    m.atoms = detail::parse_atoms_body(j["atoms"]);
    validate_mixed(m);
    in.law = std::move(m);
  } else if (in.kind == "mixed") {
    MixedDistribution m;
    m.w_ac = detail::want_number(j, "w_ac");
    if (j.contains("ac") && !j["ac"].is_null())
      m.ac = detail::parse_grid_body(j["ac"]);
    if (j.contains("atoms")) m.atoms = detail::parse_atoms_body(j["atoms"]);
    validate_mixed(m);
    in.law = std::move(m);
  } else if (in.kind == "gauss_mixture") {
    if (!j.contains("components") || !j["components"].is_array())
      fail(ErrorCode::InvalidConfig, "distribution JSON: 'components' required");
    GaussianMixture gm;
    for (const auto& c : j["components"]) {
      if (!c.is_array() || c.size() != 3)
        fail(ErrorCode::InvalidConfig,
             "distribution JSON: components are [weight, mean, sd] triples");
      gm.components.push_back(
          {c[0].get<double>(), c[1].get<double>(), c[2].get<double>()});
    }
    validate_mixture(gm);
    in.mixture = std::move(gm);
  } else {
    fail(ErrorCode::InvalidConfig, "distribution JSON: unknown kind '" + in.kind + "'");
  }
  return in;
}

inline ParsedInput load_distribution(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::InvalidConfig, "cannot open input file: " + path);
  json j;
  try {
    f >> j;
  } catch (const json::parse_error& e) {
    fail(ErrorCode::InvalidConfig, std::string("JSON parse error: ") + e.what());
  }
  return parse_distribution(j);
}

inline json to_json(const GridDensity& d) {
  json j;
  j["kind"] = "grid";
  j["x0"] = d.x0;
  j["h"] = d.h;
  j["values"] = d.values;
  return j;
}

inline json to_json(const MixedDistribution& m) {
  bool pure_grid = m.ac && m.atoms.empty() && m.w_ac == 1.0;
  bool pure_atoms = !m.ac || m.w_ac == 0.0;
  if (pure_grid) return to_json(*m.ac);
  json j;
  if (pure_atoms) {
    j["kind"] = "atoms";
  } else {
    j["kind"] = "mixed";
    j["w_ac"] = m.w_ac;
    j["ac"] = json{{"x0", m.ac->x0}, {"h", m.ac->h}, {"values", m.ac->values}};
  }
  json atoms = json::array();
  for (const Atom& a : m.atoms) atoms.push_back({a.location, a.mass});
  j["atoms"] = std::move(atoms);
  return j;
}

inline json to_json(const GaussianMixture& gm) {
  json comps = json::array();
  for (const auto& c : gm.components) comps.push_back({c.weight, c.mean, c.sd});
  return json{{"kind", "gauss_mixture"}, {"components", std::move(comps)}};
}

// ---------------------------------------------------------------------------
// Report serializers
// ---------------------------------------------------------------------------

inline json to_json(const InequalityReport& r) {
  return json{{"name", r.name}, {"lhs", r.lhs},   {"rhs", r.rhs},
              {"slack", r.slack}, {"pass", r.pass}};
}

inline json to_json(const SandwichReport& r) {
  json circles = json::array();
  for (std::size_t i = 0; i < r.radii.size(); ++i)
    circles.push_back(json{{"radius", r.radii[i]},
                           {"min_ratio", r.min_by_circle[i]},
                           {"max_ratio", r.max_by_circle[i]}});
  return json{{"T", r.T},
              {"n_samples", r.n_samples},
              {"min_ratio", r.min_ratio},
              {"max_ratio", r.max_ratio},
              {"within_band", r.within_band},
              {"circles", std::move(circles)}};
}

inline json to_json(const FittedConstant& c) {
  return json{{"value", c.value}, {"vacuous", c.vacuous}};
}

inline json to_json(const TailComparison& t) {
  return json{{"law", t.law},
              {"M", t.M},
              {"tail_raw", t.tail_raw},
              {"tail_reg", t.tail_reg},
              {"gauss_term", t.gauss_term},
              {"slack_first", t.slack_first},
              {"slack_second", t.slack_second},
              {"pass", t.pass}};
}

inline json to_json(const StabilityReport& r) {
  json j;
  j["inputs"] = json{{"X", r.input_X}, {"Y", r.input_Y}};
  j["sigma"] = r.sigma;
  j["epsilon"] = r.epsilon;
  j["scale"] = r.scale;
  j["shift"] = json{{"X", r.shift_X}, {"Y", r.shift_Y}};
  j["distances"] = json{{"D_X", r.dist.D_X},     {"D_Y", r.dist.D_Y},
                        {"D_sum", r.dist.D_sum}, {"Jst_X", r.dist.Jst_X},
                        {"Jst_Y", r.dist.Jst_Y}, {"Jst_sum", r.dist.Jst_sum}};
  j["hyp_2_1"] = r.hyp_2_1;
  json bounds = json::array();
  for (const InequalityReport* q :
       {&r.epi, &r.stam, &r.pinsker, &r.eq_1_1, &r.eq_1_6, &r.eq_1_5_X,
        &r.eq_1_5_Y, &r.eq_1_5_sum, &r.entropy_bound_X, &r.entropy_bound_Y})
    bounds.push_back(to_json(*q));
  j["bounds"] = std::move(bounds);
  json tails = json::array();
  for (const TailComparison& t : r.tails) tails.push_back(to_json(t));
  j["tails"] = std::move(tails);
  j["sandwich_checked"] = r.sandwich_checked;
  if (r.sandwich_checked) j["sandwich"] = to_json(r.sandwich);
  j["thm_1_1_fitted_c"] = to_json(r.thm_1_1_c);
  j["thm_1_2_fitted_c"] = to_json(r.thm_1_2_c);
  j["noise_monotonicity_gap"] = r.noise_monotonicity_gap;
  j["valid"] = r.valid;
  j["notes"] = r.notes;
  return j;
}

inline json to_json(const SuiteCaseResult& c) {
  json j;
  j["index"] = c.index;
  j["sigma"] = c.sigma;
  j["mixture_X"] = to_json(c.mixture_X);
  j["mixture_Y"] = to_json(c.mixture_Y);
  j["report"] = to_json(c.report);
  j["min_slack"] = c.min_slack;
  j["worst"] = c.worst_name;
  j["pass"] = c.pass;
  return j;
}

inline json to_json(const SuiteReport& s) {
  json cases = json::array();
  for (const SuiteCaseResult& c : s.results) cases.push_back(to_json(c));
  return json{{"seed", s.seed},
              {"cases", s.cases},
              {"passed", s.passed},
              {"min_slack", s.min_slack},
              {"min_slack_name", s.min_slack_name},
              {"all_pass", s.all_pass},
              {"results", std::move(cases)}};
}

inline json to_json(const AsymptoticsReport& r) {
  json rows = json::array();
  for (std::size_t i = 0; i < r.Ts.size(); ++i) {
    json row;
    row["T"] = r.Ts[i];
    row["D"] = r.D[i];
    row["T2_D"] = r.scaled_D[i];
    row["Jst"] = r.J[i];
    row["T2_Jst"] = r.scaled_J[i];
    // Difference-decay fields are only present for lemma_11_3_check output.
    if (i < r.D_diff.size()) row["D_diff"] = r.D_diff[i];
    if (i < r.J_diff.size()) row["Jst_diff"] = r.J_diff[i];
    if (i < r.below_floor.size())
      row["diff_below_floor"] = static_cast<bool>(r.below_floor[i]);
    rows.push_back(std::move(row));
  }
  json ratios = json::array();
  for (double v : r.ln_ratio) ratios.push_back(v);
  return json{{"sigma", r.sigma},
              {"target", r.target},
              {"rows", std::move(rows)},
              {"ln_ratio_doublings", std::move(ratios)},
              {"extrapolated_T2_D", r.extrapolated_scaled_D},
              {"calibration_sup", r.calibration_sup}};
}

inline json to_json(const CertificateReport& r) {
  return json{{"sigma", r.sigma},
              {"T", r.T},
              {"D_X", r.D_X},
              {"Jst_X", r.J_X},
              {"D_diff", r.D_diff},
              {"Jst_diff", r.J_diff},
              {"fitted_c_D", r.fitted_c_D},
              {"fitted_c_J", r.fitted_c_J},
              {"diff_below_floor_D", r.below_floor_D},
              {"diff_below_floor_J", r.below_floor_J},
              {"pass", r.pass}};
}

inline std::string dump_report(const json& j) { return j.dump(2) + "\n"; }

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::InvalidConfig, "cannot open output file: " + path);
  f << text;
}

}  // namespace infodist
