#pragma once

// The verification pipeline: cocycle check, boundedness at every base unit
// and globally, the three solvers, and a verdict on whether
//   (i)   c is a coboundary,
//   (ii)  c is bounded on the fiber of some unit,
//   (iii) c is bounded on all of G
// agree. Reports serialize to text, to a versioned JSON document and to CSV.

#include <chrono>
#include <cmath>
#include <complex>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "cocycle_lab/growth.hpp"
#include "cocycle_lab/scenario.hpp"
#include "cocycle_lab/solvers.hpp"

namespace cocycle_lab {

inline constexpr int kReportFormatVersion = 1;

struct SolverSummary {
  std::string method;
  bool ran = false;
  /// ran and max_residual ≤ the scenario's solve tolerance
  bool ok = false;
  double max_residual = 0.0;
  std::vector<double> per_fiber_radii;
  std::size_t gauge_dim = 0;
  std::string error;
  std::optional<double> cycle_sum;
  friend bool operator==(const SolverSummary&, const SolverSummary&) = default;
};

struct UnitGrowth {
  UnitId unit = 0;
  GrowthClassification growth;
  friend bool operator==(const UnitGrowth&, const UnitGrowth&) = default;
};

struct OrbitVerdict {
  std::vector<UnitId> units;
  bool coboundary = false;
  bool bounded_some_base = false;
  bool bounded_every_base = false;
  bool bounded_global = false;
  bool consistent = false;
  friend bool operator==(const OrbitVerdict&, const OrbitVerdict&) = default;
};

/// Wall-clock time; shown in text reports, left out of machine reports and
/// of comparisons.
struct Timing {
  double elapsed_ms = 0.0;
  friend bool operator==(const Timing&, const Timing&) { return true; }
};

struct TheoremReport {
  int format_version = kReportFormatVersion;
  std::string scenario_id;
  std::string groupoid_kind;
  std::string field;
  std::size_t n_units = 0;
  std::size_t n_arrows = 0;
  bool minimal = true;
  std::vector<std::string> warnings;

  double cocycle_defect = 0.0;
  double unit_defect = 0.0;
  double inverse_defect = 0.0;
  bool cocycle_valid = false;

  std::vector<UnitGrowth> base_units;
  GrowthClassification global;
  std::vector<SolverSummary> solvers;
  /// max over arrows of ‖δf_center − δf_lsq‖
  std::optional<double> solver_agreement;
  std::optional<double> cnd_violation;

  bool coboundary = false;
  bool bounded_some_base = false;
  bool bounded_global = false;
  bool base_verdicts_agree = false;
  std::vector<OrbitVerdict> orbits;

  /// consistent | counterexample | not_minimal | hypotheses_not_met
  std::string verdict;
  std::string details;
  Timing timing;

  friend bool operator==(const TheoremReport&, const TheoremReport&) = default;

  const SolverSummary* solver(const std::string& method) const {
    for (const auto& s : solvers)
      if (s.method == method) return &s;
    return nullptr;
  }
};

struct VerifyOptions {
  GrowthThresholds thresholds;
  /// cycle sums at most this large count as zero for the transfer solver
  double transfer_tol = 1e-9;
  /// solver agreement bound
  double agreement_tol = 1e-6;
};

/// Exit status: 0 when the verdict is consistent, or not_minimal with every
/// orbit consistent; 1 otherwise.
inline int exit_code(const TheoremReport& r) {
  if (r.verdict == "consistent") return 0;
  if (r.verdict == "not_minimal") {
    for (const auto& o : r.orbits)
      if (!o.consistent) return 1;
    return 0;
  }
  return 1;
}

/// Rebuilds a transformation scenario's groupoid for a new window list.
inline Scenario with_windows(const Scenario& sc, std::vector<long> windows) {
  if (!sc.transformation) throw ParamError("window flags apply to transformation scenarios only");
  if (windows.empty()) throw ParamError("window list is empty");
  for (std::size_t i = 0; i < windows.size(); ++i)
    if (windows[i] < 0 || (i > 0 && windows[i] <= windows[i - 1]))
      throw ParamError("windows must be non-negative and strictly increasing");
  Scenario out = sc;
  out.transformation->windows = std::move(windows);
  out.transformation->window = out.transformation->windows.back();
  out.groupoid = build_transformation_groupoid(out.transformation->system, out.transformation->window);
  const auto& g = std::get<WindowedTG>(out.groupoid);
  std::visit([&](auto& model) { resolve_model(model, g, out.bundle, out.transformation, out.tolerances.algebra); },
             out.model);
  validate_structure(out);
  return out;
}

namespace detail {

inline bool is_bounded(const GrowthClassification& g) { return g.verdict == GrowthVerdict::bounded; }

template <Groupoid G, Scalar S>
double max_residual_on(const G& g, const IsometricAction<S>& l, const Cocycle<S>& c, const Section<S>& f,
                       const std::vector<bool>& in_orbit) {
  double worst = 0.0;
  for (ArrowId a = 0; a < g.n_arrows(); ++a) {
    if (!in_orbit[g.rng(a)]) continue;
    worst = std::max(worst, (c(a) - (f(g.rng(a)) - l(a) * f(g.src(a)))).norm());
  }
  return worst;
}

template <Scalar S>
SolverSummary summarize(const SolveReport<S>& rep, double solve_tol) {
  SolverSummary s;
  s.method = to_string(rep.method);
  s.ran = true;
  s.max_residual = rep.max_residual;
  s.ok = rep.max_residual <= solve_tol;
  s.per_fiber_radii = rep.per_fiber_radii;
  s.gauge_dim = rep.gauge_dim;
  return s;
}

template <Groupoid G, Scalar S>
TheoremReport verify_impl(const Scenario& sc, const G& g, const Model<S>& model, const VerifyOptions& opt) {
  TheoremReport r;
  r.scenario_id = sc.id;
  r.groupoid_kind = sc.is_transformation() ? "transformation" : "finite";
  r.field = sc.bundle.field == Field::real ? "real" : "complex";
  r.n_units = g.n_units();
  r.n_arrows = g.n_arrows();
  const auto& l = model.action;
  const auto& c = model.cocycle;
  const double solve_tol = sc.tolerances.solve;

  const auto orbit_blocks = orbits(g);
  r.minimal = orbit_blocks.size() == 1;
  if (!r.minimal)
    r.warnings.push_back("groupoid is not minimal (" + std::to_string(orbit_blocks.size()) +
                         " orbits); verdicts are given per orbit");
  if constexpr (std::is_same_v<G, WindowedTG>) {
    if (g.t_not_injective()) r.warnings.push_back("T is not injective");
    const long n_points = static_cast<long>(g.n_units());
    if (sc.transformation->windows.back() < n_points)
      r.warnings.push_back("largest window is shorter than the number of points");
  }

  const auto check = check_cocycle(g, l, c, sc.tolerances.algebra);
  r.cocycle_defect = check.max_defect;
  r.unit_defect = check.unit_defect;
  r.inverse_defect = check.inverse_defect;
  r.cocycle_valid = check.passed;

  // (ii) per base unit, (iii) globally
  std::optional<std::vector<long>> windows;
  if constexpr (std::is_same_v<G, WindowedTG>) windows = sc.transformation->windows;
  for (UnitId x = 0; x < g.n_units(); ++x) {
    if constexpr (std::is_same_v<G, WindowedTG>) {
      r.base_units.push_back({x, boundedness_probe(g, c, *windows, x, Side::range, opt.thresholds)});
    } else {
      r.base_units.push_back({x, finite_fiber_growth(g, c, x, Side::range)});
    }
  }
  if constexpr (std::is_same_v<G, WindowedTG>) {
    r.global = global_growth(g, c, *windows, opt.thresholds);
  } else {
    double sup = 0.0;
    for (ArrowId a = 0; a < g.n_arrows(); ++a) sup = std::max(sup, c(a).norm());
    r.global = classify_growth({{0L, sup}}, opt.thresholds);
  }

  // (i)
  std::optional<SolveReport<S>> center;
  std::optional<SolveReport<S>> lsq;
  if (r.cocycle_valid) {
    try {
      center = solve_by_center(g, sc.bundle, l, c, sc.tolerances.algebra);
      r.solvers.push_back(summarize(*center, solve_tol));
    } catch (const Error& ex) {
      r.solvers.push_back({"center", false, false, 0.0, {}, 0, ex.what(), std::nullopt});
    }
  } else {
    r.solvers.push_back({"center", false, false, 0.0, {}, 0, "skipped: cocycle identity fails", std::nullopt});
  }
  lsq = solve_least_squares(g, sc.bundle, l, c);
  r.solvers.push_back(summarize(*lsq, solve_tol));
  if (center) {
    const auto dc = coboundary(g, l, center->section);
    const auto dl = coboundary(g, l, lsq->section);
    double worst = 0.0;
    for (ArrowId a = 0; a < g.n_arrows(); ++a) worst = std::max(worst, (dc(a) - dl(a)).norm());
    r.solver_agreement = worst;
  }

  const bool birkhoff = model.cocycle_spec.kind == CocycleKind::birkhoff;
  std::vector<double> cycle_sums;
  std::vector<UnitId> cycle_starts;
  if (birkhoff) {
    const auto& sys = sc.transformation->system;
    std::span<const S> f(model.cocycle_spec.potential);
    for (const auto& cyc : sys.cycles()) {
      S sum(0);
      for (UnitId x : cyc) sum += f[x];
      cycle_sums.push_back(std::abs(sum));
      cycle_starts.push_back(cyc.front());
    }
    try {
      r.solvers.push_back(summarize(solve_transfer_report<S>(sys, f, opt.transfer_tol), solve_tol));
    } catch (const NotACoboundary& ex) {
      r.solvers.push_back({"transfer", true, false, 0.0, {}, 0, ex.what(), ex.cycle_sum()});
    }
  }

  if (r.cocycle_valid && !sc.is_transformation()) {
    double worst = 0.0;
    for (UnitId x = 0; x < g.n_units(); ++x) worst = std::max(worst, check_cnd(g, c, x));
    r.cnd_violation = worst;
  }

  const SolverSummary* primary = birkhoff ? r.solver("transfer") : (center ? r.solver("center") : r.solver("lsq"));
  r.coboundary = primary->ok;
  r.bounded_some_base = false;
  bool every = true;
  for (const auto& u : r.base_units) {
    r.bounded_some_base = r.bounded_some_base || is_bounded(u.growth);
    every = every && is_bounded(u.growth);
  }
  r.base_verdicts_agree = every == r.bounded_some_base;
  r.bounded_global = is_bounded(r.global);

  // per-orbit verdicts
  const Section<S>* section = center ? &center->section : &lsq->section;
  for (const auto& block : orbit_blocks) {
    OrbitVerdict ov;
    ov.units = block;
    std::vector<bool> in_orbit(g.n_units(), false);
    for (UnitId x : block) in_orbit[x] = true;
    if (birkhoff) {
      ov.coboundary = true;
      for (std::size_t i = 0; i < cycle_sums.size(); ++i)
        if (in_orbit[cycle_starts[i]] && cycle_sums[i] > opt.transfer_tol) ov.coboundary = false;
    } else {
      ov.coboundary = max_residual_on(g, l, c, *section, in_orbit) <= solve_tol;
    }
    ov.bounded_every_base = true;
    for (UnitId x : block) {
      const bool b = is_bounded(r.base_units[x].growth);
      ov.bounded_some_base = ov.bounded_some_base || b;
      ov.bounded_every_base = ov.bounded_every_base && b;
    }
    if constexpr (std::is_same_v<G, WindowedTG>) {
      std::vector<ArrowId> arrows;
      for (ArrowId a = 0; a < g.n_arrows(); ++a)
        if (in_orbit[g.rng(a)]) arrows.push_back(a);
      const auto series = sup_series(g, arrows, std::span<const long>(*windows), [&](ArrowId a) { return c(a).norm(); });
      ov.bounded_global = is_bounded(classify_growth(series, opt.thresholds));
    } else {
      ov.bounded_global = true;
    }
    ov.consistent = ov.coboundary == ov.bounded_some_base && ov.coboundary == ov.bounded_global &&
                    ov.bounded_some_base == ov.bounded_every_base;
    r.orbits.push_back(std::move(ov));
  }

  const bool agree = r.coboundary == r.bounded_some_base && r.coboundary == r.bounded_global && r.base_verdicts_agree;
  std::ostringstream details;
  details << "(i) coboundary=" << (r.coboundary ? "yes" : "no") << " via " << primary->method
          << "; (ii) bounded at some base unit=" << (r.bounded_some_base ? "yes" : "no")
          << "; (iii) bounded globally=" << (r.bounded_global ? "yes" : "no");
  if (!r.base_verdicts_agree) details << "; base units disagree";
  if (r.solver_agreement && *r.solver_agreement > opt.agreement_tol)
    details << "; center and lsq coboundaries differ by " << *r.solver_agreement;

  if (!r.cocycle_valid) {
    r.verdict = "hypotheses_not_met";
    details << "; cocycle identity fails with defect " << r.cocycle_defect;
  } else if (!r.minimal) {
    r.verdict = "not_minimal";
  } else {
    r.verdict = agree ? "consistent" : "counterexample";
  }
  r.details = details.str();
  return r;
}

}  // namespace detail

/// Runs the full pipeline. Component errors are rethrown with the scenario id.
inline TheoremReport run_verify(const Scenario& sc, const VerifyOptions& opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  TheoremReport r;
  try {
    r = std::visit(
        [&](const auto& g) {
          return std::visit([&](const auto& model) { return detail::verify_impl(sc, g, model, opt); }, sc.model);
        },
        sc.groupoid);
  } catch (const Error& ex) {
    throw Error("scenario " + (sc.id.empty() ? std::string("<unnamed>") : sc.id) + ": " + ex.what());
  }
  r.timing.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

// ---------------------------------------------------------------- output

inline std::string emit_csv(const std::vector<std::pair<long, double>>& series) {
  std::string out = "K,sup_norm\n";
  for (const auto& [k, v] : series) out += std::to_string(k) + "," + detail::format_double(v) + "\n";
  return out;
}

inline std::string emit_csv(const GrowthClassification& g) { return emit_csv(g.sup_norm_by_window); }

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson growth_json(const GrowthClassification& g) {
  ojson series = ojson::array();
  for (const auto& [k, v] : g.sup_norm_by_window) series.push_back(ojson::array({k, v}));
  return ojson{{"verdict", to_string(g.verdict)},
               {"slope_estimate", g.slope_estimate},
               {"fit_error", g.fit_error},
               {"sup_norm_by_window", series}};
}

inline GrowthClassification growth_from(const ojson& j) {
  GrowthClassification g;
  g.verdict = parse_growth_verdict(j.at("verdict").get<std::string>());
  g.slope_estimate = j.at("slope_estimate").get<double>();
  g.fit_error = j.at("fit_error").get<double>();
  for (const auto& p : j.at("sup_norm_by_window")) g.sup_norm_by_window.emplace_back(p.at(0).get<long>(), p.at(1).get<double>());
  return g;
}

template <class T>
ojson opt_json(const std::optional<T>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

template <class T>
std::optional<T> opt_from(const ojson& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}

inline std::string yes_no(bool b) { return b ? "yes" : "no"; }

}  // namespace detail

enum class ReportFormat { text, machine };

inline std::string emit_machine_report(const TheoremReport& r) {
  using detail::ojson;
  ojson j;
  j["format_version"] = r.format_version;
  j["scenario"] = r.scenario_id;
  j["groupoid"] = r.groupoid_kind;
  j["field"] = r.field;
  j["units"] = r.n_units;
  j["arrows"] = r.n_arrows;
  j["minimal"] = r.minimal;
  j["warnings"] = r.warnings;
  j["cocycle"] = ojson{{"defect", r.cocycle_defect},
                       {"unit_defect", r.unit_defect},
                       {"inverse_defect", r.inverse_defect},
                       {"valid", r.cocycle_valid}};
  ojson units = ojson::array();
  for (const auto& u : r.base_units) units.push_back(ojson{{"unit", u.unit}, {"growth", detail::growth_json(u.growth)}});
  j["base_units"] = units;
  j["global_growth"] = detail::growth_json(r.global);
  ojson solvers = ojson::array();
  for (const auto& s : r.solvers)
    solvers.push_back(ojson{{"method", s.method},
                            {"ran", s.ran},
                            {"ok", s.ok},
                            {"max_residual", s.max_residual},
                            {"per_fiber_radii", s.per_fiber_radii},
                            {"gauge_dim", s.gauge_dim},
                            {"error", s.error},
                            {"cycle_sum", detail::opt_json(s.cycle_sum)}});
  j["solvers"] = solvers;
  j["solver_agreement"] = detail::opt_json(r.solver_agreement);
  j["cnd_violation"] = detail::opt_json(r.cnd_violation);
  j["conditions"] = ojson{{"coboundary", r.coboundary},
                          {"bounded_some_base", r.bounded_some_base},
                          {"bounded_global", r.bounded_global},
                          {"base_verdicts_agree", r.base_verdicts_agree}};
  ojson orbs = ojson::array();
  for (const auto& o : r.orbits)
    orbs.push_back(ojson{{"units", o.units},
                         {"coboundary", o.coboundary},
                         {"bounded_some_base", o.bounded_some_base},
                         {"bounded_every_base", o.bounded_every_base},
                         {"bounded_global", o.bounded_global},
                         {"consistent", o.consistent}});
  j["orbits"] = orbs;
  j["verdict"] = r.verdict;
  j["details"] = r.details;
  return j.dump(2) + "\n";
}

/// Inverse of emit_machine_report; throws ParseError on malformed input.
inline TheoremReport parse_machine_report(std::string_view bytes) {
  using detail::ojson;
  ojson j;
  try {
    j = ojson::parse(bytes);
  } catch (const nlohmann::json::parse_error& ex) {
    throw ParseError(0, ex.what());
  }
  try {
    TheoremReport r;
    r.format_version = j.at("format_version").get<int>();
    if (r.format_version != kReportFormatVersion)
      throw ParseError(0, "unsupported report format_version " + std::to_string(r.format_version));
    r.scenario_id = j.at("scenario").get<std::string>();
    r.groupoid_kind = j.at("groupoid").get<std::string>();
    r.field = j.at("field").get<std::string>();
    r.n_units = j.at("units").get<std::size_t>();
    r.n_arrows = j.at("arrows").get<std::size_t>();
    r.minimal = j.at("minimal").get<bool>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    const auto& c = j.at("cocycle");
    r.cocycle_defect = c.at("defect").get<double>();
    r.unit_defect = c.at("unit_defect").get<double>();
    r.inverse_defect = c.at("inverse_defect").get<double>();
    r.cocycle_valid = c.at("valid").get<bool>();
    for (const auto& u : j.at("base_units"))
      r.base_units.push_back({u.at("unit").get<UnitId>(), detail::growth_from(u.at("growth"))});
    r.global = detail::growth_from(j.at("global_growth"));
    for (const auto& s : j.at("solvers")) {
      SolverSummary x;
      x.method = s.at("method").get<std::string>();
      x.ran = s.at("ran").get<bool>();
      x.ok = s.at("ok").get<bool>();
      x.max_residual = s.at("max_residual").get<double>();
      x.per_fiber_radii = s.at("per_fiber_radii").get<std::vector<double>>();
      x.gauge_dim = s.at("gauge_dim").get<std::size_t>();
      x.error = s.at("error").get<std::string>();
      x.cycle_sum = detail::opt_from<double>(s.at("cycle_sum"));
      r.solvers.push_back(std::move(x));
    }
    r.solver_agreement = detail::opt_from<double>(j.at("solver_agreement"));
    r.cnd_violation = detail::opt_from<double>(j.at("cnd_violation"));
    const auto& k = j.at("conditions");
    r.coboundary = k.at("coboundary").get<bool>();
    r.bounded_some_base = k.at("bounded_some_base").get<bool>();
    r.bounded_global = k.at("bounded_global").get<bool>();
    r.base_verdicts_agree = k.at("base_verdicts_agree").get<bool>();
    for (const auto& o : j.at("orbits")) {
      OrbitVerdict v;
      v.units = o.at("units").get<std::vector<UnitId>>();
      v.coboundary = o.at("coboundary").get<bool>();
      v.bounded_some_base = o.at("bounded_some_base").get<bool>();
      v.bounded_every_base = o.at("bounded_every_base").get<bool>();
      v.bounded_global = o.at("bounded_global").get<bool>();
      v.consistent = o.at("consistent").get<bool>();
      r.orbits.push_back(std::move(v));
    }
    r.verdict = j.at("verdict").get<std::string>();
    r.details = j.at("details").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(0, std::string("malformed report: ") + ex.what());
  }
}

inline std::string emit_text_report(const TheoremReport& r) {
  using detail::format_double;
  using detail::yes_no;
  std::ostringstream out;
  out << "scenario " << (r.scenario_id.empty() ? "<unnamed>" : r.scenario_id) << " (" << r.groupoid_kind << ", "
      << r.field << ", " << r.n_units << " units, " << r.n_arrows << " arrows)\n";
  for (const auto& w : r.warnings) out << "WARNING: " << w << "\n";
  out << "cocycle: defect " << format_double(r.cocycle_defect) << " (units " << format_double(r.unit_defect)
      << ", inverses " << format_double(r.inverse_defect) << ") " << (r.cocycle_valid ? "valid" : "INVALID") << "\n";
  out << "per-unit growth:\n";
  for (const auto& u : r.base_units) {
    out << "  unit " << u.unit << ": " << to_string(u.growth.verdict) << ", sup "
        << format_double(u.growth.sup_norm_by_window.empty() ? 0.0 : u.growth.sup_norm_by_window.back().second);
    if (u.growth.sup_norm_by_window.size() > 1) out << ", slope " << format_double(u.growth.slope_estimate);
    out << "\n";
  }
  out << "global growth: " << to_string(r.global.verdict) << ", sup "
      << format_double(r.global.sup_norm_by_window.empty() ? 0.0 : r.global.sup_norm_by_window.back().second)
      << ", slope " << format_double(r.global.slope_estimate) << "\n";
  for (const auto& s : r.solvers) {
    out << "solver " << s.method << ": ";
    if (!s.error.empty()) {
      out << s.error << "\n";
      continue;
    }
    out << "residual " << format_double(s.max_residual) << (s.ok ? " ok" : " FAILED");
    if (s.method == "lsq") out << ", gauge dim " << s.gauge_dim;
    out << "\n";
  }
  if (r.solver_agreement) out << "center vs lsq coboundaries: " << format_double(*r.solver_agreement) << "\n";
  if (r.cnd_violation) out << "conditionally negative type violation: " << format_double(*r.cnd_violation) << "\n";
  out << "(i) coboundary: " << yes_no(r.coboundary) << "\n";
  out << "(ii) bounded at some base unit: " << yes_no(r.bounded_some_base)
      << (r.base_verdicts_agree ? "" : " (base units disagree)") << "\n";
  out << "(iii) bounded globally: " << yes_no(r.bounded_global) << "\n";
  if (!r.minimal) {
    for (std::size_t i = 0; i < r.orbits.size(); ++i) {
      const auto& o = r.orbits[i];
      out << "orbit " << i << " {" << detail::join_ints(o.units) << "}: coboundary " << yes_no(o.coboundary)
          << ", bounded at base " << yes_no(o.bounded_some_base) << ", bounded " << yes_no(o.bounded_global)
          << (o.consistent ? ", consistent" : ", INCONSISTENT") << "\n";
    }
  }
  out << "verdict: " << r.verdict << "\n";
  out << "details: " << r.details << "\n";
  out << "time: " << std::fixed;
  out.precision(1);
  out << r.timing.elapsed_ms << " ms\n";
  return out.str();
}

inline std::string emit_report(const TheoremReport& r, ReportFormat format) {
  return format == ReportFormat::machine ? emit_machine_report(r) : emit_text_report(r);
}

}  // namespace cocycle_lab
