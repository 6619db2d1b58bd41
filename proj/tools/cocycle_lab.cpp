// cocycle_lab: validate, solve, probe, verify and generate scenarios.
//
// Exit codes: 0 consistent/valid, 1 inconsistency or validation failure,
// 2 usage or IO error.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cocycle_lab/cocycle_lab.hpp"

using namespace cocycle_lab;

namespace {

struct Options {
  std::vector<std::string> scenarios;
  std::optional<double> tol;
  std::optional<long> window;
  std::vector<long> windows;
  std::uint64_t seed = 0;
  std::string method = "all";
  std::string format = "text";
  std::string out;
  std::string csv;
  std::optional<std::size_t> unit;

  std::string kind = "minimal_groupoid";
  GenParams gen;
  std::string field = "real";
  std::optional<std::size_t> isotropy;
};

void write_output(const std::string& path, const std::string& bytes) {
  if (path.empty() || path == "-") {
    std::cout << bytes;
    std::cout.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::ios_base::failure("cannot write " + path);
  f << bytes;
  if (!f) throw std::ios_base::failure("cannot write " + path);
}

Scenario load(const std::string& path, const Options& o) {
  Scenario sc = load_scenario(path);
  if (o.tol) sc.tolerances.algebra = *o.tol;
  if (!o.windows.empty()) {
    sc = with_windows(sc, o.windows);
  } else if (o.window) {
    sc = with_windows(sc, default_windows(*o.window));
  }
  return sc;
}

ReportFormat report_format(const Options& o) {
  return o.format == "machine" ? ReportFormat::machine : ReportFormat::text;
}

int cmd_validate(const Options& o) {
  const Scenario sc = load(o.scenarios.front(), o);
  const auto check = std::visit(
      [&](const auto& g) {
        return std::visit([&](const auto& m) { return check_cocycle(g, m.action, m.cocycle, sc.tolerances.algebra); },
                          sc.model);
      },
      sc.groupoid);
  const bool minimal = std::visit([](const auto& g) { return is_minimal(g); }, sc.groupoid);
  std::ostringstream out;
  if (report_format(o) == ReportFormat::machine) {
    nlohmann::ordered_json j;
    j["format_version"] = kReportFormatVersion;
    j["scenario"] = sc.id;
    j["units"] = sc.n_units();
    j["arrows"] = sc.n_arrows();
    j["minimal"] = minimal;
    j["cocycle_defect"] = check.max_defect;
    j["valid"] = check.passed;
    out << j.dump(2) << "\n";
  } else {
    out << "scenario " << (sc.id.empty() ? "<unnamed>" : sc.id) << ": " << sc.n_units() << " units, "
        << sc.n_arrows() << " arrows, " << (minimal ? "minimal" : "not minimal") << "\n";
    out << "groupoid and action axioms: ok\n";
    out << "cocycle defect " << detail::format_double(check.max_defect) << ": "
        << (check.passed ? "valid" : "INVALID") << "\n";
  }
  write_output(o.out, out.str());
  return check.passed ? 0 : 1;
}

template <Scalar S>
nlohmann::ordered_json section_json(const Section<S>& f) {
  auto j = nlohmann::ordered_json::array();
  for (const auto& v : f.values) {
    auto col = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if constexpr (is_complex_v<S>) {
        col.push_back(v(i).real());
        col.push_back(v(i).imag());
      } else {
        col.push_back(v(i));
      }
    }
    j.push_back(col);
  }
  return j;
}

int cmd_solve(const Options& o) {
  const Scenario sc = load(o.scenarios.front(), o);
  const bool all = o.method == "all";
  nlohmann::ordered_json reports = nlohmann::ordered_json::array();
  std::ostringstream text;
  bool ok = true;
  auto record = [&](const auto& rep) {
    const bool good = rep.max_residual <= sc.tolerances.solve;
    ok = ok && good;
    reports.push_back({{"method", to_string(rep.method)},
                       {"ok", good},
                       {"max_residual", rep.max_residual},
                       {"gauge_dim", rep.gauge_dim},
                       {"not_minimal", rep.not_minimal},
                       {"per_fiber_radii", rep.per_fiber_radii},
                       {"section", section_json(rep.section)}});
    text << to_string(rep.method) << ": residual " << detail::format_double(rep.max_residual)
         << (good ? " ok" : " FAILED");
    if (rep.method == SolveMethod::least_squares) text << ", gauge dim " << rep.gauge_dim;
    if (rep.not_minimal) text << " (not minimal; solved per orbit)";
    text << "\n";
    for (std::size_t x = 0; x < rep.section.values.size(); ++x)
      text << "  f(" << x << ") = " << detail::join_scalars(rep.section.values[x]) << "\n";
  };
  auto failure = [&](const char* method, const std::string& what) {
    ok = false;
    reports.push_back({{"method", method}, {"ok", false}, {"error", what}});
    text << method << ": " << what << "\n";
  };

  std::visit(
      [&](const auto& g) {
        std::visit(
            [&](const auto& m) {
              using S = typename std::decay_t<decltype(m.cocycle)>::scalar_type;
              if (all || o.method == "center") {
                try {
                  record(solve_by_center(g, sc.bundle, m.action, m.cocycle, sc.tolerances.algebra));
                } catch (const CocycleDefect& ex) {
                  failure("center", ex.what());
                }
              }
              if (all || o.method == "lsq") record(solve_least_squares(g, sc.bundle, m.action, m.cocycle));
              if (all || o.method == "transfer") {
                if (m.cocycle_spec.kind != CocycleKind::birkhoff) {
                  if (!all) failure("transfer", "transfer solver needs a birkhoff cocycle");
                } else {
                  try {
                    record(solve_transfer_report<S>(sc.transformation->system, std::span<const S>(m.cocycle_spec.potential),
                                                    1e-9));
                  } catch (const NotACoboundary& ex) {
                    failure("transfer", ex.what());
                  }
                }
              }
            },
            sc.model);
      },
      sc.groupoid);

  if (report_format(o) == ReportFormat::machine) {
    nlohmann::ordered_json j;
    j["format_version"] = kReportFormatVersion;
    j["scenario"] = sc.id;
    j["solvers"] = reports;
    write_output(o.out, j.dump(2) + "\n");
  } else {
    write_output(o.out, text.str());
  }
  return ok ? 0 : 1;
}

int cmd_probe(const Options& o) {
  const Scenario sc = load(o.scenarios.front(), o);
  std::vector<UnitGrowth> units;
  GrowthClassification global;
  std::visit(
      [&](const auto& g) {
        std::visit(
            [&](const auto& m) {
              using G = std::decay_t<decltype(g)>;
              for (UnitId x = 0; x < g.n_units(); ++x) {
                if (o.unit && *o.unit != x) continue;
                if constexpr (std::is_same_v<G, WindowedTG>) {
                  units.push_back({x, boundedness_probe(g, m.cocycle, sc.transformation->windows, x)});
                } else {
                  units.push_back({x, finite_fiber_growth(g, m.cocycle, x, Side::range)});
                }
              }
              if constexpr (std::is_same_v<G, WindowedTG>) {
                global = global_growth(g, m.cocycle, sc.transformation->windows);
              } else {
                double sup = 0.0;
                for (ArrowId a = 0; a < g.n_arrows(); ++a) sup = std::max(sup, m.cocycle(a).norm());
                global = classify_growth({{0L, sup}});
              }
            },
            sc.model);
      },
      sc.groupoid);
  if (o.unit && units.empty()) throw ParamError("unit " + std::to_string(*o.unit) + " does not exist");

  if (report_format(o) == ReportFormat::machine) {
    nlohmann::ordered_json j;
    j["format_version"] = kReportFormatVersion;
    j["scenario"] = sc.id;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& u : units) arr.push_back({{"unit", u.unit}, {"growth", detail::growth_json(u.growth)}});
    j["base_units"] = arr;
    j["global_growth"] = detail::growth_json(global);
    write_output(o.out, j.dump(2) + "\n");
  } else {
    std::ostringstream out;
    for (const auto& u : units)
      out << "unit " << u.unit << ": " << to_string(u.growth.verdict) << ", slope "
          << detail::format_double(u.growth.slope_estimate) << ", sup "
          << detail::format_double(u.growth.sup_norm_by_window.back().second) << "\n";
    out << "global: " << to_string(global.verdict) << ", slope " << detail::format_double(global.slope_estimate)
        << ", sup " << detail::format_double(global.sup_norm_by_window.back().second) << "\n";
    write_output(o.out, out.str());
  }
  if (!o.csv.empty()) write_output(o.csv, emit_csv(o.unit ? units.front().growth : global));
  return 0;
}

std::size_t thread_cap(std::size_t jobs) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("COCYCLE_LAB_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) n = v;
  }
  return std::min(n, jobs);
}

struct VerifyResult {
  std::string report;
  std::string csv;
  std::string error;
  int code = 0;
};

int cmd_verify(const Options& o) {
  const std::size_t jobs = o.scenarios.size();
  std::vector<VerifyResult> results(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs; i = next++) {
      auto& res = results[i];
      try {
        const Scenario sc = load(o.scenarios[i], o);
        const auto rep = run_verify(sc);
        res.report = emit_report(rep, report_format(o));
        res.csv = emit_csv(rep.global);
        res.code = exit_code(rep);
      } catch (const std::ios_base::failure& ex) {
        res.error = ex.what();
        res.code = 2;
      } catch (const std::exception& ex) {
        res.error = o.scenarios[i] + ": " + ex.what();
        res.code = 1;
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t n_threads = thread_cap(jobs);
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::string all;
  std::string csv;
  int code = 0;
  for (const auto& r : results) {
    if (!r.error.empty()) std::cerr << "error: " << r.error << "\n";
    all += r.report;
    csv += csv.empty() ? r.csv : r.csv.substr(r.csv.find('\n') + 1);
    code = std::max(code, r.code);
  }
  write_output(o.out, all);
  if (!o.csv.empty()) write_output(o.csv, csv);
  return code;
}

int cmd_gen(const Options& o) {
  GenParams p = o.gen;
  if (o.field == "complex") {
    p.field = Field::complex;
  } else if (o.field != "real") {
    throw ParamError("field must be real or complex");
  }
  p.isotropy = o.isotropy;
  const auto sc = gen_scenario(o.seed, parse_gen_kind(o.kind), p);
  write_output(o.out, to_text(sc));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bounded cocycles on finite groupoids: validate, solve, probe and verify scenarios"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub, bool many) {
    if (many) {
      sub->add_option("scenario", o.scenarios, "Scenario files")->required()->check(CLI::ExistingFile);
    } else {
      sub->add_option("scenario", o.scenarios, "Scenario file")->required()->expected(1)->check(CLI::ExistingFile);
    }
    sub->add_option("--tol", o.tol, "Algebra tolerance (default 1e-9)");
    sub->add_option("--window", o.window, "Largest window K (windows K/4, K/2, K)");
    sub->add_option("--windows", o.windows, "Window list K1,K2,...")->delimiter(',');
    sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"text", "machine"}));
    sub->add_option("--out", o.out, "Output path (default stdout)");
  };

  auto* validate = app.add_subcommand("validate", "Check groupoid, action and cocycle axioms");
  add_common(validate, false);
  auto* solve = app.add_subcommand("solve", "Solve the coboundary equation");
  add_common(solve, false);
  solve->add_option("--method", o.method, "Solver")->check(CLI::IsMember({"center", "lsq", "transfer", "all"}));
  auto* probe = app.add_subcommand("probe", "Growth of sup |c| over nested windows");
  add_common(probe, false);
  probe->add_option("--unit", o.unit, "Probe only this base unit");
  probe->add_option("--csv", o.csv, "Write K,sup_norm pairs to this path");
  auto* verify = app.add_subcommand("verify", "Check that coboundary, base and global boundedness agree");
  add_common(verify, true);
  verify->add_option("--csv", o.csv, "Write K,sup_norm pairs of the global growth to this path");
  verify->add_option("--seed", o.seed, "Unused; accepted for symmetry with gen");
  auto* gen = app.add_subcommand("gen", "Generate a seeded scenario");
  gen->add_option("--seed", o.seed, "Seed");
  gen->add_option("--kind", o.kind, "Kind")->check(CLI::IsMember({"minimal_groupoid", "transformation", "perturbed"}));
  gen->add_option("--units", o.gen.units, "Units (points for transformation scenarios), at most 32");
  gen->add_option("--isotropy", o.isotropy, "Isotropy order 1..4 (random when omitted)");
  gen->add_option("--dim", o.gen.dim, "Fiber dimension, at most 16");
  gen->add_option("--field", o.field, "Scalar field")->check(CLI::IsMember({"real", "complex"}));
  gen->add_option("--delta", o.gen.delta, "Injected defect for perturbed scenarios");
  gen->add_option("--mean", o.gen.mean, "Cycle mean added to transformation potentials");
  gen->add_option("--out", o.out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*validate) return cmd_validate(o);
    if (*solve) return cmd_solve(o);
    if (*probe) return cmd_probe(o);
    if (*verify) return cmd_verify(o);
    if (*gen) return cmd_gen(o);
  } catch (const std::ios_base::failure& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  } catch (const ParamError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 2;
}
