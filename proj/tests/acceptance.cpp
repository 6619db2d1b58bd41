// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <boost/rational.hpp>

#include <chrono>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "cocycle_lab/cocycle_lab.hpp"
#include "oracles.hpp"

using namespace cocycle_lab;
using cd = std::complex<double>;
using Q = boost::rational<long long>;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
  if (!pass) ++failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// groupoid scenarios shared by the algebra and center criteria
std::vector<Scenario> algebra_family() {
  std::vector<Scenario> out;
  out.reserve(1000);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    GenParams p;
    p.units = 1 + seed % 8;
    p.dim = 1 + (seed / 8) % 4;
    p.field = seed % 5 == 4 ? Field::complex : Field::real;
    out.push_back(gen_scenario(seed, GenKind::minimal_groupoid, p));
  }
  return out;
}

void algebra_suite(const std::vector<Scenario>& family, double gen_seconds) {
  const auto t0 = Clock::now();
  std::size_t bad = 0;
  double worst = 0.0;
  for (const auto& sc : family) {
    const auto& g = std::get<FiniteGroupoid>(sc.groupoid);
    std::visit(
        [&](const auto& m) {
          const bool ok_g = validate_groupoid(g).ok();
          const bool ok_a = validate_action(g, sc.bundle, m.action, 1e-9).ok();
          const auto chk = check_cocycle(g, m.action, m.cocycle, 1e-9);
          worst = std::max(worst, chk.max_defect);
          if (!ok_g || !ok_a || chk.max_defect > 1e-9) ++bad;
        },
        sc.model);
  }
  const double secs = gen_seconds + seconds_since(t0);
  report("algebra suite", bad == 0 && secs < 60.0,
         "1000 scenarios, " + std::to_string(bad) + " failing, max defect " + fmt(worst) + ", " + fmt(secs) + " s");
}

void center_solver(const std::vector<Scenario>& family) {
  double worst_res = 0.0, worst_agree = 0.0;
  std::size_t errors = 0;
  for (const auto& sc : family) {
    const auto& g = std::get<FiniteGroupoid>(sc.groupoid);
    std::visit(
        [&](const auto& m) {
          try {
            const auto cen = solve_by_center(g, sc.bundle, m.action, m.cocycle);
            const auto lsq = solve_least_squares(g, sc.bundle, m.action, m.cocycle);
            worst_res = std::max(worst_res, cen.max_residual);
            const auto dc = coboundary(g, m.action, cen.section);
            const auto dl = coboundary(g, m.action, lsq.section);
            for (ArrowId a = 0; a < g.n_arrows(); ++a) worst_agree = std::max(worst_agree, (dc(a) - dl(a)).norm());
          } catch (const Error&) {
            ++errors;
          }
        },
        sc.model);
  }
  report("center solver", errors == 0 && worst_res <= 1e-7 && worst_agree <= 1e-6,
         "max residual " + fmt(worst_res) + ", max center/lsq disagreement " + fmt(worst_agree) + ", " +
             std::to_string(errors) + " errors");
}

void meb_oracle() {
  Rng rng(20240601);
  double worst_c = 0.0, worst_r = 0.0, meb_secs = 0.0;
  const auto t0 = Clock::now();
  for (int t = 0; t < 200; ++t) {
    const auto d = static_cast<Eigen::Index>(1 + rng.below(3));
    const std::size_t n = 1 + rng.below(12);
    std::vector<Eigen::VectorXd> pts;
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::VectorXd p(d);
      for (Eigen::Index k = 0; k < d; ++k) p(k) = rng.uniform(-1.0, 1.0);
      pts.push_back(p);
    }
    const auto tm = Clock::now();
    const auto b = min_enclosing_ball_real(pts);
    meb_secs += seconds_since(tm);
    const auto o = oracle::grid_meb(pts);
    worst_c = std::max(worst_c, (b.center - o.center).norm());
    worst_r = std::max(worst_r, std::abs(b.radius - o.radius));
  }
  const double total = seconds_since(t0);
  report("MEB oracle equivalence", worst_c <= 1e-4 && worst_r <= 1e-6 && total < 30.0,
         "200 sets, max center gap " + fmt(worst_c) + ", max radius gap " + fmt(worst_r) + ", MEB " + fmt(meb_secs) +
             " s, with oracle " + fmt(total) + " s");
}

void meb_equivariance() {
  Rng rng(777);
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    const auto d = static_cast<Eigen::Index>(1 + rng.below(4));
    const std::size_t n = 1 + rng.below(12);
    auto run = [&]<Scalar S>() {
      std::vector<Vec<S>> pts;
      for (std::size_t i = 0; i < n; ++i) pts.push_back(rng.vector<S>(d));
      const Mat<S> q = random_isometry<S>(rng, d);
      const Vec<S> shift = rng.vector<S>(d);
      std::vector<Vec<S>> moved;
      for (const auto& p : pts) moved.push_back(q * p + shift);
      const auto b = min_enclosing_ball(pts, 0);
      const auto bm = min_enclosing_ball(moved, 0);
      worst = std::max(worst, (bm.center.coords - (q * b.center.coords + shift)).norm());
    };
    if (t % 2 == 0) {
      run.template operator()<double>();
    } else {
      run.template operator()<cd>();
    }
  }
  report("MEB equivariance", worst <= 1e-8, "500 cases, max deviation " + fmt(worst));
}

double to_double(Q q) { return static_cast<double>(q.numerator()) / static_cast<double>(q.denominator()); }

// fixed rational family on the N-cycle x ↦ x+1
std::vector<std::vector<Q>> dichotomy_family(std::size_t n) {
  std::vector<Q> h(n), cob(n), bump(n), ones(n, Q(1)), alt(n);
  for (std::size_t x = 0; x < n; ++x)
    h[x] = Q(static_cast<long long>((7 * x * x + 3) % 11) - 5, static_cast<long long>(1 + x % 4));
  for (std::size_t x = 0; x < n; ++x) cob[x] = h[x] - h[(x + 1) % n];
  bump = cob;
  bump[0] += Q(1, static_cast<long long>(n));
  for (std::size_t x = 0; x < n; ++x) alt[x] = Q(x % 2 == 0 ? 1 : -1, 3);
  return {cob, bump, ones, alt};
}

void dichotomy() {
  std::size_t checked = 0, mismatches = 0;
  for (std::size_t n = 2; n <= 50; ++n) {
    const auto sys = TransformationSystem::rotation(n);
    const long ln = static_cast<long>(n);
    const std::vector<long> windows{ln, 2 * ln, 4 * ln, 8 * ln};
    const auto wtg = build_transformation_groupoid(sys, windows.back());
    for (const auto& fq : dichotomy_family(n)) {
      Q sum(0);
      for (const auto& v : fq) sum += v;
      bool solved = false, exact = false;
      try {
        const auto g = solve_transfer_function<Q>(sys, fq);
        solved = true;
        exact = true;
        for (UnitId x = 0; x < n; ++x) exact = exact && g[x] - g[sys(x)] == fq[x];
      } catch (const NotACoboundary&) {
      }
      std::vector<double> f(n);
      std::transform(fq.begin(), fq.end(), f.begin(), to_double);
      for (UnitId x = 0; x < n; ++x) {
        const bool bounded = boundedness_probe<double>(wtg, windows, f, x).verdict == GrowthVerdict::bounded;
        const bool zero = sum == Q(0);
        ++checked;
        if (bounded != zero || solved != zero || (solved && !exact)) ++mismatches;
      }
    }
  }
  const std::vector<double> ones(5, 1.0);
  const auto g5 = boundedness_probe<double>(TransformationSystem::rotation(5), std::vector<long>{5, 10, 20, 40}, ones, 0);
  const double slope = g5.slope_estimate;
  report("bounded iff coboundary on cycles", mismatches == 0 && slope >= 0.95 && slope <= 1.05,
         std::to_string(checked) + " (N, f, x) cases, " + std::to_string(mismatches) +
             " mismatches, slope for f = 1 on a 5-cycle " + fmt(slope));
}

void growth_slope() {
  Rng rng(8080);
  double worst = 0.0;
  std::size_t cases = 0;
  const std::vector<long> windows{10, 20, 40, 80};
  for (double mu : {0.1, 0.3, 1.0})
    for (std::size_t n : {10u, 100u})
      for (int rep = 0; rep < 5; ++rep) {
        // f = μ + h − h∘T with |h| ≤ μ/2
        std::vector<double> h(n), f(n);
        for (auto& v : h) v = rng.uniform(-0.5 * mu, 0.5 * mu);
        for (std::size_t x = 0; x < n; ++x) f[x] = mu + h[x] - h[(x + 1) % n];
        const auto wtg = build_transformation_groupoid(TransformationSystem::rotation(n), windows.back());
        for (UnitId x = 0; x < n; x += std::max<std::size_t>(1, n / 10)) {
          const auto g = boundedness_probe<double>(wtg, windows, f, x);
          worst = std::max(worst, std::abs(g.slope_estimate - mu) / mu);
          ++cases;
        }
      }
  report("growth slope accuracy", worst <= 0.05,
         std::to_string(cases) + " probes, max relative slope error " + fmt(worst));
}

void hull_invariance() {
  Rng rng(1234);
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    GenParams p;
    p.units = 1 + seed % 5;
    p.dim = 1 + seed % 3;
    p.field = seed % 4 == 3 ? Field::complex : Field::real;
    const auto sc = gen_scenario(5000 + seed, GenKind::minimal_groupoid, p);
    const auto& g = std::get<FiniteGroupoid>(sc.groupoid);
    std::visit(
        [&](const auto& m) {
          using S = typename std::decay_t<decltype(m.cocycle)>::scalar_type;
          const UnitId x = static_cast<UnitId>(rng.below(g.n_units()));
          const BundleVector<S> u{x, rng.vector<S>(sc.bundle.dim(x))};
          worst = std::max(worst, orbit_hull_invariance_check(g, m.action, m.cocycle,
                                                              AffineOrbitPoint<S>{g.unit_arrow(x), u})
                                      .defect);
        },
        sc.model);
  }
  double least = std::numeric_limits<double>::infinity();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    GenParams p;
    p.units = 2 + seed % 4;
    p.dim = 1 + seed % 3;
    const auto sc = gen_scenario(9000 + seed, GenKind::perturbed, p);
    const auto& g = std::get<FiniteGroupoid>(sc.groupoid);
    const auto& m = std::get<Model<double>>(sc.model);
    const UnitId x = static_cast<UnitId>(rng.below(g.n_units()));
    const BundleVector<double> u{x, rng.vector<double>(sc.bundle.dim(x))};
    least = std::min(least, orbit_hull_invariance_check(g, m.action, m.cocycle,
                                                        AffineOrbitPoint<double>{g.unit_arrow(x), u})
                                .defect);
  }
  report("hull invariance", worst <= 1e-9 && least > 1e-3,
         "200 cocycles max defect " + fmt(worst) + ", 50 perturbed min defect " + fmt(least));
}

void convexity() {
  Rng rng(99);
  std::size_t bad = 0;
  for (int t = 0; t < 10000; ++t) {
    const auto d = static_cast<Eigen::Index>(1 + rng.below(4));
    auto in_ball = [&] {
      Vec<double> v = rng.vector<double>(d);
      const double n = v.norm();
      if (n > 0.0) v *= std::pow(rng.uniform(), 1.0 / static_cast<double>(d)) / n;
      return v;
    };
    if (!midpoint_check<double>(in_ball(), in_ball())) ++bad;
  }
  report("uniform convexity", bad == 0, "10000 pairs, " + std::to_string(bad) + " violations");
}

void cnd() {
  double worst = 0.0;
  std::size_t units = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    GenParams p;
    p.units = 1 + seed % 6;
    p.dim = 1 + seed % 4;
    p.field = seed % 3 == 2 ? Field::complex : Field::real;
    const auto sc = gen_scenario(3000 + seed, GenKind::minimal_groupoid, p);
    const auto& g = std::get<FiniteGroupoid>(sc.groupoid);
    std::visit(
        [&](const auto& m) {
          for (UnitId x = 0; x < g.n_units(); ++x, ++units) worst = std::max(worst, check_cnd(g, m.cocycle, x));
        },
        sc.model);
  }
  report("conditionally negative type", worst <= 1e-10,
         "100 cocycles, " + std::to_string(units) + " base units, max violation " + fmt(worst));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void determinism() {
  const fs::path work = fs::temp_directory_path() / ("cocycle_lab_accept_" + std::to_string(::getpid()));
  fs::create_directories(work);
  std::vector<fs::path> inputs;
  for (const auto& e : fs::directory_iterator(COCYCLE_LAB_SCENARIO_DIR))
    if (e.path().extension() == ".scn") inputs.push_back(e.path());
  std::sort(inputs.begin(), inputs.end());
  for (std::uint64_t seed = 0; inputs.size() < 20; ++seed) {
    GenParams p;
    p.units = 3 + seed % 4;
    p.mean = seed % 2 ? 0.25 : 0.0;
    const auto sc = gen_scenario(seed, static_cast<GenKind>(seed % 3), p);
    const fs::path path = work / ("gen" + std::to_string(seed) + ".scn");
    std::ofstream(path, std::ios::binary) << to_text(sc);
    inputs.push_back(path);
  }
  std::size_t differing = 0, failed_runs = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    std::string first;
    for (int rep = 0; rep < 3; ++rep) {
      const fs::path out = work / ("r" + std::to_string(i) + "_" + std::to_string(rep) + ".json");
      const std::string cmd = std::string("\"") + COCYCLE_LAB_CLI + "\" verify \"" + inputs[i].string() +
                              "\" --format machine --out \"" + out.string() + "\" >/dev/null 2>&1";
      const int rc = std::system(cmd.c_str());
      if (rc == -1 || !fs::exists(out)) {
        ++failed_runs;
        continue;
      }
      const std::string bytes = slurp(out);
      if (rep == 0) {
        first = bytes;
      } else if (bytes != first) {
        ++differing;
      }
    }
  }
  fs::remove_all(work);
  report("determinism", inputs.size() == 20 && differing == 0 && failed_runs == 0,
         std::to_string(inputs.size()) + " scenarios x 3 CLI runs, " + std::to_string(differing) +
             " differing reports, " + std::to_string(failed_runs) + " failed runs");
}

void guarded(const std::string& name, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& ex) {
    report(name, false, std::string("threw: ") + ex.what());
  }
}

}  // namespace

int main() {
  std::vector<Scenario> family;
  double gen_secs = 0.0;
  guarded("algebra suite", [&] {
    const auto t0 = Clock::now();
    family = algebra_family();
    gen_secs = seconds_since(t0);
    algebra_suite(family, gen_secs);
  });
  guarded("center solver", [&] { center_solver(family); });
  guarded("MEB oracle equivalence", meb_oracle);
  guarded("MEB equivariance", meb_equivariance);
  guarded("bounded iff coboundary on cycles", dichotomy);
  guarded("growth slope accuracy", growth_slope);
  guarded("hull invariance", hull_invariance);
  guarded("uniform convexity", convexity);
  guarded("conditionally negative type", cnd);
  guarded("determinism", determinism);
  return failures == 0 ? 0 : 1;
}
