// Desk-scale acceptance suite. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rdmc/config.hpp"
#include "rdmc/reactions.hpp"
#include "rdmc/solver.hpp"
#include "rdmc/sweep.hpp"
#include "rdmc/verify.hpp"

using namespace rdmc;

namespace {

using Clock = std::chrono::steady_clock;

const std::vector<std::string> kAdmissible = {"reversible_ok",      "cross_absorb2_power", "cross_absorb2_expm1",
                                              "cross_absorb2_slog1p", "power_law2",        "lotka_volterra"};
const std::vector<std::string> kRenormFixtures = {"reversible_ok", "cross_absorb2_power", "power_law2",
                                                  "lotka_volterra"};

nlohmann::json fixture_json(const std::string& name) {
  std::ifstream in(std::string(RDMC_FIXTURES_DIR) + "/" + name + ".json");
  if (!in) throw std::runtime_error("missing fixture " + name);
  return nlohmann::json::parse(in);
}

RunConfig fixture_config(const std::string& name, double T, std::size_t cells, double eps) {
  auto doc = fixture_json(name);
  doc["T_end"] = T;
  doc["grid"]["cells"] = nlohmann::json::array({cells});
  doc["eps"] = eps;
  return parse_config(doc);
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double min_value(const Trajectory& traj) {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& snap : traj.snapshots)
    for (const auto& f : snap.u) lo = std::min(lo, *std::min_element(f.begin(), f.end()));
  return lo;
}

struct Outcome {
  bool passed = true;
  std::string detail;
};

struct Report {
  int failures = 0;
  void line(int n, const std::string& name, const Outcome& o) {
    std::cout << "criterion " << n << " [" << name << "]: " << (o.passed ? "PASS" : "FAIL") << "  " << o.detail
              << std::endl;
    if (!o.passed) ++failures;
  }
  void run(int n, const std::string& name, const std::function<Outcome()>& body) {
    try {
      line(n, name, body());
    } catch (const std::exception& e) {
      line(n, name, {false, std::string("exception: ") + e.what()});
    }
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Full-resolution runs of the admissible fixtures, shared by criteria 1, 3 and 5.
struct SuiteRun {
  std::string name;
  RunConfig cfg;
  Trajectory traj;
};

std::vector<SuiteRun> run_suite(double& seconds) {
  const auto start = Clock::now();
  std::vector<SuiteRun> runs;
  for (const auto& name : kAdmissible) {
    auto cfg = fixture_config(name, 1.0, 64, 0.1);
    solver::RunOptions o;
    o.safety = cfg.safety;
    o.snapshot_every = 1;
    auto acc = cfg.accumulator_options();
    acc.rho_specs.clear();  // the renormalized checks have their own runs
    auto traj = solver::run(cfg.system, cfg.grid, cfg.init, cfg.eps, cfg.T_end, o,
                            verify::standard_accumulators(cfg.system, cfg.grid, acc));
    runs.push_back({name, std::move(cfg), std::move(traj)});
  }
  seconds = seconds_since(start);
  return runs;
}

Outcome mass_bound(const std::vector<SuiteRun>& runs, double seconds) {
  Outcome o;
  std::ostringstream d;
  for (const auto& r : runs) {
    const auto rec = verify::check_mass_bound(r.traj, r.cfg.grid, r.cfg.system.weights(), r.cfg.system.K(), 1e-8);
    o.passed = o.passed && rec.passed;
    if (!rec.passed) d << r.name << " violates; ";
  }
  const bool fast = seconds <= 30.0;
  o.passed = o.passed && fast;
  d << runs.size() << " fixtures, 64 cells, T=1, eps=0.1, runtime " << fmt("%.1f", seconds) << " s (limit 30 s)";
  o.detail = d.str();
  return o;
}

Outcome conservation() {
  const auto cfg = fixture_config("reversible_ok", 1.0, 64, 0.1);
  FieldState s{0.0, cfg.eps, cfg.init.generate(cfg.grid)};
  const auto& a = cfg.system.weights();
  const double w0 = verify::weighted_mass(s, cfg.grid, a);
  double worst = 0.0;
  constexpr int kSteps = 10000;
  for (int n = 0; n < kSteps; ++n) {
    s = solver::step(s, cfg.system, cfg.grid, solver::stable_dt(s, cfg.system, cfg.grid, cfg.safety));
    worst = std::max(worst, std::abs(verify::weighted_mass(s, cfg.grid, a) - w0) / w0);
  }
  return {worst <= 1e-10, "max relative drift " + fmt("%.2e", worst) + " over 10000 steps (limit 1e-10)"};
}

Outcome positivity(const std::vector<SuiteRun>& runs) {
  double lo = std::numeric_limits<double>::infinity();
  std::size_t snapshots = 0;
  for (const auto& r : runs) {
    lo = std::min(lo, min_value(r.traj));
    snapshots += r.traj.snapshots.size();
  }
  // Stress case: the full suite again from sparse random data with exact zeros.
  for (const auto& name : kAdmissible) {
    const auto cfg = fixture_config(name, 0.2, 64, 0.1);
    std::vector<Field> u0;
    for (std::size_t i = 0; i < cfg.system.size(); ++i) {
      auto f = InitialData{{RandomInit{cfg.seed + i, 0.0, 3.0}}}.generate(cfg.grid)[0];
      for (std::size_t c = i; c < f.size(); c += 3) f[c] = 0.0;
      u0.push_back(f);
    }
    solver::RunOptions o;
    o.snapshot_every = 1;
    const auto traj = solver::run(cfg.system, cfg.grid, u0, cfg.eps, cfg.T_end, o);
    lo = std::min(lo, min_value(traj));
    snapshots += traj.snapshots.size();
  }
  return {lo >= 0.0, "min value " + fmt("%.3e", lo) + " over " + std::to_string(snapshots) + " snapshots"};
}

// Sum over species and (rho, phi) pairs of |residual|, plus the verdict count.
struct RenormSummary {
  std::size_t checks = 0, failed = 0;
  double magnitude = 0.0;
  double worst_ratio = -std::numeric_limits<double>::infinity();
};

RenormSummary renorm_suite(const std::string& name, std::size_t cells) {
  const auto cfg = fixture_config(name, 0.5, cells, 0.1);
  solver::RunOptions o;
  o.safety = cfg.safety;
  o.snapshot_every = 0;
  const auto traj = solver::run(cfg.system, cfg.grid, cfg.init, cfg.eps, cfg.T_end, o,
                                verify::standard_accumulators(cfg.system, cfg.grid, cfg.accumulator_options()));
  RenormSummary s;
  for (std::size_t i = 0; i < cfg.system.size(); ++i)
    for (const auto& rho : cfg.rho_specs)
      for (const auto& phi : cfg.phi_specs) {
        const auto rec = verify::renorm_residual(traj, cfg.grid, i, rho, phi, cfg.tolerances.renorm_C);
        ++s.checks;
        if (!rec.passed) ++s.failed;
        s.magnitude += std::abs(rec.value);
        if (rec.bound && *rec.bound > 0.0) s.worst_ratio = std::max(s.worst_ratio, rec.value / *rec.bound);
      }
  return s;
}

Outcome renormalized() {
  const auto start = Clock::now();
  Outcome o;
  std::ostringstream d;
  std::size_t checks = 0, failed = 0;
  double worst_ratio = -std::numeric_limits<double>::infinity();
  double min_shrink = std::numeric_limits<double>::infinity();
  for (const auto& name : kRenormFixtures) {
    const auto coarse = renorm_suite(name, 64);
    const auto fine = renorm_suite(name, 256);
    checks += coarse.checks;
    failed += coarse.failed;
    worst_ratio = std::max(worst_ratio, coarse.worst_ratio);
    const double shrink = fine.magnitude > 0.0 ? coarse.magnitude / fine.magnitude
                                               : std::numeric_limits<double>::infinity();
    min_shrink = std::min(min_shrink, shrink);
    d << name << " shrink " << fmt("%.2f", shrink) << "; ";
  }
  const double seconds = seconds_since(start);
  o.passed = failed == 0 && min_shrink >= 2.5 && seconds <= 300.0;
  d << failed << "/" << checks << " residuals over tolerance (4 fixtures x 3 rho x 4 phi x species), worst residual/bound "
    << fmt("%.3f", worst_ratio) << ", min shrink "
    << fmt("%.2f", min_shrink) << " (need 2.5), runtime " << fmt("%.1f", seconds) << " s";
  o.detail = d.str();
  return o;
}

Outcome mass_subsolution(const std::vector<SuiteRun>& runs) {
  Outcome o;
  std::ostringstream d;
  std::size_t count = 0;
  auto check = [&](const std::string& name, const RunConfig& cfg, const Trajectory& traj) {
    const auto rec = verify::mass_subsolution_residual(traj, cfg.grid, cfg.system.weights(),
                                                       cfg.tolerances.mass_sub_C);
    ++count;
    if (!rec.passed) {
      o.passed = false;
      d << name << " residual " << fmt("%.3e", rec.value) << "; ";
    }
  };
  for (const auto& r : runs) check(r.name, r.cfg, r.traj);
  const auto heat = fixture_config("heat_cosine", 0.5, 64, 0.1);
  solver::RunOptions opt;
  opt.snapshot_every = 1;
  check("heat_cosine", heat,
        solver::run(heat.system, heat.grid, heat.init, heat.eps, heat.T_end, opt,
                    verify::standard_accumulators(heat.system, heat.grid, heat.accumulator_options())));
  d << count << " fixtures, every snapshot";
  o.detail = d.str();
  return o;
}

const std::vector<double> kEpsList = {0.2, 0.1, 0.05, 0.025};

double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (*hi == 0.0) return 1.0;
  return *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
}

Outcome eps_uniformity() {
  auto base = fixture_config("reversible_ok", 1.0, 64, 0.1);
  const std::size_t n = base.system.size();
  std::vector<std::vector<double>> lp(n);
  std::vector<std::vector<std::vector<double>>> dir(n), react(n);
  for (std::size_t i = 0; i < n; ++i) {
    dir[i].resize(base.truncation_levels.size());
    react[i].resize(base.truncation_levels.size());
  }
  for (double eps : kEpsList) {
    solver::RunOptions o;
    o.safety = base.safety;
    o.snapshot_every = 0;
    const auto traj = solver::run(base.system, base.grid, base.init, eps, base.T_end, o,
                                  verify::standard_accumulators(base.system, base.grid, base.accumulator_options()));
    const double T = traj.horizon();
    for (std::size_t i = 0; i < n; ++i) {
      lp[i].push_back(verify::spacetime_lp(traj, i, base.system.species(i).m + 1.0));
      for (std::size_t l = 0; l < base.truncation_levels.size(); ++l) {
        dir[i][l].push_back(verify::truncated_dirichlet(traj, i, base.truncation_levels[l]) / T);
        react[i][l].push_back(verify::truncated_reaction(traj, i, base.truncation_levels[l]) / T);
      }
    }
  }
  double worst_lp = 0.0, worst_trunc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    worst_lp = std::max(worst_lp, spread(lp[i]));
    for (std::size_t l = 0; l < base.truncation_levels.size(); ++l)
      worst_trunc = std::max({worst_trunc, spread(dir[i][l]), spread(react[i][l])});
  }
  return {worst_lp <= 2.0 && worst_trunc <= 3.0,
          "Lp spread " + fmt("%.3f", worst_lp) + " (limit 2), truncated spread " + fmt("%.3f", worst_trunc) +
              " (limit 3), eps in {0.2, 0.1, 0.05, 0.025}"};
}

bool strictly_decreasing(const sweep::SweepResult& r, std::string& text) {
  bool ok = r.complete;
  std::ostringstream d;
  for (std::size_t i = 0; i < r.D[1].size(); ++i) {
    d << "i=" << i + 1 << ":";
    for (std::size_t j = 1; j < r.D.size(); ++j) {
      d << ' ' << fmt("%.3e", r.D[j][i]);
      if (j > 1) ok = ok && r.D[j][i] < r.D[j - 1][i];
    }
    d << "; ";
  }
  text = d.str();
  return ok;
}

Outcome compactness() {
  const auto cfg = fixture_config("reversible_ok", 1.0, 64, 0.1);
  const SweepSpec spec{kEpsList, 0.0};
  std::string base_text, half_text;
  const bool base = strictly_decreasing(sweep::epsilon_sweep(cfg, spec, {1, 1}), base_text);
  const bool half = strictly_decreasing(sweep::epsilon_sweep(cfg, spec, {1, 2}), half_text);
  return {base && half, "D " + base_text + "with halved dt " + half_text};
}

Outcome oracles() {
  std::vector<std::string> bad;
  const auto rho = verify::build_rho({1.0, 2});
  if (std::abs(verify::compute_P1(rho, 1.0, 0.0, 1.0) - 2.0 * std::sqrt(2.0) / 3.0) > 1e-8) bad.push_back("P1");
  if (std::abs(verify::compute_P2(rho, 2.0, 0.0, 1.0) + 1.0 / 12.0) > 1e-8) bad.push_back("P2");
  for (double s : {0.0, 0.25, 0.5, 1.0, 2.0})
    if (std::abs(verify::compute_P2(rho, 1.0, 0.0, s) - (rho.rho(s) - rho.rho(0.0))) > 1e-8) bad.push_back("P2 m=1");

  // Single cell: the solver is explicit Euler on the regularized ODE.
  const std::vector<SpeciesParams> sp{{1, 1}, {0.5, 1}};
  const ReactionFamily fam = Reversible{{2, 1}, {1, 2}, 1, 1};
  const ReactionSystem sys(sp, fam, {1, 1}, 0.0, reactions::default_growth(fam, sp));
  const auto g1 = GridSpec::interval(1.0, 1);
  const auto next = solver::step({0.0, 0.25, {{2.0}, {1.0}}}, sys, g1, 0.1);
  if (std::abs(next.u[0][0] - 1.9) > 4e-16 || std::abs(next.u[1][0] - 1.1) > 4e-16) bad.push_back("Euler step");
  solver::RunOptions o;
  o.snapshot_every = 1;
  const auto traj = solver::run(sys, g1, std::vector<Field>{{2.0}, {0.5}}, 0.1, 0.5, o);
  std::vector<double> u{2.0, 0.5};
  for (std::size_t n = 0; n < traj.dts.size(); ++n) {
    auto f = reactions::regularize(reactions::eval(fam, u), 0.1);
    for (std::size_t i = 0; i < 2; ++i) u[i] += traj.dts[n] * f[i];
    if (traj.snapshots[n + 1].u[0][0] != u[0] || traj.snapshots[n + 1].u[1][0] != u[1]) {
      bad.push_back("Euler run");
      break;
    }
  }

  const auto g3 = GridSpec::interval(3.0, 3);
  if (solver::discrete_laplacian_neumann(Field{0, 1, 0}, g3) != Field{1, -2, 1}) bad.push_back("Laplacian");
  if (solver::discrete_laplacian_neumann(Field{1, 2, 3}, g3) != Field{1, 0, -1}) bad.push_back("Laplacian");

  std::string detail = bad.empty() ? "primitives, single-cell Euler and stencils match" : "mismatch:";
  for (const auto& b : bad) detail += " " + b;
  return {bad.empty(), detail};
}

Outcome validators() {
  using reactions::validate_lv;
  using reactions::validate_reversible;
  const double m[] = {1, 1}, a[] = {1, 1}, gamma[] = {0, 0};
  const double p1[] = {2, 1}, q1[] = {1, 2};
  const double p2[] = {3, 2}, q2[] = {1, 4};
  const double p3[] = {2, 3};
  const std::vector<std::pair<bool, bool>> table = {
      {validate_reversible(p1, q1, m, a).accepted, true},
      {validate_reversible(p2, q2, m, a).accepted, false},
      {validate_reversible(p3, p3, m, a).accepted, true},
      {validate_lv({{0, -1}, {1, 0}}, {{1, 1.5}, {1, 1}}, m, gamma).accepted, true},
      {validate_lv({{0, -1}, {1, 0}}, {{1, 2}, {1, 1}}, m, gamma).accepted, false},
      {validate_lv({{0, 0}, {0, 0}}, {{1, 1}, {1, 1}}, m, gamma).accepted, true},
  };
  std::size_t agree = 0;
  for (const auto& [got, want] : table) agree += got == want;
  return {agree == table.size(), std::to_string(agree) + "/6 verdicts as expected"};
}

Outcome heat_order() {
  auto doc = fixture_json("heat_cosine");
  doc["grid"]["cells"] = nlohmann::json::array({16});
  doc["T_end"] = 0.1;
  const auto cfg = parse_config(doc);
  const auto levels = sweep::grid_refinement(cfg, {2, 4, 8}, [](std::size_t, const std::array<double, 2>& x, double t) {
    return 1.0 + 0.5 * std::cos(M_PI * x[0]) * std::exp(-M_PI * M_PI * t);
  });
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < levels.size(); ++k) worst = std::min(worst, levels[k].order.value_or(0.0));
  return {worst >= 1.8, "min observed order " + fmt("%.3f", worst) + " over 16..128 cells (need 1.8)"};
}

}  // namespace

int main() {
  Report report;
  double suite_seconds = 0.0;
  std::vector<SuiteRun> runs;
  try {
    runs = run_suite(suite_seconds);
  } catch (const std::exception& e) {
    std::cout << "fixture suite failed to run: " << e.what() << std::endl;
  }
  const bool have_runs = runs.size() == kAdmissible.size();
  auto need_runs = [&](const std::function<Outcome()>& body) {
    return [&, body] { return have_runs ? body() : Outcome{false, "fixture suite did not run"}; };
  };

  report.run(1, "mass bound", need_runs([&] { return mass_bound(runs, suite_seconds); }));
  report.run(2, "exact conservation", conservation);
  report.run(3, "positivity", need_runs([&] { return positivity(runs); }));
  report.run(4, "renormalized supersolution", renormalized);
  report.run(5, "mass subsolution", need_runs([&] { return mass_subsolution(runs); }));
  report.run(6, "eps uniformity", eps_uniformity);
  report.run(7, "compactness", compactness);
  report.run(8, "oracles", oracles);
  report.run(9, "validator truth table", validators);
  report.run(10, "heat order", heat_order);

  std::cout << (report.failures == 0 ? "all criteria pass" : std::to_string(report.failures) + " criteria fail")
            << std::endl;
  return report.failures == 0 ? 0 : 1;
}
