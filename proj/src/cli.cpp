#include "rdmc/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rdmc/config.hpp"
#include "rdmc/io.hpp"
#include "rdmc/reactions.hpp"
#include "rdmc/solver.hpp"
#include "rdmc/sweep.hpp"
#include "rdmc/verify.hpp"

namespace rdmc::cli {

namespace fs = std::filesystem;

namespace {

const char* const kDefaultOut = "rdmc_out";

fs::path out_dir(const Options& opts) { return opts.out ? fs::path(*opts.out) : fs::path(kDefaultOut); }

/// Creates the directory and proves it is writable; throws ConfigError otherwise.
void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
  const auto probe = dir / ".rdmc_write_test";
  {
    std::ofstream f(probe);
    if (!f) throw ConfigError("output directory '" + dir.string() + "' is not writable");
  }
  fs::remove(probe, ec);
}

reactions::ConditionReport from_validation(const std::string& name, const reactions::Validation& v) {
  reactions::ConditionReport r;
  r.condition = name;
  r.passed = v.accepted;
  r.worst_value = -static_cast<double>(v.reasons.size());
  for (std::size_t k = 0; k < v.reasons.size(); ++k) r.note += (k ? "; " : "") + v.reasons[k];
  return r;
}

reactions::Validation validate_cross_absorb(const CrossAbsorb2& f, const std::vector<SpeciesParams>& sp) {
  reactions::Validation v;
  const double beta[2] = {f.beta1, f.beta2};
  for (std::size_t i = 0; i < 2; ++i) {
    if (!(beta[i] < sp[i].m + 1.0)) {
      v.accepted = false;
      std::ostringstream os;
      os << "cross exponent bound violated at i=" << i + 1 << ": beta=" << beta[i] << " must be < m+1=" << sp[i].m + 1.0;
      v.reasons.push_back(os.str());
    }
  }
  if (!(f.lambda >= 0.0 && f.lambda <= 1.0)) {
    v.accepted = false;
    v.reasons.push_back("lambda must lie in [0, 1]");
  }
  return v;
}

std::optional<reactions::Validation> admissibility(const RunConfig& cfg, std::string& name) {
  const auto& sp = cfg.system.species();
  std::vector<double> m;
  for (const auto& s : sp) m.push_back(s.m);
  return std::visit(
      [&](const auto& f) -> std::optional<reactions::Validation> {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Reversible>) {
          name = "admissibility:reversible";
          return reactions::validate_reversible(f.p, f.q, m, cfg.system.weights());
        } else if constexpr (std::is_same_v<T, LotkaVolterra>) {
          name = "admissibility:lotka_volterra";
          return reactions::validate_lv(f.A, f.B, m, f.gamma);
        } else if constexpr (std::is_same_v<T, CrossAbsorb2>) {
          name = "admissibility:cross_absorb2";
          return validate_cross_absorb(f, sp);
        } else {
          name = "admissibility:power_law2";
          return validate_cross_absorb(reactions::as_cross_absorb(f), sp);
        }
      },
      cfg.system.family());
}

verify::EstimateRecord measured(std::string id, std::size_t i, double T, double value) {
  return {std::move(id), i, T, value, std::nullopt, 0.0, true};
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const io::FormatError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    err << "input error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFail;
  }
}

}  // namespace

std::size_t resolve_threads(std::optional<std::size_t> flag) {
  if (flag && *flag > 0) return *flag;
  if (const char* env = std::getenv("RDMC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return 1;
}

int cmd_check(const Options& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = load_config(opts.config, opts.seed);
    const auto samples = reactions::generate_samples(cfg.system.size(), cfg.samples);
    std::vector<reactions::ConditionReport> reports;
    reports.push_back(reactions::check_quasipositivity(cfg.system.family(), samples));
    reports.push_back(reactions::check_mass_control(
        cfg.system.family(), cfg.system.weights(), samples,
        cfg.K_from_config ? std::optional<double>(cfg.system.K()) : std::nullopt));
    auto cross = reactions::check_cross_absorption(cfg.system, samples);
    if (!cfg.growth_from_config) cross.note += (cross.note.empty() ? "" : "; ") + std::string("default majorants");
    reports.push_back(std::move(cross));
    std::string name;
    if (auto v = admissibility(cfg, name)) reports.push_back(from_validation(name, *v));

    bool ok = true;
    for (const auto& r : reports) {
      out << r.to_text();
      ok = ok && r.passed;
    }
    if (opts.out) {
      prepare_dir(*opts.out);
      std::ofstream csv(fs::path(*opts.out) / "conditions.csv");
      io::write_condition_header(csv);
      for (const auto& r : reports) io::write_condition_row(csv, r);
    }
    out << (ok ? "all conditions hold\n" : "condition check failed\n");
    return ok ? kExitPass : kExitFail;
  });
}

int cmd_run(const Options& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = load_config(opts.config, opts.seed);
    const auto dir = out_dir(opts);
    prepare_dir(dir / "snapshots");
    const auto hash = params_hash(cfg.raw);

    solver::RunOptions options;
    options.safety = cfg.safety;
    options.dt_max = cfg.dt_max;
    options.snapshot_every = cfg.snapshot_every;
    Trajectory traj;
    try {
      traj = solver::run(cfg.system, cfg.grid, cfg.init, cfg.eps, cfg.T_end, options,
                         verify::standard_accumulators(cfg.system, cfg.grid, cfg.accumulator_options()));
    } catch (const solver::SolverError& e) {
      io::write_snapshot(dir / "snapshots" / "abort.bin", e.last_state, cfg.grid);
      err << "solver aborted: " << e.what() << " (last state written to snapshots/abort.bin)\n";
      return kExitFail;
    }

    std::vector<std::string> files;
    for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
      const auto name = io::snapshot_name(s);
      io::write_snapshot(dir / "snapshots" / name, traj.snapshots[s], cfg.grid);
      if (cfg.csv_mirror) {
        auto csv_name = name.substr(0, name.size() - 4) + ".csv";
        io::write_snapshot_csv(dir / "snapshots" / csv_name, traj.snapshots[s], cfg.grid);
      }
      files.push_back("snapshots/" + name);
    }
    {
      std::ofstream meta(dir / "trajectory.json");
      meta << io::trajectory_to_json(traj, files).dump(1) << '\n';
    }

    auto csv = io::open_estimate_csv(dir / "diagnostics.csv", false);
    bool ok = true;
    for (const auto& rec : verify::mass_bound_series(traj, cfg.grid, cfg.system.weights(), cfg.system.K(),
                                                     cfg.tolerances.mass)) {
      io::write_estimate_row(csv, rec, hash);
      ok = ok && rec.passed;
    }
    out << "run finished: " << traj.steps << " steps, " << traj.snapshots.size() << " snapshots, T = "
        << traj.horizon() << '\n';
    out << (ok ? "mass bound holds\n" : "mass bound violated\n");
    return ok ? kExitPass : kExitFail;
  });
}

int cmd_verify(const Options& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = load_config(opts.config, opts.seed);
    const auto dir = out_dir(opts);
    const auto traj = io::load_trajectory(dir, cfg.grid);
    const auto hash = params_hash(cfg.raw);
    const auto& sys = cfg.system;
    const auto& a = sys.weights();

    std::vector<verify::EstimateRecord> records;
    records.push_back(verify::check_mass_bound(traj, cfg.grid, a, sys.K(), cfg.tolerances.mass));
    records.push_back(verify::mass_subsolution_residual(traj, cfg.grid, a, cfg.tolerances.mass_sub_C));
    const double T = traj.horizon();
    for (std::size_t i = 0; i < sys.size(); ++i) {
      const double p = sys.species(i).m + 1.0;
      records.push_back(measured("spacetime_lp:p=" + io::format_double(p), i, T, verify::spacetime_lp(traj, i, p)));
      for (double M : cfg.truncation_levels) {
        records.push_back(measured("truncated_dirichlet:M=" + io::format_double(M), i, T,
                                   verify::truncated_dirichlet(traj, i, M)));
        records.push_back(measured("truncated_reaction:M=" + io::format_double(M), i, T,
                                   verify::truncated_reaction(traj, i, M)));
      }
      const auto& phi = sys.growth()[i].phi;
      const auto pf = verify::phi_functional(i, [&](double s) { return phi(s); }, traj.snapshots.back(), cfg.grid);
      records.push_back({"phi_functional", i, T, pf.value, 0.0, pf.worst_margin, pf.passed});
      if (T > 0.0)
        for (const auto& rho : cfg.rho_specs)
          for (const auto& phi_spec : cfg.phi_specs)
            records.push_back(verify::renorm_residual(traj, cfg.grid, i, rho, phi_spec, cfg.tolerances.renorm_C));
    }

    auto csv = io::open_estimate_csv(dir / "diagnostics.csv", true);
    std::size_t failed = 0;
    for (const auto& rec : records) {
      io::write_estimate_row(csv, rec, hash);
      if (!rec.passed) {
        ++failed;
        out << "FAIL " << rec.id << (rec.species ? " i=" + std::to_string(*rec.species + 1) : "")
            << " value=" << io::format_double(rec.value)
            << (rec.bound ? " bound=" + io::format_double(*rec.bound) : "") << '\n';
      }
    }
    out << records.size() - failed << "/" << records.size() << " estimates pass\n";
    return failed == 0 ? kExitPass : kExitFail;
  });
}

int cmd_sweep(const Options& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = load_config(opts.config, opts.seed);
    SweepSpec spec{cfg.eps_list, 0.0};
    sweep::validate_eps_list(spec.eps_list);
    const auto dir = out_dir(opts);
    prepare_dir(dir);
    const auto result = sweep::epsilon_sweep(cfg, spec, {opts.threads, 1});
    {
      std::ofstream csv(dir / "sweep.csv");
      sweep::write_sweep_csv(csv, result);
    }
    bool ok = result.complete;
    for (const auto& row : result.rows) {
      if (!row.error.empty()) err << "eps=" << row.eps << ": " << row.error << '\n';
      if (!(row.mass_margin >= 0.0)) ok = false;
    }
    out << "sweep over " << spec.eps_list.size() << " eps values, " << result.steps << " shared steps\n";
    out << (ok ? "sweep complete\n" : "sweep incomplete or mass bound violated\n");
    return ok ? kExitPass : kExitFail;
  });
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"rdmc: reaction-diffusion simulator with porous-medium diffusion and estimate checks"};
  std::string command;
  Options opts;
  std::optional<std::size_t> threads;
  app.add_option("command", command, "check | run | verify | sweep")
      ->required()
      ->check(CLI::IsMember({"check", "run", "verify", "sweep"}));
  app.add_option("config", opts.config, "JSON configuration file")->required();
  app.add_option("--out", opts.out, "output (run, sweep) or trajectory (verify) directory");
  app.add_option("--seed", opts.seed, "override the config seed");
  app.add_option("--threads", threads, "worker threads (default: RDMC_THREADS or 1)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n' << "usage: rdmc check|run|verify|sweep <config> [--out DIR] [--seed N] [--threads N]\n";
    return kExitUsage;
  }
  opts.threads = resolve_threads(threads);
  if (command == "check") return cmd_check(opts, out, err);
  if (command == "run") return cmd_run(opts, out, err);
  if (command == "verify") return cmd_verify(opts, out, err);
  return cmd_sweep(opts, out, err);
}

}  // namespace rdmc::cli
