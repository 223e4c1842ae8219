#include "rdmc/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <thread>

#include "rdmc/io.hpp"
#include "rdmc/solver.hpp"
#include "rdmc/verify.hpp"

namespace rdmc::sweep {

double zeta(double s, double cutoff) {
  if (s <= cutoff) return 1.0;
  if (s >= 2.0 * cutoff) return 0.0;
  const double x = (s - cutoff) / cutoff;
  return 1.0 - x * x * (3.0 - 2.0 * x);
}

double probe(double s, double kappa, double cutoff) { return std::pow(s, kappa) * zeta(s, cutoff); }

double probe_distance(const Trajectory& a, const Trajectory& b, const GridSpec& grid, std::size_t i, double kappa,
                      double cutoff) {
  if (a.snapshots.size() != b.snapshots.size()) throw ConfigError("runs have different snapshot counts");
  const double T = std::max(a.horizon(), b.horizon());
  for (std::size_t s = 0; s < a.snapshots.size(); ++s)
    if (std::abs(a.snapshots[s].t - b.snapshots[s].t) > 1e-12 * std::max(T, 1.0))
      throw ConfigError("runs have different snapshot times");
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < a.snapshots.size(); ++s) {
    const double dt = a.snapshots[s + 1].t - a.snapshots[s].t;
    const auto& ua = a.snapshots[s].u.at(i);
    const auto& ub = b.snapshots[s].u.at(i);
    double sum = 0.0;
    for (std::size_t c = 0; c < ua.size(); ++c) {
      const double d = probe(ua[c], kappa, cutoff) - probe(ub[c], kappa, cutoff);
      sum += d * d;
    }
    total += dt * sum * grid.cell_volume();
  }
  return std::sqrt(total);
}

const SweepRow& SweepResult::row(std::size_t member, std::size_t species) const {
  const std::size_t n_species = D.empty() ? 0 : rows.size() / D.size();
  return rows.at(member * n_species + species);
}

void validate_eps_list(const std::vector<double>& eps_list) {
  if (eps_list.size() < 3) throw ConfigError("eps_list needs at least three entries");
  for (std::size_t j = 0; j < eps_list.size(); ++j) {
    if (!(eps_list[j] > 0.0 && eps_list[j] < 1.0)) throw ConfigError("eps_list entries must lie in (0, 1)");
    if (j > 0 && !(eps_list[j] < eps_list[j - 1])) throw ConfigError("eps_list must be strictly decreasing");
  }
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Member {
  std::optional<Trajectory> traj;
  std::string error;
  double runtime = 0.0;
};

Member run_member(const RunConfig& config, double eps, const solver::RunOptions& options) {
  Member m;
  const auto start = Clock::now();
  try {
    m.traj = solver::run(config.system, config.grid, config.init, eps, config.T_end, options,
                         verify::standard_accumulators(config.system, config.grid, {}));
  } catch (const solver::SolverError& e) {
    m.error = e.what();
  } catch (const std::exception& e) {
    m.error = e.what();
  }
  m.runtime = seconds_since(start);
  return m;
}

}  // namespace

SweepResult epsilon_sweep(const RunConfig& config, const SweepSpec& spec, const SweepOptions& options) {
  validate_eps_list(spec.eps_list);
  if (options.substeps == 0) throw ConfigError("substeps must be >= 1");
  const std::size_t n = spec.eps_list.size();
  const std::size_t n_species = config.system.size();

  solver::RunOptions base;
  base.safety = config.safety;
  base.dt_max = config.dt_max;
  base.snapshot_every = 1;

  std::vector<Member> members(n);
  Member reference = run_member(config, spec.eps_list.back(), base);
  SweepResult result;
  if (reference.traj) {
    base.schedule = reference.traj->dts;
    result.steps = reference.traj->dts.size();
    base.substeps = options.substeps;
    std::vector<std::size_t> jobs;
    for (std::size_t j = 0; j < n; ++j) {
      if (j + 1 == n && options.substeps == 1)
        members[j] = std::move(reference);
      else
        jobs.push_back(j);
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t k = next++; k < jobs.size(); k = next++)
        members[jobs[k]] = run_member(config, spec.eps_list[jobs[k]], base);
    };
    const std::size_t threads = std::clamp<std::size_t>(options.threads, 1, std::max<std::size_t>(jobs.size(), 1));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
  } else {
    for (auto& m : members) m.error = "reference run failed: " + reference.error;
  }

  // Cutoff from the largest eps run that finished.
  double u_max = 0.0;
  for (const auto& m : members) {
    if (!m.traj) continue;
    for (const auto& snap : m.traj->snapshots)
      for (const auto& f : snap.u)
        for (double v : f) u_max = std::max(u_max, v);
    break;
  }
  result.cutoff = spec.zeta_cutoff > 0.0 ? spec.zeta_cutoff : (u_max > 0.0 ? 2.0 * u_max : 1.0);

  result.D.assign(n, {});
  for (std::size_t j = 0; j < n; ++j) {
    const auto& m = members[j];
    if (!m.traj) result.complete = false;
    if (j > 0) {
      result.D[j].assign(n_species, std::numeric_limits<double>::quiet_NaN());
      if (m.traj && members[j - 1].traj)
        for (std::size_t i = 0; i < n_species; ++i)
          result.D[j][i] = probe_distance(*members[j - 1].traj, *m.traj, config.grid, i,
                                          SweepSpec::kappa(config.system.species(i).m), result.cutoff);
    }
    for (std::size_t i = 0; i < n_species; ++i) {
      SweepRow row;
      row.eps = spec.eps_list[j];
      row.species = i;
      row.runtime_seconds = m.runtime;
      row.error = m.error;
      if (m.traj) {
        row.lp_norm = verify::spacetime_lp(*m.traj, i, config.system.species(i).m + 1.0);
        row.mass_margin = verify::check_mass_bound(*m.traj, config.grid, config.system.weights(), config.system.K(),
                                                   config.tolerances.mass)
                              .margin;
      } else {
        row.lp_norm = row.mass_margin = std::numeric_limits<double>::quiet_NaN();
      }
      if (j > 0) row.D_to_previous = result.D[j][i];
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "eps,species,lp_norm,mass_margin,D_to_previous,runtime_seconds\n";
  for (const auto& r : result.rows) {
    char runtime[32];
    std::snprintf(runtime, sizeof runtime, "%.6f", r.runtime_seconds);
    out << io::format_double(r.eps) << ',' << r.species + 1 << ',' << io::format_double(r.lp_norm) << ','
        << io::format_double(r.mass_margin) << ',' << (r.D_to_previous ? io::format_double(*r.D_to_previous) : "")
        << ',' << runtime << '\n';
  }
}

Field restrict_average(const Field& fine, const GridSpec& fine_grid, std::size_t ratio) {
  if (ratio == 0) throw ConfigError("restriction ratio must be positive");
  std::vector<std::size_t> coarse_cells;
  for (std::size_t n : fine_grid.cells()) {
    if (n % ratio != 0) throw ConfigError("fine grid is not divisible by the restriction ratio");
    coarse_cells.push_back(n / ratio);
  }
  const GridSpec coarse(fine_grid.lengths(), coarse_cells);
  Field out(coarse.cell_count(), 0.0);
  for (std::size_t c = 0; c < fine.size(); ++c) {
    std::size_t target = 0;
    for (std::size_t a = 0; a < fine_grid.dim(); ++a) target += fine_grid.axis_index(c, a) / ratio * coarse.stride(a);
    out[target] += fine[c];
  }
  const double scale = 1.0 / std::pow(static_cast<double>(ratio), static_cast<double>(fine_grid.dim()));
  for (double& v : out) v *= scale;
  return out;
}

std::vector<RefinementLevel> grid_refinement(const RunConfig& config, std::vector<std::size_t> factors,
                                             const std::optional<ExactSolution>& exact) {
  std::sort(factors.begin(), factors.end());
  factors.erase(std::unique(factors.begin(), factors.end()), factors.end());
  if (factors.empty()) throw ConfigError("grid refinement needs at least one factor");
  for (std::size_t f : factors)
    if (f != 2 && f != 4 && f != 8) throw ConfigError("refinement factors must be 2, 4 or 8");
  factors.insert(factors.begin(), 1);

  std::vector<RefinementLevel> levels;
  std::vector<FieldState> finals;
  std::vector<GridSpec> grids;
  solver::RunOptions options;
  options.safety = config.safety;
  options.dt_max = config.dt_max;
  options.snapshot_every = 0;
  for (std::size_t f : factors) {
    std::vector<std::size_t> cells;
    for (std::size_t n : config.grid.cells()) cells.push_back(n * f);
    GridSpec grid(config.grid.lengths(), cells);
    auto traj = solver::run(config.system, grid, config.init, config.eps, config.T_end, options);
    finals.push_back(traj.snapshots.back());
    grids.push_back(grid);
    levels.push_back({f, cells, std::nullopt, std::nullopt});
  }

  for (std::size_t k = 0; k < levels.size(); ++k) {
    const auto& grid = grids[k];
    const auto& state = finals[k];
    double sum = 0.0;
    if (exact) {
      for (std::size_t i = 0; i < state.u.size(); ++i)
        for (std::size_t c = 0; c < grid.cell_count(); ++c) {
          const double d = state.u[i][c] - (*exact)(i, grid.center(c), state.t);
          sum += d * d;
        }
      levels[k].error = std::sqrt(sum * grid.cell_volume());
    } else if (k > 0) {
      const std::size_t ratio = levels[k].factor / levels[k - 1].factor;
      for (std::size_t i = 0; i < state.u.size(); ++i) {
        const auto coarse = restrict_average(state.u[i], grid, ratio);
        for (std::size_t c = 0; c < coarse.size(); ++c) {
          const double d = coarse[c] - finals[k - 1].u[i][c];
          sum += d * d;
        }
      }
      levels[k].error = std::sqrt(sum * grids[k - 1].cell_volume());
    }
    if (k > 0 && levels[k].error && levels[k - 1].error && *levels[k].error > 0.0 && *levels[k - 1].error > 0.0) {
      const double ratio = static_cast<double>(levels[k].factor) / static_cast<double>(levels[k - 1].factor);
      levels[k].order = std::log(*levels[k - 1].error / *levels[k].error) / std::log(ratio);
    }
  }
  return levels;
}

}  // namespace rdmc::sweep
