#include "rdmc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rdmc/reactions.hpp"

namespace rdmc::solver {

namespace {

/// Calls fn(lower, upper) for every interior face, lower/upper being flat cell indices.
template <class Fn>
void for_each_face(const GridSpec& grid, std::size_t axis, Fn&& fn) {
  const std::size_t stride = grid.stride(axis);
  const std::size_t n_axis = grid.cells()[axis];
  const std::size_t outer = grid.cell_count() / (n_axis * stride);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t k = 0; k + 1 < n_axis; ++k) {
      const std::size_t base = o * n_axis * stride + k * stride;
      for (std::size_t s = 0; s < stride; ++s) fn(base + s, base + s + stride);
    }
  }
}

double inverse_h2_sum(const GridSpec& grid) {
  double s = 0.0;
  for (double h : grid.h()) s += 1.0 / (h * h);
  return s;
}

void check_state(const FieldState& state, const ReactionSystem& system, const GridSpec& grid) {
  if (state.u.size() != system.size())
    throw ConfigError("state has " + std::to_string(state.u.size()) + " species, system has " +
                      std::to_string(system.size()));
  for (const auto& f : state.u)
    if (f.size() != grid.cell_count()) throw ConfigError("state field size does not match the grid");
  if (!(state.eps >= 0.0 && state.eps < 1.0)) throw ConfigError("regularization level must lie in [0, 1)");
}

}  // namespace

Field discrete_laplacian_neumann(std::span<const double> field, const GridSpec& grid) {
  if (field.size() != grid.cell_count()) throw ConfigError("field size does not match the grid");
  Field lap(field.size(), 0.0);
  for (std::size_t axis = 0; axis < grid.dim(); ++axis) {
    const double inv_h2 = 1.0 / (grid.h(axis) * grid.h(axis));
    for_each_face(grid, axis, [&](std::size_t lo, std::size_t hi) {
      const double flux = (field[hi] - field[lo]) * inv_h2;
      lap[lo] += flux;
      lap[hi] -= flux;
    });
  }
  return lap;
}

std::vector<Field> regularized_reaction(const FieldState& state, const ReactionSystem& system) {
  const std::size_t n = system.size();
  const std::size_t cells = state.u.empty() ? 0 : state.u[0].size();
  std::vector<Field> out(n, Field(cells, 0.0));
  std::vector<double> s(n), f(n);
  for (std::size_t c = 0; c < cells; ++c) {
    for (std::size_t i = 0; i < n; ++i) s[i] = state.u[i][c];
    reactions::eval_into(system.family(), s, f);
    reactions::regularize_inplace(f, state.eps);
    for (std::size_t i = 0; i < n; ++i) out[i][c] = f[i];
  }
  return out;
}

StepLimits step_limits(const FieldState& state, const ReactionSystem& system, const GridSpec& grid,
                       std::span<const Field> reaction) {
  const double inv_h2 = inverse_h2_sum(grid);
  const double eps = state.eps;
  StepLimits lim{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < system.size(); ++i) {
    const auto& sp = system.species(i);
    const double w0 = std::pow(eps, sp.m);
    double slope_max = 0.0;
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
      const double u = state.u[i][c];
      slope_max = std::max(slope_max, sp.m * std::pow(u + eps, sp.m - 1.0));
      // Worst-case decrease: every neighbour at w(0) plus the reactive loss.
      const double rate = sp.d * 2.0 * inv_h2 * (std::pow(u + eps, sp.m) - w0) + std::max(0.0, -reaction[i][c]);
      if (rate > 0.0) lim.positivity = std::min(lim.positivity, kPositivityFraction * u / rate);
    }
    if (grid.cell_count() > 1 && slope_max > 0.0)
      lim.diffusion = std::min(lim.diffusion, 1.0 / (2.0 * inv_h2 * sp.d * slope_max));
  }
  return lim;
}

double stable_dt(const FieldState& state, const ReactionSystem& system, const GridSpec& grid, double safety,
                 double dt_max) {
  if (!(safety > 0.0 && safety <= 1.0)) throw ConfigError("safety factor must lie in (0, 1]");
  check_state(state, system, grid);
  const auto reaction = regularized_reaction(state, system);
  const auto lim = step_limits(state, system, grid, reaction);
  return std::min({safety * lim.diffusion, lim.positivity, dt_max});
}

FieldState step(const FieldState& state, const ReactionSystem& system, const GridSpec& grid, double dt) {
  check_state(state, system, grid);
  const auto reaction = regularized_reaction(state, system);
  return step(state, system, grid, dt, reaction);
}

FieldState step(const FieldState& state, const ReactionSystem& system, const GridSpec& grid, double dt,
                std::span<const Field> reaction) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw StabilityError("time step must be positive and finite");
  const auto lim = step_limits(state, system, grid, reaction);
  const double limit = std::min(lim.diffusion, lim.positivity);
  if (dt > limit * (1.0 + 1e-12)) {
    std::ostringstream os;
    os.precision(17);
    os << "time step " << dt << " exceeds the stability limit " << limit << " (diffusion " << lim.diffusion
       << ", positivity " << lim.positivity << ")";
    throw StabilityError(os.str());
  }
  FieldState next;
  next.t = state.t + dt;
  next.eps = state.eps;
  next.u.resize(system.size());
  Field w(grid.cell_count());
  for (std::size_t i = 0; i < system.size(); ++i) {
    const auto& sp = system.species(i);
    const auto& u = state.u[i];
    for (std::size_t c = 0; c < w.size(); ++c) w[c] = std::pow(u[c] + state.eps, sp.m);
    const Field lap = discrete_laplacian_neumann(w, grid);
    Field& out = next.u[i];
    out.resize(w.size());
    for (std::size_t c = 0; c < w.size(); ++c) {
      double v = u[c] + dt * (sp.d * lap[c] + reaction[i][c]);
      if (!std::isfinite(v))
        throw SolverError("non-finite value in species " + std::to_string(i + 1) + " at cell " + std::to_string(c),
                          state);
      if (v < 0.0) {
        if (v < -kClampTolerance) {
          std::ostringstream os;
          os << "positivity lost in species " << i + 1 << " at cell " << c << ": " << v;
          throw SolverError(os.str(), state);
        }
        v = 0.0;
      }
      out[c] = v;
    }
  }
  return next;
}

namespace {

void emit_all(const AccumulatorList& accs, Trajectory& traj) {
  std::map<std::string, std::vector<double>> values;
  for (const auto& a : accs) a->emit(values);
  for (auto& [key, v] : values) traj.series[key].push_back(std::move(v));
}

}  // namespace

Trajectory run(const ReactionSystem& system, const GridSpec& grid, const std::vector<Field>& initial, double eps,
               double T_end, const RunOptions& options, AccumulatorList accumulators) {
  if (!(T_end >= 0.0) || !std::isfinite(T_end)) throw ConfigError("T_end must be finite and >= 0");
  if (!(options.safety > 0.0 && options.safety <= 1.0)) throw ConfigError("safety factor must lie in (0, 1]");
  if (!(options.dt_max > 0.0)) throw ConfigError("dt_max must be positive");
  if (options.substeps == 0) throw ConfigError("substeps must be >= 1");
  FieldState state{0.0, eps, initial};
  check_state(state, system, grid);
  for (std::size_t i = 0; i < state.u.size(); ++i)
    for (double v : state.u[i])
      if (!(v >= 0.0) || !std::isfinite(v))
        throw ConfigError("initial data must be finite and nonnegative (species " + std::to_string(i + 1) + ")");

  Trajectory traj;
  traj.snapshots.push_back(state);
  auto reaction = regularized_reaction(state, system);
  {
    StepContext ctx{grid, system, state, reaction, 0.0};
    for (auto& a : accumulators) a->begin(ctx);
  }
  emit_all(accumulators, traj);

  traj.dt_min = std::numeric_limits<double>::infinity();
  const double dt_floor = options.min_dt_fraction * T_end;
  std::size_t macro = 0;
  bool snapshot_pending = false;

  auto advance = [&](double dt) {
    StepContext ctx{grid, system, state, reaction, dt};
    for (auto& a : accumulators) a->observe(ctx);
    state = step(state, system, grid, dt, reaction);
    reaction = regularized_reaction(state, system);
    StepContext done{grid, system, state, reaction, dt};
    for (auto& a : accumulators) a->after_step(done);
    ++traj.steps;
    traj.dts.push_back(dt);
    traj.dt_min = std::min(traj.dt_min, dt);
    traj.dt_max = std::max(traj.dt_max, dt);
  };

  while (state.t < T_end) {
    double dt;
    const double remaining = T_end - state.t;
    if (options.schedule) {
      if (macro >= options.schedule->size()) {
        dt = remaining;
      } else {
        dt = (*options.schedule)[macro];
        if (macro + 1 == options.schedule->size()) dt = remaining;
      }
    } else {
      const auto lim = step_limits(state, system, grid, reaction);
      dt = std::min({options.safety * lim.diffusion, lim.positivity, options.dt_max});
      if (!(dt > dt_floor))
        throw SolverError("time step collapsed to " + std::to_string(dt) + " at t = " + std::to_string(state.t),
                          state);
    }
    if (dt >= remaining * (1.0 - 1e-12)) dt = remaining;
    const double piece = dt / static_cast<double>(options.substeps);
    for (std::size_t k = 0; k < options.substeps; ++k) {
      double this_piece = (k + 1 == options.substeps) ? dt - piece * static_cast<double>(options.substeps - 1) : piece;
      if (options.schedule) {
        // Scheduled steps may be too long for this member; split them evenly.
        const auto lim = step_limits(state, system, grid, reaction);
        const double limit = std::min(lim.diffusion, lim.positivity);
        if (this_piece > limit) {
          if (!(limit > dt_floor))
            throw SolverError("scheduled step cannot be stabilized at t = " + std::to_string(state.t), state);
          const auto parts = static_cast<std::size_t>(std::ceil(this_piece / (options.safety * limit)));
          const double sub = this_piece / static_cast<double>(parts);
          for (std::size_t p = 0; p + 1 < parts; ++p) advance(sub);
          this_piece -= sub * static_cast<double>(parts - 1);
        }
      }
      advance(this_piece);
    }
    if (dt == remaining) state.t = T_end;  // remove rounding drift at the final time
    ++macro;
    snapshot_pending = true;
    if (options.snapshot_every > 0 && macro % options.snapshot_every == 0) {
      traj.snapshots.push_back(state);
      emit_all(accumulators, traj);
      snapshot_pending = false;
    }
  }
  if (snapshot_pending) {
    traj.snapshots.push_back(state);
    emit_all(accumulators, traj);
  }
  if (traj.steps == 0) traj.dt_min = 0.0;
  return traj;
}

Trajectory run(const ReactionSystem& system, const GridSpec& grid, const InitialData& init, double eps, double T_end,
               const RunOptions& options, AccumulatorList accumulators) {
  if (init.species.size() != system.size())
    throw ConfigError("initial data has " + std::to_string(init.species.size()) + " species, system has " +
                      std::to_string(system.size()));
  return run(system, grid, init.generate(grid), eps, T_end, options, std::move(accumulators));
}

}  // namespace rdmc::solver
