#pragma once

// Explicit finite-volume stepper for the regularized system
//   du_i/dt = d_i Lap (u_i + eps)^{m_i} + f_i(u) / (1 + eps sum_j |f_j(u)|)
// with homogeneous Neumann boundaries. Nonnegativity is kept by the time-step
// restriction, not by clipping.

#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "rdmc/core.hpp"
#include "rdmc/trajectory.hpp"

namespace rdmc::solver {

/// Thrown when a run cannot continue (non-finite values, positivity loss).
/// Carries the last valid state for diagnostics.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, FieldState last) : std::runtime_error(what), last_state(std::move(last)) {}
  FieldState last_state;
};

/// step() was asked to take a step longer than the stability limit.
class StabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Clamp activations beyond this magnitude abort the step.
inline constexpr double kClampTolerance = 1e-14;
/// Fraction of a cell value the combined decrease in one step may remove.
inline constexpr double kPositivityFraction = 0.9;

/// Second-order central stencil with reflecting ghost cells.
Field discrete_laplacian_neumann(std::span<const double> field, const GridSpec& grid);

/// Regularized reaction f-hat evaluated in every cell: result[i][cell].
std::vector<Field> regularized_reaction(const FieldState& state, const ReactionSystem& system);

struct StepLimits {
  double diffusion = 0.0;   // h^2 / (2 sum_axes ...) bound without safety factor
  double positivity = 0.0;  // largest dt keeping every cell >= (1 - eta) u
};

StepLimits step_limits(const FieldState& state, const ReactionSystem& system, const GridSpec& grid,
                       std::span<const Field> reaction);

/// safety * diffusion limit, further reduced by the positivity limit and capped at dt_max.
double stable_dt(const FieldState& state, const ReactionSystem& system, const GridSpec& grid, double safety,
                 double dt_max = std::numeric_limits<double>::infinity());

/// One forward-Euler step. Throws StabilityError if dt exceeds the stability
/// limit and SolverError if a clamp beyond kClampTolerance would be needed.
FieldState step(const FieldState& state, const ReactionSystem& system, const GridSpec& grid, double dt);
/// Same, with the regularized reaction already evaluated on `state`.
FieldState step(const FieldState& state, const ReactionSystem& system, const GridSpec& grid, double dt,
                std::span<const Field> reaction);

struct RunOptions {
  double safety = 0.5;
  double dt_max = std::numeric_limits<double>::infinity();
  /// Record a snapshot every this many steps (0 keeps only the first and last).
  std::size_t snapshot_every = 100;
  /// Replay these step lengths instead of choosing dt adaptively. Steps that
  /// exceed the stability limit are split into equal stable substeps.
  std::optional<std::vector<double>> schedule;
  /// Split every step (adaptive or scheduled) into this many equal substeps.
  std::size_t substeps = 1;
  /// Abort if dt falls below this fraction of T_end.
  double min_dt_fraction = 1e-13;
};

Trajectory run(const ReactionSystem& system, const GridSpec& grid, const std::vector<Field>& initial, double eps,
               double T_end, const RunOptions& options = {}, AccumulatorList accumulators = {});

Trajectory run(const ReactionSystem& system, const GridSpec& grid, const InitialData& init, double eps, double T_end,
               const RunOptions& options = {}, AccumulatorList accumulators = {});

}  // namespace rdmc::solver
