#pragma once

// Regularization sweeps and grid-refinement studies.

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rdmc/config.hpp"
#include "rdmc/core.hpp"
#include "rdmc/trajectory.hpp"

namespace rdmc::sweep {

/// 1 on [0, c], 0 beyond 2c, cubic smoothstep in between.
double zeta(double s, double cutoff);
/// s^kappa * zeta(s)
double probe(double s, double kappa, double cutoff);

/// L2(Omega x (0, T)) distance between the probes of species i in two runs
/// whose snapshots share the same times (left-point rule between snapshots).
double probe_distance(const Trajectory& a, const Trajectory& b, const GridSpec& grid, std::size_t i, double kappa,
                      double cutoff);

struct SweepOptions {
  std::size_t threads = 1;
  /// Split every scheduled step into this many substeps (2 halves dt).
  std::size_t substeps = 1;
};

struct SweepRow {
  double eps = 0.0;
  std::size_t species = 0;  // 0-based
  double lp_norm = 0.0;     // spacetime_lp with p = m_i + 1
  double mass_margin = 0.0;
  std::optional<double> D_to_previous;
  double runtime_seconds = 0.0;
  std::string error;  // set when the member run aborted
};

struct SweepResult {
  std::vector<SweepRow> rows;  // ordered by eps (as given), then species
  /// D[j][i]: distance between members j-1 and j for species i (D[0] is empty).
  std::vector<std::vector<double>> D;
  double cutoff = 0.0;
  std::size_t steps = 0;  // length of the shared schedule
  bool complete = true;

  const SweepRow& row(std::size_t member, std::size_t species) const;
};

/// Needs at least three strictly decreasing values in (0, 1); throws ConfigError otherwise.
void validate_eps_list(const std::vector<double>& eps_list);

/// Runs the configured system once per eps. The smallest eps picks the time-step
/// schedule adaptively; every member then replays it, so snapshot times agree.
SweepResult epsilon_sweep(const RunConfig& config, const SweepSpec& spec, const SweepOptions& options = {});

void write_sweep_csv(std::ostream& out, const SweepResult& result);

using ExactSolution = std::function<double(std::size_t species, const std::array<double, 2>& x, double t)>;

struct RefinementLevel {
  std::size_t factor = 1;
  std::vector<std::size_t> cells;
  std::optional<double> error;  // vs the exact solution, or vs the previous level
  std::optional<double> order;
};

/// Reruns the config with the cell counts multiplied by 1 and each factor
/// (a subset of {2, 4, 8}). With `exact` the L2 error at T_end is measured on
/// each grid; otherwise consecutive levels are compared after restricting the
/// finer one by cell averaging.
std::vector<RefinementLevel> grid_refinement(const RunConfig& config, std::vector<std::size_t> factors,
                                             const std::optional<ExactSolution>& exact = std::nullopt);

/// Block-average a fine field onto a grid coarser by `ratio` along every axis.
Field restrict_average(const Field& fine, const GridSpec& fine_grid, std::size_t ratio);

}  // namespace rdmc::sweep
