#pragma once

// Estimates and solution-concept checks evaluated on discrete trajectories.
// Space-time integrals are gathered during the run by the accumulators below
// (left-point rule in time, trapezoid for the renormalized inequality; cell
// sums times h^dim in space) and read back here.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rdmc/core.hpp"
#include "rdmc/trajectory.hpp"

namespace rdmc::verify {

struct EstimateRecord {
  std::string id;
  std::optional<std::size_t> species;  // 0-based; empty for system-wide estimates
  double T = 0.0;
  double value = 0.0;
  std::optional<double> bound;
  double margin = 0.0;  // bound - value (0 without a bound)
  bool passed = true;
};

// --- mass ------------------------------------------------------------------

/// sum_i a_i * cellsum(u_i) * h^dim
double weighted_mass(const FieldState& state, const GridSpec& grid, std::span<const double> a);

/// weighted_mass(t) <= (weighted_mass(0) + |Omega|) e^{K t} (1 + tol) at every
/// snapshot. The record reports the snapshot with the smallest relative margin.
EstimateRecord check_mass_bound(const Trajectory& traj, const GridSpec& grid, std::span<const double> a, double K,
                                double tol = 1e-8);
/// The same bound as one record per snapshot.
std::vector<EstimateRecord> mass_bound_series(const Trajectory& traj, const GridSpec& grid, std::span<const double> a,
                                              double K, double tol = 1e-8);

/// weighted_mass(t) - weighted_mass(0) - int_0^t sum a_i f-hat_i, worst over
/// snapshots. Passes below C * dt_max * int |sum a_i f-hat_i| plus a rounding floor.
EstimateRecord mass_subsolution_residual(const Trajectory& traj, const GridSpec& grid, std::span<const double> a,
                                         double C = 10.0);

// --- accumulated integrals -------------------------------------------------

std::string lp_key(std::size_t i, double p);
std::string dirichlet_key(std::size_t i, double M);
std::string reaction_key(std::size_t i, double M);
std::string renorm_key(std::size_t i, const RenormalizationSpec& rho, const TestFunctionSpec& phi);
inline const char* const kReactionMassKey = "reaction_mass";

/// int_0^T int_Omega u_i^p at the trajectory horizon.
double spacetime_lp(const Trajectory& traj, std::size_t i, double p);
/// int int chi{u_i <= M} (u_i + eps)^{m_i - 1} |grad u_i|^2
double truncated_dirichlet(const Trajectory& traj, std::size_t i, double M);
/// int int chi{u_i <= M} |f-hat_i|
double truncated_reaction(const Trajectory& traj, std::size_t i, double M);

// --- the functional Phi ----------------------------------------------------

/// Phi(s) = -int_1^{s+1} dsigma / phi(sigma)
double Phi(const std::function<double(double)>& phi, double s);

struct PhiFunctional {
  double value = 0.0;        // int_Omega Phi(u_i)
  bool passed = true;        // 0 >= Phi(u) >= -u / phi(1) in every cell
  double worst_margin = 0.0;
  std::size_t worst_cell = 0;
};

PhiFunctional phi_functional(std::size_t i, const std::function<double(double)>& phi, const FieldState& state,
                             const GridSpec& grid);

// --- renormalization -------------------------------------------------------

struct Renormalization {
  double M = 1.0;
  int k = 3;
  double rho(double s) const;
  double d1(double s) const;  // rho'
  double d2(double s) const;  // rho''
};

Renormalization build_rho(const RenormalizationSpec& spec);

/// int_0^s (sigma + eps)^{(m-1)/2} sqrt(rho''(sigma)) dsigma
double compute_P1(const Renormalization& rho, double m, double eps, double s);
/// int_0^s (sigma + eps)^{m-1} rho'(sigma) dsigma
double compute_P2(const Renormalization& rho, double m, double eps, double s);

/// Cubic Hermite table on [0, M] with exact node derivatives, constant beyond M.
class PrimitiveTable {
 public:
  enum class Kind { P1, P2 };
  PrimitiveTable(const Renormalization& rho, double m, double eps, Kind kind, std::size_t intervals = 4096);
  double operator()(double s) const;

 private:
  double derivative(double s) const;
  Renormalization rho_;
  double m_, eps_;
  Kind kind_;
  double step_;
  std::vector<double> value_, slope_;
  bool singular_start_ = false;
};

/// Terms of the renormalized inequality for one (species, rho, phi) triple.
struct RenormTerms {
  double lhs = 0.0;        // -int int rho(u) phi_t - int rho(u_0) phi(., 0)
  double dirichlet = 0.0;  // -d m int int phi |grad P1(u)|^2
  double flux = 0.0;       // d m int int P2(u) Lap phi
  double reaction = 0.0;   // int int rho'(u) f-hat phi
  double initial = 0.0;    // int rho(u_0) phi(., 0), the size of lhs before cancellation
  double rhs() const { return dirichlet + flux + reaction; }
  double residual() const { return lhs - rhs(); }
};

RenormTerms renorm_terms(const Trajectory& traj, std::size_t i, const RenormalizationSpec& rho,
                         const TestFunctionSpec& phi);

/// residual = LHS - RHS, passing when residual <= C (h^2 + dt_max) sum |RHS terms|.
/// Throws ConfigError if the time support of phi exceeds the horizon.
EstimateRecord renorm_residual(const Trajectory& traj, const GridSpec& grid, std::size_t i,
                               const RenormalizationSpec& rho, const TestFunctionSpec& phi, double C = 5.0);

// --- accumulators ----------------------------------------------------------

struct AccumulatorOptions {
  std::vector<double> truncation_levels;
  std::vector<RenormalizationSpec> rho_specs;
  std::vector<TestFunctionSpec> phi_specs;
  /// Extra exponents for spacetime_lp besides m_i + 1.
  std::vector<double> extra_lp;
};

/// Lp integrals (p = m_i + 1 and extras), truncated integrals for every level,
/// the reaction mass integral and every renormalization triple.
AccumulatorList standard_accumulators(const ReactionSystem& system, const GridSpec& grid,
                                      const AccumulatorOptions& options);

/// Default renormalizations (M, k) in {(1,3), (4,3), (8,5)}.
std::vector<RenormalizationSpec> default_rho_specs();
/// Modes 0, 1, 2 on [0, T] plus mode 1 on [0, T/2].
std::vector<TestFunctionSpec> default_phi_specs(std::size_t dim, double T);

}  // namespace rdmc::verify
