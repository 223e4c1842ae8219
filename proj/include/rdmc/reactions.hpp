#pragma once

// Reaction families, the bounded quotient regularization, and sampled checks of
// the structural conditions (quasipositivity, mass control, cross-absorptive
// growth) plus the closed-form admissibility criteria of the applications.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rdmc/core.hpp"

namespace rdmc::reactions {

/// Absolute tolerance for the quasipositivity check.
inline constexpr double kQuasipositivityTol = 1e-10;

/// f(s) for the family. Throws std::domain_error on a negative component.
std::vector<double> eval(const ReactionFamily& family, std::span<const double> s);
/// Allocation-free variant used by the solver; `out` must have size N.
void eval_into(const ReactionFamily& family, std::span<const double> s, std::span<double> out);

/// f_i / (1 + eps sum_j |f_j|).
std::vector<double> regularize(std::span<const double> f, double eps);
void regularize_inplace(std::span<double> f, double eps);

struct SampleSpec {
  double s_max = 10.0;
  std::size_t points_per_axis = 9;
  std::size_t random_points = 256;
  std::uint64_t seed = 0;
};

/// Tensor grid over [0, s_max]^N followed by seeded uniform points.
std::vector<std::vector<double>> generate_samples(std::size_t n_species, const SampleSpec& spec);

struct ConditionReport {
  std::string condition;
  bool passed = true;
  std::optional<std::size_t> species;     // offending species (0-based) on failure
  std::vector<double> witness;            // sample point of the worst case
  double worst_value = 0.0;               // worst margin (negative on failure)
  std::optional<double> estimated_K;      // mass control only
  std::string note;

  /// Human-readable block.
  std::string to_text() const;
};

ConditionReport check_quasipositivity(const ReactionFamily& family,
                                      const std::vector<std::vector<double>>& samples,
                                      double tol = kQuasipositivityTol);

/// Estimates the smallest K with sum a_i f_i <= K (sum a_i s_i + 1) over the samples.
/// With `required_K` the check fails if the estimate exceeds it.
ConditionReport check_mass_control(const ReactionFamily& family, std::span<const double> a,
                                   const std::vector<std::vector<double>>& samples,
                                   std::optional<double> required_K = std::nullopt);

/// f_i(s) >= -phi_i(s_i) (sum_{j != i} s_j^{beta_j} + 1) at every sample.
ConditionReport check_cross_absorption(const ReactionSystem& system,
                                       const std::vector<std::vector<double>>& samples,
                                       double tol = kQuasipositivityTol);

struct Validation {
  bool accepted = true;
  std::vector<std::string> reasons;
};

/// Admissibility of the reversible reaction: stoichiometric balance of a
/// against (p, q) and the cross-exponent bounds for every species whose net
/// stoichiometry is nonzero. Throws ConfigError on a dimension mismatch.
Validation validate_reversible(std::span<const double> p, std::span<const double> q,
                               std::span<const double> m, std::span<const double> a);

/// Antisymmetric-dominance A_ij + A_ji <= 0 and B_ij < m_i + 1 wherever A_ij < 0.
Validation validate_lv(const Matrix& A, const Matrix& B, std::span<const double> m,
                       std::span<const double> gamma);

/// Default (phi_i, beta_i) for a family, so that the cross-absorptive bound
/// holds whenever the family's admissibility criteria hold.
std::vector<SpeciesGrowth> default_growth(const ReactionFamily& family, const std::vector<SpeciesParams>& species);

/// The cross-absorptive family equivalent to a power-law pair.
CrossAbsorb2 as_cross_absorb(const PowerLaw2& family);

}  // namespace rdmc::reactions
