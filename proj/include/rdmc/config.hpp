#pragma once

// JSON run configuration.
//
// {
//   "system": {"species": [{"d": 1, "m": 1}, ...], "a": [1, 1], "K": 0,
//              "growth": [{"beta": 1.5, "phi": {"coeff": 2, "power": 2}}, ...]},
//   "family": {"type": "reversible", "p": [2, 1], "q": [1, 2], "k1": 1, "k2": 1},
//   "grid": {"lengths": [1], "cells": [64]},
//   "init": [{"type": "bump", "center": [0.5], "width": 0.1, "amplitude": 1, "base": 0.5}, ...],
//   "eps": 0.1, "eps_list": [0.2, 0.1, 0.05, 0.025], "T_end": 1,
//   "snapshot_every": 100, "safety": 0.5, "dt_max": 0.01,
//   "rho_specs": [{"M": 1, "k": 3}], "phi_specs": [{"modes": [1], "t_support": 1}],
//   "truncation_levels": [1, 2],
//   "tolerances": {"mass": 1e-8, "renorm_C": 5, "mass_sub_C": 10},
//   "samples": {"s_max": 10, "points_per_axis": 9, "random_points": 256},
//   "seed": 0, "csv_mirror": false
// }
//
// Only system, family, grid and init are required. K and growth default to
// the sampled mass-control estimate and the family's default majorants.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rdmc/core.hpp"
#include "rdmc/reactions.hpp"
#include "rdmc/verify.hpp"

namespace rdmc {

struct Tolerances {
  double mass = 1e-8;
  double renorm_C = 5.0;
  double mass_sub_C = 10.0;
};

struct RunConfig {
  nlohmann::json raw;  // the document as loaded, with the effective seed
  ReactionSystem system;
  bool K_from_config = false;
  bool growth_from_config = false;
  GridSpec grid;
  InitialData init;
  double eps = 0.1;
  std::vector<double> eps_list;
  double T_end = 1.0;
  std::size_t snapshot_every = 100;
  double safety = 0.5;
  double dt_max = std::numeric_limits<double>::infinity();
  std::vector<RenormalizationSpec> rho_specs;
  std::vector<TestFunctionSpec> phi_specs;
  std::vector<double> truncation_levels;
  Tolerances tolerances;
  reactions::SampleSpec samples;
  std::uint64_t seed = 0;
  bool csv_mirror = false;

  verify::AccumulatorOptions accumulator_options() const;
};

/// Throws ConfigError on anything malformed, including JSON syntax errors.
RunConfig parse_config(nlohmann::json doc, std::optional<std::uint64_t> seed_override = std::nullopt);
RunConfig load_config(const std::string& path, std::optional<std::uint64_t> seed_override = std::nullopt);

/// FNV-1a 64 of the sorted-key compact serialization, as 16 hex digits.
std::string params_hash(const nlohmann::json& doc);

}  // namespace rdmc
