#include "rdmc/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace rdmc {

using nlohmann::json;

namespace {

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  return j.at(key);
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

ScalarFn parse_scalar_fn(const json& j) {
  const auto kind = scalar_fn_kind_from_string(require(j, "kind", "scalar function").get<std::string>());
  const double coeff = get_or(j, "coeff", 1.0);
  switch (kind) {
    case ScalarFnKind::Power: return ScalarFn::power(coeff, get_or(j, "rate", 1.0));
    case ScalarFnKind::ExpMinusOne: return ScalarFn::exp_minus_one(coeff, get_or(j, "rate", 1.0));
    case ScalarFnKind::SLogOnePlus: return ScalarFn::s_log_one_plus(coeff);
  }
  throw ConfigError("unknown scalar function");
}

ReactionFamily parse_family(const json& j) {
  const auto type = require(j, "type", "family").get<std::string>();
  ReactionFamily family;
  if (type == "reversible") {
    family = Reversible{require(j, "p", "family").get<std::vector<double>>(),
                        require(j, "q", "family").get<std::vector<double>>(), get_or(j, "k1", 1.0),
                        get_or(j, "k2", 1.0)};
  } else if (type == "cross_absorb2") {
    family = CrossAbsorb2{parse_scalar_fn(require(j, "g1", "family")), parse_scalar_fn(require(j, "g2", "family")),
                          get_or(j, "beta1", 1.0), get_or(j, "beta2", 1.0), get_or(j, "lambda", 1.0)};
  } else if (type == "power_law2") {
    family = PowerLaw2{get_or(j, "p1", 1.0), get_or(j, "p2", 1.0), get_or(j, "q1", 1.0),
                       get_or(j, "q2", 1.0), get_or(j, "k1", 1.0), get_or(j, "k2", 1.0)};
  } else if (type == "lotka_volterra") {
    family = LotkaVolterra{require(j, "gamma", "family").get<std::vector<double>>(),
                           require(j, "A", "family").get<Matrix>(), require(j, "B", "family").get<Matrix>()};
  } else {
    throw ConfigError("unknown reaction family '" + type + "'");
  }
  check_family_shape(family);
  return family;
}

InitGenerator parse_init(const json& j, std::uint64_t seed, std::size_t species) {
  const auto type = require(j, "type", "init").get<std::string>();
  if (type == "constant") return ConstantInit{require(j, "value", "init").get<double>()};
  if (type == "bump")
    return BumpInit{require(j, "center", "init").get<std::vector<double>>(), get_or(j, "width", 0.1),
                    get_or(j, "amplitude", 1.0), get_or(j, "base", 0.0)};
  if (type == "random")
    return RandomInit{get_or<std::uint64_t>(j, "seed", seed + species), get_or(j, "low", 0.0), get_or(j, "high", 1.0)};
  if (type == "cosine")
    return CosineInit{require(j, "modes", "init").get<std::vector<int>>(), get_or(j, "base", 1.0),
                      get_or(j, "amplitude", 0.5)};
  throw ConfigError("unknown init type '" + type + "'");
}

GrowthMajorant parse_majorant(const json& j) {
  GrowthMajorant g;
  g.coeff = get_or(j, "coeff", 1.0);
  g.power = get_or(j, "power", 1.0);
  if (j.contains("extra")) g.extra = parse_scalar_fn(j.at("extra"));
  return g;
}

RunConfig build(json doc, std::optional<std::uint64_t> seed_override) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  if (seed_override) doc["seed"] = *seed_override;
  const std::uint64_t seed = get_or<std::uint64_t>(doc, "seed", 0);

  const json& sys = require(doc, "system", "config");
  std::vector<SpeciesParams> species;
  for (const auto& s : require(sys, "species", "system")) species.emplace_back(get_or(s, "d", 1.0), get_or(s, "m", 1.0));
  if (species.empty()) throw ConfigError("system: at least one species is required");
  const auto family = parse_family(require(doc, "family", "config"));
  if (species_count(family) != species.size())
    throw ConfigError("family has " + std::to_string(species_count(family)) + " species, system lists " +
                      std::to_string(species.size()));
  const auto a = sys.contains("a") ? sys.at("a").get<std::vector<double>>() : std::vector<double>(species.size(), 1.0);
  if (a.size() != species.size()) throw ConfigError("system: weight vector length does not match species count");

  reactions::SampleSpec samples;
  if (doc.contains("samples")) {
    const auto& s = doc.at("samples");
    samples.s_max = get_or(s, "s_max", samples.s_max);
    samples.points_per_axis = get_or(s, "points_per_axis", samples.points_per_axis);
    samples.random_points = get_or(s, "random_points", samples.random_points);
  }
  samples.seed = seed;

  std::vector<SpeciesGrowth> growth;
  const bool growth_given = sys.contains("growth");
  if (growth_given) {
    for (const auto& g : sys.at("growth"))
      growth.push_back({require(g, "beta", "growth").get<double>(), parse_majorant(require(g, "phi", "growth"))});
  } else {
    growth = reactions::default_growth(family, species);
  }

  const bool K_given = sys.contains("K");
  double K = 0.0;
  if (K_given) {
    K = sys.at("K").get<double>();
  } else {
    for (double w : a)
      if (!(w > 0.0)) throw ConfigError("system: weights must be positive");
    const auto pts = reactions::generate_samples(species.size(), samples);
    K = reactions::check_mass_control(family, a, pts).estimated_K.value_or(0.0);
  }
  ReactionSystem system(species, family, a, K, growth);

  const json& g = require(doc, "grid", "config");
  GridSpec grid(require(g, "lengths", "grid").get<std::vector<double>>(),
                require(g, "cells", "grid").get<std::vector<std::size_t>>());
  if (g.contains("dim") && g.at("dim").get<std::size_t>() != grid.dim())
    throw ConfigError("grid: dim does not match lengths");

  InitialData init;
  const json& ij = require(doc, "init", "config");
  if (!ij.is_array() || ij.size() != species.size())
    throw ConfigError("init: need one generator per species");
  for (std::size_t i = 0; i < ij.size(); ++i) init.species.push_back(parse_init(ij[i], seed, i));

  const double eps = get_or(doc, "eps", 0.1);
  if (!(eps >= 0.0 && eps < 1.0)) throw ConfigError("eps must lie in [0, 1)");
  const double T_end = get_or(doc, "T_end", 1.0);
  if (!(T_end >= 0.0) || !std::isfinite(T_end)) throw ConfigError("T_end must be finite and >= 0");
  const double safety = get_or(doc, "safety", 0.5);
  if (!(safety > 0.0 && safety <= 1.0)) throw ConfigError("safety must lie in (0, 1]");
  const double dt_max = get_or(doc, "dt_max", std::numeric_limits<double>::infinity());
  if (!(dt_max > 0.0)) throw ConfigError("dt_max must be positive");

  std::vector<RenormalizationSpec> rho_specs;
  if (doc.contains("rho_specs")) {
    for (const auto& r : doc.at("rho_specs")) rho_specs.emplace_back(require(r, "M", "rho_specs").get<double>(), get_or(r, "k", 3));
  } else {
    rho_specs = verify::default_rho_specs();
  }
  std::vector<TestFunctionSpec> phi_specs;
  if (doc.contains("phi_specs")) {
    for (const auto& p : doc.at("phi_specs"))
      phi_specs.emplace_back(require(p, "modes", "phi_specs").get<std::vector<int>>(), get_or(p, "t_support", T_end));
  } else if (T_end > 0.0) {
    phi_specs = verify::default_phi_specs(grid.dim(), T_end);
  }
  for (const auto& p : phi_specs) {
    if (p.modes.size() != grid.dim()) throw ConfigError("phi_specs: modes need one entry per axis");
    if (p.t_support > T_end) throw ConfigError("phi_specs: time support exceeds T_end");
  }
  auto levels = get_or(doc, "truncation_levels", std::vector<double>{1.0, 2.0});
  for (double M : levels)
    if (!(M > 0.0)) throw ConfigError("truncation_levels must be positive");

  Tolerances tol;
  if (doc.contains("tolerances")) {
    const auto& t = doc.at("tolerances");
    tol.mass = get_or(t, "mass", tol.mass);
    tol.renorm_C = get_or(t, "renorm_C", tol.renorm_C);
    tol.mass_sub_C = get_or(t, "mass_sub_C", tol.mass_sub_C);
  }

  auto eps_list = get_or(doc, "eps_list", std::vector<double>{});
  const auto snapshot_every = get_or<std::size_t>(doc, "snapshot_every", 100);
  const bool csv_mirror = get_or(doc, "csv_mirror", false);

  return RunConfig{std::move(doc), std::move(system), K_given, growth_given, std::move(grid), std::move(init), eps,
                   std::move(eps_list), T_end, snapshot_every, safety, dt_max, std::move(rho_specs),
                   std::move(phi_specs), std::move(levels), tol, samples, seed, csv_mirror};
}

}  // namespace

verify::AccumulatorOptions RunConfig::accumulator_options() const {
  return {truncation_levels, rho_specs, phi_specs, {}};
}

RunConfig parse_config(json doc, std::optional<std::uint64_t> seed_override) {
  try {
    return build(std::move(doc), seed_override);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

RunConfig load_config(const std::string& path, std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(std::move(doc), seed_override);
}

std::string params_hash(const json& doc) {
  const std::string text = doc.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace rdmc
