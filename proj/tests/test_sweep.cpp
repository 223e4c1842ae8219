#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "rdmc/solver.hpp"
#include "rdmc/sweep.hpp"

using namespace rdmc;
using namespace rdmc::sweep;

namespace {

RunConfig heat_config(std::size_t cells, double T) {
  auto doc = test::fixture_json("heat_cosine");
  doc["grid"]["cells"] = nlohmann::json::array({cells});
  doc["T_end"] = T;
  return parse_config(doc);
}

double heat_exact(std::size_t, const std::array<double, 2>& x, double t) {
  return 1.0 + 0.5 * std::cos(M_PI * x[0]) * std::exp(-M_PI * M_PI * t);
}

}  // namespace

// --- oracles -------------------------------------------------------------

TEST_CASE("cutoff and probe oracle") {
  CHECK(zeta(0.0, 2.0) == 1.0);
  CHECK(zeta(2.0, 2.0) == 1.0);
  CHECK(zeta(3.0, 2.0) == doctest::Approx(0.5));
  CHECK(zeta(4.0, 2.0) == 0.0);
  CHECK(zeta(9.0, 2.0) == 0.0);
  double prev = 1.0;
  for (int j = 0; j <= 100; ++j) {
    const double z = zeta(2.0 + 2.0 * j / 100, 2.0);
    CHECK(z <= prev);
    prev = z;
  }
  CHECK(probe(1.5, 2.0, 2.0) == doctest::Approx(2.25));
  CHECK(probe(5.0, 2.0, 2.0) == 0.0);
}

TEST_CASE("block-average restriction oracle") {
  const auto fine = GridSpec({1.0, 1.0}, {4, 2});
  const Field u{1, 2, 3, 4, 5, 6, 7, 8};
  const auto c = restrict_average(u, fine, 2);
  CHECK(c == Field{2.5, 6.5});
  CHECK_THROWS_AS(restrict_average(u, GridSpec({1.0, 1.0}, {4, 2}), 4), ConfigError);
}

TEST_CASE("eps list validation") {
  CHECK_NOTHROW(validate_eps_list({0.2, 0.1, 0.05}));
  CHECK_THROWS_AS(validate_eps_list({0.2, 0.1}), ConfigError);
  CHECK_THROWS_AS(validate_eps_list({0.2, 0.2, 0.1}), ConfigError);
  CHECK_THROWS_AS(validate_eps_list({0.1, 0.2, 0.05}), ConfigError);
  CHECK_THROWS_AS(validate_eps_list({1.0, 0.5, 0.1}), ConfigError);
  CHECK_THROWS_AS(validate_eps_list({0.5, 0.1, 0.0}), ConfigError);
}

// --- distances -------------------------------------------------------------

TEST_CASE("identical runs have zero distance") {
  auto cfg = load_config(test::fixture("reversible_ok"));
  cfg.T_end = 0.05;
  solver::RunOptions o;
  o.snapshot_every = 1;
  const auto a = solver::run(cfg.system, cfg.grid, cfg.init, 0.1, cfg.T_end, o);
  const auto b = solver::run(cfg.system, cfg.grid, cfg.init, 0.1, cfg.T_end, o);
  CHECK(probe_distance(a, b, cfg.grid, 0, 2.0, 4.0) == 0.0);
  auto c = cfg;
  c.T_end = 0.04;
  const auto shorter = solver::run(c.system, c.grid, c.init, 0.1, c.T_end, o);
  CHECK_THROWS_AS(probe_distance(a, shorter, cfg.grid, 0, 2.0, 4.0), ConfigError);
}

TEST_CASE("linear diffusion without reaction does not depend on eps") {
  auto cfg = heat_config(16, 0.05);
  SweepSpec spec{{0.2, 0.1, 0.05}, 0.0};
  const auto res = epsilon_sweep(cfg, spec);
  CHECK(res.complete);
  for (std::size_t j = 1; j < 3; ++j) CHECK(res.D[j][0] < 1e-12);
}

TEST_CASE("sweep members share the snapshot schedule and run in parallel deterministically") {
  auto cfg = load_config(test::fixture("reversible_ok"));
  cfg.grid = GridSpec::interval(1.0, 32);
  cfg.T_end = 0.1;
  SweepSpec spec{cfg.eps_list, 0.0};
  const auto one = epsilon_sweep(cfg, spec, {1, 1});
  const auto many = epsilon_sweep(cfg, spec, {4, 1});
  REQUIRE(one.complete);
  CHECK(one.rows.size() == cfg.eps_list.size() * 2);
  CHECK(one.cutoff > 0.0);
  for (std::size_t r = 0; r < one.rows.size(); ++r) {
    CHECK(one.rows[r].lp_norm == many.rows[r].lp_norm);
    CHECK(one.rows[r].mass_margin == many.rows[r].mass_margin);
    CHECK(one.rows[r].D_to_previous.has_value() == (one.rows[r].eps != cfg.eps_list.front()));
    if (one.rows[r].D_to_previous) CHECK(*one.rows[r].D_to_previous == *many.rows[r].D_to_previous);
    CHECK(one.rows[r].mass_margin > 0.0);
  }
}

TEST_CASE("sweep with zero horizon") {
  auto cfg = load_config(test::fixture("reversible_t0"));
  const auto res = epsilon_sweep(cfg, {cfg.eps_list, 0.0});
  CHECK(res.complete);
  CHECK(res.steps == 0);
  for (std::size_t j = 1; j < res.D.size(); ++j)
    for (double d : res.D[j]) CHECK(d == 0.0);
}

// --- refinement ------------------------------------------------------------

TEST_CASE("heat equation converges at second order against the closed form") {
  const auto cfg = heat_config(16, 0.1);
  const auto levels = grid_refinement(cfg, {2, 4, 8}, ExactSolution(heat_exact));
  REQUIRE(levels.size() == 4);
  for (std::size_t k = 1; k < levels.size(); ++k) {
    REQUIRE(levels[k].order.has_value());
    CHECK(*levels[k].order >= 1.8);
  }
}

TEST_CASE("constant data has zero refinement error") {
  auto doc = test::fixture_json("heat_cosine");
  doc["init"] = nlohmann::json::array({nlohmann::json{{"type", "constant"}, {"value", 0.7}}});
  doc["T_end"] = 0.02;
  const auto cfg = parse_config(doc);
  const auto exact = grid_refinement(cfg, {2, 4}, ExactSolution([](std::size_t, const std::array<double, 2>&, double) {
                                       return 0.7;
                                     }));
  for (const auto& l : exact) CHECK(*l.error == 0.0);
  const auto cauchy = grid_refinement(cfg, {2});
  CHECK(*cauchy[1].error == 0.0);
  CHECK_THROWS_AS(grid_refinement(cfg, {3}), ConfigError);
}

TEST_CASE("single-cell refinement base matches the ODE") {
  auto doc = test::fixture_json("reversible_ok");
  doc["grid"]["cells"] = nlohmann::json::array({1});
  doc["init"] = nlohmann::json::array(
      {nlohmann::json{{"type", "constant"}, {"value", 2.0}}, nlohmann::json{{"type", "constant"}, {"value", 0.5}}});
  doc["T_end"] = 0.2;
  const auto cfg = parse_config(doc);
  const auto exact_ode = solver::run(cfg.system, cfg.grid, cfg.init, cfg.eps, cfg.T_end, {});
  const auto levels = grid_refinement(
      cfg, {2}, ExactSolution([&](std::size_t i, const std::array<double, 2>&, double) {
        return exact_ode.snapshots.back().u[i][0];
      }));
  CHECK(*levels[0].error == 0.0);
  // The finer grid stays uniform but takes diffusion-limited steps, so only
  // the time discretization differs.
  CHECK(*levels[1].error < 1e-2);
}
