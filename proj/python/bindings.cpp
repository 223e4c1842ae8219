#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "json.hpp"
#include "rdmc/cli.hpp"
#include "rdmc/config.hpp"
#include "rdmc/reactions.hpp"
#include "rdmc/solver.hpp"
#include "rdmc/verify.hpp"

namespace py = pybind11;
using namespace rdmc;

namespace {

RunConfig config_from(const std::string& text, std::optional<std::uint64_t> seed) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(e.what());
  }
  return parse_config(std::move(doc), seed);
}

py::dict report_dict(const reactions::ConditionReport& r) {
  py::dict d;
  d["condition"] = r.condition;
  d["passed"] = r.passed;
  d["species"] = r.species;
  d["witness"] = r.witness;
  d["worst_value"] = r.worst_value;
  d["estimated_K"] = r.estimated_K;
  d["note"] = r.note;
  return d;
}

// Snapshot fields as an array shaped (species, *cells).
py::array_t<double> fields_array(const FieldState& s, const GridSpec& g) {
  std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(s.u.size())};
  for (auto c : g.cells()) shape.push_back(static_cast<py::ssize_t>(c));
  py::array_t<double> out(shape);
  double* dst = out.mutable_data();
  for (const auto& f : s.u) dst = std::copy(f.begin(), f.end(), dst);
  return out;
}

py::dict validation_dict(const reactions::Validation& v) {
  py::dict d;
  d["accepted"] = v.accepted;
  d["reasons"] = v.reasons;
  return d;
}

}  // namespace

PYBIND11_MODULE(_rdmc, m) {
  m.doc() = "Reaction-diffusion mass-control solver";
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def(
      "main",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::main_entry(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line tool; returns (exit_code, stdout, stderr).");

  m.def("params_hash", [](const std::string& text) { return params_hash(nlohmann::json::parse(text)); },
        py::arg("config_json"));

  m.def(
      "check",
      [](const std::string& text, std::optional<std::uint64_t> seed) {
        const auto cfg = config_from(text, seed);
        const auto samples = reactions::generate_samples(cfg.system.size(), cfg.samples);
        py::list out;
        out.append(report_dict(reactions::check_quasipositivity(cfg.system.family(), samples)));
        out.append(report_dict(reactions::check_mass_control(
            cfg.system.family(), cfg.system.weights(), samples,
            cfg.K_from_config ? std::optional<double>(cfg.system.K()) : std::nullopt)));
        out.append(report_dict(reactions::check_cross_absorption(cfg.system, samples)));
        return out;
      },
      py::arg("config_json"), py::arg("seed") = py::none(),
      "Sampled structural conditions of the configured reaction.");

  m.def(
      "run",
      [](const std::string& text, std::optional<std::uint64_t> seed) {
        const auto cfg = config_from(text, seed);
        solver::RunOptions o;
        o.safety = cfg.safety;
        o.dt_max = cfg.dt_max;
        o.snapshot_every = cfg.snapshot_every;
        Trajectory traj;
        {
          py::gil_scoped_release release;
          traj = solver::run(cfg.system, cfg.grid, cfg.init, cfg.eps, cfg.T_end, o,
                             verify::standard_accumulators(cfg.system, cfg.grid, cfg.accumulator_options()));
        }
        py::list times, fields;
        for (const auto& s : traj.snapshots) {
          times.append(s.t);
          fields.append(fields_array(s, cfg.grid));
        }
        const auto mass = verify::check_mass_bound(traj, cfg.grid, cfg.system.weights(), cfg.system.K(),
                                                   cfg.tolerances.mass);
        py::dict d;
        d["times"] = times;
        d["fields"] = fields;
        d["steps"] = traj.steps;
        d["dt_min"] = traj.dt_min;
        d["dt_max"] = traj.dt_max;
        d["K"] = cfg.system.K();
        d["mass_bound_passed"] = mass.passed;
        std::vector<double> weighted;
        for (const auto& s : traj.snapshots) weighted.push_back(verify::weighted_mass(s, cfg.grid, cfg.system.weights()));
        d["weighted_mass"] = weighted;
        return d;
      },
      py::arg("config_json"), py::arg("seed") = py::none(),
      "Runs the configured system; snapshots come back as arrays shaped (species, *cells).");

  m.def(
      "compute_P1",
      [](double M, int k, double m_exp, double eps, double s) {
        return verify::compute_P1(verify::build_rho({M, k}), m_exp, eps, s);
      },
      py::arg("M"), py::arg("k"), py::arg("m"), py::arg("eps"), py::arg("s"));
  m.def(
      "compute_P2",
      [](double M, int k, double m_exp, double eps, double s) {
        return verify::compute_P2(verify::build_rho({M, k}), m_exp, eps, s);
      },
      py::arg("M"), py::arg("k"), py::arg("m"), py::arg("eps"), py::arg("s"));

  m.def(
      "validate_reversible",
      [](const std::vector<double>& p, const std::vector<double>& q, const std::vector<double>& mm,
         const std::vector<double>& a) { return validation_dict(reactions::validate_reversible(p, q, mm, a)); },
      py::arg("p"), py::arg("q"), py::arg("m"), py::arg("a"));
  m.def(
      "validate_lv",
      [](const Matrix& A, const Matrix& B, const std::vector<double>& mm, const std::vector<double>& gamma) {
        return validation_dict(reactions::validate_lv(A, B, mm, gamma));
      },
      py::arg("A"), py::arg("B"), py::arg("m"), py::arg("gamma"));
}
