#include "rdmc/verify.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "rdmc/quadrature.hpp"

namespace rdmc::verify {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::vector<double>& final_of(const Trajectory& traj, const std::string& key) {
  if (!traj.has(key)) throw std::out_of_range("trajectory has no accumulator '" + key + "'");
  return traj.final_value(key);
}

struct Face {
  std::size_t lo, hi, axis;
  std::array<double, 2> center;
};

std::vector<Face> faces_of(const GridSpec& grid) {
  std::vector<Face> out;
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    for (std::size_t a = 0; a < grid.dim(); ++a) {
      if (grid.axis_index(c, a) + 1 >= grid.cells()[a]) continue;
      auto x = grid.center(c);
      x[a] += 0.5 * grid.h(a);
      out.push_back({c, c + grid.stride(a), a, x});
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// mass
// ---------------------------------------------------------------------------

double weighted_mass(const FieldState& state, const GridSpec& grid, std::span<const double> a) {
  if (a.size() != state.u.size()) throw ConfigError("weight vector length does not match species count");
  double total = 0.0;
  for (std::size_t i = 0; i < state.u.size(); ++i) {
    double s = 0.0;
    for (double v : state.u[i]) s += v;
    total += a[i] * s;
  }
  return total * grid.cell_volume();
}

std::vector<EstimateRecord> mass_bound_series(const Trajectory& traj, const GridSpec& grid, std::span<const double> a,
                                              double K, double tol) {
  if (traj.snapshots.empty()) throw ConfigError("trajectory has no snapshots");
  if (!(K >= 0.0)) throw ConfigError("mass-control constant K must be >= 0");
  const double base = weighted_mass(traj.snapshots.front(), grid, a) + grid.domain_volume();
  std::vector<EstimateRecord> out;
  for (const auto& snap : traj.snapshots) {
    const double w = weighted_mass(snap, grid, a);
    const double bound = base * std::exp(K * snap.t) * (1.0 + tol);
    out.push_back({"mass_bound", std::nullopt, snap.t, w, bound, bound - w, w <= bound});
  }
  return out;
}

EstimateRecord check_mass_bound(const Trajectory& traj, const GridSpec& grid, std::span<const double> a, double K,
                                double tol) {
  const auto series = mass_bound_series(traj, grid, a, K, tol);
  // Worst relative margin; the horizon is reported as T.
  const auto worst = std::min_element(series.begin(), series.end(), [](const auto& x, const auto& y) {
    return x.margin / *x.bound < y.margin / *y.bound;
  });
  EstimateRecord rec = *worst;
  rec.T = traj.horizon();
  return rec;
}

EstimateRecord mass_subsolution_residual(const Trajectory& traj, const GridSpec& grid, std::span<const double> a,
                                         double C) {
  if (traj.snapshots.empty()) throw ConfigError("trajectory has no snapshots");
  const auto& series = traj.series.at(kReactionMassKey);
  if (series.size() != traj.snapshots.size())
    throw ConfigError("reaction-mass series does not match the snapshots");
  const double w0 = weighted_mass(traj.snapshots.front(), grid, a);
  double worst = -std::numeric_limits<double>::infinity();
  double w_max = std::abs(w0);
  for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
    const double w = weighted_mass(traj.snapshots[s], grid, a);
    w_max = std::max(w_max, std::abs(w));
    worst = std::max(worst, w - w0 - series[s][0]);
  }
  const double abs_reaction = series.back()[1];
  const double floor = 8.0 * DBL_EPSILON * static_cast<double>(traj.steps + 1) * (std::abs(w0) + w_max + abs_reaction);
  const double bound = C * traj.dt_max * abs_reaction + floor;
  return {"mass_subsolution", std::nullopt, traj.horizon(), worst, bound, bound - worst, worst <= bound};
}

// ---------------------------------------------------------------------------
// accumulated integrals
// ---------------------------------------------------------------------------

std::string lp_key(std::size_t i, double p) { return "lp[i=" + std::to_string(i) + ",p=" + num(p) + "]"; }
std::string dirichlet_key(std::size_t i, double M) {
  return "dirichlet[i=" + std::to_string(i) + ",M=" + num(M) + "]";
}
std::string reaction_key(std::size_t i, double M) {
  return "reaction[i=" + std::to_string(i) + ",M=" + num(M) + "]";
}
std::string renorm_key(std::size_t i, const RenormalizationSpec& rho, const TestFunctionSpec& phi) {
  std::string modes;
  for (std::size_t a = 0; a < phi.modes.size(); ++a) modes += (a ? "x" : "") + std::to_string(phi.modes[a]);
  return "renorm[i=" + std::to_string(i) + ",M=" + num(rho.M) + ",k=" + std::to_string(rho.k) + ",modes=" + modes +
         ",T=" + num(phi.t_support) + "]";
}

double spacetime_lp(const Trajectory& traj, std::size_t i, double p) {
  if (!(p >= 1.0)) throw ConfigError("spacetime_lp needs p >= 1");
  return final_of(traj, lp_key(i, p)).at(0);
}

double truncated_dirichlet(const Trajectory& traj, std::size_t i, double M) {
  return final_of(traj, dirichlet_key(i, M)).at(0);
}

double truncated_reaction(const Trajectory& traj, std::size_t i, double M) {
  return final_of(traj, reaction_key(i, M)).at(0);
}

// ---------------------------------------------------------------------------
// Phi
// ---------------------------------------------------------------------------

double Phi(const std::function<double(double)>& phi, double s) {
  if (!(s >= 0.0)) throw std::domain_error("Phi needs s >= 0");
  if (s == 0.0) return 0.0;
  return -adaptive_simpson([&](double x) { return 1.0 / phi(x); }, 1.0, s + 1.0);
}

PhiFunctional phi_functional(std::size_t i, const std::function<double(double)>& phi, const FieldState& state,
                             const GridSpec& grid) {
  const auto& u = state.u.at(i);
  const double phi1 = phi(1.0);
  if (!(phi1 > 0.0)) throw ConfigError("phi must be positive");
  PhiFunctional out;
  out.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < u.size(); ++c) {
    const double v = Phi(phi, u[c]);
    out.value += v;
    const double lower = -u[c] / phi1;
    // The lower bound is attained for constant phi, so allow quadrature error.
    const double slack = 1e-8 * std::abs(lower);
    const double margin = std::min(-v, v - lower + slack);
    if (margin < out.worst_margin) {
      out.worst_margin = margin;
      out.worst_cell = c;
    }
  }
  out.value *= grid.cell_volume();
  out.passed = out.worst_margin >= 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// renormalization
// ---------------------------------------------------------------------------

double Renormalization::rho(double s) const {
  const double r = 1.0 - s / M;
  return r <= 0.0 ? 0.0 : M / (k + 1) * std::pow(r, k + 1);
}

double Renormalization::d1(double s) const {
  const double r = 1.0 - s / M;
  return r <= 0.0 ? 0.0 : -std::pow(r, k);
}

double Renormalization::d2(double s) const {
  const double r = 1.0 - s / M;
  return r <= 0.0 ? 0.0 : k / M * std::pow(r, k - 1);
}

Renormalization build_rho(const RenormalizationSpec& spec) { return {spec.M, spec.k}; }

namespace {

enum class Integrand { P1, P2 };

// Integrand (sigma + eps)^alpha * r(sigma) with r smooth on [0, M].
struct PrimitiveIntegrand {
  const Renormalization& rho;
  Integrand kind;

  double alpha(double m) const { return kind == Integrand::P1 ? 0.5 * (m - 1.0) : m - 1.0; }
  double r(double s) const {
    switch (kind) {
      case Integrand::P1: return std::sqrt(rho.d2(s));
      case Integrand::P2: return rho.d1(s);
    }
    return 0.0;
  }
};

bool singular_at_zero(double m, double eps) { return eps == 0.0 && m < 1.0; }

double integrate_primitive(const Renormalization& rho, double m, double eps, Integrand kind, double a, double b) {
  if (b <= a) return 0.0;
  PrimitiveIntegrand g{rho, kind};
  const double alpha = g.alpha(m);
  if (alpha != std::floor(alpha)) {
    // sigma + eps = tau^p turns the power singularity at -eps into
    // p tau^(p (alpha + 1) - 1), which is constant or at least C^1.
    const double p = alpha < 0.0 ? 1.0 / (alpha + 1.0) : 2.0;
    const double e = p * (alpha + 1.0) - 1.0;
    return adaptive_simpson(
        [&](double tau) { return p * std::pow(tau, e) * g.r(std::max(std::pow(tau, p) - eps, a)); },
        std::pow(a + eps, 1.0 / p), std::pow(b + eps, 1.0 / p));
  }
  return adaptive_simpson([&](double s) { return std::pow(s + eps, alpha) * g.r(s); }, a, b);
}

Integrand integrand_of(PrimitiveTable::Kind kind) {
  switch (kind) {
    case PrimitiveTable::Kind::P1: return Integrand::P1;
    case PrimitiveTable::Kind::P2: return Integrand::P2;
  }
  return Integrand::P1;
}

double compute_primitive(const Renormalization& rho, double m, double eps, double s, Integrand kind) {
  if (!(s >= 0.0)) throw std::domain_error("primitive needs s >= 0");
  if (!(eps >= 0.0 && eps < 1.0)) throw ConfigError("regularization level must lie in [0, 1)");
  if (!(m > 0.0)) throw ConfigError("porous-medium exponent must be positive");
  return integrate_primitive(rho, m, eps, kind, 0.0, std::min(s, rho.M));
}

}  // namespace

double compute_P1(const Renormalization& rho, double m, double eps, double s) {
  return compute_primitive(rho, m, eps, s, Integrand::P1);
}

double compute_P2(const Renormalization& rho, double m, double eps, double s) {
  return compute_primitive(rho, m, eps, s, Integrand::P2);
}

PrimitiveTable::PrimitiveTable(const Renormalization& rho, double m, double eps, Kind kind, std::size_t intervals)
    : rho_(rho), m_(m), eps_(eps), kind_(kind), step_(rho.M / static_cast<double>(intervals)) {
  if (intervals < 1) throw ConfigError("primitive table needs at least one interval");
  singular_start_ = singular_at_zero(m, eps);
  value_.assign(intervals + 1, 0.0);
  slope_.assign(intervals + 1, 0.0);
  for (std::size_t j = 0; j < intervals; ++j) {
    const double a = step_ * static_cast<double>(j);
    const double b = j + 1 == intervals ? rho.M : a + step_;
    value_[j + 1] = value_[j] + integrate_primitive(rho_, m_, eps_, integrand_of(kind_), a, b);
  }
  for (std::size_t j = 0; j <= intervals; ++j) slope_[j] = derivative(step_ * static_cast<double>(j));
}

double PrimitiveTable::derivative(double s) const {
  if (s >= rho_.M) return 0.0;
  PrimitiveIntegrand g{rho_, integrand_of(kind_)};
  return std::pow(s + eps_, g.alpha(m_)) * g.r(s);
}

double PrimitiveTable::operator()(double s) const {
  if (!(s >= 0.0)) throw std::domain_error("primitive needs s >= 0");
  if (s >= rho_.M) return value_.back();
  const auto j = std::min(static_cast<std::size_t>(s / step_), value_.size() - 2);
  if (j == 0 && singular_start_) return integrate_primitive(rho_, m_, eps_, integrand_of(kind_), 0.0, s);
  const double x = (s - step_ * static_cast<double>(j)) / step_;
  const double x2 = x * x, x3 = x2 * x;
  return (2 * x3 - 3 * x2 + 1) * value_[j] + (x3 - 2 * x2 + x) * step_ * slope_[j] + (-2 * x3 + 3 * x2) * value_[j + 1] +
         (x3 - x2) * step_ * slope_[j + 1];
}

RenormTerms renorm_terms(const Trajectory& traj, std::size_t i, const RenormalizationSpec& rho,
                         const TestFunctionSpec& phi) {
  const auto& v = final_of(traj, renorm_key(i, rho, phi));
  return {v.at(0), v.at(1), v.at(2), v.at(3), v.at(4)};
}

EstimateRecord renorm_residual(const Trajectory& traj, const GridSpec& grid, std::size_t i,
                               const RenormalizationSpec& rho, const TestFunctionSpec& phi, double C) {
  if (phi.t_support > traj.horizon() * (1.0 + 1e-12))
    throw ConfigError("test function support " + num(phi.t_support) + " exceeds the horizon " + num(traj.horizon()));
  const auto terms = renorm_terms(traj, i, rho, phi);
  double h2 = 0.0;
  for (double h : grid.h()) h2 = std::max(h2, h * h);
  const double scale = std::abs(terms.dirichlet) + std::abs(terms.flux) + std::abs(terms.reaction);
  const double floor =
      4.0 * DBL_EPSILON * static_cast<double>(traj.steps + 1) * (scale + std::abs(terms.lhs) + std::abs(terms.initial));
  const double bound = C * (h2 + traj.dt_max) * scale + floor;
  const double r = terms.residual();
  return {"renorm:" + rho.describe() + ":" + phi.describe(), i, traj.horizon(), r, bound, bound - r, r <= bound};
}

// ---------------------------------------------------------------------------
// accumulators
// ---------------------------------------------------------------------------

namespace {

class LpAccumulator : public Accumulator {
 public:
  LpAccumulator(std::size_t i, std::vector<double> ps) : i_(i), ps_(std::move(ps)), sums_(ps_.size(), 0.0) {}

  void observe(const StepContext& ctx) override {
    const auto& u = ctx.state.u[i_];
    for (std::size_t k = 0; k < ps_.size(); ++k) {
      double s = 0.0;
      for (double v : u) s += std::pow(v, ps_[k]);
      sums_[k] += ctx.dt * s * ctx.grid.cell_volume();
    }
  }

  void emit(std::map<std::string, std::vector<double>>& out) const override {
    for (std::size_t k = 0; k < ps_.size(); ++k) out[lp_key(i_, ps_[k])] = {sums_[k]};
  }

 private:
  std::size_t i_;
  std::vector<double> ps_;
  std::vector<double> sums_;
};

class TruncatedAccumulator : public Accumulator {
 public:
  TruncatedAccumulator(std::size_t i, std::vector<double> levels, const GridSpec& grid)
      : i_(i), levels_(std::move(levels)), faces_(faces_of(grid)), dir_(levels_.size(), 0.0), react_(levels_.size(), 0.0) {}

  void observe(const StepContext& ctx) override {
    const auto& u = ctx.state.u[i_];
    const auto& f = ctx.reaction[i_];
    const double m = ctx.system.species(i_).m;
    const double eps = ctx.state.eps;
    const double vol = ctx.grid.cell_volume();
    for (std::size_t k = 0; k < levels_.size(); ++k) {
      const double M = levels_[k];
      double d = 0.0;
      for (const auto& face : faces_) {
        const double top = std::max(u[face.lo], u[face.hi]);
        if (top > M) continue;
        const double g = (u[face.hi] - u[face.lo]) / ctx.grid.h(face.axis);
        d += std::pow(top + eps, m - 1.0) * g * g;
      }
      double r = 0.0;
      for (std::size_t c = 0; c < u.size(); ++c)
        if (u[c] <= M) r += std::abs(f[c]);
      dir_[k] += ctx.dt * d * vol;
      react_[k] += ctx.dt * r * vol;
    }
  }

  void emit(std::map<std::string, std::vector<double>>& out) const override {
    for (std::size_t k = 0; k < levels_.size(); ++k) {
      out[dirichlet_key(i_, levels_[k])] = {dir_[k]};
      out[reaction_key(i_, levels_[k])] = {react_[k]};
    }
  }

 private:
  std::size_t i_;
  std::vector<double> levels_;
  std::vector<Face> faces_;
  std::vector<double> dir_, react_;
};

class ReactionMassAccumulator : public Accumulator {
 public:
  void observe(const StepContext& ctx) override {
    const auto& a = ctx.system.weights();
    double s = 0.0, abs_s = 0.0;
    for (std::size_t c = 0; c < ctx.grid.cell_count(); ++c) {
      double v = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) v += a[i] * ctx.reaction[i][c];
      s += v;
      abs_s += std::abs(v);
    }
    signed_ += ctx.dt * s * ctx.grid.cell_volume();
    abs_ += ctx.dt * abs_s * ctx.grid.cell_volume();
  }

  void emit(std::map<std::string, std::vector<double>>& out) const override { out[kReactionMassKey] = {signed_, abs_}; }

 private:
  double signed_ = 0.0, abs_ = 0.0;
};

// One species and one rho against several test functions; the primitives
// are shared between the test functions.
class RenormAccumulator : public Accumulator {
 public:
  RenormAccumulator(std::size_t i, const RenormalizationSpec& spec, std::vector<TestFunctionSpec> phis,
                    const GridSpec& grid, double m, double eps)
      : i_(i),
        spec_(spec),
        rho_(build_rho(spec)),
        p1_(rho_, m, eps, PrimitiveTable::Kind::P1),
        p2_(rho_, m, eps, PrimitiveTable::Kind::P2),
        phis_(std::move(phis)),
        faces_(faces_of(grid)),
        terms_(phis_.size()) {
    const std::size_t n = grid.cell_count();
    for (const auto& phi : phis_) {
      Field s(n), lap(n), sf(faces_.size());
      for (std::size_t c = 0; c < n; ++c) {
        const auto x = grid.center(c);
        s[c] = phi.spatial(x, grid.lengths());
        lap[c] = phi.spatial_laplacian(x, grid.lengths());
      }
      for (std::size_t f = 0; f < faces_.size(); ++f) sf[f] = phi.spatial(faces_[f].center, grid.lengths());
      cell_s_.push_back(std::move(s));
      cell_lap_.push_back(std::move(lap));
      face_s_.push_back(std::move(sf));
    }
  }

  void begin(const StepContext& ctx) override {
    eval(ctx);
    for (std::size_t p = 0; p < phis_.size(); ++p) {
      terms_[p].initial = phis_[p].psi(0.0) * weighted(r_, cell_s_[p]) * ctx.grid.cell_volume();
      terms_[p].lhs -= terms_[p].initial;
    }
  }

  // Space-time integrals use the trapezoid rule in time: half of each step is
  // charged at its start (here) and half at its end (after_step). Against the
  // forward Euler update this cancels the rho'' (du)^2 / 2 Taylor term that a
  // left-point rule leaves behind.
  void observe(const StepContext& ctx) override { accumulate(ctx, ctx.state.t, 0.5 * ctx.dt); }

  // The phi_t term uses the trapezoid rule for rho(u) against the exact change of psi.
  void after_step(const StepContext& ctx) override {
    const double vol = ctx.grid.cell_volume();
    std::vector<double> before(phis_.size());
    for (std::size_t p = 0; p < phis_.size(); ++p) before[p] = weighted(r_, cell_s_[p]);
    eval(ctx);
    const double t1 = ctx.state.t, t0 = t1 - ctx.dt;
    for (std::size_t p = 0; p < phis_.size(); ++p) {
      const double dpsi = phis_[p].psi(t1) - phis_[p].psi(t0);
      if (dpsi != 0.0) terms_[p].lhs -= dpsi * 0.5 * (before[p] + weighted(r_, cell_s_[p])) * vol;
    }
    accumulate(ctx, t1, 0.5 * ctx.dt);
  }

  void emit(std::map<std::string, std::vector<double>>& out) const override {
    for (std::size_t p = 0; p < phis_.size(); ++p) {
      const auto& T = terms_[p];
      out[renorm_key(i_, spec_, phis_[p])] = {T.lhs, T.dirichlet, T.flux, T.reaction, T.initial};
    }
  }

 private:
  static double weighted(const Field& v, const Field& w) {
    double a = 0.0;
    for (std::size_t c = 0; c < v.size(); ++c) a += v[c] * w[c];
    return a;
  }

  // Adds the right-hand side integrands at time t, with time weight w, from the cached arrays.
  void accumulate(const StepContext& ctx, double t, double w) {
    const auto& sp = ctx.system.species(i_);
    const double dm = sp.d * sp.m;
    const double vol = ctx.grid.cell_volume();
    for (std::size_t p = 0; p < phis_.size(); ++p) {
      const double psi = phis_[p].psi(t);
      if (psi == 0.0) continue;
      double flux = 0.0, react = 0.0;
      for (std::size_t c = 0; c < r_.size(); ++c) {
        flux += q2_[c] * cell_lap_[p][c];
        react += d1_[c] * ctx.reaction[i_][c] * cell_s_[p][c];
      }
      double grad = 0.0;
      for (std::size_t f = 0; f < faces_.size(); ++f) {
        const auto& face = faces_[f];
        const double g = (q1_[face.hi] - q1_[face.lo]) / ctx.grid.h(face.axis);
        grad += face_s_[p][f] * g * g;
      }
      auto& T = terms_[p];
      T.dirichlet -= dm * w * psi * grad * vol;
      T.flux += dm * w * psi * flux * vol;
      T.reaction += w * psi * react * vol;
    }
  }

  void eval(const StepContext& ctx) {
    const auto& u = ctx.state.u[i_];
    const std::size_t n = u.size();
    r_.resize(n);
    d1_.resize(n);
    q1_.resize(n);
    q2_.resize(n);
    for (std::size_t c = 0; c < n; ++c) {
      r_[c] = rho_.rho(u[c]);
      d1_[c] = rho_.d1(u[c]);
      q1_[c] = p1_(u[c]);
      q2_[c] = p2_(u[c]);
    }
  }

  std::size_t i_;
  RenormalizationSpec spec_;
  Renormalization rho_;
  PrimitiveTable p1_, p2_;
  std::vector<TestFunctionSpec> phis_;
  std::vector<Face> faces_;
  std::vector<RenormTerms> terms_;
  std::vector<Field> cell_s_, cell_lap_, face_s_;
  Field r_, d1_, q1_, q2_;
};

// The primitives depend on eps, so the renorm accumulator is created lazily
// once the run's eps is known.
class LazyRenorm : public Accumulator {
 public:
  LazyRenorm(std::size_t i, RenormalizationSpec spec, std::vector<TestFunctionSpec> phis)
      : i_(i), spec_(spec), phis_(std::move(phis)) {}

  void begin(const StepContext& ctx) override {
    inner_ = std::make_unique<RenormAccumulator>(i_, spec_, phis_, ctx.grid, ctx.system.species(i_).m, ctx.state.eps);
    inner_->begin(ctx);
  }
  void observe(const StepContext& ctx) override { inner_->observe(ctx); }
  void after_step(const StepContext& ctx) override { inner_->after_step(ctx); }
  void emit(std::map<std::string, std::vector<double>>& out) const override {
    if (inner_) inner_->emit(out);
  }

 private:
  std::size_t i_;
  RenormalizationSpec spec_;
  std::vector<TestFunctionSpec> phis_;
  std::unique_ptr<RenormAccumulator> inner_;
};

}  // namespace

AccumulatorList standard_accumulators(const ReactionSystem& system, const GridSpec& grid,
                                      const AccumulatorOptions& options) {
  AccumulatorList out;
  for (std::size_t i = 0; i < system.size(); ++i) {
    std::vector<double> ps{system.species(i).m + 1.0};
    for (double p : options.extra_lp)
      if (std::find(ps.begin(), ps.end(), p) == ps.end()) ps.push_back(p);
    out.push_back(std::make_unique<LpAccumulator>(i, ps));
    if (!options.truncation_levels.empty())
      out.push_back(std::make_unique<TruncatedAccumulator>(i, options.truncation_levels, grid));
    if (!options.phi_specs.empty())
      for (const auto& rho : options.rho_specs) out.push_back(std::make_unique<LazyRenorm>(i, rho, options.phi_specs));
  }
  out.push_back(std::make_unique<ReactionMassAccumulator>());
  return out;
}

std::vector<RenormalizationSpec> default_rho_specs() { return {{1.0, 3}, {4.0, 3}, {8.0, 5}}; }

std::vector<TestFunctionSpec> default_phi_specs(std::size_t dim, double T) {
  std::vector<TestFunctionSpec> out;
  for (int k : {0, 1, 2}) out.emplace_back(std::vector<int>(dim, k), T);
  out.emplace_back(std::vector<int>(dim, 1), 0.5 * T);
  return out;
}

}  // namespace rdmc::verify
