#include "rdmc/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "rdmc/trajectory.hpp"

namespace rdmc {

namespace {

std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

SpeciesParams::SpeciesParams(double d_, double m_) : d(d_), m(m_) {
  if (!positive_finite(d)) throw ConfigError("diffusion coefficient must be positive, got " + fmt_num(d));
  if (!positive_finite(m)) throw ConfigError("porous-medium exponent must be positive, got " + fmt_num(m));
}

double ScalarFn::operator()(double s) const {
  switch (kind) {
    case ScalarFnKind::Power:
      return coeff * std::pow(s, rate);
    case ScalarFnKind::ExpMinusOne:
      return coeff * std::expm1(rate * s);
    case ScalarFnKind::SLogOnePlus:
      return coeff * s * std::log1p(s);
  }
  return 0.0;
}

std::string ScalarFn::describe() const {
  switch (kind) {
    case ScalarFnKind::Power:
      return fmt_num(coeff) + "*s^" + fmt_num(rate);
    case ScalarFnKind::ExpMinusOne:
      return fmt_num(coeff) + "*(exp(" + fmt_num(rate) + "*s)-1)";
    case ScalarFnKind::SLogOnePlus:
      return fmt_num(coeff) + "*s*log(1+s)";
  }
  return "?";
}

ScalarFn ScalarFn::power(double coeff, double exponent) {
  if (!positive_finite(coeff) || !positive_finite(exponent))
    throw ConfigError("power g-function needs positive coefficient and exponent");
  return {ScalarFnKind::Power, coeff, exponent};
}

ScalarFn ScalarFn::exp_minus_one(double coeff, double rate) {
  if (!positive_finite(coeff) || !positive_finite(rate))
    throw ConfigError("exp-minus-one g-function needs positive coefficient and rate");
  return {ScalarFnKind::ExpMinusOne, coeff, rate};
}

ScalarFn ScalarFn::s_log_one_plus(double coeff) {
  if (!positive_finite(coeff)) throw ConfigError("s*log(1+s) g-function needs a positive coefficient");
  return {ScalarFnKind::SLogOnePlus, coeff, 1.0};
}

ScalarFnKind scalar_fn_kind_from_string(const std::string& name) {
  if (name == "power") return ScalarFnKind::Power;
  if (name == "expm1" || name == "exp_minus_one") return ScalarFnKind::ExpMinusOne;
  if (name == "slog1p" || name == "s_log_one_plus") return ScalarFnKind::SLogOnePlus;
  throw ConfigError("unknown g-function kind '" + name + "' (expected power, expm1 or slog1p)");
}

std::string to_string(ScalarFnKind kind) {
  switch (kind) {
    case ScalarFnKind::Power:
      return "power";
    case ScalarFnKind::ExpMinusOne:
      return "expm1";
    case ScalarFnKind::SLogOnePlus:
      return "slog1p";
  }
  return "?";
}

std::size_t species_count(const ReactionFamily& family) {
  return std::visit(
      [](const auto& f) -> std::size_t {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Reversible>) {
          return f.p.size();
        } else if constexpr (std::is_same_v<T, LotkaVolterra>) {
          return f.gamma.size();
        } else {
          return 2;
        }
      },
      family);
}

std::string family_name(const ReactionFamily& family) {
  switch (family.index()) {
    case 0:
      return "reversible";
    case 1:
      return "cross_absorb2";
    case 2:
      return "power_law2";
    default:
      return "lotka_volterra";
  }
}

void check_family_shape(const ReactionFamily& family) {
  std::visit(
      [](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Reversible>) {
          if (f.p.empty() || f.q.size() != f.p.size())
            throw ConfigError("reversible family needs nonempty p and q of equal length");
          for (std::size_t i = 0; i < f.p.size(); ++i)
            if (!(f.p[i] >= 1.0) || !(f.q[i] >= 1.0) || !std::isfinite(f.p[i]) || !std::isfinite(f.q[i]))
              throw ConfigError("reversible exponents p_i, q_i must be >= 1");
          if (!positive_finite(f.k1) || !positive_finite(f.k2))
            throw ConfigError("reversible rates k1, k2 must be positive");
        } else if constexpr (std::is_same_v<T, CrossAbsorb2>) {
          if (!(f.beta1 >= 1.0) || !(f.beta2 >= 1.0)) throw ConfigError("cross-absorptive exponents must be >= 1");
          if (!(f.lambda >= 0.0 && f.lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
          for (const auto* g : {&f.g1, &f.g2})
            if (!positive_finite(g->coeff) || !positive_finite(g->rate))
              throw ConfigError("g-functions need positive parameters");
        } else if constexpr (std::is_same_v<T, PowerLaw2>) {
          for (double e : {f.p1, f.p2, f.q1, f.q2})
            if (!(e >= 1.0) || !std::isfinite(e)) throw ConfigError("power-law exponents must be >= 1");
          if (!positive_finite(f.k1) || !positive_finite(f.k2))
            throw ConfigError("power-law rates k1, k2 must be positive");
        } else {
          const std::size_t n = f.gamma.size();
          if (n == 0) throw ConfigError("Lotka-Volterra family needs at least one species");
          if (f.A.size() != n || f.B.size() != n) throw ConfigError("A and B must be NxN");
          for (std::size_t i = 0; i < n; ++i) {
            if (f.A[i].size() != n || f.B[i].size() != n) throw ConfigError("A and B must be NxN");
            for (double b : f.B[i])
              if (!positive_finite(b)) throw ConfigError("Lotka-Volterra exponents B_ij must be positive");
          }
        }
      },
      family);
}

double GrowthMajorant::operator()(double s) const {
  double v = coeff * std::pow(1.0 + s, power);
  if (extra) v += (*extra)(s);
  return v;
}

std::string GrowthMajorant::describe() const {
  std::string out = fmt_num(coeff) + "*(1+s)^" + fmt_num(power);
  if (extra) out += " + " + extra->describe();
  return out;
}

ReactionSystem::ReactionSystem(std::vector<SpeciesParams> species, ReactionFamily family,
                               std::vector<double> a, double K, std::vector<SpeciesGrowth> growth)
    : species_(std::move(species)),
      family_(std::move(family)),
      a_(std::move(a)),
      K_(K),
      growth_(std::move(growth)) {
  const std::size_t n = species_.size();
  if (n == 0) throw ConfigError("a reaction system needs at least one species");
  check_family_shape(family_);
  if (species_count(family_) != n)
    throw ConfigError("reaction family has " + std::to_string(species_count(family_)) +
                      " species but the system declares " + std::to_string(n));
  if (a_.size() != n) throw ConfigError("weight vector a must have one entry per species");
  for (double ai : a_)
    if (!positive_finite(ai)) throw ConfigError("mass weights a_i must be positive");
  if (!std::isfinite(K_) || K_ < 0.0) throw ConfigError("mass-control constant K must be >= 0");
  if (growth_.size() != n) throw ConfigError("growth data must have one entry per species");
  for (std::size_t i = 0; i < n; ++i) {
    const auto& g = growth_[i];
    if (!positive_finite(g.beta))
      throw ConfigError("growth exponent beta_" + std::to_string(i + 1) + " must be positive");
    if (!(g.beta < species_[i].m + 1.0))
      throw ConfigError("growth exponent beta_" + std::to_string(i + 1) + " = " + fmt_num(g.beta) +
                        " must be < m_" + std::to_string(i + 1) + " + 1 = " + fmt_num(species_[i].m + 1.0));
    if (!positive_finite(g.phi.coeff) || !positive_finite(g.phi.power))
      throw ConfigError("growth majorant phi_" + std::to_string(i + 1) +
                        " needs positive coefficient and power (strictly increasing)");
  }
}

ReactionSystem ReactionSystem::with_K(double K) const {
  return ReactionSystem(species_, family_, a_, K, growth_);
}

GridSpec::GridSpec(std::vector<double> lengths, std::vector<std::size_t> cells)
    : lengths_(std::move(lengths)), cells_(std::move(cells)) {
  if (lengths_.empty() || lengths_.size() > 2) throw ConfigError("grid dimension must be 1 or 2");
  if (cells_.size() != lengths_.size()) throw ConfigError("grid needs one cell count per axis");
  count_ = 1;
  volume_ = 1.0;
  for (std::size_t a = 0; a < lengths_.size(); ++a) {
    if (!positive_finite(lengths_[a])) throw ConfigError("grid lengths must be positive");
    if (cells_[a] == 0) throw ConfigError("grid cell counts must be positive");
    h_.push_back(lengths_[a] / static_cast<double>(cells_[a]));
    count_ *= cells_[a];
    volume_ *= h_.back();
  }
}

double GridSpec::domain_volume() const {
  double v = 1.0;
  for (double l : lengths_) v *= l;
  return v;
}

std::size_t GridSpec::stride(std::size_t axis) const {
  std::size_t s = 1;
  for (std::size_t a = axis + 1; a < cells_.size(); ++a) s *= cells_[a];
  return s;
}

std::size_t GridSpec::axis_index(std::size_t index, std::size_t axis) const {
  return (index / stride(axis)) % cells_[axis];
}

std::array<double, 2> GridSpec::center(std::size_t index) const {
  std::array<double, 2> x{0.0, 0.0};
  for (std::size_t a = 0; a < dim(); ++a)
    x[a] = (static_cast<double>(axis_index(index, a)) + 0.5) * h_[a];
  return x;
}

std::vector<Field> InitialData::generate(const GridSpec& grid) const {
  std::vector<Field> out;
  out.reserve(species.size());
  for (const auto& gen : species) {
    Field f(grid.cell_count(), 0.0);
    std::visit(
        [&](const auto& g) {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, ConstantInit>) {
            if (!(g.value >= 0.0) || !std::isfinite(g.value))
              throw ConfigError("constant initial value must be finite and >= 0");
            std::fill(f.begin(), f.end(), g.value);
          } else if constexpr (std::is_same_v<T, BumpInit>) {
            if (g.center.size() != grid.dim()) throw ConfigError("bump center must have one entry per axis");
            if (!positive_finite(g.width)) throw ConfigError("bump width must be positive");
            if (!(g.amplitude >= 0.0) || !(g.base >= 0.0))
              throw ConfigError("bump amplitude and base must be >= 0");
            for (std::size_t c = 0; c < f.size(); ++c) {
              const auto x = grid.center(c);
              double r2 = 0.0;
              for (std::size_t a = 0; a < grid.dim(); ++a) r2 += (x[a] - g.center[a]) * (x[a] - g.center[a]);
              f[c] = g.base + g.amplitude * std::exp(-r2 / (2.0 * g.width * g.width));
            }
          } else if constexpr (std::is_same_v<T, RandomInit>) {
            if (!(g.low >= 0.0) || !(g.high >= g.low) || !std::isfinite(g.high))
              throw ConfigError("random initial data needs 0 <= low <= high < inf");
            std::mt19937_64 rng(g.seed);
            std::uniform_real_distribution<double> dist(g.low, g.high);
            for (auto& v : f) v = dist(rng);
          } else {
            if (g.modes.size() != grid.dim()) throw ConfigError("cosine modes must have one entry per axis");
            if (!(g.base >= std::abs(g.amplitude))) throw ConfigError("cosine initial data needs base >= |amplitude|");
            for (std::size_t c = 0; c < f.size(); ++c) {
              const auto x = grid.center(c);
              double prod = 1.0;
              for (std::size_t a = 0; a < grid.dim(); ++a)
                prod *= std::cos(g.modes[a] * std::numbers::pi * x[a] / grid.lengths()[a]);
              f[c] = std::max(0.0, g.base + g.amplitude * prod);
            }
          }
        },
        gen);
    out.push_back(std::move(f));
  }
  return out;
}

RenormalizationSpec::RenormalizationSpec(double M_, int k_) : M(M_), k(k_) {
  if (!positive_finite(M)) throw ConfigError("renormalization level M must be positive");
  if (k < 2) throw ConfigError("renormalization degree k must be >= 2");
}

std::string RenormalizationSpec::describe() const {
  return "M=" + fmt_num(M) + ",k=" + std::to_string(k);
}

TestFunctionSpec::TestFunctionSpec(std::vector<int> modes_, double t_support_)
    : modes(std::move(modes_)), t_support(t_support_) {
  if (modes.empty() || modes.size() > 2) throw ConfigError("test function needs 1 or 2 spatial modes");
  for (int k : modes)
    if (k < 0) throw ConfigError("test function modes must be nonnegative");
  if (!positive_finite(t_support)) throw ConfigError("test function time support must be positive");
}

double TestFunctionSpec::psi(double t) const {
  if (t >= t_support) return 0.0;
  const double r = 1.0 - t / t_support;
  return r * r;
}

double TestFunctionSpec::dpsi(double t) const {
  if (t >= t_support) return 0.0;
  return -2.0 * (1.0 - t / t_support) / t_support;
}

double TestFunctionSpec::spatial(const std::array<double, 2>& x, const std::vector<double>& lengths) const {
  double v = 1.0;
  for (std::size_t a = 0; a < modes.size(); ++a)
    v *= 0.5 * (1.0 + std::cos(modes[a] * std::numbers::pi * x[a] / lengths.at(a)));
  return v;
}

double TestFunctionSpec::spatial_laplacian(const std::array<double, 2>& x,
                                           const std::vector<double>& lengths) const {
  double total = 0.0;
  for (std::size_t a = 0; a < modes.size(); ++a) {
    const double w = modes[a] * std::numbers::pi / lengths.at(a);
    double term = -0.5 * w * w * std::cos(w * x[a]);
    for (std::size_t b = 0; b < modes.size(); ++b) {
      if (b == a) continue;
      term *= 0.5 * (1.0 + std::cos(modes[b] * std::numbers::pi * x[b] / lengths.at(b)));
    }
    total += term;
  }
  return total;
}

std::string TestFunctionSpec::describe() const {
  std::string out = "modes=";
  for (std::size_t a = 0; a < modes.size(); ++a) out += (a ? "x" : "") + std::to_string(modes[a]);
  return out + ",T=" + fmt_num(t_support);
}

double SweepSpec::kappa(double m) { return std::max((m + 1.0) / 2.0, 2.0); }

const std::vector<double>& Trajectory::final_value(const std::string& key) const {
  auto it = series.find(key);
  if (it == series.end() || it->second.empty())
    throw std::out_of_range("trajectory has no accumulator '" + key + "'; register it before running");
  return it->second.back();
}

}  // namespace rdmc
