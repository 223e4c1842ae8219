#include "rdmc/reactions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace rdmc::reactions {

namespace {

double ipow(double s, double e) { return e == 1.0 ? s : std::pow(s, e); }

void require_nonnegative(std::span<const double> s) {
  for (std::size_t j = 0; j < s.size(); ++j)
    if (!(s[j] >= 0.0))
      throw std::domain_error("reaction evaluated at negative or NaN component s_" + std::to_string(j + 1));
}

std::string join(std::span<const double> v) {
  std::ostringstream os;
  os.precision(6);
  os << '(';
  for (std::size_t j = 0; j < v.size(); ++j) os << (j ? ", " : "") << v[j];
  os << ')';
  return os.str();
}

void check_square(const Matrix& M, std::size_t n, const char* name) {
  if (M.size() != n) throw ConfigError(std::string(name) + " must be " + std::to_string(n) + "x" + std::to_string(n));
  for (const auto& row : M)
    if (row.size() != n)
      throw ConfigError(std::string(name) + " must be " + std::to_string(n) + "x" + std::to_string(n));
}

}  // namespace

void eval_into(const ReactionFamily& family, std::span<const double> s, std::span<double> out) {
  require_nonnegative(s);
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Reversible>) {
          double fwd = f.k1, bwd = f.k2;
          for (std::size_t j = 0; j < s.size(); ++j) {
            fwd *= ipow(s[j], f.p[j]);
            bwd *= ipow(s[j], f.q[j]);
          }
          const double net = bwd - fwd;
          for (std::size_t i = 0; i < s.size(); ++i) out[i] = (f.p[i] - f.q[i]) * net;
        } else if constexpr (std::is_same_v<T, CrossAbsorb2>) {
          const double gain = ipow(s[0], f.beta1) * f.g2(s[1]);
          const double loss = f.g1(s[0]) * ipow(s[1], f.beta2);
          out[0] = gain - loss;
          out[1] = -gain + f.lambda * loss;
        } else if constexpr (std::is_same_v<T, PowerLaw2>) {
          const double v = f.k2 * ipow(s[0], f.q1) * ipow(s[1], f.q2) - f.k1 * ipow(s[0], f.p1) * ipow(s[1], f.p2);
          out[0] = v;
          out[1] = -v;
        } else {
          const std::size_t n = s.size();
          for (std::size_t i = 0; i < n; ++i) {
            double v = f.gamma[i] * s[i];
            for (std::size_t j = 0; j < n; ++j) {
              if (f.A[i][j] == 0.0) continue;
              v += f.A[i][j] * ipow(s[j], f.B[i][j]) * ipow(s[i], f.B[j][i]);
            }
            out[i] = v;
          }
        }
      },
      family);
}

std::vector<double> eval(const ReactionFamily& family, std::span<const double> s) {
  check_family_shape(family);
  if (s.size() != species_count(family))
    throw ConfigError("reaction input has " + std::to_string(s.size()) + " components, family expects " +
                      std::to_string(species_count(family)));
  std::vector<double> out(s.size());
  eval_into(family, s, out);
  return out;
}

void regularize_inplace(std::span<double> f, double eps) {
  if (eps == 0.0) return;
  double total = 0.0;
  for (double v : f) total += std::abs(v);
  const double denom = 1.0 + eps * total;
  for (double& v : f) v /= denom;
}

std::vector<double> regularize(std::span<const double> f, double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw ConfigError("regularization level must lie in [0, 1)");
  std::vector<double> out(f.begin(), f.end());
  regularize_inplace(out, eps);
  return out;
}

std::vector<std::vector<double>> generate_samples(std::size_t n_species, const SampleSpec& spec) {
  std::vector<std::vector<double>> out;
  std::size_t per_axis = std::max<std::size_t>(spec.points_per_axis, 2);
  // Keep the tensor grid at desk scale for many species.
  while (per_axis > 2 && std::pow(static_cast<double>(per_axis), static_cast<double>(n_species)) > 2e5) --per_axis;
  std::size_t total = 1;
  for (std::size_t i = 0; i < n_species; ++i) total *= per_axis;
  out.reserve(total + spec.random_points);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::vector<double> s(n_species);
    std::size_t rem = idx;
    for (std::size_t j = 0; j < n_species; ++j) {
      s[j] = spec.s_max * static_cast<double>(rem % per_axis) / static_cast<double>(per_axis - 1);
      rem /= per_axis;
    }
    out.push_back(std::move(s));
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> dist(0.0, spec.s_max);
  for (std::size_t r = 0; r < spec.random_points; ++r) {
    std::vector<double> s(n_species);
    for (auto& v : s) v = dist(rng);
    out.push_back(std::move(s));
  }
  return out;
}

std::string ConditionReport::to_text() const {
  std::ostringstream os;
  os.precision(10);
  os << "[" << (passed ? "PASS" : "FAIL") << "] " << condition << '\n';
  if (species) os << "  species: i=" << (*species + 1) << '\n';
  if (!witness.empty()) os << "  worst sample: " << join(witness) << '\n';
  os << "  worst margin: " << worst_value << '\n';
  if (estimated_K) os << "  estimated K (sampled lower bound on required K): " << *estimated_K << '\n';
  if (!note.empty()) os << "  note: " << note << '\n';
  return os.str();
}

ConditionReport check_quasipositivity(const ReactionFamily& family,
                                      const std::vector<std::vector<double>>& samples, double tol) {
  ConditionReport rep;
  rep.condition = "quasipositivity";
  const std::size_t n = species_count(family);
  std::vector<double> f(n), s(n);
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& sample : samples) {
    for (std::size_t i = 0; i < n; ++i) {
      std::copy(sample.begin(), sample.end(), s.begin());
      s[i] = 0.0;
      eval_into(family, s, f);
      if (f[i] < worst) {
        worst = f[i];
        rep.witness = s;
        rep.species = i;
      }
    }
  }
  rep.worst_value = samples.empty() ? 0.0 : worst;
  rep.passed = rep.worst_value >= -tol;
  if (rep.passed) rep.species.reset();
  return rep;
}

ConditionReport check_mass_control(const ReactionFamily& family, std::span<const double> a,
                                   const std::vector<std::vector<double>>& samples,
                                   std::optional<double> required_K) {
  const std::size_t n = species_count(family);
  if (a.size() != n) throw ConfigError("weight vector a must have one entry per species");
  for (double ai : a)
    if (!(ai > 0.0)) throw ConfigError("mass weights a_i must be positive");
  ConditionReport rep;
  rep.condition = "mass control";
  std::vector<double> f(n);
  double worst_ratio = -std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    eval_into(family, s, f);
    double num = 0.0, scale = 0.0, mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      num += a[i] * f[i];
      scale += std::abs(a[i] * f[i]);
      mass += a[i] * s[i];
    }
    // Exact cancellations should not leak rounding into the estimate.
    if (std::abs(num) <= 1e-12 * scale) num = 0.0;
    const double ratio = num / (mass + 1.0);
    if (ratio > worst_ratio) {
      worst_ratio = ratio;
      rep.witness = s;
    }
  }
  const double K = std::max(0.0, samples.empty() ? 0.0 : worst_ratio);
  rep.estimated_K = K;
  rep.worst_value = samples.empty() ? 0.0 : worst_ratio;
  if (required_K) {
    rep.passed = K <= *required_K * (1.0 + 1e-12);
    rep.worst_value = *required_K - K;
    rep.note = "checked against configured K = " + std::to_string(*required_K);
  } else {
    rep.note = "sampled lower bound on required K";
  }
  return rep;
}

ConditionReport check_cross_absorption(const ReactionSystem& system,
                                       const std::vector<std::vector<double>>& samples, double tol) {
  ConditionReport rep;
  rep.condition = "cross-absorptive growth";
  const std::size_t n = system.size();
  const auto& growth = system.growth();
  std::vector<double> f(n);
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    eval_into(system.family(), s, f);
    for (std::size_t i = 0; i < n; ++i) {
      double others = 1.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) others += std::pow(s[j], growth[j].beta);
      const double lower = -growth[i].phi(s[i]) * others;
      const double margin = f[i] - lower;
      const double allowed = tol + 1e-12 * std::abs(lower);
      if (margin < worst) {
        worst = margin;
        rep.witness = s;
        rep.species = i;
      }
      if (margin < -allowed) rep.passed = false;
    }
  }
  rep.worst_value = samples.empty() ? 0.0 : worst;
  std::ostringstream note;
  for (std::size_t i = 0; i < n; ++i)
    note << (i ? "; " : "") << "phi_" << i + 1 << "(s)=" << growth[i].phi.describe() << ", beta_" << i + 1 << "="
         << growth[i].beta;
  rep.note = note.str();
  if (rep.passed) rep.species.reset();
  return rep;
}

Validation validate_reversible(std::span<const double> p, std::span<const double> q, std::span<const double> m,
                               std::span<const double> a) {
  const std::size_t n = p.size();
  if (q.size() != n || m.size() != n || a.size() != n)
    throw ConfigError("p, q, m and a must all have the same length");
  Validation v;
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lhs += a[i] * p[i];
    rhs += a[i] * q[i];
  }
  if (std::abs(lhs - rhs) > 1e-12 * std::max(std::abs(lhs), std::abs(rhs))) {
    v.accepted = false;
    std::ostringstream os;
    os.precision(12);
    os << "stoichiometric balance violated: sum a_i p_i = " << lhs << " != sum a_i q_i = " << rhs;
    v.reasons.push_back(os.str());
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] == q[i]) continue;
    const bool forward = p[i] > q[i];
    const auto& e = forward ? p : q;
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) sum += e[j] / (m[j] + 1.0);
    if (!(sum < 1.0)) {
      v.accepted = false;
      std::ostringstream os;
      os.precision(12);
      os << (forward ? "forward" : "backward") << " cross-exponent bound violated at i=" << i + 1 << ": sum_{j!=i} "
         << (forward ? "p_j" : "q_j") << "/(m_j+1) = " << sum << " is not < 1";
      v.reasons.push_back(os.str());
    }
  }
  return v;
}

Validation validate_lv(const Matrix& A, const Matrix& B, std::span<const double> m, std::span<const double> gamma) {
  const std::size_t n = m.size();
  if (gamma.size() != n) throw ConfigError("gamma must have one entry per species");
  check_square(A, n, "A");
  check_square(B, n, "B");
  Validation v;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!(B[i][j] > 0.0)) throw ConfigError("Lotka-Volterra exponents B_ij must be positive");
      if (j >= i && A[i][j] + A[j][i] > 0.0) {
        v.accepted = false;
        v.reasons.push_back("interaction dominance violated: A_" + std::to_string(i + 1) + std::to_string(j + 1) +
                            " + A_" + std::to_string(j + 1) + std::to_string(i + 1) + " > 0");
      }
      if (A[i][j] < 0.0 && !(B[i][j] < m[i] + 1.0)) {
        v.accepted = false;
        std::ostringstream os;
        os << "absorption exponent bound violated: A_" << i + 1 << j + 1 << " < 0 but B_" << i + 1 << j + 1 << " = "
           << B[i][j] << " is not < m_" << i + 1 << " + 1 = " << m[i] + 1.0;
        v.reasons.push_back(os.str());
      }
    }
  }
  return v;
}

CrossAbsorb2 as_cross_absorb(const PowerLaw2& f) {
  CrossAbsorb2 c;
  c.g1 = ScalarFn{ScalarFnKind::Power, f.k1, f.p1};
  c.g2 = ScalarFn{ScalarFnKind::Power, f.k2, f.q2};
  c.beta1 = f.q1;
  c.beta2 = f.p2;
  c.lambda = 1.0;
  return c;
}

namespace {

std::vector<SpeciesGrowth> reversible_growth(const Reversible& f, const std::vector<SpeciesParams>& sp) {
  const std::size_t n = sp.size();
  const double kmax = std::max(f.k1, f.k2);
  std::vector<double> beta(n, 0.0);
  std::vector<bool> used(n, false);
  // Young split: for each species with net stoichiometry, pick theta_j with
  // e_j theta_j < m_j + 1 and sum 1/theta_j < 1; beta_j collects the largest
  // resulting exponent over all equations in which s_j appears.
  for (std::size_t i = 0; i < n; ++i) {
    if (f.p[i] == f.q[i]) continue;
    const auto& e = f.p[i] > f.q[i] ? f.p : f.q;
    double S = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) S += e[j] / (sp[j].m + 1.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || e[j] == 0.0) continue;
      double b;
      if (S > 0.0 && S < 1.0) {
        const double eta = 0.5 * (1.0 / S - 1.0);
        b = (sp[j].m + 1.0) / (1.0 + eta);
      } else {
        b = e[j];
      }
      beta[j] = std::max(beta[j], b);
      used[j] = true;
    }
  }
  std::vector<SpeciesGrowth> g(n);
  const double multiplicity = n > 2 ? static_cast<double>(n - 1) : 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    double b = used[i] ? beta[i] : 0.5 * (sp[i].m + 1.0);
    b = std::min(b, (sp[i].m + 1.0) * (1.0 - 1e-9));
    g[i].beta = b;
    g[i].phi.coeff = kmax * (std::abs(f.p[i] - f.q[i]) + 1.0) * multiplicity;
    g[i].phi.power = std::max(f.p[i], f.q[i]);
  }
  return g;
}

std::vector<SpeciesGrowth> cross_absorb_growth(const CrossAbsorb2& f, const std::vector<SpeciesParams>& sp) {
  std::vector<SpeciesGrowth> g(2);
  g[0].beta = std::min(f.beta1, (sp[0].m + 1.0) * (1.0 - 1e-9));
  g[1].beta = std::min(f.beta2, (sp[1].m + 1.0) * (1.0 - 1e-9));
  g[0].phi = GrowthMajorant{1.0, 1.0, f.g1};
  g[1].phi = GrowthMajorant{1.0, 1.0, f.g2};
  return g;
}

std::vector<SpeciesGrowth> lv_growth(const LotkaVolterra& f, const std::vector<SpeciesParams>& sp) {
  const std::size_t n = sp.size();
  std::vector<SpeciesGrowth> g(n);
  std::vector<double> beta(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && f.A[i][j] < 0.0) beta[j] = std::max(beta[j], f.B[i][j]);
  for (std::size_t i = 0; i < n; ++i) {
    double c = std::abs(f.gamma[i]);
    double e = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (f.A[i][j] >= 0.0) continue;
      c = std::max(c, std::abs(f.A[i][j]));
      e = std::max(e, j == i ? 2.0 * f.B[i][i] : f.B[j][i]);
    }
    g[i].phi.coeff = std::max(c, 1e-3) * static_cast<double>(n + 1);
    g[i].phi.power = e;
    const double b = beta[i] > 0.0 ? beta[i] : 0.5 * (sp[i].m + 1.0);
    g[i].beta = std::min(b, (sp[i].m + 1.0) * (1.0 - 1e-9));
  }
  return g;
}

}  // namespace

std::vector<SpeciesGrowth> default_growth(const ReactionFamily& family, const std::vector<SpeciesParams>& species) {
  if (species_count(family) != species.size())
    throw ConfigError("reaction family and species list disagree on the species count");
  return std::visit(
      [&](const auto& f) -> std::vector<SpeciesGrowth> {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Reversible>) {
          return reversible_growth(f, species);
        } else if constexpr (std::is_same_v<T, CrossAbsorb2>) {
          return cross_absorb_growth(f, species);
        } else if constexpr (std::is_same_v<T, PowerLaw2>) {
          return cross_absorb_growth(as_cross_absorb(f), species);
        } else {
          return lv_growth(f, species);
        }
      },
      family);
}

}  // namespace rdmc::reactions
