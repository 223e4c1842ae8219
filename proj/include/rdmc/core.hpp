#pragma once

// Domain types shared by every rdmc module. All types are immutable values
// once constructed; constructors validate their invariants and throw.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace rdmc {

using Field = std::vector<double>;
using Matrix = std::vector<std::vector<double>>;

/// Raised for malformed parameters or configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SpeciesParams {
  double d = 1.0;  // diffusion coefficient
  double m = 1.0;  // porous-medium exponent

  SpeciesParams() = default;
  SpeciesParams(double d_, double m_);
};

// ---------------------------------------------------------------------------
// Scalar function registry for the g-functions of the cross-absorptive family.
// All registered kinds satisfy g(0) = 0 and g > 0 on (0, inf).
// ---------------------------------------------------------------------------
enum class ScalarFnKind { Power, ExpMinusOne, SLogOnePlus };

struct ScalarFn {
  ScalarFnKind kind = ScalarFnKind::Power;
  double coeff = 1.0;
  double rate = 1.0;  // exponent for Power, exponential rate for ExpMinusOne, unused otherwise

  double operator()(double s) const;
  std::string describe() const;

  static ScalarFn power(double coeff, double exponent);
  static ScalarFn exp_minus_one(double coeff, double rate);
  static ScalarFn s_log_one_plus(double coeff);
};

ScalarFnKind scalar_fn_kind_from_string(const std::string& name);
std::string to_string(ScalarFnKind kind);

// ---------------------------------------------------------------------------
// Reaction families
// ---------------------------------------------------------------------------

/// f_i = (p_i - q_i) (k2 prod s_j^{q_j} - k1 prod s_j^{p_j})
struct Reversible {
  std::vector<double> p, q;
  double k1 = 1.0, k2 = 1.0;
};

/// f_1 = s1^b1 g2(s2) - g1(s1) s2^b2,  f_2 = -s1^b1 g2(s2) + lambda g1(s1) s2^b2
struct CrossAbsorb2 {
  ScalarFn g1, g2;
  double beta1 = 1.0, beta2 = 1.0;
  double lambda = 1.0;
};

/// f_1 = k2 s1^q1 s2^q2 - k1 s1^p1 s2^p2,  f_2 = -f_1
struct PowerLaw2 {
  double p1 = 1, p2 = 1, q1 = 1, q2 = 1;
  double k1 = 1, k2 = 1;
};

/// f_i = gamma_i s_i + sum_j A_ij s_j^{B_ij} s_i^{B_ji}
struct LotkaVolterra {
  std::vector<double> gamma;
  Matrix A, B;
};

using ReactionFamily = std::variant<Reversible, CrossAbsorb2, PowerLaw2, LotkaVolterra>;

std::size_t species_count(const ReactionFamily& family);
std::string family_name(const ReactionFamily& family);
/// Dimension and sign checks shared by every family; throws ConfigError.
void check_family_shape(const ReactionFamily& family);

/// Positive, strictly increasing majorant phi(s) = coeff (1+s)^power + g(s).
struct GrowthMajorant {
  double coeff = 1.0;
  double power = 1.0;
  std::optional<ScalarFn> extra;

  double operator()(double s) const;
  std::string describe() const;
};

struct SpeciesGrowth {
  double beta = 1.0;
  GrowthMajorant phi;
};

class ReactionSystem {
 public:
  ReactionSystem(std::vector<SpeciesParams> species, ReactionFamily family, std::vector<double> a,
                 double K, std::vector<SpeciesGrowth> growth);

  std::size_t size() const { return species_.size(); }
  const std::vector<SpeciesParams>& species() const { return species_; }
  const SpeciesParams& species(std::size_t i) const { return species_.at(i); }
  const ReactionFamily& family() const { return family_; }
  const std::vector<double>& weights() const { return a_; }
  double K() const { return K_; }
  const std::vector<SpeciesGrowth>& growth() const { return growth_; }

  /// Same system with a different mass-control constant.
  ReactionSystem with_K(double K) const;

 private:
  std::vector<SpeciesParams> species_;
  ReactionFamily family_;
  std::vector<double> a_;
  double K_;
  std::vector<SpeciesGrowth> growth_;
};

// ---------------------------------------------------------------------------
// Grid over the rectangle [0, L_0] x [0, L_1] (or the interval [0, L_0]).
// Cell values are stored row-major: the last axis varies fastest.
// ---------------------------------------------------------------------------
class GridSpec {
 public:
  GridSpec(std::vector<double> lengths, std::vector<std::size_t> cells);

  static GridSpec interval(double length, std::size_t cells) { return GridSpec({length}, {cells}); }

  std::size_t dim() const { return lengths_.size(); }
  const std::vector<double>& lengths() const { return lengths_; }
  const std::vector<std::size_t>& cells() const { return cells_; }
  const std::vector<double>& h() const { return h_; }
  double h(std::size_t axis) const { return h_.at(axis); }

  std::size_t cell_count() const { return count_; }
  double cell_volume() const { return volume_; }
  double domain_volume() const;

  /// Stride of `axis` in the flat layout.
  std::size_t stride(std::size_t axis) const;
  /// Coordinates of the center of flat cell `index`.
  std::array<double, 2> center(std::size_t index) const;
  /// Index along `axis` of flat cell `index`.
  std::size_t axis_index(std::size_t index, std::size_t axis) const;

  bool operator==(const GridSpec& other) const = default;

 private:
  std::vector<double> lengths_;
  std::vector<std::size_t> cells_;
  std::vector<double> h_;
  std::size_t count_ = 0;
  double volume_ = 0.0;
};

struct FieldState {
  double t = 0.0;
  double eps = 0.0;
  std::vector<Field> u;  // u[i][cell]
};

// ---------------------------------------------------------------------------
// Initial data generators. All are bounded and nonnegative.
// ---------------------------------------------------------------------------
struct ConstantInit {
  double value = 0.0;
};

/// base + amplitude * exp(-|x - center|^2 / (2 width^2))
struct BumpInit {
  std::vector<double> center;
  double width = 0.1;
  double amplitude = 1.0;
  double base = 0.0;
};

/// Independent uniform draws in [low, high] per cell.
struct RandomInit {
  std::uint64_t seed = 0;
  double low = 0.0;
  double high = 1.0;
};

/// base + amplitude * prod_j cos(k_j pi x_j / L_j); requires base >= |amplitude|.
struct CosineInit {
  std::vector<int> modes;
  double base = 1.0;
  double amplitude = 0.5;
};

using InitGenerator = std::variant<ConstantInit, BumpInit, RandomInit, CosineInit>;

struct InitialData {
  std::vector<InitGenerator> species;

  /// Sample every generator at the cell centers of `grid`.
  std::vector<Field> generate(const GridSpec& grid) const;
};

// ---------------------------------------------------------------------------
// Renormalization rho(s) = M/(k+1) (1 - s/M)_+^{k+1}.
// ---------------------------------------------------------------------------
struct RenormalizationSpec {
  double M = 1.0;
  int k = 3;

  RenormalizationSpec() = default;
  RenormalizationSpec(double M_, int k_);
  std::string describe() const;
};

// ---------------------------------------------------------------------------
// Test function phi(x,t) = psi(t) prod_j (1 + cos(k_j pi x_j / L_j)) / 2 with
// psi(t) = (1 - t/T)_+^2. Satisfies the homogeneous Neumann condition.
// ---------------------------------------------------------------------------
struct TestFunctionSpec {
  std::vector<int> modes;
  double t_support = 1.0;

  TestFunctionSpec() = default;
  TestFunctionSpec(std::vector<int> modes_, double t_support_);

  double psi(double t) const;
  double dpsi(double t) const;
  /// Spatial factor and its Laplacian at point x (lengths give the domain).
  double spatial(const std::array<double, 2>& x, const std::vector<double>& lengths) const;
  double spatial_laplacian(const std::array<double, 2>& x, const std::vector<double>& lengths) const;

  double value(const std::array<double, 2>& x, double t, const std::vector<double>& lengths) const {
    return psi(t) * spatial(x, lengths);
  }
  std::string describe() const;
};

struct SweepSpec {
  std::vector<double> eps_list;
  double zeta_cutoff = 0.0;  // <= 0 selects the automatic level

  /// kappa_i = max((m_i + 1) / 2, 2)
  static double kappa(double m);
};

}  // namespace rdmc
