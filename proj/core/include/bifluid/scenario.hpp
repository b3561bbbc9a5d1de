#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bifluid/coupling.hpp"

namespace bifluid {

/// Malformed scenario text; the message carries "origin:line:column".
class ScenarioParseError : public std::runtime_error {
 public:
  ScenarioParseError(const std::string& what, int line, int column)
      : std::runtime_error(what), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Scalar field: value + slopes + sine mode + Gaussian bumps + seeded noise.
///   f(x) = value + slope_x x/Lx + slope_y y/Ly + sine sin(pi x/Lx) [sin(pi y/Ly)]
///          + sum_b amplitude exp(-|x - center|^2 / width^2) + noise U(-1, 1)
struct FieldSpec {
  struct Bump {
    Vec2 center{};
    double width = 0.1;
    double amplitude = 0.0;
  };
  double value = 0.0;
  double slope_x = 0.0;
  double slope_y = 0.0;
  double sine = 0.0;
  std::vector<Bump> bumps;
  double noise = 0.0;

  /// Deterministic part; noise is added by sample().
  double eval(const Vec2& x, const Vec2& lengths, int dim) const;
  /// Values at the given points; noise drawn from a generator seeded by `seed`.
  std::vector<double> sample(const std::vector<Vec2>& points, const Vec2& lengths, int dim,
                             std::uint64_t seed) const;
};

struct Scenario {
  std::string name;
  std::string description;
  std::string source;  ///< original text, embedded in outputs

  int dim = 1;
  int nx = 100;
  int ny = 1;
  double lx = 1.0;
  double ly = 1.0;

  // Pressure law P = a+ R^g+ + a- Z^g-.
  double a_plus = 1.0;
  double a_minus = 1.0;
  double gamma_plus = 2.0;
  double gamma_minus = 2.0;
  // Closure exponents (default: the pressure exponents).
  double closure_gamma_plus = 2.0;
  double closure_gamma_minus = 2.0;

  double alpha_lo = 0.1;
  double alpha_hi = 0.9;
  std::optional<std::array<double, 2>> cone;  ///< (a_lo, a_hi); default from the data
  double ratio_floor = 0.0;

  std::array<ComponentProfile, 2> boundary_velocity{};
  FieldSpec alpha_b, rho_b, z_b;
  FieldSpec alpha0, rho0, z0;
  std::optional<std::array<ComponentProfile, 2>> initial_velocity;

  SchemeParams params;
  Lift::Kind lift_kind = Lift::Kind::Blend;
  double lift_width = 0.2;

  int snapshots = 10;  ///< number of field frames written by the driver
  std::uint64_t seed = 0;

  Vec2 lengths() const { return {lx, ly}; }
  Mesh mesh() const;
};

/// Parses YAML text. Throws ScenarioParseError on syntax or type errors and
/// on unknown keys; `origin` prefixes the message.
Scenario parse_scenario(const std::string& text, const std::string& origin = "<string>");

/// Reads, parses and validates; throws ValidationError listing every violation.
Scenario load_scenario(const std::string& path);

/// Every violated hypothesis, each prefixed by its identifier in brackets.
std::vector<std::string> validate_scenario(const Scenario& s);

/// Sampled initial and boundary data; throws ValidationError when invalid.
ProblemSpec to_problem_spec(const Scenario& s);

/// Overrides used by the driver: cell count (x; y scaled by the aspect ratio) and time step.
void apply_overrides(Scenario& s, std::optional<int> cells, std::optional<double> dt);

}  // namespace bifluid
