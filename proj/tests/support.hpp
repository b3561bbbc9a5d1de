#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bifluid/coupling.hpp"
#include "bifluid/diagnostics.hpp"
#include "bifluid/scenario.hpp"

namespace bifluid::testing {

/// Bundled scenario names, 1D first.
const std::vector<std::string>& scenario_names();
std::string scenario_path(const std::string& name);

/// Loads a bundled scenario and applies a cell override.
Scenario bundled(const std::string& name, std::optional<int> cells = std::nullopt);
std::shared_ptr<const Problem> make_problem(const Scenario& s);

/// Errors of a refinement study with the fitted order.
struct Refinement {
  std::vector<int> cells;
  OrderFit fit;
};

/// Manufactured density on (0, length) with velocity u = base + slope x / length.
struct ParabolicCase {
  double length = 1.0;
  double base = 1.0;
  double slope = 0.5;
  std::function<double(double, double)> r, r_t, r_x, r_xx;

  /// r* = 2 + sin(2 pi x) cos t, u = 1 + x/2 on (0,1).
  static ParabolicCase stretching();
  /// r* = 2 + sin(x - t), u = 1 on (0, 2 pi - 1).
  static ParabolicCase travelling_wave();
};

/// Backward-Euler upwind parabolic step against a manufactured solution with the
/// matching source, Robin inflow value and outflow diffusive flux.
/// L2 error at t_end with dt = h/2.
Refinement parabolic_mms(const std::vector<int>& cells, const ParabolicCase& mms, double eps = 0.01,
                         double t_end = 0.5);

/// Upwind transport of s*(t,x) = G((x+2) e^{-t/2}), G(y) = 1 + sin(2 pi y)/2,
/// which is constant along the characteristics of u = 1 + x/2. L2 error at t_end, dt = h/2.
Refinement transport_mms(const std::vector<int>& cells, TransportVariant variant,
                         double t_end = 0.5);

/// Velocity u = 1 + x/2 on (0,1) sampled on faces.
FaceVelocity stretching_faces(const Mesh& mesh);

}  // namespace bifluid::testing
