#pragma once

#include <optional>
#include <string>
#include <vector>

namespace bifluid::cli {

struct Options {
  std::string scenario;
  std::string out = "out";
  std::string trajectory;  ///< certify input
  std::vector<double> eps_list;
  std::vector<double> delta_list;
  std::optional<int> cells;
  std::optional<double> dt;
  std::optional<int> snapshots;
  bool quiet = false;
};

// Each returns the process exit code: 0 when every certificate passes,
// 1 when some fail, 2 on input or runtime errors.
int simulate(const Options& o);
int sweep_eps(const Options& o);
int sweep_delta(const Options& o);
int certify(const Options& o);
int alpha_roundtrip(const Options& o);
int validate(const Options& o);

}  // namespace bifluid::cli
