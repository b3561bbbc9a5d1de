#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bifluid/coupling.hpp"
#include "bifluid/diagnostics.hpp"
#include "bifluid/scenario.hpp"

namespace bifluid {

/// What a trajectory file needs to rebuild its Problem.
struct RunOrigin {
  std::string scenario_source;
  std::string scenario_name;
  std::optional<int> cells;
  std::optional<double> dt;
};

/// Rebuilds the problem from the embedded scenario text plus overrides.
std::shared_ptr<const Problem> problem_from_origin(const RunOrigin& origin);

/// Full-precision JSON of every step (densities, coefficients, iterate).
void write_trajectory_json(const std::string& path, const Trajectory& traj, const RunOrigin& origin);
/// Inverse of write_trajectory_json; face velocities are recomputed from the stored iterates.
Trajectory read_trajectory_json(const std::string& path, RunOrigin* origin = nullptr);

/// Indices of the states written as field frames (always includes 0 and the last).
std::vector<std::size_t> snapshot_indices(std::size_t steps, int snapshots);

/// One row per (frame, cell): step,time,cell,x,y,rho,z,R,Z,ux,uy,alpha.
void write_fields_csv(const std::string& path, const Trajectory& traj, const std::vector<std::size_t>& frames);

/// One row per state with scalar diagnostics.
void write_timeseries_csv(const std::string& path, const Trajectory& traj, const EnergyLedger& energy);

void write_report_json(const std::string& path, const CertificateReport& report, const std::string& title);

/// Sweep digest: JSON with one object per member and a CSV with one row per member.
void write_sweep_json(const std::string& path, const SweepReport& sweep);
void write_sweep_csv(const std::string& path, const SweepReport& sweep);

/// Aligned table of certificates for standard output.
void print_summary(std::ostream& os, const CertificateReport& report, const std::string& title);

/// Formats a double with 17 significant digits (round-trip exact, locale independent).
std::string format_exact(double v);

}  // namespace bifluid
