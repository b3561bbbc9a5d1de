#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace bifluid::cli;
  CLI::App app{"Bi-fluid compressible flow lab with inflow/outflow boundaries"};
  app.require_subcommand(1);

  Options o;
  auto common = [&](CLI::App* sub, bool needs_scenario = true) {
    auto* s = sub->add_option("--scenario", o.scenario, "Scenario file (YAML)")->check(CLI::ExistingFile);
    if (needs_scenario) s->required();
    sub->add_option("--out", o.out, "Output directory")->capture_default_str();
    sub->add_option("--cells", o.cells, "Override the cell count along x")->check(CLI::PositiveNumber);
    sub->add_option("--dt", o.dt, "Override the time step")->check(CLI::PositiveNumber);
    sub->add_option("--snapshots", o.snapshots, "Number of field frames")->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", o.quiet, "Suppress the summary table");
  };

  auto* sim = app.add_subcommand("simulate", "Run a scenario and certify the trajectory");
  common(sim);
  auto* se = app.add_subcommand("sweep-eps", "Sweep the diffusion parameter");
  common(se);
  se->add_option("--eps-list", o.eps_list, "Comma-separated eps values, decreasing")->delimiter(',')->required();
  auto* sd = app.add_subcommand("sweep-delta", "Sweep the artificial-pressure parameter");
  common(sd);
  sd->add_option("--delta-list", o.delta_list, "Comma-separated delta values, decreasing")->delimiter(',')->required();
  auto* ce = app.add_subcommand("certify", "Recompute certificates from a trajectory file");
  ce->add_option("trajectory", o.trajectory, "trajectory.json written by simulate")->required()->check(CLI::ExistingFile);
  ce->add_option("--out", o.out, "Output directory")->capture_default_str();
  ce->add_flag("--quiet", o.quiet, "Suppress the summary table");
  auto* ar = app.add_subcommand("alpha-roundtrip", "Reconstruct the volume fraction and check the closure");
  common(ar);
  auto* va = app.add_subcommand("validate", "Check a scenario against the model hypotheses");
  common(va);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*sim) return simulate(o);
  if (*se) return sweep_eps(o);
  if (*sd) return sweep_delta(o);
  if (*ce) return certify(o);
  if (*ar) return alpha_roundtrip(o);
  if (*va) return validate(o);
  return 2;
}
