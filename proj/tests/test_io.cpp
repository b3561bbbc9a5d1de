#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <unistd.h>

#include "bifluid/io.hpp"
#include "support.hpp"

using namespace bifluid;
using namespace bifluid::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bifluid_io_" + std::to_string(::getpid()));
  fs::create_directories(p);
  return p / name;
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(FormatExact, RoundTrips) {
  for (double v : {0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::numeric_limits<double>::min(),
                   std::numeric_limits<double>::max(), std::nextafter(1.0, 2.0)}) {
    const std::string s = format_exact(v);
    EXPECT_EQ(std::stod(s), v) << s;
    EXPECT_EQ(s.find(','), std::string::npos);
  }
}

TEST(SnapshotIndices, EndpointsAndSpacing) {
  EXPECT_EQ(snapshot_indices(10, 5), (std::vector<std::size_t>{0, 2, 4, 6, 8, 10}));
  EXPECT_EQ(snapshot_indices(3, 10), (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_EQ(snapshot_indices(7, 1), (std::vector<std::size_t>{0, 7}));
  EXPECT_EQ(snapshot_indices(0, 4), (std::vector<std::size_t>{0}));
  const auto idx = snapshot_indices(1000, 7);
  for (std::size_t i = 1; i < idx.size(); ++i) EXPECT_LT(idx[i - 1], idx[i]);
}

TEST(TrajectoryFile, RoundTripIsBitwise) {
  Scenario s = bundled("inflow-fill", 30);
  const auto pb = make_problem(s);
  const Trajectory t = run_level1(pb);
  RunOrigin origin{s.source, s.name, 30, std::nullopt};
  const fs::path path = scratch("trajectory.json");
  write_trajectory_json(path.string(), t, origin);

  RunOrigin back;
  const Trajectory r = read_trajectory_json(path.string(), &back);
  EXPECT_EQ(back.scenario_name, "inflow-fill");
  EXPECT_EQ(back.scenario_source, s.source);
  EXPECT_EQ(back.cells, 30);
  EXPECT_FALSE(back.dt.has_value());
  ASSERT_EQ(r.steps.size(), t.steps.size());
  for (int sp = 0; sp < 4; ++sp) EXPECT_EQ(r.initial.density[sp], t.initial.density[sp]);
  for (std::size_t n = 0; n < t.steps.size(); ++n) {
    const auto& a = t.steps[n];
    const auto& b = r.steps[n];
    EXPECT_EQ(a.time, b.time);
    EXPECT_EQ(a.dt, b.dt);
    for (int sp = 0; sp < 4; ++sp) EXPECT_EQ(a.density[sp], b.density[sp]);
    EXPECT_TRUE(a.coeffs == b.coeffs);
    EXPECT_TRUE(a.coeffs_iter == b.coeffs_iter);
    EXPECT_EQ(a.faces.interior, b.faces.interior);
    EXPECT_EQ(a.faces.boundary, b.faces.boundary);
    EXPECT_EQ(a.iterations, b.iterations);
  }

  CertifyOptions fast;
  fast.weak_ledgers = false;
  const auto c1 = certify_trajectory(t, fast);
  const auto c2 = certify_trajectory(r, fast);
  ASSERT_EQ(c1.entries.size(), c2.entries.size());
  for (std::size_t i = 0; i < c1.entries.size(); ++i) {
    EXPECT_EQ(c1.entries[i].name, c2.entries[i].name);
    EXPECT_EQ(c1.entries[i].value, c2.entries[i].value) << c1.entries[i].name;
  }
}

TEST(TrajectoryFile, MissingOrCorruptInputThrows) {
  EXPECT_ANY_THROW(read_trajectory_json(scratch("absent.json").string()));
  const fs::path bad = scratch("bad.json");
  std::ofstream(bad) << "{\"steps\": [";
  EXPECT_ANY_THROW(read_trajectory_json(bad.string()));
}

TEST(CsvOutputs, FieldsAndTimeseriesShape) {
  const Scenario s = bundled("rectangle-2d");
  const auto pb = make_problem(s);
  const Trajectory t = run_level1(pb);
  const auto frames = snapshot_indices(t.steps.size(), 3);
  const fs::path fields = scratch("fields.csv");
  write_fields_csv(fields.string(), t, frames);
  const auto lines = read_lines(fields);
  ASSERT_FALSE(lines.empty());
  EXPECT_EQ(lines[0], "step,time,cell,x,y,rho,z,R,Z,ux,uy,alpha");
  EXPECT_EQ(lines.size(), 1 + frames.size() * pb->mesh().cell_count());
  for (std::size_t i = 1; i < lines.size(); ++i) EXPECT_EQ(std::count(lines[i].begin(), lines[i].end(), ','), 11);

  const fs::path ts = scratch("timeseries.csv");
  write_timeseries_csv(ts.string(), t, energy_ledger(t));
  const auto rows = read_lines(ts);
  EXPECT_EQ(rows.size(), t.steps.size() + 2);
  const auto cols = std::count(rows[0].begin(), rows[0].end(), ',');
  for (const auto& r : rows) EXPECT_EQ(std::count(r.begin(), r.end(), ','), cols);
}

TEST(CsvOutputs, WritersAreDeterministic) {
  const auto pb = make_problem(bundled("smooth", 40));
  const Trajectory a = run_level1(pb);
  const Trajectory b = run_level1(pb);
  const fs::path pa = scratch("a.json");
  const fs::path pb_path = scratch("b.json");
  write_trajectory_json(pa.string(), a, RunOrigin{});
  write_trajectory_json(pb_path.string(), b, RunOrigin{});
  EXPECT_EQ(slurp(pa), slurp(pb_path));
}

TEST(Report, JsonAndSummary) {
  CertificateReport r;
  r.add_abs("mass", 1e-14, 1e-10, "relative");
  r.add_at_least("energy", -1.0, 1e-6);
  const fs::path p = scratch("report.json");
  write_report_json(p.string(), r, "title");
  const std::string text = slurp(p);
  EXPECT_NE(text.find("\"mass\""), std::string::npos);
  EXPECT_NE(text.find("\"energy\""), std::string::npos);
  std::ostringstream os;
  print_summary(os, r, "title");
  EXPECT_NE(os.str().find("mass"), std::string::npos);
  EXPECT_NE(os.str().find("FAIL"), std::string::npos);
}
