#include <doctest.h>

#include "dres/config.hpp"
#include "dres/csv.hpp"
#include "dres/plot.hpp"

#include <cmath>
#include <filesystem>
#include <set>

using namespace dres;
namespace fs = std::filesystem;

namespace {

bool mentions(const ConfigError& e, const std::string& key) {
  for (const auto& i : e.issues())
    if (i.key == key) return true;
  return false;
}

fs::path scratch_dir() {
  const fs::path d = fs::temp_directory_path() / "dres_unit_tests";
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("minimal portrait document gives the default parameters") {
  const RunConfig c = parse_config("study = portrait\n");
  CHECK(c.study == StudyKind::Portrait);
  CHECK(c.epsilon == 1e-4);
  CHECK(c.delta == doctest::Approx(kTwoPi<double> * 5e-4));
  CHECK(c.kappa == 0.1);
  CHECK(c.psi0 == 0.0);
  CHECK(c.J_avg == 0.01);
  CHECK(c.effective_N() == 10000);
  CHECK(c.effective_particles() == 500);
  RunConfig full = c;
  full.desk_scale = false;
  CHECK(full.effective_N() == 100000);
  CHECK(full.effective_particles() == 3000);
  CHECK(c.delta_hat == std::vector<double>{0.1, 0.25, 1.0});
}

TEST_CASE("negative epsilon is a range error naming the key") {
  try {
    parse_config("[map]\nepsilon = -1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "map.epsilon"));
    CHECK(e.issues().front().line == 2);
  }
}

TEST_CASE("duplicate keys report both lines") {
  try {
    parse_config("[map]\nkappa = 0.1\n\nkappa = 0.2\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    REQUIRE(e.issues().size() == 1);
    CHECK(e.issues()[0].line == 4);
    CHECK(e.issues()[0].message.find("line 2") != std::string::npos);
  }
}

TEST_CASE("every error is collected") {
  try {
    parse_config("colour = red\n[grid]\nresolution = many\n[map]\nepsilon = -2\n[nowhere]\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.issues().size() == 4);
    CHECK(mentions(e, "run.colour"));
    CHECK(mentions(e, "grid.resolution"));
    CHECK(mentions(e, "map.epsilon"));
  }
}

TEST_CASE("kappa outside (-1, 1) only warns") {
  std::vector<ConfigIssue> warnings;
  const RunConfig c = parse_config("[map]\nkappa = 1.5\n", &warnings);
  CHECK(c.kappa == 1.5);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].key == "map.kappa");
}

TEST_CASE("config round-trips through its text form") {
  RunConfig c;
  CHECK(parse_config(emit_config(c)) == c);
  c.study = StudyKind::Scan;
  c.out = "results/run 1";
  c.seed = 18446744073709551615ULL;
  c.desk_scale = false;
  c.epsilon = 1.0 / 3.0;
  c.psi0 = kPi<double> / 8;
  c.delta = kTwoPi<double> * 5e-4;
  c.distribution = DistributionKind::AnnularUniform;
  c.j_min = 0.001;
  c.j_max = 0.0015;
  c.scan_axis = "psi0";
  c.scan_values = {0.0, 0.1, 0.7853981633974483};
  c.J_values.clear();
  c.check_resolution = false;
  c.resonance_num = 2;
  c.resonance_den = 8;
  CHECK(parse_config(emit_config(c)) == c);
}

TEST_CASE("csv tables") {
  SUBCASE("empty table is header only") {
    CHECK(to_csv(areas_table({})) ==
          "delta_hat,A_East,A_North,A_West,A_South,A_Core,err_bound,delta[rad/turn],epsilon,psi0[rad],resolution,"
          "half_width,n_turns,indeterminate_cells\n");
  }
  SUBCASE("trap schema has one column per region plus escaped and share") {
    const Table t = trap_table("J_avg", {}, {});
    for (const char* name : {"East", "North", "West", "South", "Core", "External", "escaped", "share"})
      CHECK(std::find(t.header.begin(), t.header.end(), name) != t.header.end());
  }
  SUBCASE("numbers survive a write and read at full precision") {
    Table t;
    t.header = {"a", "b", "c"};
    t.add({1.0 / 3.0, std::int64_t{-7}, std::string("East")});
    const fs::path path = scratch_dir() / "roundtrip.csv";
    emit_csv(t, path);
    const Table back = read_csv(path);
    CHECK(back.header == t.header);
    CHECK(cell_as_double(back.rows[0][0]) == 1.0 / 3.0);
    CHECK(cell_as_double(back.rows[0][1]) == -7.0);
    CHECK(to_csv(t) == to_csv(t));
  }
  SUBCASE("row width is enforced") {
    Table t;
    t.header = {"a"};
    CHECK_THROWS_AS(t.add({1.0, 2.0}), std::logic_error);
  }
  SUBCASE("I/O failures name the path") {
    Table t;
    t.header = {"a"};
    try {
      emit_csv(t, "/nonexistent-dir/x.csv");
      FAIL("expected failure");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find("/nonexistent-dir/x.csv") != std::string::npos);
    }
  }
}

TEST_CASE("plots") {
  CHECK_THROWS_AS(plot_kind_from_string("pie"), DomainError);
  std::set<std::string_view> colors;
  for (RegionLabel l : kAllRegions) colors.insert(region_color(l));
  CHECK(colors.size() == kRegionCount);

  LabelGrid g;
  g.resolution = 3;
  g.half_width = 1;
  g.labels = {RegionLabel::External, RegionLabel::North, RegionLabel::External, RegionLabel::West,
              RegionLabel::Core,     RegionLabel::East,  RegionLabel::External, RegionLabel::South,
              RegionLabel::External};
  g.indeterminate.assign(9, 0);
  const std::string svg = render_plot(label_grid_table(1.0, g), PlotKind::Portrait);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find(std::string(region_color(RegionLabel::East))) != std::string::npos);

  TrapReport r;
  r.fraction = {0.5, 0.1, 0.05, 0.1, 0.2, 0.05};
  r.particles = 10;
  std::vector<ScanRow> rows{{1e-5, r}, {1e-4, r}};
  const std::string scan = render_plot(scan_table(ScanAxis::Epsilon, rows), PlotKind::Scan);
  CHECK(scan.find("a) epsilon") != std::string::npos);
  CHECK(scan.find("f)") != std::string::npos);

  std::vector<CompareRow> cmp{{0.001, r, r}, {0.01, r, r}};
  CHECK(render_plot(compare_table(cmp), PlotKind::Compare).find("without exciter") != std::string::npos);
  // A table without the expected columns is rejected.
  CHECK_THROWS_AS(render_plot(compare_table(cmp), PlotKind::Areas), DomainError);
}
