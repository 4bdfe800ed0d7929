#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "cli/commands.hpp"
#include "doctest.h"

using namespace cavpump;
using namespace cavpump::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("cavpump_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

Invocation make(const std::string& command, std::initializer_list<const char*> sets = {}) {
  Invocation inv;
  inv.command = command;
  for (const char* s : sets) inv.settings.assign(s);
  return inv;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Data rows of a rendered CSV (comments and header dropped), split on commas.
std::vector<std::vector<double>> data_rows(const std::string& csv) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(csv);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<double> row;
    std::istringstream fields(line);
    std::string f;
    while (std::getline(fields, f, ',')) row.push_back(std::stod(f));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("number parsing") {
    CHECK(*parse_number("1/3") == doctest::Approx(1.0 / 3.0));
    CHECK(*parse_number(" 2.5e-3 ") == 2.5e-3);
    CHECK(*parse_number("-4") == -4.0);
    CHECK_FALSE(parse_number("abc"));
    CHECK_FALSE(parse_number("1/0"));
    CHECK_FALSE(parse_number(""));
    CHECK_FALSE(parse_number("3x"));
  }

  TEST_CASE("settings reject bad input") {
    Settings s;
    CHECK_THROWS_AS(s.assign("atoms.nope=1"), ConfigError);
    CHECK_THROWS_AS(s.assign("atoms.N"), ConfigError);
    CHECK_THROWS_AS(s.set("N", "1"), ConfigError);
    s.set("atoms.N", "-5");
    CHECK_THROWS_AS(s.nonnegative("atoms.N"), ConfigError);
    s.set("atoms.N", "many");
    CHECK_THROWS_AS(s.number("atoms.N"), ConfigError);
    s.set("atoms.ballistic", "maybe");
    CHECK_THROWS_AS(s.flag("atoms.ballistic"), ConfigError);
    s.set("scheme.Fg", "2.25");
    CHECK_THROWS_AS(s.doubled("scheme.Fg"), ConfigError);
    s.set("scheme.Fg", "1/2");
    CHECK(s.doubled("scheme.Fg") == 1);
    s.set("drive.delta_p_MHz", "-24, 15,1/2");
    CHECK(s.numbers("drive.delta_p_MHz") == std::vector<double>{-24.0, 15.0, 0.5});
    CHECK_FALSE(s.optional_number("drive.eta_MHz"));
  }

  TEST_CASE("config files") {
    TempDir dir("ini");
    fs::create_directories(dir.path);
    const fs::path good = dir.path / "good.ini";
    std::ofstream(good) << "[atoms]\nN = 500\n[drive]\ndelta_p_MHz = 10\n";
    Settings s;
    s.load_file(good);
    CHECK(s.number("atoms.N") == 500.0);
    CHECK(s.number("scheme.g0_kHz") == 210.0);

    const fs::path unknown = dir.path / "unknown.ini";
    std::ofstream(unknown) << "[atoms]\nNumber = 500\n";
    CHECK_THROWS_AS(Settings().load_file(unknown), ConfigError);
    const fs::path section = dir.path / "section.ini";
    std::ofstream(section) << "[atom]\nN = 500\n";
    CHECK_THROWS_AS(Settings().load_file(section), ConfigError);
    const fs::path broken = dir.path / "broken.ini";
    std::ofstream(broken) << "[atoms\nN = 500\n";
    CHECK_THROWS_AS(Settings().load_file(broken), ConfigError);
    CHECK_THROWS_AS(Settings().load_file(dir.path / "missing.ini"), ConfigError);
  }

  TEST_CASE("number formatting round-trips") {
    for (double v : {0.0, 1.0, -2.5, 1.0 / 3.0, 6.02214076e23, 1e-300, 30.364238}) {
      const std::string s = format_number(v);
      CHECK(std::stod(s) == v);
    }
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(format_number(-0.0) == "0");
  }

  TEST_CASE("csv rendering") {
    CsvTable t({"x", "y"});
    t.meta("unit", "MHz");
    t.add_row({1.0, 0.5});
    CHECK_THROWS(t.add_row({1.0}));
    CHECK(t.render() == "# unit: MHz\nx,y\n1,0.5\n");
  }

  TEST_CASE("output sets commit atomically") {
    TempDir dir("commit");
    OutputSet o;
    o.add("a.csv", std::string("x\n1\n"));
    o.add("b.csv", std::string("y\n2\n"));
    o.commit(dir.path);
    CHECK(slurp(dir.path / "a.csv") == "x\n1\n");
    CHECK(slurp(dir.path / "b.csv") == "y\n2\n");
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path)) ++files;
    CHECK(files == 2);
  }

  TEST_CASE("sweep axes") {
    CHECK(parse_axis("k", "0:1:3") == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(parse_axis("k", "5") == std::vector<double>{5.0});
    CHECK(parse_axis("k", "1, 2,4") == std::vector<double>{1.0, 2.0, 4.0});
    CHECK_THROWS_AS(parse_axis("k", "0:1:0"), ConfigError);
    CHECK_THROWS_AS(parse_axis("k", "0:1"), ConfigError);
    CHECK_THROWS_AS(parse_axis("k", ""), ConfigError);
  }

  TEST_CASE("spectrum command") {
    const CommandResult r = run_command(make("spectrum"));
    CHECK(r.outputs.contains("spectrum.csv"));
    CHECK(r.outputs.contains("spectrum.manifest.json"));
    CHECK(r.summary.find("splitting_MHz 30.36") != std::string::npos);
    const auto rows = data_rows(r.outputs.at("spectrum.csv"));
    REQUIRE(rows.size() == 8001);
    CHECK(rows.front()[0] == -40.0);
    CHECK(rows.back()[0] == 40.0);
    // Symmetric about the probe resonance for equal detunings.
    CHECK(rows.front()[1] == doctest::Approx(rows.back()[1]).epsilon(1e-9));

    // Same inputs, same bytes.
    const CommandResult again = run_command(make("spectrum"));
    CHECK(again.outputs.at("spectrum.csv") == r.outputs.at("spectrum.csv"));
  }

  TEST_CASE("spectrum without atoms is the empty-cavity Lorentzian") {
    const CommandResult r = run_command(make("spectrum", {"atoms.N=0", "spectrum.points=81"}));
    const auto rows = data_rows(r.outputs.at("spectrum.csv"));
    REQUIRE(rows.size() == 81);
    const double peak = rows[40][1];
    CHECK(rows[40][0] == 0.0);
    for (const auto& row : rows) CHECK(row[1] == doctest::Approx(peak / (1.0 + std::pow(row[0] / 6.7, 2))));
  }

  TEST_CASE("manifest reproduces the run") {
    TempDir dir("manifest");
    std::ostringstream out, err;
    const Invocation inv = make("spectrum", {"atoms.N=5000", "spectrum.points=401"});
    REQUIRE(execute(inv, dir.path, out, err) == ok);
    const Invocation back = invocation_from_manifest(dir.path / "spectrum.manifest.json");
    CHECK(back.command == "spectrum");
    CHECK(back.settings.number("atoms.N") == 5000.0);
    CHECK(run_command(back).outputs.at("spectrum.csv") == slurp(dir.path / "spectrum.csv"));

    const fs::path bad = dir.path / "bad.json";
    std::ofstream(bad) << "{ not json";
    CHECK_THROWS_AS(invocation_from_manifest(bad), ConfigError);
  }

  TEST_CASE("exit codes and no partial output") {
    TempDir dir("exit");
    std::ostringstream out, err;

    CHECK(execute(make("spectrum", {"spectrum.points=1"}), dir.path, out, err) == config_error);
    CHECK(execute(make("dynamics", {"dynamics.kind=other"}), dir.path, out, err) == config_error);
    CHECK(execute(make("dynamics", {"atoms.N=-1"}), dir.path, out, err) == config_error);
    CHECK(execute(make("dynamics", {"time.end_ms=1", "integrator.max_steps=3"}), dir.path, out, err) ==
          integration_failure);
    CHECK(err.str().find("integration failed") != std::string::npos);
    CHECK(execute(make("rates", {"rates.c_minus_sq=1/3", "rates.c_plus_sq=1/3"}), dir.path, out, err) ==
          degenerate_parameters);
    CHECK_FALSE(fs::exists(dir.path));
  }

  TEST_CASE("sweep limits and layout") {
    CHECK_THROWS_AS(run_command(make("sweep", {"sweep.x_values=0:1:2000", "sweep.y=atoms.waist_um",
                                               "sweep.y_values=1:2:1000"})),
                    ConfigError);
    CHECK_THROWS_AS(run_command(make("sweep", {"sweep.observables=nothing"})), ConfigError);
    CHECK_THROWS_AS(run_command(make("sweep", {"sweep.x=atoms.bogus"})), ConfigError);

    const CommandResult single = run_command(make("sweep", {"spectrum.points=401"}));
    const auto one = data_rows(single.outputs.at("sweep_splitting_MHz.csv"));
    REQUIRE(one.size() == 1);
    CHECK(one[0][0] == 11200.0);
    CHECK(one[0][1] == doctest::Approx(30.364).epsilon(1e-4));

    Invocation grid = make("sweep", {"spectrum.points=201", "sweep.x_values=1000,4000", "sweep.y=scheme.g0_kHz",
                                     "sweep.y_values=100:200:3"});
    grid.jobs = 3;
    const auto rows = data_rows(run_command(grid).outputs.at("sweep_splitting_MHz.csv"));
    REQUIRE(rows.size() == 6);
    CHECK(rows[1][0] == 1000.0);
    CHECK(rows[1][1] == 150.0);
    CHECK(rows[3][0] == 4000.0);
    // Splitting scales as g0 sqrt(N).
    CHECK(rows[5][2] / rows[0][2] == doctest::Approx(2.0 * 2.0).epsilon(1e-9));
  }

  TEST_CASE("stronger drive pumps faster") {
    const auto rows = data_rows(run_command(make("sweep", {"sweep.command=rates", "sweep.x=rates.initial_rate",
                                                           "sweep.x_values=1e3,1e4,1e5",
                                                           "sweep.observables=final_P_minus"}))
                                    .outputs.at("sweep_final_P_minus.csv"));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0][1] > rows[1][1]);
    CHECK(rows[1][1] > rows[2][1]);
  }

  TEST_CASE("presets load") {
    const auto names = preset_names();
    CHECK(names.size() >= 9);
    for (const auto& n : names) {
      Settings s;
      CHECK_NOTHROW(s.load_file(preset_path(n)));
    }
    CHECK_THROWS_AS(preset_path("no_such_preset"), ConfigError);
  }

  TEST_CASE("no drive keeps the populations") {
    const CommandResult r = run_command(
        make("dynamics", {"drive.eta_MHz=0", "time.end_ms=0.2", "time.samples=11", "atoms.ballistic=false"}));
    const std::string csv = r.outputs.at("dynamics.csv");
    const auto rows = data_rows(csv);
    REQUIRE(rows.size() == 11);
    // Columns: t, re a, im a, photon number, then five populations.
    for (const auto& row : rows) {
      CHECK(row[3] == 0.0);
      for (int k = 4; k < 9; ++k) CHECK(row[static_cast<std::size_t>(k)] == doctest::Approx(0.2));
    }
  }

  TEST_CASE("detuning family writes one file per detuning") {
    Invocation inv = make("dynamics", {"dynamics.kind=fig4", "drive.delta_p_MHz=-24,-15,15,24",
                                       "atoms.N_per_detuning=10600,9200,10500,11200", "time.end_ms=0.1",
                                       "time.samples=11"});
    inv.jobs = 2;
    const CommandResult r = run_command(inv);
    CHECK(r.outputs.contains("fig4_delta_p_-24MHz.csv"));
    CHECK(r.outputs.contains("fig4_delta_p_-15MHz.csv"));
    CHECK(r.outputs.contains("fig4_delta_p_+15MHz.csv"));
    CHECK(r.outputs.contains("fig4_delta_p_+24MHz.csv"));
    CHECK(r.outputs.contains("fig4.manifest.json"));
  }
}
