#include <doctest.h>

#include <fstream>

#include "dqm/config.hpp"
#include "dqm/csv.hpp"
#include "helpers.hpp"

using namespace dqm;
using dqm::test::data_path;

namespace {
std::string write_cfg(const std::string& body) {
  const std::string path = "/tmp/test_cfg.toml";
  std::ofstream out(path);
  out << body;
  return path;
}
std::string minimal_cfg() {
  return "[paths]\nfeeder = \"" + data_path("feeders/two_bus.csv") +
         "\"\ndevices = \"" + data_path("devices/two_bus_devices.csv") + "\"\n";
}
}  // namespace

TEST_CASE("minimal config parses with defaults") {
  const RunConfig rc = load_run_config(write_cfg(minimal_cfg()));
  CHECK(rc.scenario.slots_per_day == 288);
  CHECK(rc.scenario.pf_min == doctest::Approx(0.9));
  CHECK(rc.scenario.market.opf.zeta == doctest::Approx(0.1));
  CHECK(rc.scenario.market.pac.rho == doctest::Approx(1.0));
  CHECK(rc.sweep_axis == "pf");
  CHECK(rc.pf_values.size() == 6);
}

TEST_CASE("values and arrays are read") {
  const RunConfig rc = load_run_config(write_cfg(
      minimal_cfg() +
      "[scenario]\ndays = 2\npf_min = 0.8\nseed = 17\n"
      "[sweep]\naxis = \"penetration\"\npenetration_values = [0.1, 0.5]\n"));
  CHECK(rc.scenario.days == 2);
  CHECK(rc.scenario.pf_min == doctest::Approx(0.8));
  CHECK(rc.scenario.seed == 17);
  CHECK(rc.sweep_axis == "penetration");
  REQUIRE(rc.penetration_values.size() == 2);
  CHECK(rc.penetration_values[1] == doctest::Approx(0.5));
}

TEST_CASE("unknown keys are rejected") {
  CHECK_THROWS_WITH_AS(
      load_run_config(write_cfg(minimal_cfg() + "[scenario]\ntypo_key = 1\n")),
      doctest::Contains("typo_key"), ValidationError);
}

TEST_CASE("missing files are validation errors") {
  CHECK_THROWS_AS(load_run_config(write_cfg(
                      "[paths]\nfeeder = \"/nonexistent.csv\"\ndevices = \"x\"\n")),
                  ValidationError);
}

TEST_CASE("bad method is rejected") {
  CHECK_THROWS_AS(load_run_config(write_cfg(minimal_cfg() +
                                            "[market]\nmethod = \"magic\"\n")),
                  ValidationError);
}

TEST_CASE("fnv1a64 hash is stable") {
  CHECK(fnv1a64("") == "cbf29ce484222325");
  CHECK(fnv1a64("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a64("hello") == fnv1a64("hello"));
  CHECK(fnv1a64("hello") != fnv1a64("hellp"));
}

TEST_CASE("csv fmt round-trips doubles deterministically") {
  CHECK(csv::fmt(0.1) == csv::fmt(0.1));
  CHECK(csv::fmt(1.0) == "1");
  const double v = 1.0 / 3.0;
  CHECK(std::stod(csv::fmt(v)) == doctest::Approx(v).epsilon(1e-12));
}
