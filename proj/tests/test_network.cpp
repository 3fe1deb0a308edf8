#include <doctest.h>

#include <Eigen/Dense>
#include <fstream>

#include "helpers.hpp"

using namespace dqm;
using dqm::test::data_path;

namespace {
std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = "/tmp/" + name;
  std::ofstream out(path);
  out << content;
  return path;
}
}  // namespace

TEST_CASE("two-bus feeder loads and validates") {
  const NetworkModel net = test::two_bus();
  CHECK(net.num_buses() == 2);
  CHECK(net.num_lines() == 1);
  CHECK(net.buses()[net.slack_index()].id == 1);
  CHECK(net.is_radial());
  // Per-unit conversion round trip against the file's ohm entries.
  const double zb = net.base_ohm();
  CHECK(net.lines()[0].z(0, 0).real() * zb == doctest::Approx(0.30).epsilon(1e-12));
  CHECK(net.lines()[0].z(2, 2).imag() * zb == doctest::Approx(0.71).epsilon(1e-12));
  CHECK(net.lines()[0].z(0, 1) == net.lines()[0].z(1, 0));
}

TEST_CASE("line referencing unknown bus is a schema violation naming it") {
  const std::string path = write_temp("bad_bus.csv",
      "base,1000,4.16\n"
      "bus,1,abc,1,0.95,1.05\n"
      "bus,2,abc,0,0.95,1.05\n"
      "line,1,999,1.0,0.3,0,0,0.3,0,0.3,0.7,0,0,0.7,0,0.7,0,0,0\n");
  CHECK_THROWS_WITH_AS(load_network(path),
                       doctest::Contains("999"), ValidationError);
}

TEST_CASE("duplicate bus id rejected") {
  const std::string path = write_temp("dup_bus.csv",
      "base,1000,4.16\n"
      "bus,1,abc,1,0.95,1.05\n"
      "bus,1,abc,0,0.95,1.05\n");
  CHECK_THROWS_AS(load_network(path), ValidationError);
}

TEST_CASE("missing slack rejected") {
  const std::string path = write_temp("no_slack.csv",
      "base,1000,4.16\n"
      "bus,1,abc,0,0.95,1.05\n");
  CHECK_THROWS_WITH_AS(load_network(path), doctest::Contains("slack"),
                       ValidationError);
}

TEST_CASE("disconnected feeder rejected, naming an unreachable bus") {
  const std::string path = write_temp("disconnected.csv",
      "base,1000,4.16\n"
      "bus,1,abc,1,0.95,1.05\n"
      "bus,2,abc,0,0.95,1.05\n"
      "bus,3,abc,0,0.95,1.05\n"
      "line,1,2,1.0,0.3,0,0,0.3,0,0.3,0.7,0,0,0.7,0,0.7,0,0,0\n");
  CHECK_THROWS_WITH_AS(load_network(path), doctest::Contains("disconnected"),
                       ValidationError);
}

TEST_CASE("incidence matrix of the two-bus feeder") {
  const NetworkModel net = test::two_bus();
  const Eigen::SparseMatrix<double> a = build_incidence(net);
  REQUIRE(a.rows() == 3);
  REQUIRE(a.cols() == 6);
  const Eigen::MatrixXd ad(a);
  for (int p = 0; p < 3; ++p) {
    CHECK(ad(p, p) == 1.0);       // from-bus phase
    CHECK(ad(p, 3 + p) == -1.0);  // to-bus phase
    CHECK(ad.row(p).sum() == doctest::Approx(0.0));  // row sums are zero
  }
}

TEST_CASE("absent phases give all-zero incidence rows") {
  const NetworkModel net = test::five_bus();
  const Eigen::SparseMatrix<double> a = build_incidence(net);
  const Eigen::MatrixXd ad(a);
  // Line 2-4 carries only phase c (line index 2): rows for a and b are zero.
  CHECK(ad.row(3 * 2 + 0).cwiseAbs().sum() == 0.0);
  CHECK(ad.row(3 * 2 + 1).cwiseAbs().sum() == 0.0);
  CHECK(ad.row(3 * 2 + 2).cwiseAbs().sum() == doctest::Approx(2.0));
  // Every row sums to zero.
  for (int r = 0; r < ad.rows(); ++r)
    CHECK(ad.row(r).sum() == doctest::Approx(0.0));
}

TEST_CASE("three-bus radial chain: 6 incidence rows of full rank") {
  const std::string path = write_temp("chain3.csv",
      "base,1000,4.16\n"
      "bus,1,abc,1,0.95,1.05\n"
      "bus,2,abc,0,0.95,1.05\n"
      "bus,3,abc,0,0.95,1.05\n"
      "line,1,2,1.0,0.3,0,0,0.3,0,0.3,0.7,0,0,0.7,0,0.7,0,0,0\n"
      "line,2,3,1.0,0.3,0,0,0.3,0,0.3,0.7,0,0,0.7,0,0.7,0,0,0\n");
  const NetworkModel net = load_network(path);
  const Eigen::MatrixXd a(build_incidence(net));
  REQUIRE(a.rows() == 6);
  // Rank check by direct elimination.
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  CHECK(lu.rank() == 6);
}

TEST_CASE("branch impedance block diagonal") {
  const NetworkModel net = test::five_bus();
  const Eigen::SparseMatrix<Complex> z = build_branch_impedance(net);
  REQUIRE(z.rows() == 12);
  const Eigen::MatrixXcd zd(z);
  // Block 0 equals line 0's impedance block.
  for (int p = 0; p < 3; ++p)
    for (int q = 0; q < 3; ++q)
      CHECK(zd(p, q) == net.lines()[0].z(p, q));
  // Off-diagonal blocks are zero.
  CHECK(zd.block(0, 3, 3, 3).cwiseAbs().maxCoeff() == 0.0);
  CHECK(zd.block(3, 0, 3, 3).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("connectivity check agrees with brute-force traversal") {
  for (const char* name :
       {"feeders/two_bus.csv", "feeders/five_bus.csv", "feeders/thirteen_bus.csv"}) {
    const NetworkModel net = load_network(data_path(name));
    // Independent DFS over the adjacency.
    std::vector<std::vector<int>> adj(net.num_buses());
    for (const Line& ln : net.lines()) {
      adj[net.bus_index(ln.from_bus)].push_back(net.bus_index(ln.to_bus));
      adj[net.bus_index(ln.to_bus)].push_back(net.bus_index(ln.from_bus));
    }
    std::vector<bool> seen(net.num_buses(), false);
    std::vector<int> stack{net.slack_index()};
    seen[net.slack_index()] = true;
    int reached = 0;
    while (!stack.empty()) {
      const int j = stack.back();
      stack.pop_back();
      ++reached;
      for (int k : adj[j])
        if (!seen[k]) {
          seen[k] = true;
          stack.push_back(k);
        }
    }
    CHECK(reached == net.num_buses());
  }
}

TEST_CASE("phase mask parsing") {
  CHECK(PhaseMask::parse("abc").count() == 3);
  CHECK(PhaseMask::parse("a").has(Phase::A));
  CHECK_FALSE(PhaseMask::parse("bc").has(Phase::A));
  CHECK_THROWS_AS(PhaseMask::parse("xyz"), ValidationError);
  CHECK_THROWS_AS(PhaseMask::parse(""), ValidationError);
}

TEST_CASE("json feeder mirror loads identically") {
  const std::string path = write_temp("feeder.json", R"({
    "base_kva": 1000, "base_kv_ll": 4.16,
    "buses": [
      {"id": 1, "phases": "abc", "slack": true},
      {"id": 2, "phases": "abc"}
    ],
    "lines": [
      {"from": 1, "to": 2, "length": 1.0,
       "r_ohm": [0.30, 0.10, 0.09, 0.31, 0.10, 0.30],
       "x_ohm": [0.70, 0.25, 0.20, 0.69, 0.24, 0.71]}
    ]
  })");
  const NetworkModel jnet = load_network(path);
  const NetworkModel cnet = test::two_bus();
  CHECK(jnet.num_buses() == cnet.num_buses());
  CHECK((jnet.lines()[0].z - cnet.lines()[0].z).cwiseAbs().maxCoeff() < 1e-15);
}
