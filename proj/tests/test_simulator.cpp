#include <cmath>

#include "doctest.h"
#include "qhtt/linalg.hpp"
#include "qhtt/parser.hpp"
#include "qhtt/pretty.hpp"
#include "qhtt/simulator.hpp"
#include "support.hpp"

using namespace qhtt;

namespace {

struct Loaded {
  Program program;
  std::unique_ptr<Checker> checker;
};

std::unique_ptr<Loaded> load(const std::string& file) {
  auto out = std::make_unique<Loaded>();
  auto r = parseProgram(qtest::readFile(qtest::corpusDir() + "/" + file));
  REQUIRE(r.ok());
  out->program = *r.value;
  out->checker = std::make_unique<Checker>(out->program);
  out->checker->checkProgram();
  return out;
}

int count(const RunReport& r, const std::string& value) {
  for (const auto& [v, n] : r.outcomes)
    if (v == value) return n;
  return 0;
}

AssertPtr a(const std::string& s) { return *parseAssertion(s).value; }

std::string check(const std::string& s, const ValueEnv& env, const QuantumState& st) {
  return toString(checkAssertionRuntime(a(s), env, st));
}

}  // namespace

TEST_CASE("allocation and gates on the sparse state") {
  QuantumState s;
  CHECK(s.alloc(false) == 0);
  CHECK(s.alloc(true) == 1);
  CHECK(s.amplitudes.size() == 1);
  CHECK(s.amplitudes.count(2) == 1);
  s.apply(*umk::rot("#0", linalg::hadamard()));
  CHECK(s.amplitudes.size() == 2);
  CHECK(s.probability(0, true) == doctest::Approx(0.5));
  s.apply(*umk::ifQ("#0", umk::rot("#1", linalg::pauliX())));
  CHECK(s.amplitudes.count(2) == 1);
  CHECK(s.amplitudes.count(1) == 1);
  CHECK(s.norm2() == doctest::Approx(1.0));
}

TEST_CASE("measurement retires the qubit") {
  QuantumState s;
  std::mt19937_64 rng(3);
  s.alloc(false);
  s.apply(*umk::rot("#0", linalg::hadamard()));
  bool b = s.measure(0, rng);
  CHECK(!s.live(0));
  CHECK(s.probability(0, !b) == 0.0);
  CHECK_THROWS_AS(s.measure(0, rng), RuntimeError);
  CHECK_THROWS_AS(s.apply(*umk::rot("#0", linalg::pauliX())), RuntimeError);
}

TEST_CASE("measurement frequencies follow the Born rule") {
  std::mt19937_64 rng(17);
  int ones = 0, n = 20000;
  Matrix2 ry = {std::cos(0.5), -std::sin(0.5), std::sin(0.5), std::cos(0.5)};
  for (int i = 0; i < n; ++i) {
    QuantumState s;
    s.alloc(false);
    s.apply(*umk::rot("#0", ry));
    ones += s.measure(0, rng);
  }
  double expected = std::sin(0.5) * std::sin(0.5);
  CHECK(std::abs(double(ones) / n - expected) < 4 * std::sqrt(expected * (1 - expected) / n));
}

TEST_CASE("reduced density of a Bell pair") {
  QuantumState s;
  s.alloc(false);
  s.alloc(false);
  s.apply(*umk::rot("#0", linalg::hadamard()));
  s.apply(*umk::ifQ("#0", umk::rot("#1", linalg::pauliX())));
  auto rho = s.reducedDensity({0});
  CHECK(linalg::purity(rho) == doctest::Approx(0.5));
  auto both = s.reducedDensity({0, 1});
  CHECK(linalg::purity(both) == doctest::Approx(1.0));
  ValueEnv env{{"a", mk::v("#0")}, {"b", mk::v("#1")}};
  CHECK(check("entangled(a)", env, s) == std::string("holds"));
  CHECK(check("(a, b) |-> |\\Phi+\\>", env, s) == std::string("holds"));
  CHECK(check("Id(a, b)", env, s) == std::string("uncheckable"));
}

TEST_CASE("runtime assertion checks") {
  QuantumState s;
  s.alloc(true);
  ValueEnv env{{"q", mk::v("#0")}, {"r", mk::boolean(true)}};
  CHECK(check("Id(q, |1\\>)", env, s) == std::string("holds"));
  CHECK(check("Id(q, |0\\>)", env, s) == std::string("fails"));
  CHECK(check("Id(r, true) /\\ q \\in {|0\\>, |1\\>}", env, s) == std::string("holds"));
  CHECK(check("emp", env, s) == std::string("fails"));
  CHECK(std::string(toString(Check::Uncheckable)) == "uncheckable");
}

TEST_CASE("shot seeds are deterministic and distinct") {
  CHECK(shotSeed(0, 0) == shotSeed(0, 0));
  CHECK(shotSeed(0, 0) != shotSeed(0, 1));
  CHECK(shotSeed(1, 0) != shotSeed(0, 1));
}

TEST_CASE("hqw always returns false") {
  auto l = load("hqw.qh");
  RunReport r = runProgram(*l->checker, "hqw", 0, 1000);
  CHECK(count(r, "false") == 1000);
  CHECK(r.failures() == 0);
  CHECK(r.errors == 0);
}

TEST_CASE("testBell outcomes agree") {
  for (const char* file : {"testbell.qh", "bell.qh"}) {
    auto l = load(file);
    RunReport r = runProgram(*l->checker, "testBell", 5, 1000);
    CHECK(count(r, "(false, false)") + count(r, "(true, true)") == 1000);
    CHECK(count(r, "(true, true)") > 400);
    CHECK(r.failures() == 0);
  }
}

TEST_CASE("rnd is fair") {
  auto l = load("rnd.qh");
  for (uint64_t seed : {0, 1, 2}) {
    RunReport r = runProgram(*l->checker, "rnd", seed, 10000);
    double f = count(r, "true") / 10000.0;
    CAPTURE(seed);
    CHECK(f >= 0.48);
    CHECK(f <= 0.52);
  }
}

TEST_CASE("runs are reproducible") {
  auto l = load("rnd.qh");
  RunReport a1 = runProgram(*l->checker, "rnd", 42, 500);
  RunReport a2 = runProgram(*l->checker, "rnd", 42, 500);
  REQUIRE(a1.perShot.size() == a2.perShot.size());
  for (std::size_t i = 0; i < a1.perShot.size(); ++i) CHECK(a1.perShot[i].value == a2.perShot[i].value);
}

TEST_CASE("teleport moves the state") {
  auto l = load("teleport.qh");
  qtest::Gen g(8);
  for (int i = 0; i < 20; ++i) {
    Machine m(*l->checker, shotSeed(8, i));
    Matrix2 u = qtest::randomUnitary(g);
    m.state.alloc(false);
    m.state.apply(*umk::rot("#0", u));
    IntroPtr out = m.call("teleport", {mk::v("#0")});
    auto q = qubitIndex(out);
    REQUIRE(q);
    CHECK(!m.state.live(0));
    double fid = linalg::fidelity(m.state.reducedDensity({*q}), {u[0], u[2]});
    CHECK(fid >= 1 - 1e-9);
  }
}

TEST_CASE("entry points must be closed computations") {
  auto l = load("teleport.qh");
  CHECK_THROWS_AS(runProgram(*l->checker, "teleport", 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(runProgram(*l->checker, "missing", 0, 1), std::invalid_argument);
}
