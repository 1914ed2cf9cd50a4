#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "qhtt/ast.hpp"
#include "qhtt/linalg.hpp"
#include "qhtt/typechecker.hpp"
#include "qhtt/unitary.hpp"

namespace qhtt {

struct RuntimeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Amplitudes over the allocated qubits. Bit i of a basis key is the value of
// the qubit with allocation index i.
struct QuantumState {
  std::size_t qubitCount = 0;
  std::map<uint64_t, Complex> amplitudes;
  std::vector<bool> retired;

  QuantumState();
  std::size_t alloc(bool b);
  void apply(const UnitaryExpr& u);
  bool measure(std::size_t q, std::mt19937_64& rng);
  double norm2() const;
  double probability(std::size_t q, bool b) const;
  bool live(std::size_t q) const { return q < qubitCount && !retired[q]; }
  std::vector<std::size_t> liveQubits() const;
  // Density matrix of the listed qubits, first listed qubit most significant.
  linalg::Mat reducedDensity(const std::vector<std::size_t>& qs) const;
};

constexpr double kPruneTolerance = 1e-12;

Name qubitName(std::size_t i);
std::optional<std::size_t> qubitIndex(const IntroPtr& m);
std::optional<std::size_t> qubitIndex(const Name& n);

enum class Check { Holds, Fails, Uncheckable };
const char* toString(Check c);

using ValueEnv = std::map<Name, IntroPtr>;
Check checkAssertionRuntime(const AssertPtr& a, const ValueEnv& env, const QuantumState& s,
                            const std::map<Name, linalg::Vec>& ghosts = {});

// Executes declarations of a program that has already been checked by ck.
class Machine {
 public:
  Machine(Checker& ck, uint64_t seed);

  QuantumState state;
  std::mt19937_64 rng;

  IntroPtr call(const Name& decl, const std::vector<IntroPtr>& args = {});
  IntroPtr runComputation(const CompPtr& e, ValueEnv env);
  IntroPtr evaluate(const IntroPtr& m, const ValueEnv& env);

 private:
  Checker& ck_;
  int depth_ = 0;
  IntroPtr force(const IntroPtr& suspended);
  IntroPtr command(const Command& c, const ValueEnv& env);
};

struct AssertionTally {
  std::string text;
  int pass = 0, fail = 0, uncheckable = 0;
};

struct ShotResult {
  std::string value;
  std::vector<Check> checks;
  std::string error;
};

struct RunReport {
  std::string decl;
  uint64_t seed = 0;
  int shots = 0;
  std::vector<std::pair<std::string, int>> outcomes;
  std::vector<AssertionTally> assertions;
  std::vector<ShotResult> perShot;
  int errors = 0;
  int failures() const;
};

uint64_t shotSeed(uint64_t seed, uint64_t shot);
std::string renderValue(const IntroPtr& v);

// ck must already have checked its program.
RunReport runProgram(Checker& ck, const Name& entry, uint64_t seed, int shots);

}  // namespace qhtt
