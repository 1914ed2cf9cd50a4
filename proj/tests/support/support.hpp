#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qhtt/ast.hpp"
#include "qhtt/prover.hpp"
#include "qhtt/unitary.hpp"

namespace qtest {

using qhtt::Complex;

struct PropertyResult {
  std::string name;
  int cases = 0;
  int failures = 0;
  std::string firstFailure;
  bool ok() const { return cases > 0 && failures == 0; }
  void fail(const std::string& why) {
    if (failures++ == 0) firstFailure = why;
  }
};

class Gen {
 public:
  explicit Gen(uint64_t seed) : rng_(seed) {}
  int below(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  template <class T>
  const T& pick(const std::vector<T>& xs) { return xs[below(static_cast<int>(xs.size()))]; }

 private:
  std::mt19937_64 rng_;
};

// Full state vector. Bit i of an index is qubit i.
class DenseState {
 public:
  std::size_t alloc(bool b);
  void apply(const qhtt::UnitaryExpr& u);
  void gate(std::size_t q, const qhtt::Matrix2& m, uint64_t mask = 0, uint64_t value = 0);
  double probability(std::size_t q, bool b) const;
  void collapse(std::size_t q, bool b);
  double norm2() const;
  Complex amplitude(uint64_t k) const { return k < amps_.size() ? amps_[k] : Complex{}; }
  std::size_t qubits() const { return n_; }

 private:
  std::size_t n_ = 0;
  std::vector<Complex> amps_{Complex{1.0}};
  void run(const qhtt::UnitaryExpr& u, uint64_t mask, uint64_t value);
};

qhtt::Matrix2 randomUnitary(Gen& g);
// Unitary over qubits #0 .. #(n-1).
qhtt::UnitaryPtr randomUnitaryExpr(Gen& g, std::size_t n, int depth);
qhtt::UnitaryPtr randomUnitaryOver(Gen& g, const std::vector<std::size_t>& qubits, int depth);
// The same unitary as a source term over the builtin combinators.
qhtt::IntroPtr unitaryTerm(const qhtt::UnitaryExpr& u);

qhtt::Program randomProgram(Gen& g);
qhtt::AssertPtr randomAssertion(Gen& g, int depth);

// Closed simple types and terms for normalization.
qhtt::TypePtr randomSimpleType(Gen& g, int depth);
qhtt::IntroPtr randomTerm(Gen& g, const qhtt::TypePtr& t, const qhtt::VarContext& ctx, int depth);
bool betaNormal(const qhtt::Intro& m);

// Heaps over the qubits p, q, s. Each is absent (-1) or holds one of
// |0>, |1>, |+>, |-> (0..3). `rest` stands for any further cells.
struct HeapModel {
  int cell[3] = {-1, -1, -1};
  bool rest = false;
};
extern const std::vector<qhtt::Name> kCellNames;
std::vector<HeapModel> allHeaps();
qhtt::AssertPtr randomCellAssertion(Gen& g, int depth);
bool oracleHolds(const qhtt::Assertion& p, const HeapModel& h);
bool oracleValid(const std::vector<qhtt::AssertPtr>& hyps, const qhtt::AssertPtr& concl);
// Reads a countermodel world back into the oracle's heap model.
bool toHeapModel(const qhtt::World& w, HeapModel& out);

PropertyResult propNormalization(uint64_t seed, int cases);
PropertyResult propMonoidLaws(uint64_t seed, int cases);
PropertyResult propCollapse(uint64_t seed, int cases);
PropertyResult propRoundTrip(uint64_t seed, int cases);
PropertyResult propNormalizeIdempotent(uint64_t seed, int cases);
PropertyResult propProverOracle(uint64_t seed, int cases);

std::vector<PropertyResult> allProperties(uint64_t seed, int cases);

// Alpha-normal form used to compare traces.
std::string canonical(const qhtt::AssertPtr& p);
std::vector<std::pair<std::string, std::string>> traceLines(const std::string& text);
// Empty when the traces agree step by step.
std::string traceMismatch(const std::string& actual, const std::string& golden);

std::string corpusDir();
std::string negativeDir();
std::string testsDir();
std::string readFile(const std::string& path);

}  // namespace qtest
