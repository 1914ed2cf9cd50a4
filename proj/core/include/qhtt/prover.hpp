#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qhtt/ast.hpp"
#include "qhtt/symheap.hpp"

namespace qhtt {

enum class Tri { False, True, Unknown };

Tri triAnd(Tri a, Tri b);
Tri triOr(Tri a, Tri b);
Tri triNot(Tri a);

struct Value;
using ValuePtr = std::shared_ptr<const Value>;

struct Value {
  enum class Kind { Unit, Bool, Qubit, Pair, State, Unknown };
  Kind kind = Kind::Unknown;
  bool b = false;
  Name loc;
  ValuePtr first, second;
  std::optional<SymState> state;

  static Value unit();
  static Value boolean(bool b);
  static Value qubit(Name q);
  static Value pair(Value a, Value b);
  static Value ofState(SymState s);
  static Value unknown();
};

// A model candidate: a symbolic heap plus bindings for program names.
struct World {
  SymbolicHeap heap;
  bool rest = false;                   // some unnamed cell is also allocated
  std::map<Name, Value> env;
  std::map<Name, SymState> ghosts;     // ghost names bound to states
  std::map<Name, bool> freeBools;      // unbound booleans, value = exactly reachable
  std::vector<AssertPtr> facts;        // constraints on the free booleans
  bool exact = true;                   // heap reachable as described
};

Value evalTerm(const IntroPtr& m, const World& w);
// Direct semantics.
Tri evaluate(const AssertPtr& p, const World& w);
// Direct semantics, or a product-basis decomposition of the entangled cells
// in which every component satisfies p.
Tri satisfies(const AssertPtr& p, const World& w);

struct Countermodel {
  World world;
  std::string describe() const;
};

struct Verdict {
  enum class Kind { Proved, Refuted, Unknown };
  Kind kind = Kind::Unknown;
  std::optional<Countermodel> countermodel;
  AssertPtr residual;
  std::string reason;
};

const char* toString(Verdict::Kind k);

struct Obligation {
  enum class Kind { Allocation, Postcondition, CallPre, Unitarity };
  Kind kind = Kind::Postcondition;
  std::string decl;
  VarContext varCtx;
  HeapContext heapCtx;
  AssertionContext hypotheses;
  AssertPtr conclusion;
  Span span;
  // The branches of the symbolic execution that produced the obligation.
  // When present, the hypotheses are taken to describe exactly these worlds.
  std::vector<World> witness;
  bool witnessed = false;
  std::optional<Verdict> preset;
  std::string note;
};

const char* toString(Obligation::Kind k);

// Sorts updates by location and drops shadowed ones.
HeapPtr normalizeHeapExpr(const HeapPtr& h);
// The state stored at `loc` by the updates of h, if it is one of them.
std::optional<StateExpr> selectUpdate(const HeapPtr& h, const IntroPtr& loc);

Verdict entails(const Obligation& ob);

struct DischargeReport {
  std::vector<Verdict> verdicts;
  int proved = 0, refuted = 0, unknown = 0;
  std::string status() const;  // verified | conditional | refuted
};

DischargeReport dischargeAll(const std::vector<Obligation>& obs);

// Cells described by an assertion over the given qubit names. Each entry is
// one alternative (disjunctive assertions give several).
std::vector<std::vector<Cell>> abstractCells(const AssertPtr& p, const std::vector<Name>& qubits,
                                             const NameSet& ghosts);

}  // namespace qhtt
