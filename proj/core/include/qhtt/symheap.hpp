#pragma once

#include <optional>
#include <vector>

#include "qhtt/ast.hpp"
#include "qhtt/linalg.hpp"
#include "qhtt/unitary.hpp"

namespace qhtt {

// Symbolic state of one cell. Support stands for some superposition, with
// unknown nonzero amplitudes, of the listed product states in a fixed
// per-qubit basis (Z or X).
struct SymState {
  enum class Kind { Concrete, Opaque, Unknown, Support };
  Kind kind = Kind::Unknown;
  linalg::Vec amps;
  Name ghost;
  std::vector<bool> xBasis;
  std::vector<uint64_t> components;

  static SymState concrete(linalg::Vec v);
  static SymState opaque(Name g);
  static SymState unknown();
  static SymState support(std::vector<bool> xBasis, std::vector<uint64_t> components);
};

bool sameState(const SymState& a, const SymState& b);

struct Cell {
  std::vector<Name> qubits;
  SymState state;
};

struct SymbolicHeap {
  std::vector<Cell> cells;
  std::optional<Name> frameVar;

  int indexOf(const Name& q) const;
  const Cell* cellOf(const Name& q) const;
  bool allocated(const Name& q) const { return indexOf(q) >= 0; }
  std::vector<Name> qubits() const;
};

struct HeapDelta {
  enum class Kind { Init, Apply, Measure, Call };
  Kind kind = Kind::Apply;
  std::vector<Cell> consumed, produced;
  bool refined = false;
};

SymState classicalToState(bool b);

std::pair<SymbolicHeap, HeapDelta> spInit(const SymbolicHeap& h, bool init, const Name& fresh);

struct ApplyResult {
  SymbolicHeap heap;
  HeapDelta delta;
  bool residual = false;             // touched state was not concrete
  std::vector<Name> unallocated;
};
ApplyResult spApplyU(const SymbolicHeap& h, const UnitaryExpr& u);

struct MeasureBranch {
  std::optional<bool> outcome;  // absent under the literal rule
  bool exact = true;            // outcome known to be reachable
  double probability = -1;      // when the cell was concrete
  SymbolicHeap heap;
  HeapDelta delta;
};
// Empty when q is not allocated.
std::vector<MeasureBranch> spMeasure(const SymbolicHeap& h, const Name& q, bool refine = true);

// Rendering into assertions.
IntroPtr locationTerm(const std::vector<Name>& qubits);
StateExpr stateExpr(const SymState& s);
AssertPtr cellAssertion(const Cell& c);
AssertPtr heapAssertion(const SymbolicHeap& h);
AssertPtr renderDelta(const HeapDelta& d);
AssertPtr renderAssertion(const std::vector<HeapDelta>& steps, const AssertPtr& initial);

}  // namespace qhtt
