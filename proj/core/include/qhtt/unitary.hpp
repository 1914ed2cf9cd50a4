#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qhtt/ast.hpp"
#include "qhtt/linalg.hpp"

namespace qhtt {

struct UnitaryExpr;
using UnitaryPtr = std::shared_ptr<const UnitaryExpr>;

struct UnitaryExpr {
  enum class Kind { MEmpty, MAppend, Rot, Cond };
  Kind kind = Kind::MEmpty;
  UnitaryPtr first, second;   // MAppend
  Name qubit;                 // Rot target, Cond control
  Matrix2 matrix{};           // Rot
  UnitaryPtr onTrue, onFalse; // Cond
};

namespace umk {
UnitaryPtr mempty();
UnitaryPtr mappend(UnitaryPtr a, UnitaryPtr b);
UnitaryPtr rot(Name q, const Matrix2& m);
UnitaryPtr cond(Name q, UnitaryPtr onTrue, UnitaryPtr onFalse);
UnitaryPtr ifQ(Name q, UnitaryPtr u);
}  // namespace umk

struct UnitaryEval {
  UnitaryPtr expr;
  std::vector<Matrix2> nonUnitary;  // rot matrices failing U^dagger U = I
  std::string error;
  bool ok() const { return expr && error.empty(); }
};

// Reads a normalized term of type U whose qubit arguments are variables.
// Boolean conditions inside `cond` branches must already be literals.
UnitaryEval evalUnitary(const IntroPtr& term);

// Qubits acted on, in first-touch order (controls included).
std::vector<Name> footprint(const UnitaryExpr& u);

// Applies u to a dense vector whose qubits are `order`.
void applyDense(linalg::Vec& v, const std::vector<Name>& order, const UnitaryExpr& u);

std::string describe(const UnitaryExpr& u);

}  // namespace qhtt
