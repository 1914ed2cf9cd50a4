#pragma once

// Abstract syntax of the quantum Hoare type language.
//
// Every sort is an immutable node held by shared_ptr<const T>. Nodes are
// tagged structs: `kind` selects the production and only the fields relevant
// to that production are populated. Factory functions in namespace `mk`
// are the intended way to build nodes.

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace qhtt {

using Name = std::string;
using Complex = std::complex<double>;
using Matrix2 = std::array<Complex, 4>;  // row-major [[m0, m1], [m2, m3]]

struct Span {
  uint32_t line = 0;  // 1-based; 0 means "no position"
  uint32_t col = 0;
  uint32_t length = 0;
  uint32_t endLine = 0;
};

struct Type;
struct Elim;
struct Intro;
struct Command;
struct Comp;
struct Pattern;
struct HeapExpr;
struct Assertion;

using TypePtr = std::shared_ptr<const Type>;
using ElimPtr = std::shared_ptr<const Elim>;
using IntroPtr = std::shared_ptr<const Intro>;
using CompPtr = std::shared_ptr<const Comp>;
using PatternPtr = std::shared_ptr<const Pattern>;
using HeapPtr = std::shared_ptr<const HeapExpr>;
using AssertPtr = std::shared_ptr<const Assertion>;

// ---------------------------------------------------------------------------
// Contexts

struct VarBinding {
  Name name;
  TypePtr type;
};
using VarContext = std::vector<VarBinding>;
using HeapContext = std::vector<Name>;
using AssertionContext = std::vector<AssertPtr>;

// ---------------------------------------------------------------------------
// Binder patterns: `x` or `(p, q)`.

struct Pattern {
  std::optional<Name> name;
  PatternPtr left, right;

  bool isName() const { return name.has_value(); }
};

// ---------------------------------------------------------------------------
// Types

struct Type {
  enum class Kind { Unit, Bool, Qbit, U, Pure, Tensor, Pi, Hoare };
  Kind kind = Kind::Unit;
  TypePtr left, right;  // Tensor components; Pi domain/codomain
  Name binder;          // Pi binder
  // Hoare
  VarContext varCtx;
  HeapContext heapCtx;
  AssertPtr pre, post;
  PatternPtr result;
  TypePtr resultType;
};

// ---------------------------------------------------------------------------
// Quantum state expressions stored in heaps and compared by Id.

struct StateExpr {
  enum class Kind { Ket0, Ket1, KetPlus, KetMinus, KetPhiPlus, Ghost, Wildcard, Unknown, Concrete };
  Kind kind = Kind::Wildcard;
  Name ghost;                      // Ghost
  std::vector<Complex> amplitudes; // Concrete

  bool isLiteral() const { return kind <= Kind::KetPhiPlus; }
  std::size_t qubitCount() const;  // 0 when not determined by the expression
};

// ---------------------------------------------------------------------------
// Terms

struct Elim {
  enum class Kind { Var, App, Ascribe };
  Kind kind = Kind::Var;
  Name name;      // Var
  ElimPtr fn;     // App
  IntroPtr arg;   // App argument; Ascribe term
  TypePtr type;   // Ascribe
  Span span;
};

struct Intro {
  // If and Rot extend the core grammar: If is the pure boolean case needed
  // to write `cond` branch functions, Rot is the literal `rot q [[a,b],[c,d]]`.
  enum class Kind { FromElim, Unit, Lam, Do, True, False, Pair, If, Rot };
  Kind kind = Kind::Unit;
  ElimPtr elim;               // FromElim
  Name binder;                // Lam
  IntroPtr a, b, c;           // Lam body = a; Pair = (a, b); If = a ? b : c; Rot target = a
  CompPtr body;               // Do
  Matrix2 matrix{};           // Rot
  Span span;
};

struct Command {
  enum class Kind { MkQbit, MeasQbit, ApplyU, If };
  Kind kind = Kind::MkQbit;
  IntroPtr a, b, c;  // argument; If scrutinee/then/else
  Span span;
};

struct Comp {
  enum class Kind { Return, BindRun, BindCmd, LetEq };
  Kind kind = Kind::Return;
  PatternPtr binder;       // BindRun may bind a pair pattern; others bind a name
  ElimPtr source;          // BindRun
  std::shared_ptr<const Command> command;  // BindCmd
  TypePtr annType;         // LetEq
  IntroPtr value;          // Return, LetEq
  CompPtr rest;
  Span span;               // source extent of the step this node came from
};

// ---------------------------------------------------------------------------
// Heaps and assertions

struct HeapExpr {
  enum class Kind { Var, Empty, Upd };
  Kind kind = Kind::Empty;
  Name name;
  HeapPtr base;
  IntroPtr loc;
  StateExpr value;
};

// Operand of Id: an intro term or a state expression.
struct Operand {
  IntroPtr term;
  std::optional<StateExpr> state;
};

struct Assertion {
  enum class Kind {
    Top, Bot, And, Or, Implies, Not,
    ExistsVar, ForallVar, ExistsHeap, ForallHeap,
    Id, HeapId, InDom,
    // derived forms
    Emp, PointsTo, Lookup, MemberOf,
    // predicate on entanglement of a qubit
    Entangled,
    // heap-evolution connectives used when rendering strongest postconditions
    Compose, Diff, Sep, Named,
  };
  Kind kind = Kind::Top;
  AssertPtr a, b;              // connectives; quantifier body = a
  Name binder;                 // quantifiers, Named
  TypePtr type;                // ExistsVar/ForallVar; optional annotation on Id
  Operand left, right;         // Id
  HeapPtr heapL, heapR;        // HeapId; InDom heap = heapL
  IntroPtr loc;                // InDom, PointsTo, Lookup, MemberOf, Entangled
  StateExpr state;             // PointsTo, Lookup
  std::vector<StateExpr> candidates;  // MemberOf
  std::vector<AssertPtr> items;       // Sep
};

// ---------------------------------------------------------------------------
// Programs

struct Decl {
  Name name;
  TypePtr signature;
  IntroPtr body;
  Span span;      // whole declaration
  Span sigSpan;   // the type signature
};

struct Program {
  std::vector<Decl> decls;
  const Decl* find(const Name& n) const;
};

// Name of the heap variable standing for the current heap in derived forms.
inline const Name kCurrentHeap = "%cur";
// Implicit initial-heap variable of Hoare types without a heap context.
inline const Name kInitialHeap = "%h0";

inline bool isMachineName(const Name& n) { return !n.empty() && n[0] == '%'; }

// ---------------------------------------------------------------------------
// Factories

namespace mk {
TypePtr unit();
TypePtr boolean();
TypePtr qbit();
TypePtr unitary();
TypePtr pure();
TypePtr tensor(TypePtr a, TypePtr b);
TypePtr pi(Name binder, TypePtr dom, TypePtr cod);
TypePtr arrow(TypePtr dom, TypePtr cod);
TypePtr hoare(VarContext vars, HeapContext heaps, AssertPtr pre, PatternPtr result,
              TypePtr resultType, AssertPtr post);

PatternPtr pat(Name n);
PatternPtr patPair(PatternPtr a, PatternPtr b);

ElimPtr var(Name n, Span s = {});
ElimPtr app(ElimPtr f, IntroPtr arg, Span s = {});
ElimPtr ascribe(IntroPtr m, TypePtr t, Span s = {});

IntroPtr fromElim(ElimPtr k);
IntroPtr v(Name n);  // FromElim(Var n)
IntroPtr unitVal();
IntroPtr lam(Name x, IntroPtr body);
IntroPtr doE(CompPtr body);
IntroPtr boolean(bool b);
IntroPtr pair(IntroPtr a, IntroPtr b);
IntroPtr ifTerm(IntroPtr c, IntroPtr t, IntroPtr e);
IntroPtr rot(IntroPtr target, const Matrix2& m);

std::shared_ptr<const Command> mkQbit(IntroPtr init);
std::shared_ptr<const Command> measQbit(IntroPtr q);
std::shared_ptr<const Command> applyU(IntroPtr u);
std::shared_ptr<const Command> ifCmd(IntroPtr c, IntroPtr t, IntroPtr e);

CompPtr ret(IntroPtr m, Span s = {});
CompPtr bindRun(PatternPtr x, ElimPtr k, CompPtr rest, Span s = {});
CompPtr bindCmd(Name x, std::shared_ptr<const Command> c, CompPtr rest, Span s = {});
CompPtr letEq(Name x, TypePtr t, IntroPtr m, CompPtr rest, Span s = {});

StateExpr ket(StateExpr::Kind k);
StateExpr ghost(Name n);
StateExpr wildcard();
StateExpr unknownState();
StateExpr concrete(std::vector<Complex> amps);

HeapPtr hvar(Name n);
HeapPtr hempty();
HeapPtr upd(HeapPtr base, IntroPtr loc, StateExpr v);

Operand opTerm(IntroPtr t);
Operand opState(StateExpr s);

AssertPtr top();
AssertPtr bot();
AssertPtr conj(AssertPtr a, AssertPtr b);
AssertPtr disj(AssertPtr a, AssertPtr b);
AssertPtr implies(AssertPtr a, AssertPtr b);
AssertPtr neg(AssertPtr a);
AssertPtr existsVar(Name x, TypePtr t, AssertPtr body);
AssertPtr forallVar(Name x, TypePtr t, AssertPtr body);
AssertPtr existsHeap(Name h, AssertPtr body);
AssertPtr forallHeap(Name h, AssertPtr body);
AssertPtr id(Operand l, Operand r, TypePtr t = nullptr);
AssertPtr heapId(HeapPtr l, HeapPtr r);
AssertPtr inDom(HeapPtr h, IntroPtr loc);
AssertPtr emp();
AssertPtr pointsTo(IntroPtr loc, StateExpr s);
AssertPtr lookup(IntroPtr loc, StateExpr s);
AssertPtr memberOf(IntroPtr t, std::vector<StateExpr> candidates);
AssertPtr entangled(IntroPtr q);
AssertPtr compose(AssertPtr a, AssertPtr b);
AssertPtr diff(AssertPtr a, AssertPtr b);
AssertPtr sep(std::vector<AssertPtr> items);
AssertPtr named(Name n);
}  // namespace mk

// ---------------------------------------------------------------------------
// Structural equality (ignores spans; binder names compared exactly).

bool equal(const Type& a, const Type& b);
bool equal(const Elim& a, const Elim& b);
bool equal(const Intro& a, const Intro& b);
bool equal(const Command& a, const Command& b);
bool equal(const Comp& a, const Comp& b);
bool equal(const Pattern& a, const Pattern& b);
bool equal(const HeapExpr& a, const HeapExpr& b);
bool equal(const Assertion& a, const Assertion& b);
bool equal(const StateExpr& a, const StateExpr& b);
bool equal(const Program& a, const Program& b);

template <class T>
bool equalPtr(const std::shared_ptr<const T>& a, const std::shared_ptr<const T>& b) {
  if (!a || !b) return !a && !b;
  return a == b || equal(*a, *b);
}

// Equality up to renaming of bound names.
bool alphaEqual(const TypePtr& a, const TypePtr& b);
bool alphaEqual(const AssertPtr& a, const AssertPtr& b);

// ---------------------------------------------------------------------------
// Free names

using NameSet = std::set<Name>;

NameSet freeVars(const Type& t);
NameSet freeVars(const Elim& k);
NameSet freeVars(const Intro& m);
NameSet freeVars(const Command& c);
NameSet freeVars(const Comp& e);
NameSet freeVars(const HeapExpr& h);
NameSet freeVars(const Assertion& p);
NameSet patternNames(const Pattern& p);

// ---------------------------------------------------------------------------
// Capture-avoiding substitution of an intro term for a free variable.

TypePtr subst(const TypePtr& t, const Name& x, const IntroPtr& m);
ElimPtr subst(const ElimPtr& k, const Name& x, const IntroPtr& m);
IntroPtr subst(const IntroPtr& n, const Name& x, const IntroPtr& m);
CompPtr subst(const CompPtr& e, const Name& x, const IntroPtr& m);
AssertPtr subst(const AssertPtr& p, const Name& x, const IntroPtr& m);
HeapPtr subst(const HeapPtr& h, const Name& x, const IntroPtr& m);

// Simultaneous substitution of the bindings in env.
template <class P>
P substAll(P x, const std::map<Name, IntroPtr>& env);

// Replaces a ghost name (as a Pure-typed variable or ghost state) by a state.
AssertPtr substState(const AssertPtr& p, const Name& ghost, const StateExpr& s);

// Replaces a free heap variable.
AssertPtr substHeap(const AssertPtr& p, const Name& h, const HeapPtr& g);

// A name based on `base` that is not in `avoid`.
Name freshAway(const Name& base, const NameSet& avoid);

// ---------------------------------------------------------------------------
// Derived assertion forms

// Rewrites Emp, PointsTo, Lookup and MemberOf into primitive assertions.
AssertPtr expand(const AssertPtr& p);
// Recognizes primitive shapes produced by expand and folds them back.
AssertPtr contract(const AssertPtr& p);

// Flattens nested And into its conjuncts.
std::vector<AssertPtr> conjuncts(const AssertPtr& p);
AssertPtr conjoin(const std::vector<AssertPtr>& ps);

template <class P>
P substAll(P x, const std::map<Name, IntroPtr>& env) {
  if (!x) return x;
  std::vector<std::pair<Name, IntroPtr>> todo;
  for (const auto& n : freeVars(*x)) {
    auto it = env.find(n);
    if (it == env.end()) continue;
    const Intro& v = *it->second;
    if (v.kind == Intro::Kind::FromElim && v.elim->kind == Elim::Kind::Var && v.elim->name == n) continue;
    todo.emplace_back(n, it->second);
  }
  if (todo.size() == 1) return subst(x, todo[0].first, todo[0].second);
  for (const auto& [n, v] : todo) x = subst(x, n, mk::v("%~" + n));
  for (const auto& [n, v] : todo) x = subst(x, "%~" + n, v);
  return x;
}

}  // namespace qhtt
