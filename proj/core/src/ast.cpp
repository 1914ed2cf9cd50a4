#include "qhtt/ast.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace qhtt {

std::size_t StateExpr::qubitCount() const {
  switch (kind) {
    case Kind::Ket0: case Kind::Ket1: case Kind::KetPlus: case Kind::KetMinus: return 1;
    case Kind::KetPhiPlus: return 2;
    case Kind::Concrete: {
      std::size_t n = 0;
      while ((std::size_t{1} << n) < amplitudes.size()) ++n;
      return n;
    }
    default: return 0;
  }
}

const Decl* Program::find(const Name& n) const {
  for (const auto& d : decls)
    if (d.name == n) return &d;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Factories

namespace mk {
namespace {
TypePtr base(Type::Kind k) {
  auto t = std::make_shared<Type>();
  t->kind = k;
  return t;
}
}  // namespace

TypePtr unit() { static const TypePtr t = base(Type::Kind::Unit); return t; }
TypePtr boolean() { static const TypePtr t = base(Type::Kind::Bool); return t; }
TypePtr qbit() { static const TypePtr t = base(Type::Kind::Qbit); return t; }
TypePtr unitary() { static const TypePtr t = base(Type::Kind::U); return t; }
TypePtr pure() { static const TypePtr t = base(Type::Kind::Pure); return t; }

TypePtr tensor(TypePtr a, TypePtr b) {
  auto t = std::make_shared<Type>();
  t->kind = Type::Kind::Tensor;
  t->left = std::move(a);
  t->right = std::move(b);
  return t;
}

TypePtr pi(Name binder, TypePtr dom, TypePtr cod) {
  auto t = std::make_shared<Type>();
  t->kind = Type::Kind::Pi;
  t->binder = std::move(binder);
  t->left = std::move(dom);
  t->right = std::move(cod);
  return t;
}

TypePtr arrow(TypePtr dom, TypePtr cod) { return pi("_", std::move(dom), std::move(cod)); }

TypePtr hoare(VarContext vars, HeapContext heaps, AssertPtr pre, PatternPtr result,
              TypePtr resultType, AssertPtr post) {
  auto t = std::make_shared<Type>();
  t->kind = Type::Kind::Hoare;
  t->varCtx = std::move(vars);
  t->heapCtx = std::move(heaps);
  t->pre = std::move(pre);
  t->result = std::move(result);
  t->resultType = std::move(resultType);
  t->post = std::move(post);
  return t;
}

PatternPtr pat(Name n) {
  auto p = std::make_shared<Pattern>();
  p->name = std::move(n);
  return p;
}

PatternPtr patPair(PatternPtr a, PatternPtr b) {
  auto p = std::make_shared<Pattern>();
  p->left = std::move(a);
  p->right = std::move(b);
  return p;
}

ElimPtr var(Name n, Span s) {
  auto k = std::make_shared<Elim>();
  k->kind = Elim::Kind::Var;
  k->name = std::move(n);
  k->span = s;
  return k;
}

ElimPtr app(ElimPtr f, IntroPtr arg, Span s) {
  auto k = std::make_shared<Elim>();
  k->kind = Elim::Kind::App;
  k->fn = std::move(f);
  k->arg = std::move(arg);
  k->span = s;
  return k;
}

ElimPtr ascribe(IntroPtr m, TypePtr t, Span s) {
  auto k = std::make_shared<Elim>();
  k->kind = Elim::Kind::Ascribe;
  k->arg = std::move(m);
  k->type = std::move(t);
  k->span = s;
  return k;
}

IntroPtr fromElim(ElimPtr k) {
  auto m = std::make_shared<Intro>();
  m->kind = Intro::Kind::FromElim;
  m->span = k->span;
  m->elim = std::move(k);
  return m;
}

IntroPtr v(Name n) { return fromElim(var(std::move(n))); }

IntroPtr unitVal() {
  auto m = std::make_shared<Intro>();
  m->kind = Intro::Kind::Unit;
  return m;
}

IntroPtr lam(Name x, IntroPtr body) {
  auto m = std::make_shared<Intro>();
  m->kind = Intro::Kind::Lam;
  m->binder = std::move(x);
  m->a = std::move(body);
  return m;
}

IntroPtr doE(CompPtr body) {
  auto m = std::make_shared<Intro>();
  m->kind = Intro::Kind::Do;
  m->body = std::move(body);
  return m;
}

IntroPtr boolean(bool b) {
  auto m = std::make_shared<Intro>();
  m->kind = b ? Intro::Kind::True : Intro::Kind::False;
  return m;
}

IntroPtr pair(IntroPtr a, IntroPtr b) {
  auto m = std::make_shared<Intro>();
  m->kind = Intro::Kind::Pair;
  m->a = std::move(a);
  m->b = std::move(b);
  return m;
}

IntroPtr ifTerm(IntroPtr c, IntroPtr t, IntroPtr e) {
  auto m = std::make_shared<Intro>();
  m->kind = Intro::Kind::If;
  m->a = std::move(c);
  m->b = std::move(t);
  m->c = std::move(e);
  return m;
}

IntroPtr rot(IntroPtr target, const Matrix2& mat) {
  auto m = std::make_shared<Intro>();
  m->kind = Intro::Kind::Rot;
  m->a = std::move(target);
  m->matrix = mat;
  return m;
}

namespace {
std::shared_ptr<const Command> cmd(Command::Kind k, IntroPtr a, IntroPtr b = nullptr,
                                   IntroPtr c = nullptr) {
  auto x = std::make_shared<Command>();
  x->kind = k;
  x->a = std::move(a);
  x->b = std::move(b);
  x->c = std::move(c);
  return x;
}
}  // namespace

std::shared_ptr<const Command> mkQbit(IntroPtr init) { return cmd(Command::Kind::MkQbit, std::move(init)); }
std::shared_ptr<const Command> measQbit(IntroPtr q) { return cmd(Command::Kind::MeasQbit, std::move(q)); }
std::shared_ptr<const Command> applyU(IntroPtr u) { return cmd(Command::Kind::ApplyU, std::move(u)); }
std::shared_ptr<const Command> ifCmd(IntroPtr c, IntroPtr t, IntroPtr e) {
  return cmd(Command::Kind::If, std::move(c), std::move(t), std::move(e));
}

CompPtr ret(IntroPtr m, Span s) {
  auto e = std::make_shared<Comp>();
  e->kind = Comp::Kind::Return;
  e->value = std::move(m);
  e->span = s;
  return e;
}

CompPtr bindRun(PatternPtr x, ElimPtr k, CompPtr rest, Span s) {
  auto e = std::make_shared<Comp>();
  e->kind = Comp::Kind::BindRun;
  e->binder = std::move(x);
  e->source = std::move(k);
  e->rest = std::move(rest);
  e->span = s;
  return e;
}

CompPtr bindCmd(Name x, std::shared_ptr<const Command> c, CompPtr rest, Span s) {
  auto e = std::make_shared<Comp>();
  e->kind = Comp::Kind::BindCmd;
  e->binder = pat(std::move(x));
  e->command = std::move(c);
  e->rest = std::move(rest);
  e->span = s;
  return e;
}

CompPtr letEq(Name x, TypePtr t, IntroPtr m, CompPtr rest, Span s) {
  auto e = std::make_shared<Comp>();
  e->kind = Comp::Kind::LetEq;
  e->binder = pat(std::move(x));
  e->annType = std::move(t);
  e->value = std::move(m);
  e->rest = std::move(rest);
  e->span = s;
  return e;
}

StateExpr ket(StateExpr::Kind k) { return StateExpr{k, {}, {}}; }
StateExpr ghost(Name n) { return StateExpr{StateExpr::Kind::Ghost, std::move(n), {}}; }
StateExpr wildcard() { return StateExpr{StateExpr::Kind::Wildcard, {}, {}}; }
StateExpr unknownState() { return StateExpr{StateExpr::Kind::Unknown, {}, {}}; }
StateExpr concrete(std::vector<Complex> amps) {
  return StateExpr{StateExpr::Kind::Concrete, {}, std::move(amps)};
}

HeapPtr hvar(Name n) {
  auto h = std::make_shared<HeapExpr>();
  h->kind = HeapExpr::Kind::Var;
  h->name = std::move(n);
  return h;
}

HeapPtr hempty() {
  auto h = std::make_shared<HeapExpr>();
  h->kind = HeapExpr::Kind::Empty;
  return h;
}

HeapPtr upd(HeapPtr base, IntroPtr loc, StateExpr v) {
  auto h = std::make_shared<HeapExpr>();
  h->kind = HeapExpr::Kind::Upd;
  h->base = std::move(base);
  h->loc = std::move(loc);
  h->value = std::move(v);
  return h;
}

Operand opTerm(IntroPtr t) { return Operand{std::move(t), std::nullopt}; }
Operand opState(StateExpr s) { return Operand{nullptr, std::move(s)}; }

namespace {
std::shared_ptr<Assertion> node(Assertion::Kind k) {
  auto p = std::make_shared<Assertion>();
  p->kind = k;
  return p;
}
std::shared_ptr<Assertion> bin(Assertion::Kind k, AssertPtr a, AssertPtr b) {
  auto p = node(k);
  p->a = std::move(a);
  p->b = std::move(b);
  return p;
}
}  // namespace

AssertPtr top() { static const AssertPtr p = node(Assertion::Kind::Top); return p; }
AssertPtr bot() { static const AssertPtr p = node(Assertion::Kind::Bot); return p; }
AssertPtr conj(AssertPtr a, AssertPtr b) { return bin(Assertion::Kind::And, std::move(a), std::move(b)); }
AssertPtr disj(AssertPtr a, AssertPtr b) { return bin(Assertion::Kind::Or, std::move(a), std::move(b)); }
AssertPtr implies(AssertPtr a, AssertPtr b) { return bin(Assertion::Kind::Implies, std::move(a), std::move(b)); }
AssertPtr neg(AssertPtr a) { return bin(Assertion::Kind::Not, std::move(a), nullptr); }

AssertPtr existsVar(Name x, TypePtr t, AssertPtr body) {
  auto p = bin(Assertion::Kind::ExistsVar, std::move(body), nullptr);
  p->binder = std::move(x);
  p->type = std::move(t);
  return p;
}
AssertPtr forallVar(Name x, TypePtr t, AssertPtr body) {
  auto p = bin(Assertion::Kind::ForallVar, std::move(body), nullptr);
  p->binder = std::move(x);
  p->type = std::move(t);
  return p;
}
AssertPtr existsHeap(Name h, AssertPtr body) {
  auto p = bin(Assertion::Kind::ExistsHeap, std::move(body), nullptr);
  p->binder = std::move(h);
  return p;
}
AssertPtr forallHeap(Name h, AssertPtr body) {
  auto p = bin(Assertion::Kind::ForallHeap, std::move(body), nullptr);
  p->binder = std::move(h);
  return p;
}
AssertPtr id(Operand l, Operand r, TypePtr t) {
  auto p = node(Assertion::Kind::Id);
  p->left = std::move(l);
  p->right = std::move(r);
  p->type = std::move(t);
  return p;
}
AssertPtr heapId(HeapPtr l, HeapPtr r) {
  auto p = node(Assertion::Kind::HeapId);
  p->heapL = std::move(l);
  p->heapR = std::move(r);
  return p;
}
AssertPtr inDom(HeapPtr h, IntroPtr loc) {
  auto p = node(Assertion::Kind::InDom);
  p->heapL = std::move(h);
  p->loc = std::move(loc);
  return p;
}
AssertPtr emp() { static const AssertPtr p = node(Assertion::Kind::Emp); return p; }
AssertPtr pointsTo(IntroPtr loc, StateExpr s) {
  auto p = node(Assertion::Kind::PointsTo);
  p->loc = std::move(loc);
  p->state = std::move(s);
  return p;
}
AssertPtr lookup(IntroPtr loc, StateExpr s) {
  auto p = node(Assertion::Kind::Lookup);
  p->loc = std::move(loc);
  p->state = std::move(s);
  return p;
}
AssertPtr memberOf(IntroPtr t, std::vector<StateExpr> candidates) {
  auto p = node(Assertion::Kind::MemberOf);
  p->loc = std::move(t);
  p->candidates = std::move(candidates);
  return p;
}
AssertPtr entangled(IntroPtr q) {
  auto p = node(Assertion::Kind::Entangled);
  p->loc = std::move(q);
  return p;
}
AssertPtr compose(AssertPtr a, AssertPtr b) { return bin(Assertion::Kind::Compose, std::move(a), std::move(b)); }
AssertPtr diff(AssertPtr a, AssertPtr b) { return bin(Assertion::Kind::Diff, std::move(a), std::move(b)); }
AssertPtr sep(std::vector<AssertPtr> items) {
  auto p = node(Assertion::Kind::Sep);
  p->items = std::move(items);
  return p;
}
AssertPtr named(Name n) {
  auto p = node(Assertion::Kind::Named);
  p->binder = std::move(n);
  return p;
}
}  // namespace mk

// ---------------------------------------------------------------------------
// Equality

namespace {
bool equalCtx(const VarContext& a, const VarContext& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].name != b[i].name || !equalPtr(a[i].type, b[i].type)) return false;
  return true;
}

bool equalOperand(const Operand& a, const Operand& b) {
  if (a.state.has_value() != b.state.has_value()) return false;
  if (a.state) return equal(*a.state, *b.state);
  return equalPtr(a.term, b.term);
}
}  // namespace

bool equal(const StateExpr& a, const StateExpr& b) {
  return a.kind == b.kind && a.ghost == b.ghost && a.amplitudes == b.amplitudes;
}

bool equal(const Pattern& a, const Pattern& b) {
  return a.name == b.name && equalPtr(a.left, b.left) && equalPtr(a.right, b.right);
}

bool equal(const Type& a, const Type& b) {
  return a.kind == b.kind && a.binder == b.binder && equalPtr(a.left, b.left) &&
         equalPtr(a.right, b.right) && equalCtx(a.varCtx, b.varCtx) && a.heapCtx == b.heapCtx &&
         equalPtr(a.pre, b.pre) && equalPtr(a.post, b.post) && equalPtr(a.result, b.result) &&
         equalPtr(a.resultType, b.resultType);
}

bool equal(const Elim& a, const Elim& b) {
  return a.kind == b.kind && a.name == b.name && equalPtr(a.fn, b.fn) && equalPtr(a.arg, b.arg) &&
         equalPtr(a.type, b.type);
}

bool equal(const Intro& a, const Intro& b) {
  return a.kind == b.kind && a.binder == b.binder && equalPtr(a.elim, b.elim) &&
         equalPtr(a.a, b.a) && equalPtr(a.b, b.b) && equalPtr(a.c, b.c) &&
         equalPtr(a.body, b.body) && a.matrix == b.matrix;
}

bool equal(const Command& a, const Command& b) {
  return a.kind == b.kind && equalPtr(a.a, b.a) && equalPtr(a.b, b.b) && equalPtr(a.c, b.c);
}

bool equal(const Comp& a, const Comp& b) {
  return a.kind == b.kind && equalPtr(a.binder, b.binder) && equalPtr(a.source, b.source) &&
         equalPtr(a.command, b.command) && equalPtr(a.annType, b.annType) &&
         equalPtr(a.value, b.value) && equalPtr(a.rest, b.rest);
}

bool equal(const HeapExpr& a, const HeapExpr& b) {
  return a.kind == b.kind && a.name == b.name && equalPtr(a.base, b.base) &&
         equalPtr(a.loc, b.loc) && equal(a.value, b.value);
}

bool equal(const Assertion& a, const Assertion& b) {
  if (a.kind != b.kind || a.binder != b.binder || !equalPtr(a.a, b.a) || !equalPtr(a.b, b.b) ||
      !equalPtr(a.type, b.type) || !equalOperand(a.left, b.left) ||
      !equalOperand(a.right, b.right) || !equalPtr(a.heapL, b.heapL) ||
      !equalPtr(a.heapR, b.heapR) || !equalPtr(a.loc, b.loc) || !equal(a.state, b.state) ||
      a.candidates.size() != b.candidates.size() || a.items.size() != b.items.size())
    return false;
  for (std::size_t i = 0; i < a.candidates.size(); ++i)
    if (!equal(a.candidates[i], b.candidates[i])) return false;
  for (std::size_t i = 0; i < a.items.size(); ++i)
    if (!equalPtr(a.items[i], b.items[i])) return false;
  return true;
}

bool equal(const Program& a, const Program& b) {
  if (a.decls.size() != b.decls.size()) return false;
  for (std::size_t i = 0; i < a.decls.size(); ++i) {
    const auto& x = a.decls[i];
    const auto& y = b.decls[i];
    if (x.name != y.name || !equalPtr(x.signature, y.signature) || !equalPtr(x.body, y.body))
      return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Free variables

namespace {
void addAll(NameSet& into, const NameSet& from) { into.insert(from.begin(), from.end()); }
void removeAll(NameSet& from, const NameSet& names) {
  for (const auto& n : names) from.erase(n);
}

NameSet fvState(const StateExpr& s) {
  if (s.kind == StateExpr::Kind::Ghost) return {s.ghost};
  return {};
}

NameSet fvOperand(const Operand& o) {
  if (o.state) return fvState(*o.state);
  return o.term ? freeVars(*o.term) : NameSet{};
}
}  // namespace

NameSet patternNames(const Pattern& p) {
  if (p.name) return {*p.name};
  NameSet s = patternNames(*p.left);
  addAll(s, patternNames(*p.right));
  return s;
}

NameSet freeVars(const Type& t) {
  NameSet s;
  switch (t.kind) {
    case Type::Kind::Tensor:
      s = freeVars(*t.left);
      addAll(s, freeVars(*t.right));
      break;
    case Type::Kind::Pi: {
      s = freeVars(*t.right);
      s.erase(t.binder);
      addAll(s, freeVars(*t.left));
      break;
    }
    case Type::Kind::Hoare: {
      NameSet inner = freeVars(*t.pre);
      NameSet post = freeVars(*t.post);
      removeAll(post, patternNames(*t.result));
      addAll(inner, post);
      addAll(inner, freeVars(*t.resultType));
      for (const auto& b : t.varCtx) inner.erase(b.name);
      for (const auto& h : t.heapCtx) inner.erase(h);
      for (const auto& b : t.varCtx) addAll(inner, freeVars(*b.type));
      s = std::move(inner);
      break;
    }
    default: break;
  }
  return s;
}

NameSet freeVars(const Elim& k) {
  switch (k.kind) {
    case Elim::Kind::Var: return {k.name};
    case Elim::Kind::App: {
      NameSet s = freeVars(*k.fn);
      addAll(s, freeVars(*k.arg));
      return s;
    }
    case Elim::Kind::Ascribe: {
      NameSet s = freeVars(*k.arg);
      if (k.type) addAll(s, freeVars(*k.type));
      return s;
    }
  }
  return {};
}

NameSet freeVars(const Intro& m) {
  NameSet s;
  switch (m.kind) {
    case Intro::Kind::FromElim: return freeVars(*m.elim);
    case Intro::Kind::Lam:
      s = freeVars(*m.a);
      s.erase(m.binder);
      return s;
    case Intro::Kind::Do: return freeVars(*m.body);
    case Intro::Kind::Pair:
      s = freeVars(*m.a);
      addAll(s, freeVars(*m.b));
      return s;
    case Intro::Kind::If:
      s = freeVars(*m.a);
      addAll(s, freeVars(*m.b));
      addAll(s, freeVars(*m.c));
      return s;
    case Intro::Kind::Rot: return freeVars(*m.a);
    default: return s;
  }
}

NameSet freeVars(const Command& c) {
  NameSet s = freeVars(*c.a);
  if (c.b) addAll(s, freeVars(*c.b));
  if (c.c) addAll(s, freeVars(*c.c));
  return s;
}

NameSet freeVars(const Comp& e) {
  NameSet s;
  switch (e.kind) {
    case Comp::Kind::Return: return freeVars(*e.value);
    case Comp::Kind::BindRun:
      s = freeVars(*e.rest);
      removeAll(s, patternNames(*e.binder));
      addAll(s, freeVars(*e.source));
      return s;
    case Comp::Kind::BindCmd:
      s = freeVars(*e.rest);
      removeAll(s, patternNames(*e.binder));
      addAll(s, freeVars(*e.command));
      return s;
    case Comp::Kind::LetEq:
      s = freeVars(*e.rest);
      removeAll(s, patternNames(*e.binder));
      addAll(s, freeVars(*e.value));
      addAll(s, freeVars(*e.annType));
      return s;
  }
  return s;
}

NameSet freeVars(const HeapExpr& h) {
  switch (h.kind) {
    case HeapExpr::Kind::Var:
      if (h.name == kCurrentHeap) return {};
      return {h.name};
    case HeapExpr::Kind::Empty: return {};
    case HeapExpr::Kind::Upd: {
      NameSet s = freeVars(*h.base);
      addAll(s, freeVars(*h.loc));
      addAll(s, fvState(h.value));
      return s;
    }
  }
  return {};
}

NameSet freeVars(const Assertion& p) {
  using K = Assertion::Kind;
  NameSet s;
  switch (p.kind) {
    case K::Top: case K::Bot: case K::Emp: case K::Named: return s;
    case K::And: case K::Or: case K::Implies: case K::Compose: case K::Diff:
      s = freeVars(*p.a);
      addAll(s, freeVars(*p.b));
      return s;
    case K::Not: return freeVars(*p.a);
    case K::ExistsVar: case K::ForallVar:
      s = freeVars(*p.a);
      s.erase(p.binder);
      addAll(s, freeVars(*p.type));
      return s;
    case K::ExistsHeap: case K::ForallHeap:
      s = freeVars(*p.a);
      s.erase(p.binder);
      return s;
    case K::Id:
      s = fvOperand(p.left);
      addAll(s, fvOperand(p.right));
      return s;
    case K::HeapId:
      s = freeVars(*p.heapL);
      addAll(s, freeVars(*p.heapR));
      return s;
    case K::InDom:
      s = freeVars(*p.heapL);
      addAll(s, freeVars(*p.loc));
      return s;
    case K::PointsTo: case K::Lookup:
      s = freeVars(*p.loc);
      addAll(s, fvState(p.state));
      return s;
    case K::MemberOf:
      s = freeVars(*p.loc);
      for (const auto& c : p.candidates) addAll(s, fvState(c));
      return s;
    case K::Entangled: return freeVars(*p.loc);
    case K::Sep:
      for (const auto& i : p.items) addAll(s, freeVars(*i));
      return s;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Substitution

Name freshAway(const Name& base, const NameSet& avoid) {
  if (!avoid.count(base)) return base;
  for (int i = 1;; ++i) {
    Name n = base + "'" + std::to_string(i);
    if (!avoid.count(n)) return n;
  }
}

namespace {

StateExpr substStateName(const StateExpr& s, const Name& x, const IntroPtr& m) {
  if (s.kind == StateExpr::Kind::Ghost && s.ghost == x && m->kind == Intro::Kind::FromElim &&
      m->elim->kind == Elim::Kind::Var)
    return mk::ghost(m->elim->name);
  return s;
}

Operand substOperand(const Operand& o, const Name& x, const IntroPtr& m) {
  if (o.state) return mk::opState(substStateName(*o.state, x, m));
  return mk::opTerm(subst(o.term, x, m));
}

// Renames pattern names that would capture free names of `m`; returns the
// renamed pattern and applies the renaming through `body` via `rename`.
PatternPtr renamePattern(const PatternPtr& p, const std::map<Name, Name>& ren) {
  if (p->name) {
    auto it = ren.find(*p->name);
    return it == ren.end() ? p : mk::pat(it->second);
  }
  return mk::patPair(renamePattern(p->left, ren), renamePattern(p->right, ren));
}

struct BinderPlan {
  std::map<Name, Name> renames;
  bool shadows = false;
};

BinderPlan planBinders(const NameSet& binders, const Name& x, const IntroPtr& m,
                       const NameSet& bodyFv) {
  BinderPlan plan;
  if (binders.count(x)) {
    plan.shadows = true;
    return plan;
  }
  if (!bodyFv.count(x)) return plan;
  NameSet fvm = freeVars(*m);
  NameSet avoid = fvm;
  addAll(avoid, bodyFv);
  addAll(avoid, binders);
  for (const auto& b : binders) {
    if (fvm.count(b)) {
      Name fresh = freshAway(b, avoid);
      avoid.insert(fresh);
      plan.renames[b] = fresh;
    }
  }
  return plan;
}

template <class T>
T applyRenames(T t, const std::map<Name, Name>& ren) {
  for (const auto& [from, to] : ren) t = subst(t, from, mk::v(to));
  return t;
}

}  // namespace

TypePtr subst(const TypePtr& t, const Name& x, const IntroPtr& m) {
  if (!t) return t;
  switch (t->kind) {
    case Type::Kind::Tensor:
      return mk::tensor(subst(t->left, x, m), subst(t->right, x, m));
    case Type::Kind::Pi: {
      auto dom = subst(t->left, x, m);
      if (t->binder == x) return mk::pi(t->binder, dom, t->right);
      auto fvb = freeVars(*t->right);
      auto plan = planBinders({t->binder}, x, m, fvb);
      Name b = t->binder;
      TypePtr cod = t->right;
      if (!plan.renames.empty()) {
        b = plan.renames.begin()->second;
        cod = subst(cod, t->binder, mk::v(b));
      }
      return mk::pi(b, dom, subst(cod, x, m));
    }
    case Type::Kind::Hoare: {
      NameSet ctxNames;
      for (const auto& vb : t->varCtx) ctxNames.insert(vb.name);
      VarContext vars;
      for (const auto& vb : t->varCtx) vars.push_back({vb.name, subst(vb.type, x, m)});
      if (ctxNames.count(x))
        return mk::hoare(vars, t->heapCtx, t->pre, t->result, t->resultType, t->post);
      NameSet resNames = patternNames(*t->result);
      NameSet all = ctxNames;
      addAll(all, resNames);
      NameSet bodyFv = freeVars(*t->pre);
      addAll(bodyFv, freeVars(*t->post));
      auto plan = planBinders(all, x, m, bodyFv);
      AssertPtr pre = t->pre, post = t->post;
      PatternPtr res = t->result;
      for (auto& vb : vars) {
        auto it = plan.renames.find(vb.name);
        if (it != plan.renames.end()) vb.name = it->second;
      }
      if (!plan.renames.empty()) {
        pre = applyRenames(pre, plan.renames);
        post = applyRenames(post, plan.renames);
        res = renamePattern(res, plan.renames);
      }
      auto rtype = subst(t->resultType, x, m);
      pre = subst(pre, x, m);
      if (!resNames.count(x)) post = subst(post, x, m);
      return mk::hoare(vars, t->heapCtx, pre, res, rtype, post);
    }
    default: return t;
  }
}

ElimPtr subst(const ElimPtr& k, const Name& x, const IntroPtr& m) {
  switch (k->kind) {
    case Elim::Kind::Var:
      if (k->name != x) return k;
      // Substituting an elim-form keeps the result an elim; otherwise wrap
      // the replacement in an ascription-free elim is impossible, so callers
      // only substitute through FromElim (see Intro case).
      if (m->kind == Intro::Kind::FromElim) return m->elim;
      return k;
    case Elim::Kind::App: return mk::app(subst(k->fn, x, m), subst(k->arg, x, m), k->span);
    case Elim::Kind::Ascribe: return mk::ascribe(subst(k->arg, x, m), subst(k->type, x, m), k->span);
  }
  return k;
}

namespace {
// Substitution into an elim that may need to produce a non-elim head. The
// head of an application chain is replaced by an ascription-less intro term
// only through FromElim; non-elim replacements at head position become
// App(Ascribe(...)) which the typechecker never needs since it substitutes
// canonical forms into neutral positions only.
bool headIs(const Elim& k, const Name& x) {
  const Elim* e = &k;
  while (e->kind == Elim::Kind::App) e = e->fn.get();
  return e->kind == Elim::Kind::Var && e->name == x;
}
}  // namespace

IntroPtr subst(const IntroPtr& n, const Name& x, const IntroPtr& m) {
  if (!n) return n;
  switch (n->kind) {
    case Intro::Kind::FromElim: {
      const Elim& k = *n->elim;
      if (k.kind == Elim::Kind::Var && k.name == x) return m;
      if (m->kind != Intro::Kind::FromElim && headIs(k, x)) {
        // Head replaced by an intro term: represent the redex with an
        // ascription-free marker by keeping the intro at head through Ascribe
        // with a null type. Normalization reduces it immediately.
        std::function<ElimPtr(const ElimPtr&)> go = [&](const ElimPtr& e) -> ElimPtr {
          if (e->kind == Elim::Kind::Var) return mk::ascribe(m, nullptr, e->span);
          return mk::app(go(e->fn), subst(e->arg, x, m), e->span);
        };
        return mk::fromElim(go(n->elim));
      }
      auto e = subst(n->elim, x, m);
      if (e == n->elim) return n;
      auto r = mk::fromElim(e);
      return r;
    }
    case Intro::Kind::Lam: {
      if (n->binder == x) return n;
      auto fvb = freeVars(*n->a);
      auto plan = planBinders({n->binder}, x, m, fvb);
      Name b = n->binder;
      IntroPtr body = n->a;
      if (!plan.renames.empty()) {
        b = plan.renames.begin()->second;
        body = subst(body, n->binder, mk::v(b));
      }
      return mk::lam(b, subst(body, x, m));
    }
    case Intro::Kind::Do: return mk::doE(subst(n->body, x, m));
    case Intro::Kind::Pair: return mk::pair(subst(n->a, x, m), subst(n->b, x, m));
    case Intro::Kind::If:
      return mk::ifTerm(subst(n->a, x, m), subst(n->b, x, m), subst(n->c, x, m));
    case Intro::Kind::Rot: return mk::rot(subst(n->a, x, m), n->matrix);
    default: return n;
  }
}

namespace {
std::shared_ptr<const Command> substCmd(const std::shared_ptr<const Command>& c, const Name& x,
                                        const IntroPtr& m) {
  auto r = std::make_shared<Command>(*c);
  r->a = subst(c->a, x, m);
  r->b = subst(c->b, x, m);
  r->c = subst(c->c, x, m);
  return r;
}
}  // namespace

CompPtr subst(const CompPtr& e, const Name& x, const IntroPtr& m) {
  if (!e) return e;
  auto r = std::make_shared<Comp>(*e);
  switch (e->kind) {
    case Comp::Kind::Return:
      r->value = subst(e->value, x, m);
      return r;
    case Comp::Kind::BindRun: r->source = subst(e->source, x, m); break;
    case Comp::Kind::BindCmd: r->command = substCmd(e->command, x, m); break;
    case Comp::Kind::LetEq:
      r->annType = subst(e->annType, x, m);
      r->value = subst(e->value, x, m);
      break;
  }
  NameSet binders = patternNames(*e->binder);
  auto plan = planBinders(binders, x, m, freeVars(*e->rest));
  if (plan.shadows) return r;
  CompPtr rest = e->rest;
  if (!plan.renames.empty()) {
    rest = applyRenames(rest, plan.renames);
    r->binder = renamePattern(e->binder, plan.renames);
  }
  r->rest = subst(rest, x, m);
  return r;
}

HeapPtr subst(const HeapPtr& h, const Name& x, const IntroPtr& m) {
  if (!h || h->kind != HeapExpr::Kind::Upd) return h;
  return mk::upd(subst(h->base, x, m), subst(h->loc, x, m), substStateName(h->value, x, m));
}

AssertPtr subst(const AssertPtr& p, const Name& x, const IntroPtr& m) {
  using K = Assertion::Kind;
  if (!p) return p;
  auto r = std::make_shared<Assertion>(*p);
  switch (p->kind) {
    case K::Top: case K::Bot: case K::Emp: case K::Named: return p;
    case K::And: case K::Or: case K::Implies: case K::Compose: case K::Diff: case K::Not:
      r->a = subst(p->a, x, m);
      r->b = subst(p->b, x, m);
      return r;
    case K::ExistsVar: case K::ForallVar: {
      r->type = subst(p->type, x, m);
      if (p->binder == x) return r;
      auto plan = planBinders({p->binder}, x, m, freeVars(*p->a));
      AssertPtr body = p->a;
      if (!plan.renames.empty()) {
        r->binder = plan.renames.begin()->second;
        body = subst(body, p->binder, mk::v(r->binder));
      }
      r->a = subst(body, x, m);
      return r;
    }
    case K::ExistsHeap: case K::ForallHeap:
      r->a = subst(p->a, x, m);
      return r;
    case K::Id:
      r->left = substOperand(p->left, x, m);
      r->right = substOperand(p->right, x, m);
      return r;
    case K::HeapId:
      r->heapL = subst(p->heapL, x, m);
      r->heapR = subst(p->heapR, x, m);
      return r;
    case K::InDom:
      r->heapL = subst(p->heapL, x, m);
      r->loc = subst(p->loc, x, m);
      return r;
    case K::PointsTo: case K::Lookup:
      r->loc = subst(p->loc, x, m);
      r->state = substStateName(p->state, x, m);
      return r;
    case K::MemberOf:
      r->loc = subst(p->loc, x, m);
      for (auto& c : r->candidates) c = substStateName(c, x, m);
      return r;
    case K::Entangled:
      r->loc = subst(p->loc, x, m);
      return r;
    case K::Sep:
      for (auto& i : r->items) i = subst(i, x, m);
      return r;
  }
  return r;
}

AssertPtr substState(const AssertPtr& p, const Name& g, const StateExpr& s) {
  using K = Assertion::Kind;
  if (!p) return p;
  auto fixState = [&](const StateExpr& st) {
    return st.kind == StateExpr::Kind::Ghost && st.ghost == g ? s : st;
  };
  auto fixOperand = [&](const Operand& o) {
    if (o.state) return mk::opState(fixState(*o.state));
    if (o.term->kind == Intro::Kind::FromElim && o.term->elim->kind == Elim::Kind::Var &&
        o.term->elim->name == g)
      return mk::opState(s);
    return o;
  };
  auto r = std::make_shared<Assertion>(*p);
  switch (p->kind) {
    case K::ExistsVar: case K::ForallVar:
      if (p->binder == g) return p;
      r->a = substState(p->a, g, s);
      return r;
    case K::And: case K::Or: case K::Implies: case K::Compose: case K::Diff: case K::Not:
    case K::ExistsHeap: case K::ForallHeap:
      r->a = substState(p->a, g, s);
      r->b = substState(p->b, g, s);
      return r;
    case K::Id:
      r->left = fixOperand(p->left);
      r->right = fixOperand(p->right);
      return r;
    case K::PointsTo: case K::Lookup:
      r->state = fixState(p->state);
      return r;
    case K::MemberOf:
      for (auto& c : r->candidates) c = fixState(c);
      return r;
    case K::Sep:
      for (auto& i : r->items) i = substState(i, g, s);
      return r;
    default: return p;
  }
}

namespace {
HeapPtr substHeapExpr(const HeapPtr& h, const Name& x, const HeapPtr& g) {
  switch (h->kind) {
    case HeapExpr::Kind::Var: return h->name == x ? g : h;
    case HeapExpr::Kind::Empty: return h;
    case HeapExpr::Kind::Upd: return mk::upd(substHeapExpr(h->base, x, g), h->loc, h->value);
  }
  return h;
}
}  // namespace

AssertPtr substHeap(const AssertPtr& p, const Name& h, const HeapPtr& g) {
  using K = Assertion::Kind;
  if (!p) return p;
  auto r = std::make_shared<Assertion>(*p);
  switch (p->kind) {
    case K::ExistsHeap: case K::ForallHeap:
      if (p->binder == h) return p;
      r->a = substHeap(p->a, h, g);
      return r;
    case K::And: case K::Or: case K::Implies: case K::Compose: case K::Diff: case K::Not:
    case K::ExistsVar: case K::ForallVar:
      r->a = substHeap(p->a, h, g);
      r->b = substHeap(p->b, h, g);
      return r;
    case K::HeapId:
      r->heapL = substHeapExpr(p->heapL, h, g);
      r->heapR = substHeapExpr(p->heapR, h, g);
      return r;
    case K::InDom:
      r->heapL = substHeapExpr(p->heapL, h, g);
      return r;
    case K::Sep:
      for (auto& i : r->items) i = substHeap(i, h, g);
      return r;
    default: return p;
  }
}

// ---------------------------------------------------------------------------
// Alpha equivalence via canonical renaming of binders.

namespace {

struct Canon {
  int next = 0;
  Name fresh() { return "%@" + std::to_string(next++); }

  AssertPtr assertion(const AssertPtr& p) {
    using K = Assertion::Kind;
    if (!p) return p;
    auto r = std::make_shared<Assertion>(*p);
    switch (p->kind) {
      case K::ExistsVar: case K::ForallVar: {
        Name c = fresh();
        r->binder = c;
        r->type = type(p->type);
        r->a = assertion(subst(p->a, p->binder, mk::v(c)));
        return r;
      }
      case K::ExistsHeap: case K::ForallHeap: {
        Name c = fresh();
        r->binder = c;
        r->a = assertion(substHeap(p->a, p->binder, mk::hvar(c)));
        return r;
      }
      case K::And: case K::Or: case K::Implies: case K::Compose: case K::Diff: case K::Not:
        r->a = assertion(p->a);
        r->b = assertion(p->b);
        return r;
      case K::Sep:
        for (auto& i : r->items) i = assertion(i);
        return r;
      default: return p;
    }
  }

  PatternPtr pattern(const PatternPtr& p, std::map<Name, Name>& ren) {
    if (p->name) {
      Name c = fresh();
      ren[*p->name] = c;
      return mk::pat(c);
    }
    auto l = pattern(p->left, ren);
    return mk::patPair(l, pattern(p->right, ren));
  }

  TypePtr type(const TypePtr& t) {
    if (!t) return t;
    switch (t->kind) {
      case Type::Kind::Tensor: return mk::tensor(type(t->left), type(t->right));
      case Type::Kind::Pi: {
        Name c = fresh();
        auto dom = type(t->left);
        return mk::pi(c, dom, type(subst(t->right, t->binder, mk::v(c))));
      }
      case Type::Kind::Hoare: {
        VarContext vars;
        AssertPtr pre = t->pre, post = t->post;
        for (const auto& vb : t->varCtx) {
          Name c = fresh();
          vars.push_back({c, type(vb.type)});
          pre = subst(pre, vb.name, mk::v(c));
          post = subst(post, vb.name, mk::v(c));
        }
        HeapContext heaps;
        for (const auto& h : t->heapCtx) {
          Name c = fresh();
          heaps.push_back(c);
          pre = substHeap(pre, h, mk::hvar(c));
          post = substHeap(post, h, mk::hvar(c));
        }
        std::map<Name, Name> ren;
        auto res = pattern(t->result, ren);
        for (const auto& [from, to] : ren) post = subst(post, from, mk::v(to));
        return mk::hoare(vars, heaps, assertion(pre), res, type(t->resultType), assertion(post));
      }
      default: return t;
    }
  }
};

}  // namespace

bool alphaEqual(const TypePtr& a, const TypePtr& b) {
  Canon ca, cb;
  return equalPtr(ca.type(a), cb.type(b));
}

bool alphaEqual(const AssertPtr& a, const AssertPtr& b) {
  Canon ca, cb;
  return equalPtr(ca.assertion(a), cb.assertion(b));
}

// ---------------------------------------------------------------------------
// Derived forms

namespace {
const Name kSelectHeap = "%sel";

bool isCurrentHeap(const HeapPtr& h) {
  return h->kind == HeapExpr::Kind::Var && h->name == kCurrentHeap;
}
}  // namespace

AssertPtr expand(const AssertPtr& p) {
  using K = Assertion::Kind;
  if (!p) return p;
  switch (p->kind) {
    case K::Emp: return mk::heapId(mk::hvar(kCurrentHeap), mk::hempty());
    case K::PointsTo:
      return mk::heapId(mk::hvar(kCurrentHeap), mk::upd(mk::hempty(), p->loc, p->state));
    case K::Lookup: {
      if (p->state.kind == StateExpr::Kind::Wildcard)
        return mk::inDom(mk::hvar(kCurrentHeap), p->loc);
      NameSet avoid = freeVars(*p);
      Name h = freshAway(kSelectHeap, avoid);
      return mk::existsHeap(h, mk::heapId(mk::hvar(kCurrentHeap),
                                           mk::upd(mk::hvar(h), p->loc, p->state)));
    }
    case K::MemberOf: {
      AssertPtr acc;
      for (auto it = p->candidates.rbegin(); it != p->candidates.rend(); ++it) {
        auto eq = mk::id(mk::opTerm(p->loc), mk::opState(*it));
        acc = acc ? mk::disj(eq, acc) : eq;
      }
      return acc ? acc : mk::bot();
    }
    default: break;
  }
  auto r = std::make_shared<Assertion>(*p);
  r->a = expand(p->a);
  r->b = expand(p->b);
  for (auto& i : r->items) i = expand(i);
  return r;
}

AssertPtr contract(const AssertPtr& p) {
  using K = Assertion::Kind;
  if (!p) return p;
  if (p->kind == K::HeapId && isCurrentHeap(p->heapL)) {
    const auto& r = p->heapR;
    if (r->kind == HeapExpr::Kind::Empty) return mk::emp();
    if (r->kind == HeapExpr::Kind::Upd && r->base->kind == HeapExpr::Kind::Empty)
      return mk::pointsTo(r->loc, r->value);
  }
  if (p->kind == K::InDom && isCurrentHeap(p->heapL)) return mk::lookup(p->loc, mk::wildcard());
  if (p->kind == K::ExistsHeap && p->a->kind == K::HeapId && isCurrentHeap(p->a->heapL)) {
    const auto& r = p->a->heapR;
    if (r->kind == HeapExpr::Kind::Upd && r->base->kind == HeapExpr::Kind::Var &&
        r->base->name == p->binder && r->value.kind != StateExpr::Kind::Wildcard &&
        !freeVars(*r->loc).count(p->binder))
      return mk::lookup(r->loc, r->value);
  }
  // A right-nested disjunction of Id(t, state) over one term is a membership.
  if (p->kind == K::Or || p->kind == K::Id) {
    std::vector<StateExpr> cands;
    IntroPtr term;
    const Assertion* cur = p.get();
    bool ok = true;
    while (ok) {
      const Assertion* eq = cur->kind == K::Or ? cur->a.get() : cur;
      if (eq->kind != K::Id || !eq->left.term || !eq->right.state) { ok = false; break; }
      if (term && !equalPtr(term, eq->left.term)) { ok = false; break; }
      term = eq->left.term;
      cands.push_back(*eq->right.state);
      if (cur->kind != K::Or) break;
      cur = cur->b.get();
    }
    if (ok && cands.size() >= 2) return mk::memberOf(term, cands);
    if (p->kind == K::Id) return p;
  }
  auto r = std::make_shared<Assertion>(*p);
  r->a = contract(p->a);
  r->b = contract(p->b);
  for (auto& i : r->items) i = contract(i);
  return r;
}

std::vector<AssertPtr> conjuncts(const AssertPtr& p) {
  std::vector<AssertPtr> out;
  std::function<void(const AssertPtr&)> go = [&](const AssertPtr& q) {
    if (q->kind == Assertion::Kind::And) {
      go(q->a);
      go(q->b);
    } else if (q->kind != Assertion::Kind::Top) {
      out.push_back(q);
    }
  };
  go(p);
  return out;
}

AssertPtr conjoin(const std::vector<AssertPtr>& ps) {
  if (ps.empty()) return mk::top();
  AssertPtr acc = ps.back();
  for (auto it = ps.rbegin() + 1; it != ps.rend(); ++it) acc = mk::conj(*it, acc);
  return acc;
}

}  // namespace qhtt
