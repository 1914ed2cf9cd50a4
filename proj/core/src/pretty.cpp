#include "qhtt/pretty.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace qhtt {

std::string formatNumber(double x) {
  if (x == 0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string formatComplex(Complex z) {
  double re = z.real(), im = z.imag();
  if (im == 0) return formatNumber(re);
  if (re == 0) return formatNumber(im) + "i";
  std::string s = formatNumber(re);
  if (im < 0 || std::signbit(im)) return s + "-" + formatNumber(-im) + "i";
  return s + "+" + formatNumber(im) + "i";
}

namespace {

// Intro precedence: 0 extends to the right (lambda, do, if), 1 application,
// 2 atom.
int introPrec(const Intro& m) {
  switch (m.kind) {
    case Intro::Kind::Lam: case Intro::Kind::Do: case Intro::Kind::If: return 0;
    case Intro::Kind::Rot: return 1;
    case Intro::Kind::FromElim: return m.elim->kind == Elim::Kind::App ? 1 : 2;
    default: return 2;
  }
}

std::string introAt(const Intro& m, int prec) {
  std::string s = pretty(m);
  return introPrec(m) < prec ? "(" + s + ")" : s;
}

std::string typeAtom(const Type& t) {
  std::string s = pretty(t);
  if (t.kind == Type::Kind::Pi || t.kind == Type::Kind::Hoare) return "(" + s + ")";
  return s;
}

// Assertion precedence: quantifiers 0, \o 1, -o 2, => 3, \/ 4, /\ 5, ~ 6, atom 7.
int assertPrec(const Assertion& p) {
  using K = Assertion::Kind;
  switch (p.kind) {
    case K::ExistsVar: case K::ForallVar: case K::ExistsHeap: case K::ForallHeap: return 0;
    case K::Compose: return 1;
    case K::Diff: return 2;
    case K::Implies: return 3;
    case K::Or: return 4;
    case K::And: return 5;
    case K::Not: return 6;
    default: return 7;
  }
}

std::string assertAt(const Assertion& p, int prec) {
  std::string s = pretty(p);
  return assertPrec(p) < prec ? "(" + s + ")" : s;
}

bool isCellAtom(const Assertion& p) {
  return p.kind == Assertion::Kind::PointsTo || p.kind == Assertion::Kind::Lookup;
}

std::string step(const Comp& e) {
  switch (e.kind) {
    case Comp::Kind::Return: return "return " + pretty(*e.value);
    case Comp::Kind::BindRun: return pretty(*e.binder) + " <- " + pretty(*e.source);
    case Comp::Kind::BindCmd: return pretty(*e.binder) + " <= " + pretty(*e.command);
    case Comp::Kind::LetEq:
      return pretty(*e.binder) + " : " + pretty(*e.annType) + " = " + introAt(*e.value, 1);
  }
  return {};
}

}  // namespace

std::string pretty(const Type& t) {
  switch (t.kind) {
    case Type::Kind::Unit: return "1";
    case Type::Kind::Bool: return "Bool";
    case Type::Kind::Qbit: return "Qbit";
    case Type::Kind::U: return "U";
    case Type::Kind::Pure: return "Pure";
    case Type::Kind::Tensor: return "(" + pretty(*t.left) + ", " + pretty(*t.right) + ")";
    case Type::Kind::Pi:
      if (t.binder == "_") return typeAtom(*t.left) + " -> " + pretty(*t.right);
      return "\\Pi " + t.binder + " : " + pretty(*t.left) + ". " + pretty(*t.right);
    case Type::Kind::Hoare: {
      std::string s;
      for (const auto& b : t.varCtx) s += b.name + " : " + pretty(*b.type) + ". ";
      for (const auto& h : t.heapCtx) s += h + " : heap. ";
      s += "{" + pretty(*t.pre) + "} " + pretty(*t.result) + " : " + typeAtom(*t.resultType) +
           " {" + pretty(*t.post) + "}";
      return s;
    }
  }
  return {};
}

std::string pretty(const Pattern& p) {
  if (p.name) return *p.name;
  return "(" + pretty(*p.left) + ", " + pretty(*p.right) + ")";
}

std::string pretty(const Elim& k) {
  switch (k.kind) {
    case Elim::Kind::Var: return k.name;
    case Elim::Kind::App: return pretty(*k.fn) + " " + introAt(*k.arg, 2);
    case Elim::Kind::Ascribe:
      if (!k.type) return "(" + pretty(*k.arg) + ")";
      return "(" + pretty(*k.arg) + " : " + pretty(*k.type) + ")";
  }
  return {};
}

std::string pretty(const Intro& m) {
  switch (m.kind) {
    case Intro::Kind::FromElim: return pretty(*m.elim);
    case Intro::Kind::Unit: return "()";
    case Intro::Kind::Lam: return "\\" + m.binder + ". " + pretty(*m.a);
    case Intro::Kind::Do: return "do " + pretty(*m.body);
    case Intro::Kind::True: return "true";
    case Intro::Kind::False: return "false";
    case Intro::Kind::Pair: return "(" + pretty(*m.a) + ", " + pretty(*m.b) + ")";
    case Intro::Kind::If:
      return "if " + introAt(*m.a, 1) + " then " + introAt(*m.b, 1) + " else " +
             introAt(*m.c, 1);
    case Intro::Kind::Rot: {
      const auto& x = m.matrix;
      return "rot " + introAt(*m.a, 2) + " [[" + formatComplex(x[0]) + ", " +
             formatComplex(x[1]) + "], [" + formatComplex(x[2]) + ", " + formatComplex(x[3]) +
             "]]";
    }
  }
  return {};
}

std::string pretty(const Command& c) {
  switch (c.kind) {
    case Command::Kind::MkQbit: return "mkQbit " + introAt(*c.a, 2);
    case Command::Kind::MeasQbit: return "measQbit " + introAt(*c.a, 2);
    case Command::Kind::ApplyU: return "applyU " + introAt(*c.a, 2);
    case Command::Kind::If:
      return "if " + introAt(*c.a, 1) + " then " + introAt(*c.b, 1) + " else " +
             introAt(*c.c, 1);
  }
  return {};
}

std::string pretty(const Comp& e) {
  std::string s;
  const Comp* cur = &e;
  while (true) {
    s += step(*cur);
    if (cur->kind == Comp::Kind::Return) break;
    s += "; ";
    cur = cur->rest.get();
  }
  return s;
}

std::string pretty(const StateExpr& s) {
  switch (s.kind) {
    case StateExpr::Kind::Ket0: return "|0\\>";
    case StateExpr::Kind::Ket1: return "|1\\>";
    case StateExpr::Kind::KetPlus: return "|+\\>";
    case StateExpr::Kind::KetMinus: return "|-\\>";
    case StateExpr::Kind::KetPhiPlus: return "|\\Phi+\\>";
    case StateExpr::Kind::Ghost: return s.ghost;
    case StateExpr::Kind::Wildcard: return "-";
    case StateExpr::Kind::Unknown: return "?";
    case StateExpr::Kind::Concrete: {
      std::string r = "|[";
      for (std::size_t i = 0; i < s.amplitudes.size(); ++i) {
        if (i) r += ", ";
        r += formatComplex(s.amplitudes[i]);
      }
      return r + "]\\>";
    }
  }
  return {};
}

std::string pretty(const HeapExpr& h) {
  switch (h.kind) {
    case HeapExpr::Kind::Var: return h.name;
    case HeapExpr::Kind::Empty: return "empty";
    case HeapExpr::Kind::Upd:
      return "upd(" + pretty(*h.base) + ", " + pretty(*h.loc) + ", " + pretty(h.value) + ")";
  }
  return {};
}

namespace {
std::string operand(const Operand& o) { return o.state ? pretty(*o.state) : pretty(*o.term); }
}  // namespace

std::string pretty(const Assertion& p) {
  using K = Assertion::Kind;
  switch (p.kind) {
    case K::Top: return "T";
    case K::Bot: return "F";
    case K::And: return assertAt(*p.a, 6) + " /\\ " + assertAt(*p.b, 5);
    case K::Or: return assertAt(*p.a, 5) + " \\/ " + assertAt(*p.b, 4);
    case K::Implies: return assertAt(*p.a, 4) + " => " + assertAt(*p.b, 3);
    case K::Not: return "~" + assertAt(*p.a, 6);
    case K::ExistsVar: return "exists " + p.binder + " : " + pretty(*p.type) + ". " + pretty(*p.a);
    case K::ForallVar: return "forall " + p.binder + " : " + pretty(*p.type) + ". " + pretty(*p.a);
    case K::ExistsHeap: return "exists " + p.binder + " : heap. " + pretty(*p.a);
    case K::ForallHeap: return "forall " + p.binder + " : heap. " + pretty(*p.a);
    case K::Id: return "Id(" + operand(p.left) + ", " + operand(p.right) + ")";
    case K::HeapId: return "HId(" + pretty(*p.heapL) + ", " + pretty(*p.heapR) + ")";
    case K::InDom: return "indom(" + pretty(*p.heapL) + ", " + pretty(*p.loc) + ")";
    case K::Emp: return "emp";
    case K::PointsTo: return introAt(*p.loc, 2) + " |-> " + pretty(p.state);
    case K::Lookup: return introAt(*p.loc, 2) + " ~> " + pretty(p.state);
    case K::MemberOf: {
      std::string s = introAt(*p.loc, 2) + " \\in {";
      for (std::size_t i = 0; i < p.candidates.size(); ++i) {
        if (i) s += ", ";
        s += pretty(p.candidates[i]);
      }
      return s + "}";
    }
    case K::Entangled: return "entangled(" + pretty(*p.loc) + ")";
    case K::Compose: return assertAt(*p.a, 1) + " \\o (" + pretty(*p.b) + ")";
    case K::Diff: {
      auto side = [](const Assertion& q) {
        return isCellAtom(q) ? "(" + pretty(q) + ")" : assertAt(q, 3);
      };
      return side(*p.a) + " -o " + side(*p.b);
    }
    case K::Sep: {
      std::string s = "(";
      for (std::size_t i = 0; i < p.items.size(); ++i) {
        if (i) s += ", ";
        s += pretty(*p.items[i]);
      }
      return s + ")";
    }
    case K::Named: return p.binder;
  }
  return {};
}

std::string pretty(const Decl& d) {
  return d.name + " : " + pretty(*d.signature) + "\n  = " + pretty(*d.body) + "\n";
}

std::string pretty(const Program& p) {
  std::string s;
  for (std::size_t i = 0; i < p.decls.size(); ++i) {
    if (i) s += "\n";
    s += pretty(p.decls[i]);
  }
  return s;
}

}  // namespace qhtt
