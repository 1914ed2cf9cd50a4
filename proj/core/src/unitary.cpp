#include "qhtt/unitary.hpp"

#include <algorithm>

#include "qhtt/pretty.hpp"

namespace qhtt {

namespace umk {
UnitaryPtr mempty() {
  static const UnitaryPtr u = std::make_shared<UnitaryExpr>();
  return u;
}
UnitaryPtr mappend(UnitaryPtr a, UnitaryPtr b) {
  auto u = std::make_shared<UnitaryExpr>();
  u->kind = UnitaryExpr::Kind::MAppend;
  u->first = std::move(a);
  u->second = std::move(b);
  return u;
}
UnitaryPtr rot(Name q, const Matrix2& m) {
  auto u = std::make_shared<UnitaryExpr>();
  u->kind = UnitaryExpr::Kind::Rot;
  u->qubit = std::move(q);
  u->matrix = m;
  return u;
}
UnitaryPtr cond(Name q, UnitaryPtr onTrue, UnitaryPtr onFalse) {
  auto u = std::make_shared<UnitaryExpr>();
  u->kind = UnitaryExpr::Kind::Cond;
  u->qubit = std::move(q);
  u->onTrue = std::move(onTrue);
  u->onFalse = std::move(onFalse);
  return u;
}
UnitaryPtr ifQ(Name q, UnitaryPtr u) { return cond(std::move(q), std::move(u), mempty()); }
}  // namespace umk

namespace {

struct Reader {
  std::vector<Matrix2> nonUnitary;
  std::string error;

  UnitaryPtr fail(std::string msg) {
    if (error.empty()) error = std::move(msg);
    return nullptr;
  }

  std::optional<Name> qubit(const IntroPtr& m) {
    if (m->kind == Intro::Kind::FromElim && m->elim->kind == Elim::Kind::Var) return m->elim->name;
    fail("qubit argument is not a variable: " + pretty(*m));
    return std::nullopt;
  }

  // Reduces a pure conditional on a literal.
  IntroPtr settle(IntroPtr m) {
    while (m->kind == Intro::Kind::If) {
      if (m->a->kind == Intro::Kind::True) m = m->b;
      else if (m->a->kind == Intro::Kind::False) m = m->c;
      else break;
    }
    return m;
  }

  UnitaryPtr read(IntroPtr m) {
    m = settle(m);
    if (m->kind == Intro::Kind::Rot) {
      auto q = qubit(m->a);
      if (!q) return nullptr;
      if (!linalg::isUnitary(m->matrix)) nonUnitary.push_back(m->matrix);
      return umk::rot(*q, m->matrix);
    }
    if (m->kind == Intro::Kind::If)
      return fail("unitary depends on an unresolved condition: " + pretty(*m->a));
    if (m->kind != Intro::Kind::FromElim) return fail("not a unitary expression: " + pretty(*m));
    std::vector<IntroPtr> args;
    const Elim* k = m->elim.get();
    while (k->kind == Elim::Kind::App) {
      args.push_back(k->arg);
      k = k->fn.get();
    }
    std::reverse(args.begin(), args.end());
    if (k->kind != Elim::Kind::Var) return fail("not a unitary expression: " + pretty(*m));
    const Name& f = k->name;
    if (f == "mempty" && args.empty()) return umk::mempty();
    if (f == "mappend" && args.size() == 2) {
      auto a = read(args[0]);
      auto b = read(args[1]);
      if (!a || !b) return nullptr;
      return umk::mappend(a, b);
    }
    if ((f == "H" || f == "X" || f == "Y" || f == "Z") && args.size() == 1) {
      auto q = qubit(args[0]);
      if (!q) return nullptr;
      const Matrix2& mat = f == "H" ? linalg::hadamard()
                           : f == "X" ? linalg::pauliX()
                           : f == "Y" ? linalg::pauliY()
                                      : linalg::pauliZ();
      return umk::rot(*q, mat);
    }
    if (f == "ifQ" && args.size() == 2) {
      auto q = qubit(args[0]);
      auto u = read(args[1]);
      if (!q || !u) return nullptr;
      return check(umk::ifQ(*q, u));
    }
    if (f == "cond" && args.size() == 2) {
      auto q = qubit(args[0]);
      if (!q) return nullptr;
      const IntroPtr& fn = args[1];
      UnitaryPtr t, e;
      if (fn->kind == Intro::Kind::Lam) {
        t = read(subst(fn->a, fn->binder, mk::boolean(true)));
        e = read(subst(fn->a, fn->binder, mk::boolean(false)));
      } else {
        return fail("cond branch is not a function literal: " + pretty(*fn));
      }
      if (!t || !e) return nullptr;
      return check(umk::cond(*q, t, e));
    }
    return fail("unitary is not statically known: " + pretty(*m));
  }

  UnitaryPtr check(UnitaryPtr u) {
    for (const auto& n : footprint(*u->onTrue))
      if (n == u->qubit) return fail("conditional unitary acts on its own control qubit " + n);
    for (const auto& n : footprint(*u->onFalse))
      if (n == u->qubit) return fail("conditional unitary acts on its own control qubit " + n);
    return u;
  }
};

void collect(const UnitaryExpr& u, std::vector<Name>& out) {
  auto add = [&](const Name& n) {
    if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
  };
  switch (u.kind) {
    case UnitaryExpr::Kind::MEmpty: break;
    case UnitaryExpr::Kind::MAppend:
      collect(*u.first, out);
      collect(*u.second, out);
      break;
    case UnitaryExpr::Kind::Rot: add(u.qubit); break;
    case UnitaryExpr::Kind::Cond:
      add(u.qubit);
      collect(*u.onTrue, out);
      collect(*u.onFalse, out);
      break;
  }
}

// Applies u to the components of v selected by mask/value on the control bits.
void applyMasked(linalg::Vec& v, const std::vector<Name>& order, const UnitaryExpr& u,
                 std::size_t mask, std::size_t value) {
  std::size_t n = order.size();
  auto pos = [&](const Name& q) {
    return static_cast<std::size_t>(std::find(order.begin(), order.end(), q) - order.begin());
  };
  switch (u.kind) {
    case UnitaryExpr::Kind::MEmpty: break;
    case UnitaryExpr::Kind::MAppend:
      applyMasked(v, order, *u.first, mask, value);
      applyMasked(v, order, *u.second, mask, value);
      break;
    case UnitaryExpr::Kind::Rot: {
      std::size_t bit = std::size_t{1} << (n - 1 - pos(u.qubit));
      const Matrix2& m = u.matrix;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if ((i & bit) || (i & mask) != value) continue;
        Complex a = v[i], b = v[i | bit];
        v[i] = m[0] * a + m[1] * b;
        v[i | bit] = m[2] * a + m[3] * b;
      }
      break;
    }
    case UnitaryExpr::Kind::Cond: {
      std::size_t bit = std::size_t{1} << (n - 1 - pos(u.qubit));
      applyMasked(v, order, *u.onTrue, mask | bit, value | bit);
      applyMasked(v, order, *u.onFalse, mask | bit, value);
      break;
    }
  }
}

}  // namespace

UnitaryEval evalUnitary(const IntroPtr& term) {
  Reader r;
  UnitaryEval out;
  out.expr = r.read(term);
  out.nonUnitary = std::move(r.nonUnitary);
  out.error = std::move(r.error);
  if (!out.error.empty()) out.expr = nullptr;
  return out;
}

std::vector<Name> footprint(const UnitaryExpr& u) {
  std::vector<Name> out;
  collect(u, out);
  return out;
}

void applyDense(linalg::Vec& v, const std::vector<Name>& order, const UnitaryExpr& u) {
  applyMasked(v, order, u, 0, 0);
}

std::string describe(const UnitaryExpr& u) {
  switch (u.kind) {
    case UnitaryExpr::Kind::MEmpty: return "mempty";
    case UnitaryExpr::Kind::MAppend:
      return "mappend (" + describe(*u.first) + ") (" + describe(*u.second) + ")";
    case UnitaryExpr::Kind::Rot: {
      const auto& m = u.matrix;
      return "rot " + u.qubit + " [[" + formatComplex(m[0]) + ", " + formatComplex(m[1]) + "], [" +
             formatComplex(m[2]) + ", " + formatComplex(m[3]) + "]]";
    }
    case UnitaryExpr::Kind::Cond:
      return "cond " + u.qubit + " (" + describe(*u.onTrue) + " | " + describe(*u.onFalse) + ")";
  }
  return {};
}

}  // namespace qhtt
