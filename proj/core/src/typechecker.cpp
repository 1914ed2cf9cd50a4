#include "qhtt/typechecker.hpp"

#include <algorithm>

#include "qhtt/pretty.hpp"

namespace qhtt {

bool typeEqual(const TypePtr& a, const TypePtr& b) { return alphaEqual(a, b); }

const VarContext& Checker::builtins() {
  static const VarContext ctx = [] {
    TypePtr q = mk::qbit(), u = mk::unitary();
    VarContext c;
    for (const char* g : {"H", "X", "Y", "Z"}) c.push_back({g, mk::arrow(q, u)});
    c.push_back({"ifQ", mk::arrow(q, mk::arrow(u, u))});
    c.push_back({"cond", mk::arrow(q, mk::arrow(mk::arrow(mk::boolean(), u), u))});
    c.push_back({"mempty", u});
    c.push_back({"mappend", mk::arrow(u, mk::arrow(u, u))});
    return c;
  }();
  return ctx;
}

Checker::Checker(const Program& p, CheckOptions opts) : program_(p), opts_(opts) {}

Name Checker::freshName(const std::string& base) {
  return "%" + base + std::to_string(++fresh_);
}

TypePtr Checker::lookup(const VarContext& ctx, const Name& x) const {
  for (auto it = ctx.rbegin(); it != ctx.rend(); ++it)
    if (it->name == x) return it->type;
  if (auto it = globals_.find(x); it != globals_.end()) return it->second.type;
  for (const auto& b : builtins())
    if (b.name == x) return b.type;
  return nullptr;
}

namespace {

VarContext extend(VarContext ctx, const Name& x, TypePtr t) {
  ctx.push_back({x, std::move(t)});
  return ctx;
}

TypePtr finalCodomain(TypePtr t) {
  while (t->kind == Type::Kind::Pi) t = t->right;
  return t;
}

Span spanOfIntro(const Intro& m) {
  if (m.kind == Intro::Kind::FromElim) return m.elim->span;
  return m.span;
}

void bindPattern(const PatternPtr& p, const TypePtr& t, VarContext& ctx, Span s) {
  if (p->name) {
    ctx.push_back({*p->name, t});
    return;
  }
  if (t->kind != Type::Kind::Tensor)
    throw TypeError("pattern " + pretty(*p) + " does not match type " + pretty(*t), s);
  bindPattern(p->left, t->left, ctx, s);
  bindPattern(p->right, t->right, ctx, s);
}

}  // namespace

void Checker::checkLocation(const VarContext& ctx, const IntroPtr& loc, Span s) const {
  if (loc->kind == Intro::Kind::Pair) {
    checkLocation(ctx, loc->a, s);
    checkLocation(ctx, loc->b, s);
    return;
  }
  if (loc->kind != Intro::Kind::FromElim || loc->elim->kind != Elim::Kind::Var) return;
  TypePtr t = lookup(ctx, loc->elim->name);
  if (t && t->kind != Type::Kind::Qbit)
    throw TypeError("location '" + loc->elim->name + "' has type " + pretty(*t) + ", expected Qbit", s);
}

void Checker::checkLocations(const VarContext& ctx, const Assertion& p, Span s) const {
  using K = Assertion::Kind;
  switch (p.kind) {
    case K::ExistsVar:
    case K::ForallVar:
      checkLocations(extend(ctx, p.binder, p.type), *p.a, s);
      return;
    case K::PointsTo: case K::Lookup: case K::MemberOf: case K::Entangled: case K::InDom:
      checkLocation(ctx, p.loc, s);
      break;
    default: break;
  }
  if (p.a) checkLocations(ctx, *p.a, s);
  if (p.b) checkLocations(ctx, *p.b, s);
  for (const auto& i : p.items) checkLocations(ctx, *i, s);
}

void Checker::wellScoped(const VarContext& ctx, const AssertPtr& p, const NameSet& extra, Span s) {
  for (const auto& n : freeVars(*p)) {
    if (extra.count(n) || lookup(ctx, n)) continue;
    throw TypeError("unbound name '" + n + "' in assertion " + pretty(*p), s);
  }
  checkLocations(ctx, *p, s);
}

void Checker::wellFormed(const VarContext& ctx, const TypePtr& t, Span s) {
  switch (t->kind) {
    case Type::Kind::Pi:
      wellFormed(ctx, t->left, s);
      wellFormed(extend(ctx, t->binder, t->left), t->right, s);
      return;
    case Type::Kind::Tensor:
      wellFormed(ctx, t->left, s);
      wellFormed(ctx, t->right, s);
      return;
    case Type::Kind::Hoare: {
      VarContext inner = ctx;
      NameSet seen;
      for (const auto& b : t->varCtx) {
        if (!seen.insert(b.name).second) throw TypeError("duplicate context binder '" + b.name + "'", s);
        wellFormed(inner, b.type, s);
        inner.push_back(b);
      }
      NameSet heaps(t->heapCtx.begin(), t->heapCtx.end());
      wellScoped(inner, t->pre, heaps, s);
      wellFormed(inner, t->resultType, s);
      bindPattern(t->result, t->resultType, inner, s);
      wellScoped(inner, t->post, heaps, s);
      return;
    }
    default: return;
  }
}

SynthResult Checker::synth(const VarContext& ctx, const ElimPtr& k) {
  TypePtr type;
  switch (k->kind) {
    case Elim::Kind::Var:
      type = lookup(ctx, k->name);
      if (!type) throw TypeError("unbound variable '" + k->name + "'", k->span);
      break;
    case Elim::Kind::App: {
      SynthResult f = synth(ctx, k->fn);
      if (f.type->kind != Type::Kind::Pi)
        throw TypeError("'" + pretty(*k->fn) + "' of type " + pretty(*f.type) + " is applied to an argument",
                        k->span);
      IntroPtr arg = check(ctx, k->arg, f.type->left);
      type = f.type->binder == "_" ? f.type->right : subst(f.type->right, f.type->binder, arg);
      break;
    }
    case Elim::Kind::Ascribe:
      if (!k->type) {
        type = synthIntro(ctx, k->arg);
      } else {
        wellFormed(ctx, k->type, k->span);
        check(ctx, k->arg, k->type);
        type = k->type;
      }
      break;
  }
  return {type, normalize(mk::fromElim(k), type, ctx)};
}

TypePtr Checker::synthIntro(const VarContext& ctx, const IntroPtr& m) {
  switch (m->kind) {
    case Intro::Kind::Unit: return mk::unit();
    case Intro::Kind::True: case Intro::Kind::False: return mk::boolean();
    case Intro::Kind::Pair: return mk::tensor(synthIntro(ctx, m->a), synthIntro(ctx, m->b));
    case Intro::Kind::FromElim: return synth(ctx, m->elim).type;
    case Intro::Kind::Rot:
      check(ctx, m->a, mk::qbit());
      return mk::unitary();
    case Intro::Kind::If: {
      check(ctx, m->a, mk::boolean());
      TypePtr t = synthIntro(ctx, m->b);
      check(ctx, m->c, t);
      return t;
    }
    default:
      throw TypeError("cannot infer the type of '" + pretty(*m) + "'; add a type ascription", spanOfIntro(*m));
  }
}

IntroPtr Checker::check(const VarContext& ctx, const IntroPtr& m, const TypePtr& a) {
  Span s = spanOfIntro(*m);
  auto mismatch = [&](const std::string& what) {
    return TypeError(what + " '" + pretty(*m) + "' checked against type " + pretty(*a), s);
  };
  switch (m->kind) {
    case Intro::Kind::Unit:
      if (a->kind != Type::Kind::Unit) throw mismatch("unit value");
      break;
    case Intro::Kind::True:
    case Intro::Kind::False:
      if (a->kind != Type::Kind::Bool) throw mismatch("boolean");
      break;
    case Intro::Kind::Pair:
      if (a->kind != Type::Kind::Tensor) throw mismatch("pair");
      check(ctx, m->a, a->left);
      check(ctx, m->b, a->right);
      break;
    case Intro::Kind::Lam: {
      if (a->kind != Type::Kind::Pi) throw mismatch("function");
      TypePtr cod = a->binder == "_" || a->binder == m->binder ? a->right
                                                               : subst(a->right, a->binder, mk::v(m->binder));
      check(extend(ctx, m->binder, a->left), m->a, cod);
      break;
    }
    case Intro::Kind::Do: {
      if (a->kind != Type::Kind::Hoare) throw mismatch("suspended computation");
      CompResult r = checkComputation(ctx, a, m->body);
      if (sink_) sink_->insert(sink_->end(), r.obligations.begin(), r.obligations.end());
      if (traceSink_) {
        *traceSink_ = r.trace;
        traceSink_ = nullptr;
      }
      break;
    }
    case Intro::Kind::If:
      check(ctx, m->a, mk::boolean());
      check(ctx, m->b, a);
      check(ctx, m->c, a);
      break;
    case Intro::Kind::Rot:
      if (a->kind != Type::Kind::U) throw mismatch("rotation");
      check(ctx, m->a, mk::qbit());
      break;
    case Intro::Kind::FromElim: {
      SynthResult r = synth(ctx, m->elim);
      if (!typeEqual(r.type, a))
        throw TypeError("type mismatch: '" + pretty(*m) + "' has type " + pretty(*r.type) + " but " +
                            pretty(*a) + " was expected",
                        s);
      return r.canonical;
    }
  }
  return normalize(m, a, ctx);
}

// ---------------------------------------------------------------------------
// Normalization

IntroPtr Checker::reduce(const IntroPtr& m, bool unfoldAll) { return reduceIn(m, unfoldAll, {}); }

IntroPtr Checker::reduceIn(const IntroPtr& m, bool unfoldAll, const NameSet& bound) {
  switch (m->kind) {
    case Intro::Kind::FromElim: return reduceElim(m->elim, unfoldAll, bound);
    case Intro::Kind::Lam: {
      NameSet inner = bound;
      inner.insert(m->binder);
      return mk::lam(m->binder, reduceIn(m->a, unfoldAll, inner));
    }
    case Intro::Kind::If: {
      IntroPtr c = reduceIn(m->a, unfoldAll, bound);
      if (c->kind == Intro::Kind::True) return reduceIn(m->b, unfoldAll, bound);
      if (c->kind == Intro::Kind::False) return reduceIn(m->c, unfoldAll, bound);
      return mk::ifTerm(c, reduceIn(m->b, unfoldAll, bound), reduceIn(m->c, unfoldAll, bound));
    }
    case Intro::Kind::Pair:
      return mk::pair(reduceIn(m->a, unfoldAll, bound), reduceIn(m->b, unfoldAll, bound));
    case Intro::Kind::Rot: return mk::rot(reduceIn(m->a, unfoldAll, bound), m->matrix);
    default: return m;
  }
}

IntroPtr Checker::applyReduced(const IntroPtr& f, const IntroPtr& a, bool unfoldAll, const NameSet& bound) {
  switch (f->kind) {
    case Intro::Kind::Lam: return reduceIn(subst(f->a, f->binder, a), unfoldAll, bound);
    case Intro::Kind::FromElim: return mk::fromElim(mk::app(f->elim, a));
    case Intro::Kind::If:
      return mk::ifTerm(f->a, applyReduced(f->b, a, unfoldAll, bound), applyReduced(f->c, a, unfoldAll, bound));
    default: return mk::fromElim(mk::app(mk::ascribe(f, nullptr), a));
  }
}

IntroPtr Checker::reduceElim(const ElimPtr& k, bool unfoldAll, const NameSet& bound) {
  switch (k->kind) {
    case Elim::Kind::Var: {
      if (!bound.count(k->name)) {
        auto it = globals_.find(k->name);
        if (it != globals_.end() && it->second.body && (it->second.unfold || unfoldAll)) return it->second.body;
      }
      return mk::fromElim(mk::var(k->name));
    }
    case Elim::Kind::App: {
      IntroPtr f = reduceElim(k->fn, unfoldAll, bound);
      IntroPtr a = reduceIn(k->arg, unfoldAll, bound);
      return applyReduced(f, a, unfoldAll, bound);
    }
    case Elim::Kind::Ascribe: return reduceIn(k->arg, unfoldAll, bound);
  }
  return nullptr;
}

IntroPtr Checker::etaSpine(const IntroPtr& n, const VarContext& ctx) {
  std::vector<IntroPtr> args;
  const Elim* k = n->elim.get();
  while (k->kind == Elim::Kind::App) {
    args.push_back(k->arg);
    k = k->fn.get();
  }
  if (k->kind != Elim::Kind::Var || args.empty()) return n;
  TypePtr t = lookup(ctx, k->name);
  if (!t) return n;
  std::reverse(args.begin(), args.end());
  ElimPtr out = mk::var(k->name);
  for (const auto& a : args) {
    if (t->kind != Type::Kind::Pi) return n;
    IntroPtr a2 = etaLong(a, t->left, ctx);
    t = t->binder == "_" ? t->right : subst(t->right, t->binder, a2);
    out = mk::app(out, a2);
  }
  return mk::fromElim(out);
}

IntroPtr Checker::etaLong(const IntroPtr& n, const TypePtr& a, const VarContext& ctx) {
  switch (a->kind) {
    case Type::Kind::Pi: {
      if (n->kind == Intro::Kind::Lam) {
        TypePtr cod = a->binder == "_" || a->binder == n->binder ? a->right
                                                                 : subst(a->right, a->binder, mk::v(n->binder));
        return mk::lam(n->binder, etaLong(n->a, cod, extend(ctx, n->binder, a->left)));
      }
      NameSet avoid = freeVars(*n);
      for (const auto& b : ctx) avoid.insert(b.name);
      Name y = freshAway(a->binder == "_" ? "x" : a->binder, avoid);
      VarContext inner = extend(ctx, y, a->left);
      IntroPtr arg = etaLong(mk::v(y), a->left, inner);
      IntroPtr applied = n->kind == Intro::Kind::FromElim ? mk::fromElim(mk::app(n->elim, arg))
                                                          : mk::fromElim(mk::app(mk::ascribe(n, nullptr), arg));
      TypePtr cod = a->binder == "_" ? a->right : subst(a->right, a->binder, mk::v(y));
      return mk::lam(y, etaLong(reduceIn(applied, false, {}), cod, inner));
    }
    case Type::Kind::Tensor:
      if (n->kind == Intro::Kind::Pair)
        return mk::pair(etaLong(n->a, a->left, ctx), etaLong(n->b, a->right, ctx));
      if (n->kind == Intro::Kind::FromElim) return etaSpine(n, ctx);
      return n;
    default:
      if (n->kind == Intro::Kind::FromElim) return etaSpine(n, ctx);
      if (n->kind == Intro::Kind::If)
        return mk::ifTerm(etaLong(n->a, mk::boolean(), ctx), etaLong(n->b, a, ctx), etaLong(n->c, a, ctx));
      if (n->kind == Intro::Kind::Rot) return mk::rot(etaLong(n->a, mk::qbit(), ctx), n->matrix);
      return n;
  }
}

IntroPtr Checker::normalize(const IntroPtr& m, const TypePtr& a, const VarContext& ctx) {
  NameSet bound;
  for (const auto& b : ctx) bound.insert(b.name);
  return etaLong(reduceIn(m, false, bound), a, ctx);
}

// ---------------------------------------------------------------------------
// Declarations

DeclResult Checker::checkDecl(const Decl& d) {
  DeclResult r;
  r.name = d.name;
  currentDecl_ = d.name;
  sink_ = &r.obligations;
  traceSink_ = &r.trace;
  Global g;
  g.type = d.signature;
  try {
    wellFormed({}, d.signature, d.sigSpan);
    r.canonical = check({}, d.body, d.signature);
    g.body = r.canonical;
    g.unfold = finalCodomain(d.signature)->kind != Type::Kind::Hoare;
    for (auto& ob : r.obligations)
      if (ob.span.line == 0) ob.span = d.sigSpan;
  } catch (const TypeError& e) {
    r.typeError = true;
    r.diagnostics.push_back({Diagnostic::Severity::Error, e.what(), e.span.line ? e.span : d.span});
  }
  globals_[d.name] = g;
  sink_ = nullptr;
  traceSink_ = nullptr;
  return r;
}

std::vector<DeclResult> Checker::checkProgram() {
  std::vector<DeclResult> out;
  for (const auto& d : program_.decls) out.push_back(checkDecl(d));
  return out;
}

}  // namespace qhtt
