#include <algorithm>

#include "qhtt/pretty.hpp"
#include "qhtt/typechecker.hpp"

namespace qhtt {

namespace {

bool sameSpan(const Span& a, const Span& b) {
  return a.line == b.line && a.col == b.col && a.length == b.length && a.endLine == b.endLine;
}

bool isVarNamed(const IntroPtr& m, const Name& n) {
  return m->kind == Intro::Kind::FromElim && m->elim->kind == Elim::Kind::Var && m->elim->name == n;
}

std::optional<Name> varName(const IntroPtr& m) {
  if (m && m->kind == Intro::Kind::FromElim && m->elim->kind == Elim::Kind::Var) return m->elim->name;
  return std::nullopt;
}

using Env = std::map<Name, IntroPtr>;

bool isPure(const Assertion& p, const NameSet& bools) {
  using K = Assertion::Kind;
  switch (p.kind) {
    case K::Top: case K::Bot: return true;
    case K::And: case K::Or: case K::Implies: return isPure(*p.a, bools) && isPure(*p.b, bools);
    case K::Not: return isPure(*p.a, bools);
    case K::Id: {
      if (!p.left.term || !p.right.term) return false;
      NameSet fv = freeVars(*p.left.term);
      auto r = freeVars(*p.right.term);
      fv.insert(r.begin(), r.end());
      return std::all_of(fv.begin(), fv.end(), [&](const Name& n) { return bools.count(n) > 0; });
    }
    default: return false;
  }
}

void bindNames(const PatternPtr& p, const IntroPtr& v, Env& env) {
  if (p->name) {
    env[*p->name] = v;
    return;
  }
  if (v->kind == Intro::Kind::Pair) {
    bindNames(p->left, v->a, env);
    bindNames(p->right, v->b, env);
  }
}

void bindTypes(const PatternPtr& p, const TypePtr& t, VarContext& ctx, Span s) {
  if (p->name) {
    ctx.push_back({*p->name, t});
    return;
  }
  if (t->kind != Type::Kind::Tensor)
    throw TypeError("pattern " + pretty(*p) + " does not match type " + pretty(*t), s);
  bindTypes(p->left, t->left, ctx, s);
  bindTypes(p->right, t->right, ctx, s);
}

Verdict presetVerdict(Verdict::Kind k, std::string reason) {
  Verdict v;
  v.kind = k;
  v.reason = std::move(reason);
  return v;
}

}  // namespace

struct Checker::Exec {
  struct Branch {
    SymbolicHeap heap;
    Env env;
    std::map<Name, bool> freeBools;
    std::vector<AssertPtr> facts;
    std::map<Name, SymState> ghosts;
    bool exact = true;
    std::vector<std::pair<Span, HeapDelta>> deltas;
    IntroPtr result;
  };
  using Branches = std::vector<Branch>;

  Checker& ck;
  VarContext ctx;
  HeapContext heapCtx;
  AssertPtr pre;
  std::vector<Obligation> obligations;
  std::vector<Span> steps;
  NameSet taken;
  int depth = 0;
  Span top;
  bool collapsed = false;

  Exec(Checker& c, VarContext vc) : ck(c), ctx(std::move(vc)) {
    for (const auto& b : ctx) taken.insert(b.name);
  }

  Name fresh(const Name& base) {
    NameSet avoid = taken;
    for (const auto& b : ctx) avoid.insert(b.name);
    for (const auto& b : Checker::builtins()) avoid.insert(b.name);
    for (const auto& [n, g] : ck.globals_) avoid.insert(n);
    Name n = freshAway(base.empty() || isMachineName(base) ? "v" : base, avoid);
    taken.insert(n);
    return n;
  }

  World worldOf(const Branch& b, const NameSet* only = nullptr) const {
    World w;
    if (!only) {
      w.heap = b.heap;
    } else {
      for (const auto& c : b.heap.cells)
        if (std::any_of(c.qubits.begin(), c.qubits.end(), [&](const Name& q) { return only->count(q) > 0; }))
          w.heap.cells.push_back(c);
    }
    w.ghosts = b.ghosts;
    w.freeBools = b.freeBools;
    w.facts = b.facts;
    w.exact = b.exact;
    return w;
  }

  AssertPtr chain(const Branch& b) const {
    std::vector<HeapDelta> ds;
    for (const auto& d : b.deltas) ds.push_back(d.second);
    AssertPtr p = renderAssertion(ds, pre);
    for (const auto& n : freeVars(*p))
      if (isMachineName(n) && n != kCurrentHeap)
        p = mk::existsVar(n, b.heap.allocated(n) ? mk::qbit() : mk::boolean(), p);
    return p;
  }

  AssertPtr hypothesis(const Branches& bs) const {
    std::vector<AssertPtr> alts;
    std::set<std::string> seen;
    for (const auto& b : bs) {
      AssertPtr c = chain(b);
      if (seen.insert(pretty(*c)).second) alts.push_back(c);
    }
    if (alts.empty()) return mk::bot();
    AssertPtr out = alts.back();
    for (std::size_t i = alts.size() - 1; i-- > 0;) out = mk::disj(alts[i], out);
    return out;
  }

  Obligation obligation(Obligation::Kind k, AssertPtr conclusion, Span span, const Branches& bs) {
    Obligation ob;
    ob.kind = k;
    ob.decl = ck.currentDecl_;
    ob.varCtx = ctx;
    ob.heapCtx = heapCtx;
    ob.hypotheses = {hypothesis(bs)};
    ob.conclusion = std::move(conclusion);
    ob.span = span;
    ob.witnessed = true;
    for (const auto& b : bs) ob.witness.push_back(worldOf(b));
    return ob;
  }

  void record(Branch& b, HeapDelta d) { b.deltas.emplace_back(top, std::move(d)); }

  // Splits b on the free booleans occurring in m (after substitution).
  Branches split(Branch b, const IntroPtr& m) {
    Branches out{std::move(b)};
    for (const auto& n : freeVars(*m)) {
      Branches next;
      for (auto& cur : out) {
        auto it = cur.freeBools.find(n);
        if (it == cur.freeBools.end()) {
          next.push_back(std::move(cur));
          continue;
        }
        bool exactVar = it->second;
        for (bool v : {false, true}) {
          Branch c = cur;
          c.freeBools.erase(n);
          IntroPtr lit = mk::boolean(v);
          for (auto& [k, val] : c.env) val = subst(val, n, lit);
          for (auto& f : c.facts) f = subst(f, n, lit);
          c.exact = c.exact && exactVar;
          World w = worldOf(c);
          bool excluded = false;
          for (const auto& f : c.facts) excluded |= evaluate(f, w) == Tri::False;
          if (!excluded) next.push_back(std::move(c));
        }
      }
      out = std::move(next);
    }
    return out;
  }

  void cap(Branches& bs) {
    if (bs.size() <= ck.opts_.branchCap) return;
    Branch b = bs.front();
    for (auto& c : b.heap.cells) c.state = SymState::unknown();
    b.exact = false;
    if (!collapsed) {
      Obligation ob = obligation(Obligation::Kind::Postcondition, mk::top(), top, {});
      ob.witnessed = false;
      ob.preset = presetVerdict(Verdict::Kind::Unknown, "too many symbolic branches");
      ob.preset->residual = mk::top();
      ob.note = "branch limit exceeded; states abstracted";
      obligations.push_back(std::move(ob));
      collapsed = true;
    }
    bs = {std::move(b)};
  }

  // --- commands ------------------------------------------------------------

  Branches mkQbit(const Name& x, const IntroPtr& init, Branches bs) {
    IntroPtr canon = ck.check(ctx, init, mk::boolean());
    Name loc = fresh(x);
    Branches out;
    for (auto& b : bs) {
      IntroPtr t = substAll(canon, b.env);
      for (auto& c : split(std::move(b), t)) {
        IntroPtr v = ck.reduce(substAll(canon, c.env));
        if (v->kind != Intro::Kind::True && v->kind != Intro::Kind::False) {
          for (bool bit : {false, true}) {
            Branch d = c;
            auto [h, delta] = spInit(d.heap, bit, loc);
            d.heap = std::move(h);
            d.exact = false;
            record(d, std::move(delta));
            d.env[x] = mk::v(loc);
            out.push_back(std::move(d));
          }
          continue;
        }
        auto [h, delta] = spInit(c.heap, v->kind == Intro::Kind::True, loc);
        c.heap = std::move(h);
        record(c, std::move(delta));
        c.env[x] = mk::v(loc);
        out.push_back(std::move(c));
      }
    }
    ctx.push_back({x, mk::qbit()});
    return out;
  }

  void allocationObligations(const IntroPtr& canon, const Branches& bs, Span span) {
    std::map<std::string, std::pair<IntroPtr, Branches>> groups;
    for (const auto& b : bs) {
      IntroPtr loc = substAll(canon, b.env);
      auto& g = groups[pretty(*loc)];
      g.first = loc;
      g.second.push_back(b);
    }
    if (groups.empty()) {
      obligations.push_back(obligation(Obligation::Kind::Allocation, mk::lookup(canon, mk::wildcard()), span, {}));
      return;
    }
    for (auto& [key, g] : groups)
      obligations.push_back(
          obligation(Obligation::Kind::Allocation, mk::lookup(g.first, mk::wildcard()), span, g.second));
  }

  Branches measQbit(const Name& x, const IntroPtr& arg, Branches bs, Span span) {
    IntroPtr canon = ck.check(ctx, arg, mk::qbit());
    allocationObligations(canon, bs, span);
    Branches out;
    for (auto& b : bs) {
      auto loc = varName(substAll(canon, b.env));
      std::vector<MeasureBranch> mbs;
      if (loc) mbs = spMeasure(b.heap, *loc, ck.opts_.refineMeasurement);
      if (mbs.empty()) {
        Name r = fresh(x);
        b.freeBools[r] = false;
        b.exact = false;
        b.env[x] = mk::v(r);
        out.push_back(std::move(b));
        continue;
      }
      for (auto& mb : mbs) {
        Branch c = b;
        c.heap = std::move(mb.heap);
        c.exact = c.exact && mb.exact;
        record(c, std::move(mb.delta));
        if (mb.outcome) {
          c.env[x] = mk::boolean(*mb.outcome);
        } else {
          Name r = fresh(x);
          c.freeBools[r] = false;
          c.env[x] = mk::v(r);
        }
        out.push_back(std::move(c));
      }
    }
    ctx.push_back({x, mk::boolean()});
    return out;
  }

  Branches applyU(const Name& x, const IntroPtr& arg, Branches bs, Span span) {
    IntroPtr canon = ck.check(ctx, arg, mk::unitary());
    Branches out;
    bool reportedUnitarity = false, reportedResidual = false, reportedUnknown = false;
    for (auto& b : bs) {
      IntroPtr t0 = substAll(canon, b.env);
      for (auto& c : split(std::move(b), t0)) {
        IntroPtr t = ck.reduce(substAll(canon, c.env));
        UnitaryEval u = evalUnitary(t);
        if (!u.ok()) {
          if (u.error.find("own control") != std::string::npos) throw TypeError(u.error, span);
          if (!reportedUnknown) {
            Obligation ob = obligation(Obligation::Kind::Unitarity, mk::top(), span, {c});
            ob.witnessed = false;
            ob.preset = presetVerdict(Verdict::Kind::Unknown, u.error);
            ob.preset->residual = mk::top();
            ob.note = u.error;
            obligations.push_back(std::move(ob));
            reportedUnknown = true;
          }
          HeapDelta d;
          d.consumed = c.heap.cells;
          for (auto& cell : c.heap.cells) cell.state = SymState::unknown();
          d.produced = c.heap.cells;
          record(c, std::move(d));
          c.env[x] = mk::unitVal();
          out.push_back(std::move(c));
          continue;
        }
        if (!u.nonUnitary.empty() && !reportedUnitarity) {
          Obligation ob = obligation(Obligation::Kind::Unitarity, mk::top(), span, {c});
          ob.witnessed = false;
          std::string mat;
          for (const auto& z : u.nonUnitary.front()) mat += (mat.empty() ? "" : ", ") + formatComplex(z);
          ob.preset = presetVerdict(Verdict::Kind::Refuted, "rot matrix [" + mat + "] is not unitary");
          ob.preset->countermodel = Countermodel{worldOf(c)};
          ob.note = ob.preset->reason;
          obligations.push_back(std::move(ob));
          reportedUnitarity = true;
        }
        ApplyResult r = spApplyU(c.heap, *u.expr);
        for (const auto& q : r.unallocated)
          obligations.push_back(obligation(Obligation::Kind::Allocation, mk::lookup(mk::v(q), mk::wildcard()),
                                           span, {c}));
        if (r.residual && !reportedResidual) {
          Obligation ob = obligation(Obligation::Kind::Unitarity, mk::top(), span, {c});
          ob.witnessed = false;
          ob.preset = presetVerdict(Verdict::Kind::Unknown, "unitary applied to a state that is not concrete");
          ob.preset->residual = renderDelta(r.delta);
          ob.note = describe(*u.expr);
          obligations.push_back(std::move(ob));
          reportedResidual = true;
        }
        if (r.unallocated.empty()) {
          c.heap = std::move(r.heap);
          if (!r.delta.consumed.empty()) record(c, std::move(r.delta));
        }
        c.env[x] = mk::unitVal();
        out.push_back(std::move(c));
      }
    }
    ctx.push_back({x, mk::unit()});
    return out;
  }

  // Runs a branch of an if-command.
  std::pair<Branches, TypePtr> branchTerm(const IntroPtr& m, Branches bs) {
    if (m->kind == Intro::Kind::Do) {
      std::size_t saved = ctx.size();
      ++depth;
      auto r = run(m->body, std::move(bs), nullptr);
      --depth;
      ctx.resize(saved);
      return r;
    }
    if (m->kind == Intro::Kind::FromElim) {
      SynthResult s = ck.synth(ctx, m->elim);
      if (s.type->kind == Type::Kind::Hoare) {
        std::size_t saved = ctx.size();
        Name tmp = fresh("%if");
        auto r = call(mk::pat(tmp), m->elim, s, std::move(bs), m->elim->span);
        ctx.resize(saved);
        for (auto& b : r.first) b.result = b.env[tmp];
        return r;
      }
    }
    TypePtr t = ck.synthIntro(ctx, m);
    IntroPtr canon = ck.normalize(m, t, ctx);
    for (auto& b : bs) b.result = substAll(canon, b.env);
    return {std::move(bs), t};
  }

  Branches ifCmd(const Name& x, const Command& c, Branches bs, Span span) {
    IntroPtr canon = ck.check(ctx, c.a, mk::boolean());
    Branches yes, no;
    for (auto& b : bs) {
      IntroPtr t0 = substAll(canon, b.env);
      for (auto& d : split(std::move(b), t0)) {
        IntroPtr v = ck.reduce(substAll(canon, d.env));
        if (v->kind == Intro::Kind::True) {
          yes.push_back(std::move(d));
        } else if (v->kind == Intro::Kind::False) {
          no.push_back(std::move(d));
        } else {
          d.exact = false;
          yes.push_back(d);
          no.push_back(std::move(d));
        }
      }
    }
    auto [outYes, tYes] = branchTerm(c.b, std::move(yes));
    auto [outNo, tNo] = branchTerm(c.c, std::move(no));
    if (!typeEqual(tYes, tNo))
      throw TypeError("branches of if have different types " + pretty(*tYes) + " and " + pretty(*tNo), span);
    for (auto& b : outNo) outYes.push_back(std::move(b));
    for (auto& b : outYes) b.env[x] = b.result;
    ctx.push_back({x, tYes});
    return outYes;
  }

  // --- calls -----------------------------------------------------------------

  IntroPtr valueTree(const TypePtr& t, const PatternPtr& hint, std::vector<Name>& qubits, std::vector<Name>& bools) {
    Name base = hint && hint->name ? *hint->name : "";
    switch (t->kind) {
      case Type::Kind::Unit: return mk::unitVal();
      case Type::Kind::Tensor: {
        bool pairHint = hint && !hint->name;
        return mk::pair(valueTree(t->left, pairHint ? hint->left : nullptr, qubits, bools),
                        valueTree(t->right, pairHint ? hint->right : nullptr, qubits, bools));
      }
      case Type::Kind::Qbit: {
        Name n = fresh(base.empty() ? "q" : base);
        qubits.push_back(n);
        return mk::v(n);
      }
      case Type::Kind::Bool: {
        Name n = fresh(base.empty() ? "b" : base);
        bools.push_back(n);
        return mk::v(n);
      }
      default: return mk::v(fresh(base.empty() ? "v" : base));
    }
  }

  std::pair<Branches, TypePtr> call(const PatternPtr& pat, const ElimPtr& src, const SynthResult& s, Branches bs,
                                    Span span) {
    const TypePtr& callee = s.type;
    std::vector<Name> rq, rb;
    IntroPtr value = valueTree(callee->resultType, pat, rq, rb);
    Env resultEnv;
    bindNames(callee->result, value, resultEnv);

    struct Prepared {
      Branch b;
      AssertPtr pre, post;
      NameSet footprint;
    };
    std::vector<Prepared> prepared;
    for (auto& b : bs) {
      TypePtr h = substAll(callee, b.env);
      AssertPtr cpre = h->pre, cpost = h->post;
      for (const auto& g : h->varCtx) {
        Name g2 = fresh("%" + g.name);
        cpre = substState(subst(cpre, g.name, mk::v(g2)), g.name, mk::ghost(g2));
        cpost = substState(subst(cpost, g.name, mk::v(g2)), g.name, mk::ghost(g2));
        std::optional<SymState> inst;
        for (const auto& a : conjuncts(cpre)) {
          std::optional<Name> loc;
          if (a->kind == Assertion::Kind::Id) {
            if (a->left.term && a->right.state && a->right.state->kind == StateExpr::Kind::Ghost &&
                a->right.state->ghost == g2)
              loc = varName(a->left.term);
            if (a->right.term && a->left.state && a->left.state->kind == StateExpr::Kind::Ghost &&
                a->left.state->ghost == g2)
              loc = varName(a->right.term);
            if (a->left.term && a->right.term && isVarNamed(a->right.term, g2)) loc = varName(a->left.term);
          }
          if ((a->kind == Assertion::Kind::PointsTo || a->kind == Assertion::Kind::Lookup) &&
              a->state.kind == StateExpr::Kind::Ghost && a->state.ghost == g2)
            loc = varName(a->loc);
          if (!loc) continue;
          const Cell* c = b.heap.cellOf(*loc);
          if (c && c->qubits.size() == 1) inst = c->state;
        }
        if (inst && inst->kind == SymState::Kind::Concrete) {
          StateExpr se = stateExpr(*inst);
          cpre = substState(cpre, g2, se);
          cpost = substState(cpost, g2, se);
        } else if (inst && inst->kind == SymState::Kind::Opaque) {
          cpre = substState(subst(cpre, g2, mk::v(inst->ghost)), g2, mk::ghost(inst->ghost));
          cpost = substState(subst(cpost, g2, mk::v(inst->ghost)), g2, mk::ghost(inst->ghost));
        } else {
          b.ghosts[g2] = SymState::unknown();
        }
      }
      cpost = substAll(cpost, resultEnv);
      NameSet fp;
      std::vector<Name> allocated = b.heap.qubits();
      NameSet fv = freeVars(*cpre);
      auto fvPost = freeVars(*cpost);
      fv.insert(fvPost.begin(), fvPost.end());
      for (const auto& n : fv)
        if (std::find(allocated.begin(), allocated.end(), n) != allocated.end() ||
            std::find(rq.begin(), rq.end(), n) != rq.end())
          fp.insert(n);
      prepared.push_back({std::move(b), cpre, cpost, std::move(fp)});
    }

    std::map<std::string, std::vector<std::size_t>> byPre;
    for (std::size_t i = 0; i < prepared.size(); ++i) byPre[pretty(*prepared[i].pre)].push_back(i);
    for (const auto& [key, idx] : byPre) {
      Branches group;
      for (auto i : idx) group.push_back(prepared[i].b);
      Obligation ob = obligation(Obligation::Kind::CallPre, prepared[idx.front()].pre, span, group);
      ob.witness.clear();
      for (auto i : idx) ob.witness.push_back(worldOf(prepared[i].b, &prepared[i].footprint));
      ob.note = "precondition of " + pretty(*src);
      obligations.push_back(std::move(ob));
    }
    if (prepared.empty())
      obligations.push_back(obligation(Obligation::Kind::CallPre, callee->pre, span, {}));

    Branches out;
    for (auto& p : prepared) {
      Branch& b = p.b;
      HeapDelta d;
      d.kind = HeapDelta::Kind::Call;
      std::vector<Cell> kept;
      for (const auto& c : b.heap.cells) {
        std::vector<Name> rest;
        bool touched = false;
        for (const auto& q : c.qubits) {
          if (p.footprint.count(q)) touched = true;
          else rest.push_back(q);
        }
        if (!touched) {
          kept.push_back(c);
          continue;
        }
        d.consumed.push_back(c);
        if (!rest.empty()) {
          kept.push_back(Cell{rest, SymState::unknown()});
          d.produced.push_back(kept.back());
        }
      }
      std::vector<Name> postQubits;
      NameSet fvPost = freeVars(*p.post);
      for (const auto& q : b.heap.qubits())
        if (p.footprint.count(q) && fvPost.count(q)) postQubits.push_back(q);
      for (const auto& q : rq)
        if (std::find(postQubits.begin(), postQubits.end(), q) == postQubits.end()) postQubits.push_back(q);
      NameSet ghostNames;
      for (const auto& [g, st] : b.ghosts) ghostNames.insert(g);
      auto alts = abstractCells(p.post, postQubits, ghostNames);
      if (alts.empty()) alts.push_back({});
      NameSet boolNames(rb.begin(), rb.end());
      for (const auto& [n, e] : b.freeBools) boolNames.insert(n);
      std::vector<AssertPtr> facts;
      for (const auto& a : conjuncts(p.post))
        if (isPure(*a, boolNames)) facts.push_back(a);
      for (auto& alt : alts) {
        Branch c = b;
        c.heap.cells = kept;
        HeapDelta dd = d;
        for (auto& cell : alt) {
          c.heap.cells.push_back(cell);
          dd.produced.push_back(cell);
        }
        for (const auto& n : rb) c.freeBools[n] = false;
        c.facts.insert(c.facts.end(), facts.begin(), facts.end());
        c.exact = false;
        record(c, std::move(dd));
        bindNames(pat, value, c.env);
        out.push_back(std::move(c));
      }
    }
    bindTypes(pat, callee->resultType, ctx, span);
    return {std::move(out), callee->resultType};
  }

  // --- computations ----------------------------------------------------------

  std::pair<Branches, TypePtr> run(const CompPtr& e, Branches bs, const TypePtr& expected) {
    for (CompPtr c = e; c; c = c->rest) {
      if (depth == 0) {
        top = c->span;
        if (steps.empty() || !sameSpan(steps.back(), top)) steps.push_back(top);
      }
      switch (c->kind) {
        case Comp::Kind::Return: {
          TypePtr t;
          IntroPtr canon;
          if (expected && depth == 0) {
            canon = ck.check(ctx, c->value, expected);
            t = expected;
          } else {
            t = ck.synthIntro(ctx, c->value);
            canon = ck.normalize(c->value, t, ctx);
          }
          for (auto& b : bs) b.result = substAll(canon, b.env);
          return {std::move(bs), t};
        }
        case Comp::Kind::LetEq: {
          ck.wellFormed(ctx, c->annType, c->span);
          IntroPtr canon = ck.check(ctx, c->value, c->annType);
          for (auto& b : bs) b.env[*c->binder->name] = substAll(canon, b.env);
          ctx.push_back({*c->binder->name, c->annType});
          break;
        }
        case Comp::Kind::BindCmd: {
          const Name& x = *c->binder->name;
          const Command& cmd = *c->command;
          switch (cmd.kind) {
            case Command::Kind::MkQbit: bs = mkQbit(x, cmd.a, std::move(bs)); break;
            case Command::Kind::MeasQbit: bs = measQbit(x, cmd.a, std::move(bs), c->span); break;
            case Command::Kind::ApplyU: bs = applyU(x, cmd.a, std::move(bs), c->span); break;
            case Command::Kind::If: bs = ifCmd(x, cmd, std::move(bs), c->span); break;
          }
          break;
        }
        case Comp::Kind::BindRun: {
          SynthResult s = ck.synth(ctx, c->source);
          if (s.type->kind != Type::Kind::Hoare)
            throw TypeError("'" + pretty(*c->source) + "' has type " + pretty(*s.type) +
                                ", which is not a computation type",
                            c->span);
          bs = call(c->binder, c->source, s, std::move(bs), c->span).first;
          break;
        }
      }
      cap(bs);
    }
    throw TypeError("computation does not end in a return", e ? e->span : Span{});
  }

  Branches initial(const AssertPtr& p, const VarContext& params, const VarContext& logical) {
    NameSet fv = freeVars(*p);
    std::vector<Name> qubits;
    NameSet ghostNames;
    for (const auto& b : logical) ghostNames.insert(b.name);
    for (const auto& b : params)
      if (b.type->kind == Type::Kind::Qbit && fv.count(b.name)) qubits.push_back(b.name);
    auto alts = abstractCells(p, qubits, ghostNames);
    if (alts.empty()) alts.push_back({});
    NameSet bools;
    for (const auto& b : params)
      if (b.type->kind == Type::Kind::Bool) bools.insert(b.name);
    Branches out;
    for (auto& alt : alts) {
      Branch b;
      b.heap.cells = alt;
      for (const auto& n : bools) b.freeBools[n] = true;
      for (const auto& g : logical) b.ghosts[g.name] = SymState::opaque(g.name);
      for (const auto& a : conjuncts(p))
        if (isPure(*a, bools)) b.facts.push_back(a);
      for (const auto& v : params) b.env[v.name] = mk::v(v.name);
      out.push_back(std::move(b));
    }
    return out;
  }

  std::vector<TraceStep> trace(const Branches& bs) const {
    std::vector<TraceStep> out;
    out.push_back({Span{}, pre, false});
    for (std::size_t k = 0; k < steps.size(); ++k) {
      AssertPtr p = mk::named("P" + std::to_string(k));
      bool refined = false;
      if (!bs.empty())
        for (const auto& [s, d] : bs.front().deltas)
          if (sameSpan(s, steps[k])) {
            p = mk::compose(p, renderDelta(d));
            refined |= d.refined;
          }
      out.push_back({steps[k], p, refined});
    }
    return out;
  }
};

CompResult Checker::synthComputation(const VarContext& ctx, const AssertPtr& pre, const CompPtr& e,
                                     const VarContext& ghosts) {
  VarContext full = ctx;
  full.insert(full.end(), ghosts.begin(), ghosts.end());
  Exec ex(*this, full);
  ex.pre = pre;
  auto [bs, type] = ex.run(e, ex.initial(pre, ctx, ghosts), nullptr);
  CompResult r;
  r.resultNames = {"r"};
  r.resultType = type;
  r.strongestPost = ex.hypothesis(bs);
  r.obligations = std::move(ex.obligations);
  r.trace = ex.trace(bs);
  return r;
}

CompResult Checker::checkComputation(const VarContext& ctx, const TypePtr& hoare, const CompPtr& e) {
  VarContext full = ctx;
  full.insert(full.end(), hoare->varCtx.begin(), hoare->varCtx.end());
  Exec ex(*this, full);
  ex.pre = hoare->pre;
  ex.heapCtx = hoare->heapCtx.empty() ? HeapContext{kInitialHeap} : hoare->heapCtx;
  Exec::Branches bs0 = ex.initial(hoare->pre, ctx, hoare->varCtx);
  auto [bs, type] = ex.run(e, std::move(bs0), hoare->resultType);

  CompResult r;
  r.resultNames = {};
  for (const auto& n : patternNames(*hoare->result)) r.resultNames.push_back(n);
  r.resultType = type;
  r.strongestPost = ex.hypothesis(bs);

  Obligation ob;
  ob.kind = Obligation::Kind::Postcondition;
  ob.decl = currentDecl_;
  ob.varCtx = full;
  bindTypes(hoare->result, hoare->resultType, ob.varCtx, e->span);
  ob.heapCtx = ex.heapCtx;
  AssertPtr hyp = r.strongestPost;
  Env resultEnv;
  if (!bs.empty()) bindNames(hoare->result, bs.front().result, resultEnv);
  for (const auto& [n, v] : resultEnv) {
    bool uniform = std::all_of(bs.begin(), bs.end(), [&](const auto& b) {
      Env env;
      bindNames(hoare->result, b.result, env);
      return equalPtr(env[n], v);
    });
    if (uniform) hyp = mk::conj(hyp, mk::id(mk::opTerm(mk::v(n)), mk::opTerm(v)));
  }
  ob.hypotheses = {hyp};
  ob.conclusion = hoare->post;
  ob.span = Span{};
  ob.witnessed = true;
  for (const auto& b : bs) {
    World w = ex.worldOf(b);
    Env env;
    bindNames(hoare->result, b.result, env);
    for (const auto& [n, v] : env) {
      if (auto y = varName(v); y && w.freeBools.count(*y)) {
        if (*y == n) continue;
        if (!w.freeBools.count(n)) {
          w.freeBools[n] = w.freeBools[*y];
          w.freeBools.erase(*y);
          for (auto& f : w.facts) f = subst(f, *y, mk::v(n));
          for (auto& [m, other] : env)
            if (m != n && isVarNamed(other, *y)) other = mk::v(n);
        } else {
          w.facts.push_back(mk::id(mk::opTerm(mk::v(n)), mk::opTerm(mk::v(*y))));
        }
        continue;
      }
      w.env[n] = evalTerm(v, w);
    }
    ob.witness.push_back(std::move(w));
  }
  r.obligations = std::move(ex.obligations);
  r.obligations.push_back(std::move(ob));
  r.trace = ex.trace(bs);
  return r;
}

}  // namespace qhtt
