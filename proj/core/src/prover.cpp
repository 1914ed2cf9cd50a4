#include "qhtt/prover.hpp"

#include <algorithm>

#include "qhtt/pretty.hpp"

namespace qhtt {

const char* toString(Verdict::Kind k) {
  switch (k) {
    case Verdict::Kind::Proved: return "proved";
    case Verdict::Kind::Refuted: return "refuted";
    case Verdict::Kind::Unknown: return "unknown";
  }
  return "";
}

const char* toString(Obligation::Kind k) {
  switch (k) {
    case Obligation::Kind::Allocation: return "allocationVC";
    case Obligation::Kind::Postcondition: return "postconditionVC";
    case Obligation::Kind::CallPre: return "callPreVC";
    case Obligation::Kind::Unitarity: return "unitarityVC";
  }
  return "";
}

std::string Countermodel::describe() const {
  std::string s;
  for (const auto& c : world.heap.cells) {
    if (!s.empty()) s += ", ";
    s += pretty(*cellAssertion(c));
  }
  if (world.rest) s += s.empty() ? "other cells" : ", other cells";
  if (s.empty()) s = "emp";
  for (const auto& [n, v] : world.env)
    if (v.kind == Value::Kind::Bool) s += "; " + n + " = " + (v.b ? "true" : "false");
  return s;
}

HeapPtr normalizeHeapExpr(const HeapPtr& h) {
  std::vector<std::pair<std::string, const HeapExpr*>> updates;
  const HeapExpr* cur = h.get();
  while (cur->kind == HeapExpr::Kind::Upd) {
    std::string key = pretty(*cur->loc);
    bool shadowed = std::any_of(updates.begin(), updates.end(),
                                [&](const auto& u) { return u.first == key; });
    if (!shadowed) updates.emplace_back(key, cur);
    cur = cur->base.get();
  }
  std::sort(updates.begin(), updates.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  HeapPtr out;
  if (cur->kind == HeapExpr::Kind::Empty) out = mk::hempty();
  else out = mk::hvar(cur->name);
  for (const auto& [key, u] : updates) out = mk::upd(out, u->loc, u->value);
  return out;
}

std::optional<StateExpr> selectUpdate(const HeapPtr& h, const IntroPtr& loc) {
  for (const HeapExpr* cur = h.get(); cur->kind == HeapExpr::Kind::Upd; cur = cur->base.get())
    if (equal(*cur->loc, *loc)) return cur->value;
  return std::nullopt;
}

namespace {

constexpr std::size_t kEnumerationCap = 1u << 18;

Verdict unknown(const Obligation& ob, std::string reason) {
  Verdict v;
  v.kind = Verdict::Kind::Unknown;
  v.residual = ob.conclusion;
  v.reason = std::move(reason);
  return v;
}

Verdict checkWitness(const Obligation& ob) {
  bool sawUnknown = false;
  for (const auto& w : ob.witness) {
    std::vector<std::pair<Name, bool>> vars(w.freeBools.begin(), w.freeBools.end());
    if (vars.size() > 16) {
      sawUnknown = true;
      continue;
    }
    for (std::size_t m = 0; m < (std::size_t{1} << vars.size()); ++m) {
      World v = w;
      bool exactVars = true;
      for (std::size_t i = 0; i < vars.size(); ++i) {
        v.env[vars[i].first] = Value::boolean((m >> i) & 1);
        v.freeBools.erase(vars[i].first);
        exactVars &= vars[i].second;
      }
      bool excluded = false;
      for (const auto& f : w.facts) excluded |= evaluate(f, v) == Tri::False;
      if (excluded) continue;
      Tri r = satisfies(ob.conclusion, v);
      if (r == Tri::True) continue;
      if (r == Tri::False && w.exact && exactVars) {
        Verdict out;
        out.kind = Verdict::Kind::Refuted;
        out.countermodel = Countermodel{v};
        out.reason = "conclusion fails in a reachable state";
        return out;
      }
      sawUnknown = true;
    }
  }
  if (sawUnknown) return unknown(ob, "conclusion not decided on an over-approximated state");
  Verdict out;
  out.kind = Verdict::Kind::Proved;
  return out;
}

void collectLocations(const Assertion& p, NameSet& locs);

void collectLocTerm(const IntroPtr& t, NameSet& locs) {
  if (!t) return;
  if (t->kind == Intro::Kind::FromElim && t->elim->kind == Elim::Kind::Var) locs.insert(t->elim->name);
  if (t->kind == Intro::Kind::Pair) {
    collectLocTerm(t->a, locs);
    collectLocTerm(t->b, locs);
  }
}

void collectHeapLocs(const HeapExpr& h, NameSet& locs) {
  if (h.kind != HeapExpr::Kind::Upd) return;
  collectLocTerm(h.loc, locs);
  collectHeapLocs(*h.base, locs);
}

void collectLocations(const Assertion& p, NameSet& locs) {
  using K = Assertion::Kind;
  switch (p.kind) {
    case K::PointsTo: case K::Lookup: case K::MemberOf: case K::Entangled:
      collectLocTerm(p.loc, locs);
      break;
    case K::InDom:
      collectLocTerm(p.loc, locs);
      collectHeapLocs(*p.heapL, locs);
      break;
    case K::HeapId:
      collectHeapLocs(*p.heapL, locs);
      collectHeapLocs(*p.heapR, locs);
      break;
    case K::Id:
      if (p.left.state && p.right.term) collectLocTerm(p.right.term, locs);
      if (p.right.state && p.left.term) collectLocTerm(p.left.term, locs);
      break;
    default: break;
  }
  if (p.a) collectLocations(*p.a, locs);
  if (p.b) collectLocations(*p.b, locs);
  for (const auto& i : p.items) collectLocations(*i, locs);
}

Verdict bruteForce(const Obligation& ob) {
  NameSet names;
  for (const auto& h : ob.hypotheses) {
    auto f = freeVars(*h);
    names.insert(f.begin(), f.end());
  }
  auto fc = freeVars(*ob.conclusion);
  names.insert(fc.begin(), fc.end());
  NameSet locs;
  for (const auto& h : ob.hypotheses) collectLocations(*h, locs);
  collectLocations(*ob.conclusion, locs);

  std::vector<Name> qubits, bools, ghosts;
  for (const auto& n : names) {
    auto it = std::find_if(ob.varCtx.begin(), ob.varCtx.end(), [&](const auto& b) { return b.name == n; });
    if (it != ob.varCtx.end()) {
      switch (it->type->kind) {
        case Type::Kind::Qbit: qubits.push_back(n); break;
        case Type::Kind::Bool: bools.push_back(n); break;
        case Type::Kind::Pure: ghosts.push_back(n); break;
        default: return unknown(ob, "variable " + n + " has a type outside the decidable fragment");
      }
    } else if (locs.count(n)) {
      qubits.push_back(n);
    } else {
      return unknown(ob, "cannot classify free name " + n);
    }
  }

  std::vector<SymState> options;
  for (auto k : {StateExpr::Kind::Ket0, StateExpr::Kind::Ket1, StateExpr::Kind::KetPlus, StateExpr::Kind::KetMinus})
    options.push_back(SymState::concrete(linalg::ketVector(k)));
  for (const auto& g : ghosts) options.push_back(SymState::opaque(g));
  std::size_t perLoc = options.size() + 1;  // + absent

  std::size_t total = 2 << bools.size();
  for (std::size_t i = 0; i < qubits.size(); ++i) {
    total *= perLoc;
    if (total > kEnumerationCap) return unknown(ob, "model space too large");
  }

  AssertPtr hyp = conjoin(ob.hypotheses);
  bool sawUnknown = false;
  std::vector<std::size_t> choice(qubits.size(), 0);
  for (std::size_t rest = 0; rest < 2; ++rest) {
    for (std::size_t bm = 0; bm < (std::size_t{1} << bools.size()); ++bm) {
      std::fill(choice.begin(), choice.end(), 0);
      while (true) {
        World w;
        w.rest = rest;
        for (std::size_t i = 0; i < bools.size(); ++i) w.env[bools[i]] = Value::boolean((bm >> i) & 1);
        for (std::size_t i = 0; i < qubits.size(); ++i) {
          w.env[qubits[i]] = Value::qubit(qubits[i]);
          if (choice[i] > 0) w.heap.cells.push_back(Cell{{qubits[i]}, options[choice[i] - 1]});
        }
        Tri h = satisfies(hyp, w);
        if (h != Tri::False) {
          Tri c = satisfies(ob.conclusion, w);
          if (h == Tri::True && c == Tri::False) {
            Verdict out;
            out.kind = Verdict::Kind::Refuted;
            out.countermodel = Countermodel{w};
            out.reason = "countermodel found";
            return out;
          }
          if (c != Tri::True) sawUnknown = true;
        }
        std::size_t i = 0;
        for (; i < choice.size(); ++i) {
          if (++choice[i] < perLoc) break;
          choice[i] = 0;
        }
        if (i == choice.size()) break;
      }
    }
  }
  if (sawUnknown) return unknown(ob, "sequent not decided in the finite-heap fragment");
  Verdict out;
  out.kind = Verdict::Kind::Proved;
  return out;
}

}  // namespace

Verdict entails(const Obligation& ob) {
  if (ob.preset) return *ob.preset;
  if (ob.witnessed) return checkWitness(ob);
  return bruteForce(ob);
}

std::string DischargeReport::status() const {
  if (refuted > 0) return "refuted";
  if (unknown > 0) return "conditional";
  return "verified";
}

DischargeReport dischargeAll(const std::vector<Obligation>& obs) {
  DischargeReport r;
  for (const auto& ob : obs) {
    Verdict v = entails(ob);
    switch (v.kind) {
      case Verdict::Kind::Proved: ++r.proved; break;
      case Verdict::Kind::Refuted: ++r.refuted; break;
      case Verdict::Kind::Unknown: ++r.unknown; break;
    }
    r.verdicts.push_back(std::move(v));
  }
  return r;
}

}  // namespace qhtt
