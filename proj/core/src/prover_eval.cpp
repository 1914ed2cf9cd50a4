#include <algorithm>
#include <cmath>
#include <functional>

#include "qhtt/pretty.hpp"
#include "qhtt/prover.hpp"

namespace qhtt {

Tri triAnd(Tri a, Tri b) {
  if (a == Tri::False || b == Tri::False) return Tri::False;
  if (a == Tri::True && b == Tri::True) return Tri::True;
  return Tri::Unknown;
}

Tri triOr(Tri a, Tri b) {
  if (a == Tri::True || b == Tri::True) return Tri::True;
  if (a == Tri::False && b == Tri::False) return Tri::False;
  return Tri::Unknown;
}

Tri triNot(Tri a) {
  if (a == Tri::Unknown) return a;
  return a == Tri::True ? Tri::False : Tri::True;
}

namespace {
Tri fromBool(bool b) { return b ? Tri::True : Tri::False; }
}  // namespace

Value Value::unit() { Value v; v.kind = Kind::Unit; return v; }
Value Value::boolean(bool b) { Value v; v.kind = Kind::Bool; v.b = b; return v; }
Value Value::qubit(Name q) { Value v; v.kind = Kind::Qubit; v.loc = std::move(q); return v; }
Value Value::pair(Value a, Value b) {
  Value v;
  v.kind = Kind::Pair;
  v.first = std::make_shared<Value>(std::move(a));
  v.second = std::make_shared<Value>(std::move(b));
  return v;
}
Value Value::ofState(SymState s) { Value v; v.kind = Kind::State; v.state = std::move(s); return v; }
Value Value::unknown() { return Value{}; }

Value evalTerm(const IntroPtr& m, const World& w) {
  switch (m->kind) {
    case Intro::Kind::True: return Value::boolean(true);
    case Intro::Kind::False: return Value::boolean(false);
    case Intro::Kind::Unit: return Value::unit();
    case Intro::Kind::Pair: return Value::pair(evalTerm(m->a, w), evalTerm(m->b, w));
    case Intro::Kind::If: {
      Value c = evalTerm(m->a, w);
      if (c.kind != Value::Kind::Bool) return Value::unknown();
      return evalTerm(c.b ? m->b : m->c, w);
    }
    case Intro::Kind::FromElim: {
      if (m->elim->kind != Elim::Kind::Var) return Value::unknown();
      const Name& x = m->elim->name;
      if (auto it = w.ghosts.find(x); it != w.ghosts.end()) return Value::ofState(it->second);
      if (auto it = w.env.find(x); it != w.env.end()) return it->second;
      if (w.freeBools.count(x)) return Value::unknown();
      return Value::qubit(x);
    }
    default: return Value::unknown();
  }
}

namespace {

// Value of a state expression; a wildcard is a State value without a state.
Value stateValue(const StateExpr& s, const World& w) {
  switch (s.kind) {
    case StateExpr::Kind::Wildcard: { Value v; v.kind = Value::Kind::State; return v; }
    case StateExpr::Kind::Unknown: return Value::ofState(SymState::unknown());
    case StateExpr::Kind::Ghost: {
      if (auto it = w.ghosts.find(s.ghost); it != w.ghosts.end()) return Value::ofState(it->second);
      return Value::ofState(SymState::opaque(s.ghost));
    }
    case StateExpr::Kind::Concrete: return Value::ofState(SymState::concrete(s.amplitudes));
    default: return Value::ofState(SymState::concrete(linalg::ketVector(s.kind)));
  }
}

Value operandValue(const Operand& o, const World& w) {
  return o.state ? stateValue(*o.state, w) : evalTerm(o.term, w);
}

bool locNames(const Value& v, std::vector<Name>& out) {
  if (v.kind == Value::Kind::Qubit) {
    out.push_back(v.loc);
    return true;
  }
  if (v.kind == Value::Kind::Pair) return locNames(*v.first, out) && locNames(*v.second, out);
  return false;
}

Tri compareStates(const SymState& a, const SymState& b) {
  using K = SymState::Kind;
  if (a.kind == K::Concrete && b.kind == K::Concrete) {
    if (a.amps.size() != b.amps.size()) return Tri::False;
    return fromBool(linalg::phaseEqual(a.amps, b.amps));
  }
  if (a.kind == K::Opaque && b.kind == K::Opaque && a.ghost == b.ghost) return Tri::True;
  return Tri::Unknown;
}

struct View {
  enum class Kind { Absent, Pure, Mixed, Unknown } kind = Kind::Unknown;
  SymState state;
};

// Joint state of the named qubits.
View jointView(const World& w, const std::vector<Name>& names) {
  View out;
  std::vector<int> cellIdx;
  for (const auto& q : names) {
    int i = w.heap.indexOf(q);
    if (i < 0) {
      out.kind = View::Kind::Absent;
      return out;
    }
    cellIdx.push_back(i);
  }
  // distinct names required
  for (std::size_t i = 0; i < names.size(); ++i)
    for (std::size_t j = i + 1; j < names.size(); ++j)
      if (names[i] == names[j]) return out;

  if (names.size() == 1) {
    const Cell& c = w.heap.cells[cellIdx[0]];
    if (c.qubits.size() == 1 && c.state.kind == SymState::Kind::Opaque) {
      out.kind = View::Kind::Pure;
      out.state = c.state;
      return out;
    }
  }
  // Concrete pieces per cell, multiplied together in names order.
  std::vector<int> groups;
  for (int i : cellIdx)
    if (std::find(groups.begin(), groups.end(), i) == groups.end()) groups.push_back(i);
  std::vector<linalg::Vec> parts;
  std::vector<std::vector<std::size_t>> partPositions;  // positions in `names`
  for (int g : groups) {
    const Cell& c = w.heap.cells[g];
    if (c.state.kind != SymState::Kind::Concrete) return out;
    std::vector<std::size_t> keep, pos;
    for (std::size_t j = 0; j < names.size(); ++j) {
      if (cellIdx[j] != g) continue;
      pos.push_back(j);
      keep.push_back(static_cast<std::size_t>(
          std::find(c.qubits.begin(), c.qubits.end(), names[j]) - c.qubits.begin()));
    }
    linalg::Vec piece;
    if (keep.size() == c.qubits.size()) {
      piece = linalg::permute(c.state.amps, keep);
    } else {
      auto pure = linalg::pureState(linalg::reduced(c.state.amps, c.qubits.size(), keep));
      if (!pure) {
        out.kind = View::Kind::Mixed;
        return out;
      }
      piece = *pure;
    }
    parts.push_back(std::move(piece));
    partPositions.push_back(std::move(pos));
  }
  std::size_t n = names.size();
  linalg::Vec v(std::size_t{1} << n);
  for (std::size_t i = 0; i < v.size(); ++i) {
    Complex amp = 1.0;
    for (std::size_t p = 0; p < parts.size(); ++p) {
      std::size_t sub = 0, m = partPositions[p].size();
      for (std::size_t j = 0; j < m; ++j)
        if ((i >> (n - 1 - partPositions[p][j])) & 1) sub |= std::size_t{1} << (m - 1 - j);
      amp *= parts[p][sub];
    }
    v[i] = amp;
  }
  out.kind = View::Kind::Pure;
  out.state = SymState::concrete(std::move(v));
  return out;
}

// Does the joint state of `names` match `s` (a State value)?
Tri lookupMatches(const World& w, const std::vector<Name>& names, const Value& s) {
  View view = jointView(w, names);
  if (view.kind == View::Kind::Absent) return Tri::False;
  if (!s.state) return Tri::True;
  if (view.kind == View::Kind::Mixed) return Tri::False;
  if (view.kind == View::Kind::Unknown) return Tri::Unknown;
  return compareStates(view.state, *s.state);
}

Tri idValues(const Value& a, const Value& b, const World& w) {
  using K = Value::Kind;
  if (a.kind == K::Unknown || b.kind == K::Unknown) return Tri::Unknown;
  if (a.kind == K::Bool && b.kind == K::Bool) return fromBool(a.b == b.b);
  if (a.kind == K::Unit && b.kind == K::Unit) return Tri::True;
  if (a.kind == K::State && b.kind != K::State) return idValues(b, a, w);
  std::vector<Name> la, lb;
  bool isLocA = locNames(a, la), isLocB = locNames(b, lb);
  if (isLocA && b.kind == K::State) return lookupMatches(w, la, b);
  if (isLocA && isLocB) {
    if (la == lb) {
      Value any;
      any.kind = K::State;
      return lookupMatches(w, la, any);
    }
    View va = jointView(w, la), vb = jointView(w, lb);
    if (va.kind == View::Kind::Absent || vb.kind == View::Kind::Absent) return Tri::False;
    if (va.kind == View::Kind::Mixed || vb.kind == View::Kind::Mixed) return Tri::False;
    if (va.kind == View::Kind::Unknown || vb.kind == View::Kind::Unknown) return Tri::Unknown;
    return compareStates(va.state, vb.state);
  }
  if (a.kind == K::Pair && b.kind == K::Pair)
    return triAnd(idValues(*a.first, *b.first, w), idValues(*a.second, *b.second, w));
  if (a.kind == K::State && b.kind == K::State) {
    if (!a.state || !b.state) return Tri::True;
    return compareStates(*a.state, *b.state);
  }
  return Tri::False;
}

struct Denot {
  bool known = true;
  bool rest = false;
  std::vector<std::pair<std::vector<Name>, SymState>> cells;
};

Denot denote(const HeapExpr& h, const World& w) {
  Denot d;
  switch (h.kind) {
    case HeapExpr::Kind::Empty: return d;
    case HeapExpr::Kind::Var:
      if (h.name != kCurrentHeap) {
        d.known = false;
        return d;
      }
      for (const auto& c : w.heap.cells) d.cells.emplace_back(c.qubits, c.state);
      d.rest = w.rest;
      return d;
    case HeapExpr::Kind::Upd: {
      d = denote(*h.base, w);
      if (!d.known) return d;
      std::vector<Name> names;
      if (!locNames(evalTerm(h.loc, w), names)) {
        d.known = false;
        return d;
      }
      for (auto it = d.cells.begin(); it != d.cells.end();) {
        bool overlap = false;
        for (const auto& q : it->first)
          overlap |= std::find(names.begin(), names.end(), q) != names.end();
        if (!overlap) {
          ++it;
          continue;
        }
        if (it->first.size() > names.size()) {
          d.known = false;
          return d;
        }
        it = d.cells.erase(it);
      }
      Value v = stateValue(h.value, w);
      d.cells.emplace_back(names, v.state ? *v.state : SymState::unknown());
      return d;
    }
  }
  return d;
}

Tri heapEqual(const HeapExpr& l, const HeapExpr& r, const World& w) {
  if (equal(l, r)) return Tri::True;
  Denot a = denote(l, w), b = denote(r, w);
  if (!a.known || !b.known) return Tri::Unknown;
  if (a.rest != b.rest) return Tri::False;
  auto sortedNames = [](const Denot& d) {
    std::vector<Name> all;
    for (const auto& [qs, s] : d.cells) all.insert(all.end(), qs.begin(), qs.end());
    std::sort(all.begin(), all.end());
    return all;
  };
  if (sortedNames(a) != sortedNames(b)) return Tri::False;
  Tri result = a.rest ? Tri::Unknown : Tri::True;
  for (const auto& [qs, s] : a.cells) {
    auto it = std::find_if(b.cells.begin(), b.cells.end(), [&](const auto& c) {
      std::vector<Name> x = c.first, y = qs;
      std::sort(x.begin(), x.end());
      std::sort(y.begin(), y.end());
      return x == y;
    });
    if (it == b.cells.end()) return Tri::Unknown;
    SymState other = it->second;
    if (other.kind == SymState::Kind::Concrete && s.kind == SymState::Kind::Concrete) {
      std::vector<std::size_t> perm;
      for (const auto& q : qs)
        perm.push_back(static_cast<std::size_t>(
            std::find(it->first.begin(), it->first.end(), q) - it->first.begin()));
      other.amps = linalg::permute(other.amps, perm);
    }
    result = triAnd(result, compareStates(s, other));
  }
  return result;
}

Tri inDom(const HeapExpr& h, const IntroPtr& loc, const World& w) {
  Denot d = denote(h, w);
  if (!d.known) return Tri::Unknown;
  std::vector<Name> names;
  if (!locNames(evalTerm(loc, w), names)) return Tri::Unknown;
  for (const auto& q : names) {
    bool found = false;
    for (const auto& [qs, s] : d.cells) found |= std::find(qs.begin(), qs.end(), q) != qs.end();
    if (!found) return Tri::False;
  }
  return Tri::True;
}

Tri quantifyBool(const AssertPtr& p, const World& w, bool exists) {
  Tri acc = exists ? Tri::False : Tri::True;
  for (bool b : {false, true}) {
    World v = w;
    v.env[p->binder] = Value::boolean(b);
    v.freeBools.erase(p->binder);
    v.ghosts.erase(p->binder);
    Tri r = evaluate(p->a, v);
    acc = exists ? triOr(acc, r) : triAnd(acc, r);
  }
  return acc;
}

}  // namespace

Tri evaluate(const AssertPtr& p, const World& w) {
  using K = Assertion::Kind;
  switch (p->kind) {
    case K::Top: return Tri::True;
    case K::Bot: return Tri::False;
    case K::And: return triAnd(evaluate(p->a, w), evaluate(p->b, w));
    case K::Or: return triOr(evaluate(p->a, w), evaluate(p->b, w));
    case K::Implies: return triOr(triNot(evaluate(p->a, w)), evaluate(p->b, w));
    case K::Not: return triNot(evaluate(p->a, w));
    case K::ExistsVar:
    case K::ForallVar:
      if (p->type && p->type->kind == Type::Kind::Bool)
        return quantifyBool(p, w, p->kind == K::ExistsVar);
      return Tri::Unknown;
    case K::Id: return idValues(operandValue(p->left, w), operandValue(p->right, w), w);
    case K::HeapId: return heapEqual(*p->heapL, *p->heapR, w);
    case K::InDom: return inDom(*p->heapL, p->loc, w);
    case K::Emp: return fromBool(w.heap.cells.empty() && !w.rest);
    case K::PointsTo: {
      std::vector<Name> names;
      if (!locNames(evalTerm(p->loc, w), names)) return Tri::Unknown;
      if (w.rest || w.heap.cells.size() != 1) return Tri::False;
      std::vector<Name> a = names, b = w.heap.cells[0].qubits;
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      if (a != b) return Tri::False;
      return lookupMatches(w, names, stateValue(p->state, w));
    }
    case K::Lookup: {
      std::vector<Name> names;
      if (!locNames(evalTerm(p->loc, w), names)) return Tri::Unknown;
      return lookupMatches(w, names, stateValue(p->state, w));
    }
    case K::MemberOf: {
      Tri acc = Tri::False;
      Value loc = evalTerm(p->loc, w);
      for (const auto& c : p->candidates) acc = triOr(acc, idValues(loc, stateValue(c, w), w));
      return acc;
    }
    case K::Entangled: {
      Value v = evalTerm(p->loc, w);
      if (v.kind != Value::Kind::Qubit) return Tri::Unknown;
      const Cell* c = w.heap.cellOf(v.loc);
      if (!c) return Tri::False;
      if (c->state.kind != SymState::Kind::Concrete) return Tri::Unknown;
      if (c->qubits.size() == 1) return Tri::False;
      std::size_t k = static_cast<std::size_t>(
          std::find(c->qubits.begin(), c->qubits.end(), v.loc) - c->qubits.begin());
      double pur = linalg::purity(linalg::reduced(c->state.amps, c->qubits.size(), {k}));
      return fromBool(pur < 1.0 - linalg::kTol);
    }
    default: return Tri::Unknown;
  }
}

namespace {

constexpr std::size_t kDecompositionCap = 4096;

struct Decomposable {
  std::size_t cell;
  std::vector<std::vector<bool>> bases;  // candidate per-qubit bases
};

// Components of a cell's state in a basis, as product vectors.
std::vector<linalg::Vec> components(const SymState& s, const std::vector<bool>& xBasis) {
  std::vector<linalg::Vec> out;
  std::size_t n = xBasis.size(), dim = std::size_t{1} << n;
  auto productVec = [&](uint64_t idx) {
    linalg::Vec e(dim);
    e[idx] = 1.0;
    return linalg::fromBasis(e, xBasis);
  };
  if (s.kind == SymState::Kind::Support) {
    for (auto c : s.components) out.push_back(productVec(c));
    return out;
  }
  linalg::Vec t = linalg::toBasis(s.amps, xBasis);
  for (std::size_t i = 0; i < dim; ++i)
    if (std::abs(t[i]) > linalg::kTol) out.push_back(productVec(i));
  return out;
}

}  // namespace

Tri satisfies(const AssertPtr& p, const World& w) {
  Tri direct = evaluate(p, w);
  if (direct == Tri::True) return direct;

  std::vector<Decomposable> cells;
  std::size_t choices = 1;
  for (std::size_t i = 0; i < w.heap.cells.size(); ++i) {
    const Cell& c = w.heap.cells[i];
    std::size_t n = c.qubits.size();
    if (c.state.kind == SymState::Kind::Support) {
      cells.push_back({i, {c.state.xBasis}});
    } else if (c.state.kind == SymState::Kind::Concrete && n >= 2) {
      Decomposable d{i, {}};
      for (std::size_t m = 0; m < (std::size_t{1} << n); ++m) {
        std::vector<bool> b(n);
        for (std::size_t q = 0; q < n; ++q) b[q] = (m >> q) & 1;
        d.bases.push_back(b);
      }
      choices *= d.bases.size();
      cells.push_back(std::move(d));
    }
  }
  if (cells.empty() || choices > kDecompositionCap) return direct;

  Tri decomposed = Tri::False;
  std::vector<std::size_t> pick(cells.size(), 0);
  while (true) {
    // component lists for this basis choice
    std::vector<std::vector<linalg::Vec>> comps;
    std::size_t worlds = 1;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      comps.push_back(components(w.heap.cells[cells[i].cell].state, cells[i].bases[pick[i]]));
      worlds *= comps.back().size();
    }
    if (worlds > 0 && worlds <= kDecompositionCap) {
      Tri all = Tri::True;
      std::vector<std::size_t> idx(cells.size(), 0);
      while (all != Tri::False) {
        World v = w;
        for (std::size_t i = 0; i < cells.size(); ++i)
          v.heap.cells[cells[i].cell].state = SymState::concrete(comps[i][idx[i]]);
        all = triAnd(all, evaluate(p, v));
        std::size_t i = 0;
        for (; i < cells.size(); ++i) {
          if (++idx[i] < comps[i].size()) break;
          idx[i] = 0;
        }
        if (i == cells.size()) break;
      }
      decomposed = triOr(decomposed, all);
      if (decomposed == Tri::True) break;
    }
    std::size_t i = 0;
    for (; i < cells.size(); ++i) {
      if (++pick[i] < cells[i].bases.size()) break;
      pick[i] = 0;
    }
    if (i == cells.size()) break;
  }
  return triOr(direct, decomposed);
}

// ---------------------------------------------------------------------------
// Abstraction of assertions into cells

namespace {

bool mentionsOnly(const NameSet& names, const NameSet& group) {
  for (const auto& n : names)
    if (!group.count(n)) return false;
  return true;
}

// Literal or ghost state equated with q by an atom, if any.
std::optional<SymState> directState(const Assertion& a, const Name& q, const NameSet& ghosts) {
  using K = Assertion::Kind;
  auto isQ = [&](const IntroPtr& t) {
    return t && t->kind == Intro::Kind::FromElim && t->elim->kind == Elim::Kind::Var &&
           t->elim->name == q;
  };
  auto fromState = [&](const StateExpr& s) -> std::optional<SymState> {
    if (s.isLiteral() && s.qubitCount() == 1) return SymState::concrete(linalg::ketVector(s.kind));
    if (s.kind == StateExpr::Kind::Ghost && ghosts.count(s.ghost)) return SymState::opaque(s.ghost);
    return std::nullopt;
  };
  auto fromOperand = [&](const Operand& o) -> std::optional<SymState> {
    if (o.state) return fromState(*o.state);
    if (o.term && o.term->kind == Intro::Kind::FromElim && o.term->elim->kind == Elim::Kind::Var &&
        ghosts.count(o.term->elim->name))
      return SymState::opaque(o.term->elim->name);
    return std::nullopt;
  };
  switch (a.kind) {
    case K::Id:
      if (a.left.term && isQ(a.left.term)) return fromOperand(a.right);
      if (a.right.term && isQ(a.right.term)) return fromOperand(a.left);
      return std::nullopt;
    case K::PointsTo:
    case K::Lookup:
      if (isQ(a.loc)) return fromState(a.state);
      return std::nullopt;
    default: return std::nullopt;
  }
}

std::vector<SymState> singleAlternatives(const std::vector<AssertPtr>& atoms, const Name& q,
                                         const NameSet& ghosts) {
  for (const auto& a : atoms)
    if (auto s = directState(*a, q, ghosts)) return {*s};
  for (const auto& a : atoms) {
    if (a->kind != Assertion::Kind::MemberOf) continue;
    std::vector<SymState> out;
    bool ok = true;
    for (const auto& c : a->candidates) {
      if (c.isLiteral() && c.qubitCount() == 1) out.push_back(SymState::concrete(linalg::ketVector(c.kind)));
      else if (c.kind == StateExpr::Kind::Ghost && ghosts.count(c.ghost)) out.push_back(SymState::opaque(c.ghost));
      else ok = false;
    }
    if (ok && !out.empty()) return out;
  }
  return {SymState::unknown()};
}

SymState groupState(const std::vector<AssertPtr>& atoms, const std::vector<Name>& group) {
  // an explicit points-to / lookup on the whole tuple
  for (const auto& a : atoms) {
    if (a->kind != Assertion::Kind::PointsTo && a->kind != Assertion::Kind::Lookup) continue;
    if (!a->state.isLiteral() || a->state.qubitCount() != group.size()) continue;
    World w;
    std::vector<Name> names;
    Value v = evalTerm(a->loc, w);
    std::function<bool(const Value&)> flat = [&](const Value& x) {
      if (x.kind == Value::Kind::Qubit) { names.push_back(x.loc); return true; }
      if (x.kind == Value::Kind::Pair) return flat(*x.first) && flat(*x.second);
      return false;
    };
    if (!flat(v)) continue;
    std::vector<Name> a1 = names, b1 = group;
    std::sort(a1.begin(), a1.end());
    std::sort(b1.begin(), b1.end());
    if (a1 != b1) continue;
    std::vector<std::size_t> perm;
    for (const auto& q : group)
      perm.push_back(static_cast<std::size_t>(std::find(names.begin(), names.end(), q) - names.begin()));
    return SymState::concrete(linalg::permute(linalg::ketVector(a->state.kind), perm));
  }
  std::size_t n = group.size();
  if (n > 4) return SymState::unknown();
  AssertPtr conj = conjoin(atoms);
  std::optional<std::vector<bool>> basisSeen;
  std::vector<uint64_t> comps;
  std::size_t total = std::size_t{1} << (2 * n);
  for (std::size_t code = 0; code < total; ++code) {
    World w;
    std::vector<bool> xb(n);
    uint64_t idx = 0;
    for (std::size_t q = 0; q < n; ++q) {
      std::size_t lit = (code >> (2 * q)) & 3;  // 0,1 in Z; 2,3 in X
      xb[q] = lit >= 2;
      bool bit = lit & 1;
      if (bit) idx |= uint64_t{1} << (n - 1 - q);
      linalg::Vec v = linalg::basis(bit);
      if (xb[q]) linalg::applySingle(v, 1, 0, linalg::hadamard());
      w.heap.cells.push_back(Cell{{group[q]}, SymState::concrete(v)});
    }
    if (evaluate(conj, w) != Tri::True) continue;
    if (basisSeen && *basisSeen != xb) return SymState::unknown();
    basisSeen = xb;
    comps.push_back(idx);
  }
  if (!basisSeen) return SymState::unknown();
  return SymState::support(*basisSeen, comps);
}

}  // namespace

std::vector<std::vector<Cell>> abstractCells(const AssertPtr& p, const std::vector<Name>& qubits,
                                             const NameSet& ghosts) {
  std::vector<AssertPtr> atoms = conjuncts(p);
  // union-find over qubit names via atoms mentioning several of them
  std::map<Name, Name> parent;
  for (const auto& q : qubits) parent[q] = q;
  std::function<Name(const Name&)> root = [&](const Name& x) {
    return parent[x] == x ? x : parent[x] = root(parent[x]);
  };
  std::vector<NameSet> mentions;
  for (const auto& a : atoms) {
    NameSet m;
    for (const auto& n : freeVars(*a))
      if (parent.count(n)) m.insert(n);
    for (const auto& n : m) parent[root(n)] = root(*m.begin());
    mentions.push_back(std::move(m));
  }
  std::vector<std::vector<Name>> groups;
  for (const auto& q : qubits) {
    bool placed = false;
    for (auto& g : groups)
      if (root(g[0]) == root(q)) {
        g.push_back(q);
        placed = true;
        break;
      }
    if (!placed) groups.push_back({q});
  }

  std::vector<std::vector<Cell>> alts{{}};
  for (const auto& g : groups) {
    NameSet gs(g.begin(), g.end());
    std::vector<AssertPtr> local;
    for (std::size_t i = 0; i < atoms.size(); ++i)
      if (!mentions[i].empty() && mentionsOnly(mentions[i], gs)) local.push_back(atoms[i]);
    std::vector<SymState> options =
        g.size() == 1 ? singleAlternatives(local, g[0], ghosts) : std::vector<SymState>{groupState(local, g)};
    std::vector<std::vector<Cell>> next;
    for (const auto& alt : alts)
      for (const auto& s : options) {
        auto a = alt;
        a.push_back(Cell{g, s});
        next.push_back(std::move(a));
      }
    alts = std::move(next);
    if (alts.size() > 16) {
      alts.resize(1);
      for (auto& c : alts[0]) c.state = SymState::unknown();
    }
  }
  return alts;
}

}  // namespace qhtt
