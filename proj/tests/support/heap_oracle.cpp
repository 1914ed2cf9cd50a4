#include <algorithm>

#include "qhtt/linalg.hpp"
#include "support.hpp"

namespace qtest {

using namespace qhtt;

const std::vector<Name> kCellNames = {"p", "q", "s"};

namespace {

const std::vector<StateExpr::Kind> kKets = {StateExpr::Kind::Ket0, StateExpr::Kind::Ket1,
                                            StateExpr::Kind::KetPlus, StateExpr::Kind::KetMinus};

int ketIndex(const StateExpr& s) {
  auto it = std::find(kKets.begin(), kKets.end(), s.kind);
  return it == kKets.end() ? -2 : static_cast<int>(it - kKets.begin());
}

int cellIndex(const IntroPtr& t) {
  const Name& n = t->elim->name;
  return static_cast<int>(std::find(kCellNames.begin(), kCellNames.end(), n) - kCellNames.begin());
}

int occupied(const HeapModel& h) {
  return static_cast<int>(std::count_if(std::begin(h.cell), std::end(h.cell), [](int c) { return c >= 0; }));
}

bool holdsState(const HeapModel& h, int i, const StateExpr& s) {
  if (h.cell[i] < 0) return false;
  if (s.kind == StateExpr::Kind::Wildcard) return true;
  return h.cell[i] == ketIndex(s);
}

IntroPtr cellVar(Gen& g) { return mk::v(g.pick(kCellNames)); }
StateExpr ket(Gen& g) { return mk::ket(g.pick(kKets)); }

}  // namespace

std::vector<HeapModel> allHeaps() {
  std::vector<HeapModel> out;
  for (int rest = 0; rest < 2; ++rest)
    for (int a = -1; a < 4; ++a)
      for (int b = -1; b < 4; ++b)
        for (int c = -1; c < 4; ++c) {
          HeapModel h;
          h.cell[0] = a;
          h.cell[1] = b;
          h.cell[2] = c;
          h.rest = rest;
          out.push_back(h);
        }
  return out;
}

AssertPtr randomCellAssertion(Gen& g, int depth) {
  if (depth <= 0 || g.coin(0.3)) {
    switch (g.below(10)) {
      case 0: return mk::emp();
      case 1: return mk::pointsTo(cellVar(g), g.coin(0.8) ? ket(g) : mk::wildcard());
      case 2: return mk::lookup(cellVar(g), g.coin(0.8) ? ket(g) : mk::wildcard());
      case 3: return mk::id(mk::opTerm(cellVar(g)), mk::opState(ket(g)));
      case 4: return mk::id(mk::opTerm(cellVar(g)), mk::opTerm(cellVar(g)));
      case 5: return mk::memberOf(cellVar(g), {ket(g), ket(g)});
      case 6: return mk::entangled(cellVar(g));
      case 7: return g.coin() ? mk::top() : mk::bot();
      default: return mk::lookup(cellVar(g), ket(g));
    }
  }
  switch (g.below(4)) {
    case 0: return mk::conj(randomCellAssertion(g, depth - 1), randomCellAssertion(g, depth - 1));
    case 1: return mk::disj(randomCellAssertion(g, depth - 1), randomCellAssertion(g, depth - 1));
    case 2: return mk::implies(randomCellAssertion(g, depth - 1), randomCellAssertion(g, depth - 1));
    default: return mk::neg(randomCellAssertion(g, depth - 1));
  }
}

bool oracleHolds(const Assertion& p, const HeapModel& h) {
  using K = Assertion::Kind;
  switch (p.kind) {
    case K::Top: return true;
    case K::Bot: return false;
    case K::And: return oracleHolds(*p.a, h) && oracleHolds(*p.b, h);
    case K::Or: return oracleHolds(*p.a, h) || oracleHolds(*p.b, h);
    case K::Implies: return !oracleHolds(*p.a, h) || oracleHolds(*p.b, h);
    case K::Not: return !oracleHolds(*p.a, h);
    case K::Emp: return occupied(h) == 0 && !h.rest;
    case K::PointsTo: {
      int i = cellIndex(p.loc);
      return !h.rest && occupied(h) == 1 && holdsState(h, i, p.state);
    }
    case K::Lookup: return holdsState(h, cellIndex(p.loc), p.state);
    case K::Id: {
      int i = cellIndex(p.left.term);
      if (p.right.state) return holdsState(h, i, *p.right.state);
      int j = cellIndex(p.right.term);
      return h.cell[i] >= 0 && h.cell[j] >= 0 && h.cell[i] == h.cell[j];
    }
    case K::MemberOf: {
      int i = cellIndex(p.loc);
      return std::any_of(p.candidates.begin(), p.candidates.end(),
                         [&](const StateExpr& s) { return holdsState(h, i, s); });
    }
    case K::Entangled: return false;
    default: throw std::logic_error("assertion outside the oracle fragment");
  }
}

bool oracleValid(const std::vector<AssertPtr>& hyps, const AssertPtr& concl) {
  for (const auto& h : allHeaps()) {
    bool hyp = std::all_of(hyps.begin(), hyps.end(), [&](const AssertPtr& a) { return oracleHolds(*a, h); });
    if (hyp && !oracleHolds(*concl, h)) return false;
  }
  return true;
}

bool toHeapModel(const World& w, HeapModel& out) {
  out = HeapModel{};
  out.rest = w.rest;
  for (const auto& c : w.heap.cells) {
    if (c.qubits.size() != 1 || c.state.kind != SymState::Kind::Concrete) return false;
    auto it = std::find(kCellNames.begin(), kCellNames.end(), c.qubits[0]);
    if (it == kCellNames.end()) return false;
    auto lit = linalg::literalOf(c.state.amps);
    if (!lit) return false;
    int k = ketIndex(mk::ket(*lit));
    if (k < 0) return false;
    out.cell[it - kCellNames.begin()] = k;
  }
  return true;
}

}  // namespace qtest
