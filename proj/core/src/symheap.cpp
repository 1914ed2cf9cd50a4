#include "qhtt/symheap.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace qhtt {

SymState SymState::concrete(linalg::Vec v) {
  SymState s;
  s.kind = Kind::Concrete;
  s.amps = std::move(v);
  return s;
}

SymState SymState::opaque(Name g) {
  SymState s;
  s.kind = Kind::Opaque;
  s.ghost = std::move(g);
  return s;
}

SymState SymState::unknown() { return SymState{}; }

SymState SymState::support(std::vector<bool> xBasis, std::vector<uint64_t> components) {
  std::sort(components.begin(), components.end());
  components.erase(std::unique(components.begin(), components.end()), components.end());
  if (components.size() == 1) {
    // a single product state is known exactly
    std::size_t n = xBasis.size();
    linalg::Vec v(std::size_t{1} << n);
    v[components[0]] = 1.0;
    return concrete(linalg::fromBasis(v, xBasis));
  }
  SymState s;
  s.kind = Kind::Support;
  s.xBasis = std::move(xBasis);
  s.components = std::move(components);
  return s;
}

bool sameState(const SymState& a, const SymState& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case SymState::Kind::Concrete: return linalg::phaseEqual(a.amps, b.amps);
    case SymState::Kind::Opaque: return a.ghost == b.ghost;
    case SymState::Kind::Unknown: return true;
    case SymState::Kind::Support: return a.xBasis == b.xBasis && a.components == b.components;
  }
  return false;
}

int SymbolicHeap::indexOf(const Name& q) const {
  for (std::size_t i = 0; i < cells.size(); ++i)
    for (const auto& n : cells[i].qubits)
      if (n == q) return static_cast<int>(i);
  return -1;
}

const Cell* SymbolicHeap::cellOf(const Name& q) const {
  int i = indexOf(q);
  return i < 0 ? nullptr : &cells[i];
}

std::vector<Name> SymbolicHeap::qubits() const {
  std::vector<Name> out;
  for (const auto& c : cells) out.insert(out.end(), c.qubits.begin(), c.qubits.end());
  return out;
}

SymState classicalToState(bool b) { return SymState::concrete(linalg::basis(b)); }

std::pair<SymbolicHeap, HeapDelta> spInit(const SymbolicHeap& h, bool init, const Name& fresh) {
  if (h.allocated(fresh)) throw std::logic_error("qubit name already allocated: " + fresh);
  SymbolicHeap out = h;
  Cell c{{fresh}, classicalToState(init)};
  out.cells.push_back(c);
  HeapDelta d;
  d.kind = HeapDelta::Kind::Init;
  d.produced.push_back(c);
  return {out, d};
}

ApplyResult spApplyU(const SymbolicHeap& h, const UnitaryExpr& u) {
  ApplyResult r;
  r.heap = h;
  r.delta.kind = HeapDelta::Kind::Apply;
  std::vector<Name> fp = footprint(u);
  std::vector<std::size_t> touched;
  for (const auto& q : fp) {
    int i = h.indexOf(q);
    if (i < 0) {
      r.unallocated.push_back(q);
      continue;
    }
    if (std::find(touched.begin(), touched.end(), std::size_t(i)) == touched.end())
      touched.push_back(static_cast<std::size_t>(i));
  }
  if (!r.unallocated.empty() || touched.empty()) return r;

  Cell merged;
  bool concrete = true;
  linalg::Vec v{1.0};
  for (auto i : touched) {
    const Cell& c = h.cells[i];
    r.delta.consumed.push_back(c);
    merged.qubits.insert(merged.qubits.end(), c.qubits.begin(), c.qubits.end());
    if (c.state.kind == SymState::Kind::Concrete) v = linalg::tensor(v, c.state.amps);
    else concrete = false;
  }
  if (concrete) {
    applyDense(v, merged.qubits, u);
    merged.state = SymState::concrete(std::move(v));
  } else {
    merged.state = SymState::unknown();
    r.residual = true;
  }
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < h.cells.size(); ++i) {
    if (i == touched.front()) cells.push_back(merged);
    else if (std::find(touched.begin(), touched.end(), i) == touched.end()) cells.push_back(h.cells[i]);
  }
  r.heap.cells = std::move(cells);
  r.delta.produced.push_back(merged);
  return r;
}

namespace {

std::size_t position(const Cell& c, const Name& q) {
  return static_cast<std::size_t>(std::find(c.qubits.begin(), c.qubits.end(), q) - c.qubits.begin());
}

HeapDelta measureDelta(const Name& q, bool refined) {
  HeapDelta d;
  d.kind = HeapDelta::Kind::Measure;
  d.consumed.push_back(Cell{{q}, SymState::unknown()});
  d.refined = refined;
  return d;
}

SymbolicHeap replaceCell(const SymbolicHeap& h, std::size_t index, std::optional<Cell> c) {
  SymbolicHeap out = h;
  if (c) out.cells[index] = std::move(*c);
  else out.cells.erase(out.cells.begin() + static_cast<long>(index));
  return out;
}

std::vector<Name> without(const std::vector<Name>& qs, std::size_t k) {
  std::vector<Name> out = qs;
  out.erase(out.begin() + static_cast<long>(k));
  return out;
}

uint64_t dropBit(uint64_t x, std::size_t n, std::size_t k) {
  std::size_t shift = n - 1 - k;
  uint64_t high = x >> (shift + 1), low = x & ((uint64_t{1} << shift) - 1);
  return (high << shift) | low;
}

}  // namespace

std::vector<MeasureBranch> spMeasure(const SymbolicHeap& h, const Name& q, bool refine) {
  std::vector<MeasureBranch> out;
  int idx = h.indexOf(q);
  if (idx < 0) return out;
  const Cell& cell = h.cells[idx];
  std::size_t n = cell.qubits.size(), k = position(cell, q);
  std::vector<Name> rest = without(cell.qubits, k);

  auto residualCell = [&](SymState s) -> std::optional<Cell> {
    if (rest.empty()) return std::nullopt;
    return Cell{rest, std::move(s)};
  };

  if (!refine) {
    MeasureBranch b;
    b.heap = replaceCell(h, idx, residualCell(SymState::unknown()));
    b.delta = measureDelta(q, false);
    out.push_back(std::move(b));
    return out;
  }

  if (cell.state.kind == SymState::Kind::Concrete) {
    for (bool bit : {false, true}) {
      linalg::Vec p = linalg::project(cell.state.amps, n, k, bit);
      double prob = linalg::norm2(p);
      if (std::sqrt(prob) <= linalg::kTol) continue;
      linalg::normalize(p);
      MeasureBranch b;
      b.outcome = bit;
      b.probability = prob;
      b.heap = replaceCell(h, idx, residualCell(SymState::concrete(std::move(p))));
      b.delta = measureDelta(q, true);
      out.push_back(std::move(b));
    }
    return out;
  }

  if (cell.state.kind == SymState::Kind::Support) {
    const auto& s = cell.state;
    std::vector<bool> restBasis = s.xBasis;
    restBasis.erase(restBasis.begin() + static_cast<long>(k));
    for (bool bit : {false, true}) {
      std::vector<uint64_t> comps;
      for (auto c : s.components) {
        bool value = (c >> (n - 1 - k)) & 1;
        if (!s.xBasis[k] && value != bit) continue;
        comps.push_back(dropBit(c, n, k));
      }
      if (comps.empty()) continue;
      MeasureBranch b;
      b.outcome = bit;
      b.exact = false;
      b.heap = replaceCell(h, idx, residualCell(SymState::support(restBasis, comps)));
      b.delta = measureDelta(q, true);
      out.push_back(std::move(b));
    }
    return out;
  }

  for (bool bit : {false, true}) {
    MeasureBranch b;
    b.outcome = bit;
    b.exact = false;
    b.heap = replaceCell(h, idx, residualCell(SymState::unknown()));
    b.delta = measureDelta(q, true);
    out.push_back(std::move(b));
  }
  return out;
}

IntroPtr locationTerm(const std::vector<Name>& qubits) {
  IntroPtr t = mk::v(qubits.back());
  for (auto it = qubits.rbegin() + 1; it != qubits.rend(); ++it) t = mk::pair(mk::v(*it), t);
  return t;
}

StateExpr stateExpr(const SymState& s) {
  switch (s.kind) {
    case SymState::Kind::Concrete: {
      if (auto k = linalg::literalOf(s.amps)) return mk::ket(*k);
      return mk::concrete(s.amps);
    }
    case SymState::Kind::Opaque: return mk::ghost(s.ghost);
    default: return mk::unknownState();
  }
}

AssertPtr cellAssertion(const Cell& c) { return mk::pointsTo(locationTerm(c.qubits), stateExpr(c.state)); }

namespace {
AssertPtr cellsAssertion(const std::vector<Cell>& cells) {
  if (cells.empty()) return mk::emp();
  if (cells.size() == 1) return cellAssertion(cells[0]);
  std::vector<AssertPtr> items;
  for (const auto& c : cells) items.push_back(cellAssertion(c));
  return mk::sep(items);
}
}  // namespace

AssertPtr heapAssertion(const SymbolicHeap& h) { return cellsAssertion(h.cells); }

AssertPtr renderDelta(const HeapDelta& d) {
  switch (d.kind) {
    case HeapDelta::Kind::Init: return cellsAssertion(d.produced);
    case HeapDelta::Kind::Measure:
      return mk::diff(mk::pointsTo(mk::v(d.consumed.at(0).qubits.at(0)), mk::wildcard()), mk::emp());
    default: return mk::diff(cellsAssertion(d.consumed), cellsAssertion(d.produced));
  }
}

AssertPtr renderAssertion(const std::vector<HeapDelta>& steps, const AssertPtr& initial) {
  AssertPtr acc = initial;
  for (const auto& d : steps) acc = mk::compose(acc, renderDelta(d));
  return acc;
}

}  // namespace qhtt
