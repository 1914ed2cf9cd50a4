#include "qhtt/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "qhtt/pretty.hpp"

namespace qhtt {

QuantumState::QuantumState() { amplitudes[0] = 1.0; }

std::size_t QuantumState::alloc(bool b) {
  if (qubitCount >= 64) throw RuntimeError("too many qubits");
  std::size_t q = qubitCount++;
  retired.push_back(false);
  if (b) {
    std::map<uint64_t, Complex> next;
    for (const auto& [k, a] : amplitudes) next[k | (uint64_t{1} << q)] = a;
    amplitudes = std::move(next);
  }
  return q;
}

namespace {

std::size_t indexOf(const Name& n) {
  auto i = qubitIndex(n);
  if (!i) throw RuntimeError("not a runtime qubit: " + n);
  return *i;
}

void prune(std::map<uint64_t, Complex>& m) {
  for (auto it = m.begin(); it != m.end();) {
    if (std::abs(it->second) <= kPruneTolerance) it = m.erase(it);
    else ++it;
  }
}

void applyMasked(std::map<uint64_t, Complex>& amps, const UnitaryExpr& u, uint64_t mask, uint64_t value) {
  switch (u.kind) {
    case UnitaryExpr::Kind::MEmpty: return;
    case UnitaryExpr::Kind::MAppend:
      applyMasked(amps, *u.first, mask, value);
      applyMasked(amps, *u.second, mask, value);
      return;
    case UnitaryExpr::Kind::Rot: {
      uint64_t bit = uint64_t{1} << indexOf(u.qubit);
      const Matrix2& m = u.matrix;
      std::map<uint64_t, Complex> out;
      for (const auto& [k, a] : amps) {
        if ((k & mask) != value) {
          out[k] += a;
          continue;
        }
        uint64_t k0 = k & ~bit, k1 = k | bit;
        if (k & bit) {
          out[k0] += m[1] * a;
          out[k1] += m[3] * a;
        } else {
          out[k0] += m[0] * a;
          out[k1] += m[2] * a;
        }
      }
      prune(out);
      amps = std::move(out);
      return;
    }
    case UnitaryExpr::Kind::Cond: {
      uint64_t bit = uint64_t{1} << indexOf(u.qubit);
      applyMasked(amps, *u.onTrue, mask | bit, value | bit);
      applyMasked(amps, *u.onFalse, mask | bit, value);
      return;
    }
  }
}

}  // namespace

void QuantumState::apply(const UnitaryExpr& u) {
  for (const auto& n : footprint(u))
    if (!live(indexOf(n))) throw RuntimeError("qubit " + n + " is not allocated");
  applyMasked(amplitudes, u, 0, 0);
}

double QuantumState::probability(std::size_t q, bool b) const {
  double p = 0;
  for (const auto& [k, a] : amplitudes)
    if (((k >> q) & 1) == static_cast<uint64_t>(b)) p += std::norm(a);
  return p;
}

bool QuantumState::measure(std::size_t q, std::mt19937_64& rng) {
  if (!live(q)) throw RuntimeError("qubit " + qubitName(q) + " is not allocated");
  double p1 = probability(q, true) / norm2();
  double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  bool outcome = u < p1;
  double keep = outcome ? p1 : 1 - p1;
  double scale = 1 / std::sqrt(keep * norm2());
  std::map<uint64_t, Complex> next;
  for (const auto& [k, a] : amplitudes)
    if (((k >> q) & 1) == static_cast<uint64_t>(outcome)) next[k] = a * scale;
  prune(next);
  amplitudes = std::move(next);
  retired[q] = true;
  return outcome;
}

double QuantumState::norm2() const {
  double n = 0;
  for (const auto& [k, a] : amplitudes) n += std::norm(a);
  return n;
}

std::vector<std::size_t> QuantumState::liveQubits() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < qubitCount; ++i)
    if (!retired[i]) out.push_back(i);
  return out;
}

linalg::Mat QuantumState::reducedDensity(const std::vector<std::size_t>& qs) const {
  std::size_t k = qs.size(), dim = std::size_t{1} << k;
  uint64_t mask = 0;
  for (auto q : qs) mask |= uint64_t{1} << q;
  std::map<uint64_t, linalg::Vec> groups;
  for (const auto& [key, a] : amplitudes) {
    std::size_t i = 0;
    for (std::size_t j = 0; j < k; ++j)
      if ((key >> qs[j]) & 1) i |= std::size_t{1} << (k - 1 - j);
    auto& v = groups[key & ~mask];
    if (v.empty()) v.assign(dim, 0.0);
    v[i] += a;
  }
  linalg::Mat rho(dim * dim, 0.0);
  for (const auto& [rest, v] : groups)
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) rho[i * dim + j] += v[i] * std::conj(v[j]);
  return rho;
}

Name qubitName(std::size_t i) { return "#" + std::to_string(i); }

std::optional<std::size_t> qubitIndex(const Name& n) {
  if (n.size() < 2 || n[0] != '#') return std::nullopt;
  return static_cast<std::size_t>(std::stoul(n.substr(1)));
}

std::optional<std::size_t> qubitIndex(const IntroPtr& m) {
  if (m->kind == Intro::Kind::FromElim && m->elim->kind == Elim::Kind::Var) return qubitIndex(m->elim->name);
  return std::nullopt;
}

const char* toString(Check c) {
  switch (c) {
    case Check::Holds: return "holds";
    case Check::Fails: return "fails";
    case Check::Uncheckable: return "uncheckable";
  }
  return "";
}

// ---------------------------------------------------------------------------
// Runtime assertions

namespace {

Check both(Check a, Check b) {
  if (a == Check::Fails || b == Check::Fails) return Check::Fails;
  if (a == Check::Uncheckable || b == Check::Uncheckable) return Check::Uncheckable;
  return Check::Holds;
}

Check either(Check a, Check b) {
  if (a == Check::Holds || b == Check::Holds) return Check::Holds;
  if (a == Check::Uncheckable || b == Check::Uncheckable) return Check::Uncheckable;
  return Check::Fails;
}

Check negate(Check a) {
  if (a == Check::Holds) return Check::Fails;
  if (a == Check::Fails) return Check::Holds;
  return a;
}

Check fromBool(bool b) { return b ? Check::Holds : Check::Fails; }

bool qubitList(const IntroPtr& v, std::vector<std::size_t>& out) {
  if (auto q = qubitIndex(v)) {
    out.push_back(*q);
    return true;
  }
  if (v->kind == Intro::Kind::Pair) return qubitList(v->a, out) && qubitList(v->b, out);
  return false;
}

bool classical(const Intro& v) {
  switch (v.kind) {
    case Intro::Kind::True: case Intro::Kind::False: case Intro::Kind::Unit: return true;
    case Intro::Kind::Pair: return classical(*v.a) && classical(*v.b);
    default: return false;
  }
}

struct Runtime {
  const ValueEnv& env;
  const QuantumState& s;
  const std::map<Name, linalg::Vec>& ghosts;

  std::optional<linalg::Vec> reference(const StateExpr& e) const {
    switch (e.kind) {
      case StateExpr::Kind::Ghost: {
        auto it = ghosts.find(e.ghost);
        if (it == ghosts.end()) return std::nullopt;
        return it->second;
      }
      case StateExpr::Kind::Concrete: return e.amplitudes;
      case StateExpr::Kind::Wildcard: case StateExpr::Kind::Unknown: return std::nullopt;
      default: return linalg::ketVector(e.kind);
    }
  }

  Check stateIs(const std::vector<std::size_t>& qs, const StateExpr& e) const {
    for (auto q : qs)
      if (!s.live(q)) return Check::Fails;
    if (e.kind == StateExpr::Kind::Wildcard) return Check::Holds;
    auto ref = reference(e);
    if (!ref) return Check::Uncheckable;
    if (ref->size() != (std::size_t{1} << qs.size())) return Check::Fails;
    linalg::Mat rho = s.reducedDensity(qs);
    if (linalg::purity(rho) < 1 - linalg::kTol) return Check::Uncheckable;
    return fromBool(linalg::fidelity(rho, *ref) >= 1 - linalg::kTol);
  }

  IntroPtr value(const IntroPtr& m) const { return substAll(m, env); }

  Check id(const Assertion& p) const {
    const Operand &l = p.left, &r = p.right;
    if (l.state && r.state) {
      auto a = reference(*l.state), b = reference(*r.state);
      if (!a || !b) return Check::Uncheckable;
      return fromBool(linalg::phaseEqual(*a, *b));
    }
    if (l.term && r.term) {
      IntroPtr a = value(l.term), b = value(r.term);
      if (classical(*a) && classical(*b)) return fromBool(equal(*a, *b));
      std::vector<std::size_t> qa, qb;
      if (qubitList(a, qa) && qubitList(b, qb)) {
        if (qa.size() != qb.size()) return Check::Fails;
        for (auto q : qa)
          if (!s.live(q)) return Check::Fails;
        for (auto q : qb)
          if (!s.live(q)) return Check::Fails;
        if (qa == qb) return Check::Holds;
        linalg::Mat ra = s.reducedDensity(qa), rb = s.reducedDensity(qb);
        auto pa = linalg::pureState(ra);
        if (!pa || linalg::purity(rb) < 1 - linalg::kTol) return Check::Uncheckable;
        return fromBool(linalg::fidelity(rb, *pa) >= 1 - linalg::kTol);
      }
      return Check::Uncheckable;
    }
    const IntroPtr& t = l.term ? l.term : r.term;
    const StateExpr& e = l.state ? *l.state : *r.state;
    std::vector<std::size_t> qs;
    if (!qubitList(value(t), qs)) return Check::Uncheckable;
    return stateIs(qs, e);
  }

  Check eval(const Assertion& p) const {
    using K = Assertion::Kind;
    switch (p.kind) {
      case K::Top: return Check::Holds;
      case K::Bot: return Check::Fails;
      case K::And: return both(eval(*p.a), eval(*p.b));
      case K::Or: return either(eval(*p.a), eval(*p.b));
      case K::Implies: return either(negate(eval(*p.a)), eval(*p.b));
      case K::Not: return negate(eval(*p.a));
      case K::Id: return id(p);
      case K::Emp: return fromBool(s.liveQubits().empty());
      case K::PointsTo:
      case K::Lookup: {
        std::vector<std::size_t> qs;
        if (!qubitList(value(p.loc), qs)) return Check::Uncheckable;
        Check c = stateIs(qs, p.state);
        if (p.kind == K::PointsTo) {
          auto live = s.liveQubits();
          auto sorted = qs;
          std::sort(sorted.begin(), sorted.end());
          c = both(c, fromBool(live == sorted));
        }
        return c;
      }
      case K::MemberOf: {
        std::vector<std::size_t> qs;
        if (!qubitList(value(p.loc), qs)) return Check::Uncheckable;
        Check c = Check::Fails;
        for (const auto& e : p.candidates) c = either(c, stateIs(qs, e));
        return c;
      }
      case K::Entangled: {
        std::vector<std::size_t> qs;
        if (!qubitList(value(p.loc), qs)) return Check::Uncheckable;
        for (auto q : qs)
          if (!s.live(q)) return Check::Fails;
        return fromBool(linalg::purity(s.reducedDensity(qs)) <= 0.5 + 1e-6);
      }
      default: return Check::Uncheckable;
    }
  }
};

}  // namespace

Check checkAssertionRuntime(const AssertPtr& a, const ValueEnv& env, const QuantumState& s,
                            const std::map<Name, linalg::Vec>& ghosts) {
  return Runtime{env, s, ghosts}.eval(*a);
}

// ---------------------------------------------------------------------------
// Interpreter

Machine::Machine(Checker& ck, uint64_t seed) : rng(seed), ck_(ck) {}

IntroPtr Machine::evaluate(const IntroPtr& m, const ValueEnv& env) { return ck_.reduce(substAll(m, env), true); }

IntroPtr Machine::force(const IntroPtr& m) {
  if (m->kind != Intro::Kind::Do) throw RuntimeError("not a suspended computation: " + pretty(*m));
  if (depth_ > 256) throw RuntimeError("call depth exceeded");
  ++depth_;
  IntroPtr v = runComputation(m->body, {});
  --depth_;
  return v;
}

IntroPtr Machine::call(const Name& decl, const std::vector<IntroPtr>& args) {
  ElimPtr k = mk::var(decl);
  for (const auto& a : args) k = mk::app(k, a);
  return force(ck_.reduce(mk::fromElim(k), true));
}

namespace {

void bindValue(const PatternPtr& p, const IntroPtr& v, ValueEnv& env) {
  if (p->name) {
    env[*p->name] = v;
    return;
  }
  if (v->kind != Intro::Kind::Pair) throw RuntimeError("cannot match " + pretty(*p) + " against " + pretty(*v));
  bindValue(p->left, v->a, env);
  bindValue(p->right, v->b, env);
}

bool literal(const IntroPtr& v) { return v->kind == Intro::Kind::True || v->kind == Intro::Kind::False; }

}  // namespace

IntroPtr Machine::command(const Command& c, const ValueEnv& env) {
  switch (c.kind) {
    case Command::Kind::MkQbit: {
      IntroPtr b = evaluate(c.a, env);
      if (!literal(b)) throw RuntimeError("mkQbit argument is not a boolean: " + pretty(*b));
      return mk::v(qubitName(state.alloc(b->kind == Intro::Kind::True)));
    }
    case Command::Kind::MeasQbit: {
      IntroPtr q = evaluate(c.a, env);
      auto i = qubitIndex(q);
      if (!i) throw RuntimeError("measQbit argument is not a qubit: " + pretty(*q));
      return mk::boolean(state.measure(*i, rng));
    }
    case Command::Kind::ApplyU: {
      UnitaryEval u = evalUnitary(evaluate(c.a, env));
      if (!u.ok()) throw RuntimeError(u.error);
      if (!u.nonUnitary.empty()) throw RuntimeError("non-unitary rotation");
      state.apply(*u.expr);
      return mk::unitVal();
    }
    case Command::Kind::If: {
      IntroPtr b = evaluate(c.a, env);
      if (!literal(b)) throw RuntimeError("if condition is not a boolean: " + pretty(*b));
      const IntroPtr& br = b->kind == Intro::Kind::True ? c.b : c.c;
      if (br->kind == Intro::Kind::Do) {
        ++depth_;
        IntroPtr v = runComputation(br->body, env);
        --depth_;
        return v;
      }
      IntroPtr v = evaluate(br, env);
      if (v->kind == Intro::Kind::Do) return force(v);
      return v;
    }
  }
  return nullptr;
}

IntroPtr Machine::runComputation(const CompPtr& e, ValueEnv env) {
  for (CompPtr c = e; c; c = c->rest) {
    switch (c->kind) {
      case Comp::Kind::Return: return evaluate(c->value, env);
      case Comp::Kind::LetEq: env[*c->binder->name] = evaluate(c->value, env); break;
      case Comp::Kind::BindCmd: env[*c->binder->name] = command(*c->command, env); break;
      case Comp::Kind::BindRun: bindValue(c->binder, force(evaluate(mk::fromElim(c->source), env)), env); break;
    }
  }
  throw RuntimeError("computation does not end in a return");
}

// ---------------------------------------------------------------------------
// Runs

int RunReport::failures() const {
  int n = 0;
  for (const auto& a : assertions) n += a.fail;
  return n;
}

uint64_t shotSeed(uint64_t seed, uint64_t shot) {
  auto mix = [](uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(seed ^ mix(shot));
}

std::string renderValue(const IntroPtr& v) {
  if (auto q = qubitIndex(v)) return "qubit " + std::to_string(*q);
  if (v->kind == Intro::Kind::Pair) return "(" + renderValue(v->a) + ", " + renderValue(v->b) + ")";
  return pretty(*v);
}

RunReport runProgram(Checker& ck, const Name& entry, uint64_t seed, int shots) {
  const Decl* d = ck.program().find(entry);
  if (!d) throw std::invalid_argument("no declaration named " + entry);
  const TypePtr& t = d->signature;
  if (t->kind != Type::Kind::Hoare) throw std::invalid_argument(entry + " is not a closed computation");
  RunReport r;
  r.decl = entry;
  r.seed = seed;
  r.shots = shots;
  std::vector<AssertPtr> checks = conjuncts(t->post);
  for (const auto& a : checks) r.assertions.push_back({pretty(*a)});
  std::map<std::string, int> hist;
  for (int i = 0; i < shots; ++i) {
    Machine m(ck, shotSeed(seed, static_cast<uint64_t>(i)));
    ShotResult shot;
    try {
      IntroPtr v = m.call(entry);
      shot.value = renderValue(v);
      ValueEnv env;
      bindValue(t->result, v, env);
      for (std::size_t j = 0; j < checks.size(); ++j) {
        Check c = checkAssertionRuntime(checks[j], env, m.state);
        shot.checks.push_back(c);
        if (c == Check::Holds) ++r.assertions[j].pass;
        else if (c == Check::Fails) ++r.assertions[j].fail;
        else ++r.assertions[j].uncheckable;
      }
      ++hist[shot.value];
    } catch (const RuntimeError& e) {
      shot.error = e.what();
      ++r.errors;
    }
    r.perShot.push_back(std::move(shot));
  }
  r.outcomes.assign(hist.begin(), hist.end());
  return r;
}

}  // namespace qhtt
