#include <cmath>
#include <fstream>
#include <sstream>

#include "qhtt/parser.hpp"
#include "qhtt/pretty.hpp"
#include "qhtt/simulator.hpp"
#include "qhtt/typechecker.hpp"
#include "support.hpp"

namespace qtest {

using namespace qhtt;

namespace {

double distance(const QuantumState& s, const DenseState& d) {
  double worst = 0;
  for (uint64_t k = 0; k < (uint64_t{1} << d.qubits()); ++k) {
    auto it = s.amplitudes.find(k);
    Complex a = it == s.amplitudes.end() ? Complex{} : it->second;
    worst = std::max(worst, std::abs(a - d.amplitude(k)));
  }
  for (const auto& [k, a] : s.amplitudes)
    if (k >> d.qubits()) worst = std::max(worst, std::abs(a));
  return worst;
}

double distance(const QuantumState& a, const QuantumState& b) {
  double worst = 0;
  for (const auto& [k, x] : a.amplitudes) {
    auto it = b.amplitudes.find(k);
    worst = std::max(worst, std::abs(x - (it == b.amplitudes.end() ? Complex{} : it->second)));
  }
  for (const auto& [k, y] : b.amplitudes)
    if (!a.amplitudes.count(k)) worst = std::max(worst, std::abs(y));
  return worst;
}

std::string caseLabel(int i) { return "case " + std::to_string(i) + ": "; }

const Program& emptyProgram() {
  static const Program p;
  return p;
}

}  // namespace

PropertyResult propNormalization(uint64_t seed, int cases) {
  PropertyResult r{"state normalization"};
  Gen g(seed);
  for (int i = 0; i < cases; ++i, ++r.cases) {
    QuantumState qs;
    DenseState ds;
    std::mt19937_64 rng(seed * 7919 + i);
    int ops = 1 + g.below(14);
    std::string err;
    for (int j = 0; j < ops && err.empty(); ++j) {
      auto live = qs.liveQubits();
      int kind = live.empty() ? 0 : g.below(3);
      if (kind == 0 && qs.qubitCount < 6) {
        bool b = g.coin();
        qs.alloc(b);
        ds.alloc(b);
      } else if (kind != 2) {
        auto u = randomUnitaryOver(g, live, 3);
        qs.apply(*u);
        ds.apply(*u);
      } else {
        std::size_t q = g.pick(live);
        bool out = qs.measure(q, rng);
        ds.collapse(q, out);
      }
      if (std::abs(qs.norm2() - 1) > 1e-9) err = "norm " + std::to_string(qs.norm2());
      else if (distance(qs, ds) > 1e-9) err = "diverged from reference vector";
    }
    if (!err.empty()) r.fail(caseLabel(i) + err);
  }
  return r;
}

PropertyResult propCollapse(uint64_t seed, int cases) {
  PropertyResult r{"measurement collapse"};
  Gen g(seed);
  for (int i = 0; i < cases; ++i, ++r.cases) {
    QuantumState qs;
    DenseState ds;
    std::mt19937_64 rng(seed * 104729 + i);
    std::size_t n = 1 + g.below(5);
    for (std::size_t k = 0; k < n; ++k) {
      bool b = g.coin();
      qs.alloc(b);
      ds.alloc(b);
    }
    auto u = randomUnitaryExpr(g, n, 4);
    qs.apply(*u);
    ds.apply(*u);
    std::size_t q = g.below(static_cast<int>(n));
    bool out = qs.measure(q, rng);
    double before = ds.probability(q, out);
    double other = qs.probability(q, !out) / qs.norm2();
    if (before <= 0) r.fail(caseLabel(i) + "outcome had probability zero");
    else if (other > 1e-12) r.fail(caseLabel(i) + "residual weight " + std::to_string(other));
    else if (std::abs(qs.probability(q, out) - 1) > 1e-9) r.fail(caseLabel(i) + "outcome weight not one");
  }
  return r;
}

PropertyResult propMonoidLaws(uint64_t seed, int cases) {
  PropertyResult r{"unitary monoid laws"};
  Gen g(seed);
  Checker ck(emptyProgram());
  auto eval = [&](const IntroPtr& term) -> UnitaryPtr {
    UnitaryEval e = evalUnitary(ck.reduce(term, true));
    return e.ok() ? e.expr : nullptr;
  };
  auto app = [](const char* f, IntroPtr a, IntroPtr b) {
    return mk::fromElim(mk::app(mk::app(mk::var(f), std::move(a)), std::move(b)));
  };
  for (int i = 0; i < cases; ++i, ++r.cases) {
    std::size_t n = 1 + g.below(3);
    auto a = randomUnitaryExpr(g, n, 3), b = randomUnitaryExpr(g, n, 3), c = randomUnitaryExpr(g, n, 3);
    IntroPtr ta = unitaryTerm(*a), tb = unitaryTerm(*b), tc = unitaryTerm(*c);
    IntroPtr empty = mk::v("mempty");
    std::vector<IntroPtr> terms = {ta, app("mappend", app("mappend", ta, tb), tc),
                                   app("mappend", ta, app("mappend", tb, tc)),
                                   app("mappend", empty, ta), app("mappend", ta, empty)};
    QuantumState init;
    DenseState ref;
    for (std::size_t k = 0; k < n; ++k) {
      bool bit = g.coin();
      init.alloc(bit);
      ref.alloc(bit);
    }
    auto prep = randomUnitaryExpr(g, n, 2);
    init.apply(*prep);
    ref.apply(*prep);
    std::vector<QuantumState> out;
    bool ok = true;
    for (const auto& t : terms) {
      auto u = eval(t);
      if (!u) {
        r.fail(caseLabel(i) + "could not evaluate " + pretty(*t));
        ok = false;
        break;
      }
      out.push_back(init);
      out.back().apply(*u);
    }
    if (!ok) continue;
    DenseState refA = ref, refABC = ref;
    refA.apply(*a);
    refABC.apply(*a);
    refABC.apply(*b);
    refABC.apply(*c);
    if (distance(out[0], refA) > 1e-9) r.fail(caseLabel(i) + "term disagrees with reference");
    else if (distance(out[1], refABC) > 1e-9 || distance(out[1], out[2]) > 1e-9)
      r.fail(caseLabel(i) + "associativity");
    else if (distance(out[3], out[0]) > 1e-9 || distance(out[4], out[0]) > 1e-9)
      r.fail(caseLabel(i) + "identity");
  }
  return r;
}

PropertyResult propRoundTrip(uint64_t seed, int cases) {
  PropertyResult r{"parse/print round trip"};
  Gen g(seed);
  for (int i = 0; i < cases; ++i, ++r.cases) {
    Program p = randomProgram(g);
    std::string text = pretty(p);
    auto parsed = parseProgram(text);
    if (!parsed.ok()) {
      r.fail(caseLabel(i) + "reparse failed: " + parsed.diagnostics.at(0).message + "\n" + text);
      continue;
    }
    if (!equal(*parsed.value, p)) {
      r.fail(caseLabel(i) + "changed after reparse:\n" + text + "\nvs\n" + pretty(*parsed.value));
      continue;
    }
    AssertPtr a = randomAssertion(g, 3);
    auto pa = parseAssertion(pretty(*a));
    if (!pa.ok() || !equal(**pa.value, *a)) r.fail(caseLabel(i) + "assertion " + pretty(*a));
  }
  return r;
}

PropertyResult propNormalizeIdempotent(uint64_t seed, int cases) {
  PropertyResult r{"normalize idempotence"};
  Gen g(seed);
  Checker ck(emptyProgram());
  VarContext ctx = {{"c", mk::boolean()}, {"d", mk::boolean()}, {"u", mk::unit()},
                    {"f", mk::arrow(mk::boolean(), mk::boolean())}};
  for (int i = 0; i < cases; ++i, ++r.cases) {
    TypePtr t = randomSimpleType(g, 3);
    IntroPtr m = randomTerm(g, t, ctx, 4);
    try {
      ck.check(ctx, m, t);
      IntroPtr n1 = ck.normalize(m, t, ctx);
      IntroPtr n2 = ck.normalize(n1, t, ctx);
      if (!equal(*n1, *n2)) r.fail(caseLabel(i) + pretty(*n1) + " renormalized to " + pretty(*n2));
      else if (!betaNormal(*n1)) r.fail(caseLabel(i) + "redex left in " + pretty(*n1));
      else ck.check(ctx, n1, t);
    } catch (const TypeError& e) {
      r.fail(caseLabel(i) + e.what() + " in " + pretty(*m) + " : " + pretty(*t));
    }
  }
  return r;
}

PropertyResult propProverOracle(uint64_t seed, int cases) {
  PropertyResult r{"prover agrees with enumeration"};
  Gen g(seed);
  VarContext ctx;
  for (const auto& n : kCellNames) ctx.push_back({n, mk::qbit()});
  for (int i = 0; i < cases; ++i, ++r.cases) {
    Obligation ob;
    ob.decl = "prop";
    ob.varCtx = ctx;
    int nh = g.below(3);
    for (int k = 0; k < nh; ++k) ob.hypotheses.push_back(randomCellAssertion(g, 2));
    ob.conclusion = randomCellAssertion(g, 3);
    bool valid = oracleValid(ob.hypotheses, ob.conclusion);
    Verdict v = entails(ob);
    std::string seq;
    for (const auto& h : ob.hypotheses) seq += pretty(*h) + ", ";
    seq += "|- " + pretty(*ob.conclusion);
    if (v.kind == Verdict::Kind::Unknown) {
      r.fail(caseLabel(i) + "undecided: " + seq);
    } else if ((v.kind == Verdict::Kind::Proved) != valid) {
      r.fail(caseLabel(i) + std::string(toString(v.kind)) + " but enumeration says " +
             (valid ? "valid" : "invalid") + ": " + seq);
    } else if (v.kind == Verdict::Kind::Refuted) {
      HeapModel h;
      bool hyps = true;
      if (v.countermodel && toHeapModel(v.countermodel->world, h))
        for (const auto& a : ob.hypotheses) hyps = hyps && oracleHolds(*a, h);
      if (!v.countermodel || !toHeapModel(v.countermodel->world, h) || !hyps ||
          oracleHolds(*ob.conclusion, h))
        r.fail(caseLabel(i) + "bad countermodel for " + seq);
    }
  }
  return r;
}

std::vector<PropertyResult> allProperties(uint64_t seed, int cases) {
  return {propNormalization(seed, cases),      propMonoidLaws(seed + 1, cases),
          propCollapse(seed + 2, cases),       propRoundTrip(seed + 3, cases),
          propNormalizeIdempotent(seed + 4, cases), propProverOracle(seed + 5, cases)};
}

std::string testsDir() { return QHTT_TESTS_DIR; }
std::string corpusDir() { return testsDir() + "/corpus"; }
std::string negativeDir() { return testsDir() + "/negative"; }

std::string readFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace qtest
