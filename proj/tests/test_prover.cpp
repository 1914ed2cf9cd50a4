#include <cmath>

#include "doctest.h"
#include "qhtt/linalg.hpp"
#include "qhtt/parser.hpp"
#include "qhtt/pretty.hpp"
#include "qhtt/prover.hpp"
#include "support.hpp"

using namespace qhtt;

namespace {

AssertPtr a(const std::string& s) {
  auto r = parseAssertion(s);
  REQUIRE_MESSAGE(r.ok(), s);
  return *r.value;
}

Obligation sequent(std::vector<std::string> hyps, const std::string& concl) {
  Obligation ob;
  ob.decl = "t";
  for (const char* n : {"p", "q", "s"}) ob.varCtx.push_back({n, mk::qbit()});
  ob.varCtx.push_back({"b", mk::boolean()});
  ob.varCtx.push_back({"x", mk::pure()});
  for (const auto& h : hyps) ob.hypotheses.push_back(a(h));
  ob.conclusion = a(concl);
  return ob;
}

std::string verdict(std::vector<std::string> hyps, const std::string& concl) {
  return toString(entails(sequent(std::move(hyps), concl)).kind);
}

World bellWorld() {
  World w;
  double r = M_SQRT1_2;
  w.heap.cells.push_back(Cell{{"p", "q"}, SymState::concrete({r, 0.0, 0.0, r})});
  w.env["p"] = Value::qubit("p");
  w.env["q"] = Value::qubit("q");
  return w;
}

}  // namespace

TEST_CASE("three-valued connectives") {
  CHECK(triAnd(Tri::True, Tri::Unknown) == Tri::Unknown);
  CHECK(triAnd(Tri::False, Tri::Unknown) == Tri::False);
  CHECK(triOr(Tri::True, Tri::Unknown) == Tri::True);
  CHECK(triOr(Tri::False, Tri::Unknown) == Tri::Unknown);
  CHECK(triNot(Tri::Unknown) == Tri::Unknown);
  CHECK(triNot(Tri::True) == Tri::False);
}

TEST_CASE("heap shape") {
  CHECK(verdict({}, "emp \\/ ~emp") == std::string("proved"));
  CHECK(verdict({"p |-> |0\\>"}, "p ~> |0\\>") == std::string("proved"));
  CHECK(verdict({"p ~> |0\\>"}, "p |-> |0\\>") == std::string("refuted"));
  CHECK(verdict({"p |-> |0\\>"}, "~(q ~> -)") == std::string("proved"));
  CHECK(verdict({"p |-> -"}, "p \\in {|0\\>, |1\\>, |+\\>, |-\\>}") == std::string("proved"));
  CHECK(verdict({"emp"}, "~entangled(p)") == std::string("proved"));
}

TEST_CASE("state identity") {
  CHECK(verdict({"Id(p, |+\\>)"}, "p \\in {|+\\>, |-\\>}") == std::string("proved"));
  CHECK(verdict({"Id(p, |+\\>)"}, "Id(p, |0\\>)") == std::string("refuted"));
  CHECK(verdict({"Id(p, q)", "Id(q, |1\\>)"}, "Id(p, |1\\>)") == std::string("proved"));
  CHECK(verdict({"Id(p, x)"}, "Id(p, x)") == std::string("proved"));
  CHECK(verdict({}, "Id(b, true) \\/ Id(b, false)") == std::string("proved"));
}

TEST_CASE("countermodels falsify the conclusion") {
  Verdict v = entails(sequent({"p ~> |0\\>"}, "p |-> |0\\>"));
  REQUIRE(v.countermodel);
  const World& w = v.countermodel->world;
  CHECK(evaluate(a("p ~> |0\\>"), w) == Tri::True);
  CHECK(evaluate(a("p |-> |0\\>"), w) == Tri::False);
  CHECK(!v.countermodel->describe().empty());
}

TEST_CASE("names outside the decidable fragment stay undecided") {
  Obligation ob = sequent({}, "Id(p, |0\\>)");
  ob.varCtx.push_back({"u", mk::unitary()});
  ob.conclusion = a("Id(u, u)");
  Verdict v = entails(ob);
  CHECK(std::string(toString(v.kind)) == "unknown");
  CHECK(v.residual);
}

TEST_CASE("entangled cells") {
  World w = bellWorld();
  CHECK(evaluate(a("entangled(p)"), w) == Tri::True);
  CHECK(evaluate(a("Id(p, |0\\>)"), w) == Tri::False);
  CHECK(satisfies(a("Id(p, q) /\\ p \\in {|0\\>, |1\\>}"), w) == Tri::True);
  CHECK(satisfies(a("Id(p, q) /\\ p \\in {|+\\>, |-\\>}"), w) == Tri::True);
  CHECK(satisfies(a("Id(p, |0\\>)"), w) != Tri::True);
  CHECK(evaluate(a("(p, q) |-> |\\Phi+\\>"), w) == Tri::True);
}

TEST_CASE("witnessed obligations check every branch") {
  Obligation ob = sequent({}, "Id(b, false)");
  ob.witnessed = true;
  World w;
  w.freeBools["b"] = true;
  ob.witness.push_back(w);
  Verdict v = entails(ob);
  CHECK(std::string(toString(v.kind)) == "refuted");
  REQUIRE(v.countermodel);
  CHECK(v.countermodel->describe() == "emp; b = true");
  w.facts.push_back(a("Id(b, false)"));
  ob.witness = {w};
  CHECK(std::string(toString(entails(ob).kind)) == "proved");
}

TEST_CASE("preset verdicts pass through") {
  Obligation ob = sequent({}, "F");
  Verdict preset;
  preset.kind = Verdict::Kind::Unknown;
  preset.reason = "opaque";
  ob.preset = preset;
  CHECK(entails(ob).reason == "opaque");
}

TEST_CASE("discharge summary") {
  DischargeReport r = dischargeAll({sequent({}, "T"), sequent({}, "emp")});
  CHECK(r.proved == 1);
  CHECK(r.refuted == 1);
  CHECK(r.status() == "refuted");
  CHECK(dischargeAll({sequent({}, "T")}).status() == "verified");
  CHECK(dischargeAll({}).status() == "verified");
}

TEST_CASE("heap expressions") {
  HeapPtr h = mk::upd(mk::upd(mk::hvar("h"), mk::v("q"), mk::ket(StateExpr::Kind::Ket0)), mk::v("p"),
                      mk::ket(StateExpr::Kind::Ket1));
  HeapPtr n = normalizeHeapExpr(mk::upd(h, mk::v("q"), mk::ket(StateExpr::Kind::KetPlus)));
  CHECK(pretty(*n) == "upd(upd(h, p, |1\\>), q, |+\\>)");
  auto sel = selectUpdate(n, mk::v("q"));
  REQUIRE(sel);
  CHECK(sel->kind == StateExpr::Kind::KetPlus);
  CHECK(!selectUpdate(n, mk::v("s")));
}

TEST_CASE("agreement with exhaustive enumeration") {
  auto r = qtest::propProverOracle(99, 250);
  INFO(r.firstFailure);
  CHECK(r.ok());
}
