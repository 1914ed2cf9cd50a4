#include <filesystem>

#include "doctest.h"
#include "qhtt/parser.hpp"
#include "qhtt/pretty.hpp"
#include "support.hpp"

using namespace qhtt;
namespace fs = std::filesystem;

namespace {

Program parseOk(const std::string& src) {
  auto r = parseProgram(src);
  INFO(src);
  for (const auto& d : r.diagnostics) INFO(render(d, "src"));
  REQUIRE(r.ok());
  return *r.value;
}

AssertPtr assertion(const std::string& src) {
  auto r = parseAssertion(src);
  REQUIRE_MESSAGE(r.ok(), src);
  return *r.value;
}

}  // namespace

TEST_CASE("corpus files parse and survive a print/parse cycle") {
  for (const auto& entry : fs::directory_iterator(qtest::corpusDir())) {
    CAPTURE(entry.path().string());
    Program p = parseOk(qtest::readFile(entry.path()));
    CHECK(!p.decls.empty());
    Program again = parseOk(pretty(p));
    CHECK(equal(p, again));
  }
}

TEST_CASE("hqw") {
  Program p = parseOk("hqw : {emp} r : Bool {emp /\\ Id(r, false)}\n"
                      "    = do q <= mkQbit false;\n"
                      "         measQbit q\n");
  REQUIRE(p.decls.size() == 1);
  const Decl& d = p.decls[0];
  CHECK(d.name == "hqw");
  REQUIRE(d.signature->kind == Type::Kind::Hoare);
  CHECK(d.signature->resultType->kind == Type::Kind::Bool);
  CHECK(pretty(*d.signature->post) == "emp /\\ Id(r, false)");
  REQUIRE(d.body->kind == Intro::Kind::Do);
  CHECK(d.body->body->kind == Comp::Kind::BindCmd);
  CHECK(d.sigSpan.line == 1);
  CHECK(d.sigSpan.col == 7);
}

TEST_CASE("binder groups expand to nested products") {
  auto t = parseType("\\Pi m1 m2 : Bool. \\Pi e : Qbit. {entangled(e)} r : Qbit {Id(r, -)}");
  REQUIRE(t.ok());
  const Type& a = **t.value;
  REQUIRE(a.kind == Type::Kind::Pi);
  CHECK(a.binder == "m1");
  REQUIRE(a.right->kind == Type::Kind::Pi);
  CHECK(a.right->binder == "m2");
  CHECK(a.right->right->binder == "e");
  CHECK(a.right->right->right->kind == Type::Kind::Hoare);
}

TEST_CASE("a pair of measurements as the last step becomes binds") {
  Program p = parseOk("t : {emp} (a, b) : (Bool, Bool) {emp}\n"
                      "  = do qa <= mkQbit false;\n"
                      "       qb <= mkQbit false;\n"
                      "       (measQbit qa, measQbit qb)\n");
  const Comp* c = p.decls[0].body->body.get();
  int cmds = 0;
  while (c->kind != Comp::Kind::Return) {
    if (c->kind == Comp::Kind::BindCmd) ++cmds;
    c = c->rest.get();
  }
  CHECK(cmds == 4);
  CHECK(c->value->kind == Intro::Kind::Pair);
}

TEST_CASE("assertion precedence") {
  auto a = assertion("~p |-> |0\\> /\\ q ~> - \\/ emp => T");
  REQUIRE(a->kind == Assertion::Kind::Implies);
  REQUIRE(a->a->kind == Assertion::Kind::Or);
  REQUIRE(a->a->a->kind == Assertion::Kind::And);
  CHECK(a->a->a->a->kind == Assertion::Kind::Not);
  CHECK(a->b->kind == Assertion::Kind::Top);

  auto c = assertion("P4 \\o ((qa |-> -) -o emp) \\o ((qb |-> -) -o emp)");
  REQUIRE(c->kind == Assertion::Kind::Compose);
  CHECK(c->a->kind == Assertion::Kind::Compose);
  CHECK(c->a->a->kind == Assertion::Kind::Named);
  CHECK(c->b->kind == Assertion::Kind::Diff);

  auto s = assertion("(qa |-> |+\\>, qb |-> |0\\>) -o (qa, qb) |-> |\\Phi+\\>");
  REQUIRE(s->kind == Assertion::Kind::Diff);
  CHECK(s->a->kind == Assertion::Kind::Sep);
  CHECK(s->a->items.size() == 2);
  CHECK(s->b->kind == Assertion::Kind::PointsTo);
}

TEST_CASE("state literals") {
  auto a = assertion("q |-> |[0.6, -0.8i]\\>");
  REQUIRE(a->state.kind == StateExpr::Kind::Concrete);
  REQUIRE(a->state.amplitudes.size() == 2);
  CHECK(a->state.amplitudes[0] == Complex(0.6, 0));
  CHECK(a->state.amplitudes[1] == Complex(0, -0.8));
  CHECK(assertion("q \\in {|0\\>, |1\\>}")->candidates.size() == 2);
  CHECK(assertion("Id(q, x)")->right.term);
  CHECK(assertion("q |-> g")->state.kind == StateExpr::Kind::Ghost);
}

TEST_CASE("rotation matrices with complex entries") {
  auto m = parseIntro("rot q [[0.5+0.5i, 0.5-0.5i], [-1e-3, 2.5e2i]]");
  REQUIRE(m.ok());
  const auto& x = (*m.value)->matrix;
  CHECK(x[0] == Complex(0.5, 0.5));
  CHECK(x[1] == Complex(0.5, -0.5));
  CHECK(x[2] == Complex(-1e-3, 0));
  CHECK(x[3] == Complex(0, 250));
}

TEST_CASE("a name in column one starts the next declaration") {
  Program p = parseOk("a : {emp} r : Bool {emp}\n  = f\n\nb : {emp} r : Bool {emp}\n  = g x\n");
  REQUIRE(p.decls.size() == 2);
  CHECK(pretty(*p.decls[0].body) == "f");
  CHECK(pretty(*p.decls[1].body) == "g x");
}

TEST_CASE("a trailing dot after a number is punctuation") {
  auto a = assertion("forall x : 1 -> 1. emp");
  CHECK(a->kind == Assertion::Kind::ForallVar);
  CHECK(a->type->kind == Type::Kind::Pi);
}

TEST_CASE("diagnostics point at the offending token") {
  struct Case {
    const char* file;
    uint32_t line, col;
    const char* text;
  };
  const Case cases[] = {
      {"missing_eq.qh", 2, 7, "expected '='"},
      {"unclosed_pre.qh", 1, 12, "closing precondition"},
      {"bad_ket.qh", 1, 30, "ket"},
      {"missing_then.qh", 3, 19, "'then'"},
      {"unbalanced_paren.qh", 3, 27, "')'"},
      {"bad_matrix.qh", 3, 30, "matrix row"},
      {"bad_type.qh", 1, 17, "expected a type"},
  };
  for (const auto& c : cases) {
    CAPTURE(c.file);
    auto r = parseProgram(qtest::readFile(qtest::negativeDir() + "/invalid/" + c.file));
    REQUIRE(!r.diagnostics.empty());
    const auto& d = r.diagnostics[0];
    CHECK(d.span.line == c.line);
    CHECK(d.span.col == c.col);
    CHECK(d.message.find(c.text) != std::string::npos);
    CHECK(render(d, "f.qh").rfind("f.qh:" + std::to_string(c.line) + ":" + std::to_string(c.col) +
                                      ": error: ",
                                  0) == 0);
  }
}

TEST_CASE("empty input is an empty program") {
  auto r = parseProgram("-- nothing here\n");
  REQUIRE(r.ok());
  CHECK(r.value->decls.empty());
}
