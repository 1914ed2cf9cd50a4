#include <algorithm>

#include "doctest.h"
#include "qhtt/driver.hpp"
#include "qhtt/parser.hpp"
#include "qhtt/pretty.hpp"
#include "support.hpp"

using namespace qhtt;
using qtest::canonical;
using qtest::traceLines;

namespace {

AssertPtr parsed(const std::string& s) {
  auto r = parseAssertion(s);
  REQUIRE_MESSAGE(r.ok(), s);
  return *r.value;
}

Analysis analyzeFile(const std::string& path, Flags flags = {}) {
  return analyze(path, qtest::readFile(path), flags);
}

Analysis analyzeSource(const std::string& src, Flags flags = {}) { return analyze("inline.qh", src, flags); }

}  // namespace

TEST_CASE("testBell trace matches the golden trace") {
  Output o = cmdTrace(qtest::corpusDir() + "/testbell.qh", "testBell", {});
  REQUIRE(o.exitCode == 0);
  auto actual = traceLines(o.out);
  auto golden = traceLines(qtest::readFile(qtest::testsDir() + "/golden/testbell.trace"));
  REQUIRE(golden.size() == 6);
  REQUIRE(actual.size() == golden.size());
  for (std::size_t i = 0; i < golden.size(); ++i) {
    CAPTURE(golden[i].first);
    CHECK(actual[i].first == golden[i].first);
    CHECK(canonical(parsed(actual[i].second)) == canonical(parsed(golden[i].second)));
  }
  CHECK(canonical(parsed(actual[3].second)) != canonical(parsed(golden[4].second)));
}

TEST_CASE("alpha normalization used for trace comparison") {
  CHECK(canonical(parsed("P0 \\o (qa |-> |0\\>)")) == canonical(parsed("P0 \\o (x |-> |0\\>)")));
  CHECK(canonical(parsed("(a |-> |0\\>, b |-> |1\\>) -o emp")) ==
        canonical(parsed("(b |-> |1\\>, a |-> |0\\>) -o emp")));
  CHECK(canonical(parsed("(a |-> |0\\>, b |-> |1\\>) -o emp")) !=
        canonical(parsed("(a |-> |1\\>, b |-> |0\\>) -o emp")));
}

TEST_CASE("trace steps sit on the lines of their commands") {
  Analysis a = analyzeFile(qtest::corpusDir() + "/testbell.qh");
  const DeclReport* d = a.find("testBell");
  REQUIRE(d);
  REQUIRE(d->result.trace.size() == 6);
  for (std::size_t k = 1; k < 6; ++k) CHECK(d->result.trace[k].span.line == k + 1);
  CHECK(d->result.trace[5].refined);
}

TEST_CASE("hqw produces an allocation and a postcondition obligation") {
  Analysis a = analyzeFile(qtest::corpusDir() + "/hqw.qh");
  const DeclReport* d = a.find("hqw");
  REQUIRE(d);
  std::vector<Obligation::Kind> kinds;
  for (const auto& ob : d->result.obligations) kinds.push_back(ob.kind);
  CHECK(std::count(kinds.begin(), kinds.end(), Obligation::Kind::Allocation) == 1);
  CHECK(std::count(kinds.begin(), kinds.end(), Obligation::Kind::Postcondition) == 1);
  CHECK(d->status == "verified");
}

TEST_CASE("corpus statuses") {
  const std::pair<const char*, const char*> expected[] = {
      {"hqw", "verified"},   {"rnd", "verified"},         {"testBell", "verified"}, {"qplus", "verified"},
      {"qminus", "verified"}, {"share", "verified"},      {"bell", "verified"},     {"alice", "conditional"},
      {"bob", "conditional"}, {"teleport", "conditional"},
  };
  std::vector<Analysis> all;
  for (const char* f : {"hqw.qh", "rnd.qh", "bell.qh", "teleport.qh"}) all.push_back(analyzeFile(qtest::corpusDir() + "/" + f));
  for (const auto& [name, status] : expected) {
    CAPTURE(name);
    const DeclReport* found = nullptr;
    for (const auto& a : all)
      if (!found) found = a.find(name);
    REQUIRE(found);
    CHECK(found->status == status);
  }
}

TEST_CASE("unknown obligations keep a residual and a reason") {
  Analysis a = analyzeFile(qtest::corpusDir() + "/teleport.qh");
  int unknown = 0;
  for (const auto& d : a.decls)
    for (const auto& v : d.discharge.verdicts) {
      CHECK(std::string(toString(v.kind)) != "refuted");
      if (v.kind != Verdict::Kind::Unknown) continue;
      ++unknown;
      CHECK(v.residual);
      CHECK(!v.reason.empty());
    }
  CHECK(unknown > 0);
}

TEST_CASE("literal measurement mode loses the correlation") {
  Flags literal;
  literal.literalMeasurement = true;
  Analysis a = analyzeFile(qtest::corpusDir() + "/testbell.qh", literal);
  CHECK(a.find("testBell")->status == "conditional");
  CHECK(a.exitCode(false) == kExitOk);
  CHECK(a.exitCode(true) == kExitRefuted);
}

TEST_CASE("refuted programs report a countermodel") {
  Analysis a = analyzeFile(qtest::negativeDir() + "/refuted/hqw_true.qh");
  const DeclReport* d = a.find("hqw");
  REQUIRE(d);
  CHECK(d->status == "refuted");
  bool found = false;
  for (const auto& v : d->discharge.verdicts)
    if (v.kind == Verdict::Kind::Refuted) {
      REQUIRE(v.countermodel);
      CHECK(v.countermodel->describe() == "emp; r = false");
      found = true;
    }
  CHECK(found);
}

TEST_CASE("every refuted negative is refuted") {
  for (const char* f : {"hqw_true.qh", "leak.qh", "nonunitary.qh", "unallocated.qh", "param_unowned.qh",
                        "wrong_state.qh", "call_pre.qh"}) {
    CAPTURE(f);
    Analysis a = analyzeFile(qtest::negativeDir() + "/refuted/" + f);
    CHECK(a.status() == "refuted");
    CHECK(a.exitCode(false) == kExitRefuted);
  }
}

TEST_CASE("frame is preserved across calls") {
  Analysis a = analyzeSource(
      "qplus : {emp} r : Qbit {Id(r, |+\\>)}\n"
      "      = do q <= mkQbit false;\n"
      "           applyU (H q);\n"
      "           return q\n\n"
      "two : {emp} (a, b) : (Qbit, Qbit) {Id(a, |1\\>) /\\ Id(b, |+\\>)}\n"
      "    = do a <= mkQbit true;\n"
      "         b <- qplus;\n"
      "         return (a, b)\n");
  CHECK(a.find("two")->status == "verified");
}

TEST_CASE("too many branches collapse into an undecided obligation") {
  std::string body = "wide : {emp} r : Bool {emp}\n     = do ";
  for (int i = 0; i < 7; ++i)
    body += "q" + std::to_string(i) + " <= mkQbit false;\n          applyU (H q" + std::to_string(i) +
            ");\n          m" + std::to_string(i) + " <= measQbit q" + std::to_string(i) + ";\n          ";
  body += "return true\n";
  Analysis a = analyzeSource(body);
  const DeclReport* d = a.find("wide");
  REQUIRE(d);
  CHECK(d->status == "conditional");
  bool capped = false;
  for (const auto& ob : d->result.obligations) capped |= ob.preset && ob.preset->kind == Verdict::Kind::Unknown;
  CHECK(capped);
}

TEST_CASE("classical control on measurement outcomes") {
  Analysis a = analyzeSource(
      "reset : {emp} r : Bool {emp /\\ Id(r, false)}\n"
      "      = do q <= mkQbit false;\n"
      "           applyU (H q);\n"
      "           m <= measQbit q;\n"
      "           p <= mkQbit m;\n"
      "           if m then applyU (X p) else ();\n"
      "           measQbit p\n");
  CHECK(a.find("reset")->status == "verified");
}
