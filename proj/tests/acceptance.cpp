#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <stdexcept>

#include "qhtt/driver.hpp"
#include "qhtt/linalg.hpp"
#include "qhtt/simulator.hpp"
#include "support.hpp"

using namespace qhtt;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double secondsSince(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

Analysis load(const std::string& path) { return analyze(path, qtest::readFile(path), {}); }

std::string corpus(const char* f) { return qtest::corpusDir() + "/" + f; }

int count(const RunReport& r, const std::string& value) {
  for (const auto& [v, n] : r.outcomes)
    if (v == value) return n;
  return 0;
}

std::vector<std::string> filesIn(const std::string& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".qh") out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

struct Outcome {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

Outcome verification() {
  Outcome v;
  const std::pair<const char*, std::vector<const char*>> groups[] = {
      {"hqw.qh", {"hqw"}},
      {"rnd.qh", {"rnd"}},
      {"testbell.qh", {"testBell"}},
      {"bell.qh", {"qplus", "qminus", "share", "bell", "testBell"}},
  };
  double worst = 0;
  for (const auto& [file, names] : groups) {
    auto t = Clock::now();
    Analysis a = load(corpus(file));
    double s = secondsSince(t);
    worst = std::max(worst, s);
    if (s >= 1.0) v.fail(std::string(file) + " took " + std::to_string(s) + "s");
    for (const char* n : names) {
      const DeclReport* d = a.find(n);
      if (!d) v.fail(std::string(n) + " missing");
      else if (d->status != "verified") v.fail(std::string(n) + " is " + d->status);
    }
  }
  if (v.pass) v.detail = "8 declarations verified, slowest file " + std::to_string(worst) + "s";
  return v;
}

Outcome goldenTrace() {
  Outcome v;
  Output o = cmdTrace(corpus("testbell.qh"), "testBell", {});
  if (o.exitCode != kExitOk) v.fail("trace exited " + std::to_string(o.exitCode));
  std::string diff = qtest::traceMismatch(o.out, qtest::readFile(qtest::testsDir() + "/golden/testbell.trace"));
  if (!diff.empty()) v.fail(diff);
  if (v.pass) v.detail = "P0..P5 match after alpha-normalization";
  return v;
}

Outcome negatives() {
  Outcome v;
  int n = 0;
  for (const auto& [dir, want] : {std::pair{"refuted", int(kExitRefuted)}, std::pair{"invalid", int(kExitInvalid)}}) {
    for (const auto& f : filesIn(qtest::negativeDir() + "/" + dir)) {
      ++n;
      int got = cmdCheck({f}, {}).exitCode;
      if (got != want) v.fail(fs::path(f).filename().string() + " exited " + std::to_string(got));
    }
  }
  if (cmdCheck({qtest::negativeDir() + "/no_such_file.qh"}, {}).exitCode != kExitInvalid) v.fail("missing file");
  if (v.pass) v.detail = std::to_string(n) + " negative programs rejected";
  return v;
}

Outcome simulation() {
  Outcome v;
  auto t = Clock::now();
  Analysis hqw = load(corpus("hqw.qh"));
  RunReport r = runProgram(*hqw.checker, "hqw", 0, 1000);
  if (count(r, "false") != 1000) v.fail("hqw returned true");
  for (const char* f : {"testbell.qh", "bell.qh"}) {
    Analysis a = load(corpus(f));
    r = runProgram(*a.checker, "testBell", 0, 1000);
    if (count(r, "(false, false)") + count(r, "(true, true)") != 1000) v.fail(std::string(f) + ": a != b");
  }
  Analysis rnd = load(corpus("rnd.qh"));
  std::string fractions;
  for (uint64_t seed : {0, 1, 2}) {
    r = runProgram(*rnd.checker, "rnd", seed, 10000);
    double f = count(r, "true") / 10000.0;
    fractions += " " + std::to_string(f);
    if (f < 0.48 || f > 0.52) v.fail("rnd seed " + std::to_string(seed) + " gave " + std::to_string(f));
  }
  double s = secondsSince(t);
  if (s >= 5.0) v.fail("took " + std::to_string(s) + "s");
  if (v.pass) v.detail = "rnd fractions" + fractions + ", " + std::to_string(s) + "s";
  return v;
}

Outcome teleport() {
  Outcome v;
  Analysis a = load(corpus("teleport.qh"));
  const DeclReport* d = a.find("teleport");
  if (!d) {
    v.fail("teleport missing");
    return v;
  }
  if (d->status != "verified" && d->status != "conditional") v.fail("static status " + d->status);
  qtest::Gen g(2718);
  double worst = 1.0;
  for (int i = 0; i < 100; ++i) {
    Machine m(*a.checker, shotSeed(2718, i));
    Matrix2 u = qtest::randomUnitary(g);
    m.state.alloc(false);
    m.state.apply(*umk::rot("#0", u));
    auto q = qubitIndex(m.call("teleport", {mk::v("#0")}));
    if (!q) {
      v.fail("no qubit returned");
      break;
    }
    double fid = linalg::fidelity(m.state.reducedDensity({*q}), {u[0], u[2]});
    worst = std::min(worst, fid);
  }
  if (worst < 1 - 1e-9) v.fail("fidelity " + std::to_string(worst));
  if (v.pass) v.detail = "100 states, static status " + d->status;
  return v;
}

Outcome properties() {
  Outcome v;
  for (const auto& p : qtest::allProperties(20260, 300)) {
    if (p.cases < 200) v.fail(p.name + " ran " + std::to_string(p.cases) + " cases");
    if (!p.ok()) v.fail(p.name + ": " + p.firstFailure);
    if (v.pass) v.detail += (v.detail.empty() ? "" : ", ") + p.name + " " + std::to_string(p.cases);
  }
  return v;
}

Outcome soundness() {
  Outcome v;
  int entries = 0;
  for (const auto& f : filesIn(qtest::corpusDir())) {
    Analysis a = load(f);
    for (const auto& d : a.decls) {
      if (d.status != "verified") continue;
      try {
        runProgram(*a.checker, d.name, 0, 1);
      } catch (const std::invalid_argument&) {
        continue;
      }
      ++entries;
      for (uint64_t seed = 0; seed < 100; ++seed) {
        RunReport r = runProgram(*a.checker, d.name, seed, 1000);
        if (r.failures() || r.errors) {
          v.fail(d.name + " failed at seed " + std::to_string(seed));
          break;
        }
      }
    }
  }
  if (entries == 0) v.fail("no runnable verified declarations");
  if (v.pass) v.detail = std::to_string(entries) + " entry points, 100 seeds x 1000 shots";
  return v;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"verification", verification}, {"golden trace", goldenTrace}, {"negatives", negatives},
      {"simulation", simulation},     {"teleport", teleport},       {"properties", properties},
      {"soundness", soundness},
  };
  int failed = 0;
  for (std::size_t i = 0; i < std::size(criteria); ++i) {
    Outcome v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.fail(std::string("exception: ") + e.what());
    }
    failed += !v.pass;
    std::printf("criterion %zu (%s): %s - %s\n", i + 1, criteria[i].first, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
