#include "qhtt/driver.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "qhtt/pretty.hpp"
#include "qhtt/simulator.hpp"

namespace qhtt {

using json = nlohmann::ordered_json;

const DeclReport* Analysis::find(const Name& n) const {
  for (const auto& d : decls)
    if (d.name == n) return &d;
  return nullptr;
}

std::string Analysis::status() const {
  if (!program) return "parse-error";
  bool conditional = false, refuted = false;
  for (const auto& d : decls) {
    if (d.status == "type-error") return "type-error";
    refuted |= d.status == "refuted";
    conditional |= d.status == "conditional";
  }
  if (refuted) return "refuted";
  return conditional ? "conditional" : "verified";
}

int Analysis::exitCode(bool strict) const {
  std::string s = status();
  if (s == "parse-error" || s == "type-error") return kExitInvalid;
  if (s == "refuted" || (s == "conditional" && strict)) return kExitRefuted;
  return kExitOk;
}

Analysis analyze(const std::string& path, const std::string& source, const Flags& flags) {
  Analysis a;
  a.path = path;
  a.source = source;
  auto parsed = parseProgram(source);
  a.parseDiagnostics = parsed.diagnostics;
  if (!parsed.ok()) return a;
  a.program = std::make_unique<Program>(std::move(*parsed.value));
  CheckOptions opts;
  opts.refineMeasurement = !flags.literalMeasurement;
  a.checker = std::make_unique<Checker>(*a.program, opts);
  for (auto& r : a.checker->checkProgram()) {
    DeclReport d;
    d.name = r.name;
    d.discharge = dischargeAll(r.obligations);
    d.status = r.typeError ? "type-error" : d.discharge.status();
    d.result = std::move(r);
    a.decls.push_back(std::move(d));
  }
  return a;
}

namespace {

std::optional<std::string> readFile(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return std::nullopt;
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json spanJson(const Span& s) { return json{{"line", s.line}, {"col", s.col}, {"length", s.length}}; }

json diagnosticJson(const Diagnostic& d) {
  return json{{"severity", d.severity == Diagnostic::Severity::Error ? "error" : "warning"},
              {"message", d.message},
              {"span", spanJson(d.span)}};
}

std::string location(const std::string& path, const Span& s) {
  return path + ":" + std::to_string(s.line) + ":" + std::to_string(s.col);
}

struct Entry {
  const Obligation* ob;
  const Verdict* verdict;
};

std::vector<Entry> sortedObligations(const DeclReport& d) {
  std::vector<Entry> out;
  for (std::size_t i = 0; i < d.result.obligations.size(); ++i)
    out.push_back({&d.result.obligations[i], &d.discharge.verdicts[i]});
  std::stable_sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.ob->span.line, a.ob->span.col) < std::tie(b.ob->span.line, b.ob->span.col);
  });
  return out;
}

json obligationJson(const Entry& e) {
  json hyps = json::array();
  for (const auto& h : e.ob->hypotheses) hyps.push_back(pretty(*h));
  json j{{"decl", e.ob->decl},
         {"kind", toString(e.ob->kind)},
         {"hypotheses", hyps},
         {"conclusion", pretty(*e.ob->conclusion)},
         {"verdict", toString(e.verdict->kind)},
         {"residual", nullptr},
         {"span", spanJson(e.ob->span)}};
  if (e.verdict->kind == Verdict::Kind::Unknown && e.verdict->residual) j["residual"] = pretty(*e.verdict->residual);
  if (e.verdict->countermodel) j["countermodel"] = e.verdict->countermodel->describe();
  if (!e.verdict->reason.empty()) j["reason"] = e.verdict->reason;
  if (!e.ob->note.empty()) j["note"] = e.ob->note;
  return j;
}

void renderDiagnostics(const Analysis& a, std::string& err) {
  for (const auto& d : a.parseDiagnostics) err += render(d, a.path) + "\n";
  for (const auto& d : a.decls)
    for (const auto& g : d.result.diagnostics) err += render(g, a.path) + "\n";
}

json analysisJson(const Analysis& a) {
  json j{{"file", a.path}, {"status", a.status()}};
  json diags = json::array();
  for (const auto& d : a.parseDiagnostics) diags.push_back(diagnosticJson(d));
  j["diagnostics"] = diags;
  json decls = json::array();
  for (const auto& d : a.decls) {
    json obs = json::array();
    for (const auto& e : sortedObligations(d)) obs.push_back(obligationJson(e));
    json dd = json::array();
    for (const auto& g : d.result.diagnostics) dd.push_back(diagnosticJson(g));
    decls.push_back(json{{"name", d.name},
                         {"status", d.status},
                         {"proved", d.discharge.proved},
                         {"refuted", d.discharge.refuted},
                         {"unknown", d.discharge.unknown},
                         {"diagnostics", dd},
                         {"obligations", obs}});
  }
  j["declarations"] = decls;
  return j;
}

void renderCheckText(const Analysis& a, std::string& out) {
  for (const auto& d : a.decls) {
    out += a.path + ": " + d.name + ": " + d.status;
    if (d.status != "type-error")
      out += " (" + std::to_string(d.discharge.proved) + " proved, " + std::to_string(d.discharge.refuted) +
             " refuted, " + std::to_string(d.discharge.unknown) + " unknown)";
    out += "\n";
    for (const auto& e : sortedObligations(d)) {
      if (e.verdict->kind == Verdict::Kind::Proved) continue;
      out += "  " + location(a.path, e.ob->span) + ": " + toString(e.ob->kind) + " " + toString(e.verdict->kind) +
             ": " + pretty(*e.ob->conclusion) + "\n";
      if (!e.ob->note.empty()) out += "    note: " + e.ob->note + "\n";
      if (e.verdict->countermodel) out += "    countermodel: " + e.verdict->countermodel->describe() + "\n";
      else if (!e.verdict->reason.empty()) out += "    reason: " + e.verdict->reason + "\n";
    }
  }
}

template <class F>
Output guarded(F f) {
  try {
    return f();
  } catch (const std::exception& e) {
    Output o;
    o.exitCode = kExitInternal;
    o.err = std::string("internal error: ") + e.what() + "\n";
    return o;
  }
}

Output unreadable(const std::string& path) {
  Output o;
  o.exitCode = kExitInvalid;
  o.err = path + ": cannot read file\n";
  return o;
}

std::vector<std::string> splitLines(const std::string& s) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : s) {
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

}  // namespace

Output cmdCheck(const std::vector<std::string>& paths, const Flags& flags) {
  return guarded([&] {
    Output o;
    json all = json::array();
    for (const auto& p : paths) {
      auto src = readFile(p);
      if (!src) {
        Output u = unreadable(p);
        o.err += u.err;
        o.exitCode = std::max(o.exitCode, u.exitCode);
        continue;
      }
      Analysis a = analyze(p, *src, flags);
      renderDiagnostics(a, o.err);
      if (flags.json) all.push_back(analysisJson(a));
      else renderCheckText(a, o.out);
      o.exitCode = std::max(o.exitCode, a.exitCode(flags.strict));
    }
    if (flags.json) o.out = json{{"files", all}}.dump(2) + "\n";
    return o;
  });
}

Output cmdVcs(const std::vector<std::string>& paths, const Flags& flags) {
  return guarded([&] {
    Output o;
    json obs = json::array();
    for (const auto& p : paths) {
      auto src = readFile(p);
      if (!src) {
        Output u = unreadable(p);
        o.err += u.err;
        o.exitCode = std::max(o.exitCode, u.exitCode);
        continue;
      }
      Analysis a = analyze(p, *src, flags);
      renderDiagnostics(a, o.err);
      std::vector<std::pair<const DeclReport*, Entry>> entries;
      for (const auto& d : a.decls)
        for (const auto& e : sortedObligations(d)) entries.emplace_back(&d, e);
      std::stable_sort(entries.begin(), entries.end(), [](const auto& x, const auto& y) {
        return std::tie(x.second.ob->span.line, x.second.ob->span.col) <
               std::tie(y.second.ob->span.line, y.second.ob->span.col);
      });
      for (const auto& [d, e] : entries) {
        if (flags.json) {
          json j = obligationJson(e);
          j["file"] = p;
          obs.push_back(std::move(j));
          continue;
        }
        o.out += location(p, e.ob->span) + ": " + toString(e.ob->kind) + " [" + e.ob->decl + "] " +
                 toString(e.verdict->kind) + "\n";
        for (const auto& h : e.ob->hypotheses) o.out += "    hypothesis: " + pretty(*h) + "\n";
        o.out += "    conclusion: " + pretty(*e.ob->conclusion) + "\n";
        if (e.verdict->kind == Verdict::Kind::Unknown && e.verdict->residual)
          o.out += "    residual:   " + pretty(*e.verdict->residual) + "\n";
        if (e.verdict->countermodel) o.out += "    countermodel: " + e.verdict->countermodel->describe() + "\n";
      }
      o.exitCode = std::max(o.exitCode, a.exitCode(flags.strict));
    }
    if (flags.json) o.out = json{{"obligations", obs}}.dump(2) + "\n";
    return o;
  });
}

Output cmdTrace(const std::string& path, const Name& name, const Flags& flags) {
  return guarded([&] {
    Output o;
    auto src = readFile(path);
    if (!src) return unreadable(path);
    Analysis a = analyze(path, *src, flags);
    renderDiagnostics(a, o.err);
    if (!a.program) {
      o.exitCode = kExitInvalid;
      return o;
    }
    const DeclReport* d = a.find(name);
    const Decl* decl = a.program->find(name);
    if (!d || !decl) {
      o.err += path + ": no declaration named " + name + "\n";
      o.exitCode = kExitInvalid;
      return o;
    }
    if (d->status == "type-error") {
      o.exitCode = kExitInvalid;
      return o;
    }
    const auto& trace = d->result.trace;
    auto comment = [&](std::size_t k) {
      std::string text = "-- P" + std::to_string(k) + ": " + pretty(*trace[k].assertion);
      if (trace[k].refined) text += "  [refined]";
      return text;
    };
    if (flags.json) {
      json steps = json::array();
      for (std::size_t k = 0; k < trace.size(); ++k)
        steps.push_back(json{{"label", "P" + std::to_string(k)},
                             {"assertion", pretty(*trace[k].assertion)},
                             {"refined", trace[k].refined},
                             {"span", spanJson(trace[k].span)}});
      o.out = json{{"decl", name}, {"status", d->status}, {"steps", steps}}.dump(2) + "\n";
      o.exitCode = a.exitCode(flags.strict);
      return o;
    }
    std::vector<std::string> lines = splitLines(a.source);
    uint32_t first = decl->span.line, last = std::max(decl->span.endLine, decl->span.line);
    last = std::min<uint32_t>(last, static_cast<uint32_t>(lines.size()));
    uint32_t bodyLine = trace.size() > 1 ? trace[1].span.line : last + 1;
    std::size_t indent = trace.size() > 1 && trace[1].span.col > 0 ? trace[1].span.col - 1 : 4;
    std::string pad(indent, ' ');
    bool p0 = trace.empty();
    for (uint32_t ln = first; ln <= last; ++ln) {
      if (!p0 && ln == bodyLine) {
        o.out += pad + comment(0) + "\n";
        p0 = true;
      }
      o.out += lines[ln - 1] + "\n";
      for (std::size_t k = 1; k < trace.size(); ++k) {
        uint32_t end = std::max(trace[k].span.endLine, trace[k].span.line);
        if (end == ln) o.out += pad + comment(k) + "\n";
      }
    }
    if (!p0) o.out += pad + comment(0) + "\n";
    o.exitCode = a.exitCode(flags.strict);
    return o;
  });
}

Output cmdRun(const std::string& path, const Name& name, const Flags& flags) {
  return guarded([&] {
    Output o;
    auto src = readFile(path);
    if (!src) return unreadable(path);
    Analysis a = analyze(path, *src, flags);
    renderDiagnostics(a, o.err);
    if (!a.program) {
      o.exitCode = kExitInvalid;
      return o;
    }
    const DeclReport* d = a.find(name);
    const Decl* decl = a.program->find(name);
    if (!d || !decl) {
      o.err += path + ": no declaration named " + name + "\n";
      o.exitCode = kExitInvalid;
      return o;
    }
    if (d->status == "type-error") {
      o.exitCode = kExitInvalid;
      return o;
    }
    if (decl->signature->kind != Type::Kind::Hoare) {
      o.err += path + ": " + name + " takes arguments and cannot be run directly\n";
      o.exitCode = kExitInvalid;
      return o;
    }
    if (d->status == "refuted" && !flags.force) {
      o.err += path + ": " + name + " is refuted; use --force to run it anyway\n";
      o.exitCode = kExitRefuted;
      return o;
    }
    RunReport r = runProgram(*a.checker, name, flags.seed, flags.shots);
    if (flags.json) {
      json outcomes = json::array();
      for (const auto& [v, n] : r.outcomes) outcomes.push_back(json{{"value", v}, {"count", n}});
      json asserts = json::array();
      for (const auto& t : r.assertions)
        asserts.push_back(json{{"text", t.text}, {"pass", t.pass}, {"fail", t.fail}, {"uncheckable", t.uncheckable}});
      o.out = json{{"decl", r.decl},
                   {"seed", r.seed},
                   {"shots", r.shots},
                   {"outcomes", outcomes},
                   {"assertions", asserts},
                   {"errors", r.errors}}
                  .dump(2) +
              "\n";
    } else {
      o.out += "run " + r.decl + ": seed " + std::to_string(r.seed) + ", " + std::to_string(r.shots) + " shots\n";
      o.out += "outcomes:\n";
      for (const auto& [v, n] : r.outcomes) o.out += "  " + v + "  " + std::to_string(n) + "\n";
      o.out += "assertions:\n";
      for (const auto& t : r.assertions)
        o.out += "  " + t.text + "  pass " + std::to_string(t.pass) + "  fail " + std::to_string(t.fail) +
                 "  uncheckable " + std::to_string(t.uncheckable) + "\n";
      if (r.errors) o.out += "errors: " + std::to_string(r.errors) + " shots aborted\n";
    }
    for (std::size_t i = 0; i < r.perShot.size(); ++i)
      if (!r.perShot[i].error.empty()) {
        o.err += "shot " + std::to_string(i) + ": " + r.perShot[i].error + "\n";
        break;
      }
    o.exitCode = r.failures() > 0 || r.errors > 0 ? kExitRefuted : kExitOk;
    return o;
  });
}

}  // namespace qhtt
