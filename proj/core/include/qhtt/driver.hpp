#pragma once

// Front-end commands shared by the command-line tool and the tests.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qhtt/parser.hpp"
#include "qhtt/prover.hpp"
#include "qhtt/typechecker.hpp"

namespace qhtt {

struct Flags {
  bool strict = false;
  bool literalMeasurement = false;
  bool force = false;
  uint64_t seed = 0;
  int shots = 1000;
  bool json = false;
};

enum ExitCode { kExitOk = 0, kExitRefuted = 1, kExitInvalid = 2, kExitInternal = 3 };

struct Output {
  int exitCode = kExitOk;
  std::string out;
  std::string err;
};

struct DeclReport {
  Name name;
  std::string status;  // verified | conditional | refuted | type-error
  DeclResult result;
  DischargeReport discharge;
};

struct Analysis {
  std::string path;
  std::string source;
  std::unique_ptr<Program> program;
  std::vector<Diagnostic> parseDiagnostics;
  std::unique_ptr<Checker> checker;
  std::vector<DeclReport> decls;

  const DeclReport* find(const Name& n) const;
  // verified | conditional | refuted | type-error | parse-error
  std::string status() const;
  int exitCode(bool strict) const;
};

Analysis analyze(const std::string& path, const std::string& source, const Flags& flags);

Output cmdCheck(const std::vector<std::string>& paths, const Flags& flags);
Output cmdTrace(const std::string& path, const Name& decl, const Flags& flags);
Output cmdRun(const std::string& path, const Name& decl, const Flags& flags);
Output cmdVcs(const std::vector<std::string>& paths, const Flags& flags);

}  // namespace qhtt
