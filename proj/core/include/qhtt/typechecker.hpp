#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "qhtt/ast.hpp"
#include "qhtt/parser.hpp"
#include "qhtt/prover.hpp"
#include "qhtt/symheap.hpp"

namespace qhtt {

struct TypeError : std::runtime_error {
  Span span;
  TypeError(const std::string& msg, Span s) : std::runtime_error(msg), span(s) {}
};

struct SynthResult {
  TypePtr type;
  IntroPtr canonical;
};

struct TraceStep {
  Span span;
  AssertPtr assertion;  // in terms of the previous step, named P<k-1>
  bool refined = false;
};

struct CompResult {
  std::vector<Name> resultNames;
  TypePtr resultType;
  AssertPtr strongestPost;
  std::vector<Obligation> obligations;
  std::vector<TraceStep> trace;
};

struct CheckOptions {
  bool refineMeasurement = true;
  std::size_t branchCap = 64;
};

struct DeclResult {
  Name name;
  bool typeError = false;
  std::vector<Diagnostic> diagnostics;
  std::vector<Obligation> obligations;
  std::vector<TraceStep> trace;
  IntroPtr canonical;
};

class Checker {
 public:
  explicit Checker(const Program& p, CheckOptions opts = {});

  SynthResult synth(const VarContext& ctx, const ElimPtr& k);
  IntroPtr check(const VarContext& ctx, const IntroPtr& m, const TypePtr& a);
  // Beta-normal, eta-long form of m at type a.
  IntroPtr normalize(const IntroPtr& m, const TypePtr& a, const VarContext& ctx = {});
  // Beta-normal form; top-level definitions of non-Hoare type are unfolded,
  // and all of them when unfoldAll is set.
  IntroPtr reduce(const IntroPtr& m, bool unfoldAll = false);

  CompResult synthComputation(const VarContext& ctx, const AssertPtr& pre, const CompPtr& e,
                              const VarContext& ghosts = {});
  CompResult checkComputation(const VarContext& ctx, const TypePtr& hoare, const CompPtr& e);

  DeclResult checkDecl(const Decl& d);
  std::vector<DeclResult> checkProgram();

  const Program& program() const { return program_; }
  static const VarContext& builtins();

 private:
  struct Global {
    TypePtr type;
    IntroPtr body;  // canonical
    bool unfold = false;
  };
  struct Exec;

  const Program& program_;
  CheckOptions opts_;
  std::map<Name, Global> globals_;
  std::string currentDecl_;
  std::vector<Obligation>* sink_ = nullptr;
  std::vector<TraceStep>* traceSink_ = nullptr;
  int fresh_ = 0;

  TypePtr lookup(const VarContext& ctx, const Name& x) const;
  void wellFormed(const VarContext& ctx, const TypePtr& t, Span s);
  void checkLocation(const VarContext& ctx, const IntroPtr& loc, Span s) const;
  void checkLocations(const VarContext& ctx, const Assertion& p, Span s) const;
  void wellScoped(const VarContext& ctx, const AssertPtr& p, const NameSet& extra, Span s);
  TypePtr synthIntro(const VarContext& ctx, const IntroPtr& m);
  IntroPtr reduceIn(const IntroPtr& m, bool unfoldAll, const NameSet& bound);
  IntroPtr reduceElim(const ElimPtr& k, bool unfoldAll, const NameSet& bound);
  IntroPtr applyReduced(const IntroPtr& f, const IntroPtr& a, bool unfoldAll, const NameSet& bound);
  IntroPtr etaLong(const IntroPtr& n, const TypePtr& a, const VarContext& ctx);
  IntroPtr etaSpine(const IntroPtr& n, const VarContext& ctx);
  Name freshName(const std::string& base);
};

bool typeEqual(const TypePtr& a, const TypePtr& b);

}  // namespace qhtt
