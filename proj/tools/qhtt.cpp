#include <iostream>

#include "CLI11.hpp"
#include "qhtt/driver.hpp"

namespace {

void addFlags(CLI::App* cmd, qhtt::Flags& flags, std::string& format) {
  cmd->add_flag("--strict", flags.strict, "treat conditional verification as failure");
  cmd->add_flag("--literal-measurement", flags.literalMeasurement,
                "use the unrefined measurement rule (no outcome case split)");
  cmd->add_option("--format", format, "output format")->check(CLI::IsMember({"text", "json"}));
}

int emit(const qhtt::Output& o) {
  std::cout << o.out;
  std::cerr << o.err;
  return o.exitCode;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qhtt: check, trace and run quantum Hoare type programs"};
  app.require_subcommand(1);
  qhtt::Flags flags;
  std::string format = "text";
  std::vector<std::string> files;
  std::string file, decl;

  auto* check = app.add_subcommand("check", "type-check a program and discharge its verification conditions");
  check->add_option("files", files, "source files")->required()->check(CLI::ExistingFile);
  addFlags(check, flags, format);

  auto* trace = app.add_subcommand("trace", "print a declaration with its strongest-postcondition annotations");
  trace->add_option("file", file, "source file")->required()->check(CLI::ExistingFile);
  trace->add_option("decl", decl, "declaration name")->required();
  addFlags(trace, flags, format);

  auto* run = app.add_subcommand("run", "simulate a declaration");
  run->add_option("file", file, "source file")->required()->check(CLI::ExistingFile);
  run->add_option("decl", decl, "declaration name")->required();
  run->add_option("--seed", flags.seed, "random seed")->default_val(0);
  run->add_option("--shots", flags.shots, "number of shots")->default_val(1000)->check(CLI::PositiveNumber);
  run->add_flag("--force", flags.force, "run even if verification refuted the declaration");
  addFlags(run, flags, format);

  auto* vcs = app.add_subcommand("vcs", "list verification conditions with their verdicts");
  vcs->add_option("files", files, "source files")->required()->check(CLI::ExistingFile);
  addFlags(vcs, flags, format);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : qhtt::kExitInvalid;
  }
  flags.json = format == "json";

  try {
    if (check->parsed()) return emit(qhtt::cmdCheck(files, flags));
    if (trace->parsed()) return emit(qhtt::cmdTrace(file, decl, flags));
    if (run->parsed()) return emit(qhtt::cmdRun(file, decl, flags));
    if (vcs->parsed()) return emit(qhtt::cmdVcs(files, flags));
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return qhtt::kExitInternal;
  }
  return qhtt::kExitInternal;
}
