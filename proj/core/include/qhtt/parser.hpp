#pragma once

// Parser for `.qh` source files written in the ASCII listing notation.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qhtt/ast.hpp"

namespace qhtt {

struct Diagnostic {
  enum class Severity { Error, Warning };
  Severity severity = Severity::Error;
  std::string message;
  Span span;
};

// Renders `file:line:col: severity: message`.
std::string render(const Diagnostic& d, std::string_view file);

template <class T>
struct ParseResult {
  std::optional<T> value;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return value.has_value() && diagnostics.empty(); }
};

ParseResult<Program> parseProgram(std::string_view source);
ParseResult<AssertPtr> parseAssertion(std::string_view source);
ParseResult<TypePtr> parseType(std::string_view source);
ParseResult<IntroPtr> parseIntro(std::string_view source);

}  // namespace qhtt
