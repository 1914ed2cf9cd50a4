#pragma once

// Pretty-printer producing the ASCII surface syntax accepted by the parser.

#include <string>

#include "qhtt/ast.hpp"

namespace qhtt {

std::string pretty(const Type& t);
std::string pretty(const Pattern& p);
std::string pretty(const Elim& k);
std::string pretty(const Intro& m);
std::string pretty(const Command& c);
std::string pretty(const Comp& e);
std::string pretty(const StateExpr& s);
std::string pretty(const HeapExpr& h);
std::string pretty(const Assertion& p);
std::string pretty(const Decl& d);
std::string pretty(const Program& p);

template <class T>
std::string pretty(const std::shared_ptr<const T>& p) {
  return p ? pretty(*p) : std::string("<null>");
}

// Shortest text that parses back to the same double.
std::string formatNumber(double x);
std::string formatComplex(Complex z);

}  // namespace qhtt
