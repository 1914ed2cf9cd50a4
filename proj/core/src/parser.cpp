#include "qhtt/parser.hpp"

#include <charconv>
#include <map>
#include <stdexcept>
#include <set>

namespace qhtt {

std::string render(const Diagnostic& d, std::string_view file) {
  std::string s(file);
  s += ":" + std::to_string(d.span.line) + ":" + std::to_string(d.span.col) + ": ";
  s += d.severity == Diagnostic::Severity::Error ? "error: " : "warning: ";
  return s + d.message;
}

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok {
  LBrace, RBrace, LParen, RParen, LBracket, RBracket, Comma, Semi, Dot, Colon, Eq,
  BindCmd, BindRun, Implies, Arrow, Lambda, And, Or, Not, MapsTo, LookupArrow,
  Compose, Diff, In, Pi, Ket, KetOpen, KetClose, Minus, Plus, Question, Number, Imag, Ident, Keyword, Eof,
};

struct Token {
  Tok kind;
  std::string text;
  StateExpr::Kind ket = StateExpr::Kind::Ket0;
  uint32_t line, col, length;
};

const std::set<std::string, std::less<>> kKeywords = {
    "emp", "empty", "upd", "do", "return", "if", "then", "else", "true", "false",
    "mkQbit", "measQbit", "applyU", "exists", "forall", "Bool", "Qbit", "U", "Pure",
    "heap", "Id", "HId", "indom", "entangled", "rot",
};

bool identStart(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '%'; }
bool identChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '%' || c == '\'';
}

class Lexer {
 public:
  Lexer(std::string_view src, std::vector<Diagnostic>& diags) : src_(src), diags_(diags) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skipSpaceAndComments();
      if (pos_ >= src_.size()) {
        out.push_back({Tok::Eof, "", {}, line_, col_, 0});
        return out;
      }
      if (auto t = next()) out.push_back(*t);
    }
  }

 private:
  std::string_view src_;
  std::vector<Diagnostic>& diags_;
  std::size_t pos_ = 0;
  uint32_t line_ = 1, col_ = 1;

  char peek(std::size_t k = 0) const { return pos_ + k < src_.size() ? src_[pos_ + k] : '\0'; }
  bool startsWith(std::string_view s) const { return src_.substr(pos_, s.size()) == s; }

  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  void skipSpaceAndComments() {
    while (pos_ < src_.size()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance(1);
      } else if (c == '-' && peek(1) == '-') {
        while (pos_ < src_.size() && peek() != '\n') advance(1);
      } else {
        break;
      }
    }
  }

  Token make(Tok k, std::size_t len, std::string text = {}) {
    Token t{k, text.empty() ? std::string(src_.substr(pos_, len)) : std::move(text), {}, line_, col_,
            static_cast<uint32_t>(len)};
    advance(len);
    return t;
  }

  std::optional<Token> next() {
    struct Fixed { std::string_view text; Tok kind; };
    static const Fixed fixed[] = {
        {"|->", Tok::MapsTo}, {"<=", Tok::BindCmd}, {"<-", Tok::BindRun}, {"=>", Tok::Implies},
        {"->", Tok::Arrow},   {"/\\", Tok::And},    {"\\/", Tok::Or},     {"~>", Tok::LookupArrow},
        {"|[", Tok::KetOpen}, {"]\\>", Tok::KetClose},
    };
    for (const auto& f : fixed)
      if (startsWith(f.text)) return make(f.kind, f.text.size());

    char c = peek();
    // Kets.
    if (c == '|') {
      static const std::pair<std::string_view, StateExpr::Kind> kets[] = {
          {"|0\\>", StateExpr::Kind::Ket0},       {"|1\\>", StateExpr::Kind::Ket1},
          {"|+\\>", StateExpr::Kind::KetPlus},    {"|-\\>", StateExpr::Kind::KetMinus},
          {"|\\Phi+\\>", StateExpr::Kind::KetPhiPlus},
      };
      for (const auto& [text, kind] : kets) {
        if (startsWith(text)) {
          auto t = make(Tok::Ket, text.size());
          t.ket = kind;
          return t;
        }
      }
      std::size_t end = src_.find("\\>", pos_);
      std::size_t eol = src_.find('\n', pos_);
      std::size_t n = end != std::string_view::npos && end < eol ? end + 2 - pos_ : 1;
      diags_.push_back({Diagnostic::Severity::Error, "unrecognized ket literal '" + std::string(src_.substr(pos_, n)) + "'",
                        {line_, col_, static_cast<uint32_t>(n), line_}});
      advance(n);
      return std::nullopt;
    }
    if (c == '-' && peek(1) == 'o' && !identChar(peek(2))) return make(Tok::Diff, 2);
    if (c == '\\') {
      std::size_t n = 1;
      while (std::isalpha(static_cast<unsigned char>(peek(n)))) ++n;
      std::string_view word = src_.substr(pos_ + 1, n - 1);
      if (word == "o") return make(Tok::Compose, 2);
      if (word == "in") return make(Tok::In, 3);
      if (word == "Pi") return make(Tok::Pi, 3);
      if (identStart(peek(1))) return make(Tok::Lambda, 1);
      if (word.empty()) return error("stray backslash");
      return error("unknown keyword '\\" + std::string(word) + "'");
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t n = 0;
      while (std::isdigit(static_cast<unsigned char>(peek(n)))) ++n;
      if (peek(n) == '.' && std::isdigit(static_cast<unsigned char>(peek(n + 1)))) {
        ++n;
        while (std::isdigit(static_cast<unsigned char>(peek(n)))) ++n;
      }
      if (peek(n) == 'e' || peek(n) == 'E') {
        std::size_t m = n + 1;
        if (peek(m) == '+' || peek(m) == '-') ++m;
        if (std::isdigit(static_cast<unsigned char>(peek(m)))) {
          n = m;
          while (std::isdigit(static_cast<unsigned char>(peek(n)))) ++n;
        }
      }
      if (peek(n) == 'i' && !identChar(peek(n + 1))) {
        auto t = make(Tok::Imag, n + 1);
        t.text.pop_back();
        return t;
      }
      return make(Tok::Number, n);
    }
    if (identStart(c)) {
      std::size_t n = 0;
      while (identChar(peek(n))) ++n;
      std::string word(src_.substr(pos_, n));
      return make(kKeywords.count(word) ? Tok::Keyword : Tok::Ident, n);
    }
    switch (c) {
      case '{': return make(Tok::LBrace, 1);
      case '}': return make(Tok::RBrace, 1);
      case '(': return make(Tok::LParen, 1);
      case ')': return make(Tok::RParen, 1);
      case '[': return make(Tok::LBracket, 1);
      case ']': return make(Tok::RBracket, 1);
      case ',': return make(Tok::Comma, 1);
      case ';': return make(Tok::Semi, 1);
      case '.': return make(Tok::Dot, 1);
      case ':': return make(Tok::Colon, 1);
      case '=': return make(Tok::Eq, 1);
      case '~': return make(Tok::Not, 1);
      case '-': return make(Tok::Minus, 1);
      case '+': return make(Tok::Plus, 1);
      case '?': return make(Tok::Question, 1);
      default: break;
    }
    return error(std::string("unexpected character '") + c + "'");
  }

  std::optional<Token> error(std::string msg) {
    diags_.push_back({Diagnostic::Severity::Error, std::move(msg), {line_, col_, 1, line_}});
    advance(1);
    return std::nullopt;
  }
};

// ---------------------------------------------------------------------------
// Parser

struct ParseError : std::runtime_error {
  Span span;
  ParseError(std::string msg, Span s) : std::runtime_error(std::move(msg)), span(s) {}
};

class Parser {
 public:
  Parser(std::vector<Token> toks, std::vector<Diagnostic>& diags)
      : toks_(std::move(toks)), diags_(diags) {
    for (const auto& t : toks_) {
      if (t.kind == Tok::Ident && t.text.size() > 1 && t.text[0] == '%') {
        int n = 0;
        auto r = std::from_chars(t.text.data() + 1, t.text.data() + t.text.size(), n);
        if (r.ec == std::errc() && r.ptr == t.text.data() + t.text.size())
          fresh_ = std::max(fresh_, n);
      }
    }
  }

  Program program() {
    Program p;
    std::set<Name> seen;
    while (!at(Tok::Eof)) {
      std::size_t start = pos_;
      try {
        Decl d = decl();
        if (seen.count(d.name)) {
          diags_.push_back({Diagnostic::Severity::Error,
                            "duplicate declaration '" + d.name + "'", d.span});
        } else {
          seen.insert(d.name);
          p.decls.push_back(std::move(d));
        }
      } catch (const ParseError& e) {
        diags_.push_back({Diagnostic::Severity::Error, e.what(), e.span});
        // Resume at the next token in column 1 (the next declaration).
        if (pos_ == start) ++pos_;
        while (!at(Tok::Eof) && cur().col != 1) ++pos_;
      }
    }
    return p;
  }

  template <class F>
  auto whole(F f) {
    auto r = f();
    if (!at(Tok::Eof)) fail("unexpected '" + cur().text + "' after end of input");
    return r;
  }

  TypePtr type() {
    TypePtr t = typeNoArrow();
    if (accept(Tok::Arrow)) return mk::arrow(t, type());
    return t;
  }

  AssertPtr assertion() { return composeLevel(); }

  IntroPtr intro() {
    if (atKw("do")) {
      Token t = cur();
      ++pos_;
      auto m = mk::doE(computation());
      return withSpan(m, t);
    }
    if (at(Tok::Lambda)) {
      ++pos_;
      Name x = ident("lambda binder");
      expect(Tok::Dot, "'.' after lambda binder");
      return mk::lam(x, intro());
    }
    if (atKw("if")) {
      ++pos_;
      auto c = intro();
      expectKw("then");
      auto t = intro();
      expectKw("else");
      return mk::ifTerm(c, t, intro());
    }
    return application();
  }

 private:
  std::vector<Token> toks_;
  std::vector<Diagnostic>& diags_;
  std::size_t pos_ = 0;
  int fresh_ = 0;
  // Set while parsing a computation step outside parentheses: a line break
  // ends an application.
  bool stopAtNewline_ = false;
  uint32_t stepLine_ = 0;
  // Commands used in value position inside the current step.
  std::vector<std::pair<Name, std::shared_ptr<const Command>>>* pending_ = nullptr;

  const Token& cur() const { return toks_[pos_]; }
  const Token& peekTok(std::size_t k) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool at(Tok k) const { return cur().kind == k; }
  bool atKw(std::string_view kw) const { return cur().kind == Tok::Keyword && cur().text == kw; }
  bool accept(Tok k) {
    if (!at(k)) return false;
    ++pos_;
    return true;
  }
  Span spanOf(const Token& t) const { return {t.line, t.col, t.length, t.line}; }

  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = cur();
    if (t.kind == Tok::Eof) throw ParseError(msg + " (unexpected end of input)", spanOf(t));
    throw ParseError(msg, spanOf(t));
  }

  void expect(Tok k, const std::string& what) {
    if (!accept(k)) fail("expected " + what + ", found '" + cur().text + "'");
  }
  void expectKw(std::string_view kw) {
    if (!atKw(kw)) fail("expected '" + std::string(kw) + "', found '" + cur().text + "'");
    ++pos_;
  }
  Name ident(const std::string& what) {
    if (!at(Tok::Ident)) fail("expected " + what + ", found '" + cur().text + "'");
    return toks_[pos_++].text;
  }

  Name freshName() { return "%" + std::to_string(++fresh_); }

  IntroPtr withSpan(IntroPtr m, const Token& t) {
    auto c = std::make_shared<Intro>(*m);
    c->span = spanOf(t);
    return c;
  }

  // --- declarations -------------------------------------------------------

  Decl decl() {
    Decl d;
    const Token& start = cur();
    if (start.kind != Tok::Ident) fail("expected declaration name, found '" + start.text + "'");
    d.name = start.text;
    ++pos_;
    expect(Tok::Colon, "':' after declaration name");
    const Token& sigStart = cur();
    d.signature = type();
    const Token& sigEnd = toks_[pos_ - 1];
    d.sigSpan = {sigStart.line, sigStart.col, 0, sigEnd.line};
    expect(Tok::Eq, "'=' before declaration body");
    d.body = intro();
    const Token& last = toks_[pos_ - 1];
    d.span = {start.line, start.col, 0, last.line};
    if (!at(Tok::Eof) && cur().col != 1)
      fail("unexpected '" + cur().text + "' after declaration body");
    return d;
  }

  // --- types --------------------------------------------------------------

  bool atHoareStart() const {
    if (at(Tok::LBrace)) return true;
    return at(Tok::Ident) && peekTok(1).kind == Tok::Colon;
  }

  TypePtr typeNoArrow() {
    if (accept(Tok::Pi)) {
      std::vector<Name> names;
      names.push_back(ident("binder after \\Pi"));
      while (at(Tok::Ident)) names.push_back(ident("binder"));
      expect(Tok::Colon, "':' in \\Pi binder");
      TypePtr dom = type();
      expect(Tok::Dot, "'.' after \\Pi binder type");
      TypePtr cod = type();
      for (auto it = names.rbegin(); it != names.rend(); ++it) cod = mk::pi(*it, dom, cod);
      return cod;
    }
    if (atHoareStart()) return hoareType();
    return typeAtom();
  }

  TypePtr hoareType() {
    VarContext vars;
    HeapContext heaps;
    while (at(Tok::Ident) && peekTok(1).kind == Tok::Colon) {
      Name n = ident("context binder");
      ++pos_;
      if (atKw("heap")) {
        ++pos_;
        heaps.push_back(n);
      } else {
        vars.push_back({n, type()});
      }
      expect(Tok::Dot, "'.' after context binder");
    }
    expect(Tok::LBrace, "'{' opening precondition");
    AssertPtr pre = assertion();
    expect(Tok::RBrace, "'}' closing precondition");
    PatternPtr res = pattern();
    expect(Tok::Colon, "':' after result binder");
    TypePtr rt = type();
    expect(Tok::LBrace, "'{' opening postcondition");
    AssertPtr post = assertion();
    expect(Tok::RBrace, "'}' closing postcondition");
    return mk::hoare(std::move(vars), std::move(heaps), pre, res, rt, post);
  }

  TypePtr typeAtom() {
    if (at(Tok::Number) && cur().text == "1") {
      ++pos_;
      return mk::unit();
    }
    if (atKw("Bool")) { ++pos_; return mk::boolean(); }
    if (atKw("Qbit")) { ++pos_; return mk::qbit(); }
    if (atKw("U")) { ++pos_; return mk::unitary(); }
    if (atKw("Pure")) { ++pos_; return mk::pure(); }
    if (accept(Tok::LParen)) {
      std::vector<TypePtr> parts{type()};
      while (accept(Tok::Comma)) parts.push_back(type());
      expect(Tok::RParen, "')' closing type");
      TypePtr t = parts.back();
      for (auto it = parts.rbegin() + 1; it != parts.rend(); ++it) t = mk::tensor(*it, t);
      return t;
    }
    fail("expected a type, found '" + cur().text + "'");
  }

  PatternPtr pattern() {
    if (accept(Tok::LParen)) {
      std::vector<PatternPtr> parts{pattern()};
      while (accept(Tok::Comma)) parts.push_back(pattern());
      expect(Tok::RParen, "')' closing pattern");
      if (parts.size() < 2) return parts[0];
      PatternPtr p = parts.back();
      for (auto it = parts.rbegin() + 1; it != parts.rend(); ++it) p = mk::patPair(*it, p);
      return p;
    }
    return mk::pat(ident("binder"));
  }

  // --- terms --------------------------------------------------------------

  bool startsAtom() const {
    switch (cur().kind) {
      case Tok::Ident: case Tok::LParen: return true;
      case Tok::Keyword:
        return cur().text == "true" || cur().text == "false" ||
               (pending_ && (cur().text == "mkQbit" || cur().text == "measQbit" ||
                             cur().text == "applyU"));
      default: return false;
    }
  }

  // Continuation lines are indented; column 1 starts the next declaration.
  bool newlineStop() const {
    if (cur().col == 1 && pos_ > 0 && toks_[pos_ - 1].line != cur().line) return true;
    return stopAtNewline_ && cur().line != stepLine_;
  }

  IntroPtr application() {
    const Token& start = cur();
    if (atKw("rot")) {
      ++pos_;
      auto target = atom();
      Matrix2 m = matrix();
      return withSpan(mk::rot(target, m), start);
    }
    IntroPtr head = atom();
    if (!startsAtom() || newlineStop()) return head;
    if (head->kind != Intro::Kind::FromElim)
      fail("application head must be an elimination term; add a type ascription");
    ElimPtr k = head->elim;
    while (startsAtom() && !newlineStop()) k = mk::app(k, atom(), spanOf(start));
    return mk::fromElim(k);
  }

  IntroPtr atom() {
    const Token& t = cur();
    if (at(Tok::Ident)) {
      ++pos_;
      return mk::fromElim(mk::var(t.text, spanOf(t)));
    }
    if (atKw("true")) { ++pos_; return withSpan(mk::boolean(true), t); }
    if (atKw("false")) { ++pos_; return withSpan(mk::boolean(false), t); }
    if (pending_ && (atKw("mkQbit") || atKw("measQbit") || atKw("applyU"))) {
      auto c = command();
      Name x = freshName();
      pending_->emplace_back(x, c);
      return mk::fromElim(mk::var(x, spanOf(t)));
    }
    if (accept(Tok::LParen)) {
      bool saved = stopAtNewline_;
      stopAtNewline_ = false;
      if (accept(Tok::RParen)) {
        stopAtNewline_ = saved;
        return withSpan(mk::unitVal(), t);
      }
      IntroPtr first = intro();
      IntroPtr result;
      if (accept(Tok::Colon)) {
        TypePtr ty = type();
        result = mk::fromElim(mk::ascribe(first, ty, spanOf(t)));
      } else if (at(Tok::Comma)) {
        std::vector<IntroPtr> parts{first};
        while (accept(Tok::Comma)) parts.push_back(intro());
        result = parts.back();
        for (auto it = parts.rbegin() + 1; it != parts.rend(); ++it) result = mk::pair(*it, result);
      } else {
        result = first;
      }
      expect(Tok::RParen, "')'");
      stopAtNewline_ = saved;
      return result;
    }
    fail("expected a term, found '" + t.text + "'");
  }

  double number() {
    const Token& t = cur();
    double x = 0;
    auto r = std::from_chars(t.text.data(), t.text.data() + t.text.size(), x);
    if (r.ec != std::errc() || r.ptr != t.text.data() + t.text.size())
      fail("malformed number '" + t.text + "'");
    ++pos_;
    return x;
  }

  Complex complexLiteral() {
    double sign = accept(Tok::Minus) ? -1.0 : 1.0;
    if (at(Tok::Imag)) return {0.0, sign * number()};
    if (!at(Tok::Number)) fail("expected a number");
    double re = sign * number();
    if ((at(Tok::Plus) || at(Tok::Minus)) && peekTok(1).kind == Tok::Imag) {
      double s = at(Tok::Minus) ? -1.0 : 1.0;
      ++pos_;
      return {re, s * number()};
    }
    return {re, 0.0};
  }

  Matrix2 matrix() {
    Matrix2 m{};
    expect(Tok::LBracket, "'[' opening matrix");
    for (int row = 0; row < 2; ++row) {
      if (row) expect(Tok::Comma, "',' between matrix rows");
      expect(Tok::LBracket, "'[' opening matrix row");
      m[row * 2] = complexLiteral();
      expect(Tok::Comma, "',' between matrix entries");
      m[row * 2 + 1] = complexLiteral();
      expect(Tok::RBracket, "']' closing matrix row");
    }
    expect(Tok::RBracket, "']' closing matrix");
    return m;
  }

  // --- commands and computations -------------------------------------------

  bool atCommand() const {
    return atKw("mkQbit") || atKw("measQbit") || atKw("applyU") || atKw("if");
  }

  std::shared_ptr<const Command> command() {
    const Token& t = cur();
    std::shared_ptr<const Command> c;
    if (atKw("mkQbit")) { ++pos_; c = mk::mkQbit(atom()); }
    else if (atKw("measQbit")) { ++pos_; c = mk::measQbit(atom()); }
    else if (atKw("applyU")) { ++pos_; c = mk::applyU(atom()); }
    else if (atKw("if")) {
      ++pos_;
      auto cond = intro();
      expectKw("then");
      auto th = branch();
      expectKw("else");
      auto el = branch();
      c = mk::ifCmd(cond, th, el);
    } else {
      fail("expected a command");
    }
    auto r = std::make_shared<Command>(*c);
    r->span = spanOf(t);
    return r;
  }

  // A branch of a conditional command: a command becomes a one-step
  // suspended computation.
  IntroPtr branch() {
    if (atKw("mkQbit") || atKw("measQbit") || atKw("applyU")) {
      const Token& t = cur();
      auto saved = pending_;
      pending_ = nullptr;
      auto c = command();
      pending_ = saved;
      Name x = freshName();
      Span s = spanOf(t);
      return withSpan(mk::doE(mk::bindCmd(x, c, mk::ret(mk::v(x), s), s)), t);
    }
    auto saved = pending_;
    pending_ = nullptr;
    auto m = intro();
    pending_ = saved;
    return m;
  }

  bool canStartStep() const {
    switch (cur().kind) {
      case Tok::Ident: case Tok::LParen: case Tok::Lambda: return true;
      case Tok::Keyword:
        return cur().text != "then" && cur().text != "else";
      default: return false;
    }
  }

  struct Step {
    enum class Kind { Return, BindRun, BindCmd, LetEq, Term, Cmd } kind;
    PatternPtr binder;
    ElimPtr source;
    std::shared_ptr<const Command> command;
    TypePtr annType;
    IntroPtr value;
    std::vector<std::pair<Name, std::shared_ptr<const Command>>> pending;
    Span span;
  };

  CompPtr computation() {
    std::vector<Step> steps;
    bool savedStop = stopAtNewline_;
    uint32_t savedLine = stepLine_;
    while (true) {
      if (cur().col == 1 && !steps.empty()) break;
      if (!canStartStep()) fail("expected a computation step, found '" + cur().text + "'");
      stopAtNewline_ = true;
      stepLine_ = cur().line;
      steps.push_back(step());
      if (steps.back().kind == Step::Kind::Return) break;
      if (accept(Tok::Semi)) continue;
      const Token& prev = toks_[pos_ - 1];
      if (cur().line != prev.line && cur().col != 1 && canStartStep()) continue;
      break;
    }
    stopAtNewline_ = savedStop;
    stepLine_ = savedLine;
    return assemble(steps);
  }

  Step step() {
    Step s{};
    const Token& start = cur();
    std::vector<std::pair<Name, std::shared_ptr<const Command>>> pending;
    auto savedPending = pending_;
    pending_ = &pending;
    if (atKw("return")) {
      ++pos_;
      s.kind = Step::Kind::Return;
      s.value = intro();
    } else if (at(Tok::Ident) && peekTok(1).kind == Tok::BindCmd) {
      s.kind = Step::Kind::BindCmd;
      s.binder = mk::pat(ident("binder"));
      ++pos_;
      pending_ = nullptr;
      s.command = command();
    } else if (at(Tok::Ident) && peekTok(1).kind == Tok::Colon) {
      s.kind = Step::Kind::LetEq;
      s.binder = mk::pat(ident("binder"));
      ++pos_;
      s.annType = type();
      expect(Tok::Eq, "'=' in let binding");
      s.value = intro();
    } else if (atCommand()) {
      s.kind = Step::Kind::Cmd;
      pending_ = nullptr;
      s.command = command();
    } else {
      std::size_t save = pos_;
      bool isBind = false;
      if (at(Tok::Ident) || at(Tok::LParen)) {
        try {
          auto p = pattern();
          if (accept(Tok::BindRun)) {
            s.kind = Step::Kind::BindRun;
            s.binder = p;
            IntroPtr src = intro();
            if (src->kind != Intro::Kind::FromElim)
              fail("the source of '<-' must be an elimination term");
            s.source = src->elim;
            isBind = true;
          }
        } catch (const ParseError&) {
          if (pos_ <= save + 1 || !isBind) isBind = false;
          if (isBind) throw;
        }
      }
      if (!isBind) {
        pos_ = save;
        s.kind = Step::Kind::Term;
        s.value = intro();
      }
    }
    pending_ = savedPending;
    s.pending = std::move(pending);
    const Token& last = toks_[pos_ - 1];
    s.span = {start.line, start.col, 0, last.line};
    return s;
  }

  CompPtr assemble(const std::vector<Step>& steps) {
    std::vector<Name> names(steps.size());
    for (std::size_t i = 0; i < steps.size(); ++i) {
      bool last = i + 1 == steps.size();
      if (steps[i].kind == Step::Kind::Cmd || (steps[i].kind == Step::Kind::Term && !last))
        names[i] = freshName();
    }
    CompPtr rest;
    for (std::size_t i = steps.size(); i-- > 0;) {
      const Step& s = steps[i];
      bool last = i + 1 == steps.size();
      CompPtr e;
      switch (s.kind) {
        case Step::Kind::Return:
          e = mk::ret(s.value, s.span);
          break;
        case Step::Kind::BindRun:
          if (last) throw ParseError("computation must end with a result", s.span);
          e = mk::bindRun(s.binder, s.source, rest, s.span);
          break;
        case Step::Kind::BindCmd:
          if (last) throw ParseError("computation must end with a result", s.span);
          e = mk::bindCmd(*s.binder->name, s.command, rest, s.span);
          break;
        case Step::Kind::LetEq:
          if (last) throw ParseError("computation must end with a result", s.span);
          e = mk::letEq(*s.binder->name, s.annType, s.value, rest, s.span);
          break;
        case Step::Kind::Cmd: {
          const Name& x = names[i];
          CompPtr tail = last ? mk::ret(mk::v(x), s.span) : rest;
          e = mk::bindCmd(x, s.command, tail, s.span);
          break;
        }
        case Step::Kind::Term:
          if (last) {
            e = mk::ret(s.value, s.span);
          } else {
            if (s.value->kind != Intro::Kind::FromElim)
              throw ParseError("a non-final step must run a computation or a command", s.span);
            e = mk::bindRun(mk::pat(names[i]), s.value->elim, rest, s.span);
          }
          break;
      }
      for (auto it = s.pending.rbegin(); it != s.pending.rend(); ++it)
        e = mk::bindCmd(it->first, it->second, e, s.span);
      rest = e;
    }
    return rest;
  }

  // --- assertions ---------------------------------------------------------

  AssertPtr composeLevel() {
    AssertPtr a = diffLevel();
    while (accept(Tok::Compose)) a = mk::compose(a, diffLevel());
    return a;
  }

  AssertPtr diffLevel() {
    AssertPtr a = impliesLevel();
    if (accept(Tok::Diff)) return mk::diff(a, impliesLevel());
    return a;
  }

  AssertPtr impliesLevel() {
    AssertPtr a = orLevel();
    if (accept(Tok::Implies)) return mk::implies(a, impliesLevel());
    return a;
  }

  AssertPtr orLevel() {
    AssertPtr a = andLevel();
    if (accept(Tok::Or)) return mk::disj(a, orLevel());
    return a;
  }

  AssertPtr andLevel() {
    AssertPtr a = unary();
    if (accept(Tok::And)) return mk::conj(a, andLevel());
    return a;
  }

  AssertPtr unary() {
    if (accept(Tok::Not)) return mk::neg(unary());
    if (atKw("exists") || atKw("forall")) {
      bool ex = atKw("exists");
      ++pos_;
      Name x = ident("quantified variable");
      expect(Tok::Colon, "':' after quantified variable");
      if (atKw("heap")) {
        ++pos_;
        expect(Tok::Dot, "'.' after quantifier");
        auto body = assertion();
        return ex ? mk::existsHeap(x, body) : mk::forallHeap(x, body);
      }
      TypePtr t = type();
      expect(Tok::Dot, "'.' after quantifier");
      auto body = assertion();
      return ex ? mk::existsVar(x, t, body) : mk::forallVar(x, t, body);
    }
    return assertAtom();
  }

  StateExpr state() {
    const Token& t = cur();
    if (at(Tok::Ket)) {
      ++pos_;
      return mk::ket(t.ket);
    }
    if (accept(Tok::KetOpen)) {
      std::vector<Complex> amps{complexLiteral()};
      while (accept(Tok::Comma)) amps.push_back(complexLiteral());
      expect(Tok::KetClose, "']\\>' closing state vector");
      return mk::concrete(std::move(amps));
    }
    if (accept(Tok::Minus)) return mk::wildcard();
    if (accept(Tok::Question)) return mk::unknownState();
    if (at(Tok::Ident)) return mk::ghost(ident("state"));
    fail("expected a quantum state, found '" + t.text + "'");
  }

  HeapPtr heap() {
    if (atKw("empty")) {
      ++pos_;
      return mk::hempty();
    }
    if (atKw("upd")) {
      ++pos_;
      expect(Tok::LParen, "'(' after upd");
      auto base = heap();
      expect(Tok::Comma, "','");
      auto loc = intro();
      expect(Tok::Comma, "','");
      auto v = state();
      expect(Tok::RParen, "')'");
      return mk::upd(base, loc, v);
    }
    return mk::hvar(ident("heap"));
  }

  Operand operand() {
    if (at(Tok::Ket) || at(Tok::KetOpen) || at(Tok::Minus) || at(Tok::Question)) return mk::opState(state());
    return mk::opTerm(intro());
  }

  bool atCellOp() const { return at(Tok::MapsTo) || at(Tok::LookupArrow) || at(Tok::In); }

  AssertPtr cellAssertion(IntroPtr loc) {
    if (accept(Tok::MapsTo)) return mk::pointsTo(loc, state());
    if (accept(Tok::LookupArrow)) return mk::lookup(loc, state());
    expect(Tok::In, "'\\in'");
    expect(Tok::LBrace, "'{' opening candidate set");
    std::vector<StateExpr> cands{state()};
    while (accept(Tok::Comma)) cands.push_back(state());
    expect(Tok::RBrace, "'}' closing candidate set");
    return mk::memberOf(loc, cands);
  }

  AssertPtr assertAtom() {
    const Token& t = cur();
    if (atKw("emp")) { ++pos_; return mk::emp(); }
    if (atKw("Id")) {
      ++pos_;
      expect(Tok::LParen, "'(' after Id");
      auto l = operand();
      expect(Tok::Comma, "',' in Id");
      auto r = operand();
      expect(Tok::RParen, "')' closing Id");
      return mk::id(l, r);
    }
    if (atKw("HId")) {
      ++pos_;
      expect(Tok::LParen, "'(' after HId");
      auto l = heap();
      expect(Tok::Comma, "',' in HId");
      auto r = heap();
      expect(Tok::RParen, "')' closing HId");
      return mk::heapId(l, r);
    }
    if (atKw("indom")) {
      ++pos_;
      expect(Tok::LParen, "'(' after indom");
      auto h = heap();
      expect(Tok::Comma, "',' in indom");
      auto l = intro();
      expect(Tok::RParen, "')' closing indom");
      return mk::inDom(h, l);
    }
    if (atKw("entangled")) {
      ++pos_;
      expect(Tok::LParen, "'(' after entangled");
      auto q = intro();
      expect(Tok::RParen, "')' closing entangled");
      return mk::entangled(q);
    }
    if (at(Tok::Ident)) {
      if (peekTok(1).kind == Tok::MapsTo || peekTok(1).kind == Tok::LookupArrow ||
          peekTok(1).kind == Tok::In) {
        auto loc = atom();
        return cellAssertion(loc);
      }
      ++pos_;
      if (t.text == "T") return mk::top();
      if (t.text == "F") return mk::bot();
      return mk::named(t.text);
    }
    if (at(Tok::LParen)) {
      // Either a tuple location `(a, b) |-> s` or a parenthesized assertion
      // list, which denotes separated cells when it has several entries.
      std::size_t save = pos_;
      std::size_t diagCount = diags_.size();
      try {
        auto loc = atom();
        if (atCellOp()) return cellAssertion(loc);
      } catch (const ParseError&) {
      }
      diags_.resize(diagCount);
      pos_ = save;
      ++pos_;
      std::vector<AssertPtr> items{assertion()};
      while (accept(Tok::Comma)) items.push_back(assertion());
      expect(Tok::RParen, "')' closing assertion");
      return items.size() == 1 ? items[0] : mk::sep(items);
    }
    fail("expected an assertion, found '" + t.text + "'");
  }
};

template <class T, class F>
ParseResult<T> runParser(std::string_view source, F f) {
  ParseResult<T> r;
  Lexer lex(source, r.diagnostics);
  auto toks = lex.run();
  if (!r.diagnostics.empty()) return r;
  Parser p(std::move(toks), r.diagnostics);
  try {
    r.value = f(p);
  } catch (const ParseError& e) {
    r.diagnostics.push_back({Diagnostic::Severity::Error, e.what(), e.span});
  }
  if (!r.diagnostics.empty()) r.value.reset();
  return r;
}

}  // namespace

ParseResult<Program> parseProgram(std::string_view source) {
  return runParser<Program>(source, [](Parser& p) { return p.program(); });
}

ParseResult<AssertPtr> parseAssertion(std::string_view source) {
  return runParser<AssertPtr>(source, [](Parser& p) { return p.whole([&] { return p.assertion(); }); });
}

ParseResult<TypePtr> parseType(std::string_view source) {
  return runParser<TypePtr>(source, [](Parser& p) { return p.whole([&] { return p.type(); }); });
}

ParseResult<IntroPtr> parseIntro(std::string_view source) {
  return runParser<IntroPtr>(source, [](Parser& p) { return p.whole([&] { return p.intro(); }); });
}

}  // namespace qhtt
