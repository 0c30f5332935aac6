#pragma once

#include <cctype>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hilbk3/operators.hpp"

namespace hilbk3 {

struct ParseError : std::runtime_error {
  size_t pos;
  ParseError(const std::string& msg, size_t p)
      : std::runtime_error(msg + " at position " + std::to_string(p)), pos(p) {}
};

/// Surface-level AST of an operator expression. Mirrors OperatorExpr but
/// keeps class literals unexpanded, so printing is exact. Precedence:
/// rational scalar binds tighter than composition `.`, which binds tighter
/// than `+`/`-`; brackets are written `[A, B]`.
struct ParsedExpr {
  enum class Kind { E, Ft, F, H, L0, Q, T, Scalar, Sum, Compose, Bracket };

  Kind kind = Kind::H;
  HilbDivisor cls;       // E, Ft, F
  int index = 0;         // Q
  SurfaceClass qClass;   // Q
  MultiPointClass corr;  // T
  Rat scalar = Rat(1);   // Scalar
  std::vector<ParsedExpr> children;

  friend bool operator==(const ParsedExpr& a, const ParsedExpr& b) {
    return a.kind == b.kind && a.cls == b.cls && a.index == b.index && a.qClass == b.qClass &&
           a.corr == b.corr && a.scalar == b.scalar && a.children == b.children;
  }
};

namespace detail {

struct Token {
  enum class Type { Ident, Number, Sym, End };
  Type type = Type::End;
  std::string text;
  size_t pos = 0;
};

inline std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  size_t i = 0, n = src.size();
  while (i < n) {
    if (std::isspace(static_cast<unsigned char>(src[i]))) { ++i; continue; }
    size_t start = i;
    char c = src[i];
    if (std::isalpha(static_cast<unsigned char>(c))) {
      while (i < n && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) ++i;
      out.push_back({Token::Type::Ident, src.substr(start, i - start), start});
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < n && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      if (i < n && src[i] == '/') {
        ++i;
        if (i == n || !std::isdigit(static_cast<unsigned char>(src[i])))
          throw ParseError("malformed rational", start);
        while (i < n && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      }
      out.push_back({Token::Type::Number, src.substr(start, i - start), start});
    } else if (std::string("+-*.()[],").find(c) != std::string::npos) {
      out.push_back({Token::Type::Sym, std::string(1, c), start});
      ++i;
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", i);
    }
  }
  out.push_back({Token::Type::End, "", n});
  return out;
}

class ExprParser {
 public:
  ExprParser(const SurfaceModel& m, const std::string& src) : model_(m), toks_(lex(src)) {}

  ParsedExpr parse() {
    ParsedExpr e = expr();
    if (peek().type != Token::Type::End) throw ParseError("trailing input", peek().pos);
    return e;
  }

 private:
  const Token& peek() const { return toks_[idx_]; }
  Token next() { return toks_[idx_++]; }
  bool sym(const std::string& s) const {
    return peek().type == Token::Type::Sym && peek().text == s;
  }
  void expect(const std::string& s) {
    if (!sym(s)) throw ParseError("expected '" + s + "'", peek().pos);
    ++idx_;
  }

  Rat number() {
    if (peek().type != Token::Type::Number) throw ParseError("expected a rational", peek().pos);
    return parseRat(next().text);
  }
  Rat signedNumber() {
    bool neg = sym("-");
    if (neg) ++idx_;
    Rat v = number();
    return neg ? -v : v;
  }

  ParsedExpr expr() {
    std::vector<ParsedExpr> parts{term()};
    while (sym("+") || sym("-")) {
      bool minus = next().text == "-";
      ParsedExpr t = term();
      if (minus) {
        if (t.kind == ParsedExpr::Kind::Scalar) t.scalar = -t.scalar;
        else {
          ParsedExpr s;
          s.kind = ParsedExpr::Kind::Scalar;
          s.scalar = Rat(-1);
          s.children.push_back(std::move(t));
          t = std::move(s);
        }
      }
      parts.push_back(std::move(t));
    }
    if (parts.size() == 1) return std::move(parts[0]);
    ParsedExpr e;
    e.kind = ParsedExpr::Kind::Sum;
    e.children = std::move(parts);
    return e;
  }

  ParsedExpr term() {
    std::vector<ParsedExpr> parts{factor()};
    while (sym(".")) {
      ++idx_;
      parts.push_back(factor());
    }
    if (parts.size() == 1) return std::move(parts[0]);
    ParsedExpr e;
    e.kind = ParsedExpr::Kind::Compose;
    e.children = std::move(parts);
    return e;
  }

  ParsedExpr factor() {
    if (peek().type == Token::Type::Number || sym("-")) {
      Rat s = signedNumber();
      expect("*");
      ParsedExpr e;
      e.kind = ParsedExpr::Kind::Scalar;
      e.scalar = s;
      e.children.push_back(factor());
      return e;
    }
    return atom();
  }

  ParsedExpr atom() {
    if (sym("[")) {
      ++idx_;
      ParsedExpr a = expr();
      expect(",");
      ParsedExpr b = expr();
      expect("]");
      ParsedExpr e;
      e.kind = ParsedExpr::Kind::Bracket;
      e.children.push_back(std::move(a));
      e.children.push_back(std::move(b));
      return e;
    }
    if (sym("(")) {
      ++idx_;
      ParsedExpr e = expr();
      expect(")");
      return e;
    }
    if (peek().type != Token::Type::Ident) throw ParseError("expected an operator", peek().pos);
    Token t = next();
    if (t.text == "h") { ParsedExpr e; e.kind = ParsedExpr::Kind::H; return e; }
    if (t.text == "L0") { ParsedExpr e; e.kind = ParsedExpr::Kind::L0; return e; }
    if (t.text == "e" || t.text == "ft" || t.text == "f") {
      ParsedExpr e;
      e.kind = t.text == "e"    ? ParsedExpr::Kind::E
               : t.text == "ft" ? ParsedExpr::Kind::Ft
                                : ParsedExpr::Kind::F;
      expect("(");
      e.cls = divisorClass();
      expect(")");
      return e;
    }
    if (t.text == "q") {
      ParsedExpr e;
      e.kind = ParsedExpr::Kind::Q;
      expect("(");
      bool neg = sym("-");
      if (neg) ++idx_;
      Token num = next();
      if (num.type != Token::Type::Number || num.text.find('/') != std::string::npos)
        throw ParseError("expected an integer index", num.pos);
      e.index = std::stoi(num.text) * (neg ? -1 : 1);
      expect(",");
      e.qClass = surfaceClass();
      expect(")");
      return e;
    }
    if (t.text == "T") {
      ParsedExpr e;
      e.kind = ParsedExpr::Kind::T;
      expect("(");
      e.corr = corrExpr();
      expect(")");
      return e;
    }
    throw ParseError("unknown operator '" + t.text + "'", t.pos);
  }

  // -- class literals ----------------------------------------------------

  HilbDivisor divisorClass() {
    HilbDivisor out(model_);
    bool first = true;
    while (true) {
      Rat sign(1);
      if (sym("-")) { sign = -1; ++idx_; }
      else if (sym("+")) { ++idx_; }
      else if (!first) break;
      first = false;
      Rat coeff(1);
      if (peek().type == Token::Type::Number) {
        coeff = number();
        expect("*");
      }
      Token name = next();
      if (name.type != Token::Type::Ident)
        throw ParseError("expected a divisor label", name.pos);
      if (name.text == "delta") {
        out.delta += sign * coeff;
      } else {
        int b = model_.labelToBasis(name.text);
        if (!model_.isDivisor(b))
          throw ParseError("'" + name.text + "' is not a divisor class", name.pos);
        out.div[b - 1] += sign * coeff;
      }
      if (!sym("-") && !sym("+")) break;
    }
    return out;
  }

  SurfaceClass surfaceClass() {
    SurfaceClass out(model_);
    bool first = true;
    while (true) {
      Rat sign(1);
      if (sym("-")) { sign = -1; ++idx_; }
      else if (sym("+")) { ++idx_; }
      else if (!first) break;
      first = false;
      Rat coeff(1);
      if (peek().type == Token::Type::Number) {
        coeff = number();
        expect("*");
      }
      Token name = next();
      if (name.type != Token::Type::Ident)
        throw ParseError("expected a class label", name.pos);
      out.coeff[model_.labelToBasis(name.text)] += sign * coeff;
      if (!sym("-") && !sym("+")) break;
    }
    return out;
  }

  // -- 2-slot correspondence literals -------------------------------------

  MultiPointClass corrExpr() {
    MultiPointClass out = corrTerm();
    while (sym("+") || sym("-")) {
      bool minus = next().text == "-";
      MultiPointClass t = corrTerm();
      if (minus) out -= t;
      else out += t;
    }
    return out;
  }

  MultiPointClass corrTerm() {
    Rat coeff(1);
    bool haveFactor = false;
    MultiPointClass acc = MultiPointClass::one(model_, 2);
    if (sym("-") && toks_[idx_ + 1].type != Token::Type::Number) {
      coeff = -1;
      ++idx_;
    } else if (peek().type == Token::Type::Number || sym("-")) {
      coeff = signedNumber();
      if (!sym("*")) return coeff * std::move(acc);
      ++idx_;
    }
    while (true) {
      acc = multiply(acc, corrPrimary());
      haveFactor = true;
      if (!sym("*")) break;
      ++idx_;
    }
    if (!haveFactor) throw ParseError("empty correspondence term", peek().pos);
    return coeff * std::move(acc);
  }

  MultiPointClass corrPrimary() {
    if (sym("(")) {
      ++idx_;
      MultiPointClass e = corrExpr();
      expect(")");
      return e;
    }
    Token t = next();
    if (t.type != Token::Type::Ident)
      throw ParseError("expected a correspondence factor", t.pos);
    return reduce(model_, 2, {corrFactor(t)});
  }

  RawFactor corrFactor(const Token& t) const {
    const std::string& s = t.text;
    if (s == "D" || s == "D12") return RawFactor::diag(0, 1);
    auto slotOf = [&](const std::string& digit) {
      if (digit == "1") return 0;
      if (digit == "2") return 1;
      throw ParseError("slot must be 1 or 2", t.pos);
    };
    auto us = s.find('_');
    if (us != std::string::npos)
      return RawFactor::cls(slotOf(s.substr(us + 1)), model_.labelToBasis(s.substr(0, us)));
    if (s.size() == 2 && (s[0] == 'u' || s[0] == 'c'))
      return RawFactor::cls(slotOf(s.substr(1)), model_.labelToBasis(s.substr(0, 1)));
    throw ParseError("unknown correspondence factor '" + s + "'", t.pos);
  }

  const SurfaceModel& model_;
  std::vector<Token> toks_;
  size_t idx_ = 0;
};

inline void linearStr(std::ostringstream& os, bool& first, const Rat& c, const std::string& label) {
  if (c == 0) return;
  Rat ac = abs(c);
  os << (first ? (c < 0 ? "-" : "") : (c < 0 ? " - " : " + "));
  first = false;
  if (ac != 1) os << ratStr(ac) << "*";
  os << label;
}

inline std::string divisorClassStr(const SurfaceModel& m, const HilbDivisor& a) {
  std::ostringstream os;
  bool first = true;
  for (int i = 0; i < m.rank(); ++i) linearStr(os, first, a.div[i], m.divisors.labels[i]);
  linearStr(os, first, a.delta, "delta");
  return first ? "0" : os.str();
}

inline std::string surfaceClassStr(const SurfaceModel& m, const SurfaceClass& x) {
  std::ostringstream os;
  bool first = true;
  for (int b = 0; b < m.basisSize(); ++b) linearStr(os, first, x.coeff[b], m.label(b));
  return first ? "0" : os.str();
}

inline std::string corrStr(const SurfaceModel& m, const MultiPointClass& g) {
  if (g.isZero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto& [t, c] : g.terms) {
    std::string fac;
    if (!t.matching.empty()) fac = "D";
    for (int s = 0; s < 2; ++s) {
      if (t.isMatched(s) || m.isUnit(t.deco[s])) continue;
      if (!fac.empty()) fac += "*";
      int b = t.deco[s];
      if (m.isC(b)) fac += m.label(b) + std::to_string(s + 1);
      else fac += m.label(b) + "_" + std::to_string(s + 1);
    }
    if (fac.empty()) fac = "u1";
    linearStr(os, first, c, fac);
  }
  return os.str();
}

}  // namespace detail

inline ParsedExpr parseExpr(const SurfaceModel& m, const std::string& src) {
  return detail::ExprParser(m, src).parse();
}

/// Canonical print; parseExpr is a left inverse on its output.
inline std::string printExpr(const SurfaceModel& m, const ParsedExpr& e) {
  using Kind = ParsedExpr::Kind;
  auto sub = [&](const ParsedExpr& c, bool parenSum, bool parenCompose) {
    std::string s = printExpr(m, c);
    if ((parenSum && c.kind == Kind::Sum) || (parenCompose && c.kind == Kind::Compose))
      return "(" + s + ")";
    return s;
  };
  switch (e.kind) {
    case Kind::H: return "h";
    case Kind::L0: return "L0";
    case Kind::E: return "e(" + detail::divisorClassStr(m, e.cls) + ")";
    case Kind::Ft: return "ft(" + detail::divisorClassStr(m, e.cls) + ")";
    case Kind::F: return "f(" + detail::divisorClassStr(m, e.cls) + ")";
    case Kind::Q:
      return "q(" + std::to_string(e.index) + ", " + detail::surfaceClassStr(m, e.qClass) + ")";
    case Kind::T: return "T(" + detail::corrStr(m, e.corr) + ")";
    case Kind::Scalar: return ratStr(e.scalar) + " * " + sub(e.children[0], true, true);
    case Kind::Sum: {
      std::string s;
      for (size_t i = 0; i < e.children.size(); ++i)
        s += (i ? " + " : "") + printExpr(m, e.children[i]);
      return s;
    }
    case Kind::Compose: {
      std::string s;
      for (size_t i = 0; i < e.children.size(); ++i)
        s += (i ? " . " : "") + sub(e.children[i], true, false);
      return s;
    }
    case Kind::Bracket:
      return "[" + printExpr(m, e.children[0]) + ", " + printExpr(m, e.children[1]) + "]";
  }
  throw std::logic_error("unreachable");
}

/// Lowers a parsed expression to the schema level. The weight n fixes the
/// normalization of f(a) (whose square depends on n) and the grading along
/// compositions.
inline OperatorExpr lowerExpr(const SurfaceModel& m, const ParsedExpr& e, int n) {
  using Kind = ParsedExpr::Kind;
  switch (e.kind) {
    case Kind::H: return hOp(m);
    case Kind::L0: return l0Op(m);
    case Kind::E: return eGeneral(m, e.cls);
    case Kind::Ft: return ftGeneral(m, e.cls);
    case Kind::F: return fGeneral(m, e.cls, n);
    case Kind::Q: return nakajima(m, e.index, e.qClass);
    case Kind::T: return tGamma(m, e.corr);
    case Kind::Scalar: return OperatorExpr::scaled(e.scalar, lowerExpr(m, e.children[0], n));
    case Kind::Sum: {
      std::vector<OperatorExpr> parts;
      for (auto& c : e.children) parts.push_back(lowerExpr(m, c, n));
      return OperatorExpr::sum(std::move(parts));
    }
    case Kind::Compose: {
      int k = static_cast<int>(e.children.size());
      std::vector<OperatorExpr> lowered(k);
      int w = n;
      for (int i = k - 1; i >= 0; --i) {
        lowered[i] = lowerExpr(m, e.children[i], w);
        w += lowered[i].weightShift;
      }
      OperatorExpr out = std::move(lowered[k - 1]);
      for (int i = k - 2; i >= 0; --i)
        out = OperatorExpr::compose(std::move(lowered[i]), std::move(out));
      return out;
    }
    case Kind::Bracket:
      return OperatorExpr::bracket(lowerExpr(m, e.children[0], n), lowerExpr(m, e.children[1], n));
  }
  throw std::logic_error("unreachable");
}

}  // namespace hilbk3
