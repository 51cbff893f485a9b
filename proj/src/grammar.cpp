#include "multrec/grammar.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>

namespace multrec::grammar {

namespace {

struct Parser {
  const std::string& text;
  size_t pos = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw InvalidInput("function grammar: " + what + " at byte " + std::to_string(pos));
  }

  void skip_ws() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }

  std::string ident() {
    skip_ws();
    size_t start = pos;
    while (pos < text.size() && (std::isalpha(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      ++pos;
    if (start == pos) fail("expected a name");
    return text.substr(start, pos - start);
  }

  int64_t integer() {
    skip_ws();
    size_t start = pos;
    if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) ++pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (start == pos || (pos - start == 1 && !std::isdigit(static_cast<unsigned char>(text[start]))))
      fail("expected an integer");
    return std::strtoll(text.substr(start, pos - start).c_str(), nullptr, 10);
  }

  double real() {
    skip_ws();
    size_t start = pos;
    const char* begin = text.c_str() + pos;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a real number");
    pos += static_cast<size_t>(end - begin);
    if (!std::isfinite(v)) fail("real number out of range");
    (void)start;
    return v;
  }

  Angle angle() {
    int64_t num = integer();
    if (eat('/')) {
      int64_t den = integer();
      if (den == 0) fail("angle with zero denominator");
      return Angle::of(num, den);
    }
    return Angle::of(num, 1);
  }

  std::shared_ptr<const FunctionExpr> expr() {
    std::string name = ident();
    auto node = std::make_shared<FunctionExpr>();
    if (name == "liouville") {
      node->kind = FunctionExpr::Kind::Liouville;
    } else if (name == "one") {
      node->kind = FunctionExpr::Kind::One;
    } else if (name == "char") {
      node->kind = FunctionExpr::Kind::Char;
      expect('(');
      int64_t q = integer();
      if (q < 1) fail("modulus must be positive");
      node->q = static_cast<uint64_t>(q);
      while (eat(',')) {
        int64_t i = integer();
        if (i < 0) fail("character index must be nonnegative");
        node->index.push_back(static_cast<uint64_t>(i));
      }
      expect(')');
    } else if (name == "cyclic") {
      node->kind = FunctionExpr::Kind::Cyclic;
      expect('(');
      int64_t p = integer();
      expect(',');
      int64_t u = integer();
      expect(')');
      if (p < 2 || u < 1) fail("cyclic(p,u) requires p >= 2 and u >= 1");
      node->p = static_cast<uint64_t>(p);
      node->u = static_cast<uint64_t>(u);
    } else if (name == "modify") {
      node->kind = FunctionExpr::Kind::Modify;
      expect('(');
      node->child = expr();
      expect(',');
      expect('{');
      if (!eat('}')) {
        do {
          int64_t p = integer();
          if (p < 2) fail("override prime must be >= 2");
          expect(':');
          Angle a = angle();
          node->overrides.emplace_back(static_cast<uint64_t>(p), a);
        } while (eat(','));
        expect('}');
      }
      expect(')');
      std::sort(node->overrides.begin(), node->overrides.end(),
                [](const auto& x, const auto& y) { return x.first < y.first; });
    } else if (name == "twist") {
      node->kind = FunctionExpr::Kind::Twist;
      expect('(');
      node->t = real();
      expect(')');
    } else if (name == "pow") {
      node->kind = FunctionExpr::Kind::Pow;
      expect('(');
      node->child = expr();
      expect(',');
      node->ell = integer();
      expect(')');
      if (node->ell == 0) fail("pow exponent must be nonzero");
    } else if (name == "conj") {
      node->kind = FunctionExpr::Kind::Conj;
      expect('(');
      node->child = expr();
      expect(')');
    } else if (name == "mul") {
      node->kind = FunctionExpr::Kind::Mul;
      expect('(');
      node->child = expr();
      expect(',');
      node->child2 = expr();
      expect(')');
    } else {
      pos -= name.size();
      fail("unknown name '" + name + "'");
    }
    return node;
  }
};

std::string fmt_double(double v) {
  char buf[40];
  snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

bool expr_equal(const FunctionExpr& a, const FunctionExpr& b) {
  if (a.kind != b.kind) return false;
  if (a.q != b.q || a.index != b.index || a.p != b.p || a.u != b.u || a.ell != b.ell)
    return false;
  if (a.t != b.t) return false;
  if (a.overrides.size() != b.overrides.size()) return false;
  for (size_t i = 0; i < a.overrides.size(); ++i) {
    if (a.overrides[i].first != b.overrides[i].first) return false;
    if (!(a.overrides[i].second == b.overrides[i].second)) return false;
  }
  auto child_eq = [](const std::shared_ptr<const FunctionExpr>& x,
                     const std::shared_ptr<const FunctionExpr>& y) {
    if (!x && !y) return true;
    if (!x || !y) return false;
    return expr_equal(*x, *y);
  };
  return child_eq(a.child, b.child) && child_eq(a.child2, b.child2);
}

std::shared_ptr<const FunctionExpr> parse_function_expr(const std::string& text) {
  Parser p{text};
  auto e = p.expr();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("unexpected trailing input");
  return e;
}

std::string pretty_print(const FunctionExpr& e) {
  using K = FunctionExpr::Kind;
  switch (e.kind) {
    case K::Liouville:
      return "liouville";
    case K::One:
      return "one";
    case K::Char: {
      std::string s = "char(" + std::to_string(e.q);
      for (uint64_t i : e.index) s += "," + std::to_string(i);
      return s + ")";
    }
    case K::Cyclic:
      return "cyclic(" + std::to_string(e.p) + "," + std::to_string(e.u) + ")";
    case K::Modify: {
      std::string s = "modify(" + pretty_print(*e.child) + ",{";
      bool first = true;
      for (const auto& [p, a] : e.overrides) {
        if (!first) s += ",";
        first = false;
        s += std::to_string(p) + ":" + std::to_string(a.num()) + "/" + std::to_string(a.den());
      }
      return s + "})";
    }
    case K::Twist:
      return "twist(" + fmt_double(e.t) + ")";
    case K::Pow:
      return "pow(" + pretty_print(*e.child) + "," + std::to_string(e.ell) + ")";
    case K::Conj:
      return "conj(" + pretty_print(*e.child) + ")";
    case K::Mul:
      return "mul(" + pretty_print(*e.child) + "," + pretty_print(*e.child2) + ")";
  }
  return "?";
}

multfunc::MultFunction to_function(const FunctionExpr& e) {
  using K = FunctionExpr::Kind;
  using multfunc::MultFunction;
  switch (e.kind) {
    case K::Liouville:
      return MultFunction::liouville();
    case K::One:
      return MultFunction::one();
    case K::Char:
      return MultFunction::character(multfunc::dirichlet_character(e.q, e.index));
    case K::Cyclic:
      return MultFunction::character(
          multfunc::cyclic_character(e.p, static_cast<uint32_t>(e.u)));
    case K::Modify: {
      if (!e.child || (e.child->kind != K::Char && e.child->kind != K::Cyclic))
        throw InvalidInput("modify: base must be char(...) or cyclic(...)");
      multfunc::DirichletCharacter base =
          e.child->kind == K::Char
              ? multfunc::dirichlet_character(e.child->q, e.child->index)
              : multfunc::cyclic_character(e.child->p, static_cast<uint32_t>(e.child->u));
      std::map<uint64_t, Angle> ov(e.overrides.begin(), e.overrides.end());
      return MultFunction::modified_character(base, std::move(ov));
    }
    case K::Twist:
      return MultFunction::archimedean_twist(e.t);
    case K::Pow:
      return MultFunction::power(to_function(*e.child), e.ell);
    case K::Conj:
      return MultFunction::conjugate(to_function(*e.child));
    case K::Mul:
      return MultFunction::product(to_function(*e.child), to_function(*e.child2));
  }
  throw InvalidInput("unreachable function kind");
}

multfunc::MultFunction parse_function(const std::string& text) {
  return to_function(*parse_function_expr(text));
}

}  // namespace multrec::grammar
