#pragma once

#include <memory>
#include <string>
#include <vector>

#include "multrec/multfunc.hpp"

namespace multrec::grammar {

// AST of the function-description grammar:
//   expr   := liouville | one | char(q, i[, i...]) | cyclic(p, u)
//           | modify(expr, {p: angle, ...}) | twist(t)
//           | pow(expr, l) | conj(expr) | mul(expr, expr)
// Angles are rationals "a/b" meaning e(a/b).
struct FunctionExpr {
  enum class Kind { Liouville, One, Char, Cyclic, Modify, Twist, Pow, Conj, Mul };
  Kind kind = Kind::One;
  uint64_t q = 0;
  std::vector<uint64_t> index;
  uint64_t p = 0, u = 0;
  std::vector<std::pair<uint64_t, Angle>> overrides;  // sorted by prime
  double t = 0;
  int64_t ell = 0;
  std::shared_ptr<const FunctionExpr> child, child2;
};

bool expr_equal(const FunctionExpr& a, const FunctionExpr& b);

// Parses or throws InvalidInput with the byte offset of the failure.
std::shared_ptr<const FunctionExpr> parse_function_expr(const std::string& text);

std::string pretty_print(const FunctionExpr& e);

multfunc::MultFunction to_function(const FunctionExpr& e);

// Convenience: parse and build in one step.
multfunc::MultFunction parse_function(const std::string& text);

}  // namespace multrec::grammar
