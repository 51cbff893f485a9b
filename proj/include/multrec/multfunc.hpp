#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "multrec/angle.hpp"
#include "multrec/numkernel.hpp"

namespace multrec::multfunc {

inline constexpr uint64_t kModulusBudget = 1'000'000;

// Dirichlet character mod q, stored as a full residue table of exact angles.
// A character is indexed by one exponent per prime-power component of q,
// selecting the power of that component's fixed generator; 2^k with k >= 3
// contributes the pair <-1> x <5> and takes two indices.
class DirichletCharacter {
 public:
  uint64_t modulus() const { return modulus_; }
  uint64_t conductor() const { return conductor_; }
  int64_t order_den() const { return order_den_; }
  const std::vector<uint64_t>& index() const { return index_; }
  bool is_principal() const;
  bool is_primitive() const { return conductor_ == modulus_; }

  // Value at any integer; Zero iff gcd(n, q) > 1.
  UnitValue at(uint64_t n) const;
  UnitValue at_signed(int64_t n) const;

  // Angle numerator over order_den at residue r coprime to q, -1 for zero.
  int64_t angle_num(uint64_t r) const { return modulus_ == 1 ? 0 : table_[r % modulus_]; }

  DirichletCharacter conjugate() const;

  friend DirichletCharacter dirichlet_character(uint64_t q, std::span<const uint64_t> index);

 private:
  uint64_t modulus_ = 1;
  uint64_t conductor_ = 1;
  int64_t order_den_ = 1;
  std::vector<int64_t> table_;  // size modulus_, angle numerators, -1 for zero
  std::vector<uint64_t> index_;
};

DirichletCharacter dirichlet_character(uint64_t q, std::span<const uint64_t> index);

// The character mod p^u (p odd) sending the smallest generator to e(1/phi).
DirichletCharacter cyclic_character(uint64_t p, uint32_t u);

// All characters mod q in lexicographic index order; the principal one first.
std::vector<DirichletCharacter> characters_mod(uint64_t q);

// Exact-part value of a function at a prime: angle numerator over the
// function's exact_den, or a zero marker.
struct PrimeAngle {
  bool zero;
  int64_t num;
};

// A 1-bounded completely multiplicative function built from the paper's zoo:
// Liouville, Dirichlet characters, modified characters, Archimedean twists,
// and products/powers/conjugates thereof. Every instance factors canonically
// as (finite-valued exact part) * n^{i t}; evaluation uses factorize for the
// exact part and a single logarithm for the twist part.
class MultFunction {
 public:
  MultFunction();  // the constant 1

  static MultFunction one();
  static MultFunction liouville();
  static MultFunction character(DirichletCharacter chi);
  // Overrides must cover every prime dividing the modulus when require_in_m.
  static MultFunction modified_character(DirichletCharacter base,
                                         std::map<uint64_t, Angle> overrides,
                                         bool require_in_m = true);
  static MultFunction archimedean_twist(double t);
  static MultFunction product(const MultFunction& f, const MultFunction& g);
  static MultFunction power(const MultFunction& f, int64_t ell);
  static MultFunction conjugate(const MultFunction& f);

  // Common denominator of all exact-part prime angles.
  int64_t exact_den() const;
  // Net Archimedean exponent: the function equals (exact part) * n^{i t}.
  double twist_t() const;
  bool is_exact() const { return twist_t() == 0.0; }
  // True iff no prime value is Zero, i.e. the function lies in the class M.
  bool in_m() const;

  PrimeAngle prime_angle(uint64_t p) const;
  UnitValue prime_value(uint64_t p) const;

  // Value at n >= 1 (n <= 2^63), assembled from the factorization.
  UnitValue eval(uint64_t n) const;

  struct Node;  // implementation detail, defined in the .cpp

 private:
  explicit MultFunction(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

// Index j in {0,...,ell-1} minimizing |a - e(j/ell)|.
uint64_t nearest_root(const UnitValue& a, uint64_t ell);

}  // namespace multrec::multfunc
