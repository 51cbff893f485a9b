#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "multrec/errors.hpp"

namespace multrec::numkernel {

// Prime factorization with primes strictly increasing; empty iff the input is 1.
struct Factorization {
  struct Entry {
    uint64_t prime;
    uint32_t exponent;
  };
  std::vector<Entry> entries;

  uint64_t value() const;
  // Sum of exponents (number of prime factors with multiplicity).
  uint64_t omega_total() const;
};

struct Congruence {
  uint64_t residue;
  uint64_t modulus;
};

uint64_t mul_mod(uint64_t a, uint64_t b, uint64_t m);
uint64_t pow_mod(uint64_t base, uint64_t exp, uint64_t m);

// Modular inverse of a mod m; throws InvalidInput if gcd(a, m) != 1.
uint64_t inv_mod(uint64_t a, uint64_t m);

// Deterministic Miller-Rabin, valid for all n < 2^64.
bool is_prime(uint64_t n);

// Trial division below 1e6, then Miller-Rabin + Pollard-Brent rho with a
// deterministic parameter sequence, so outputs are reproducible.
Factorization factorize(uint64_t n);

// p-adic valuation of n (n != 0).
uint32_t valuation(uint64_t n, uint64_t p);

// Solves a simultaneous congruence system; moduli need not be coprime, the
// system is merged pairwise and an inconsistent overlap raises NoSolution.
// The combined modulus must fit in 64 bits.
Congruence crt_solve(std::span<const Congruence> congruences);

uint64_t euler_phi_prime_power(uint64_t p, uint32_t u);

// Smallest generator of (Z/p^u)^x for odd prime p, by exhaustive order check.
uint64_t smallest_generator(uint64_t p, uint32_t u);

// r in [0, phi(p^u)) with g^r = x mod p^u; g must generate and (x, p) = 1.
uint64_t discrete_log(uint64_t g, uint64_t x, uint64_t p, uint32_t u);

// Primes below 1e6, shared sieve.
const std::vector<uint32_t>& small_primes();

// All primes in (lo, hi], segmented sieve; hi capped by the prime budget.
std::vector<uint64_t> primes_in(uint64_t lo_exclusive, uint64_t hi_inclusive);

inline constexpr uint64_t kPrimeBudget = 200'000'000;  // largest prime window end

}  // namespace multrec::numkernel
