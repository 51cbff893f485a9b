#pragma once

#include <cstdint>
#include <functional>

#include "multrec/multfunc.hpp"

namespace multrec::progression {

inline constexpr int64_t kArgumentBudget = 2'000'000'000'000ll;  // 2e12

// One evaluated sample of f(a*n + b).
struct Sample {
  uint64_t n;
  bool zero;           // some prime value of the exact part vanished
  int64_t exact_num;   // exact-part angle numerator over f.exact_den()
  double turns;        // full angle in turns (exact part + twist part)
  int64_t argument;    // a*n + b
};

// Streams f(a*n+b) for n in [n_lo, n_hi] in increasing order, factoring the
// whole progression with one sieve pass per segment instead of per-argument
// calls to factorize. Arguments must stay positive and within the budget.
void for_each_value(const multfunc::MultFunction& f, int64_t a, int64_t b,
                    uint64_t n_lo, uint64_t n_hi,
                    const std::function<void(const Sample&)>& fn);

// Lockstep variant for two linear forms over the same n range.
void for_each_pair(const multfunc::MultFunction& f, int64_t a1, int64_t b1,
                   const multfunc::MultFunction& g, int64_t a2, int64_t b2,
                   uint64_t n_lo, uint64_t n_hi,
                   const std::function<void(const Sample&, const Sample&)>& fn);

}  // namespace multrec::progression
