#include "multrec/progression.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace multrec::progression {

namespace nk = multrec::numkernel;

namespace {

constexpr uint64_t kSegment = 1 << 16;

struct SegmentState {
  std::vector<int64_t> residual;
  std::vector<int64_t> num;    // exact angle numerator accumulator
  std::vector<uint8_t> zero;
};

class Evaluator {
 public:
  Evaluator(const multfunc::MultFunction& f, int64_t a, int64_t b, uint64_t n_hi)
      : f_(f), a_(a), b_(b), den_(f.exact_den()), t_net_(f.twist_t()) {
    if (a <= 0) throw InvalidInput("progression: step a must be positive");
    if (a_ + b_ < 1) throw RangeError("progression: argument a*1+b must be positive");
    __int128 vmax = static_cast<__int128>(a) * n_hi + b;
    if (vmax > kArgumentBudget)
      throw RangeError("progression: arguments exceed the 2e12 budget; shrink the range");
    vmax_ = static_cast<int64_t>(vmax);
    const auto& sp = nk::small_primes();
    for (uint32_t p : sp) {
      if (static_cast<__int128>(p) * p > vmax_) break;
      sieve_primes_.push_back(p);
    }
  }

  void run_segment(uint64_t n0, uint64_t n1, SegmentState& st) const {
    size_t len = n1 - n0 + 1;
    st.residual.resize(len);
    st.num.assign(len, 0);
    st.zero.assign(len, 0);
    for (size_t i = 0; i < len; ++i)
      st.residual[i] = a_ * static_cast<int64_t>(n0 + i) + b_;
    for (uint32_t p : sieve_primes_) {
      size_t start;
      if (a_ % p == 0) {
        if (b_ % p != 0) continue;
        start = 0;  // every argument divisible
      } else {
        // n = -b * a^{-1} mod p
        int64_t bm = ((-b_) % p + p) % p;
        uint64_t ainv = nk::inv_mod(static_cast<uint64_t>(((a_ % p) + p) % p), p);
        uint64_t nres = nk::mul_mod(static_cast<uint64_t>(bm), ainv, p);
        uint64_t first = n0 % p <= nres ? n0 + (nres - n0 % p)
                                        : n0 + (p - (n0 % p - nres));
        if (first > n1) continue;
        start = first - n0;
      }
      multfunc::PrimeAngle pa = f_.prime_angle(p);
      for (size_t i = start; i < len; i += (a_ % p == 0) ? 1 : p) {
        int64_t& v = st.residual[i];
        uint32_t e = 0;
        while (v % p == 0) {
          v /= p;
          ++e;
        }
        if (e == 0) continue;
        if (pa.zero) {
          st.zero[i] = 1;
        } else {
          st.num[i] = static_cast<int64_t>(
              (static_cast<__int128>(st.num[i]) + static_cast<__int128>(pa.num) * e) % den_);
        }
      }
    }
    // leftover cofactors are prime
    for (size_t i = 0; i < len; ++i) {
      int64_t v = st.residual[i];
      if (v > 1) {
        multfunc::PrimeAngle pa = f_.prime_angle(static_cast<uint64_t>(v));
        if (pa.zero)
          st.zero[i] = 1;
        else
          st.num[i] = (st.num[i] + pa.num) % den_;
      }
    }
  }

  Sample sample_at(uint64_t n, const SegmentState& st, uint64_t n0, size_t i) const {
    Sample s;
    s.n = n;
    s.argument = a_ * static_cast<int64_t>(n) + b_;
    s.zero = st.zero[i] != 0;
    s.exact_num = st.num[i];
    double turns = static_cast<double>(st.num[i]) / static_cast<double>(den_);
    if (t_net_ != 0.0)
      turns += t_net_ * std::log(static_cast<double>(s.argument)) / kTau;
    s.turns = turns - std::floor(turns);
    (void)n0;
    return s;
  }

 private:
  const multfunc::MultFunction& f_;
  int64_t a_, b_;
  int64_t den_;
  double t_net_;
  int64_t vmax_ = 0;
  std::vector<uint32_t> sieve_primes_;
};

}  // namespace

void for_each_value(const multfunc::MultFunction& f, int64_t a, int64_t b,
                    uint64_t n_lo, uint64_t n_hi,
                    const std::function<void(const Sample&)>& fn) {
  if (n_lo < 1 || n_hi < n_lo) throw InvalidInput("progression: empty or invalid range");
  Evaluator ev(f, a, b, n_hi);
  SegmentState st;
  for (uint64_t n0 = n_lo; n0 <= n_hi; n0 += kSegment) {
    uint64_t n1 = std::min(n_hi, n0 + kSegment - 1);
    ev.run_segment(n0, n1, st);
    for (uint64_t n = n0; n <= n1; ++n) fn(ev.sample_at(n, st, n0, n - n0));
  }
}

void for_each_pair(const multfunc::MultFunction& f, int64_t a1, int64_t b1,
                   const multfunc::MultFunction& g, int64_t a2, int64_t b2,
                   uint64_t n_lo, uint64_t n_hi,
                   const std::function<void(const Sample&, const Sample&)>& fn) {
  if (n_lo < 1 || n_hi < n_lo) throw InvalidInput("progression: empty or invalid range");
  Evaluator ef(f, a1, b1, n_hi);
  Evaluator eg(g, a2, b2, n_hi);
  SegmentState sf, sg;
  for (uint64_t n0 = n_lo; n0 <= n_hi; n0 += kSegment) {
    uint64_t n1 = std::min(n_hi, n0 + kSegment - 1);
    ef.run_segment(n0, n1, sf);
    eg.run_segment(n0, n1, sg);
    for (uint64_t n = n0; n <= n1; ++n)
      fn(ef.sample_at(n, sf, n0, n - n0), eg.sample_at(n, sg, n0, n - n0));
  }
}

}  // namespace multrec::progression
