#include "multrec/numkernel.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace multrec::numkernel {

uint64_t Factorization::value() const {
  uint64_t v = 1;
  for (const auto& e : entries)
    for (uint32_t i = 0; i < e.exponent; ++i) v *= e.prime;
  return v;
}

uint64_t Factorization::omega_total() const {
  uint64_t s = 0;
  for (const auto& e : entries) s += e.exponent;
  return s;
}

uint64_t mul_mod(uint64_t a, uint64_t b, uint64_t m) {
  return static_cast<uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

uint64_t pow_mod(uint64_t base, uint64_t exp, uint64_t m) {
  if (m == 1) return 0;
  uint64_t r = 1;
  base %= m;
  while (exp) {
    if (exp & 1) r = mul_mod(r, base, m);
    base = mul_mod(base, base, m);
    exp >>= 1;
  }
  return r;
}

uint64_t inv_mod(uint64_t a, uint64_t m) {
  int64_t t = 0, newt = 1;
  int64_t r = static_cast<int64_t>(m), newr = static_cast<int64_t>(a % m);
  while (newr != 0) {
    int64_t q = r / newr;
    std::swap(t -= q * newt, newt);
    std::swap(r -= q * newr, newr);
  }
  if (r != 1) throw InvalidInput("inv_mod: argument not invertible");
  if (t < 0) t += static_cast<int64_t>(m);
  return static_cast<uint64_t>(t);
}

bool is_prime(uint64_t n) {
  if (n < 2) return false;
  for (uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % p == 0) return n == p;
  }
  uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    uint64_t x = pow_mod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < s; ++i) {
      x = mul_mod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

const std::vector<uint32_t>& small_primes() {
  static const std::vector<uint32_t> primes = [] {
    constexpr uint32_t kLimit = 1'000'000;
    std::vector<bool> composite(kLimit + 1, false);
    std::vector<uint32_t> out;
    for (uint32_t i = 2; i <= kLimit; ++i) {
      if (!composite[i]) {
        out.push_back(i);
        for (uint64_t j = static_cast<uint64_t>(i) * i; j <= kLimit; j += i)
          composite[j] = true;
      }
    }
    return out;
  }();
  return primes;
}

namespace {

uint64_t pollard_brent(uint64_t n) {
  // Deterministic parameter walk; n is odd, composite, with no factor < 1e6.
  for (uint64_t c = 1;; ++c) {
    uint64_t x = 2, y = 2, d = 1;
    uint64_t q = 1;
    int power = 1, lam = 1;
    auto step = [&](uint64_t v) { return (mul_mod(v, v, n) + c) % n; };
    x = step(x);
    while (d == 1) {
      if (power == lam) {
        y = x;
        power *= 2;
        lam = 0;
      }
      x = step(x);
      ++lam;
      uint64_t diff = x > y ? x - y : y - x;
      if (diff == 0) break;
      q = mul_mod(q, diff, n);
      if (lam % 64 == 0 || power == lam) {
        d = std::gcd(q, n);
        if (d != 1 && d != n) return d;
        if (d == n) break;
      }
    }
    d = std::gcd(q, n);
    if (d != 1 && d != n) return d;
    // retry with the next c
  }
}

void factor_rec(uint64_t n, std::vector<uint64_t>& out) {
  if (n == 1) return;
  if (is_prime(n)) {
    out.push_back(n);
    return;
  }
  uint64_t d = pollard_brent(n);
  factor_rec(d, out);
  factor_rec(n / d, out);
}

}  // namespace

Factorization factorize(uint64_t n) {
  if (n == 0) throw InvalidInput("factorize: n must be positive");
  Factorization f;
  if (n == 1) return f;
  for (uint32_t p : small_primes()) {
    if (static_cast<uint64_t>(p) * p > n) break;
    if (n % p == 0) {
      uint32_t e = 0;
      while (n % p == 0) {
        n /= p;
        ++e;
      }
      f.entries.push_back({p, e});
    }
  }
  if (n > 1) {
    if (n < 1'000'000'000'000ull || is_prime(n)) {
      // below 1e12 any leftover after the 1e6 sieve is prime
      f.entries.push_back({n, 1});
    } else {
      std::vector<uint64_t> rest;
      factor_rec(n, rest);
      std::sort(rest.begin(), rest.end());
      for (size_t i = 0; i < rest.size();) {
        size_t j = i;
        while (j < rest.size() && rest[j] == rest[i]) ++j;
        f.entries.push_back({rest[i], static_cast<uint32_t>(j - i)});
        i = j;
      }
      std::sort(f.entries.begin(), f.entries.end(),
                [](const auto& a, const auto& b) { return a.prime < b.prime; });
    }
  }
  return f;
}

uint32_t valuation(uint64_t n, uint64_t p) {
  if (n == 0) throw InvalidInput("valuation of zero");
  uint32_t v = 0;
  while (n % p == 0) {
    n /= p;
    ++v;
  }
  return v;
}

Congruence crt_solve(std::span<const Congruence> congruences) {
  if (congruences.empty()) return {0, 1};
  unsigned __int128 r = 0, m = 1;
  auto reduce = [](unsigned __int128 v, unsigned __int128 mod) {
    return static_cast<uint64_t>(v % mod);
  };
  for (const auto& c : congruences) {
    if (c.modulus == 0) throw InvalidInput("crt_solve: zero modulus");
    if (c.residue >= c.modulus) throw InvalidInput("crt_solve: residue >= modulus");
    uint64_t m2 = c.modulus, r2 = c.residue;
    uint64_t m1 = static_cast<uint64_t>(m);
    uint64_t r1 = static_cast<uint64_t>(r);
    uint64_t g = std::gcd(m1, m2);
    uint64_t diff = r2 >= r1 ? r2 - r1 : m2 - ((r1 - r2) % m2);
    diff %= m2;
    if (diff % g != 0) throw NoSolution("crt_solve: inconsistent congruence system");
    uint64_t m2g = m2 / g;
    uint64_t k = mul_mod((diff / g) % m2g, inv_mod((m1 / g) % m2g, m2g == 1 ? 1 : m2g), m2g == 1 ? 1 : m2g);
    unsigned __int128 lcm = m / g * m2;
    if (lcm > UINT64_MAX) throw RangeError("crt_solve: combined modulus exceeds 64 bits");
    unsigned __int128 nr = r + m * k;
    m = lcm;
    r = nr % m;
    (void)reduce;
  }
  return {static_cast<uint64_t>(r), static_cast<uint64_t>(m)};
}

uint64_t euler_phi_prime_power(uint64_t p, uint32_t u) {
  uint64_t phi = p - 1;
  for (uint32_t i = 1; i < u; ++i) phi *= p;
  return phi;
}

uint64_t smallest_generator(uint64_t p, uint32_t u) {
  if (p == 2) throw InvalidInput("smallest_generator: p must be an odd prime");
  if (!is_prime(p)) throw InvalidInput("smallest_generator: p not prime");
  uint64_t m = 1;
  for (uint32_t i = 0; i < u; ++i) m *= p;
  uint64_t phi = euler_phi_prime_power(p, u);
  auto phi_factors = factorize(phi);
  for (uint64_t g = 2; g < m; ++g) {
    if (g % p == 0) continue;
    bool generator = true;
    for (const auto& e : phi_factors.entries) {
      if (pow_mod(g, phi / e.prime, m) == 1) {
        generator = false;
        break;
      }
    }
    if (generator) return g;
  }
  throw InvalidInput("smallest_generator: no generator found");
}

uint64_t discrete_log(uint64_t g, uint64_t x, uint64_t p, uint32_t u) {
  if (p == 2) throw InvalidInput("discrete_log: p must be an odd prime");
  uint64_t m = 1;
  for (uint32_t i = 0; i < u; ++i) m *= p;
  x %= m;
  if (x == 0 || x % p == 0) throw InvalidInput("discrete_log: target shares a factor with the modulus");
  uint64_t phi = euler_phi_prime_power(p, u);
  // order check: g must generate the full cyclic group
  auto phi_factors = factorize(phi);
  for (const auto& e : phi_factors.entries) {
    if (pow_mod(g, phi / e.prime, m) == 1)
      throw InvalidInput("discrete_log: g is not a generator");
  }
  // baby-step giant-step
  uint64_t s = 1;
  while (s * s < phi) ++s;
  std::vector<std::pair<uint64_t, uint64_t>> baby;
  baby.reserve(s);
  uint64_t cur = 1;
  for (uint64_t j = 0; j < s; ++j) {
    baby.emplace_back(cur, j);
    cur = mul_mod(cur, g, m);
  }
  std::sort(baby.begin(), baby.end());
  uint64_t giant = inv_mod(cur, m);  // g^{-s}
  uint64_t gamma = x;
  for (uint64_t i = 0; i <= s; ++i) {
    auto it = std::lower_bound(baby.begin(), baby.end(), std::make_pair(gamma, uint64_t{0}));
    if (it != baby.end() && it->first == gamma) {
      uint64_t r = i * s + it->second;
      return r % phi;
    }
    gamma = mul_mod(gamma, giant, m);
  }
  throw InvalidInput("discrete_log: no solution (broken group assumption)");
}

std::vector<uint64_t> primes_in(uint64_t lo_exclusive, uint64_t hi_inclusive) {
  std::vector<uint64_t> out;
  if (hi_inclusive <= lo_exclusive) return out;
  if (hi_inclusive > kPrimeBudget)
    throw RangeError("primes_in: window end exceeds the prime budget (2e8)");
  const auto& sp = small_primes();
  if (hi_inclusive <= sp.back()) {
    auto lo_it = std::upper_bound(sp.begin(), sp.end(), lo_exclusive);
    auto hi_it = std::upper_bound(sp.begin(), sp.end(), hi_inclusive);
    out.assign(lo_it, hi_it);
    return out;
  }
  // take small primes first, then sieve segments
  for (auto it = std::upper_bound(sp.begin(), sp.end(), lo_exclusive); it != sp.end(); ++it)
    out.push_back(*it);
  uint64_t seg_lo = std::max<uint64_t>(lo_exclusive + 1, sp.back() + 1);
  constexpr uint64_t kSeg = 1 << 20;
  std::vector<bool> comp;
  for (uint64_t base = seg_lo; base <= hi_inclusive; base += kSeg) {
    uint64_t end = std::min(hi_inclusive, base + kSeg - 1);
    comp.assign(end - base + 1, false);
    for (uint32_t p : sp) {
      uint64_t pp = static_cast<uint64_t>(p) * p;
      if (pp > end) break;
      uint64_t start = std::max<uint64_t>(pp, (base + p - 1) / p * p);
      for (uint64_t j = start; j <= end; j += p) comp[j - base] = true;
    }
    for (uint64_t v = base; v <= end; ++v)
      if (!comp[v - base]) out.push_back(v);
  }
  return out;
}

}  // namespace multrec::numkernel
