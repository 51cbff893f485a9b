#include <doctest.h>

#include <numeric>

#include "multrec/numkernel.hpp"

using namespace multrec;
namespace nk = multrec::numkernel;

namespace {

// deterministic rng independent of the library
struct Rng {
  uint64_t s;
  uint64_t next() {
    s += 0x9E3779B97f4A7C15ull;
    uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
};

// independent Miller-Rabin oracle with a different witness schedule
bool mr_oracle(uint64_t n) {
  if (n < 2) return false;
  for (uint64_t p : {2, 3, 5, 7, 11, 13}) {
    if (n % p == 0) return n == p;
  }
  auto mulmod = [](uint64_t a, uint64_t b, uint64_t m) {
    return static_cast<uint64_t>(static_cast<unsigned __int128>(a) * b % m);
  };
  auto powmod = [&](uint64_t b, uint64_t e, uint64_t m) {
    uint64_t r = 1;
    b %= m;
    while (e) {
      if (e & 1) r = mulmod(r, b, m);
      b = mulmod(b, b, m);
      e >>= 1;
    }
    return r;
  };
  uint64_t d = n - 1;
  int s = 0;
  while (!(d & 1)) d >>= 1, ++s;
  for (uint64_t a : {2ull, 325ull, 9375ull, 28178ull, 450775ull, 9780504ull, 1795265022ull}) {
    if (a % n == 0) continue;
    uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool witness = true;
    for (int i = 1; i < s; ++i) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("factorize small and edge cases") {
  CHECK(nk::factorize(1).entries.empty());
  auto f12 = nk::factorize(12);
  REQUIRE(f12.entries.size() == 2);
  CHECK(f12.entries[0].prime == 2);
  CHECK(f12.entries[0].exponent == 2);
  CHECK(f12.entries[1].prime == 3);
  CHECK(f12.entries[1].exponent == 1);
  CHECK_THROWS_AS(nk::factorize(0), InvalidInput);
}

TEST_CASE("factorize Mersenne prime 2^61-1") {
  uint64_t m61 = 2305843009213693951ull;
  REQUIRE(mr_oracle(m61));  // independent primality oracle
  auto f = nk::factorize(m61);
  REQUIRE(f.entries.size() == 1);
  CHECK(f.entries[0].prime == m61);
  CHECK(f.entries[0].exponent == 1);
}

TEST_CASE("factorize large composites deterministically") {
  uint64_t n = 2305843009213693951ull - 1;  // 2 * 3^2 * 5^2 * 13 * 41 * 61 * 1321 * C
  auto f = nk::factorize(n);
  uint64_t v = 1;
  for (const auto& e : f.entries)
    for (uint32_t i = 0; i < e.exponent; ++i) v *= e.prime;
  CHECK(v == n);
  for (const auto& e : f.entries) CHECK(mr_oracle(e.prime));
  // rerun gives the same output
  auto f2 = nk::factorize(n);
  REQUIRE(f.entries.size() == f2.entries.size());
  for (size_t i = 0; i < f.entries.size(); ++i) CHECK(f.entries[i].prime == f2.entries[i].prime);
}

TEST_CASE("factorize is multiplicative on random coprime pairs") {
  Rng rng{42};
  int done = 0;
  while (done < 10000) {
    uint64_t m = 2 + rng.next() % 999998;
    uint64_t n = 2 + rng.next() % 999998;
    if (std::gcd(m, n) != 1) continue;
    ++done;
    auto fm = nk::factorize(m), fn = nk::factorize(n), fmn = nk::factorize(m * n);
    std::vector<nk::Factorization::Entry> merged(fm.entries);
    merged.insert(merged.end(), fn.entries.begin(), fn.entries.end());
    std::sort(merged.begin(), merged.end(),
              [](const auto& a, const auto& b) { return a.prime < b.prime; });
    REQUIRE(merged.size() == fmn.entries.size());
    for (size_t i = 0; i < merged.size(); ++i) {
      CHECK(merged[i].prime == fmn.entries[i].prime);
      CHECK(merged[i].exponent == fmn.entries[i].exponent);
    }
  }
}

TEST_CASE("crt_solve worked instance and brute-force oracle") {
  std::vector<nk::Congruence> sys{{13, 32}, {229, 243}};
  auto r = nk::crt_solve(sys);
  CHECK(r.residue == 6061);
  CHECK(r.modulus == 7776);
  // brute-force oracle over 0 <= r < 7776
  uint64_t expect = UINT64_MAX;
  for (uint64_t x = 0; x < 7776; ++x)
    if (x % 32 == 13 && x % 243 == 229) {
      expect = x;
      break;
    }
  CHECK(r.residue == expect);
}

TEST_CASE("crt_solve vacuous and inconsistent systems") {
  std::vector<nk::Congruence> vac{{0, 1}};
  auto r = nk::crt_solve(vac);
  CHECK(r.residue == 0);
  CHECK(r.modulus == 1);
  std::vector<nk::Congruence> bad{{0, 2}, {1, 4}};
  CHECK_THROWS_AS(nk::crt_solve(bad), NoSolution);
}

TEST_CASE("crt_solve satisfies every congruence exactly") {
  Rng rng{7};
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<nk::Congruence> sys;
    uint64_t x = rng.next() % 1000000;
    for (int i = 0; i < 4; ++i) {
      uint64_t m = 2 + rng.next() % 50;
      sys.push_back({x % m, m});
    }
    auto r = nk::crt_solve(sys);
    for (const auto& c : sys) CHECK(r.residue % c.modulus == c.residue);
    CHECK(x % r.modulus == r.residue);
  }
}

TEST_CASE("discrete_log examples") {
  CHECK(nk::discrete_log(2, 4, 5, 1) == 2);
  // enumerate powers 2,4,8,7,5,1 mod 9
  uint64_t cur = 1, expect = UINT64_MAX;
  for (uint64_t r = 0; r < 6; ++r) {
    if (cur == 7) expect = r;
    cur = cur * 2 % 9;
  }
  CHECK(expect == 4);
  CHECK(nk::discrete_log(2, 7, 3, 2) == 4);
  CHECK_THROWS_AS(nk::discrete_log(2, 3, 3, 2), InvalidInput);
  CHECK_THROWS_AS(nk::discrete_log(4, 2, 5, 1), InvalidInput);  // 4 generates only half
}

TEST_CASE("discrete_log round-trips for all prime powers below 1e4") {
  for (uint64_t p : {3ull, 5ull, 7ull, 11ull, 13ull}) {
    for (uint32_t u = 1;; ++u) {
      uint64_t m = 1;
      for (uint32_t i = 0; i < u; ++i) m *= p;
      if (m > 10000) break;
      uint64_t g = nk::smallest_generator(p, u);
      for (uint64_t x = 1; x < m; ++x) {
        if (x % p == 0) continue;
        uint64_t r = nk::discrete_log(g, x, p, u);
        CHECK(nk::pow_mod(g, r, m) == x);
      }
    }
  }
}

TEST_CASE("primes_in segments agree with the small sieve") {
  auto v = nk::primes_in(10, 50);
  std::vector<uint64_t> expect{11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47};
  CHECK(v == expect);
  auto w = nk::primes_in(999'983, 1'000'500);
  REQUIRE(!w.empty());
  CHECK(w.front() == 1'000'003);
  for (uint64_t p : w) CHECK(mr_oracle(p));
}
