#include <doctest.h>

#include <cmath>
#include <complex>

#include "multrec/grammar.hpp"
#include "multrec/pretentious.hpp"

using namespace multrec;
namespace pre = multrec::pretentious;
namespace mf = multrec::multfunc;
namespace nk = multrec::numkernel;
using mf::MultFunction;

namespace {
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

int liouville_sign(uint64_t n) {
  int s = 1;
  for (const auto& e : nk::factorize(n).entries)
    if (e.exponent % 2 == 1) s = -s;
  return s;
}
}  // namespace

TEST_CASE("distance of f to itself (zero-free) vanishes") {
  auto lam = MultFunction::liouville();
  CHECK(pre::distance(lam, lam, {1, 10000}) == 0.0);
}

TEST_CASE("distance(1, liouville, (1,10])^2 = 2(1/2+1/3+1/5+1/7)") {
  double d = pre::distance(MultFunction::one(), MultFunction::liouville(), {1, 10});
  double expect = 2.0 * (1.0 / 2 + 1.0 / 3 + 1.0 / 5 + 1.0 / 7);
  CHECK(d * d == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("window additivity is exact in fixed point") {
  auto f = MultFunction::liouville();
  auto g = MultFunction::character(mf::dirichlet_character(4, std::vector<uint64_t>{1}));
  for (auto w : std::vector<std::array<double, 3>>{
           {1, 50, 1000}, {2, 97, 523}, {10, 1000, 100000}}) {
    auto whole = pre::distance_sq_fixed(f, g, {w[0], w[2]});
    auto left = pre::distance_sq_fixed(f, g, {w[0], w[1]});
    auto right = pre::distance_sq_fixed(f, g, {w[1], w[2]});
    CHECK(whole == left + right);
  }
}

TEST_CASE("triangle inequality on random triples") {
  Rng rng{17};
  std::vector<MultFunction> pool;
  pool.push_back(MultFunction::liouville());
  pool.push_back(MultFunction::one());
  pool.push_back(MultFunction::archimedean_twist(0.5));
  pool.push_back(MultFunction::archimedean_twist(-1.25));
  for (uint64_t q : {3ull, 4ull, 5ull, 7ull, 8ull}) {
    for (const auto& chi : mf::characters_mod(q)) pool.push_back(MultFunction::character(chi));
  }
  for (int t = 0; t < 100; ++t) {
    const auto& f = pool[rng.next() % pool.size()];
    const auto& g = pool[rng.next() % pool.size()];
    const auto& h = pool[rng.next() % pool.size()];
    pre::DistanceWindow w{1, 2000};
    double fg = pre::distance(f, g, w);
    double gh = pre::distance(g, h, w);
    double fh = pre::distance(f, h, w);
    CHECK(fh <= fg + gh + 1e-9);
  }
}

TEST_CASE("log average of the constant 1 matches the harmonic oracle") {
  auto la = pre::log_average(MultFunction::one(), 100);
  double h = 0;
  for (int n = 1; n <= 100; ++n) h += 1.0 / n;
  CHECK(la.value.real() == doctest::Approx(h / std::log(100.0)).epsilon(1e-14));
  CHECK(la.value.imag() == 0.0);
  CHECK(la.value.real() == doctest::Approx(1.1264).epsilon(1e-4));
}

TEST_CASE("log average of liouville at X = 10, term-by-term oracle") {
  auto la = pre::log_average(MultFunction::liouville(), 10);
  double oracle = 0;
  for (int n = 1; n <= 10; ++n) oracle += static_cast<double>(liouville_sign(n)) / n;
  oracle /= std::log(10.0);
  CHECK(la.value.real() == doctest::Approx(oracle).epsilon(1e-14));
  // (1 - 1/2 - 1/3 + 1/4 - 1/5 + 1/6 - 1/7 - 1/8 + 1/9 + 1/10) / log 10
  double direct = (1 - 1.0 / 2 - 1.0 / 3 + 1.0 / 4 - 1.0 / 5 + 1.0 / 6 - 1.0 / 7 - 1.0 / 8 +
                   1.0 / 9 + 1.0 / 10) /
                  std::log(10.0);
  CHECK(la.value.real() == doctest::Approx(direct).epsilon(1e-14));
}

TEST_CASE("log average of the nonprincipal character mod 4 at 1e5") {
  auto chi = MultFunction::character(mf::dirichlet_character(4, std::vector<uint64_t>{1}));
  auto la = pre::log_average(chi, 100000);
  // direct-summation oracle with the +1,0,-1,0 pattern
  double s = 0;
  for (uint64_t n = 1; n <= 100000; ++n) {
    if (n % 4 == 1) s += 1.0 / static_cast<double>(n);
    if (n % 4 == 3) s -= 1.0 / static_cast<double>(n);
  }
  double oracle = s / std::log(100000.0);
  CHECK(la.value.real() == doctest::Approx(oracle).epsilon(1e-10));
  // the modulus is small; at this scale it sits near L(1,chi)/log X ~ 0.068
  CHECK(std::abs(la.value) < 0.1);
  CHECK(std::abs(la.value) == doctest::Approx(0.06821838).epsilon(1e-5));
}

TEST_CASE("log averages along progressions") {
  auto lam = MultFunction::liouville();
  auto la = pre::log_average(lam, 50, pre::Progression{3, 1});
  double oracle = 0;
  for (int n = 1; n <= 50; ++n)
    oracle += static_cast<double>(liouville_sign(3 * n + 1)) / n;
  oracle /= std::log(50.0);
  CHECK(la.value.real() == doctest::Approx(oracle).epsilon(1e-12));
  CHECK_THROWS_AS(pre::log_average(lam, 50, pre::Progression{3, 5}), InvalidInput);
}

TEST_CASE("correlation basics") {
  // constant summand reduces to the harmonic mean
  auto one = MultFunction::one();
  auto c = pre::correlation(one, one, 1, 1, 1, 0, 1000);
  auto la = pre::log_average(one, 1000);
  CHECK(c.real() == doctest::Approx(la.value.real()).epsilon(1e-12));

  // two-point Liouville correlation is small (strong aperiodicity)
  auto lam = MultFunction::liouville();
  auto c2 = pre::correlation(lam, lam, 1, 1, 1, 0, 10000);
  CHECK(std::abs(c2) < 0.1);

  // the conjugated archimedean pair concentrates near 1
  auto tw = MultFunction::archimedean_twist(1.0);
  auto c3 = pre::correlation(tw, MultFunction::conjugate(tw), 1, 1, 1, 0, 10000);
  CHECK(std::abs(c3) > 0.9);
}

TEST_CASE("correlation is bounded by the log average of 1") {
  auto bound = pre::log_average(MultFunction::one(), 20000).harmonic_over_log;
  for (const char* expr : {"liouville", "twist(0.5)", "mul(liouville,twist(1.0))"}) {
    auto f = grammar::parse_function(expr);
    auto c = pre::correlation(f, f, 2, 1, 2, 0, 20000);
    CHECK(std::abs(c) <= bound + 1e-12);
  }
}

TEST_CASE("halasz gap report") {
  auto one_gap = pre::halasz_gap(MultFunction::one(), 10000);
  CHECK(one_gap.rhs == doctest::Approx(1.0));
  CHECK(one_gap.lhs == doctest::Approx(1.0).epsilon(0.1));

  auto lam_gap = pre::halasz_gap(MultFunction::liouville(), 10000);
  double sum_inv_p = 0;
  for (uint64_t p : nk::primes_in(1, 10000)) sum_inv_p += 1.0 / static_cast<double>(p);
  CHECK(lam_gap.rhs == doctest::Approx(std::exp(-sum_inv_p)).epsilon(1e-9));
  CHECK(lam_gap.lhs < 0.05);

  auto chi_gap = pre::halasz_gap(
      MultFunction::character(mf::dirichlet_character(4, std::vector<uint64_t>{1})), 10000);
  CHECK(std::isfinite(chi_gap.ratio));
}

TEST_CASE("aperiodicity profile trivial matches") {
  // f = n^{i t0} with t0 on the grid: the matching twist is searched
  auto f = MultFunction::archimedean_twist(2.0);
  std::vector<double> grid{-4.0, -2.0, 0.0, 2.0, 4.0};
  auto prof = pre::aperiodicity_profile(f, 2, 1000, grid, {false, false});
  CHECK(prof.infimum == doctest::Approx(0.0).epsilon(1e-9));

  // f = liouville^2 = 1: infimum 0 at t = 0 with the principal character
  auto sq = MultFunction::power(MultFunction::liouville(), 2);
  auto prof2 = pre::aperiodicity_profile(sq, 2, 1000, grid, {false, false});
  CHECK(prof2.infimum == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(prof2.argmin_conductor == 1);

  CHECK_THROWS_AS(pre::aperiodicity_profile(f, 2, 1000, {}, {}), InvalidInput);
}

TEST_CASE("liouville profile stays large") {
  std::vector<double> grid;
  for (int i = 0; i < 200; ++i) grid.push_back(-40000.0 + i * (80000.0 / 199));
  auto prof = pre::aperiodicity_profile(MultFunction::liouville(), 4, 10000, grid, {true, false});
  CHECK(prof.infimum > 1.0);
}

TEST_CASE("profile is monotone under grid refinement and conductor growth") {
  auto f = grammar::parse_function("mul(modify(char(3,1),{3:1/2}),twist(0.5))");
  std::vector<double> coarse, fine;
  for (int i = 0; i < 20; ++i) coarse.push_back(-10.0 + i);
  fine = coarse;
  for (int i = 0; i < 19; ++i) fine.push_back(-9.5 + i);
  std::sort(fine.begin(), fine.end());
  auto p_coarse = pre::aperiodicity_profile(f, 4, 2000, coarse, {false, false});
  auto p_fine = pre::aperiodicity_profile(f, 4, 2000, fine, {false, false});
  CHECK(p_fine.infimum <= p_coarse.infimum + 1e-15);
  auto p_b3 = pre::aperiodicity_profile(f, 3, 2000, coarse, {false, false});
  CHECK(p_coarse.infimum <= p_b3.infimum + 1e-15);
}

TEST_CASE("prime character sums") {
  auto chi1 = mf::dirichlet_character(1, std::vector<uint64_t>{});
  CHECK(std::abs(pre::prime_character_sum(chi1, 0, 100, 10)) == 0.0);
  // principal mod 1, a=0: sum of 1/p over p <= 100
  double oracle = 0;
  for (uint64_t p : nk::primes_in(1, 100)) oracle += 1.0 / static_cast<double>(p);
  auto s = pre::prime_character_sum(chi1, 0, 2, 100);
  CHECK(s.real() == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(s.real() == doctest::Approx(1.802817).epsilon(1e-5));

  // conjugation symmetry: sum(conj chi, -a) = conj(sum(chi, a))
  auto chi5 = mf::dirichlet_character(5, std::vector<uint64_t>{1});
  auto a = pre::prime_character_sum(chi5, 1.25, 2, 20000);
  auto b = pre::prime_character_sum(chi5.conjugate(), -1.25, 2, 20000);
  CHECK(b.real() == doctest::Approx(a.real()).epsilon(1e-12));
  CHECK(b.imag() == doctest::Approx(-a.imag()).epsilon(1e-12));
}

TEST_CASE("concentration residual") {
  // exact-match case: f = 1 against the principal character, t = 0
  auto res = pre::concentration_residual(MultFunction::one(),
                                         mf::dirichlet_character(1, std::vector<uint64_t>{}),
                                         0.0, 6, 1, 2000);
  CHECK(res.lhs == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(!res.out_of_regime);

  // raw Liouville against the principal character is out of regime
  auto res2 = pre::concentration_residual(MultFunction::liouville(),
                                          mf::dirichlet_character(1, std::vector<uint64_t>{}),
                                          0.0, 6, 1, 2000);
  CHECK(res2.out_of_regime);
  CHECK(res2.lhs > 0);

  CHECK_THROWS_AS(pre::concentration_residual(MultFunction::one(),
                                              mf::dirichlet_character(1, std::vector<uint64_t>{}),
                                              0.0, 6, 2, 2000),
                  InvalidInput);  // gcd(a, Q) != 1
  CHECK_THROWS_AS(pre::concentration_residual(MultFunction::one(),
                                              mf::dirichlet_character(1, std::vector<uint64_t>{}),
                                              0.0, 15, 1, 2000),
                  InvalidInput);  // 2 does not divide Q
}
