#include <doctest.h>

#include <cmath>
#include <complex>

#include "multrec/multfunc.hpp"

using namespace multrec;
namespace mf = multrec::multfunc;
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
}  // namespace

TEST_CASE("liouville eval") {
  auto f = MultFunction::liouville();
  // 60 = 2^2*3*5 has Omega = 4, so lambda(60) = +1
  auto v = f.eval(60);
  REQUIRE(v.is_exact());
  CHECK(v.angle() == Angle::zero());
  CHECK(f.eval(2).angle() == Angle::half());
  CHECK(f.eval(8).angle() == Angle::half());
}

TEST_CASE("character mod 4 and its zero set") {
  auto chi = mf::dirichlet_character(4, std::vector<uint64_t>{1});
  CHECK(chi.at(1).angle() == Angle::zero());
  CHECK(chi.at(3).angle() == Angle::half());
  CHECK(chi.at(6).is_zero());
  CHECK(chi.conductor() == 4);
  auto f = MultFunction::character(chi);
  CHECK(!f.in_m());
  CHECK(f.eval(6).is_zero());
}

TEST_CASE("modified character example e(1/3) chi(3)") {
  auto chi = mf::dirichlet_character(4, std::vector<uint64_t>{1});
  auto f = MultFunction::modified_character(chi, {{2, Angle::of(1, 3)}});
  CHECK(f.in_m());
  auto v = f.eval(6);
  REQUIRE(v.is_exact());
  CHECK(v.angle() == Angle::of(5, 6));  // e(1/3) * e(1/2)
  // paper's ell = 0 modification keeps chi off 2 and sets 1 at 2
  auto g = MultFunction::modified_character(chi, {{2, Angle::zero()}});
  CHECK(g.eval(2).angle() == Angle::zero());
  CHECK(g.eval(3).angle() == Angle::half());
  CHECK_THROWS_AS(MultFunction::modified_character(chi, {}), InvalidInput);
}

TEST_CASE("principal character mod 1 is constant one") {
  auto chi = mf::dirichlet_character(1, std::vector<uint64_t>{});
  auto f = MultFunction::character(chi);
  CHECK(f.in_m());
  for (uint64_t n : {1ull, 17ull, 100ull}) CHECK(f.eval(n).angle() == Angle::zero());
}

TEST_CASE("cyclic characters") {
  auto c3 = mf::cyclic_character(3, 1);
  CHECK(c3.at(2).angle() == Angle::half());  // g = 2, phi = 2
  auto c5 = mf::cyclic_character(5, 1);
  CHECK(c5.at(2).angle() == Angle::of(1, 4));  // chi(2) = e(1/4)
  CHECK_THROWS_AS(mf::cyclic_character(2, 3), InvalidInput);
}

TEST_CASE("cyclic character value set: phi distinct values, min chord 2 sin(pi/phi)") {
  for (auto [p, u] : std::vector<std::pair<uint64_t, uint32_t>>{{3, 1}, {5, 1}, {7, 1}, {3, 2}}) {
    auto chi = mf::cyclic_character(p, u);
    uint64_t m = 1;
    for (uint32_t i = 0; i < u; ++i) m *= p;
    uint64_t phi = numkernel::euler_phi_prime_power(p, u);
    std::vector<Angle> values;
    for (uint64_t x = 1; x < m; ++x) {
      if (x % p == 0) continue;
      values.push_back(chi.at(x).angle());
    }
    REQUIRE(values.size() == phi);
    // all distinct, and the minimal pairwise torus distance is exactly 1/phi
    Rat min_dist = Rat::make(1, 1);
    for (size_t i = 0; i < values.size(); ++i)
      for (size_t j = i + 1; j < values.size(); ++j) {
        Rat d = values[i].minus(values[j]).dist_to_zero();
        CHECK(d.num != 0);
        if (rat_less(d, min_dist)) min_dist = d;
      }
    CHECK(min_dist == Rat::make(1, static_cast<int64_t>(phi)));
  }
}

TEST_CASE("unit algebra") {
  auto lam = MultFunction::liouville();
  auto sq = MultFunction::power(lam, 2);
  for (uint64_t n : {2ull, 15ull, 97ull, 1024ull}) CHECK(sq.eval(n).angle() == Angle::zero());

  auto tw = MultFunction::archimedean_twist(1.5);
  auto ctw = MultFunction::conjugate(tw);
  auto v = ctw.eval(10);
  CHECK(!v.is_exact());
  CHECK(std::abs(v.value() - std::polar(1.0, -1.5 * std::log(10.0))) < 1e-12);
  // pow(conj(twist(1.5)), 2) = n^{-3i}
  auto p2 = MultFunction::power(ctw, 2);
  CHECK(std::abs(p2.eval(7).value() - std::polar(1.0, -3.0 * std::log(7.0))) < 1e-12);

  auto chi4 = MultFunction::character(mf::dirichlet_character(4, std::vector<uint64_t>{1}));
  auto prod = MultFunction::product(chi4, lam);
  // chi(15) lambda(15) = chi(3) chi(5) * 1 = -1
  CHECK(prod.eval(15).angle() == Angle::half());
  CHECK_THROWS_AS(MultFunction::power(lam, 0), InvalidInput);
}

TEST_CASE("complete multiplicativity on random pairs") {
  auto chi5 = mf::dirichlet_character(5, std::vector<uint64_t>{1});
  std::vector<MultFunction> fams{
      MultFunction::liouville(),
      MultFunction::character(chi5),
      MultFunction::modified_character(mf::dirichlet_character(4, std::vector<uint64_t>{1}),
                                       {{2, Angle::of(1, 3)}}),
      MultFunction::archimedean_twist(0.7),
      MultFunction::power(MultFunction::liouville(), 3),
  };
  Rng rng{9};
  for (const auto& f : fams) {
    for (int t = 0; t < 2000; ++t) {
      uint64_t m = 1 + rng.next() % 1000000;
      uint64_t n = 1 + rng.next() % 1000000;
      UnitValue a = f.eval(m), b = f.eval(n), c = f.eval(m * n);
      if (a.is_zero() || b.is_zero()) {
        CHECK(c.is_zero());
        continue;
      }
      if (f.is_exact()) {
        CHECK(c.angle() == a.angle().plus(b.angle()));
      } else {
        CHECK(std::abs(c.value() - a.value() * b.value()) < 1e-10);
      }
    }
  }
}

TEST_CASE("character periodicity") {
  auto chi = mf::dirichlet_character(12, std::vector<uint64_t>{1, 1});
  for (uint64_t n = 1; n < 400; ++n) {
    auto a = chi.at(n);
    auto b = chi.at(n % 12);
    if (a.is_zero())
      CHECK(b.is_zero());
    else
      CHECK(a.angle() == b.angle());
  }
}

TEST_CASE("conductor computation") {
  // the character mod 12 induced by the nonprincipal one mod 3
  auto chars12 = mf::characters_mod(12);
  bool found_conductor3 = false;
  for (const auto& chi : chars12) {
    CHECK(chi.modulus() == 12);
    CHECK(12 % chi.conductor() == 0);
    if (chi.conductor() == 3) found_conductor3 = true;
  }
  CHECK(found_conductor3);
  CHECK(mf::characters_mod(12).size() == 4);  // phi(12) = 4
  auto principal = mf::dirichlet_character(12, std::vector<uint64_t>{0, 0});
  CHECK(principal.conductor() == 1);
  CHECK(principal.is_principal());
}

TEST_CASE("conjugate character keeps index consistent") {
  auto chi = mf::cyclic_character(5, 1);
  auto bar = chi.conjugate();
  for (uint64_t x = 1; x < 5; ++x)
    CHECK(bar.at(x).angle() == chi.at(x).angle().negated());
  CHECK(bar.index() == std::vector<uint64_t>{3});
}

TEST_CASE("nearest root: exact and floating") {
  // a = e(1/3), ell = 3: exact root
  CHECK(mf::nearest_root(UnitValue::exact(Angle::of(1, 3)), 3) == 1);
  // a = e(0.3), ell = 2 -> j = 1, and the claim inequality holds
  UnitValue a = UnitValue::from_turns(0.3);
  CHECK(mf::nearest_root(a, 2) == 1);
  double lhs = std::abs(a.value() - std::polar(1.0, M_PI));
  double rhs = M_PI / 4.0 * std::abs(a.pow(2).value() - 1.0);
  CHECK(lhs <= rhs + 1e-12);
  // ell = 1 always returns 0
  CHECK(mf::nearest_root(UnitValue::from_turns(0.49), 1) == 0);
}

TEST_CASE("nearest root inequality on random unit values") {
  Rng rng{1234};
  for (int t = 0; t < 100000; ++t) {
    double turns = static_cast<double>(rng.next() % (1ull << 52)) / static_cast<double>(1ull << 52);
    uint64_t ell = 1 + rng.next() % 12;
    UnitValue a = UnitValue::from_turns(turns);
    uint64_t j = mf::nearest_root(a, ell);
    double lhs = std::abs(a.value() - Angle::of(static_cast<int64_t>(j),
                                                static_cast<int64_t>(ell))
                                          .unit());
    double rhs = 2.0 * M_PI / (4.0 * static_cast<double>(ell)) *
                 std::abs(a.pow(static_cast<int64_t>(ell)).value() - 1.0);
    CHECK(lhs <= rhs + 1e-9);
  }
}
