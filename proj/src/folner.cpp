#include "multrec/folner.hpp"

#include <algorithm>
#include <numeric>

#include "multrec/progression.hpp"

namespace multrec::folner {

namespace nk = multrec::numkernel;
using multfunc::MultFunction;

namespace {

BigInt big_pow(uint64_t p, uint32_t e) {
  BigInt v = 1;
  for (uint32_t i = 0; i < e; ++i) v *= p;
  return v;
}

BigInt big_mod(const BigInt& a, const BigInt& m) {
  BigInt r = a % m;
  if (r < 0) r += m;
  return r;
}

BigInt big_inv(const BigInt& a, const BigInt& m) {
  BigInt old_r = big_mod(a, m), r = m;
  BigInt old_s = 1, s = 0;
  while (r != 0) {
    BigInt q = old_r / r;
    BigInt tmp = old_r - q * r;
    old_r = r;
    r = tmp;
    tmp = old_s - q * s;
    old_s = s;
    s = tmp;
  }
  if (old_r != 1) throw InvalidInput("big_inv: not invertible");
  return big_mod(old_s, m);
}

uint32_t big_valuation(BigInt v, uint64_t p) {
  uint32_t e = 0;
  if (v < 0) v = -v;
  while (v != 0 && v % p == 0) {
    v /= p;
    ++e;
  }
  return e;
}

int64_t gcd_abs(int64_t a, int64_t b) {
  return std::gcd(a < 0 ? -a : a, b < 0 ? -b : b);
}

// CRT over pairwise coprime big moduli.
BigInt big_crt(const std::vector<std::pair<BigInt, BigInt>>& residue_modulus, BigInt* total) {
  BigInt r = 0, m = 1;
  for (const auto& [res, mod] : residue_modulus) {
    BigInt t = big_mod(res - r, mod);
    t = big_mod(t * big_inv(big_mod(m, mod), mod), mod);
    r += m * t;
    m *= mod;
  }
  if (total) *total = m;
  return r;
}

UnitValue value_at_exponents(const MultFunction& f, const std::vector<uint64_t>& primes,
                             const std::vector<uint32_t>& exps) {
  UnitValue v = UnitValue::one();
  for (size_t i = 0; i < primes.size(); ++i) {
    if (exps[i] == 0) continue;
    v = v.times(f.prime_value(primes[i]).pow(exps[i]));
  }
  return v;
}

UnitValue char_at_big(const multfunc::DirichletCharacter& chi, const BigInt& n) {
  if (chi.modulus() == 1) return UnitValue::one();
  BigInt r = big_mod(n, BigInt(chi.modulus()));
  return chi.at(static_cast<uint64_t>(r));
}

bool unit_equal(const UnitValue& a, const UnitValue& b) {
  if (a.is_zero() || b.is_zero()) return a.is_zero() && b.is_zero();
  if (a.is_exact() && b.is_exact()) return a.angle() == b.angle();
  return std::abs(a.value() - b.value()) < 1e-12;
}

}  // namespace

void validate(const FolnerParams& params) {
  if (params.primes.empty()) throw InvalidInput("folner: prime set must be nonempty");
  if (params.hi <= params.lo) throw InvalidInput("folner: empty exponent window");
  for (uint64_t p : params.primes)
    if (!nk::is_prime(p)) throw InvalidInput("folner: non-prime in prime set");
  std::vector<uint64_t> sorted(params.primes);
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InvalidInput("folner: duplicate prime in prime set");
  double count = std::pow(static_cast<double>(params.width()),
                          static_cast<double>(params.primes.size()));
  if (count > static_cast<double>(kMaxElements))
    throw RangeError("folner: element count exceeds budget (1e6)");
  double bits = 0;
  for (uint64_t p : params.primes) bits += params.hi * std::log2(static_cast<double>(p));
  if (bits > static_cast<double>(kMaxValueBits))
    throw RangeError("folner: element values exceed the big-integer budget");
}

std::vector<FolnerElement> folner_set(const FolnerParams& params) {
  validate(params);
  size_t k = params.primes.size();
  size_t total = 1;
  for (size_t i = 0; i < k; ++i) total *= params.width();
  std::vector<FolnerElement> out;
  out.reserve(total);
  std::vector<uint32_t> exps(k, params.lo + 1);
  for (size_t cnt = 0; cnt < total; ++cnt) {
    FolnerElement el;
    el.exponents = exps;
    el.value = 1;
    for (size_t i = 0; i < k; ++i) el.value *= big_pow(params.primes[i], exps[i]);
    out.push_back(std::move(el));
    for (size_t i = 0; i < k; ++i) {  // first prime's exponent varies fastest
      if (exps[i] < params.hi) {
        ++exps[i];
        break;
      }
      exps[i] = params.lo + 1;
    }
  }
  return out;
}

std::pair<uint64_t, uint64_t> folner_ratio(const FolnerParams& params, uint64_t p) {
  validate(params);
  if (std::find(params.primes.begin(), params.primes.end(), p) == params.primes.end())
    throw InvalidInput("folner_ratio: p is not in the prime set");
  // Q stays in Phi after multiplying by p iff theta_p < hi
  uint64_t w = params.width();
  uint64_t g = std::gcd(w - 1, w);
  return {(w - 1) / g, w / g};
}

MultiplicativeAverage multiplicative_average(const MultFunction& f, const FolnerParams& params) {
  validate(params);
  // the average over the product set factors through per-prime means
  std::complex<double> avg = 1.0;
  for (uint64_t p : params.primes) {
    UnitValue fp = f.prime_value(p);
    std::complex<double> mean = 0.0;
    for (uint32_t e = params.lo + 1; e <= params.hi; ++e) mean += fp.pow(e).value();
    avg *= mean / static_cast<double>(params.width());
  }
  MultiplicativeAverage out;
  out.average = avg;
  out.all_within_bound = true;
  for (uint64_t p : params.primes) {
    auto [rn, rd] = folner_ratio(params, p);
    double bound = 2.0 * (1.0 - static_cast<double>(rn) / static_cast<double>(rd));
    double lhs = std::abs((1.0 - f.prime_value(p).value()) * avg);
    bool pass = lhs <= bound + 1e-12;
    out.all_within_bound = out.all_within_bound && pass;
    out.rows.push_back({p, lhs, bound});
  }
  return out;
}

QDecomposition q_decompose(const FolnerParams& params, const FolnerElement& Q,
                           int64_t a1, int64_t b1, int64_t a2, int64_t b2,
                           uint32_t mu, uint32_t nu) {
  validate(params);
  if (a1 < 1 || a2 < 1) throw PreconditionError("q_decompose: a1, a2 must be positive");
  if (Q.exponents.size() != params.primes.size())
    throw InvalidInput("q_decompose: exponent tuple does not match the prime set");
  for (size_t i = 0; i < Q.exponents.size(); ++i)
    if (Q.exponents[i] <= params.lo || Q.exponents[i] > params.hi)
      throw InvalidInput("q_decompose: exponent outside the window");
  if (gcd_abs(a1, a2) != 1) throw PreconditionError("q_decompose: gcd(a1,a2) != 1");
  if (gcd_abs(a1, b1) != 1) throw PreconditionError("q_decompose: gcd(a1,b1) != 1");
  if (gcd_abs(a2, b2) != 1) throw PreconditionError("q_decompose: gcd(a2,b2) != 1");
  __int128 u128 = static_cast<__int128>(a1) * b2 - static_cast<__int128>(a2) * b1;
  if (u128 <= 0)
    throw PreconditionError("q_decompose: requires a1*b2 > a2*b1 (normalize the quadruple)");
  if (u128 > INT64_MAX) throw RangeError("q_decompose: u overflows");
  int64_t u = static_cast<int64_t>(u128);

  // every prime of a1 must be listed so that a1-side congruences exist
  for (const auto& e : nk::factorize(static_cast<uint64_t>(a1)).entries) {
    if (std::find(params.primes.begin(), params.primes.end(), e.prime) == params.primes.end())
      throw PreconditionError("q_decompose: prime " + std::to_string(e.prime) +
                              " of a1 is not in the Folner prime set");
  }
  // every prime of u must be listed, with window clearance theta >= 2 v_p(u)
  for (const auto& e : nk::factorize(static_cast<uint64_t>(u)).entries) {
    auto it = std::find(params.primes.begin(), params.primes.end(), e.prime);
    if (it == params.primes.end())
      throw PreconditionError("q_decompose: prime " + std::to_string(e.prime) +
                              " of u = a1*b2 - a2*b1 is not in the Folner prime set");
    size_t idx = static_cast<size_t>(it - params.primes.begin());
    if (Q.exponents[idx] < 2 * e.exponent)
      throw PreconditionError("q_decompose: window exponent at prime " +
                              std::to_string(e.prime) +
                              " too small for u (need theta >= 2*v_p(u))");
  }

  QDecomposition dec;
  dec.params = params;
  dec.Q = Q;
  dec.a1 = a1;
  dec.b1 = b1;
  dec.a2 = a2;
  dec.b2 = b2;
  dec.mu = mu;
  dec.nu = nu;
  dec.u = u;
  dec.A = 1;
  dec.W = 1;
  for (size_t i = 0; i < params.primes.size(); ++i) {
    if (a1 % static_cast<int64_t>(params.primes[i]) == 0)
      dec.A *= big_pow(params.primes[i], Q.exponents[i]);
    else
      dec.W *= big_pow(params.primes[i], Q.exponents[i]);
  }

  std::vector<std::pair<BigInt, BigInt>> congruences;
  for (size_t i = 0; i < params.primes.size(); ++i) {
    uint64_t p = params.primes[i];
    uint32_t theta = Q.exponents[i];
    bool a_side = a1 % static_cast<int64_t>(p) == 0;
    uint32_t extra = a_side ? mu : nu;
    if (theta < extra + 1)
      throw PreconditionError("q_decompose: exponent window must exceed " +
                              std::string(a_side ? "mu" : "nu") + " at prime " +
                              std::to_string(p) + " (need theta >= " +
                              std::to_string(extra + 1) + ")");
    BigInt M = big_pow(p, theta + 1 + extra);
    BigInt res;
    if (a_side) {
      // r = (A b1 - b2 W) a2^{-1} W^{-1} mod p^{theta+1+mu}
      BigInt rhs = big_mod(dec.A * b1 - dec.W * b2, M);
      res = big_mod(rhs * big_inv(BigInt(a2), M) % M * big_inv(dec.W, M), M);
    } else {
      // r = a1^{-1} (W - b1) mod p^{theta+1+nu}
      res = big_mod(big_mod(dec.W - b1, M) * big_inv(BigInt(a1), M), M);
    }
    congruences.emplace_back(res, M);
  }
  BigInt total;
  dec.r_Q = big_crt(congruences, &total);
  BigInt q2 = dec.Q.value * dec.Q.value;
  if (total > q2) throw PreconditionError("q_decompose: congruence moduli exceed Q^2");

  BigInt lnum = dec.r_Q * a1 + b1;
  BigInt mnum = dec.r_Q * a2 + b2;
  if (lnum % dec.W != 0 || mnum % dec.A != 0)
    throw PreconditionError("q_decompose: internal divisibility failed (inconsistent congruences)");
  dec.l_Q = lnum / dec.W;
  dec.m_Q = mnum / dec.A;
  return dec;
}

QTrickReport verify_qtrick(const QDecomposition& dec) {
  QTrickReport rep;
  auto add = [&](std::string name, bool pass, std::string detail = "") {
    rep.checks.push_back({std::move(name), pass, std::move(detail)});
  };
  BigInt q2 = dec.Q.value * dec.Q.value;
  add("r_Q in [0, Q^2)", dec.r_Q >= 0 && dec.r_Q < q2);

  BigInt lnum = dec.r_Q * dec.a1 + dec.b1;
  BigInt mnum = dec.r_Q * dec.a2 + dec.b2;
  bool l_int = lnum % dec.W == 0;
  add("integrality of l_Q", l_int);
  bool m_int = mnum % dec.A == 0;
  add("integrality of m_Q", m_int);
  if (l_int) add("l_Q * W = a1 r_Q + b1", dec.l_Q * dec.W == lnum);
  if (m_int) add("m_Q * A = a2 r_Q + b2", dec.m_Q * dec.A == mnum);

  for (size_t i = 0; i < dec.params.primes.size(); ++i) {
    uint64_t p = dec.params.primes[i];
    uint32_t theta = dec.Q.exponents[i];
    bool a_side = dec.a1 % static_cast<int64_t>(p) == 0;
    uint32_t v = big_valuation(a_side ? mnum : lnum, p);
    add("p^theta fully divides " + std::string(a_side ? "a2 r_Q + b2" : "a1 r_Q + b1") +
            " at p = " + std::to_string(p),
        v == theta, "valuation " + std::to_string(v) + " vs theta " + std::to_string(theta));
  }

  BigInt g1 = boost::multiprecision::gcd(boost::multiprecision::abs(dec.l_Q),
                                         BigInt(dec.a1) * dec.A * dec.A * dec.W);
  add("gcd(l_Q, a1 A^2 W) = 1", g1 == 1);
  BigInt g2 = boost::multiprecision::gcd(boost::multiprecision::abs(dec.m_Q),
                                         BigInt(dec.a2) * dec.A * dec.W * dec.W);
  add("gcd(a2 A W^2, m_Q) = u", g2 == dec.u,
      "gcd = " + g2.str() + ", u = " + std::to_string(dec.u));

  for (const auto& e : nk::factorize(static_cast<uint64_t>(dec.a1)).entries) {
    BigInt diff = dec.l_Q - dec.m_Q;
    add("l_Q = m_Q mod " + std::to_string(e.prime), big_mod(diff, BigInt(e.prime)) == 0);
  }

  rep.ok = std::all_of(rep.checks.begin(), rep.checks.end(),
                       [](const Check& c) { return c.pass; });
  return rep;
}

void require_qtrick(const QDecomposition& dec) {
  auto rep = verify_qtrick(dec);
  for (const auto& c : rep.checks)
    if (!c.pass)
      throw CertificateFailure("q-trick identity failed: " + c.name +
                               (c.detail.empty() ? "" : " (" + c.detail + ")"));
}

std::pair<multfunc::DirichletCharacter, multfunc::DirichletCharacter> split_character(
    const multfunc::DirichletCharacter& chi, int64_t a1) {
  uint64_t q = chi.modulus();
  if (q == 1) {
    auto triv = multfunc::dirichlet_character(1, {});
    return {triv, triv};
  }
  auto fact = nk::factorize(q);
  uint64_t q1 = 1, q2 = 1;
  std::vector<uint64_t> idx1, idx2;
  size_t pos = 0;
  for (const auto& e : fact.entries) {
    size_t nidx = (e.prime == 2 && e.exponent >= 3) ? 2 : 1;
    bool on_a1 = a1 % static_cast<int64_t>(e.prime) == 0;
    uint64_t pp = 1;
    for (uint32_t i = 0; i < e.exponent; ++i) pp *= e.prime;
    for (size_t i = 0; i < nidx; ++i, ++pos) {
      if (on_a1)
        idx1.push_back(chi.index()[pos]);
      else
        idx2.push_back(chi.index()[pos]);
    }
    (on_a1 ? q1 : q2) *= pp;
  }
  return {multfunc::dirichlet_character(q1, idx1), multfunc::dirichlet_character(q2, idx2)};
}

CharacterShiftReport verify_character_shift(const QDecomposition& dec_Q,
                                            const QDecomposition& dec_Qp, uint64_t p,
                                            const multfunc::DirichletCharacter& chi_f1,
                                            const multfunc::DirichletCharacter& chi_f2,
                                            const multfunc::DirichletCharacter& chi_g1,
                                            const multfunc::DirichletCharacter& chi_g2) {
  if (dec_Q.a1 % static_cast<int64_t>(p) == 0)
    throw PreconditionError("verify_character_shift: the claims require p to not divide a1");
  if (dec_Qp.Q.value != dec_Q.Q.value * p)
    throw InvalidInput("verify_character_shift: second decomposition is not Q*p");
  if (dec_Q.a1 != dec_Qp.a1 || dec_Q.b1 != dec_Qp.b1 || dec_Q.a2 != dec_Qp.a2 ||
      dec_Q.b2 != dec_Qp.b2 || dec_Q.mu != dec_Qp.mu || dec_Q.nu != dec_Qp.nu)
    throw InvalidInput("verify_character_shift: decompositions disagree on parameters");
  auto supported_on_a1 = [&](const multfunc::DirichletCharacter& chi) {
    if (chi.conductor() == 1) return true;
    for (const auto& e : nk::factorize(chi.conductor()).entries)
      if (dec_Q.a1 % static_cast<int64_t>(e.prime) != 0) return false;
    return true;
  };
  auto coprime_to_a1 = [&](const multfunc::DirichletCharacter& chi) {
    return std::gcd(chi.conductor(), static_cast<uint64_t>(dec_Q.a1)) == 1;
  };
  if (!supported_on_a1(chi_f1) || !supported_on_a1(chi_g1))
    throw PreconditionError(
        "verify_character_shift: chi_f1/chi_g1 conductors must be supported on primes dividing a1");
  if (!coprime_to_a1(chi_f2) || !coprime_to_a1(chi_g2))
    throw PreconditionError(
        "verify_character_shift: chi_f2/chi_g2 conductors must be coprime to a1");

  CharacterShiftReport rep;
  rep.admissible = true;
  uint32_t gamma = 0;
  for (const auto& e : nk::factorize(static_cast<uint64_t>(dec_Q.u)).entries)
    gamma = std::max(gamma, e.exponent);
  auto exponent_of = [&](uint64_t q) -> int64_t {
    for (size_t i = 0; i < dec_Q.params.primes.size(); ++i)
      if (dec_Q.params.primes[i] == q) return dec_Q.Q.exponents[i];
    return -1;
  };
  auto note = [&](const std::string& s) {
    rep.admissible = false;
    if (!rep.admissibility_note.empty()) rep.admissibility_note += "; ";
    rep.admissibility_note += s;
  };
  for (const auto& e : nk::factorize(chi_f1.conductor()).entries)
    if (e.exponent > dec_Q.mu) note("v_q(cond chi_f1) > mu at q=" + std::to_string(e.prime));
  for (const auto& e : nk::factorize(chi_g1.conductor()).entries)
    if (e.exponent > dec_Q.mu) note("v_q(cond chi_g1) > mu at q=" + std::to_string(e.prime));
  for (const auto& e : nk::factorize(chi_f2.conductor()).entries) {
    if (exponent_of(e.prime) < 0)
      note("conductor prime " + std::to_string(e.prime) + " of chi_f2 outside the Folner set");
    if (e.exponent > dec_Q.nu) note("v_q(cond chi_f2) > nu at q=" + std::to_string(e.prime));
  }
  for (const auto& e : nk::factorize(chi_g2.conductor()).entries) {
    int64_t theta = exponent_of(e.prime);
    if (theta < 0)
      note("conductor prime " + std::to_string(e.prime) + " of chi_g2 outside the Folner set");
    if (e.exponent > dec_Q.nu) note("v_q(cond chi_g2) > nu at q=" + std::to_string(e.prime));
    if (theta >= 0 && theta <= static_cast<int64_t>(gamma + e.exponent))
      note("window exponent at q=" + std::to_string(e.prime) +
           " does not clear gamma + v_q(cond chi_g2)");
  }

  BigInt um_Q = dec_Q.m_Q / dec_Q.u;
  BigInt um_Qp = dec_Qp.m_Q / dec_Q.u;
  auto add = [&](std::string name, bool holds) {
    rep.identities.push_back({std::move(name), holds});
  };
  add("chi_f1(l_Qp) = conj(chi_f1(p)) chi_f1(l_Q)",
      unit_equal(char_at_big(chi_f1, dec_Qp.l_Q),
                 chi_f1.at(p).conj().times(char_at_big(chi_f1, dec_Q.l_Q))));
  add("chi_f2(l_Qp) = chi_f2(l_Q)",
      unit_equal(char_at_big(chi_f2, dec_Qp.l_Q), char_at_big(chi_f2, dec_Q.l_Q)));
  add("chi_g1(u^-1 m_Qp) = conj(chi_g1(p)) chi_g1(u^-1 m_Q)",
      unit_equal(char_at_big(chi_g1, um_Qp),
                 chi_g1.at(p).conj().times(char_at_big(chi_g1, um_Q))));
  add("chi_g2(u^-1 m_Q) = chi_g2(u^-1 m_Qp)",
      unit_equal(char_at_big(chi_g2, um_Q), char_at_big(chi_g2, um_Qp)));
  rep.all_hold = std::all_of(rep.identities.begin(), rep.identities.end(),
                             [](const ShiftIdentity& s) { return s.holds; });
  return rep;
}

AveragedCorrelation averaged_correlation(const MultFunction& f, const MultFunction& g,
                                         int64_t a1, int64_t b1, int64_t a2, int64_t b2,
                                         const FolnerParams& params, uint32_t mu, uint32_t nu,
                                         uint64_t X) {
  __int128 u128 = static_cast<__int128>(a1) * b2 - static_cast<__int128>(a2) * b1;
  if (u128 == 0)
    throw InvalidInput("averaged_correlation: a1 b2 = a2 b1 degenerates the correlation");
  const MultFunction* ff = &f;
  const MultFunction* gg = &g;
  bool swapped = false;
  if (u128 < 0) {
    std::swap(a1, a2);
    std::swap(b1, b2);
    std::swap(ff, gg);
    swapped = true;
  }
  auto set = folner_set(params);
  AveragedCorrelation out;
  out.swapped = swapped;
  std::complex<double> total = 0.0;
  for (const auto& Q : set) {
    QDecomposition dec = q_decompose(params, Q, a1, b1, a2, b2, mu, nu);
    // factored linear forms: W(a1 A^2 W n + l_Q), A(a2 A W^2 n + m_Q)
    BigInt c1b = BigInt(a1) * dec.A * dec.A * dec.W;
    BigInt c2b = BigInt(a2) * dec.A * dec.W * dec.W;
    BigInt max_arg = c1b * X + boost::multiprecision::abs(dec.l_Q);
    BigInt max_arg2 = c2b * X + boost::multiprecision::abs(dec.m_Q);
    if (max_arg > progression::kArgumentBudget || max_arg2 > progression::kArgumentBudget)
      throw RangeError(
          "averaged_correlation: factored arguments exceed the budget; shrink the window or X");
    int64_t c1 = static_cast<int64_t>(c1b);
    int64_t c2 = static_cast<int64_t>(c2b);
    int64_t l0 = static_cast<int64_t>(dec.l_Q);
    int64_t m0 = static_cast<int64_t>(dec.m_Q);

    std::vector<uint32_t> a_exp(params.primes.size(), 0), w_exp(params.primes.size(), 0);
    for (size_t i = 0; i < params.primes.size(); ++i) {
      if (a1 % static_cast<int64_t>(params.primes[i]) == 0)
        a_exp[i] = Q.exponents[i];
      else
        w_exp[i] = Q.exponents[i];
    }
    UnitValue fW = value_at_exponents(*ff, params.primes, w_exp);
    UnitValue gA = value_at_exponents(*gg, params.primes, a_exp);

    std::complex<double> inner = 0.0;
    if (!fW.is_zero() && !gA.is_zero()) {
      std::complex<double> acc = 0.0, comp = 0.0;
      progression::for_each_pair(*ff, c1, l0, *gg, c2, m0, 1, X,
                                 [&](const progression::Sample& sf, const progression::Sample& sg) {
                                   if (sf.zero || sg.zero) return;
                                   std::complex<double> term =
                                       std::polar(1.0 / static_cast<double>(sf.n),
                                                  kTau * (sf.turns + sg.turns));
                                   std::complex<double> t = acc + term;
                                   comp += (acc - t) + term;
                                   acc = t;
                                 });
      inner = (acc + comp) / std::log(static_cast<double>(X));
      inner *= fW.value() * gA.value();
    }
    out.per_q.push_back({Q.value, inner});
    total += inner;
  }
  out.value = total / static_cast<double>(set.size());
  return out;
}

}  // namespace multrec::folner
