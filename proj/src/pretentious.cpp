#include "multrec/pretentious.hpp"

#include <algorithm>
#include <cmath>

#include "multrec/progression.hpp"

namespace multrec::pretentious {

namespace nk = multrec::numkernel;
using multfunc::MultFunction;

namespace {

constexpr double kFix = 4503599627370496.0;  // 2^52

// Neumaier-compensated accumulator; deterministic in fixed order.
struct Kahan {
  double sum = 0, c = 0;
  void add(double v) {
    double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      c += (sum - t) + v;
    else
      c += (v - t) + sum;
    sum = t;
  }
  double get() const { return sum + c; }
};

struct KahanC {
  Kahan re, im;
  void add(std::complex<double> v) {
    re.add(v.real());
    im.add(v.imag());
  }
  std::complex<double> get() const { return {re.get(), im.get()}; }
};

double term_one_minus_re(const UnitValue& fv, const UnitValue& gv) {
  if (fv.is_zero() || gv.is_zero()) return 1.0;
  if (fv.is_exact() && gv.is_exact()) {
    Angle d = fv.angle().minus(gv.angle());
    if (d == Angle::zero()) return 0.0;
    return 1.0 - std::cos(kTau * d.turns());
  }
  return 1.0 - std::cos(kTau * (fv.turns() - gv.turns()));
}

}  // namespace

__int128 distance_sq_fixed(const MultFunction& f, const MultFunction& g,
                           const DistanceWindow& window) {
  if (window.upper <= window.lower)
    throw InvalidInput("distance: window upper bound must exceed lower bound");
  if (window.upper > static_cast<double>(nk::kPrimeBudget))
    throw RangeError("distance: window exceeds the factorization budget (2e8)");
  uint64_t lo = window.lower < 1 ? 0 : static_cast<uint64_t>(std::floor(window.lower));
  uint64_t hi = static_cast<uint64_t>(std::floor(window.upper));
  __int128 acc = 0;
  for (uint64_t p : nk::primes_in(lo, hi)) {
    if (static_cast<double>(p) <= window.lower || static_cast<double>(p) > window.upper)
      continue;
    double term = term_one_minus_re(f.prime_value(p), g.prime_value(p));
    acc += static_cast<__int128>(std::llround(term / static_cast<double>(p) * kFix));
  }
  return acc;
}

double distance(const MultFunction& f, const MultFunction& g, const DistanceWindow& window) {
  __int128 acc = distance_sq_fixed(f, g, window);
  double sq = static_cast<double>(acc) / kFix;
  return sq <= 0 ? 0.0 : std::sqrt(sq);
}

LogAverage log_average(const MultFunction& f, uint64_t X,
                       std::optional<Progression> progression) {
  if (X < 2) throw InvalidInput("log_average: X must be >= 2");
  int64_t a = 1, b = 0;
  if (progression) {
    if (progression->modulus < 1) throw InvalidInput("log_average: L must be >= 1");
    if (progression->residue < 0 || progression->residue >= progression->modulus)
      throw InvalidInput("log_average: residue must satisfy 0 <= r < L");
    a = progression->modulus;
    b = progression->residue;
  }
  KahanC acc;
  Kahan harmonic;
  progression::for_each_value(f, a, b, 1, X, [&](const progression::Sample& s) {
    double w = 1.0 / static_cast<double>(s.n);
    harmonic.add(w);
    if (!s.zero) acc.add(std::polar(1.0, kTau * s.turns) * w);
  });
  LogAverage out;
  out.X = X;
  out.progression = progression;
  double logx = std::log(static_cast<double>(X));
  out.value = acc.get() / logx;
  out.harmonic_over_log = harmonic.get() / logx;
  return out;
}

std::complex<double> correlation(const MultFunction& f, const MultFunction& g,
                                 int64_t a1, int64_t b1, int64_t a2, int64_t b2,
                                 uint64_t X, std::optional<Progression> progression) {
  if (X < 2) throw InvalidInput("correlation: X must be >= 2");
  if (progression) {
    if (progression->modulus < 1 || progression->residue < 0 ||
        progression->residue >= progression->modulus)
      throw InvalidInput("correlation: progression must satisfy 0 <= r < L");
    // n -> L*n + r turns a_i n + b_i into (a_i L) n + (a_i r + b_i)
    b1 = a1 * progression->residue + b1;
    b2 = a2 * progression->residue + b2;
    a1 = a1 * progression->modulus;
    a2 = a2 * progression->modulus;
  }
  KahanC acc;
  progression::for_each_pair(f, a1, b1, g, a2, b2, 1, X,
                             [&](const progression::Sample& sf, const progression::Sample& sg) {
                               if (sf.zero || sg.zero) return;
                               double w = 1.0 / static_cast<double>(sf.n);
                               acc.add(std::polar(1.0, kTau * (sf.turns + sg.turns)) * w);
                             });
  return acc.get() / std::log(static_cast<double>(X));
}

HalaszGap halasz_gap(const MultFunction& f, uint64_t X) {
  if (X < 2) throw InvalidInput("halasz_gap: X must be >= 2");
  double lhs = std::abs(log_average(f, X).value);
  __int128 acc = distance_sq_fixed(f, MultFunction::one(), DistanceWindow{1.0, static_cast<double>(X)});
  double rhs = std::exp(-0.5 * static_cast<double>(acc) / kFix);
  return {lhs, rhs, rhs == 0 ? std::numeric_limits<double>::infinity() : lhs / rhs};
}

namespace {

std::vector<multfunc::DirichletCharacter> search_characters(double B, bool include_imprimitive) {
  std::vector<multfunc::DirichletCharacter> out;
  uint64_t bound = static_cast<uint64_t>(std::floor(B));
  for (uint64_t q = 1; q <= bound; ++q) {
    for (auto& chi : multfunc::characters_mod(q)) {
      if (include_imprimitive || chi.is_primitive()) out.push_back(std::move(chi));
    }
  }
  return out;
}

}  // namespace

AperiodicityProfile aperiodicity_profile(const MultFunction& f, double B, uint64_t X,
                                         const std::vector<double>& t_grid,
                                         const ProfileOptions& opts) {
  if (t_grid.empty()) throw InvalidInput("aperiodicity_profile: empty t grid");
  if (B < 1) throw InvalidInput("aperiodicity_profile: B must be >= 1");
  double bx = B * static_cast<double>(X);
  for (double t : t_grid)
    if (std::abs(t) > bx)
      throw InvalidInput("aperiodicity_profile: grid point outside [-BX, BX]");

  auto primes = nk::primes_in(1, X);
  std::vector<double> w(primes.size()), lnp(primes.size());
  for (size_t i = 0; i < primes.size(); ++i) {
    w[i] = 1.0 / static_cast<double>(primes[i]);
    lnp[i] = std::log(static_cast<double>(primes[i]));
  }
  std::vector<double> fturn(primes.size());
  std::vector<uint8_t> fzero(primes.size());
  for (size_t i = 0; i < primes.size(); ++i) {
    UnitValue v = f.prime_value(primes[i]);
    fzero[i] = v.is_zero();
    fturn[i] = v.is_zero() ? 0.0 : v.turns();
  }

  AperiodicityProfile prof;
  prof.B = B;
  prof.X = X;
  prof.t_grid = t_grid;
  prof.grid_resolution = 0;
  for (size_t i = 1; i < t_grid.size(); ++i)
    prof.grid_resolution = std::max(prof.grid_resolution, t_grid[i] - t_grid[i - 1]);

  prof.infimum = std::numeric_limits<double>::infinity();
  prof.refined_infimum = prof.infimum;
  prof.refined_t = 0;
  prof.argmin_conductor = 1;

  for (const auto& chi : search_characters(B, opts.include_imprimitive)) {
    // base phase of f(p) conj(chi(p)); zeros on either side give the constant 1/p
    std::vector<double> base(primes.size());
    std::vector<uint8_t> dead(primes.size());
    double const_part = 0;
    Kahan constk;
    for (size_t i = 0; i < primes.size(); ++i) {
      UnitValue cv = chi.at(primes[i]);
      if (fzero[i] || cv.is_zero()) {
        dead[i] = 1;
        constk.add(w[i]);
      } else {
        dead[i] = 0;
        base[i] = kTau * (fturn[i] - cv.turns());
      }
    }
    const_part = constk.get();

    auto dist_sq_at = [&](double t) {
      Kahan s;
      for (size_t i = 0; i < primes.size(); ++i) {
        if (dead[i]) continue;
        s.add(w[i] * (1.0 - std::cos(base[i] - t * lnp[i])));
      }
      return const_part + s.get();
    };

    ProfileEntry entry;
    entry.conductor = chi.conductor();
    entry.modulus = chi.modulus();
    entry.index = chi.index();
    entry.best_t = t_grid.front();
    entry.best_distance = std::numeric_limits<double>::infinity();
    for (double t : t_grid) {
      double d = std::sqrt(std::max(0.0, dist_sq_at(t)));
      if (d < entry.best_distance) {
        entry.best_distance = d;
        entry.best_t = t;
      }
    }
    if (entry.best_distance < prof.infimum) {
      prof.infimum = entry.best_distance;
      prof.argmin_conductor = chi.conductor();
      prof.refined_t = entry.best_t;
    }

    if (opts.refine) {
      // golden-section refinement inside +- one grid spacing around the best t
      double span = prof.grid_resolution > 0 ? prof.grid_resolution : 1.0;
      double lo = std::max(-bx, entry.best_t - span);
      double hi = std::min(bx, entry.best_t + span);
      constexpr double kGolden = 0.6180339887498949;
      double x1 = hi - kGolden * (hi - lo), x2 = lo + kGolden * (hi - lo);
      double f1 = dist_sq_at(x1), f2 = dist_sq_at(x2);
      for (int it = 0; it < 40; ++it) {
        if (f1 < f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - kGolden * (hi - lo);
          f1 = dist_sq_at(x1);
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + kGolden * (hi - lo);
          f2 = dist_sq_at(x2);
        }
      }
      double tbest = f1 < f2 ? x1 : x2;
      double dref = std::sqrt(std::max(0.0, std::min(f1, f2)));
      dref = std::min(dref, entry.best_distance);
      if (dref < prof.refined_infimum) {
        prof.refined_infimum = dref;
        prof.refined_t = tbest;
        prof.argmin_conductor = chi.conductor();
      }
    }
    prof.per_character.push_back(std::move(entry));
  }
  if (!opts.refine) prof.refined_infimum = prof.infimum;
  prof.refined_infimum = std::min(prof.refined_infimum, prof.infimum);
  return prof;
}

std::complex<double> prime_character_sum(const multfunc::DirichletCharacter& chi,
                                         double a, uint64_t Y, uint64_t X) {
  if (Y > X) return {0.0, 0.0};
  KahanC acc;
  for (uint64_t p : nk::primes_in(Y == 0 ? 0 : Y - 1, X)) {
    UnitValue cv = chi.at(p);
    if (cv.is_zero()) continue;
    double lp = std::log(static_cast<double>(p));
    acc.add(std::polar(1.0 / static_cast<double>(p), kTau * cv.turns() - a * lp));
  }
  return acc.get();
}

ConcentrationResidual concentration_residual(const MultFunction& f,
                                             const multfunc::DirichletCharacter& chi,
                                             double t, uint64_t Q, uint64_t a, uint64_t X) {
  if (Q < 2) throw InvalidInput("concentration_residual: Q must be >= 2");
  if (a < 1 || std::gcd(Q, a) != 1)
    throw InvalidInput("concentration_residual: a must be coprime to Q");
  if (Q % chi.modulus() != 0 && chi.modulus() != 1)
    throw InvalidInput("concentration_residual: conductor of chi must divide Q");
  // K = longest prefix of the primes dividing Q
  uint64_t p_K = 0;
  for (uint32_t p : nk::small_primes()) {
    if (Q % p == 0)
      p_K = p;
    else
      break;
  }
  if (p_K == 0)
    throw InvalidInput("concentration_residual: all primes up to p_K must divide Q (2 does not)");

  // F(Q,X) = sum_{p<=X, p !| Q} (f(p) conj(chi(p)) p^{-it} - 1)/p
  KahanC Facc;
  for (uint64_t p : nk::primes_in(1, X)) {
    if (Q % p == 0) continue;
    UnitValue fv = f.prime_value(p);
    UnitValue cv = chi.at(p);
    std::complex<double> prod = 0;
    if (!fv.is_zero() && !cv.is_zero())
      prod = std::polar(1.0, kTau * (fv.turns() - cv.turns()) - t * std::log(static_cast<double>(p)));
    Facc.add((prod - 1.0) / static_cast<double>(p));
  }
  std::complex<double> F = Facc.get();
  std::complex<double> expF = std::exp(F);
  std::complex<double> chia = chi.at(a).value();

  Kahan lhs;
  progression::for_each_value(f, static_cast<int64_t>(Q), static_cast<int64_t>(a), 1, X,
                              [&](const progression::Sample& s) {
                                std::complex<double> fv =
                                    s.zero ? 0.0 : std::polar(1.0, kTau * s.turns);
                                double qn = static_cast<double>(Q) * static_cast<double>(s.n);
                                std::complex<double> target =
                                    chia * std::polar(1.0, t * std::log(qn)) * expF;
                                lhs.add(std::abs(fv - target) / static_cast<double>(s.n));
                              });

  // D(f, chi(n) n^{it}; p_K, X): build the twisted character as a MultFunction
  MultFunction target = MultFunction::product(MultFunction::character(chi),
                                              MultFunction::archimedean_twist(t));
  double D = distance(f, target, DistanceWindow{static_cast<double>(p_K), static_cast<double>(X)});
  double rhs_core = std::log(static_cast<double>(X)) * (D + 1.0 / std::sqrt(static_cast<double>(p_K)));

  ConcentrationResidual out;
  out.lhs = lhs.get();
  out.rhs_core = rhs_core;
  out.ratio = rhs_core == 0 ? std::numeric_limits<double>::infinity() : out.lhs / rhs_core;
  out.F = F;
  out.p_K = p_K;
  out.tail_distance = D;
  out.out_of_regime = D > 1.0;
  return out;
}

}  // namespace multrec::pretentious
