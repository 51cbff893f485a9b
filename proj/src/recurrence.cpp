#include "multrec/recurrence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "multrec/progression.hpp"

namespace multrec::recurrence {

namespace nk = multrec::numkernel;
using multfunc::MultFunction;

namespace {

int64_t gcd_abs(int64_t a, int64_t b) {
  return std::gcd(a < 0 ? -a : a, b < 0 ? -b : b);
}

uint32_t valuation_signed(int64_t n, uint64_t p) {
  return nk::valuation(static_cast<uint64_t>(n < 0 ? -n : n), p);
}

}  // namespace

Quadruple normalize(const Quadruple& q) {
  if (q.a < 1 || q.c < 1) throw InvalidInput("quadruple: a and c must be positive");
  int64_t g = gcd_abs(gcd_abs(q.a, q.b), gcd_abs(q.c, q.d));
  return Quadruple{q.a / g, q.b / g, q.c / g, q.d / g};
}

CriterionResult criterion(const Quadruple& q) {
  Quadruple n = normalize(q);
  bool holds = false;
  if (n.a == n.c) {
    if (n.b == n.d) {
      holds = true;
    } else {
      __int128 bd = static_cast<__int128>(n.b) * n.d;
      holds = bd % n.a == 0;
    }
  }
  return {holds, n};
}

double ScanTrace::final_min() const {
  return records.empty() ? std::numeric_limits<double>::infinity() : records.back().chord;
}

ScanTrace difference_scan(const MultFunction& f, int64_t a1, int64_t b1,
                          const MultFunction& g, int64_t a2, int64_t b2,
                          uint64_t n_lo, uint64_t N) {
  ScanTrace trace;
  bool exact = f.is_exact() && g.is_exact();
  int64_t den = 1;
  if (exact) {
    int64_t df = f.exact_den(), dg = g.exact_den();
    __int128 l = static_cast<__int128>(df) / std::gcd(df, dg) * dg;
    if (l > INT64_MAX) throw RangeError("difference_scan: joint denominator overflow");
    den = static_cast<int64_t>(l);
  }
  trace.exact = exact;
  int64_t best_num = den;  // distance numerators over den; start above max (den/2)
  double best_chord = std::numeric_limits<double>::infinity();
  const int64_t sf = exact ? den / f.exact_den() : 1;
  const int64_t sg = exact ? den / g.exact_den() : 1;
  progression::for_each_pair(
      f, a1, b1, g, a2, b2, n_lo, N,
      [&](const progression::Sample& u, const progression::Sample& v) {
        ++trace.scanned;
        if (u.zero || v.zero) {
          ++trace.flagged_zeros;
          return;
        }
        if (exact) {
          __int128 d128 = (static_cast<__int128>(u.exact_num) * sf -
                           static_cast<__int128>(v.exact_num) * sg) % den;
          int64_t diff = static_cast<int64_t>(d128);
          if (diff < 0) diff += den;
          int64_t dist = std::min(diff, den - diff);
          if (dist < best_num) {
            best_num = dist;
            double chord =
                chord_of_dist(static_cast<double>(dist) / static_cast<double>(den));
            trace.records.push_back({u.n, chord, dist, den});
            best_chord = chord;
          }
        } else {
          double dt = u.turns - v.turns;
          dt -= std::floor(dt);
          double dist = std::min(dt, 1.0 - dt);
          double chord = chord_of_dist(dist);
          if (chord < best_chord) {
            best_chord = chord;
            trace.records.push_back({u.n, chord, 0, 0});
          }
        }
      });
  return trace;
}

ScanTrace liminf_scan(const MultFunction& f, const Quadruple& q, uint64_t N) {
  if (q.a < 1 || q.c < 1) throw InvalidInput("liminf_scan: a and c must be positive");
  return difference_scan(f, q.a, q.b, f, q.c, q.d, 1, N);
}

ScanTrace pair_scan(const MultFunction& f, const MultFunction& g, int64_t a, uint64_t N) {
  if (a < 1) throw InvalidInput("pair_scan: a must be positive");
  return difference_scan(f, a, 1, g, a, 0, 1, N);
}

DensityEstimate density_estimate(const MultFunction& f, double eps, int64_t a, int64_t b,
                                 int64_t d, uint64_t X) {
  if (eps <= 0) throw InvalidInput("density_estimate: eps must be positive");
  DensityEstimate out;
  out.eps = eps;
  out.a = a;
  out.b = b;
  out.d = d;
  out.X = X;
  out.hits = 0;
  // chord < eps on the unit circle means torus distance < asin(eps/2)/pi
  double dist_threshold = eps >= 2.0 ? 0.5 : std::asin(eps / 2.0) / M_PI;
  double running = 0;
  uint64_t decade_start = std::max<uint64_t>(1, X / 10);
  double upper = 0, lower = std::numeric_limits<double>::infinity();
  double final_value = 0;
  progression::for_each_pair(
      f, a, b, f, a, d, 1, X,
      [&](const progression::Sample& u, const progression::Sample& v) {
        bool hit = false;
        if (!u.zero && !v.zero) {
          double dt = u.turns - v.turns;
          dt -= std::floor(dt);
          double dist = std::min(dt, 1.0 - dt);
          hit = dist < dist_threshold;
        }
        if (hit) {
          running += 1.0 / static_cast<double>(u.n);
          ++out.hits;
        }
        if (u.n >= decade_start && u.n >= 2) {
          double avg = running / std::log(static_cast<double>(u.n));
          upper = std::max(upper, avg);
          lower = std::min(lower, avg);
        }
        if (u.n == X) final_value = running / std::log(static_cast<double>(X));
      });
  out.upper = upper;
  out.lower = std::min(lower, upper);
  out.final_value = final_value;
  return out;
}

namespace {

std::string angle_expr(const Angle& a) {
  return std::to_string(a.num()) + "/" + std::to_string(a.den());
}

std::string double_expr(double v) {
  char buf[40];
  snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string case_tag_name(CaseTag tag) {
  switch (tag) {
    case CaseTag::ArchimedeanANeqC: return "archimedean-a-neq-c";
    case CaseTag::OddPrimeEllZero: return "odd-p-ell-zero";
    case CaseTag::TwoAdicEllZero: return "p2-ell-zero";
    case CaseTag::EllPositive: return "ell-positive";
    case CaseTag::PairShiftTwo: return "pair-shift-2";
  }
  return "?";
}

CounterexampleCertificate build_counterexample(const Quadruple& q) {
  auto [holds, n] = criterion(q);
  if (holds)
    throw InvalidInput(
        "build_counterexample: the quadruple satisfies the recurrence criterion; "
        "no counterexample exists");
  CounterexampleCertificate cert;
  cert.quad = n;

  if (n.a != n.c) {
    // f(n) = n^{it} with (a/c)^{it} = -1
    double t = M_PI / std::log(static_cast<double>(n.a) / static_cast<double>(n.c));
    cert.tag = CaseTag::ArchimedeanANeqC;
    cert.f = MultFunction::archimedean_twist(t);
    cert.f_expr = "twist(" + double_expr(t) + ")";
    cert.eta_dist = Rat::make(1, 2);
    cert.eta_chord = 2.0;
    cert.n0 = 1000;
    cert.slack = 0.05;
    cert.t = t;
    return cert;
  }

  // a = c, b != d, a does not divide b d: find the witness prime
  __int128 bd128 = static_cast<__int128>(n.b) * n.d;
  if (bd128 < 0) bd128 = -bd128;
  uint64_t bd = static_cast<uint64_t>(bd128);
  uint64_t p = 0;
  uint32_t k = 0, ell = 0;
  for (const auto& e : nk::factorize(static_cast<uint64_t>(n.a)).entries) {
    uint32_t l = bd == 0 ? UINT32_MAX : nk::valuation(bd, e.prime);
    if (e.exponent > l) {
      p = e.prime;
      k = e.exponent;
      ell = l;
      break;
    }
  }
  if (p == 0) throw InvalidInput("build_counterexample: internal dispatch failure");
  cert.witness_prime = p;

  if (ell == 0 && p % 2 == 1) {
    uint32_t u = valuation_signed(n.b - n.d, p) + 1;
    auto chi = multfunc::cyclic_character(p, u);
    uint64_t pu = 1;
    for (uint32_t i = 0; i < u; ++i) pu *= p;
    cert.tag = CaseTag::OddPrimeEllZero;
    cert.f = MultFunction::modified_character(chi, {{p, Angle::zero()}});
    cert.f_expr = "modify(cyclic(" + std::to_string(p) + "," + std::to_string(u) + "),{" +
                  std::to_string(p) + ":0/1})";
    uint64_t phi = nk::euler_phi_prime_power(p, u);
    cert.eta_dist = Rat::make(1, static_cast<int64_t>(phi));
    cert.eta_chord = chord_of_dist(1.0 / static_cast<double>(phi));
    cert.n0 = 1;
    cert.slack = 0;
    cert.witness_u = u;
    return cert;
  }

  if (ell == 0 && p == 2) {
    uint32_t u = valuation_signed(n.b - n.d, 2) + 1;  // minimal u with 2^u !| b-d, >= 2
    uint64_t pu = 1;
    for (uint32_t i = 0; i < u; ++i) pu *= 2;
    for (const auto& chi : multfunc::characters_mod(pu)) {
      UnitValue vb = chi.at_signed(n.b), vd = chi.at_signed(n.d);
      if (vb.is_zero() || vd.is_zero() || vb.angle() == vd.angle()) continue;
      cert.tag = CaseTag::TwoAdicEllZero;
      cert.f = MultFunction::modified_character(chi, {{2, Angle::zero()}});
      std::string idx;
      for (uint64_t i : chi.index()) idx += "," + std::to_string(i);
      cert.f_expr = "modify(char(" + std::to_string(pu) + idx + "),{2:0/1})";
      Angle diff = vb.angle().minus(vd.angle());
      cert.eta_dist = diff.dist_to_zero();
      cert.eta_chord = chord_of_dist(cert.eta_dist.value());
      cert.n0 = 1;
      cert.slack = 0;
      cert.witness_u = u;
      return cert;
    }
    throw InvalidInput("build_counterexample: no separating character mod 2^u (unexpected)");
  }

  // ell > 0: p | a and p^ell || b d with ell < k. Arrange p to not divide d.
  int64_t b = n.b, d = n.d;
  if (d % static_cast<int64_t>(p) == 0) std::swap(b, d);
  uint32_t l = valuation_signed(b, p);
  (void)k;
  auto chi = p == 2 ? multfunc::dirichlet_character(2, std::vector<uint64_t>{0})
                    : multfunc::dirichlet_character(p, std::vector<uint64_t>{1});
  int64_t ord = chi.order_den();
  // search theta = j/(2 l ord) with e(theta) chi(m1) != chi(m2) for all residues
  Angle theta = Angle::zero();
  bool found = false;
  for (int64_t j = 1; j < 2 * static_cast<int64_t>(l) * ord && !found; ++j) {
    theta = Angle::of(j, 2 * static_cast<int64_t>(l) * ord);
    found = true;
    for (uint64_t m1 = 1; m1 < p && found; ++m1) {
      if (chi.at(m1).is_zero()) continue;
      for (uint64_t m2 = 1; m2 < p; ++m2) {
        if (chi.at(m2).is_zero()) continue;
        if (theta.plus(chi.at(m1).angle()).minus(chi.at(m2).angle()) == Angle::zero()) {
          found = false;
          break;
        }
      }
    }
  }
  if (!found) throw InvalidInput("build_counterexample: no separating angle found (unexpected)");
  // eta = min |e(theta) chi(m1) - chi(m2)| over the finite value sets
  Rat eta = Rat::make(1, 2);
  bool first = true;
  for (uint64_t m1 = 1; m1 < std::max<uint64_t>(p, 2); ++m1) {
    if (chi.at(m1).is_zero()) continue;
    for (uint64_t m2 = 1; m2 < std::max<uint64_t>(p, 2); ++m2) {
      if (chi.at(m2).is_zero()) continue;
      Rat dist = theta.plus(chi.at(m1).angle()).minus(chi.at(m2).angle()).dist_to_zero();
      if (first || rat_less(dist, eta)) {
        eta = dist;
        first = false;
      }
    }
  }
  Angle override_angle = Angle::of(theta.num(), theta.den() * static_cast<int64_t>(l));
  cert.tag = CaseTag::EllPositive;
  cert.f = MultFunction::modified_character(chi, {{p, override_angle}});
  std::string idx;
  for (uint64_t i : chi.index()) idx += "," + std::to_string(i);
  cert.f_expr = "modify(char(" + std::to_string(p) + idx + "),{" + std::to_string(p) + ":" +
                angle_expr(override_angle) + "})";
  cert.eta_dist = eta;
  cert.eta_chord = chord_of_dist(eta.value());
  cert.n0 = 1;
  cert.slack = 0;
  cert.witness_u = l;
  return cert;
}

VerifyResult verify_certificate(const CounterexampleCertificate& cert, uint64_t N) {
  VerifyResult res;
  res.ok = true;
  res.witness_n = 0;
  res.min_seen = std::numeric_limits<double>::infinity();
  res.threshold = cert.eta_chord - cert.slack;
  const Quadruple& q = cert.quad;
  bool exact_mode = cert.f.is_exact() && cert.slack == 0;
  int64_t den = cert.f.exact_den();
  progression::for_each_pair(
      cert.f, q.a, q.b, cert.f, q.c, q.d, cert.n0, N,
      [&](const progression::Sample& u, const progression::Sample& v) {
        if (u.zero || v.zero) return;  // cannot occur for certificate functions in M
        if (exact_mode) {
          int64_t diff = (u.exact_num - v.exact_num) % den;
          if (diff < 0) diff += den;
          int64_t dist = std::min(diff, den - diff);
          double chord = chord_of_dist(static_cast<double>(dist) / static_cast<double>(den));
          res.min_seen = std::min(res.min_seen, chord);
          // exact comparison: dist/den >= eta_dist
          bool ge = static_cast<__int128>(dist) * cert.eta_dist.den >=
                    static_cast<__int128>(cert.eta_dist.num) * den;
          if (!ge && res.ok) {
            res.ok = false;
            res.witness_n = u.n;
          }
        } else {
          double dt = u.turns - v.turns;
          dt -= std::floor(dt);
          double chord = chord_of_dist(std::min(dt, 1.0 - dt));
          res.min_seen = std::min(res.min_seen, chord);
          if (chord < res.threshold && res.ok) {
            res.ok = false;
            res.witness_n = u.n;
          }
        }
      });
  return res;
}

double tent(double eps, double x) {
  x -= std::floor(x);
  double d = std::min(x, 1.0 - x);
  return d >= eps ? 0.0 : 1.0 - d / eps;
}

double fejer_polynomial(const FejerApprox& fa, double x) {
  double s = fa.coeff.empty() ? 0.0 : fa.coeff[0];
  for (uint32_t l = 1; l < fa.R && l < fa.coeff.size(); ++l)
    s += 2.0 * fa.coeff[l] * std::cos(kTau * static_cast<double>(l) * x);
  return s;
}

FejerApprox fejer(double eps, uint32_t R) {
  if (!(eps > 0 && eps < 0.25)) throw InvalidInput("fejer: eps must lie in (0, 1/4)");
  if (R < 1) throw InvalidInput("fejer: R must be positive");
  FejerApprox fa;
  fa.eps = eps;
  fa.R = R;
  fa.coeff.resize(R);
  fa.coeff[0] = eps;
  auto hat = [&](uint32_t l) {
    double s = std::sin(M_PI * static_cast<double>(l) * eps);
    return s * s / (M_PI * M_PI * static_cast<double>(l) * static_cast<double>(l) * eps);
  };
  for (uint32_t l = 1; l < R; ++l)
    fa.coeff[l] = (1.0 - static_cast<double>(l) / static_cast<double>(R)) * hat(l);

  // sup |h - sigma_Rc| over the reference grid, incrementally for all Rc
  constexpr uint32_t kGrid = 10000;
  constexpr uint32_t kRCap = 8192;
  uint32_t cap = std::max(R, kRCap);
  std::vector<double> sup(cap + 1, 0.0);
  std::vector<double> hatv(cap + 1, 0.0);
  for (uint32_t l = 1; l <= cap; ++l) hatv[l] = hat(l);
  for (uint32_t i = 0; i < kGrid; ++i) {
    double x = static_cast<double>(i) / kGrid;
    double h = tent(eps, x);
    double c1 = std::cos(kTau * x);
    double cprev = 1.0, ccur = c1;
    double S = eps, T = 0;  // S_R = sum a_l, T_R = sum l a_l over l < R
    for (uint32_t l = 1; l <= cap; ++l) {
      // sigma_l uses terms strictly below l
      double sigma = S - (l > 0 ? T / static_cast<double>(l) : 0.0);
      double err = std::abs(h - sigma);
      if (err > sup[l]) sup[l] = err;
      double a = 2.0 * hatv[l] * ccur;
      S += a;
      T += static_cast<double>(l) * a;
      double cnext = 2.0 * c1 * ccur - cprev;
      cprev = ccur;
      ccur = cnext;
    }
  }
  fa.minimal_R = 0;
  double eps2 = eps * eps;
  for (uint32_t l = 1; l <= cap; ++l) {
    if (sup[l] < eps2) {
      fa.minimal_R = l;
      break;
    }
  }
  fa.sup_error = R <= cap ? sup[R] : 0.0;
  fa.r_sufficient = fa.minimal_R != 0 && R >= fa.minimal_R;
  return fa;
}

PairCounterexample build_pair_counterexample(Angle theta1, Angle theta2) {
  // the separation conditions cycle with the angle denominators
  auto violates = [&](const Angle& th_a, const Angle& th_b) {
    for (int64_t l = 0; l < th_a.den() * 2; ++l) {
      Angle v = th_a.times(l);
      if (v == th_b || v.plus(Angle::half()) == th_b) return true;
    }
    return false;
  };
  if (violates(theta1, theta2) || violates(theta2, theta1))
    throw InvalidInput(
        "build_pair_counterexample: theta1, theta2 violate the separation conditions");

  auto chi = multfunc::dirichlet_character(4, std::vector<uint64_t>{1});
  PairCounterexample pc;
  pc.theta1 = theta1;
  pc.theta2 = theta2;
  pc.f = MultFunction::modified_character(chi, {{2, theta1}});
  pc.g = MultFunction::modified_character(chi, {{2, theta2}});
  pc.f_expr = "modify(char(4,1),{2:" + angle_expr(theta1) + "})";
  pc.g_expr = "modify(char(4,1),{2:" + angle_expr(theta2) + "})";

  // eta over the four finite families, exact
  bool first = true;
  Rat eta = Rat::make(1, 2);
  auto consider = [&](const Angle& diff) {
    Rat dist = diff.dist_to_zero();
    if (dist.num == 0) return;  // equal points never arise; guarded above
    if (first || rat_less(dist, eta)) {
      eta = dist;
      first = false;
    }
  };
  for (int64_t l = 0; l < theta1.den() * 2; ++l) {
    consider(theta1.times(l).minus(theta2));
    consider(theta1.times(l).plus(Angle::half()).minus(theta2));
  }
  for (int64_t l = 0; l < theta2.den() * 2; ++l) {
    consider(theta2.times(l).minus(theta1));
    consider(theta2.times(l).plus(Angle::half()).minus(theta1));
  }
  pc.eta_dist = eta;
  pc.eta_chord = chord_of_dist(eta.value());
  return pc;
}

}  // namespace multrec::recurrence
