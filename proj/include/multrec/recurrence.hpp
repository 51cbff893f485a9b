#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "multrec/multfunc.hpp"

namespace multrec::recurrence {

struct Quadruple {
  int64_t a, b, c, d;
};

// Divides out gcd(a, b, c, d); a, c must be positive.
Quadruple normalize(const Quadruple& q);

struct CriterionResult {
  bool holds;  // a = c, and b = d or a | b d (after normalization)
  Quadruple normalized;
};

CriterionResult criterion(const Quadruple& q);

// A record low of |f(a n + b) - g(c n + d)| with its argmin.
struct ScanRecord {
  uint64_t n;
  double chord;
  int64_t dist_num;  // torus distance as dist_num/dist_den on the exact path
  int64_t dist_den;
};

struct ScanTrace {
  std::vector<ScanRecord> records;  // strictly decreasing running minima
  uint64_t flagged_zeros = 0;       // samples excluded because a value was Zero
  uint64_t scanned = 0;
  bool exact = false;
  double final_min() const;
};

ScanTrace liminf_scan(const multfunc::MultFunction& f, const Quadruple& q, uint64_t N);

// Two-function variant over |f(a n + 1) - g(a n)|.
ScanTrace pair_scan(const multfunc::MultFunction& f, const multfunc::MultFunction& g,
                    int64_t a, uint64_t N);

// Shared engine: running minima of |f(a1 n + b1) - g(a2 n + b2)|.
ScanTrace difference_scan(const multfunc::MultFunction& f, int64_t a1, int64_t b1,
                          const multfunc::MultFunction& g, int64_t a2, int64_t b2,
                          uint64_t n_lo, uint64_t N);

struct DensityEstimate {
  double eps;
  int64_t a, b, d;
  uint64_t X;
  double upper;        // max of the running log-average over the final decade
  double lower;        // min over the final decade
  double final_value;  // running log-average at X
  uint64_t hits;
};

// Running logarithmic average of the indicator of A(f, eps) up to X; the
// trailing-decade max/min stand in for upper/lower logarithmic density.
DensityEstimate density_estimate(const multfunc::MultFunction& f, double eps,
                                 int64_t a, int64_t b, int64_t d, uint64_t X);

enum class CaseTag {
  ArchimedeanANeqC,  // a != c, f(n) = n^{it}
  OddPrimeEllZero,   // p odd, p | a, p coprime to b d
  TwoAdicEllZero,    // p = 2 | a, b, d odd
  EllPositive,       // p^l || b d with 0 < l < v_p(a)
  PairShiftTwo,      // the two-function shift-2 pair
};

std::string case_tag_name(CaseTag tag);

struct CounterexampleCertificate {
  Quadruple quad;  // normalized
  CaseTag tag;
  multfunc::MultFunction f;
  std::string f_expr;  // function-grammar text of f
  Rat eta_dist;        // eta = 2 sin(pi * eta_dist)
  double eta_chord;
  uint64_t n0;   // threshold for asymptotic cases, 1 otherwise
  double slack;  // 0 on exact cases
  double t = 0;  // Archimedean parameter
  uint64_t witness_prime = 0;
  uint64_t witness_u = 0;  // u (ell-zero cases) or l (ell-positive case)
};

// Dispatches on why the criterion fails and constructs the certified
// obstruction; throws InvalidInput when the criterion holds.
CounterexampleCertificate build_counterexample(const Quadruple& q);

struct VerifyResult {
  bool ok;
  uint64_t witness_n;  // first violation when !ok
  double min_seen;
  double threshold;  // eta - slack
};

VerifyResult verify_certificate(const CounterexampleCertificate& cert, uint64_t N);

struct FejerApprox {
  double eps;
  uint32_t R;
  std::vector<double> coeff;  // coeff[l] = c_{l,R}, 0 <= l < R; c_{-l} = c_l
  uint32_t minimal_R;         // smallest R with sup |h - sigma_R| < eps^2 (0 if none found)
  bool r_sufficient;
  double sup_error;  // sup-norm error of the requested R on the reference grid
};

// Tent approximant of half-width eps: c_0 = eps exactly and the Fejer-mean
// polynomial is nonnegative.
FejerApprox fejer(double eps, uint32_t R);

// The tent function h_eps on the torus.
double tent(double eps, double x);

// Real value of sum_{|l| < R} c_l e(l x).
double fejer_polynomial(const FejerApprox& fa, double x);

struct PairCounterexample {
  multfunc::MultFunction f, g;
  std::string f_expr, g_expr;
  Angle theta1, theta2;
  Rat eta_dist;
  double eta_chord;
};

// Modified mod-4 characters with f(2^l k) = e(l theta1) chi(k) and
// g(2^l k) = e(l theta2) chi(k); liminf |f(n+2) - g(n)| >= eta > 0.
PairCounterexample build_pair_counterexample(Angle theta1 = Angle::of(1, 3),
                                             Angle theta2 = Angle::of(1, 5));

}  // namespace multrec::recurrence
