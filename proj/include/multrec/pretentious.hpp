#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "multrec/multfunc.hpp"

namespace multrec::pretentious {

// Primes summed satisfy A < p <= B.
struct DistanceWindow {
  double lower = 1.0;
  double upper = 2.0;
};

// D(f,g;A,B) = sqrt(sum_{A<p<=B} (1 - Re f(p) conj(g(p)))/p), ascending primes,
// accumulated in 2^-52 fixed point so window splits add exactly.
double distance(const multfunc::MultFunction& f, const multfunc::MultFunction& g,
                const DistanceWindow& window);

// Squared distance as the raw fixed-point integer (for exact additivity tests).
__int128 distance_sq_fixed(const multfunc::MultFunction& f, const multfunc::MultFunction& g,
                           const DistanceWindow& window);

struct Progression {
  int64_t modulus;   // L
  int64_t residue;   // r, 0 <= r < L
};

struct LogAverage {
  std::complex<double> value;
  uint64_t X;
  std::optional<Progression> progression;
  double harmonic_over_log;  // (sum_{n<=X} 1/n)/log X, the 1-bounded ceiling
};

// (1/log X) sum_{n<=X} f(n)/n, or f(Ln+r) along a progression.
LogAverage log_average(const multfunc::MultFunction& f, uint64_t X,
                       std::optional<Progression> progression = std::nullopt);

// (1/log X) sum_{n<=X} f(a1 n + b1) g(a2 n + b2)/n; g is not conjugated here,
// callers pass conjugate(g) when the conjugated correlation is wanted.
std::complex<double> correlation(const multfunc::MultFunction& f,
                                 const multfunc::MultFunction& g,
                                 int64_t a1, int64_t b1, int64_t a2, int64_t b2,
                                 uint64_t X,
                                 std::optional<Progression> progression = std::nullopt);

struct HalaszGap {
  double lhs;            // |E^log_{n<=X} f(n)|
  double rhs;            // exp(-1/2 sum_{p<=X} (1-Re f(p))/p)
  double ratio;          // lhs / rhs; the bound carries an unspecified constant
};

HalaszGap halasz_gap(const multfunc::MultFunction& f, uint64_t X);

struct ProfileEntry {
  uint64_t conductor;
  uint64_t modulus;
  std::vector<uint64_t> index;
  double best_t;
  double best_distance;
};

struct AperiodicityProfile {
  double B;
  uint64_t X;
  std::vector<double> t_grid;
  std::vector<ProfileEntry> per_character;
  double infimum;          // over the grid and all searched characters
  double refined_infimum;  // after golden-section refinement around the argmin
  double refined_t;
  uint64_t argmin_conductor;
  double grid_resolution;  // max spacing of the supplied grid
};

struct ProfileOptions {
  bool refine = true;
  // Default searches primitive characters of conductor <= B; this flag also
  // searches imprimitive characters of modulus <= B.
  bool include_imprimitive = false;
};

AperiodicityProfile aperiodicity_profile(const multfunc::MultFunction& f, double B,
                                         uint64_t X, const std::vector<double>& t_grid,
                                         const ProfileOptions& opts = {});

// sum_{Y <= p <= X} chi(p) p^{-1-ia}; empty range gives 0.
std::complex<double> prime_character_sum(const multfunc::DirichletCharacter& chi,
                                         double a, uint64_t Y, uint64_t X);

struct ConcentrationResidual {
  double lhs;        // sum_{n<=X} |f(Qn+a) - chi(a)(Qn)^{it} exp(F(Q,X))| / n
  double rhs_core;   // log X * (D(f, chi(n)n^{it}; p_K, X) + p_K^{-1/2})
  double ratio;
  std::complex<double> F;  // the oscillatory compensator
  uint64_t p_K;
  double tail_distance;    // D(f, chi(n)n^{it}; p_K, X)
  bool out_of_regime;      // the lemma is only informative when this is small
};

ConcentrationResidual concentration_residual(const multfunc::MultFunction& f,
                                             const multfunc::DirichletCharacter& chi,
                                             double t, uint64_t Q, uint64_t a, uint64_t X);

}  // namespace multrec::pretentious
