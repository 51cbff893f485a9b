#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "multrec/multfunc.hpp"

namespace multrec::folner {

using BigInt = boost::multiprecision::cpp_int;

inline constexpr uint64_t kMaxElements = 1'000'000;
inline constexpr uint64_t kMaxValueBits = 65536;

// Multiplicative Folner set parameters: listed primes and the exponent
// window (lo, hi]. The canonical choice in the source construction is the
// first K primes with window (2^K, 2^{K+1}]; the window is parametrized here
// since only its width matters for the Folner property.
struct FolnerParams {
  std::vector<uint64_t> primes;
  uint32_t lo = 2;
  uint32_t hi = 4;

  uint32_t width() const { return hi > lo ? hi - lo : 0; }
};

struct FolnerElement {
  std::vector<uint32_t> exponents;  // aligned with params.primes; lo < e <= hi
  BigInt value;
};

void validate(const FolnerParams& params);

// All width^K elements in lexicographic exponent order.
std::vector<FolnerElement> folner_set(const FolnerParams& params);

// Exact |Phi cap Phi/p| / |Phi| as a reduced fraction.
std::pair<uint64_t, uint64_t> folner_ratio(const FolnerParams& params, uint64_t p);

struct AverageBoundRow {
  uint64_t prime;
  double lhs;    // |(1 - f(p)) * avg|
  double bound;  // 2 * (1 - ratio(p))
};

struct MultiplicativeAverage {
  std::complex<double> average;  // E_{Q in Phi} f(Q), from exponent tuples
  std::vector<AverageBoundRow> rows;
  bool all_within_bound;
};

MultiplicativeAverage multiplicative_average(const multfunc::MultFunction& f,
                                             const FolnerParams& params);

// The Q = AW decomposition with CRT-selected r_Q and the derived l_Q, m_Q.
struct QDecomposition {
  FolnerParams params;
  FolnerElement Q;
  int64_t a1, b1, a2, b2;
  uint32_t mu, nu;
  int64_t u;        // a1 b2 - a2 b1 > 0
  BigInt A, W;      // A = prod_{p | a1} p^theta, W = Q / A
  BigInt r_Q;       // 0 <= r_Q < Q^2, solving the two congruence families
  BigInt l_Q, m_Q;  // (a1 r_Q + b1)/W and (a2 r_Q + b2)/A
};

// Computes the decomposition; throws PreconditionError naming any violated
// hypothesis (gcd conditions, prime coverage, window largeness).
QDecomposition q_decompose(const FolnerParams& params, const FolnerElement& Q,
                           int64_t a1, int64_t b1, int64_t a2, int64_t b2,
                           uint32_t mu, uint32_t nu);

struct Check {
  std::string name;
  bool pass;
  std::string detail;
};

struct QTrickReport {
  std::vector<Check> checks;
  bool ok;
};

// Exact verification of every defining identity and coprimality of the
// decomposition; failures are named in the report.
QTrickReport verify_qtrick(const QDecomposition& dec);
// Same, but throws CertificateFailure on the first failed identity.
void require_qtrick(const QDecomposition& dec);

// Splits chi = chi1 * chi2 where the conductor of chi1 is supported on the
// primes dividing a1 and the conductor of chi2 is coprime to a1.
std::pair<multfunc::DirichletCharacter, multfunc::DirichletCharacter> split_character(
    const multfunc::DirichletCharacter& chi, int64_t a1);

struct ShiftIdentity {
  std::string name;
  bool holds;
};

struct CharacterShiftReport {
  std::vector<ShiftIdentity> identities;
  bool all_hold;
  // True when every conductor prime is controlled by the CRT congruences
  // (lies in the Folner prime set with exponents within mu/nu and the window
  // clears the u-valuations); identities on admissible inputs are theorems.
  bool admissible;
  std::string admissibility_note;
};

CharacterShiftReport verify_character_shift(const QDecomposition& dec_Q,
                                            const QDecomposition& dec_Qp, uint64_t p,
                                            const multfunc::DirichletCharacter& chi_f1,
                                            const multfunc::DirichletCharacter& chi_f2,
                                            const multfunc::DirichletCharacter& chi_g1,
                                            const multfunc::DirichletCharacter& chi_g2);

struct AveragedCorrelation {
  std::complex<double> value;
  bool swapped;  // inputs were reordered to make u = a1 b2 - a2 b1 positive
  struct Row {
    BigInt Q;
    std::complex<double> inner;  // E^log_n of the factored correlation
  };
  std::vector<Row> per_q;
};

// E_{Q in Phi} E^log_{n<=X} f(a1 Q^2 n + a1 r_Q + b1) g(a2 Q^2 n + a2 r_Q + b2),
// evaluated through the factored forms W(a1 A^2 W n + l_Q) and
// A(a2 A W^2 n + m_Q); g is not conjugated.
AveragedCorrelation averaged_correlation(const multfunc::MultFunction& f,
                                         const multfunc::MultFunction& g,
                                         int64_t a1, int64_t b1, int64_t a2, int64_t b2,
                                         const FolnerParams& params, uint32_t mu, uint32_t nu,
                                         uint64_t X);

}  // namespace multrec::folner
