#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <string>

#include "multrec/errors.hpp"

namespace multrec {

inline constexpr double kTau = 6.283185307179586476925286766559;

// Exact rational on the torus R/Z, value num/den in [0,1), always reduced.
// Angles are measured in turns: Rat{1,2} is the point -1 = e(1/2).
struct Rat {
  int64_t num = 0;
  int64_t den = 1;

  static Rat make(int64_t n, int64_t d) {
    if (d == 0) throw InvalidInput("rational with zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    int64_t g = std::gcd(n < 0 ? -n : n, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
    return Rat{n, d};
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend bool operator==(const Rat&, const Rat&) = default;
};

inline bool rat_less(const Rat& a, const Rat& b) {
  return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
}
inline bool rat_leq(const Rat& a, const Rat& b) {
  return static_cast<__int128>(a.num) * b.den <= static_cast<__int128>(b.num) * a.den;
}

inline Rat rat_add(const Rat& a, const Rat& b) {
  int64_t g = std::gcd(a.den, b.den);
  __int128 d = static_cast<__int128>(a.den) / g * b.den;
  if (d > INT64_MAX) throw RangeError("rational denominator overflow");
  int64_t dd = static_cast<int64_t>(d);
  __int128 n = static_cast<__int128>(a.num) * (dd / a.den) +
               static_cast<__int128>(b.num) * (dd / b.den);
  if (n > INT64_MAX || n < INT64_MIN) throw RangeError("rational numerator overflow");
  return Rat::make(static_cast<int64_t>(n), dd);
}

inline Rat rat_sub(const Rat& a, const Rat& b) { return rat_add(a, Rat::make(-b.num, b.den)); }

inline Rat rat_mul(const Rat& a, const Rat& b) {
  __int128 n = static_cast<__int128>(a.num) * b.num;
  __int128 d = static_cast<__int128>(a.den) * b.den;
  int64_t g1 = std::gcd(a.num < 0 ? -a.num : a.num, b.den);
  int64_t g2 = std::gcd(b.num < 0 ? -b.num : b.num, a.den);
  n /= g1;
  n /= g2;
  d /= g1;
  d /= g2;
  if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX)
    throw RangeError("rational overflow in multiplication");
  return Rat::make(static_cast<int64_t>(n), static_cast<int64_t>(d));
}

// Exact angle on the torus: rational number of turns in [0,1).
class Angle {
 public:
  Angle() : num_(0), den_(1) {}

  // e(n/d); the pair is wrapped into [0,1) and reduced.
  static Angle of(int64_t n, int64_t d) {
    if (d == 0) throw InvalidInput("angle with zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    n %= d;
    if (n < 0) n += d;
    int64_t g = std::gcd(n, d);
    return Angle(n / g, d / g);
  }

  static Angle zero() { return Angle(); }
  static Angle half() { return Angle(1, 2); }

  int64_t num() const { return num_; }
  int64_t den() const { return den_; }

  Angle plus(const Angle& o) const {
    __int128 d = static_cast<__int128>(den_) / std::gcd(den_, o.den_) * o.den_;
    if (d > INT64_MAX) throw RangeError("angle denominator overflow");
    int64_t dd = static_cast<int64_t>(d);
    __int128 n = static_cast<__int128>(num_) * (dd / den_) +
                 static_cast<__int128>(o.num_) * (dd / o.den_);
    return Angle::of(static_cast<int64_t>(n % dd), dd);
  }

  Angle minus(const Angle& o) const { return plus(o.negated()); }

  Angle negated() const { return num_ == 0 ? Angle() : Angle(den_ - num_, den_); }

  Angle times(int64_t k) const {
    __int128 kk = k % den_;
    __int128 n = kk * num_ % den_;
    if (n < 0) n += den_;
    return Angle::of(static_cast<int64_t>(n), den_);
  }

  // Distance to 0 on the torus, a rational in [0, 1/2].
  Rat dist_to_zero() const {
    if (2 * static_cast<__int128>(num_) <= den_) return Rat::make(num_, den_);
    return Rat::make(den_ - num_, den_);
  }

  double turns() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  std::complex<double> unit() const {
    double t = kTau * turns();
    return {std::cos(t), std::sin(t)};
  }

  friend bool operator==(const Angle& a, const Angle& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }

 private:
  Angle(int64_t n, int64_t d) : num_(n), den_(d) {}
  int64_t num_;
  int64_t den_;
};

// Chord length |e(a) - 1| for a torus distance given in turns.
inline double chord_of_dist(double dist_turns) { return 2.0 * std::sin(M_PI * dist_turns); }

// A point of the closed unit disk that is either exactly on the unit circle
// (rational angle), approximately on it (floating angle, unit modulus by
// construction), or exactly zero. Zero only arises from unmodified Dirichlet
// characters at arguments sharing a factor with the modulus.
class UnitValue {
 public:
  enum class Kind { Zero, Exact, Float };

  UnitValue() : kind_(Kind::Exact), angle_(), fturns_(0) {}

  static UnitValue zero() {
    UnitValue v;
    v.kind_ = Kind::Zero;
    return v;
  }
  static UnitValue one() { return UnitValue(); }
  static UnitValue exact(Angle a) {
    UnitValue v;
    v.kind_ = Kind::Exact;
    v.angle_ = a;
    return v;
  }
  static UnitValue from_turns(double t) {
    UnitValue v;
    v.kind_ = Kind::Float;
    v.fturns_ = t - std::floor(t);
    return v;
  }

  Kind kind() const { return kind_; }
  bool is_zero() const { return kind_ == Kind::Zero; }
  bool is_exact() const { return kind_ == Kind::Exact; }
  const Angle& angle() const { return angle_; }

  // Angle in turns; only meaningful for nonzero values.
  double turns() const { return kind_ == Kind::Exact ? angle_.turns() : fturns_; }

  std::complex<double> value() const {
    if (kind_ == Kind::Zero) return {0.0, 0.0};
    double t = kTau * turns();
    return {std::cos(t), std::sin(t)};
  }

  UnitValue times(const UnitValue& o) const {
    if (kind_ == Kind::Zero || o.kind_ == Kind::Zero) return zero();
    if (kind_ == Kind::Exact && o.kind_ == Kind::Exact)
      return exact(angle_.plus(o.angle_));
    return from_turns(turns() + o.turns());
  }

  UnitValue pow(int64_t k) const {
    if (kind_ == Kind::Zero) return k == 0 ? one() : zero();
    if (kind_ == Kind::Exact) return exact(angle_.times(k));
    return from_turns(fturns_ * static_cast<double>(k));
  }

  UnitValue conj() const {
    if (kind_ == Kind::Zero) return zero();
    if (kind_ == Kind::Exact) return exact(angle_.negated());
    return from_turns(-fturns_);
  }

 private:
  Kind kind_;
  Angle angle_;
  double fturns_;
};

// |u - v| for unit values; Zero contributes its true modulus 0.
inline double chord(const UnitValue& u, const UnitValue& v) {
  return std::abs(u.value() - v.value());
}

}  // namespace multrec
