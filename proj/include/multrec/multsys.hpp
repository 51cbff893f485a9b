#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "multrec/multfunc.hpp"
#include "multrec/recurrence.hpp"

namespace multrec::multsys {

// An arc [start, start+length) on the torus R/Z. Endpoints stay exact
// rationals as long as the system only applies rational rotations.
struct Arc {
  bool exact = true;
  Angle start, length;      // exact representation
  double fstart = 0, flength = 0;  // floating representation

  static Arc of(Angle start, Angle length);
  static Arc approx(double start, double length);
  double measure() const { return exact ? length.turns() : flength; }
};

// Disjoint arcs sorted by start.
struct ArcSet {
  std::vector<Arc> arcs;
  bool exact = true;

  static ArcSet single(Arc a);
  double measure() const;
  // exact total measure; only meaningful when exact
  Rat measure_exact() const;
};

ArcSet rotate(const ArcSet& set, const UnitValue& by);
ArcSet intersect(const ArcSet& a, const ArcSet& b);

// One coordinate action z -> f(n) z; built from a MultFunction or, for
// negative controls, from an arbitrary angle map.
struct CoordinateMap {
  std::function<UnitValue(uint64_t)> angle_of;
  bool exact = true;

  static CoordinateMap from_function(const multfunc::MultFunction& f);
  static CoordinateMap from_table(std::function<UnitValue(uint64_t)> fn, bool exact);
};

// Finitely generated multiplicative rotation action on a product of circles:
// T_n (z_1,...,z_l) = (f_1(n) z_1, ..., f_l(n) z_l).
struct RotationSystem {
  std::vector<CoordinateMap> coords;
  std::vector<multfunc::MultFunction> functions;  // kept when built from functions

  static RotationSystem from_functions(const std::vector<multfunc::MultFunction>& fs);
  size_t dimension() const { return coords.size(); }
};

// Coordinatewise preimage T_n^{-1} A; rotation by the conjugate of f_i(n).
std::vector<ArcSet> preimage(const RotationSystem& sys, uint64_t n,
                             const std::vector<ArcSet>& A);

struct Measure {
  bool exact;
  Rat value_exact;
  double value;
};

// Product over coordinates of mu(T_p^{-1} A_i cap T_q^{-1} A_i).
Measure recurrence_measure(const RotationSystem& sys, uint64_t p, uint64_t q,
                           const std::vector<ArcSet>& A);

struct RecurrenceEvent {
  uint64_t n;
  uint64_t p_n, q_n;
  double measure;
};

struct ScanResult {
  std::vector<RecurrenceEvent> events;
  uint64_t count = 0;
  uint64_t largest_gap = 0;  // between consecutive event indices n
  uint64_t first_event = 0;
  // Bridge check (single-arc one-dimensional systems): every positive event
  // satisfies |f(p_n) - f(q_n)| <= 2 sin(pi * arc measure).
  bool bridge_checked = false;
  bool bridge_ok = true;
};

// Events {n <= N : measure > 0} for p_n = a n + b, q_n = c n + d.
ScanResult scan_recurrence(const RotationSystem& sys, const recurrence::Quadruple& S,
                           const std::vector<ArcSet>& A, uint64_t N);

// Same over an explicit sequence of (p_n, q_n) pairs.
ScanResult scan_recurrence_seq(const RotationSystem& sys,
                               const std::vector<std::pair<uint64_t, uint64_t>>& seq,
                               const std::vector<ArcSet>& A);

struct AxiomReport {
  bool ok;
  uint64_t trials;
  std::string failure;  // witness description when !ok
  // default random arc family: rational endpoints with denominator <= 64
  uint32_t arc_denominator_bound = 64;
};

// Composition law T_n T_m = T_{nm} and measure preservation on random arcs,
// exact on rational angles.
AxiomReport action_axioms_check(const RotationSystem& sys, uint64_t trials,
                                uint64_t seed = 1);

}  // namespace multrec::multsys
