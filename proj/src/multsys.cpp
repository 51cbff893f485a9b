#include "multrec/multsys.hpp"

#include <algorithm>
#include <cmath>

#include "multrec/progression.hpp"

namespace multrec::multsys {

using multfunc::MultFunction;

namespace {

// SplitMix64; platform-independent deterministic stream.
struct Rng {
  uint64_t s;
  uint64_t next() {
    s += 0x9E3779B97f4A7C15ull;
    uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  uint64_t below(uint64_t m) { return next() % m; }
};

struct Interval {
  Rat s, e;        // exact path; 0 <= s < e <= 1
  double fs, fe;   // floating path
};

std::vector<Interval> to_intervals(const ArcSet& set) {
  std::vector<Interval> out;
  for (const Arc& a : set.arcs) {
    if (set.exact) {
      Rat s = Rat::make(a.start.num(), a.start.den());
      Rat e = rat_add(s, Rat::make(a.length.num() == 0 ? a.length.den() : a.length.num(),
                                   a.length.den()));
      if (rat_leq(e, Rat::make(1, 1))) {
        out.push_back({s, e, s.value(), e.value()});
      } else {
        Rat one = Rat::make(1, 1);
        out.push_back({s, one, s.value(), 1.0});
        Rat e2 = rat_sub(e, one);
        if (e2.num > 0) out.push_back({Rat::make(0, 1), e2, 0.0, e2.value()});
      }
    } else {
      double s = a.fstart - std::floor(a.fstart);
      double e = s + a.flength;
      if (e <= 1.0) {
        out.push_back({{}, {}, s, e});
      } else {
        out.push_back({{}, {}, s, 1.0});
        out.push_back({{}, {}, 0.0, e - 1.0});
      }
    }
  }
  std::sort(out.begin(), out.end(), [&](const Interval& x, const Interval& y) {
    return set.exact ? rat_less(x.s, y.s) : x.fs < y.fs;
  });
  return out;
}

ArcSet from_intervals(std::vector<Interval> iv, bool exact) {
  ArcSet set;
  set.exact = exact;
  for (const auto& i : iv) {
    Arc a;
    a.exact = exact;
    if (exact) {
      Rat len = rat_sub(i.e, i.s);
      if (len.num <= 0) continue;
      a.start = Angle::of(i.s.num, i.s.den);
      a.length = Angle::of(len.num, len.den);  // wraps to 0 for the full circle
      a.fstart = i.fs;
      a.flength = len.value();
    } else {
      if (i.fe - i.fs <= 0) continue;
      a.fstart = i.fs;
      a.flength = i.fe - i.fs;
    }
    set.arcs.push_back(a);
  }
  return set;
}

}  // namespace

Arc Arc::of(Angle start, Angle length) {
  Arc a;
  a.exact = true;
  a.start = start;
  a.length = length;
  a.fstart = start.turns();
  a.flength = length.turns() == 0 ? 1.0 : length.turns();  // zero angle means full circle
  return a;
}

Arc Arc::approx(double start, double length) {
  if (!(length > 0 && length <= 1)) throw InvalidInput("arc: length must lie in (0, 1]");
  Arc a;
  a.exact = false;
  a.fstart = start - std::floor(start);
  a.flength = length;
  return a;
}

ArcSet ArcSet::single(Arc a) {
  ArcSet s;
  s.exact = a.exact;
  s.arcs.push_back(a);
  return s;
}

double ArcSet::measure() const {
  double m = 0;
  for (const auto& a : arcs) m += a.exact ? (a.length.turns() == 0 ? 1.0 : a.length.turns())
                                          : a.flength;
  return m;
}

Rat ArcSet::measure_exact() const {
  Rat m = Rat::make(0, 1);
  for (const auto& a : arcs) {
    if (!a.exact) throw InvalidInput("measure_exact on floating arcs");
    m = rat_add(m, a.length.turns() == 0 ? Rat::make(1, 1)
                                         : Rat::make(a.length.num(), a.length.den()));
  }
  return m;
}

ArcSet rotate(const ArcSet& set, const UnitValue& by) {
  if (by.is_zero()) throw InvalidInput("rotate: rotation value must be nonzero");
  ArcSet out;
  out.exact = set.exact && by.is_exact();
  for (const Arc& a : set.arcs) {
    Arc b;
    b.exact = out.exact;
    if (out.exact) {
      b.start = a.start.plus(by.angle());
      b.length = a.length;
      b.fstart = b.start.turns();
      b.flength = a.flength;
    } else {
      double s = (a.exact ? a.start.turns() : a.fstart) + by.turns();
      b.fstart = s - std::floor(s);
      b.flength = a.exact ? (a.length.turns() == 0 ? 1.0 : a.length.turns()) : a.flength;
    }
    out.arcs.push_back(b);
  }
  std::sort(out.arcs.begin(), out.arcs.end(), [&](const Arc& x, const Arc& y) {
    return out.exact ? rat_less(Rat::make(x.start.num(), x.start.den()),
                                Rat::make(y.start.num(), y.start.den()))
                     : x.fstart < y.fstart;
  });
  return out;
}

ArcSet intersect(const ArcSet& a, const ArcSet& b) {
  bool exact = a.exact && b.exact;
  ArcSet a2 = a, b2 = b;
  a2.exact = exact;
  b2.exact = exact;
  if (!exact) {
    for (auto& arc : a2.arcs)
      if (arc.exact) {
        arc.exact = false;
        arc.fstart = arc.start.turns();
        arc.flength = arc.length.turns() == 0 ? 1.0 : arc.length.turns();
      }
    for (auto& arc : b2.arcs)
      if (arc.exact) {
        arc.exact = false;
        arc.fstart = arc.start.turns();
        arc.flength = arc.length.turns() == 0 ? 1.0 : arc.length.turns();
      }
  }
  auto ia = to_intervals(a2), ib = to_intervals(b2);
  std::vector<Interval> out;
  size_t i = 0, j = 0;
  while (i < ia.size() && j < ib.size()) {
    if (exact) {
      Rat lo = rat_less(ia[i].s, ib[j].s) ? ib[j].s : ia[i].s;
      Rat hi = rat_less(ia[i].e, ib[j].e) ? ia[i].e : ib[j].e;
      if (rat_less(lo, hi)) out.push_back({lo, hi, lo.value(), hi.value()});
      if (rat_less(ia[i].e, ib[j].e))
        ++i;
      else
        ++j;
    } else {
      double lo = std::max(ia[i].fs, ib[j].fs);
      double hi = std::min(ia[i].fe, ib[j].fe);
      if (lo < hi) out.push_back({{}, {}, lo, hi});
      if (ia[i].fe < ib[j].fe)
        ++i;
      else
        ++j;
    }
  }
  return from_intervals(std::move(out), exact);
}

CoordinateMap CoordinateMap::from_function(const MultFunction& f) {
  CoordinateMap c;
  c.exact = f.is_exact();
  c.angle_of = [f](uint64_t n) { return f.eval(n); };
  return c;
}

CoordinateMap CoordinateMap::from_table(std::function<UnitValue(uint64_t)> fn, bool exact) {
  CoordinateMap c;
  c.exact = exact;
  c.angle_of = std::move(fn);
  return c;
}

RotationSystem RotationSystem::from_functions(const std::vector<MultFunction>& fs) {
  RotationSystem sys;
  for (const auto& f : fs) {
    if (!f.in_m())
      throw InvalidInput("rotation system: every coordinate function must lie in M (no zeros)");
    sys.coords.push_back(CoordinateMap::from_function(f));
    sys.functions.push_back(f);
  }
  return sys;
}

std::vector<ArcSet> preimage(const RotationSystem& sys, uint64_t n,
                             const std::vector<ArcSet>& A) {
  if (A.size() != sys.dimension())
    throw InvalidInput("preimage: arc sets do not match the system dimension");
  std::vector<ArcSet> out;
  for (size_t i = 0; i < A.size(); ++i)
    out.push_back(rotate(A[i], sys.coords[i].angle_of(n).conj()));
  return out;
}

namespace {

Measure measure_of_pair(const std::vector<ArcSet>& A, const std::vector<UnitValue>& vp,
                        const std::vector<UnitValue>& vq) {
  Measure m;
  m.exact = true;
  m.value_exact = Rat::make(1, 1);
  m.value = 1.0;
  for (size_t i = 0; i < A.size(); ++i) {
    ArcSet cap = intersect(rotate(A[i], vp[i].conj()), rotate(A[i], vq[i].conj()));
    if (cap.exact) {
      Rat mi = cap.measure_exact();
      m.value_exact = rat_mul(m.value_exact, mi);
      m.value *= mi.value();
    } else {
      m.exact = false;
      m.value *= cap.measure();
    }
  }
  if (!m.exact) m.value_exact = Rat::make(0, 1);
  return m;
}

}  // namespace

Measure recurrence_measure(const RotationSystem& sys, uint64_t p, uint64_t q,
                           const std::vector<ArcSet>& A) {
  if (A.size() != sys.dimension())
    throw InvalidInput("recurrence_measure: arc sets do not match the system dimension");
  std::vector<UnitValue> vp, vq;
  for (size_t i = 0; i < A.size(); ++i) {
    vp.push_back(sys.coords[i].angle_of(p));
    vq.push_back(sys.coords[i].angle_of(q));
  }
  return measure_of_pair(A, vp, vq);
}

namespace {

void record_event(ScanResult& res, uint64_t n, uint64_t pn, uint64_t qn, const Measure& m,
                  const std::vector<ArcSet>& A, const std::vector<UnitValue>& vp,
                  const std::vector<UnitValue>& vq) {
  bool positive = m.exact ? m.value_exact.num > 0 : m.value > 0;
  if (!positive) return;
  if (res.count == 0)
    res.first_event = n;
  else
    res.largest_gap = std::max(res.largest_gap, n - res.events.back().n);
  res.events.push_back({n, pn, qn, m.exact ? m.value_exact.value() : m.value});
  ++res.count;
  // Lemma-style bridge: on a one-dimensional single-arc system, a positive
  // event forces |f(p)-f(q)| within the arc diameter.
  if (A.size() == 1 && A[0].arcs.size() == 1) {
    res.bridge_checked = true;
    double len = A[0].measure();
    double bound = 2.0 * std::sin(M_PI * std::min(len, 0.5)) + 1e-12;
    if (chord(vp[0], vq[0]) > bound) res.bridge_ok = false;
  }
}

}  // namespace

ScanResult scan_recurrence(const RotationSystem& sys, const recurrence::Quadruple& S,
                           const std::vector<ArcSet>& A, uint64_t N) {
  if (A.size() != sys.dimension())
    throw InvalidInput("scan_recurrence: arc sets do not match the system dimension");
  ScanResult res;
  // evaluate all coordinate functions along both progressions via the sieve
  size_t dim = sys.dimension();
  std::vector<std::vector<UnitValue>> vp(dim), vq(dim);
  constexpr uint64_t kBlock = 1 << 16;
  for (uint64_t n0 = 1; n0 <= N; n0 += kBlock) {
    uint64_t n1 = std::min(N, n0 + kBlock - 1);
    for (size_t i = 0; i < dim; ++i) {
      vp[i].clear();
      vq[i].clear();
      if (i < sys.functions.size()) {
        const MultFunction& f = sys.functions[i];
        bool exact = f.is_exact();
        int64_t den = f.exact_den();
        progression::for_each_pair(
            f, S.a, S.b, f, S.c, S.d, n0, n1,
            [&](const progression::Sample& u, const progression::Sample& v) {
              vp[i].push_back(exact ? UnitValue::exact(Angle::of(u.exact_num, den))
                                    : UnitValue::from_turns(u.turns));
              vq[i].push_back(exact ? UnitValue::exact(Angle::of(v.exact_num, den))
                                    : UnitValue::from_turns(v.turns));
            });
      } else {
        for (uint64_t n = n0; n <= n1; ++n) {
          int64_t pn = S.a * static_cast<int64_t>(n) + S.b;
          int64_t qn = S.c * static_cast<int64_t>(n) + S.d;
          if (pn < 1 || qn < 1)
            throw RangeError("scan_recurrence: arguments must stay positive on the range");
          vp[i].push_back(sys.coords[i].angle_of(static_cast<uint64_t>(pn)));
          vq[i].push_back(sys.coords[i].angle_of(static_cast<uint64_t>(qn)));
        }
      }
    }
    std::vector<UnitValue> up(dim), uq(dim);
    for (uint64_t n = n0; n <= n1; ++n) {
      for (size_t i = 0; i < dim; ++i) {
        up[i] = vp[i][n - n0];
        uq[i] = vq[i][n - n0];
      }
      Measure m = measure_of_pair(A, up, uq);
      record_event(res, n, static_cast<uint64_t>(S.a * static_cast<int64_t>(n) + S.b),
                   static_cast<uint64_t>(S.c * static_cast<int64_t>(n) + S.d), m, A, up, uq);
    }
  }
  return res;
}

ScanResult scan_recurrence_seq(const RotationSystem& sys,
                               const std::vector<std::pair<uint64_t, uint64_t>>& seq,
                               const std::vector<ArcSet>& A) {
  ScanResult res;
  for (size_t k = 0; k < seq.size(); ++k) {
    auto [pn, qn] = seq[k];
    std::vector<UnitValue> vp, vq;
    for (size_t i = 0; i < sys.dimension(); ++i) {
      vp.push_back(sys.coords[i].angle_of(pn));
      vq.push_back(sys.coords[i].angle_of(qn));
    }
    Measure m = measure_of_pair(A, vp, vq);
    record_event(res, k + 1, pn, qn, m, A, vp, vq);
  }
  return res;
}

AxiomReport action_axioms_check(const RotationSystem& sys, uint64_t trials, uint64_t seed) {
  AxiomReport rep;
  rep.ok = true;
  rep.trials = trials;
  Rng rng{seed};
  for (uint64_t t = 0; t < trials && rep.ok; ++t) {
    uint64_t n = 1 + rng.below(10'000);
    uint64_t m = 1 + rng.below(10'000);
    uint64_t den = 1 + rng.below(rep.arc_denominator_bound);
    uint64_t num = rng.below(den);
    uint64_t len = 1 + rng.below(den);
    Arc arc = Arc::of(Angle::of(static_cast<int64_t>(num), static_cast<int64_t>(den)),
                      Angle::of(static_cast<int64_t>(len % den), static_cast<int64_t>(den)));
    ArcSet aset = ArcSet::single(arc);
    for (size_t i = 0; i < sys.dimension(); ++i) {
      UnitValue fn = sys.coords[i].angle_of(n);
      UnitValue fm = sys.coords[i].angle_of(m);
      UnitValue fnm = sys.coords[i].angle_of(n * m);
      bool zero_consistent = (fn.is_zero() || fm.is_zero()) == fnm.is_zero();
      bool comp;
      if (fn.is_zero() || fm.is_zero() || fnm.is_zero()) {
        comp = zero_consistent;
      } else if (fn.is_exact() && fm.is_exact() && fnm.is_exact()) {
        comp = fn.angle().plus(fm.angle()) == fnm.angle();
      } else {
        double d = fn.turns() + fm.turns() - fnm.turns();
        d -= std::floor(d);
        comp = std::min(d, 1.0 - d) < 1e-9;
      }
      if (!comp) {
        rep.ok = false;
        rep.failure = "composition law failed at coordinate " + std::to_string(i) + " with (n,m)=(" +
                      std::to_string(n) + "," + std::to_string(m) + ")";
        break;
      }
      if (!fn.is_zero()) {
        ArcSet pre = rotate(aset, fn.conj());
        bool preserved;
        if (pre.exact)
          preserved = !rat_less(pre.measure_exact(), aset.measure_exact()) &&
                      !rat_less(aset.measure_exact(), pre.measure_exact());
        else
          preserved = std::abs(pre.measure() - aset.measure()) < 1e-12;
        if (!preserved) {
          rep.ok = false;
          rep.failure = "measure not preserved at coordinate " + std::to_string(i) +
                        " with n=" + std::to_string(n);
          break;
        }
      }
    }
  }
  return rep;
}

}  // namespace multrec::multsys
