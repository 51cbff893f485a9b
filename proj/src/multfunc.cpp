#include "multrec/multfunc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace multrec::multfunc {

namespace nk = multrec::numkernel;

namespace {

int64_t lcm_checked(int64_t a, int64_t b) {
  __int128 l = static_cast<__int128>(a) / std::gcd(a, b) * b;
  if (l > INT64_MAX) throw RangeError("angle denominator overflow in lcm");
  return static_cast<int64_t>(l);
}

struct Component {
  uint64_t prime_power;  // p^e
  uint64_t prime;
  uint32_t exp;
  // orders of the cyclic pieces; one entry except for 2^e, e >= 3
  std::vector<uint64_t> orders;
  // per residue mod p^e: exponents on the generators, or empty for non-coprime
  std::vector<std::vector<uint64_t>> dlog;
};

Component build_component(uint64_t p, uint32_t e) {
  Component c;
  c.prime = p;
  c.exp = e;
  c.prime_power = 1;
  for (uint32_t i = 0; i < e; ++i) c.prime_power *= p;
  uint64_t m = c.prime_power;
  c.dlog.assign(m, {});
  if (p == 2) {
    if (e == 1) {
      c.orders = {1};
      c.dlog[1 % m] = {0};
    } else if (e == 2) {
      c.orders = {2};
      c.dlog[1] = {0};
      c.dlog[3] = {1};
    } else {
      uint64_t half = m / 4;  // order of 5
      c.orders = {2, half};
      uint64_t v = 1;
      for (uint64_t s = 0; s < half; ++s) {
        c.dlog[v] = {0, s};
        c.dlog[m - v] = {1, s};
        v = v * 5 % m;
      }
    }
  } else {
    uint64_t phi = nk::euler_phi_prime_power(p, e);
    uint64_t g = nk::smallest_generator(p, e);
    c.orders = {phi};
    uint64_t v = 1;
    for (uint64_t r = 0; r < phi; ++r) {
      c.dlog[v] = {r};
      v = nk::mul_mod(v, g, m);
    }
  }
  return c;
}

uint64_t compute_conductor(uint64_t q, const std::vector<int64_t>& table) {
  if (q == 1) return 1;
  std::vector<uint64_t> divisors;
  for (uint64_t d = 1; d * d <= q; ++d) {
    if (q % d == 0) {
      divisors.push_back(d);
      if (d != q / d) divisors.push_back(q / d);
    }
  }
  std::sort(divisors.begin(), divisors.end());
  for (uint64_t d : divisors) {
    bool ok = true;
    for (uint64_t x = 1 % q; x < q; x += d) {
      if (x == 0) continue;
      if (std::gcd(x, q) != 1) continue;
      if (table[x] != 0) {
        ok = false;
        break;
      }
    }
    if (ok) return d;
  }
  return q;
}

}  // namespace

bool DirichletCharacter::is_principal() const {
  if (modulus_ == 1) return true;
  for (uint64_t r = 0; r < modulus_; ++r)
    if (table_[r] > 0) return false;
  return true;
}

UnitValue DirichletCharacter::at(uint64_t n) const {
  if (modulus_ == 1) return UnitValue::one();
  int64_t a = table_[n % modulus_];
  if (a < 0) return UnitValue::zero();
  return UnitValue::exact(Angle::of(a, order_den_));
}

UnitValue DirichletCharacter::at_signed(int64_t n) const {
  if (modulus_ == 1) return UnitValue::one();
  int64_t r = n % static_cast<int64_t>(modulus_);
  if (r < 0) r += static_cast<int64_t>(modulus_);
  return at(static_cast<uint64_t>(r));
}

DirichletCharacter DirichletCharacter::conjugate() const {
  // negate each component index and rebuild, keeping index/table consistent
  if (modulus_ == 1) return *this;
  auto fact = nk::factorize(modulus_);
  std::vector<uint64_t> orders;
  for (const auto& e : fact.entries) {
    if (e.prime == 2) {
      if (e.exponent == 1)
        orders.push_back(1);
      else if (e.exponent == 2)
        orders.push_back(2);
      else {
        orders.push_back(2);
        uint64_t h = 1;
        for (uint32_t i = 0; i + 2 < e.exponent; ++i) h *= 2;
        orders.push_back(h);
      }
    } else {
      orders.push_back(nk::euler_phi_prime_power(e.prime, e.exponent));
    }
  }
  std::vector<uint64_t> idx(index_);
  for (size_t i = 0; i < idx.size(); ++i)
    idx[i] = idx[i] == 0 ? 0 : orders[i] - idx[i];
  return dirichlet_character(modulus_, idx);
}

DirichletCharacter dirichlet_character(uint64_t q, std::span<const uint64_t> index) {
  if (q == 0) throw InvalidInput("dirichlet_character: modulus must be positive");
  if (q > kModulusBudget) throw RangeError("dirichlet_character: modulus exceeds budget (1e6)");
  DirichletCharacter chi;
  chi.modulus_ = q;
  chi.index_.assign(index.begin(), index.end());
  if (q == 1) {
    if (!(index.empty() || (index.size() == 1 && index[0] == 0)))
      throw InvalidInput("dirichlet_character: invalid index for modulus 1");
    chi.conductor_ = 1;
    chi.order_den_ = 1;
    return chi;
  }
  auto fact = nk::factorize(q);
  std::vector<Component> comps;
  std::vector<uint64_t> idx;
  size_t pos = 0;
  for (const auto& e : fact.entries) {
    comps.push_back(build_component(e.prime, e.exponent));
    size_t need = comps.back().orders.size();
    for (size_t i = 0; i < need; ++i) {
      if (pos >= index.size())
        throw InvalidInput("dirichlet_character: too few index entries");
      if (index[pos] >= comps.back().orders[i])
        throw InvalidInput("dirichlet_character: index entry out of range");
      idx.push_back(index[pos++]);
    }
  }
  if (pos != index.size()) throw InvalidInput("dirichlet_character: too many index entries");

  int64_t den = 1;
  for (const auto& c : comps)
    for (uint64_t o : c.orders) den = lcm_checked(den, static_cast<int64_t>(o));
  chi.order_den_ = den;
  chi.table_.assign(q, -1);
  for (uint64_t n = 0; n < q; ++n) {
    if (std::gcd(n, q) != 1) continue;
    __int128 num = 0;
    size_t k = 0;
    bool zero = false;
    for (const auto& c : comps) {
      const auto& dl = c.dlog[n % c.prime_power];
      if (dl.empty()) {
        zero = true;
        break;
      }
      for (size_t i = 0; i < c.orders.size(); ++i, ++k) {
        // contribution idx[k] * dl[i] / orders[i], scaled to den
        uint64_t o = c.orders[i];
        __int128 contrib = static_cast<__int128>(idx[k] % o) * (dl[i] % o) % o;
        num += contrib * (den / static_cast<int64_t>(o));
      }
    }
    if (zero) continue;  // cannot happen for gcd == 1
    chi.table_[n] = static_cast<int64_t>(num % den);
  }
  chi.conductor_ = compute_conductor(q, chi.table_);
  return chi;
}

DirichletCharacter cyclic_character(uint64_t p, uint32_t u) {
  if (p == 2) throw InvalidInput("cyclic_character: p = 2 unsupported (no single generator)");
  if (!nk::is_prime(p)) throw InvalidInput("cyclic_character: p must be an odd prime");
  if (u == 0) throw InvalidInput("cyclic_character: exponent must be positive");
  std::vector<uint64_t> idx = {1};
  return dirichlet_character([&] {
    uint64_t m = 1;
    for (uint32_t i = 0; i < u; ++i) {
      if (m > kModulusBudget / p) throw RangeError("cyclic_character: modulus exceeds budget");
      m *= p;
    }
    return m;
  }(), idx);
}

std::vector<DirichletCharacter> characters_mod(uint64_t q) {
  std::vector<std::vector<uint64_t>> tuples{{}};
  if (q > 1) {
    auto fact = nk::factorize(q);
    std::vector<uint64_t> orders;
    for (const auto& e : fact.entries) {
      if (e.prime == 2) {
        if (e.exponent == 1)
          orders.push_back(1);
        else if (e.exponent == 2)
          orders.push_back(2);
        else {
          orders.push_back(2);
          uint64_t h = 1;
          for (uint32_t i = 0; i + 2 < e.exponent; ++i) h *= 2;
          orders.push_back(h);
        }
      } else {
        orders.push_back(nk::euler_phi_prime_power(e.prime, e.exponent));
      }
    }
    for (uint64_t o : orders) {
      std::vector<std::vector<uint64_t>> next;
      for (const auto& t : tuples) {
        for (uint64_t k = 0; k < o; ++k) {
          auto tt = t;
          tt.push_back(k);
          next.push_back(std::move(tt));
        }
      }
      tuples = std::move(next);
    }
  }
  std::vector<DirichletCharacter> out;
  out.reserve(tuples.size());
  for (const auto& t : tuples) out.push_back(dirichlet_character(q, t));
  return out;
}

// ---------------------------------------------------------------------------

struct MultFunction::Node {
  enum class Kind { One, Liouville, Character, Modified, Twist, Product, Power, Conj };
  Kind kind = Kind::One;
  DirichletCharacter chi;
  std::map<uint64_t, Angle> overrides;
  double t = 0;          // Twist parameter
  int64_t ell = 1;       // Power exponent
  std::shared_ptr<const Node> left, right;

  // cached canonical decomposition
  int64_t den = 1;       // common denominator of exact-part prime angles
  double t_net = 0;      // total Archimedean exponent
  bool in_m = true;
};

MultFunction::MultFunction() : node_(std::make_shared<Node>()) {}
MultFunction::MultFunction(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

MultFunction MultFunction::one() { return MultFunction(); }

MultFunction MultFunction::liouville() {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Liouville;
  n->den = 2;
  return MultFunction(n);
}

MultFunction MultFunction::character(DirichletCharacter chi) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Character;
  n->den = chi.order_den();
  n->in_m = chi.modulus() == 1;
  n->chi = std::move(chi);
  return MultFunction(n);
}

MultFunction MultFunction::modified_character(DirichletCharacter base,
                                              std::map<uint64_t, Angle> overrides,
                                              bool require_in_m) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Modified;
  int64_t den = base.order_den();
  for (const auto& [p, a] : overrides) {
    if (!nk::is_prime(p)) throw InvalidInput("modified_character: override key not prime");
    den = lcm_checked(den, a.den());
  }
  if (require_in_m && base.modulus() > 1) {
    for (const auto& e : nk::factorize(base.modulus()).entries) {
      if (!overrides.count(e.prime))
        throw InvalidInput("modified_character: missing override for prime " +
                           std::to_string(e.prime) + " dividing the modulus");
    }
  }
  bool covered = true;
  if (base.modulus() > 1) {
    for (const auto& e : nk::factorize(base.modulus()).entries)
      if (!overrides.count(e.prime)) covered = false;
  }
  n->den = den;
  n->in_m = covered;
  n->chi = std::move(base);
  n->overrides = std::move(overrides);
  return MultFunction(n);
}

MultFunction MultFunction::archimedean_twist(double t) {
  if (!std::isfinite(t)) throw InvalidInput("archimedean_twist: t must be finite");
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Twist;
  n->t = t;
  n->t_net = t;
  return MultFunction(n);
}

MultFunction MultFunction::product(const MultFunction& f, const MultFunction& g) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Product;
  n->left = f.node_;
  n->right = g.node_;
  n->den = lcm_checked(f.node_->den, g.node_->den);
  n->t_net = f.node_->t_net + g.node_->t_net;
  n->in_m = f.node_->in_m && g.node_->in_m;
  return MultFunction(n);
}

MultFunction MultFunction::power(const MultFunction& f, int64_t ell) {
  if (ell == 0) throw InvalidInput("power: exponent must be nonzero");
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Power;
  n->left = f.node_;
  n->ell = ell;
  n->den = f.node_->den;
  n->t_net = f.node_->t_net * static_cast<double>(ell);
  n->in_m = f.node_->in_m;
  return MultFunction(n);
}

MultFunction MultFunction::conjugate(const MultFunction& f) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Conj;
  n->left = f.node_;
  n->den = f.node_->den;
  n->t_net = -f.node_->t_net;
  n->in_m = f.node_->in_m;
  return MultFunction(n);
}

int64_t MultFunction::exact_den() const { return node_->den; }
double MultFunction::twist_t() const { return node_->t_net; }
bool MultFunction::in_m() const { return node_->in_m; }

namespace {

// exact-part angle numerator at p, over node->den
PrimeAngle node_prime_angle(const MultFunction::Node* n, uint64_t p);

PrimeAngle scaled(const MultFunction::Node* child, uint64_t p, int64_t parent_den) {
  PrimeAngle a = node_prime_angle(child, p);
  if (a.zero) return a;
  a.num *= parent_den / child->den;
  return a;
}

PrimeAngle node_prime_angle(const MultFunction::Node* n, uint64_t p) {
  using K = MultFunction::Node::Kind;
  switch (n->kind) {
    case K::One:
    case K::Twist:
      return {false, 0};
    case K::Liouville:
      return {false, 1};  // e(1/2) over den 2
    case K::Character: {
      if (n->chi.modulus() == 1) return {false, 0};
      int64_t a = n->chi.angle_num(p);
      if (a < 0) return {true, 0};
      return {false, a};
    }
    case K::Modified: {
      auto it = n->overrides.find(p);
      if (it != n->overrides.end())
        return {false, it->second.num() * (n->den / it->second.den())};
      if (n->chi.modulus() == 1) return {false, 0};
      int64_t a = n->chi.angle_num(p);
      if (a < 0) return {true, 0};
      return {false, a * (n->den / n->chi.order_den())};
    }
    case K::Product: {
      PrimeAngle l = scaled(n->left.get(), p, n->den);
      if (l.zero) return l;
      PrimeAngle r = scaled(n->right.get(), p, n->den);
      if (r.zero) return r;
      return {false, (l.num + r.num) % n->den};
    }
    case K::Power: {
      PrimeAngle l = node_prime_angle(n->left.get(), p);
      if (l.zero) return l;
      int64_t k = ((n->ell % n->den) + n->den) % n->den;
      return {false, static_cast<int64_t>(static_cast<__int128>(l.num) * k % n->den)};
    }
    case K::Conj: {
      PrimeAngle l = node_prime_angle(n->left.get(), p);
      if (l.zero) return l;
      return {false, l.num == 0 ? 0 : n->den - l.num};
    }
  }
  return {false, 0};
}

}  // namespace

PrimeAngle MultFunction::prime_angle(uint64_t p) const {
  return node_prime_angle(node_.get(), p);
}

UnitValue MultFunction::prime_value(uint64_t p) const {
  PrimeAngle a = prime_angle(p);
  if (a.zero) return UnitValue::zero();
  if (node_->t_net == 0.0) return UnitValue::exact(Angle::of(a.num, node_->den));
  double turns = static_cast<double>(a.num) / static_cast<double>(node_->den) +
                 node_->t_net * std::log(static_cast<double>(p)) / kTau;
  return UnitValue::from_turns(turns);
}

UnitValue MultFunction::eval(uint64_t n) const {
  if (n == 0) throw RangeError("eval: argument must be >= 1");
  if (n > (1ull << 63)) throw RangeError("eval: argument exceeds 2^63");
  auto fact = nk::factorize(n);
  __int128 num = 0;
  const int64_t den = node_->den;
  for (const auto& e : fact.entries) {
    PrimeAngle a = prime_angle(e.prime);
    if (a.zero) return UnitValue::zero();
    num += static_cast<__int128>(a.num) * e.exponent;
  }
  int64_t exact_num = static_cast<int64_t>(num % den);
  if (node_->t_net == 0.0) return UnitValue::exact(Angle::of(exact_num, den));
  double turns = static_cast<double>(exact_num) / static_cast<double>(den) +
                 node_->t_net * std::log(static_cast<double>(n)) / kTau;
  return UnitValue::from_turns(turns);
}

uint64_t nearest_root(const UnitValue& a, uint64_t ell) {
  if (ell == 0) throw InvalidInput("nearest_root: ell must be positive");
  if (a.is_zero()) throw InvalidInput("nearest_root: |a| must be 1");
  if (a.is_exact()) {
    // round angle * ell to the nearest integer, exactly
    const Angle& ang = a.angle();
    __int128 twice = static_cast<__int128>(2) * ang.num() * ell;  // over 2*den
    int64_t den2 = 2 * ang.den();
    __int128 j = (twice + ang.den()) / den2;  // floor((x*ell)+1/2)
    return static_cast<uint64_t>(j % static_cast<__int128>(ell));
  }
  double t = a.turns() * static_cast<double>(ell);
  int64_t j = static_cast<int64_t>(std::llround(t));
  j %= static_cast<int64_t>(ell);
  if (j < 0) j += static_cast<int64_t>(ell);
  return static_cast<uint64_t>(j);
}

}  // namespace multrec::multfunc
