#include "multrec/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "multrec/folner.hpp"
#include "multrec/grammar.hpp"
#include "multrec/multsys.hpp"
#include "multrec/pretentious.hpp"
#include "multrec/progression.hpp"
#include "multrec/recurrence.hpp"

namespace multrec::cli {

using json = nlohmann::json;
namespace mf = multrec::multfunc;
namespace pre = multrec::pretentious;
namespace fol = multrec::folner;
namespace rec = multrec::recurrence;
namespace sys = multrec::multsys;

namespace {

constexpr uint64_t kRangeBudget = 100'000'000;  // largest N or X accepted by the CLI

std::string fmt_double(double v) {
  char buf[40];
  snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void check_range_budget(uint64_t v, const std::string& flag) {
  if (v > kRangeBudget)
    throw RangeError(flag + " exceeds the range budget (1e8)");
}

struct Out {
  std::ostream* stream;
  std::ofstream file;

  explicit Out(const std::string& path, std::ostream& fallback) {
    if (path.empty()) {
      stream = &fallback;
    } else {
      file.open(path);
      if (!file) throw InvalidInput("cannot open output file " + path);
      stream = &file;
    }
  }
  std::ostream& os() { return *stream; }
};

std::vector<int64_t> parse_i64_list(const std::string& s, size_t expect = 0) {
  std::vector<int64_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoll(tok));
  if (expect && out.size() != expect)
    throw InvalidInput("expected " + std::to_string(expect) + " comma-separated integers in '" +
                       s + "'");
  return out;
}

std::vector<uint64_t> parse_u64_list(const std::string& s) {
  std::vector<uint64_t> out;
  for (int64_t v : parse_i64_list(s)) {
    if (v < 0) throw InvalidInput("expected nonnegative integers in '" + s + "'");
    out.push_back(static_cast<uint64_t>(v));
  }
  return out;
}

Angle parse_angle(const std::string& s) {
  auto slash = s.find('/');
  if (slash == std::string::npos) return Angle::of(std::stoll(s), 1);
  return Angle::of(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
}

// "start:length[;start:length...]", rational (a/b) or decimal endpoints
sys::ArcSet parse_arcset(const std::string& s) {
  sys::ArcSet set;
  std::stringstream ss(s);
  std::string tok;
  bool exact = true;
  std::vector<sys::Arc> arcs;
  while (std::getline(ss, tok, ';')) {
    auto colon = tok.find(':');
    if (colon == std::string::npos) throw InvalidInput("arc must be start:length, got '" + tok + "'");
    std::string a = tok.substr(0, colon), b = tok.substr(colon + 1);
    bool rational = a.find('.') == std::string::npos && b.find('.') == std::string::npos;
    if (rational) {
      arcs.push_back(sys::Arc::of(parse_angle(a), parse_angle(b)));
    } else {
      exact = false;
      arcs.push_back(sys::Arc::approx(std::stod(a), std::stod(b)));
    }
  }
  if (arcs.empty()) throw InvalidInput("empty arc set");
  set.exact = exact && arcs.front().exact;
  for (auto& a : arcs) {
    if (!set.exact && a.exact) {
      a.exact = false;
      a.fstart = a.start.turns();
      a.flength = a.length.turns() == 0 ? 1.0 : a.length.turns();
    }
    set.arcs.push_back(a);
  }
  return set;
}

json unit_value_json(const UnitValue& v) {
  json j;
  if (v.is_zero()) {
    j["kind"] = "zero";
    j["re"] = 0.0;
    j["im"] = 0.0;
  } else {
    j["kind"] = v.is_exact() ? "exact" : "float";
    if (v.is_exact()) {
      j["angle_num"] = v.angle().num();
      j["angle_den"] = v.angle().den();
    }
    auto c = v.value();
    j["re"] = c.real();
    j["im"] = c.imag();
  }
  return j;
}

json certificate_json(const rec::CounterexampleCertificate& c) {
  json j;
  j["type"] = "counterexample-certificate";
  j["quad"] = {c.quad.a, c.quad.b, c.quad.c, c.quad.d};
  j["case"] = rec::case_tag_name(c.tag);
  j["function"] = c.f_expr;
  j["eta"] = {{"dist_num", c.eta_dist.num}, {"dist_den", c.eta_dist.den}, {"chord", c.eta_chord}};
  j["n0"] = c.n0;
  j["slack"] = c.slack;
  if (c.t != 0) j["t"] = c.t;
  if (c.witness_prime) j["witness_prime"] = c.witness_prime;
  if (c.witness_u) j["witness_u"] = c.witness_u;
  return j;
}

rec::CounterexampleCertificate certificate_from_json(const json& j) {
  rec::CounterexampleCertificate c;
  auto quad = j.at("quad");
  c.quad = {quad.at(0).get<int64_t>(), quad.at(1).get<int64_t>(), quad.at(2).get<int64_t>(),
            quad.at(3).get<int64_t>()};
  std::string tag = j.at("case").get<std::string>();
  if (tag == "archimedean-a-neq-c")
    c.tag = rec::CaseTag::ArchimedeanANeqC;
  else if (tag == "odd-p-ell-zero")
    c.tag = rec::CaseTag::OddPrimeEllZero;
  else if (tag == "p2-ell-zero")
    c.tag = rec::CaseTag::TwoAdicEllZero;
  else if (tag == "ell-positive")
    c.tag = rec::CaseTag::EllPositive;
  else if (tag == "pair-shift-2")
    c.tag = rec::CaseTag::PairShiftTwo;
  else
    throw InvalidInput("unknown certificate case tag '" + tag + "'");
  c.f_expr = j.at("function").get<std::string>();
  c.f = grammar::parse_function(c.f_expr);
  c.eta_dist = Rat::make(j.at("eta").at("dist_num").get<int64_t>(),
                         j.at("eta").at("dist_den").get<int64_t>());
  c.eta_chord = j.at("eta").at("chord").get<double>();
  c.n0 = j.at("n0").get<uint64_t>();
  c.slack = j.at("slack").get<double>();
  if (j.contains("t")) c.t = j.at("t").get<double>();
  return c;
}

struct SchemaPrinter {
  bool requested = false;
  json schema;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out_stream, std::ostream& err) {
  CLI::App app{"multrec: multiplicative recurrence laboratory for sets {(an+b)/(cn+d)}"};
  app.require_subcommand(0, 1);
  app.set_config("--config");

  std::string out_path;
  app.add_option("--out", out_path, "write output to a file instead of stdout");
  uint64_t seed = 1;
  app.add_option("--seed", seed, "seed for randomized checks (fixed default keeps runs identical)");
  unsigned workers = 1;
  app.add_option("--workers", workers,
                 "worker cap; reductions are fixed-order so results do not depend on it")
      ->envname("MULTREC_WORKERS");

  // every leaf registers its action here
  std::function<void(std::ostream&)> action;

  auto add_schema_flag = [&](CLI::App* cmd, json schema) {
    auto printer = std::make_shared<SchemaPrinter>();
    printer->schema = std::move(schema);
    cmd->add_flag("--schema", printer->requested, "print the output schema and exit");
    return printer;
  };

  // ---- eval ----------------------------------------------------------------
  auto* c_eval = app.add_subcommand("eval", "evaluate a multiplicative function");
  std::string eval_f;
  uint64_t eval_n = 1, eval_to = 0;
  c_eval->add_option("--f", eval_f, "function expression")->required();
  c_eval->add_option("--n", eval_n, "first argument")->required();
  c_eval->add_option("--to", eval_to, "evaluate n..to (CSV rows)");
  auto eval_schema = add_schema_flag(
      c_eval, json{{"format", "csv"}, {"columns", {"n", "re", "im", "kind"}}});
  c_eval->callback([&, eval_schema] {
    action = [&, eval_schema](std::ostream& os) {
      if (eval_schema->requested) {
        os << eval_schema->schema.dump() << "\n";
        return;
      }
      auto f = grammar::parse_function(eval_f);
      uint64_t hi = eval_to ? eval_to : eval_n;
      check_range_budget(hi, "--to");
      os << "n,re,im,kind\n";
      for (uint64_t n = eval_n; n <= hi; ++n) {
        UnitValue v = f.eval(n);
        auto c = v.value();
        os << n << "," << fmt_double(c.real()) << "," << fmt_double(c.imag()) << ","
           << (v.is_zero() ? "zero" : v.is_exact() ? "exact" : "float") << "\n";
      }
    };
  });

  // ---- distance ------------------------------------------------------------
  auto* c_dist = app.add_subcommand("distance", "pretentious distance D(f,g;A,B)");
  std::string dist_f, dist_g;
  double dist_lo = 1, dist_hi = 1000;
  c_dist->add_option("--f", dist_f)->required();
  c_dist->add_option("--g", dist_g)->required();
  c_dist->add_option("--lower", dist_lo, "window lower bound A (primes p > A)");
  c_dist->add_option("--upper", dist_hi, "window upper bound B (primes p <= B)")->required();
  auto dist_schema = add_schema_flag(
      c_dist, json{{"format", "jsonl"}, {"fields", {"distance", "distance_sq", "lower", "upper"}}});
  c_dist->callback([&, dist_schema] {
    action = [&, dist_schema](std::ostream& os) {
      if (dist_schema->requested) {
        os << dist_schema->schema.dump() << "\n";
        return;
      }
      auto f = grammar::parse_function(dist_f);
      auto g = grammar::parse_function(dist_g);
      double d = pre::distance(f, g, {dist_lo, dist_hi});
      os << json{{"distance", d}, {"distance_sq", d * d}, {"lower", dist_lo}, {"upper", dist_hi}}
                .dump()
         << "\n";
    };
  });

  // ---- logavg ----------------------------------------------------------------
  auto* c_avg = app.add_subcommand("logavg", "logarithmic average E^log_{n<=X} f(n)");
  std::string avg_f, avg_prog;
  uint64_t avg_x = 1000;
  c_avg->add_option("--f", avg_f)->required();
  c_avg->add_option("--x", avg_x)->required();
  c_avg->add_option("--progression", avg_prog, "L,r evaluates f(Ln+r)");
  auto avg_schema = add_schema_flag(
      c_avg, json{{"format", "jsonl"}, {"fields", {"re", "im", "modulus", "x", "bound"}}});
  c_avg->callback([&, avg_schema] {
    action = [&, avg_schema](std::ostream& os) {
      if (avg_schema->requested) {
        os << avg_schema->schema.dump() << "\n";
        return;
      }
      check_range_budget(avg_x, "--x");
      auto f = grammar::parse_function(avg_f);
      std::optional<pre::Progression> prog;
      if (!avg_prog.empty()) {
        auto lr = parse_i64_list(avg_prog, 2);
        prog = pre::Progression{lr[0], lr[1]};
      }
      auto la = pre::log_average(f, avg_x, prog);
      os << json{{"re", la.value.real()},
                 {"im", la.value.imag()},
                 {"modulus", std::abs(la.value)},
                 {"x", la.X},
                 {"bound", la.harmonic_over_log}}
                .dump()
         << "\n";
    };
  });

  // ---- correlate -------------------------------------------------------------
  auto* c_corr = app.add_subcommand("correlate", "E^log_{n<=X} f(a1 n+b1) g(a2 n+b2)");
  std::string corr_f, corr_g, corr_abcd;
  uint64_t corr_x = 1000;
  c_corr->add_option("--f", corr_f)->required();
  c_corr->add_option("--g", corr_g)->required();
  c_corr->add_option("--abcd", corr_abcd, "a1,b1,a2,b2")->required();
  c_corr->add_option("--x", corr_x)->required();
  auto corr_schema =
      add_schema_flag(c_corr, json{{"format", "jsonl"}, {"fields", {"re", "im", "modulus"}}});
  c_corr->callback([&, corr_schema] {
    action = [&, corr_schema](std::ostream& os) {
      if (corr_schema->requested) {
        os << corr_schema->schema.dump() << "\n";
        return;
      }
      check_range_budget(corr_x, "--x");
      auto f = grammar::parse_function(corr_f);
      auto g = grammar::parse_function(corr_g);
      auto v = parse_i64_list(corr_abcd, 4);
      auto c = pre::correlation(f, g, v[0], v[1], v[2], v[3], corr_x);
      os << json{{"re", c.real()}, {"im", c.imag()}, {"modulus", std::abs(c)}}.dump() << "\n";
    };
  });

  // ---- profile ---------------------------------------------------------------
  auto* c_prof = app.add_subcommand("profile", "aperiodicity profile over characters and twists");
  std::string prof_f;
  double prof_b = 4;
  std::vector<uint64_t> prof_xs;
  uint64_t prof_grid = 200;
  double prof_span = 0;
  bool prof_norefine = false, prof_imprimitive = false;
  c_prof->add_option("--f", prof_f)->required();
  c_prof->add_option("--b", prof_b, "conductor bound B");
  c_prof->add_option("--x", prof_xs, "scale X (repeatable)")->required();
  c_prof->add_option("--grid-points", prof_grid, "number of t grid points");
  c_prof->add_option("--grid-span", prof_span, "grid spans [-S,S]; default min(B*X, 4e4)");
  c_prof->add_flag("--no-refine", prof_norefine, "skip golden-section refinement");
  c_prof->add_flag("--include-imprimitive", prof_imprimitive,
                   "also search imprimitive characters of modulus <= B");
  auto prof_schema = add_schema_flag(
      c_prof, json{{"format", "jsonl"},
                   {"fields",
                    {"x", "infimum", "refined_infimum", "refined_t", "argmin_conductor",
                     "grid_resolution", "per_character"}}});
  c_prof->callback([&, prof_schema] {
    action = [&, prof_schema](std::ostream& os) {
      if (prof_schema->requested) {
        os << prof_schema->schema.dump() << "\n";
        return;
      }
      auto f = grammar::parse_function(prof_f);
      for (uint64_t X : prof_xs) {
        check_range_budget(X, "--x");
        double span = prof_span > 0
                          ? prof_span
                          : std::min(prof_b * static_cast<double>(X), 4.0e4);
        std::vector<double> grid;
        for (uint64_t i = 0; i < prof_grid; ++i) {
          double u = prof_grid == 1 ? 0.5 : static_cast<double>(i) / (prof_grid - 1);
          grid.push_back(-span + 2 * span * u);
        }
        pre::ProfileOptions opts;
        opts.refine = !prof_norefine;
        opts.include_imprimitive = prof_imprimitive;
        auto prof = pre::aperiodicity_profile(f, prof_b, X, grid, opts);
        json per = json::array();
        for (const auto& e : prof.per_character)
          per.push_back(json{{"conductor", e.conductor},
                             {"modulus", e.modulus},
                             {"index", e.index},
                             {"best_t", e.best_t},
                             {"best_distance", e.best_distance}});
        os << json{{"x", X},
                   {"infimum", prof.infimum},
                   {"refined_infimum", prof.refined_infimum},
                   {"refined_t", prof.refined_t},
                   {"argmin_conductor", prof.argmin_conductor},
                   {"grid_resolution", prof.grid_resolution},
                   {"per_character", per}}
                  .dump()
           << "\n";
      }
    };
  });

  // ---- primesum ----------------------------------------------------------------
  auto* c_ps = app.add_subcommand("primesum", "sum_{Y<=p<=X} chi(p) p^{-1-ia}");
  uint64_t ps_q = 4, ps_y = 2, ps_x = 1000;
  std::string ps_index = "1";
  double ps_a = 0;
  c_ps->add_option("--q", ps_q, "character modulus")->required();
  c_ps->add_option("--index", ps_index, "character index tuple");
  c_ps->add_option("--a", ps_a, "twist exponent a");
  c_ps->add_option("--y", ps_y);
  c_ps->add_option("--x", ps_x)->required();
  auto ps_schema =
      add_schema_flag(c_ps, json{{"format", "jsonl"}, {"fields", {"re", "im", "modulus"}}});
  c_ps->callback([&, ps_schema] {
    action = [&, ps_schema](std::ostream& os) {
      if (ps_schema->requested) {
        os << ps_schema->schema.dump() << "\n";
        return;
      }
      check_range_budget(ps_x, "--x");
      auto chi = mf::dirichlet_character(ps_q, parse_u64_list(ps_index));
      auto v = pre::prime_character_sum(chi, ps_a, ps_y, ps_x);
      os << json{{"re", v.real()}, {"im", v.imag()}, {"modulus", std::abs(v)}}.dump() << "\n";
    };
  });

  // ---- folner ----------------------------------------------------------------
  auto* c_fol = app.add_subcommand("folner", "multiplicative Folner sets and the Q-trick");
  c_fol->require_subcommand(1);
  std::string fol_primes = "2,3", fol_window = "2,4", fol_f, fol_g, fol_abcd;
  uint64_t fol_p = 2, fol_x = 1000, fol_maxcond = 45;
  uint32_t fol_mu = 1, fol_nu = 1;
  auto folner_params = [&]() {
    fol::FolnerParams params;
    params.primes = parse_u64_list(fol_primes);
    auto w = parse_u64_list(fol_window);
    if (w.size() != 2) throw InvalidInput("--window expects lo,hi");
    params.lo = static_cast<uint32_t>(w[0]);
    params.hi = static_cast<uint32_t>(w[1]);
    return params;
  };
  for (CLI::App* sub : {c_fol->add_subcommand("gen", "enumerate the Folner set"),
                        c_fol->add_subcommand("ratio", "|Phi cap Phi/p| / |Phi|"),
                        c_fol->add_subcommand("avg", "E_{Q in Phi} f(Q) with the shift bound"),
                        c_fol->add_subcommand("decompose", "Q = AW, r_Q, l_Q, m_Q per element"),
                        c_fol->add_subcommand("verify", "exact Q-trick certificates per element"),
                        c_fol->add_subcommand("claims", "character-shift identities"),
                        c_fol->add_subcommand("corr", "Folner-averaged correlation")}) {
    sub->add_option("--primes", fol_primes, "comma-separated prime set");
    sub->add_option("--window", fol_window, "exponent window lo,hi meaning (lo,hi]");
  }
  auto* c_fgen = c_fol->get_subcommand("gen");
  auto fgen_schema = add_schema_flag(
      c_fgen, json{{"format", "csv"}, {"columns", {"idx", "exponents", "value"}}});
  c_fgen->callback([&, fgen_schema] {
    action = [&, fgen_schema](std::ostream& os) {
      if (fgen_schema->requested) {
        os << fgen_schema->schema.dump() << "\n";
        return;
      }
      auto set = fol::folner_set(folner_params());
      os << "idx,exponents,value\n";
      for (size_t i = 0; i < set.size(); ++i) {
        os << i << ",";
        for (size_t j = 0; j < set[i].exponents.size(); ++j)
          os << (j ? "|" : "") << set[i].exponents[j];
        os << "," << set[i].value.str() << "\n";
      }
    };
  });

  auto* c_frat = c_fol->get_subcommand("ratio");
  c_frat->add_option("--p", fol_p, "prime to shift by")->required();
  auto frat_schema = add_schema_flag(
      c_frat, json{{"format", "jsonl"}, {"fields", {"num", "den", "value"}}});
  c_frat->callback([&, frat_schema] {
    action = [&, frat_schema](std::ostream& os) {
      if (frat_schema->requested) {
        os << frat_schema->schema.dump() << "\n";
        return;
      }
      auto [num, den] = fol::folner_ratio(folner_params(), fol_p);
      os << json{{"num", num},
                 {"den", den},
                 {"value", static_cast<double>(num) / static_cast<double>(den)}}
                .dump()
         << "\n";
    };
  });

  auto* c_favg = c_fol->get_subcommand("avg");
  c_favg->add_option("--f", fol_f)->required();
  auto favg_schema = add_schema_flag(
      c_favg,
      json{{"format", "jsonl"}, {"fields", {"re", "im", "rows", "all_within_bound"}}});
  c_favg->callback([&, favg_schema] {
    action = [&, favg_schema](std::ostream& os) {
      if (favg_schema->requested) {
        os << favg_schema->schema.dump() << "\n";
        return;
      }
      auto f = grammar::parse_function(fol_f);
      auto avg = fol::multiplicative_average(f, folner_params());
      json rows = json::array();
      for (const auto& r : avg.rows)
        rows.push_back(json{{"p", r.prime}, {"lhs", r.lhs}, {"bound", r.bound}});
      os << json{{"re", avg.average.real()},
                 {"im", avg.average.imag()},
                 {"rows", rows},
                 {"all_within_bound", avg.all_within_bound}}
                .dump()
         << "\n";
    };
  });

  auto* c_fdec = c_fol->get_subcommand("decompose");
  c_fdec->add_option("--abcd", fol_abcd, "a1,b1,a2,b2")->required();
  c_fdec->add_option("--mu", fol_mu);
  c_fdec->add_option("--nu", fol_nu);
  auto fdec_schema = add_schema_flag(
      c_fdec,
      json{{"format", "csv"}, {"columns", {"Q", "A", "W", "u", "r_Q", "l_Q", "m_Q"}}});
  c_fdec->callback([&, fdec_schema] {
    action = [&, fdec_schema](std::ostream& os) {
      if (fdec_schema->requested) {
        os << fdec_schema->schema.dump() << "\n";
        return;
      }
      auto v = parse_i64_list(fol_abcd, 4);
      auto params = folner_params();
      os << "Q,A,W,u,r_Q,l_Q,m_Q\n";
      for (const auto& Q : fol::folner_set(params)) {
        auto dec = fol::q_decompose(params, Q, v[0], v[1], v[2], v[3], fol_mu, fol_nu);
        os << dec.Q.value.str() << "," << dec.A.str() << "," << dec.W.str() << "," << dec.u << ","
           << dec.r_Q.str() << "," << dec.l_Q.str() << "," << dec.m_Q.str() << "\n";
      }
    };
  });

  auto* c_fver = c_fol->get_subcommand("verify");
  c_fver->add_option("--abcd", fol_abcd, "a1,b1,a2,b2")->required();
  c_fver->add_option("--mu", fol_mu);
  c_fver->add_option("--nu", fol_nu);
  auto fver_schema = add_schema_flag(
      c_fver, json{{"format", "jsonl"}, {"fields", {"Q", "ok", "checks"}}});
  c_fver->callback([&, fver_schema] {
    action = [&, fver_schema](std::ostream& os) {
      if (fver_schema->requested) {
        os << fver_schema->schema.dump() << "\n";
        return;
      }
      auto v = parse_i64_list(fol_abcd, 4);
      auto params = folner_params();
      bool all = true;
      for (const auto& Q : fol::folner_set(params)) {
        auto dec = fol::q_decompose(params, Q, v[0], v[1], v[2], v[3], fol_mu, fol_nu);
        auto rep = fol::verify_qtrick(dec);
        all = all && rep.ok;
        json checks = json::array();
        for (const auto& c : rep.checks)
          checks.push_back(json{{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
        os << json{{"Q", dec.Q.value.str()}, {"ok", rep.ok}, {"checks", checks}}.dump() << "\n";
      }
      if (!all) throw CertificateFailure("a q-trick identity failed; see the report rows");
    };
  });

  auto* c_fcla = c_fol->get_subcommand("claims");
  c_fcla->add_option("--abcd", fol_abcd, "a1,b1,a2,b2")->required();
  c_fcla->add_option("--mu", fol_mu);
  c_fcla->add_option("--nu", fol_nu);
  c_fcla->add_option("--max-conductor", fol_maxcond);
  auto fcla_schema = add_schema_flag(
      c_fcla, json{{"format", "jsonl"},
                   {"fields", {"Q", "p", "conductor", "index", "admissible", "all_hold",
                               "identities", "note"}}});
  c_fcla->callback([&, fcla_schema] {
    action = [&, fcla_schema](std::ostream& os) {
      if (fcla_schema->requested) {
        os << fcla_schema->schema.dump() << "\n";
        return;
      }
      auto v = parse_i64_list(fol_abcd, 4);
      auto params = folner_params();
      auto set = fol::folner_set(params);
      bool admissible_all_hold = true;
      for (const auto& Q : set) {
        auto dec = fol::q_decompose(params, Q, v[0], v[1], v[2], v[3], fol_mu, fol_nu);
        for (size_t pi = 0; pi < params.primes.size(); ++pi) {
          uint64_t p = params.primes[pi];
          if (v[0] % static_cast<int64_t>(p) == 0) continue;
          if (Q.exponents[pi] + 1 > params.hi) continue;  // Qp leaves the set
          fol::FolnerElement Qp = Q;
          Qp.exponents[pi] += 1;
          Qp.value = Q.value * p;
          auto decp = fol::q_decompose(params, Qp, v[0], v[1], v[2], v[3], fol_mu, fol_nu);
          for (uint64_t q = 1; q <= fol_maxcond; ++q) {
            for (const auto& chi : mf::characters_mod(q)) {
              if (!chi.is_primitive()) continue;
              auto [c1, c2] = fol::split_character(chi, v[0]);
              auto rep = fol::verify_character_shift(dec, decp, p, c1, c2, c1, c2);
              if (rep.admissible && !rep.all_hold) admissible_all_hold = false;
              json ids = json::array();
              for (const auto& id : rep.identities)
                ids.push_back(json{{"name", id.name}, {"holds", id.holds}});
              os << json{{"Q", dec.Q.value.str()},
                         {"p", p},
                         {"conductor", chi.conductor()},
                         {"index", chi.index()},
                         {"admissible", rep.admissible},
                         {"all_hold", rep.all_hold},
                         {"identities", ids},
                         {"note", rep.admissibility_note}}
                        .dump()
                 << "\n";
            }
          }
        }
      }
      if (!admissible_all_hold)
        throw CertificateFailure("a character-shift identity failed on an admissible tuple");
    };
  });

  auto* c_fcor = c_fol->get_subcommand("corr");
  c_fcor->add_option("--f", fol_f)->required();
  c_fcor->add_option("--g", fol_g)->required();
  c_fcor->add_option("--abcd", fol_abcd, "a1,b1,a2,b2")->required();
  c_fcor->add_option("--mu", fol_mu);
  c_fcor->add_option("--nu", fol_nu);
  c_fcor->add_option("--x", fol_x)->required();
  auto fcor_schema = add_schema_flag(
      c_fcor,
      json{{"format", "jsonl"}, {"fields", {"re", "im", "modulus", "swapped", "per_q"}}});
  c_fcor->callback([&, fcor_schema] {
    action = [&, fcor_schema](std::ostream& os) {
      if (fcor_schema->requested) {
        os << fcor_schema->schema.dump() << "\n";
        return;
      }
      check_range_budget(fol_x, "--x");
      auto f = grammar::parse_function(fol_f);
      auto g = grammar::parse_function(fol_g);
      auto v = parse_i64_list(fol_abcd, 4);
      auto res = fol::averaged_correlation(f, g, v[0], v[1], v[2], v[3], folner_params(),
                                           fol_mu, fol_nu, fol_x);
      json perq = json::array();
      for (const auto& r : res.per_q)
        perq.push_back(json{{"Q", r.Q.str()}, {"re", r.inner.real()}, {"im", r.inner.imag()}});
      os << json{{"re", res.value.real()},
                 {"im", res.value.imag()},
                 {"modulus", std::abs(res.value)},
                 {"swapped", res.swapped},
                 {"per_q", perq}}
                .dump()
         << "\n";
    };
  });

  // ---- recur -----------------------------------------------------------------
  auto* c_rec = app.add_subcommand("recur", "the recurrence criterion, scans and certificates");
  c_rec->require_subcommand(1);
  std::string rec_quad, rec_f, rec_g, rec_abd, rec_cert, rec_th1 = "1/3", rec_th2 = "1/5";
  uint64_t rec_n = 10000, rec_x = 10000, rec_r = 100, rec_shift = 2;
  double rec_eps = 0.25;

  auto* c_rcrit = c_rec->add_subcommand("criterion", "a=c, and b=d or a|bd");
  c_rcrit->add_option("--quad", rec_quad, "a,b,c,d")->required();
  auto rcrit_schema = add_schema_flag(
      c_rcrit, json{{"format", "jsonl"}, {"fields", {"criterion", "normalized"}}});
  c_rcrit->callback([&, rcrit_schema] {
    action = [&, rcrit_schema](std::ostream& os) {
      if (rcrit_schema->requested) {
        os << rcrit_schema->schema.dump() << "\n";
        return;
      }
      auto v = parse_i64_list(rec_quad, 4);
      auto res = rec::criterion({v[0], v[1], v[2], v[3]});
      os << json{{"criterion", res.holds},
                 {"normalized",
                  {res.normalized.a, res.normalized.b, res.normalized.c, res.normalized.d}}}
                .dump()
         << "\n";
    };
  });

  auto* c_rscan = c_rec->add_subcommand("scan", "running minima of |f(an+b)-f(cn+d)|");
  c_rscan->add_option("--f", rec_f)->required();
  c_rscan->add_option("--quad", rec_quad, "a,b,c,d")->required();
  c_rscan->add_option("--n", rec_n)->required();
  auto rscan_schema = add_schema_flag(
      c_rscan,
      json{{"format", "csv"}, {"columns", {"n", "chord", "dist_num", "dist_den"}},
           {"note", "rows are strictly decreasing running minima; zero samples are excluded"}});
  c_rscan->callback([&, rscan_schema] {
    action = [&, rscan_schema](std::ostream& os) {
      if (rscan_schema->requested) {
        os << rscan_schema->schema.dump() << "\n";
        return;
      }
      check_range_budget(rec_n, "--n");
      auto f = grammar::parse_function(rec_f);
      auto v = parse_i64_list(rec_quad, 4);
      auto trace = rec::liminf_scan(f, {v[0], v[1], v[2], v[3]}, rec_n);
      os << "n,chord,dist_num,dist_den\n";
      for (const auto& r : trace.records)
        os << r.n << "," << fmt_double(r.chord) << "," << r.dist_num << "," << r.dist_den << "\n";
      os << "# flagged_zeros=" << trace.flagged_zeros << " scanned=" << trace.scanned
         << " exact=" << (trace.exact ? 1 : 0) << "\n";
    };
  });

  auto* c_rden = c_rec->add_subcommand("density", "log density estimate of A(f,eps)");
  c_rden->add_option("--f", rec_f)->required();
  c_rden->add_option("--eps", rec_eps)->required();
  c_rden->add_option("--abd", rec_abd, "a,b,d")->required();
  c_rden->add_option("--x", rec_x)->required();
  auto rden_schema = add_schema_flag(
      c_rden, json{{"format", "jsonl"},
                   {"fields", {"eps", "upper", "lower", "final", "hits", "x"}}});
  c_rden->callback([&, rden_schema] {
    action = [&, rden_schema](std::ostream& os) {
      if (rden_schema->requested) {
        os << rden_schema->schema.dump() << "\n";
        return;
      }
      check_range_budget(rec_x, "--x");
      auto f = grammar::parse_function(rec_f);
      auto v = parse_i64_list(rec_abd, 3);
      auto d = rec::density_estimate(f, rec_eps, v[0], v[1], v[2], rec_x);
      os << json{{"eps", d.eps},   {"upper", d.upper}, {"lower", d.lower},
                 {"final", d.final_value}, {"hits", d.hits},   {"x", d.X}}
                .dump()
         << "\n";
    };
  });

  auto* c_rcex = c_rec->add_subcommand("counterexample", "build a certified counterexample");
  c_rcex->add_option("--quad", rec_quad, "a,b,c,d")->required();
  auto rcex_schema = add_schema_flag(
      c_rcex, json{{"format", "jsonl"},
                   {"fields", {"type", "quad", "case", "function", "eta", "n0", "slack"}}});
  c_rcex->callback([&, rcex_schema] {
    action = [&, rcex_schema](std::ostream& os) {
      if (rcex_schema->requested) {
        os << rcex_schema->schema.dump() << "\n";
        return;
      }
      auto v = parse_i64_list(rec_quad, 4);
      auto cert = rec::build_counterexample({v[0], v[1], v[2], v[3]});
      os << certificate_json(cert).dump() << "\n";
    };
  });

  auto* c_rver = c_rec->add_subcommand("verify", "verify a certificate up to N");
  c_rver->add_option("--quad", rec_quad, "a,b,c,d (build then verify)");
  c_rver->add_option("--cert", rec_cert, "certificate record file (first line)");
  c_rver->add_option("--n", rec_n)->required();
  auto rver_schema = add_schema_flag(
      c_rver, json{{"format", "jsonl"},
                   {"fields", {"ok", "witness_n", "min_seen", "threshold", "certificate"}}});
  c_rver->callback([&, rver_schema] {
    action = [&, rver_schema](std::ostream& os) {
      if (rver_schema->requested) {
        os << rver_schema->schema.dump() << "\n";
        return;
      }
      check_range_budget(rec_n, "--n");
      rec::CounterexampleCertificate cert;
      if (!rec_cert.empty()) {
        std::ifstream in(rec_cert);
        if (!in) throw InvalidInput("cannot open certificate file " + rec_cert);
        std::string line;
        std::getline(in, line);
        cert = certificate_from_json(json::parse(line));
      } else if (!rec_quad.empty()) {
        auto v = parse_i64_list(rec_quad, 4);
        cert = rec::build_counterexample({v[0], v[1], v[2], v[3]});
      } else {
        throw InvalidInput("recur verify needs --quad or --cert");
      }
      auto res = rec::verify_certificate(cert, rec_n);
      os << json{{"ok", res.ok},
                 {"witness_n", res.witness_n},
                 {"min_seen", res.min_seen},
                 {"threshold", res.threshold},
                 {"certificate", certificate_json(cert)}}
                .dump()
         << "\n";
      if (!res.ok)
        throw CertificateFailure("certificate violated at n = " + std::to_string(res.witness_n));
    };
  });

  auto* c_rfej = c_rec->add_subcommand("fejer", "tent Fejer approximation");
  c_rfej->add_option("--eps", rec_eps)->required();
  c_rfej->add_option("--r", rec_r)->required();
  auto rfej_schema = add_schema_flag(
      c_rfej, json{{"format", "jsonl"},
                   {"fields", {"eps", "r", "c0", "c1", "minimal_r", "sup_error", "r_sufficient"}}});
  c_rfej->callback([&, rfej_schema] {
    action = [&, rfej_schema](std::ostream& os) {
      if (rfej_schema->requested) {
        os << rfej_schema->schema.dump() << "\n";
        return;
      }
      auto fa = rec::fejer(rec_eps, static_cast<uint32_t>(rec_r));
      os << json{{"eps", fa.eps},
                 {"r", fa.R},
                 {"c0", fa.coeff[0]},
                 {"c1", fa.R > 1 ? fa.coeff[1] : 0.0},
                 {"minimal_r", fa.minimal_R},
                 {"sup_error", fa.sup_error},
                 {"r_sufficient", fa.r_sufficient}}
                .dump()
         << "\n";
    };
  });

  auto* c_rpair = c_rec->add_subcommand("pair", "the shift-2 pair counterexample");
  c_rpair->add_option("--theta1", rec_th1, "rational angle a/b");
  c_rpair->add_option("--theta2", rec_th2, "rational angle a/b");
  c_rpair->add_option("--shift", rec_shift, "scan |f(n+shift)-g(n)|");
  c_rpair->add_option("--n", rec_n);
  auto rpair_schema = add_schema_flag(
      c_rpair, json{{"format", "jsonl"},
                    {"fields", {"f", "g", "eta_chord", "eta_dist_num", "eta_dist_den", "shift",
                                "scan_min", "scan_argmin"}}});
  c_rpair->callback([&, rpair_schema] {
    action = [&, rpair_schema](std::ostream& os) {
      if (rpair_schema->requested) {
        os << rpair_schema->schema.dump() << "\n";
        return;
      }
      check_range_budget(rec_n, "--n");
      auto pc = rec::build_pair_counterexample(parse_angle(rec_th1), parse_angle(rec_th2));
      auto trace = rec::difference_scan(pc.f, 1, static_cast<int64_t>(rec_shift), pc.g, 1, 0, 1,
                                        rec_n);
      os << json{{"f", pc.f_expr},
                 {"g", pc.g_expr},
                 {"eta_chord", pc.eta_chord},
                 {"eta_dist_num", pc.eta_dist.num},
                 {"eta_dist_den", pc.eta_dist.den},
                 {"shift", rec_shift},
                 {"scan_min", trace.final_min()},
                 {"scan_argmin", trace.records.empty() ? 0 : trace.records.back().n}}
                .dump()
         << "\n";
    };
  });

  // ---- sys -------------------------------------------------------------------
  auto* c_sys = app.add_subcommand("sys", "multiplicative rotation systems");
  c_sys->require_subcommand(1);
  std::vector<std::string> sys_fs;
  std::vector<std::string> sys_arcs;
  std::string sys_quad;
  uint64_t sys_p = 2, sys_q2 = 3, sys_n = 10000, sys_trials = 10000;

  auto add_sys_common = [&](CLI::App* sub) {
    sub->add_option("--f", sys_fs, "coordinate function (repeatable)")->required();
  };

  auto build_system = [&]() {
    std::vector<mf::MultFunction> fs;
    for (const auto& s : sys_fs) fs.push_back(grammar::parse_function(s));
    return sys::RotationSystem::from_functions(fs);
  };
  auto build_arcs = [&](size_t dim) {
    std::vector<sys::ArcSet> arcs;
    for (const auto& s : sys_arcs) arcs.push_back(parse_arcset(s));
    if (arcs.size() == 1 && dim > 1) arcs.resize(dim, arcs[0]);
    if (arcs.size() != dim)
      throw InvalidInput("need one --arc per coordinate (or a single one to broadcast)");
    return arcs;
  };

  auto* c_sbuild = c_sys->add_subcommand("build", "construct and describe a system");
  add_sys_common(c_sbuild);
  auto sbuild_schema = add_schema_flag(
      c_sbuild, json{{"format", "jsonl"}, {"fields", {"dimension", "exact", "in_m"}}});
  c_sbuild->callback([&, sbuild_schema] {
    action = [&, sbuild_schema](std::ostream& os) {
      if (sbuild_schema->requested) {
        os << sbuild_schema->schema.dump() << "\n";
        return;
      }
      auto system = build_system();
      json exact = json::array();
      for (const auto& c : system.coords) exact.push_back(c.exact);
      os << json{{"dimension", system.dimension()}, {"exact", exact}, {"in_m", true}}.dump()
         << "\n";
    };
  });

  auto* c_smeas = c_sys->add_subcommand("measure", "mu(T_p^-1 A cap T_q^-1 A)");
  add_sys_common(c_smeas);
  c_smeas->add_option("--arc", sys_arcs, "start:length[;...] per coordinate")->required();
  c_smeas->add_option("--p", sys_p)->required();
  c_smeas->add_option("--q", sys_q2)->required();
  auto smeas_schema = add_schema_flag(
      c_smeas, json{{"format", "jsonl"}, {"fields", {"measure", "exact", "num", "den"}}});
  c_smeas->callback([&, smeas_schema] {
    action = [&, smeas_schema](std::ostream& os) {
      if (smeas_schema->requested) {
        os << smeas_schema->schema.dump() << "\n";
        return;
      }
      auto system = build_system();
      auto arcs = build_arcs(system.dimension());
      auto m = sys::recurrence_measure(system, sys_p, sys_q2, arcs);
      os << json{{"measure", m.exact ? m.value_exact.value() : m.value},
                 {"exact", m.exact},
                 {"num", m.exact ? m.value_exact.num : 0},
                 {"den", m.exact ? m.value_exact.den : 0}}
                .dump()
         << "\n";
    };
  });

  auto* c_sscan = c_sys->add_subcommand("scan", "events mu(T_{p_n}^-1 A cap T_{q_n}^-1 A) > 0");
  add_sys_common(c_sscan);
  c_sscan->add_option("--arc", sys_arcs)->required();
  c_sscan->add_option("--quad", sys_quad, "a,b,c,d giving p_n = an+b, q_n = cn+d")->required();
  c_sscan->add_option("--n", sys_n)->required();
  auto sscan_schema = add_schema_flag(
      c_sscan, json{{"format", "csv"}, {"columns", {"n", "p_n", "q_n", "measure"}},
                    {"trailer", "# count= first= largest_gap= bridge_ok="}});
  c_sscan->callback([&, sscan_schema] {
    action = [&, sscan_schema](std::ostream& os) {
      if (sscan_schema->requested) {
        os << sscan_schema->schema.dump() << "\n";
        return;
      }
      check_range_budget(sys_n, "--n");
      auto system = build_system();
      auto arcs = build_arcs(system.dimension());
      auto v = parse_i64_list(sys_quad, 4);
      auto res = sys::scan_recurrence(system, {v[0], v[1], v[2], v[3]}, arcs, sys_n);
      os << "n,p_n,q_n,measure\n";
      for (const auto& e : res.events)
        os << e.n << "," << e.p_n << "," << e.q_n << "," << fmt_double(e.measure) << "\n";
      os << "# count=" << res.count << " first=" << res.first_event
         << " largest_gap=" << res.largest_gap << " bridge_ok=" << (res.bridge_ok ? 1 : 0)
         << "\n";
    };
  });

  auto* c_sax = c_sys->add_subcommand("axioms", "composition law and measure preservation");
  add_sys_common(c_sax);
  c_sax->add_option("--trials", sys_trials);
  auto sax_schema = add_schema_flag(
      c_sax, json{{"format", "jsonl"},
                  {"fields", {"ok", "trials", "failure", "arc_denominator_bound"}}});
  c_sax->callback([&, sax_schema] {
    action = [&, sax_schema](std::ostream& os) {
      if (sax_schema->requested) {
        os << sax_schema->schema.dump() << "\n";
        return;
      }
      auto system = build_system();
      auto rep = sys::action_axioms_check(system, sys_trials, seed);
      os << json{{"ok", rep.ok},
                 {"trials", rep.trials},
                 {"failure", rep.failure},
                 {"arc_denominator_bound", rep.arc_denominator_bound}}
                .dump()
         << "\n";
      if (!rep.ok) throw CertificateFailure(rep.failure);
    };
  });

  // ---- dispatch ----------------------------------------------------------------
  std::vector<std::string> argv(args);
  std::reverse(argv.begin(), argv.end());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help and friends
      out_stream << app.help();
      return 0;
    }
    err << json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  if (!action) {
    out_stream << app.help();
    return 0;
  }
  try {
    Out out(out_path, out_stream);
    action(out.os());
    return 0;
  } catch (const CertificateFailure& e) {
    err << json{{"error", "certificate-failure"}, {"message", e.what()}}.dump() << "\n";
    return 4;
  } catch (const PreconditionError& e) {
    err << json{{"error", "precondition"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  } catch (const NoSolution& e) {
    err << json{{"error", "no-solution"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  } catch (const RangeError& e) {
    err << json{{"error", "range"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  } catch (const InvalidInput& e) {
    err << json{{"error", "invalid-input"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
    return 3;
  }
}

}  // namespace multrec::cli
