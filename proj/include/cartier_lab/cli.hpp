#pragma once

// Batch frontend: one subcommand per operation, JSON report on stdout,
// one-line summary on stderr.
//
// Exit codes: 0 ok, 2 validation, 3 NON_STABILIZED, 4 invariant violation
// (a reproduction bundle is written next to the report).

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cartier_lab.hpp"

namespace cartier_lab::cli {

struct Options {
  std::vector<std::string> inputs;
  std::string g;
  std::string seq;
  std::string seq_to;
  std::string elem;
  std::size_t power = 1;
  std::size_t max_iter = 0;
  std::size_t max_m = 4;
  std::uint32_t truncate = 4;
  int max_deg = -1;
  std::uint64_t seed = 1;
  std::size_t trials = 32;
  bool no_timings = false;
  bool inject_fault = false;
  std::string repro_dir = ".";
};

struct Report {
  Json result = Json::object();
  Json certificates = Json::object();
  std::string summary;
};

struct Context {
  const Options& opt;
  std::vector<Json> docs;
  StabilizationLimits limits;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::kValidation, "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  return out;
}

inline std::string hex64(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

inline Json element_strings(const CartierModule& m, const std::vector<Vec>& gens) {
  Json out = Json::array();
  for (const auto& v : gens) out.push_back(m.element_string(v));
  return out;
}

inline Json morphism_json(const CartierMorphism& phi) {
  Json out = Json::array();
  for (const auto& v : phi.images()) out.push_back(to_json(v));
  return out;
}

inline CartierModule cartier_doc(const Context& c, std::size_t i = 0) {
  require(c.docs.size() > i, ErrorCode::kValidation, "missing input document");
  require(c.docs[i].contains("kappa"), ErrorCode::kValidation, "input " + std::to_string(i + 1) + " is not a Cartier module");
  return cartier_from_json(c.docs[i]);
}

inline GammaSheaf gamma_doc(const Context& c, std::size_t i = 0) {
  require(c.docs.size() > i, ErrorCode::kValidation, "missing input document");
  require(c.docs[i].contains("gamma"), ErrorCode::kValidation, "input " + std::to_string(i + 1) + " is not a gamma-sheaf");
  return gamma_from_json(c.docs[i]);
}

inline Polynomial g_param(const Context& c, const RingPtr& ring) {
  require(!c.opt.g.empty(), ErrorCode::kValidation, "--g is required");
  return parse_polynomial(ring, c.opt.g);
}

inline std::vector<Polynomial> poly_list(const RingPtr& ring, const std::string& s, const char* flag) {
  require(!s.empty(), ErrorCode::kValidation, std::string(flag) + " is required");
  std::vector<Polynomial> out;
  for (const auto& t : split_commas(s)) out.push_back(parse_polynomial(ring, t));
  return out;
}

/// Randomized spot check of kappa(f^p m) = f kappa(m).
inline Json semilinearity_check(const CartierModule& m, std::uint64_t seed, std::size_t trials) {
  std::mt19937_64 rng(seed);
  const auto& ring = m.ring();
  auto rand_poly = [&] {
    Polynomial f(ring);
    for (int t = 0; t < 3; ++t) {
      Exponents e{};
      for (std::size_t i = 0; i < ring->nvars(); ++i) e[i] = static_cast<std::uint32_t>(rng() % 3);
      f.add_term(e, ring->f().random(rng));
    }
    return f;
  };
  std::size_t failures = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    Polynomial f = rand_poly();
    Vec v;
    for (std::size_t i = 0; i < m.rank(); ++i) v.push_back(rand_poly());
    if (!m.equal_elems(m.apply_kappa(scaled(v, f.frobenius())), scaled(m.apply_kappa(v), f))) ++failures;
  }
  require(failures == 0, ErrorCode::kInvariantViolation, "kappa fails semilinearity on a random element");
  return {{"seed", seed}, {"trials", trials}, {"failures", failures}};
}

using Handler = std::function<Report(const Context&)>;

inline std::map<std::string, Handler> handlers() {
  std::map<std::string, Handler> h;

  h["validate"] = [](const Context& c) {
    Report r;
    require(!c.docs.empty(), ErrorCode::kValidation, "missing input document");
    if (c.docs[0].contains("kappa")) {
      auto m = cartier_doc(c);
      r.result = {{"kind", "cartier"}, {"rank", m.rank()}, {"nvars", m.ring()->nvars()}, {"well_defined", m.well_defined()},
                  {"canonical", to_json(m)}};
      r.certificates["semilinearity"] = semilinearity_check(m, c.opt.seed, c.opt.trials);
    } else {
      auto n = gamma_doc(c);
      r.result = {{"kind", "gamma"}, {"rank", n.rank()}, {"nvars", n.ring()->nvars()}, {"canonical", to_json(n)}};
    }
    r.summary = "valid " + r.result["kind"].get<std::string>() + " of rank " + std::to_string(r.result["rank"].get<std::size_t>());
    return r;
  };

  h["kappa-apply"] = [](const Context& c) {
    auto m = cartier_doc(c);
    require(!c.opt.elem.empty(), ErrorCode::kValidation, "--elem is required");
    auto parts = poly_list(m.ring(), c.opt.elem, "--elem");
    require(parts.size() == m.rank(), ErrorCode::kValidation, "--elem needs one polynomial per generator");
    Vec v = m.reduce(parts);
    Vec w = m.kappa_power(c.opt.power, v);
    Report r;
    r.result = {{"element", m.element_string(v)}, {"power", c.opt.power}, {"image", m.element_string(w)},
                {"coordinates", to_json(w)}};
    r.certificates["semilinearity"] = semilinearity_check(m, c.opt.seed, c.opt.trials);
    r.summary = "kappa^" + std::to_string(c.opt.power) + "(" + m.element_string(v) + ") = " + m.element_string(w);
    return r;
  };

  h["nilpotency"] = [](const Context& c) {
    auto m = cartier_doc(c);
    auto chain = image_chain(m, c.limits);
    require_stabilized(chain.status, "image chain did not stabilize");
    auto n = is_nilpotent(m, c.limits);
    Report r;
    r.result = {{"nilpotent", n.nilpotent}, {"order", n.order ? Json(*n.order) : Json(nullptr)}};
    Json dims = Json::array();
    for (const auto& s : chain.chain) dims.push_back(element_strings(m, nonzero_generators(m, s)));
    r.certificates["image_chain"] = dims;
    r.summary = n.nilpotent ? "nilpotent of order " + std::to_string(*n.order) : "not nilpotent";
    return r;
  };

  h["stable-image"] = [](const Context& c) {
    auto m = cartier_doc(c);
    auto s = stable_image(m, c.limits);
    auto gens = nonzero_generators(m, s.sigma);
    Report r;
    r.result = {{"generators", element_strings(m, gens)}, {"chain_length", s.chain_length},
                {"module", to_json(submodule_module(m, s.sigma))}};
    r.certificates["kappa_stable"] = is_kappa_stable(m, s.sigma);
    r.certificates["surjective_on_image"] = kappa_image(m, s.sigma) == s.sigma;
    r.summary = "stable image on " + std::to_string(gens.size()) + " generators after " + std::to_string(s.chain_length) + " steps";
    return r;
  };

  h["hom"] = [](const Context& c) {
    auto m = cartier_doc(c, 0);
    auto n = cartier_doc(c, 1);
    auto h = hom_cartier(m, n, c.opt.max_deg >= 0 ? std::optional<int>(c.opt.max_deg) : std::nullopt);
    Report r;
    Json basis = Json::array();
    for (const auto& phi : h.basis) basis.push_back(morphism_json(phi));
    r.result = {{"dimension", h.basis.size()}, {"basis", basis}, {"partial", h.partial}};
    r.certificates["degree_cap"] = h.degree_cap;
    r.summary = "Hom has F_p-dimension " + std::string(h.partial ? ">= " : "") + std::to_string(h.basis.size());
    return r;
  };

  h["to-gamma"] = [](const Context& c) {
    auto m = cartier_doc(c);
    auto n = cartier_to_gamma(m);
    Report r;
    r.result = to_json(n);
    r.certificates["round_trip"] = same_cartier(gamma_to_cartier(n), m);
    r.summary = "gamma-sheaf of rank " + std::to_string(n.rank());
    return r;
  };

  h["from-gamma"] = [](const Context& c) {
    auto n = gamma_doc(c);
    auto m = gamma_to_cartier(n);
    Report r;
    r.result = to_json(m);
    r.certificates["round_trip"] = same_gamma(cartier_to_gamma(m), n);
    r.summary = "Cartier module of rank " + std::to_string(m.rank());
    return r;
  };

  h["unit-root"] = [](const Context& c) {
    auto n = c.docs.at(0).contains("kappa") ? cartier_to_gamma(cartier_doc(c)) : gamma_doc(c);
    auto u = unit_root_stabilize(n, c.limits);
    auto defect = gamma_unit_defect(n);
    Report r;
    r.result = {{"root", to_json(u.root)}, {"injective", u.injective}, {"steps", u.steps}};
    r.certificates["defect"] = {{"kernel_order", defect.kernel.order ? Json(*defect.kernel.order) : Json(nullptr)},
                                {"cokernel_order", defect.cokernel.order ? Json(*defect.cokernel.order) : Json(nullptr)}};
    r.summary = "root of rank " + std::to_string(u.root.rank()) + " after " + std::to_string(u.steps) + " steps";
    return r;
  };

  h["koszul-pullback"] = [](const Context& c) {
    auto m = cartier_doc(c);
    auto seq = poly_list(m.ring(), c.opt.seq, "--seq");
    auto q = koszul_pullback(m, seq);
    Report r;
    r.result = {{"module", to_json(q)}};
    try {
      r.result["identified"] = to_json(canonical_identification(q));
    } catch (const CartierError& e) {
      if (e.code() != ErrorCode::kUnsupported) throw;
      r.result["identified"] = nullptr;
    }
    r.certificates["regular"] = true;
    r.summary = "Koszul pullback of rank " + std::to_string(q.rank());
    return r;
  };

  h["seq-change"] = [](const Context& c) {
    auto m = cartier_doc(c);
    auto f = poly_list(m.ring(), c.opt.seq, "--seq");
    auto g = poly_list(m.ring(), c.opt.seq_to, "--seq-to");
    auto s = sequence_change_factor(f, g, m);
    Report r;
    Json mat = Json::array();
    for (const auto& row : s.matrix) {
      Json jr = Json::array();
      for (const auto& e : row) jr.push_back(e.to_string());
      mat.push_back(jr);
    }
    r.result = {{"matrix", mat}, {"det", s.det.to_string()}, {"tables_equal", s.tables_equal}};
    r.certificates["det_relation"] = s.relation_holds;
    r.summary = "change of sequence with det " + s.det.to_string();
    return r;
  };

  h["gamma-z"] = [](const Context& c) {
    auto m = cartier_doc(c);
    auto t = torsion_gamma_Z(m, g_param(c, m.ring()), c.limits);
    Report r;
    r.result = {{"generators", element_strings(m, nonzero_generators(m, t.submodule))}, {"exponent", t.exponent},
                {"module", to_json(t.module)}};
    r.certificates["kappa_stable"] = is_kappa_stable(m, t.submodule);
    r.certificates["nilpotent"] = is_nilpotent(t.module, c.limits).nilpotent;
    r.summary = "torsion on " + std::to_string(t.module.rank()) + " generators, exponent " + std::to_string(t.exponent);
    return r;
  };

  h["localize"] = [](const Context& c) {
    auto m = cartier_doc(c);
    auto g = g_param(c, m.ring());
    auto n = open_pullback(m, g);
    auto ker = n.localization_kernel();
    auto tors = torsion_gamma_Z(m, g, c.limits);
    Report r;
    r.result = {{"kernel", element_strings(m, nonzero_generators(m, ker))},
                {"torsion_free", to_json(torsion_free_part(m, g))},
                {"supported_on_Z", supported_on_Z(m, g, c.limits)}};
    r.certificates["kernel_is_torsion"] = ker == tors.submodule;
    r.summary = "localization kernel on " + std::to_string(r.result["kernel"].size()) + " generators";
    return r;
  };

  h["sol"] = [](const Context& c) {
    auto dims = c.docs.at(0).contains("kappa") ? sol_dimension(cartier_doc(c), c.opt.max_m, c.limits)
                                               : sol_dimension_gamma(gamma_doc(c), c.opt.max_m, c.limits);
    Report r;
    r.result = {{"dims", dims}};
    r.certificates["max_m"] = c.opt.max_m;
    std::string s;
    for (auto d : dims) s += (s.empty() ? "" : ",") + std::to_string(d);
    r.summary = "solution dimensions [" + s + "]";
    return r;
  };

  h["ie"] = [](const Context& c) {
    auto m = cartier_doc(c);
    auto cert = intermediate_extension(open_pullback(m, g_param(c, m.ring())), c.limits);
    Report r;
    r.result = {{"lattice", cert.result.generator_strings()}, {"exponent", cert.result.exponent()}};
    r.certificates["ie"] = to_json(cert);
    std::string s;
    for (const auto& x : cert.result.generator_strings()) s += (s.empty() ? "" : ", ") + x;
    r.summary = "intermediate extension generated by [" + s + "], k* = " + std::to_string(cert.k_star);
    return r;
  };

  h["oracle"] = [](const Context& c) {
    auto m = cartier_doc(c);
    auto cert = intermediate_extension(open_pullback(m, g_param(c, m.ring())), c.limits);
    auto o = minimality_oracle(cert.result, c.opt.truncate, c.limits);
    Report r;
    r.result = {{"status", to_string(o.status)}, {"dimension", o.dimension}, {"explored", o.explored},
                {"witness", o.witness ? to_json(*o.witness) : Json(nullptr)}};
    r.certificates["ie"] = to_json(cert);
    r.certificates["truncate"] = c.opt.truncate;
    r.summary = "minimality " + to_string(o.status) + " at truncation " + std::to_string(c.opt.truncate);
    return r;
  };

  return h;
}

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonStabilized: return 3;
    case ErrorCode::kCertificateFailed:
    case ErrorCode::kInvariantViolation: return 4;
    default: return 2;
  }
}

inline std::size_t env_max_iter() {
  const char* v = std::getenv("CARTIER_LAB_MAX_ITER");
  if (v == nullptr || *v == '\0') return StabilizationLimits{}.max_iter;
  char* end = nullptr;
  const auto n = std::strtoull(v, &end, 10);
  require(end != nullptr && *end == '\0' && n > 0, ErrorCode::kValidation, "CARTIER_LAB_MAX_ITER must be a positive integer");
  return static_cast<std::size_t>(n);
}

inline std::string write_repro(const Options& opt, const std::string& op, const std::vector<std::string>& args,
                               const std::vector<std::string>& texts, const std::string& digest, const std::string& what) {
  Json bundle;
  bundle["operation"] = op;
  bundle["argv"] = args;
  bundle["inputs"] = texts;
  bundle["inputs-digest"] = digest;
  bundle["error"] = what;
  const std::string path = opt.repro_dir + "/cartier-lab-repro-" + digest + ".json";
  std::ofstream out(path);
  out << bundle.dump(2) << "\n";
  return out.good() ? path : std::string();
}

/// Runs one job; the report goes to out and the summary to err.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Exact computations with Cartier modules and gamma-sheaves", "cartier-lab"};
  app.require_subcommand(1, 1);
  app.add_option("--max-iter", opt.max_iter, "stabilization cap (default 256 or CARTIER_LAB_MAX_ITER)");
  app.add_option("--seed", opt.seed, "seed for randomized checks");
  app.add_option("--trials", opt.trials, "number of randomized checks");
  app.add_flag("--no-timings", opt.no_timings, "omit timings from the report");
  app.add_option("--repro-dir", opt.repro_dir, "directory for reproduction bundles");
  app.add_flag("--inject-fault", opt.inject_fault, "raise an invariant violation after the run")->group("");
  app.fallthrough();

  auto h = handlers();
  const std::map<std::string, std::string> help = {
      {"validate", "parse and check a module or gamma-sheaf"},
      {"kappa-apply", "apply kappa^n to an element"},
      {"nilpotency", "nilpotency and order"},
      {"stable-image", "stable image of kappa"},
      {"hom", "F_p-basis of Cartier morphisms between two modules"},
      {"to-gamma", "Cartier module to gamma-sheaf"},
      {"from-gamma", "gamma-sheaf to Cartier module"},
      {"unit-root", "stabilized root of the generated unit module"},
      {"koszul-pullback", "pullback along a regular sequence"},
      {"seq-change", "compare pullbacks along two sequences for one ideal"},
      {"gamma-z", "g-power torsion submodule"},
      {"localize", "localization at g"},
      {"sol", "F_p-dimensions of solution spaces over F_{q^m}"},
      {"ie", "intermediate extension across V(g) with certificate"},
      {"oracle", "truncated minimality check of the intermediate extension"}};
  for (const auto& [name, text] : help) {
    auto* sub = app.add_subcommand(name, text);
    const std::size_t files = name == "hom" ? 2 : 1;
    sub->add_option("inputs", opt.inputs, "input JSON document(s)")->required()->expected(static_cast<int>(files));
    if (name == "kappa-apply") {
      sub->add_option("--elem", opt.elem, "comma-separated coordinates")->required();
      sub->add_option("--power", opt.power, "exponent n");
    }
    if (name == "gamma-z" || name == "localize" || name == "ie" || name == "oracle")
      sub->add_option("--g", opt.g, "polynomial g")->required();
    if (name == "koszul-pullback" || name == "seq-change")
      sub->add_option("--seq", opt.seq, "comma-separated sequence")->required();
    if (name == "seq-change") sub->add_option("--seq-to", opt.seq_to, "second comma-separated sequence")->required();
    if (name == "sol") sub->add_option("--max-m", opt.max_m, "largest extension degree");
    if (name == "oracle") sub->add_option("--truncate", opt.truncate, "truncation degree D");
    if (name == "hom") sub->add_option("--max-deg", opt.max_deg, "degree cap for entries");
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return e.get_exit_code() == 0 ? 0 : 2;
  }
  const std::string op = app.get_subcommands().front()->get_name();

  const auto start = std::chrono::steady_clock::now();
  std::vector<std::string> texts;
  std::string digest = hex64(fnv1a(op));
  Json report;
  report["operation"] = op;
  try {
    Context c{opt, {}, {}};
    c.limits.max_iter = opt.max_iter > 0 ? opt.max_iter : env_max_iter();
    std::string canon = op;
    for (const auto& path : opt.inputs) {
      texts.push_back(read_file(path));
      c.docs.push_back(parse_json(texts.back(), path));
      canon += "\n" + c.docs.back().dump();
    }
    canon += "\ng=" + opt.g + "\nseq=" + opt.seq + "\nseq-to=" + opt.seq_to + "\nelem=" + opt.elem +
             "\npower=" + std::to_string(opt.power) + "\nmax-m=" + std::to_string(opt.max_m) +
             "\ntruncate=" + std::to_string(opt.truncate) + "\nmax-deg=" + std::to_string(opt.max_deg) +
             "\nseed=" + std::to_string(opt.seed) + "\ntrials=" + std::to_string(opt.trials) +
             "\nmax-iter=" + std::to_string(c.limits.max_iter);
    digest = hex64(fnv1a(canon));
    report["inputs-digest"] = digest;

    Report r = h.at(op)(c);
    require(!opt.inject_fault, ErrorCode::kInvariantViolation, "fault injected on request");
    report["result"] = r.result;
    report["certificates"] = r.certificates;
    if (opt.no_timings) {
      report["timings"] = Json::object();
    } else {
      const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      report["timings"] = {{"total_ms", ms}};
    }
    out << report.dump(2) << "\n";
    err << op << ": " << r.summary << "\n";
    return 0;
  } catch (const CartierError& e) {
    const int code = exit_code_for(e.code());
    report["inputs-digest"] = digest;
    report["error"] = {{"code", to_string(e.code())}, {"message", e.what()}};
    if (code == 4) report["error"]["repro"] = write_repro(opt, op, args, texts, digest, e.what());
    out << report.dump(2) << "\n";
    err << op << ": " << e.what() << "\n";
    return code;
  } catch (const std::exception& e) {
    report["inputs-digest"] = digest;
    report["error"] = {{"code", "INTERNAL"}, {"message", e.what()}};
    report["error"]["repro"] = write_repro(opt, op, args, texts, digest, e.what());
    out << report.dump(2) << "\n";
    err << op << ": internal error: " << e.what() << "\n";
    return 4;
  }
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, out, err);
}

}  // namespace cartier_lab::cli
