#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "heunband/acceptance.hpp"
#include "heunband/antikraw.hpp"
#include "heunband/contdisc.hpp"
#include "heunband/diffops.hpp"
#include "heunband/heun.hpp"
#include "heunband/leonard.hpp"
#include "heunband/limiting.hpp"

namespace heunband::cli {

namespace fs = std::filesystem;

ConfigError::ConfigError(std::vector<std::string> diagnostics)
    : std::runtime_error(diagnostics.empty() ? "invalid configuration" : diagnostics.front()),
      diagnostics_(std::move(diagnostics)) {}

namespace {

const std::vector<std::string> kPipelines{"discrete", "antikraw", "contdisc", "symbolic", "verify-all"};

// ---------------------------------------------------------------- schema

// Reads typed fields out of one config object, remembering which keys were
// used so the leftovers can be reported as unknown.
class FieldReader {
 public:
  FieldReader(const json& obj, std::string where, std::vector<std::string>& diags)
      : obj_(obj), where_(std::move(where)), diags_(diags) {}

  std::optional<long long> integer(const std::string& key, std::optional<long long> fallback = std::nullopt) {
    const json* v = take(key, fallback.has_value());
    if (!v) {
      if (fallback) out[key] = *fallback;
      return fallback;
    }
    if (!v->is_number_integer()) return bad(key, "an integer"), std::nullopt;
    const auto x = v->get<long long>();
    out[key] = x;
    return x;
  }

  std::optional<double> number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const json* v = take(key, fallback.has_value());
    if (!v) {
      if (fallback) out[key] = *fallback;
      return fallback;
    }
    if (!v->is_number()) return bad(key, "a number"), std::nullopt;
    const auto x = v->get<double>();
    out[key] = x;
    return x;
  }

  std::optional<std::string> text(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    const json* v = take(key, fallback.has_value());
    if (!v) {
      if (fallback) out[key] = *fallback;
      return fallback;
    }
    if (!v->is_string()) return bad(key, "a string"), std::nullopt;
    auto x = v->get<std::string>();
    out[key] = x;
    return x;
  }

  const json* object(const std::string& key) {
    const json* v = take(key, true);
    if (v && !v->is_object()) return bad(key, "an object"), nullptr;
    return v;
  }

  void require(bool ok, const std::string& message) {
    if (!ok) diags_.push_back(where_ + ": " + message);
  }

  void finish() {
    for (const auto& [key, value] : obj_.items()) {
      if (!used_.count(key)) diags_.push_back(fmt::format("{}: unknown field '{}'", where_, key));
    }
  }

  json out = json::object();

 private:
  const json* take(const std::string& key, bool optional) {
    used_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) {
      if (!optional) diags_.push_back(fmt::format("{}: missing required field '{}'", where_, key));
      return nullptr;
    }
    return &*it;
  }

  void bad(const std::string& key, const char* expected) {
    diags_.push_back(fmt::format("{}: field '{}' must be {}", where_, key, expected));
  }

  const json& obj_;
  std::string where_;
  std::vector<std::string>& diags_;
  std::set<std::string> used_;
};

bool one_of(const std::optional<std::string>& v, std::initializer_list<const char*> names) {
  if (!v) return true;  // already reported
  return std::any_of(names.begin(), names.end(), [&](const char* n) { return *v == n; });
}

void read_discrete(FieldReader& r) {
  const auto family = r.text("family", "krawtchouk");
  r.require(one_of(family, {"krawtchouk", "hahn", "anti_krawtchouk"}),
            "family must be krawtchouk, hahn or anti_krawtchouk");
  const auto N = r.integer("N");
  const auto j1 = r.integer("J1");
  const auto j2 = r.integer("J2");
  if (N) {
    r.require(*N >= 2, "N must be at least 2");
    if (family && *family == "anti_krawtchouk") r.require(*N % 2 == 0, "anti_krawtchouk needs even N");
    if (j1) r.require(*j1 >= 0 && *j1 <= *N - 1, "J1 must lie in 0..N-1");
    if (j2) r.require(*j2 >= 0 && *j2 <= *N - 1, "J2 must lie in 0..N-1");
  }
  if (family && *family == "krawtchouk") {
    const auto p = r.number("p", 0.3);
    r.require(!p || (*p > 0.0 && *p < 1.0), "p must lie in (0, 1)");
  } else if (family && *family == "hahn") {
    const auto a = r.number("alpha", 0.0);
    const auto b = r.number("beta", 0.0);
    r.require(!a || *a > -1.0, "alpha must exceed -1");
    r.require(!b || *b > -1.0, "beta must exceed -1");
  }
}

void read_antikraw(FieldReader& r) {
  const auto N = r.integer("N");
  const auto n1 = r.integer("N1");
  const auto n2 = r.integer("N2");
  const auto ansatz = r.text("ansatz", "penta");
  r.require(one_of(ansatz, {"penta", "alternative", "alternative_printed", "bilinear"}),
            "ansatz must be penta, alternative, alternative_printed or bilinear");
  if (N) {
    r.require(*N >= 4 && *N % 2 == 0, "N must be even and at least 4");
    if (n1) r.require(*n1 >= 1 && *n1 <= *N - 2, "N1 must lie in 1..N-2");
    if (n2) r.require(*n2 >= 1 && *n2 <= *N - 2, "N2 must lie in 1..N-2");
  }
}

// family, alpha, beta, N, W for the continuous pipelines.
void read_classical(FieldReader& r) {
  const auto family = r.text("family");
  r.require(one_of(family, {"hermite", "laguerre", "jacobi"}), "family must be hermite, laguerre or jacobi");
  const auto N = r.integer("N");
  if (N) r.require(*N >= 1, "N must be at least 1");
  const auto W = r.number("W");
  if (!family) return;
  if (*family == "laguerre") {
    const auto a = r.number("alpha", 0.0);
    r.require(!a || *a <= 0.0, "laguerre needs alpha <= 0");
    r.require(!W || *W > 0.0, "W must be positive for laguerre");
  } else if (*family == "jacobi") {
    const auto a = r.number("alpha", 0.0);
    const auto b = r.number("beta", 0.0);
    r.require(!a || *a >= 0.0, "jacobi needs alpha >= 0");
    r.require(!b || *b >= 0.0, "jacobi needs beta >= 0");
    r.require(!W || (*W > -1.0 && *W <= 1.0), "W must lie in (-1, 1] for jacobi");
  }
}

void read_symbolic(FieldReader& r) {
  const auto op = r.text("operator");
  r.require(one_of(op, {"prolate", "bessel", "tilde_d"}), "operator must be prolate, bessel or tilde_d");
  if (!op) return;
  if (*op == "prolate") {
    const auto T = r.number("T");
    const auto W = r.number("W");
    r.require(!T || *T > 0.0, "T must be positive");
    r.require(!W || *W > 0.0, "W must be positive");
  } else if (*op == "bessel") {
    const auto G = r.number("G");
    const auto T = r.number("T");
    const auto nu = r.number("nu", 0.0);
    r.require(!G || *G > 0.0, "G must be positive");
    r.require(!T || *T > 0.0, "T must be positive");
    r.require(!nu || *nu >= 0.0, "nu must be non-negative");
  } else if (*op == "tilde_d") {
    read_classical(r);
  }
}

const std::regex& name_pattern() {
  static const std::regex re("[A-Za-z0-9_.-]+");
  return re;
}

RunConfig read_run(const json& obj, std::size_t index, bool batch, std::vector<std::string>& diags) {
  RunConfig cfg;
  const std::string where = batch ? fmt::format("runs[{}]", index) : "config";
  if (!obj.is_object()) {
    diags.push_back(where + ": must be an object");
    return cfg;
  }
  FieldReader r(obj, where, diags);
  const auto pipeline = r.text("pipeline");
  const bool named = obj.contains("name");
  const auto name = r.text("name", "");
  const json* tolerances = r.object("tolerances");
  const json* outputs = r.object("outputs");

  if (pipeline && std::find(kPipelines.begin(), kPipelines.end(), *pipeline) == kPipelines.end()) {
    diags.push_back(where + ": pipeline must be discrete, antikraw, contdisc, symbolic or verify-all");
  }
  cfg.pipeline = pipeline.value_or("");
  cfg.name = named && name ? *name : (batch ? fmt::format("run{}", index) : cfg.pipeline);
  if (named && name) r.require(std::regex_match(*name, name_pattern()), "name may only use letters, digits, '.', '_' and '-'");

  if (cfg.pipeline == "discrete") read_discrete(r);
  else if (cfg.pipeline == "antikraw") read_antikraw(r);
  else if (cfg.pipeline == "contdisc") read_classical(r);
  else if (cfg.pipeline == "symbolic") read_symbolic(r);
  cfg.params = r.out;
  cfg.params.erase("pipeline");
  cfg.params.erase("name");
  r.finish();

  cfg.tolerances = default_tolerances(cfg.pipeline);
  if (tolerances) {
    for (const auto& [key, value] : tolerances->items()) {
      if (!cfg.tolerances.count(key)) {
        diags.push_back(fmt::format("{}: unknown tolerance '{}' for pipeline {}", where, key, cfg.pipeline));
      } else if (!value.is_number() || !(value.get<double>() > 0.0)) {
        diags.push_back(fmt::format("{}: tolerance '{}' must be a positive number", where, key));
      } else {
        cfg.tolerances[key] = value.get<double>();
      }
    }
  }
  if (outputs) {
    for (const auto& [key, value] : outputs->items()) {
      if (key != "plot" && key != "matrices") {
        diags.push_back(fmt::format("{}.outputs: unknown field '{}'", where, key));
      } else if (!value.is_boolean()) {
        diags.push_back(fmt::format("{}.outputs: field '{}' must be a boolean", where, key));
      } else {
        (key == "plot" ? cfg.write_plot : cfg.write_matrices) = value.get<bool>();
      }
    }
  }
  return cfg;
}

// ---------------------------------------------------------------- evaluation

// Collects residuals against their bounds and the boolean checks of a run.
class Verdict {
 public:
  explicit Verdict(const std::map<std::string, double>& bounds) : bounds_(bounds) {}

  void upper(const std::string& name, double value) {
    residuals[name] = value;
    const double bound = bounds_.at(name);
    if (!(value < bound)) failures.push_back(fmt::format("{} = {:.3e} (needs < {:.1e})", name, value, bound));
  }

  void lower(const std::string& name, double value) {
    residuals[name] = value;
    const double bound = bounds_.at(name);
    if (!(value > bound)) failures.push_back(fmt::format("{} = {:.3e} (needs > {:.1e})", name, value, bound));
  }

  void expect(const std::string& what, bool ok) {
    if (!ok) failures.push_back(what);
  }

  json residuals = json::object();
  json spectra = json::object();
  json details = json::object();
  std::vector<std::string> failures;
  std::string diagnostic;

 private:
  const std::map<std::string, double>& bounds_;
};

LeonardPair discrete_pair(const json& p) {
  const std::string family = p.at("family");
  const int N = p.at("N");
  if (family == "krawtchouk") return make_krawtchouk(N, p.at("p"));
  if (family == "hahn") return make_hahn(N, p.at("alpha"), p.at("beta"));
  return make_anti_krawtchouk(N);
}

ClassicalFamily classical_family(const json& p) {
  return make_family(parse_family_kind(p.at("family")), p.value("alpha", 0.0), p.value("beta", 0.0));
}

void record_diagonalization(Verdict& v, const DiagonalizationReport& d) {
  v.upper("rayleigh_multiset", d.multiset_deviation);
  v.upper("eigen_residual", d.max_eigen_residual);
  v.spectra["rayleigh"] = d.rayleigh_sorted;
  v.spectra["commuting_spectrum"] = d.commuting_spectrum;
}

void run_discrete(const RunConfig& c, Verdict& v, std::vector<NamedMatrix>* matrices, std::vector<double>& conc) {
  const LeonardPair pair = discrete_pair(c.params);
  const int j1 = c.params.at("J1"), j2 = c.params.at("J2");
  const LimitingReport r = analyze_discrete(pair, j1, j2);

  v.upper("comm_pi1", r.comm_pi1);
  v.upper("comm_pi2", r.comm_pi2);
  v.upper("band_pi1", r.band_pi1);
  v.upper("band_pi2", r.band_pi2);
  v.upper("comm_v1", r.comm_v1);
  v.upper("comm_v2", r.comm_v2);
  v.upper("kernel_sum_dual", r.kernel_sum_dual);
  v.upper("kernel_sum_cd", r.kernel_sum_cd);
  v.upper("kernel_dual_cd", r.kernel_dual_cd);
  v.upper("kernel_vs_v1", r.kernel_vs_v1);
  v.upper("basis_consistency", r.basis_consistency);
  v.upper("v1_v2_nonzero_spectrum", r.v1_v2_nonzero_spectrum);
  if (r.restricted_spectrum_e.size() > 1) v.lower("relative_gap_e", r.gap_e / r.spread_e);
  if (r.restricted_spectrum_d.size() > 1) v.lower("relative_gap_d", r.gap_d / r.spread_d);
  if (r.diagonalization) {
    record_diagonalization(v, *r.diagonalization);
  } else {
    v.diagnostic = r.diagnostic;
    v.expect(r.diagnostic, false);
  }
  v.spectra["concentration"] = r.concentration;
  v.spectra["restricted_spectrum_e"] = r.restricted_spectrum_e;
  v.spectra["restricted_spectrum_d"] = r.restricted_spectrum_d;
  v.details["tau"] = {r.tau.tau0, r.tau.tau1, r.tau.tau2, r.tau.tau3, r.tau.tau4};
  v.details["lambda_flag"] = to_string(r.lambda_flag);
  v.details["mu_flag"] = to_string(r.mu_flag);
  conc = r.concentration;

  if (matrices) {
    const RestrictionOperators ops = restriction_operators(pair, j1, j2);
    matrices->push_back({"kernel", kernel_matrix_sum(pair, j1, j2).to_dense()});
    matrices->push_back({"heun_e", heun_matrix_e(pair, r.tau).to_dense()});
    matrices->push_back({"heun_d", heun_matrix_d(pair, r.tau).to_dense()});
    matrices->push_back({"v1", ops.v1.to_dense()});
    matrices->push_back({"v2", ops.v2.to_dense()});
  }
}

BandedOperator anti_operator(const AntiSpinRep& spin, int n1, int n2, AntiAnsatz ansatz) {
  switch (ansatz) {
    case AntiAnsatz::penta: return assemble_penta_direct(spin, solve_penta_coeffs(spin.N, n1, n2).alpha);
    case AntiAnsatz::alternative: return alternative_M(spin, n1, n2, AlternativeForm::corrected);
    case AntiAnsatz::alternative_printed: return alternative_M(spin, n1, n2, AlternativeForm::as_printed);
    case AntiAnsatz::bilinear: break;
  }
  return bilinear_perline_M(spin, n1, n2);
}

void run_antikraw(const RunConfig& c, Verdict& v, std::vector<NamedMatrix>* matrices, std::vector<double>& conc) {
  const int N = c.params.at("N"), n1 = c.params.at("N1"), n2 = c.params.at("N2");
  const AntiAnsatz ansatz = parse_anti_ansatz(c.params.at("ansatz"));
  const AntiKrawReport r = analyze_antikraw(N, n1, n2, ansatz);

  v.upper("casimir_residual", r.algebra.casimir_residual);
  v.upper("anticommutator_l1l2", r.algebra.rel_l1l2);
  v.upper("anticommutator_l2l3", r.algebra.rel_l2l3);
  v.upper("anticommutator_l3l1", r.algebra.rel_l3l1);
  if (r.coefficients) {
    v.upper("conditions_residual", r.coefficients->conditions_residual);
    v.upper("band_mismatch", r.band_mismatch);
    const auto& a = r.coefficients->alpha;
    v.details["alpha"] = std::vector<double>(a.begin(), a.end());
    v.details["kappa"] = {r.coefficients->kappa1, r.coefficients->kappa2};
  }
  v.upper("comm_pi_n1", r.verification.comm_e);
  v.upper("comm_pi_n2", r.verification.comm_d);
  v.upper("comm_v1", r.comm_v1);
  v.upper("comm_v2", r.comm_v2);
  v.lower("relative_gap_e", r.verification.gap_e / r.verification.spread_e);
  v.lower("relative_gap_d", r.verification.gap_d / r.verification.spread_d);
  if (r.diagonalization) {
    record_diagonalization(v, *r.diagonalization);
  } else {
    v.diagnostic = r.diagnostic;
    v.expect(r.diagnostic, false);
  }
  v.spectra["concentration"] = r.concentration;
  v.spectra["spectrum_e"] = r.verification.spectrum_e;
  v.spectra["spectrum_d"] = r.verification.spectrum_d;
  v.details["casimir"] = r.algebra.casimir_scalar;
  conc = r.concentration;

  if (matrices) {
    const AntiSpinRep spin = make_antispin(N);
    const RestrictionOperators ops = restriction_operators(make_anti_krawtchouk(N), n1, n2);
    matrices->push_back({"operator", anti_operator(spin, n1, n2, ansatz).to_dense()});
    matrices->push_back({"v1", ops.v1.to_dense()});
    matrices->push_back({"v2", ops.v2.to_dense()});
  }
}

void run_contdisc(const RunConfig& c, Verdict& v, std::vector<NamedMatrix>* matrices, std::vector<double>& conc) {
  const ClassicalFamily family = classical_family(c.params);
  const int N = c.params.at("N");
  const double W = c.params.at("W");
  const ContDiscReport r = analyze_contdisc(family, N, W);

  v.expect("kernel quadrature did not converge", r.kernel.converged);
  v.upper("quadrature_error", r.kernel.error_estimate);
  v.upper("comm_tk", r.comm_tk);
  v.upper("offdiag_in_t_basis", r.offdiag_in_t_basis);
  // With the whole support selected K is the identity and any sigma fits.
  if (r.fit.degenerate) {
    v.details["sigma_fit"] = "undetermined: the kernel commutes with every candidate";
  } else {
    v.upper("sigma_fit_error", std::abs(r.fit.sigma - r.sigma_table) / std::max(1.0, std::abs(r.sigma_table)));
  }
  v.upper("tilde_d_divergence", r.tilde_d.divergence_mismatch);
  v.expect("tilde_d fails the boundary condition at W", r.tilde_d.boundary_at_w.passed);
  v.spectra["concentration"] = r.concentration;
  v.spectra["t_spectrum"] = r.t_spectrum;
  v.details["sigma_table"] = r.sigma_table;
  v.details["sigma_fitted"] = r.fit.sigma;
  v.details["a_n"] = r.tilde_d.a_n;
  v.details["tilde_d_constant_offset"] = r.tilde_d.constant_offset;
  v.details["quadrature_lower_limit"] = r.kernel.lower_limit;
  v.details["quadrature_panels"] = r.kernel.panels;
  v.details["kernel_spectrum"] = {r.kernel_spectrum_min, r.kernel_spectrum_max};
  conc = r.concentration;

  if (matrices) {
    matrices->push_back({"kernel", r.kernel.k.to_dense()});
    matrices->push_back({"commuting", commuting_matrix(family, N, W).to_dense()});
  }
}

void record_boundary(Verdict& v, const std::vector<BoundaryCheck>& checks) {
  double worst = 0.0;
  bool ok = true;
  for (const auto& b : checks) {
    worst = std::max(worst, b.slope_mismatch);
    ok = ok && b.passed;
  }
  v.details["boundary_slope_mismatch"] = worst;
  v.expect("boundary commutation fails at an endpoint", ok);
}

void run_symbolic(const RunConfig& c, Verdict& v) {
  const std::string op = c.params.at("operator");
  if (op == "prolate") {
    const double T = c.params.at("T"), W = c.params.at("W");
    v.upper("identity", prolate_identity_residual(T, W, {0.5, -T * T, -W * W, 1.0}));
    const double ends[] = {-T, T};
    record_boundary(v, boundary_commutation_check(prolate_operator(T, W), ends));
  } else if (op == "bessel") {
    const double G = c.params.at("G"), T = c.params.at("T"), nu = c.params.at("nu");
    v.upper("identity", bessel_identity_residual(G, T, nu, {-0.5, G * G, T * T, nu * nu - 1.25}));
    const double ends[] = {-G, G};
    record_boundary(v, boundary_commutation_check(bessel_operator(G, T, nu), ends));
  } else {
    const TildeDReport t = verify_tilde_d(classical_family(c.params), c.params.at("N"), c.params.at("W"));
    v.upper("identity", t.divergence_mismatch);
    v.details["boundary_slope_mismatch"] = t.boundary_at_w.slope_mismatch;
    v.details["leading_at_w"] = t.leading_at_w;
    v.details["constant_offset"] = t.constant_offset;
    v.details["a_n"] = t.a_n;
    v.expect("boundary commutation fails at W", t.boundary_at_w.passed);
  }
}

void run_verify_all(Verdict& v) {
  json criteria = json::array();
  for (const auto& r : run_acceptance()) {
    for (const auto& [metric, value] : r.metrics) v.residuals[fmt::format("criterion{}.{}", r.id, metric)] = value;
    for (const auto& f : r.failures) v.failures.push_back(fmt::format("criterion {}: {}", r.id, f));
    criteria.push_back({{"id", r.id}, {"title", r.title}, {"passed", r.passed}, {"notes", r.notes}});
  }
  v.details["criteria"] = criteria;
}

json config_echo(const RunConfig& c) {
  return {{"name", c.name},
          {"pipeline", c.pipeline},
          {"params", c.params},
          {"tolerances", c.tolerances},
          {"outputs", {{"plot", c.write_plot}, {"matrices", c.write_matrices}}}};
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
}

// ---------------------------------------------------------------- JSON text

void emit(const json& j, std::string& out, int depth) {
  const std::string pad(2 * (depth + 1), ' ');
  const std::string close_pad(2 * depth, ' ');
  switch (j.type()) {
    case json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
      out += flat ? "[" : "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (!flat) out += pad;
        emit(j[i], out, depth + 1);
        if (i + 1 < j.size()) out += flat ? ", " : ",\n";
      }
      out += flat ? "]" : "\n" + close_pad + "]";
      return;
    }
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      std::size_t i = 0;
      for (const auto& [key, value] : j.items()) {
        out += pad + json(key).dump() + ": ";
        emit(value, out, depth + 1);
        out += ++i < j.size() ? ",\n" : "\n";
      }
      out += close_pad + "}";
      return;
    }
    default:
      out += j.dump();
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

void print_summary(std::ostream& os, const Outcome& o) {
  os << fmt::format("{}: {}", o.name, o.status == exit_pass ? "PASS" : (o.status == exit_failure ? "FAIL" : "ERROR"))
     << '\n';
  for (const auto& m : o.messages) os << "    " << m << '\n';
}

json load_document(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError({"cannot read config file '" + path + "'"});
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError({"config is not valid JSON: " + std::string(e.what())});
  }
}

void write_outcome_files(const fs::path& dir, const Outcome& o, const std::string& format, bool matrices_only) {
  const json& echo = o.report.at("config_echo");
  const bool plot = echo.at("outputs").at("plot").get<bool>();
  const bool matrices = matrices_only || echo.at("outputs").at("matrices").get<bool>();
  if (!matrices_only) {
    if (format == "csv") {
      write_file(dir / (o.name + ".residuals.csv"), residuals_csv(o.report));
      write_file(dir / (o.name + ".spectra.csv"), spectra_csv(o.report));
    } else {
      write_file(dir / (o.name + ".json"), dump_json(o.report));
    }
    if (plot && !o.concentration.empty()) write_file(dir / (o.name + ".concentration.dat"), plot_data(o.concentration));
  }
  if (!matrices) return;
  if (matrices_only && format == "json") {
    json all = json::object();
    for (const auto& m : o.matrices) {
      json rows = json::array();
      for (std::size_t i = 0; i < m.values.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.values.cols(); ++j) row.push_back(m.values(i, j));
        rows.push_back(row);
      }
      all[m.name] = rows;
    }
    write_file(dir / (o.name + ".matrices.json"), dump_json(all));
    return;
  }
  for (const auto& m : o.matrices) write_file(dir / (o.name + "." + m.name + ".csv"), matrix_csv(m.values));
}

fs::path prepare_dir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw ConfigError({"cannot create output directory '" + out + "'"});
  return fs::path(out);
}

int batch_status(const std::vector<Outcome>& outcomes) {
  int status = exit_pass;
  for (const auto& o : outcomes) status = std::max(status, o.status);
  return status;
}

int cmd_run(const std::string& config, const std::string& out, const std::string& format,
            const std::vector<std::string>& tol, bool export_only) {
  const auto configs = load_configs(load_document(config), parse_tolerance_flags(tol));
  const unsigned threads = thread_cap();
  const bool want_matrices =
      export_only || std::any_of(configs.begin(), configs.end(), [](const RunConfig& c) { return c.write_matrices; });
  if (export_only) {
    for (const auto& c : configs) {
      if (c.pipeline == "symbolic" || c.pipeline == "verify-all") {
        throw ConfigError({fmt::format("{}: pipeline {} has no matrices to export", c.name, c.pipeline)});
      }
    }
  }
  const auto outcomes = execute_all(configs, want_matrices, threads);

  if (out.empty()) {
    if (format == "csv") {
      std::cout << "run,name,value,bound,passed\n";
      for (const auto& o : outcomes) {
        const std::string body = residuals_csv(o.report);
        std::cout << body.substr(body.find('\n') + 1);
      }
    } else if (outcomes.size() == 1) {
      std::cout << dump_json(outcomes.front().report) << '\n';
    } else {
      json all = json::array();
      for (const auto& o : outcomes) all.push_back(o.report);
      std::cout << dump_json(all) << '\n';
    }
    for (const auto& o : outcomes) print_summary(std::cerr, o);
    return batch_status(outcomes);
  }

  const fs::path dir = prepare_dir(out);
  for (const auto& o : outcomes) {
    if (o.status != exit_usage) write_outcome_files(dir, o, format, export_only);
    print_summary(std::cout, o);
  }
  return batch_status(outcomes);
}

int cmd_verify_all(const std::string& out, const std::string& format) {
  RunConfig cfg;
  cfg.name = "verify-all";
  cfg.pipeline = "verify-all";
  cfg.params = json::object();
  const Outcome o = execute(cfg, false);
  for (const auto& c : o.report.at("verdict").at("details").at("criteria")) {
    std::cout << fmt::format("criterion {}: {}  {}", c.at("id").get<int>(),
                             c.at("passed").get<bool>() ? "PASS" : "FAIL", c.at("title").get<std::string>())
              << '\n';
    const std::string prefix = fmt::format("criterion {}: ", c.at("id").get<int>());
    for (const auto& m : o.messages)
      if (m.rfind(prefix, 0) == 0) std::cout << "    failed: " << m.substr(prefix.size()) << '\n';
    for (const auto& n : c.at("notes")) std::cout << "    note: " << n.get<std::string>() << '\n';
  }
  if (!out.empty()) write_outcome_files(prepare_dir(out), o, format, false);
  return o.status;
}

int cmd_families(const std::string& format) {
  const json fams = families_json();
  if (format == "json") {
    std::cout << dump_json(fams) << '\n';
  } else if (format == "csv") {
    std::cout << "pipeline,family,parameters\n";
    for (const auto& f : fams)
      std::cout << csv_field(f.at("pipeline")) << ',' << csv_field(f.at("family")) << ','
                << csv_field(f.at("parameters")) << '\n';
  } else {
    for (const auto& f : fams)
      std::cout << fmt::format("{:<11}{:<21}{}", f.at("pipeline").get<std::string>(),
                               f.at("family").get<std::string>(), f.at("parameters").get<std::string>())
                << '\n';
  }
  return exit_pass;
}

}  // namespace

// ---------------------------------------------------------------- public

std::map<std::string, double> default_tolerances(const std::string& pipeline) {
  if (pipeline == "discrete") {
    return {{"comm_pi1", 1e-12},          {"comm_pi2", 1e-12},        {"band_pi1", 1e-12},
            {"band_pi2", 1e-12},          {"comm_v1", 1e-10},         {"comm_v2", 1e-10},
            {"kernel_sum_dual", 1e-10},   {"kernel_sum_cd", 1e-10},   {"kernel_dual_cd", 1e-10},
            {"kernel_vs_v1", 1e-10},      {"basis_consistency", 1e-10}, {"v1_v2_nonzero_spectrum", 1e-10},
            {"relative_gap_e", 1e-6},     {"relative_gap_d", 1e-6},   {"rayleigh_multiset", 1e-8},
            {"eigen_residual", 1e-8}};
  }
  if (pipeline == "antikraw") {
    return {{"casimir_residual", 1e-10},  {"anticommutator_l1l2", 1e-10}, {"anticommutator_l2l3", 1e-10},
            {"anticommutator_l3l1", 1e-10}, {"conditions_residual", 1e-12}, {"band_mismatch", 1e-12},
            {"comm_pi_n1", 1e-10},        {"comm_pi_n2", 1e-10},          {"comm_v1", 1e-10},
            {"comm_v2", 1e-10},           {"relative_gap_e", 1e-8},       {"relative_gap_d", 1e-8},
            {"rayleigh_multiset", 1e-8},  {"eigen_residual", 1e-8}};
  }
  if (pipeline == "contdisc") {
    return {{"quadrature_error", 1e-10}, {"comm_tk", 1e-8},           {"offdiag_in_t_basis", 1e-7},
            {"sigma_fit_error", 1e-6},   {"tilde_d_divergence", 1e-12}};
  }
  if (pipeline == "symbolic") return {{"identity", 1e-12}};
  return {};
}

std::map<std::string, double> parse_tolerance_flags(const std::vector<std::string>& flags) {
  std::map<std::string, double> out;
  std::vector<std::string> diags;
  for (const auto& f : flags) {
    const auto eq = f.find('=');
    if (eq == std::string::npos || eq == 0) {
      diags.push_back("--tol expects name=value, got '" + f + "'");
      continue;
    }
    const std::string name = f.substr(0, eq);
    const std::string text = f.substr(eq + 1);
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size() || !std::isfinite(value) || !(value > 0.0)) {
      diags.push_back("--tol " + name + ": value must be a positive number, got '" + text + "'");
      continue;
    }
    out[name] = value;
  }
  if (!diags.empty()) throw ConfigError(diags);
  return out;
}

std::vector<RunConfig> load_configs(const json& doc, const std::map<std::string, double>& tol_overrides) {
  std::vector<std::string> diags;
  std::vector<RunConfig> runs;
  const json* list = nullptr;
  if (doc.is_array()) {
    list = &doc;
  } else if (doc.is_object() && doc.contains("runs")) {
    if (doc.size() != 1) diags.push_back("config: a batch object may only contain 'runs'");
    if (!doc.at("runs").is_array()) throw ConfigError({"config: 'runs' must be an array"});
    list = &doc.at("runs");
  }
  if (list) {
    if (list->empty()) diags.push_back("config: batch contains no runs");
    for (std::size_t i = 0; i < list->size(); ++i) runs.push_back(read_run((*list)[i], i, true, diags));
  } else {
    runs.push_back(read_run(doc, 0, false, diags));
  }

  std::set<std::string> names;
  for (const auto& r : runs)
    if (!r.name.empty() && !names.insert(r.name).second) diags.push_back("config: duplicate run name '" + r.name + "'");

  for (const auto& [name, value] : tol_overrides) {
    bool known = false;
    for (auto& r : runs) {
      auto it = r.tolerances.find(name);
      if (it == r.tolerances.end()) continue;
      it->second = value;
      known = true;
    }
    if (!known) diags.push_back("--tol " + name + ": no run in this config has a tolerance of that name");
  }
  if (!diags.empty()) throw ConfigError(diags);
  return runs;
}

Outcome execute(const RunConfig& config, bool want_matrices) {
  Outcome o;
  o.name = config.name;
  Verdict v(config.tolerances);
  std::vector<NamedMatrix>* matrices = want_matrices ? &o.matrices : nullptr;
  try {
    if (config.pipeline == "discrete") run_discrete(config, v, matrices, o.concentration);
    else if (config.pipeline == "antikraw") run_antikraw(config, v, matrices, o.concentration);
    else if (config.pipeline == "contdisc") run_contdisc(config, v, matrices, o.concentration);
    else if (config.pipeline == "symbolic") run_symbolic(config, v);
    else if (config.pipeline == "verify-all") run_verify_all(v);
    else throw std::invalid_argument("unknown pipeline '" + config.pipeline + "'");
    o.status = v.failures.empty() ? exit_pass : exit_failure;
  } catch (const std::invalid_argument& e) {
    o.status = exit_usage;
    v.failures.push_back(e.what());
  } catch (const std::out_of_range& e) {
    o.status = exit_usage;
    v.failures.push_back(e.what());
  } catch (const std::exception& e) {
    o.status = exit_failure;
    v.failures.push_back(e.what());
  }
  o.messages = v.failures;
  json verdict = {{"passed", o.status == exit_pass},
                  {"status", o.status == exit_pass ? "pass" : "fail"},
                  {"failures", v.failures},
                  {"details", v.details}};
  if (!v.diagnostic.empty()) verdict["diagnostic"] = v.diagnostic;
  o.report = {{"config_echo", config_echo(config)},
              {"residuals", v.residuals},
              {"spectra", v.spectra},
              {"verdict", verdict}};
  return o;
}

std::vector<Outcome> execute_all(const std::vector<RunConfig>& configs, bool want_matrices, unsigned threads) {
  std::vector<Outcome> out(configs.size());
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(configs.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < configs.size(); ++i) out[i] = execute(configs[i], want_matrices);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < configs.size(); i = next++) out[i] = execute(configs[i], want_matrices);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

unsigned thread_cap() {
  const char* env = std::getenv("HEUNBAND_THREADS");
  if (!env || !*env) return std::max(1u, std::thread::hardware_concurrency());
  const std::string text(env);
  std::size_t used = 0;
  unsigned long value = 0;
  try {
    value = std::stoul(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || value == 0 || text.front() == '-') {
    throw ConfigError({"HEUNBAND_THREADS must be a positive integer, got '" + text + "'"});
  }
  return static_cast<unsigned>(std::min<unsigned long>(value, 1024));
}

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  std::string s = fmt::format("{:.17g}", v);
  // Keep floats recognisable as floats.
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

std::string dump_json(const json& j) {
  std::string out;
  emit(j, out, 0);
  return out;
}

std::string matrix_csv(const Matrix& m) {
  std::string out;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string residuals_csv(const json& report) {
  const json& echo = report.at("config_echo");
  const std::string run = echo.at("name");
  const json& bounds = echo.at("tolerances");
  std::string out = "run,name,value,bound,passed\n";
  const auto& failures = report.at("verdict").at("failures");
  for (const auto& [name, value] : report.at("residuals").items()) {
    const bool failed = std::any_of(failures.begin(), failures.end(), [&](const json& f) {
      return f.get<std::string>().rfind(name + " = ", 0) == 0;
    });
    const std::string bound = bounds.contains(name) ? format_double(bounds.at(name).get<double>()) : "";
    out += fmt::format("{},{},{},{},{}\n", csv_field(run), csv_field(name), format_double(value.get<double>()), bound,
                       failed ? "false" : "true");
  }
  return out;
}

std::string spectra_csv(const json& report) {
  std::string out = "spectrum,index,value\n";
  for (const auto& [name, values] : report.at("spectra").items())
    for (std::size_t i = 0; i < values.size(); ++i)
      out += fmt::format("{},{},{}\n", csv_field(name), i, format_double(values[i].get<double>()));
  return out;
}

std::string plot_data(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += fmt::format("{} {}\n", i, format_double(values[i]));
  return out;
}

json families_json() {
  return json::array({
      {{"pipeline", "discrete"}, {"family", "krawtchouk"}, {"parameters", "p in (0,1), default 0.3; N >= 2; 0 <= J1, J2 <= N-1"}},
      {{"pipeline", "discrete"}, {"family", "hahn"}, {"parameters", "alpha, beta > -1, default 0; N >= 2; 0 <= J1, J2 <= N-1"}},
      {{"pipeline", "discrete"}, {"family", "anti_krawtchouk"}, {"parameters", "N >= 2 even; 0 <= J1, J2 <= N-1"}},
      {{"pipeline", "antikraw"}, {"family", "anti_krawtchouk"},
       {"parameters", "N >= 4 even; 1 <= N1, N2 <= N-2; ansatz penta|alternative|alternative_printed|bilinear"}},
      {{"pipeline", "contdisc"}, {"family", "hermite"}, {"parameters", "N >= 1; W real"}},
      {{"pipeline", "contdisc"}, {"family", "laguerre"}, {"parameters", "alpha <= 0, default 0; N >= 1; W > 0"}},
      {{"pipeline", "contdisc"}, {"family", "jacobi"}, {"parameters", "alpha, beta >= 0, default 0; N >= 1; -1 < W <= 1"}},
      {{"pipeline", "symbolic"}, {"family", "prolate"}, {"parameters", "T > 0; W > 0"}},
      {{"pipeline", "symbolic"}, {"family", "bessel"}, {"parameters", "G > 0; T > 0; nu >= 0, default 0"}},
      {{"pipeline", "symbolic"}, {"family", "tilde_d"}, {"parameters", "family and parameters as for contdisc"}},
      {{"pipeline", "verify-all"}, {"family", "-"}, {"parameters", "none"}},
  });
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Commuting operators for band-time limiting, built from algebraic Heun operators", "heunband"};
  app.require_subcommand(1);

  std::string config, out, format;
  std::vector<std::string> tol;

  auto* families = app.add_subcommand("families", "List families, pipelines and their parameters");
  families->add_option("--format", format, "json or csv (plain table when omitted)")
      ->check(CLI::IsMember({"json", "csv"}));

  auto* run = app.add_subcommand("run", "Run every configuration in a config file");
  run->add_option("--config", config, "JSON run or batch file")->required();
  run->add_option("--out", out, "Directory for reports (stdout when omitted)");
  run->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  run->add_option("--tol", tol, "Override a tolerance, name=value (repeatable)");

  auto* verify = app.add_subcommand("verify-all", "Run the full acceptance suite");
  verify->add_option("--out", out, "Directory for the report");
  verify->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  verify->add_option("--tol", tol, "Not accepted: the suite's tolerances are fixed");

  auto* exporter = app.add_subcommand("export", "Write the matrices of each configuration");
  exporter->add_option("--config", config, "JSON run or batch file")->required();
  exporter->add_option("--out", out, "Output directory")->required();
  exporter->add_option("--format", format, "Matrix format")->check(CLI::IsMember({"json", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  try {
    if (families->parsed()) return cmd_families(format);
    if (run->parsed()) return cmd_run(config, out, format.empty() ? "json" : format, tol, false);
    if (exporter->parsed()) return cmd_run(config, out, format.empty() ? "csv" : format, {}, true);
    if (!tol.empty()) throw ConfigError({"verify-all: tolerances are fixed by the suite and cannot be overridden"});
    return cmd_verify_all(out, format.empty() ? "json" : format);
  } catch (const ConfigError& e) {
    for (const auto& d : e.diagnostics()) std::cerr << "error: " << d << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_failure;
  }
}

}  // namespace heunband::cli
