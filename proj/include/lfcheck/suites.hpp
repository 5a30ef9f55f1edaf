#pragma once

#include <chrono>
#include <map>
#include <optional>

#include "lf_engines.hpp"
#include "structure.hpp"
#include "toda_ode.hpp"

namespace lfcheck {

inline constexpr const char* tool_version = "0.1.0";

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class Route { Moments, LF, Both };
enum class Format { CSV, JSON };

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> v = {"pearson", "routes", "lf-identities", "structure",
                                             "toda", "ode", "all"};
  return v;
}

inline Route parse_route(const std::string& s) {
  if (s == "moments") return Route::Moments;
  if (s == "lf") return Route::LF;
  if (s == "both") return Route::Both;
  throw ConfigError("unknown route: " + s);
}

inline const char* route_name(Route r) {
  switch (r) {
    case Route::Moments: return "moments";
    case Route::LF: return "lf";
    case Route::Both: return "both";
  }
  return "?";
}

inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::CSV;
  if (s == "json") return Format::JSON;
  throw ConfigError("unknown format: " + s);
}

/// Parameters left unset take these.
inline std::array<std::string, 4> family_defaults(Family f) {
  switch (f) {
    case Family::Charlier: return {"0", "0.5", "0", "1"};
    case Family::Meixner: return {"2", "0.3", "0", "0.7"};
    case Family::HahnI: return {"1.2", "0.7", "0.4", "0.5"};
  }
  return {"0", "0", "0", "1"};
}

struct RunConfig {
  std::string command = "verify";
  Family family = Family::Charlier;
  std::optional<std::string> a, b, c, eta;
  std::optional<std::string> eta_min, eta_max;
  std::size_t eta_steps = 16;
  std::size_t n = 23;  // table rows; the moment section is n + 1
  unsigned prec_bits = 512;
  unsigned guard_bits = 32;
  Route route = Route::Moments;
  std::vector<std::string> variants;
  std::string suite = "all";
  std::string out;
  Format format = Format::JSON;
  bool sabotage = false;
  bool allow_hahn_eta_ge_one = false;
  bool timing = true;

  std::string param(int i) const {
    const std::optional<std::string>* p[] = {&a, &b, &c, &eta};
    return p[i]->value_or(family_defaults(family)[i]);
  }

  PrecisionContext precision() const {
    PrecisionContext ctx{prec_bits, guard_bits};
    try {
      ctx.validate();
    } catch (const NumericError& e) {
      throw ConfigError(e.what());
    }
    return ctx;
  }

  WeightSpec spec() const {
    PrecisionScope scope(precision());
    return make_spec(family, param(0), param(1), param(2), param(3), allow_hahn_eta_ge_one);
  }

  std::vector<LFVariant> lf_variants() const {
    std::vector<LFVariant> v;
    if (variants.empty()) {
      for (const auto& info : variant_catalog())
        if (info.family == family) v.push_back(info.id);
      return v;
    }
    for (const auto& name : variants) {
      LFVariant id;
      try {
        id = parse_variant(name);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      if (variant_info(id).family != family)
        throw ConfigError("variant " + name + " does not apply to family " + family_name(family));
      v.push_back(id);
    }
    return v;
  }

  /// Everything a computation depends on is checked here, before any work.
  void validate() const {
    precision();
    if (std::find(suite_names().begin(), suite_names().end(), suite) == suite_names().end())
      throw ConfigError("unknown suite: " + suite);
    if (n > 400) throw ConfigError("--n above 400 is not supported");
    spec();  // ParamError on a bad parameter domain
    lf_variants();
    if (command == "sweep") {
      if (!eta_min || !eta_max) throw ConfigError("sweep needs --eta-min and --eta-max");
      PrecisionScope scope(precision());
      if (eta_steps > 0) {
        Scalar lo = parse_scalar(*eta_min), hi = parse_scalar(*eta_max);
        if (hi < lo) throw ConfigError("--eta-max below --eta-min");
      }
    }
  }
};

/// Sampled eta values of a sweep, endpoints included.
inline std::vector<Scalar> sweep_etas(const RunConfig& cfg) {
  std::vector<Scalar> e;
  if (cfg.eta_steps == 0) return e;
  Scalar lo = parse_scalar(*cfg.eta_min), hi = parse_scalar(*cfg.eta_max);
  if (cfg.eta_steps == 1) return {lo};
  for (std::size_t k = 0; k < cfg.eta_steps; ++k) e.push_back(lo + (hi - lo) * k / (cfg.eta_steps - 1));
  return e;
}

struct SuiteResult {
  ReportList reports;
  std::map<std::string, std::size_t> truncation;  // summation indices actually used
  std::optional<std::string> breakdown;
};

/// 0 all gating reports pass, 1 some fail, 3 a numerical breakdown happened.
inline int exit_code(const SuiteResult& r) {
  if (r.breakdown) return 3;
  for (const auto& rep : r.reports)
    if (rep.gating && !rep.pass()) return 1;
  return 0;
}

namespace detail {

template <class F>
void timed(ReportList& out, F&& f) {
  auto t0 = std::chrono::steady_clock::now();
  std::size_t first = out.size();
  for (auto& r : f()) out.push_back(std::move(r));
  double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  std::size_t added = out.size() - first;
  for (std::size_t i = first; i < out.size(); ++i)
    if (out[i].runtime_ms == 0) out[i].runtime_ms = ms / static_cast<double>(added);
}

inline const Scalar fd_tolerance() {
  static const Scalar t("1e-8");
  return t;
}

}  // namespace detail

inline ReportList pearson_suite(const WeightSpec& s, const MomentTable& m, const PrecisionContext& ctx) {
  PrecisionScope scope(ctx);
  const std::string fam = family_name(s.family);
  ReportList out;

  auto r = make_report("eq:Pearson", "", fam, ctx.tolerance());
  auto res = pearson_residuals(s, weights_upto(s, 201));
  for (std::size_t k = 0; k < res.size(); ++k) r.add(static_cast<long>(k), res[k]);
  out.push_back(r);

  r = make_report("eq:first_moment", "hypergeometric series", fam, ctx.tolerance());
  r.add(0, rel_diff(m.rho[0], first_moment_series(s, ctx)));
  out.push_back(r);

  r = make_report("eq:moments", "positivity", fam, Scalar(0));
  for (std::size_t k = 0; k < m.rho.size(); ++k) r.add(static_cast<long>(k), m.rho[k] > 0 ? Scalar(0) : Scalar(1));
  out.push_back(r);

  r = make_report("eq:moments", "vartheta rho_0", fam, detail::fd_tolerance());
  r.note = "rho_1 against eta d/deta rho_0, 5-point stencil";
  auto fd = vartheta_rho(s, 1, ldexp(Scalar(1), -10), ctx);
  r.add(1, rel_diff(fd.value, m.rho[1]));
  out.push_back(r);
  return out;
}

inline ReportList routes_suite(const WeightSpec& s, const MomentRoute& mr, const std::vector<LFVariant>& variants,
                               const PrecisionContext& ctx, std::optional<std::string>& breakdown) {
  PrecisionScope scope(ctx);
  const std::string fam = family_name(s.family);
  const Scalar tol = exact_identity_tolerance(ctx);
  const CoefficientTable& t = mr.table;
  ReportList out;

  const std::size_t k_max = std::min<std::size_t>(12, t.size());
  auto hk = hankel_determinants(mr.moments, k_max);
  auto hr = hankel_route(hk);
  auto rH = make_report("eq:Wp_n", "", fam, tol);
  auto rp = make_report("pro:Hankel", "p1", fam, tol);
  rH.note = "H_k from Hankel determinants against the Cholesky pivots";
  for (std::size_t k = 0; k < hr.H.size() && k < t.size(); ++k) {
    rH.add(static_cast<long>(k), rel_diff(hr.H[k], t.H[k]));
    rp.add(static_cast<long>(k), rel_diff(hr.p1[k], t.p1[k]));
  }
  if (!hk.singular.empty()) rH.note += "; singular sections present";
  out.push_back(rH);
  out.push_back(rp);

  auto rt = make_report("eq:hankel_hyper2", "", fam, detail::fd_tolerance());
  rt.note = "Delta~_k against eta d/deta Delta_k";
  for (std::size_t k = 1; k <= 6 && k < hk.delta_tilde.size(); ++k) {
    auto fd = vartheta_delta(s, k, ldexp(Scalar(1), -10), ctx);
    rt.add(static_cast<long>(k), rel_diff(fd.value, hk.delta_tilde[k]));
  }
  out.push_back(rt);

  auto rs = make_report("eq:symmetry_J", "", fam, tol);
  BandedOperator JH = jacobi_matrix(t) * BandedOperator::diagonal(t.H);
  for (std::size_t i = 0; i + 1 < t.size(); ++i) rs.add(static_cast<long>(i), rel_diff(JH(i, i + 1), JH(i + 1, i)));
  out.push_back(rs);

  for (LFVariant v : variants) {
    const auto& info = variant_info(v);
    auto r = make_report("route:lf-vs-moments", info.name, fam, tol);
    r.note = info.order;
    if (v == LFVariant::MeixnerSVA && s.a == 1) {
      r.note = "skipped: the SVA variables are undefined at a = 1";
      out.push_back(r);
      continue;
    }
    try {
      auto lf = lf_run(s, v, seed_from_moments(t, v), t.size(), ctx);
      auto d = route_difference(lf, t, t.size() - 1);
      for (std::size_t n = 0; n < d.size(); ++n) r.add(static_cast<long>(n), d[n]);
    } catch (const BreakdownError& e) {
      r.note = e.what();
      r.add(static_cast<long>(e.index), Scalar(1));
      if (!breakdown) breakdown = std::string(info.name) + ": " + e.what();
    }
    out.push_back(r);
  }
  return out;
}

/// Table identities plus the equivalence bound and the a = 1 closed form.
inline ReportList lf_identities_suite(const WeightSpec& s, const CoefficientTable& t, const PrecisionContext& ctx) {
  PrecisionScope scope(ctx);
  const Scalar tol = exact_identity_tolerance(ctx);
  const std::string fam = family_name(s.family);
  ReportList out = lf_identity_residuals(s, t, tol);

  if (s.family == Family::Charlier) {
    // eq:equation2 follows from eq:betgamma_charlier_1 and the compatibility
    // relation; its residual should stay within 10x of theirs.
    const auto* eq2 = find_report(out, "eq:equation2");
    const auto* bg1 = find_report(out, "eq:betgamma_charlier_1");
    const auto* cmp = find_report(out, "eq:charlier_compatibility");
    Scalar inputs = std::max({bg1->max_residual(), cmp->max_residual(), ctx.tolerance()});
    auto r = make_report("eq:equation2", "equivalence bound", fam, Scalar(10));
    r.note = "residual / max input residual (eq:betgamma_charlier_1, eq:charlier_compatibility)";
    for (std::size_t i = 0; i < eq2->n.size(); ++i) r.add(eq2->n[i], eq2->residual[i] / inputs);
    out.push_back(r);
  }

  if (s.family == Family::Meixner && s.a == 1) {
    auto cf = meixner_a1_closed_form(s, t.size());
    auto rb = make_report("smet_vanassche_meixner_a1", "beta", fam, tol);
    auto rg = make_report("smet_vanassche_meixner_a1", "gamma", fam, tol);
    rb.note = rg.note = "closed form beta_n = n - b + eta, gamma_n = n eta against the moment route";
    for (std::size_t n = 0; n < t.size(); ++n) {
      rb.add(static_cast<long>(n), rel_diff(cf.beta[n], t.beta[n]));
      rg.add(static_cast<long>(n), rel_diff(cf.gamma[n], t.gamma[n]));
    }
    out.push_back(rb);
    out.push_back(rg);
  }
  return out;
}

/// Eta-grid section size: 16 covers n <= 10 with two rows to spare.
inline std::size_t eta_grid_section(const RunConfig& cfg) { return std::min<std::size_t>(cfg.n + 1, 16); }

inline SuiteResult run_suites(const RunConfig& cfg) {
  cfg.validate();
  const PrecisionContext ctx = cfg.precision();
  PrecisionScope scope(ctx);
  const WeightSpec s = cfg.spec();
  const std::string& suite = cfg.suite;
  auto wants = [&](const char* name) { return suite == "all" || suite == name; };
  SuiteResult res;

  const std::size_t N = cfg.n + 1;
  std::optional<MomentRoute> mr;
  auto moment_data = [&]() -> const MomentRoute& {
    if (!mr) {
      mr = moment_route(s, N, ctx);
      res.truncation["moments"] = mr->moments.truncation_index;
    }
    return *mr;
  };

  try {
    if (wants("pearson")) detail::timed(res.reports, [&] { return pearson_suite(s, moment_data().moments, ctx); });
    if (wants("routes"))
      detail::timed(res.reports,
                    [&] { return routes_suite(s, moment_data(), cfg.lf_variants(), ctx, res.breakdown); });
    if (wants("lf-identities"))
      detail::timed(res.reports, [&] { return lf_identities_suite(s, moment_data().table, ctx); });
    if (wants("structure")) {
      StructureOptions opt;
      opt.sabotage = cfg.sabotage;
      detail::timed(res.reports, [&] {
        const auto& m = moment_data();
        return structure_checks(s, m.factorization, m.table, exact_identity_tolerance(ctx), opt);
      });
    }
    if (wants("toda") || wants("ode")) {
      EtaOptions eo;
      eo.N = eta_grid_section(cfg);
      eo.n_max = std::min<long>(10, static_cast<long>(eo.N) - 4);
      auto grids = make_grid_pair(s, eo.N, eo.h_rel, ctx);
      res.truncation["eta_grid"] = grids.coarse.truncation;
      if (wants("toda")) {
        detail::timed(res.reports, [&] { return toda_residuals(grids, eo); });
        if (s.family == Family::Meixner && s.a == 1)
          detail::timed(res.reports, [&] { return meixner_a1_exact(s, eo.n_max, ctx); });
      }
      if (wants("ode")) {
        if (s.family == Family::Charlier)
          detail::timed(res.reports, [&] { return charlier_ode_residuals(grids, eo); });
        else
          detail::timed(res.reports, [&] { return meixner_hahn_eta_residuals(grids, eo); });
      }
    }
  } catch (const FactorizationError& e) {
    res.breakdown = e.what();
  }
  return res;
}

}  // namespace lfcheck
