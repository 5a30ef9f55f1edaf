// Acceptance criteria 1-9. `acceptance --criterion k` runs one; no argument runs all.
#include <chrono>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include <lfcheck/suites.hpp>

using namespace lfcheck;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> lines;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    lines.push_back(std::string(ok ? "ok   " : "MISS ") + what);
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string sci(const Scalar& x) { return to_short(x, 3); }

RunConfig config_for(Family f, const std::string& suite) {
  RunConfig c;
  c.family = f;
  c.suite = suite;
  return c;
}

const ResidualReport& need(const ReportList& list, const std::string& id, const std::string& variant = "") {
  const auto* r = find_report(list, id, variant);
  if (!r) throw std::runtime_error("missing report " + id + "[" + variant + "]");
  return *r;
}

/// max residual over rows lo..hi, and how many rows were in range
std::pair<Scalar, std::size_t> max_in(const ResidualReport& r, long lo, long hi) {
  Scalar m(0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < r.n.size(); ++i)
    if (r.n[i] >= lo && r.n[i] <= hi) {
      m = std::max(m, r.residual[i]);
      ++count;
    }
  return {m, count};
}

const Scalar& bound_30() {
  static const Scalar b("1e-30");
  return b;
}

Outcome criterion_1() {
  Outcome o;
  PrecisionContext ctx{512, 32};
  PrecisionScope scope(ctx);
  auto t0 = Clock::now();
  auto s = make_spec(Family::Charlier, "0", "0.5", "0", "1");
  auto mr = moment_route(s, 24, ctx);
  auto lf = lf_run(s, LFVariant::CharlierMain, seed_from_moments(mr.table, LFVariant::CharlierMain), mr.table.size(), ctx);
  auto d = route_difference(lf, mr.table, 15);
  Scalar m(0);
  for (const auto& x : d) m = std::max(m, x);
  double t = seconds_since(t0);
  o.check(d.size() == 16 && m <= bound_30(), "charlier-main vs moments, n<=15: max rel diff " + sci(m));
  o.check(t <= 30, "runtime " + std::to_string(t) + " s (limit 30)");
  return o;
}

Outcome criterion_2() {
  Outcome o;
  PrecisionContext ctx{512, 32};
  PrecisionScope scope(ctx);
  auto s = make_spec(Family::Charlier, "0", "0.5", "0", "1");
  auto mr = moment_route(s, 24, ctx);
  auto reports = lf_identities_suite(s, mr.table, ctx);
  const auto& sva = need(reports, "eq:smet_vanassche");
  o.check(sva.max_residual() <= bound_30(), "eq:smet_vanassche residual " + sci(sva.max_residual()));
  const auto& eq2 = need(reports, "eq:equation2");
  const auto& bg1 = need(reports, "eq:betgamma_charlier_1");
  const auto& cmp = need(reports, "eq:charlier_compatibility");
  const auto& bound = need(reports, "eq:equation2", "equivalence bound");
  o.check(bound.pass(), "eq:equation2 " + sci(eq2.max_residual()) + " <= 10 x max(" + sci(bg1.max_residual()) +
                            ", " + sci(cmp.max_residual()) + "), worst ratio " + sci(bound.max_residual()));
  return o;
}

Outcome criterion_3() {
  Outcome o;
  PrecisionContext ctx{512, 32};
  PrecisionScope scope(ctx);
  auto s = make_spec(Family::Meixner, "1", "0.3", "0", "0.7");
  auto mr = moment_route(s, 24, ctx);
  auto cf = meixner_a1_closed_form(s, mr.table.size());
  Scalar db(0), dg(0);
  for (std::size_t n = 0; n <= 15; ++n) {
    db = std::max(db, rel_diff(cf.beta[n], mr.table.beta[n]));
    dg = std::max(dg, rel_diff(cf.gamma[n], mr.table.gamma[n]));
  }
  o.check(db <= bound_30(), "beta_n - (n - b + eta), n<=15: " + sci(db));
  o.check(dg <= bound_30(), "gamma_n - n eta, n<=15: " + sci(dg));

  auto reports = lf_identity_residuals(s, mr.table, exact_identity_tolerance(ctx));
  for (auto [id, var] : std::vector<std::pair<std::string, std::string>>{
           {"eq:laguerre-freud-meixner-2", ""},
           {"eq:Meixner_Laguerre_Freud_step1", "corrected"},
           {"eq:Laguerre-Freud-Meixner1", ""}}) {
    const auto& r = need(reports, id, var);
    o.check(r.max_residual() <= bound_30(), id + (var.empty() ? "" : "[" + var + "]") + " at a=1: " + sci(r.max_residual()));
  }
  const auto& printed = need(reports, "eq:Meixner_Laguerre_Freud_step1", "printed");
  o.lines.push_back("info eq:Meixner_Laguerre_Freud_step1[printed] at a=1: " + sci(printed.max_residual()));

  // the SVA system needs a != 1
  auto s2 = make_spec(Family::Meixner, "2", "0.3", "0", "0.7");
  auto mr2 = moment_route(s2, 24, ctx);
  auto r2 = lf_identity_residuals(s2, mr2.table, exact_identity_tolerance(ctx));
  for (const char* id : {"smet_vanassche_meixner_3.2", "smet_vanassche_meixner_3.3"}) {
    const auto& r = need(r2, id);
    o.check(!r.n.empty() && r.max_residual() <= bound_30(), std::string(id) + " at a=2: " + sci(r.max_residual()));
  }
  auto lf = lf_run(s2, LFVariant::MeixnerSVA, seed_from_moments(mr2.table, LFVariant::MeixnerSVA), 16, ctx);
  auto d = route_difference(lf, mr2.table, 15);
  Scalar m(0);
  for (const auto& x : d) m = std::max(m, x);
  o.check(m <= bound_30(), "meixner-sva stepper vs moments at a=2, n<=15: " + sci(m));
  return o;
}

Outcome criterion_4() {
  Outcome o;
  auto t0 = Clock::now();
  for (Family f : {Family::Charlier, Family::Meixner, Family::HahnI}) {
    auto res = run_suites(config_for(f, "structure"));
    const std::string fam = family_name(f);
    const auto& two = need(res.reports, "eq:Psi", "two routes");
    o.check(two.n.size() >= 10 && two.max_residual() <= bound_30(),
            fam + " Psi two routes on " + std::to_string(two.n.size()) + " rows: " + sci(two.max_residual()));
    const auto& band = need(res.reports, "eq:Psi", "band");
    o.check(band.pass(), fam + " out-of-band entries: " + sci(band.max_residual()));
    const auto& cmp = need(res.reports, "eq:compatibility_Jacobi_structure_a");
    o.check(cmp.max_residual() <= bound_30(), fam + " [Psi H^-1, J] - Psi H^-1: " + sci(cmp.max_residual()));
    for (const char* v : {"theta", "sigma"}) {
      const auto& sh = need(res.reports, "eq:P_shift", v);
      o.check(!sh.n.empty() && sh.max_residual() <= Scalar("1e-28"),
              fam + " shift equation (" + v + ") over 6 sample points, " + std::to_string(sh.n.size()) +
                  " rows: " + sci(sh.max_residual()));
    }
  }
  double t = seconds_since(t0);
  o.check(t <= 60, "runtime " + std::to_string(t) + " s (limit 60)");
  return o;
}

Outcome criterion_5() {
  Outcome o;
  for (Family f : {Family::Charlier, Family::Meixner, Family::HahnI}) {
    auto res = run_suites(config_for(f, "toda"));
    const std::string fam = family_name(f);
    for (const char* part : {"beta", "gamma"}) {
      const auto& r = need(res.reports, "eq:Toda_system", part);
      const auto& c = need(res.reports, "eq:Toda_system", std::string(part) + " convergence");
      auto [rm, rn] = max_in(r, 0, 10);
      auto [cm, cn] = max_in(c, 0, 10);
      o.check(rm <= Scalar("1e-8") && r.n.back() >= 10, fam + " Toda " + part + " residual at h=2^-10, n<=10: " + sci(rm));
      o.check(cn == rn && cm <= Scalar(1) / 12,
              fam + " Toda " + part + " worst r(h/2)/r(h): " + sci(cm) + " (need <= 1/12)");
    }
  }
  return o;
}

Outcome criterion_6() {
  Outcome o;
  auto res = run_suites(config_for(Family::Charlier, "ode"));
  auto conv = [&](const std::string& id, const std::string& var) {
    const auto& r = need(res.reports, id, var.empty() ? "convergence" : var + " convergence");
    auto [m, k] = max_in(r, 1, 6);
    o.check(k == 6 && m <= Scalar(1) / 12, id + (var.empty() ? "" : "[" + var + "]") +
                                               " worst r(h/2)/r(h), n=1..6: " + sci(m) + " (order 4)");
  };
  conv("eq:Charlier_system_gamma_beta_1", "");
  conv("eq:Charlier_system_gamma_beta_2", "");
  conv("eq:ode_gamma_2", "");
  conv("eq:edo_Charlier_2", "corrected");
  const auto& printed = need(res.reports, "eq:edo_Charlier_2", "printed");
  o.lines.push_back("info eq:edo_Charlier_2 with the constant term as printed: residual " +
                    sci(printed.max_residual()) + ", does not converge");
  return o;
}

Outcome criterion_7() {
  Outcome o;
  RunConfig cfg = config_for(Family::HahnI, "lf-identities");
  cfg.a = "1.2";
  cfg.b = "0.7";
  cfg.c = "0.4";
  cfg.eta = "0.5";
  auto res = run_suites(cfg);
  auto table_check = [&](const std::string& id, const std::string& var) {
    const auto& r = need(res.reports, id, var);
    auto [m, k] = max_in(r, 0, 12);
    o.check(k > 0 && m <= bound_30(), id + (var.empty() ? "" : "[" + var + "]") + " n<=12: " + sci(m));
  };
  table_check("eq:Hahn_compatibility_1", "corrected");
  table_check("eq:Hahn_compatibility_2", "corrected");
  table_check("Dominici_1", "corrected u");
  table_check("Dominici_2", "corrected u");
  table_check("eq:Hahn1_p", "");
  for (const char* id : {"eq:Hahn_compatibility_1", "eq:Hahn_compatibility_2"})
    o.lines.push_back(std::string("info ") + id + "[printed]: " + sci(need(res.reports, id, "printed").max_residual()));

  cfg.suite = "ode";
  auto ode = run_suites(cfg);
  for (int k = 1; k <= 4; ++k) {
    std::string id = "eq:Hahn_compatibiliyII_" + std::to_string(k);
    const auto& r = need(ode.reports, id);
    const auto& c = need(ode.reports, id, "convergence");
    o.check(r.pass() && c.pass(), id + " residual " + sci(r.max_residual()) + ", worst r(h/2)/r(h) " +
                                      sci(c.max_residual()));
  }
  return o;
}

/// Every coefficient at 512 and 1024 bits.
Outcome criterion_8() {
  Outcome o;
  struct Point {
    Family f;
    const char *a, *b, *c, *eta;
    std::optional<LFVariant> lf;
  };
  const std::vector<Point> points = {{Family::Charlier, "0", "0.5", "0", "1", LFVariant::CharlierMain},
                                     {Family::Meixner, "1", "0.3", "0", "0.7", std::nullopt},
                                     {Family::HahnI, "1.2", "0.7", "0.4", "0.5", LFVariant::HahnCompat}};
  auto tables = [](const Point& p, unsigned bits) {
    PrecisionContext ctx{bits, 32};
    PrecisionScope scope(ctx);
    auto s = make_spec(p.f, p.a, p.b, p.c, p.eta);
    auto mr = moment_route(s, 24, ctx);
    std::vector<CoefficientTable> out{mr.table};
    if (p.lf) out.push_back(lf_run(s, *p.lf, seed_from_moments(mr.table, *p.lf), mr.table.size(), ctx));
    return out;
  };
  for (const auto& p : points) {
    auto lo = tables(p, 512);
    auto hi = tables(p, 1024);
    PrecisionScope scope(PrecisionContext{1024, 32});
    Scalar m(0);
    for (std::size_t k = 0; k < lo.size(); ++k) {
      const auto &x = lo[k], &y = hi[k];
      for (std::size_t n = 0; n < x.size(); ++n) {
        m = std::max({m, rel_diff(x.beta[n], y.beta[n]), rel_diff(x.gamma[n], y.gamma[n])});
        if (x.has_norms() && y.has_norms())
          m = std::max({m, rel_diff(x.H[n], y.H[n]), rel_diff(x.p1[n], y.p1[n])});
      }
    }
    o.check(m <= Scalar("1e-60"), std::string(family_name(p.f)) + " (" + std::to_string(lo.size()) +
                                      " tables, 23 rows) 512 vs 1024 bits: " + sci(m));
  }
  return o;
}

Outcome criterion_9() {
  Outcome o;
  const Scalar injected = ldexp(Scalar(1), -20);
  for (Family f : {Family::Charlier, Family::Meixner, Family::HahnI}) {
    RunConfig cfg = config_for(f, "all");
    cfg.sabotage = true;
    auto res = run_suites(cfg);
    std::set<std::string> failed;
    Scalar worst(0);
    for (const auto& r : res.reports)
      if (r.gating && !r.pass()) {
        failed.insert(r.key());
        if (r.identity == "eq:compatibility_Jacobi_structure_a") worst = r.max_residual();
      }
    const std::string fam = family_name(f);
    bool exact = failed == std::set<std::string>{"eq:compatibility_Jacobi_structure_a"};
    std::string names;
    for (const auto& k : failed) names += (names.empty() ? "" : ", ") + k;
    o.check(exact, fam + " flagged: {" + names + "}");
    Scalar ratio = worst / injected;
    o.check(ratio >= Scalar(0.25) && ratio <= 4,
            fam + " flagged residual " + sci(worst) + " vs injected 2^-20, ratio " + sci(ratio));
    o.check(exit_code(res) == 1, fam + " exit code " + std::to_string(exit_code(res)));
  }
  return o;
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> c = {
      {"route equivalence (Charlier)", criterion_1},
      {"Smet-Van Assche identity and equivalence bound", criterion_2},
      {"Meixner a=1 closed form and Meixner identities", criterion_3},
      {"structure matrices", criterion_4},
      {"Toda system by finite differences", criterion_5},
      {"Charlier ODEs", criterion_6},
      {"Hahn I relations", criterion_7},
      {"precision robustness", criterion_8},
      {"detector sanity", criterion_9},
  };
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      which.push_back(std::stoi(argv[++i]));
    } else {
      std::cerr << "usage: acceptance [--criterion k]...\n";
      return 2;
    }
  }
  if (which.empty())
    for (int k = 1; k <= 9; ++k) which.push_back(k);

  bool all = true;
  for (int k : which) {
    if (k < 1 || k > 9) {
      std::cerr << "criterion must be 1..9\n";
      return 2;
    }
    const auto& [title, fn] = criteria()[static_cast<std::size_t>(k - 1)];
    Outcome o;
    auto t0 = Clock::now();
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    std::ostringstream line;
    line << "criterion " << k << ": " << (o.pass ? "PASS" : "FAIL") << "  " << title << " ("
         << static_cast<int>(seconds_since(t0) * 1000) << " ms)";
    std::cout << line.str() << "\n";
    for (const auto& l : o.lines) std::cout << "    " << l << "\n";
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
