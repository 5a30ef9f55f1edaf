#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include <lfcheck/report.hpp>

using namespace lfcheck;

namespace {

void write_output(const RunConfig& cfg, const std::string& text) {
  if (cfg.out.empty() || cfg.out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file: " + cfg.out);
  f << text;
}

int cmd_compute(const RunConfig& cfg) {
  const PrecisionContext ctx = cfg.precision();
  PrecisionScope scope(ctx);
  const WeightSpec s = cfg.spec();
  std::vector<CoefficientTable> tables;
  std::map<std::string, std::size_t> truncation;
  std::optional<std::size_t> breakdown;
  const auto variants = cfg.lf_variants();
  const LFVariant v = cfg.variants.empty() ? default_variant(s.family) : variants.front();
  const std::size_t seed_rows = std::max(variant_info(v).seed_beta, variant_info(v).seed_gamma);

  const bool want_lf = cfg.route != Route::Moments;
  const std::size_t N = std::max(cfg.n, want_lf ? seed_rows : std::size_t(0)) + 1;
  auto mr = moment_route(s, N, ctx);
  truncation["moments"] = mr.moments.truncation_index;
  CoefficientTable moments = mr.table;
  moments.beta.resize(std::min(moments.size(), cfg.n));
  moments.gamma.resize(moments.beta.size());
  moments.H.resize(moments.beta.size());
  moments.p1.resize(moments.beta.size());
  moments.p2.resize(moments.beta.size());

  int code = 0;
  if (cfg.route != Route::LF) tables.push_back(moments);
  if (want_lf && cfg.n > 0) {
    CoefficientTable lf;
    try {
      lf = lf_run(s, v, seed_from_moments(mr.table, v), cfg.n, ctx);
    } catch (const BreakdownError& e) {
      std::cerr << "lfcheck: " << e.what() << "\n";
      lf = e.partial;
      breakdown = e.index;
      code = 3;
    }
    fill_norms(lf, mr.moments.rho[0]);
    tables.push_back(lf);
  }
  write_output(cfg, cfg.format == Format::CSV ? tables_to_csv(tables, cfg.prec_bits)
                                              : tables_to_json(tables, cfg, truncation, breakdown));
  return code;
}

int cmd_verify(const RunConfig& cfg) {
  SuiteResult res = run_suites(cfg);
  write_output(cfg, cfg.format == Format::CSV ? reports_to_csv(res, cfg) : reports_to_json(res, cfg));
  std::size_t failed = 0, noted = 0;
  for (const auto& r : res.reports) {
    if (r.pass()) continue;
    if (r.gating) {
      ++failed;
      std::cerr << "FAIL " << r.family << " " << r.key() << " max=" << to_short(r.max_residual(), 4)
                << " tol=" << to_short(r.tolerance, 2) << "\n";
    } else {
      ++noted;
    }
  }
  if (res.breakdown) std::cerr << "lfcheck: breakdown: " << *res.breakdown << "\n";
  std::cerr << res.reports.size() << " reports, " << failed << " gating failures, " << noted
            << " non-gating failures\n";
  return exit_code(res);
}

int cmd_sweep(const RunConfig& cfg) {
  const PrecisionContext ctx = cfg.precision();
  PrecisionScope scope(ctx);
  const WeightSpec base = cfg.spec();
  const LFVariant v = cfg.variants.empty() ? default_variant(base.family) : cfg.lf_variants().front();
  std::ostringstream os;
  os << "eta,n,beta,gamma\n";
  int code = 0;
  for (const auto& eta : sweep_etas(cfg)) {
    const std::string eta_text = to_decimal(eta, cfg.prec_bits);
    try {
      WeightSpec s = base.with_eta(eta);
      CoefficientTable t;
      if (cfg.route == Route::LF) {
        std::size_t seed = std::max(variant_info(v).seed_beta, variant_info(v).seed_gamma);
        auto mr = moment_route(s, std::max(cfg.n, seed) + 1, ctx);
        t = lf_run(s, v, seed_from_moments(mr.table, v), cfg.n, ctx);
      } else {
        t = moment_route(s, cfg.n + 1, ctx).table;
      }
      for (std::size_t n = 0; n < t.size() && n < cfg.n; ++n)
        os << eta_text << "," << n << "," << to_decimal(t.beta[n], cfg.prec_bits) << ","
           << to_decimal(t.gamma[n], cfg.prec_bits) << "\n";
    } catch (const std::exception& e) {
      std::cerr << "lfcheck: sweep node eta=" << to_short(eta) << " failed: " << e.what() << "\n";
      code = 3;
    }
  }
  write_output(cfg, os.str());
  return code;
}

void add_common(CLI::App* app, RunConfig& cfg, std::string& family, std::string& route, std::string& format,
                std::string& variants, unsigned& prec) {
  app->add_option("--family", family, "charlier | meixner | hahn1")->required();
  app->add_option("--a", cfg.a, "parameter a");
  app->add_option("--b", cfg.b, "parameter b");
  app->add_option("--c", cfg.c, "parameter c");
  app->add_option("--eta", cfg.eta, "eta");
  app->add_option("--n", cfg.n, "number of table rows");
  app->add_option("--prec", prec, "working precision in bits (default 512 or LFCHECK_PREC_BITS)");
  app->add_option("--route", route, "moments | lf | both");
  app->add_option("--variant", variants, "comma separated LF variant ids");
  app->add_option("--out", cfg.out, "output path (default stdout)");
  app->add_option("--format", format, "csv | json");
  app->add_flag("--allow-hahn-eta-ge-one", cfg.allow_hahn_eta_ge_one, "accept eta >= 1 for hahn1");
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recursion coefficients and Laguerre-Freud identity checks for semiclassical discrete weights"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version);

  RunConfig cfg;
  std::string family, route = "moments", format, variants;
  unsigned prec = 0;

  auto* compute = app.add_subcommand("compute", "recursion coefficient table");
  add_common(compute, cfg, family, route, format, variants, prec);

  auto* verify = app.add_subcommand("verify", "run verification suites");
  add_common(verify, cfg, family, route, format, variants, prec);
  verify->add_option("--suite", cfg.suite, "pearson | routes | lf-identities | structure | toda | ode | all");
  verify->add_flag("--sabotage", cfg.sabotage, "corrupt one structure matrix entry (detector check)");
  verify->add_flag("--no-timing", [&cfg](std::int64_t) { cfg.timing = false; }, "write runtime_ms as 0");

  auto* sweep = app.add_subcommand("sweep", "beta, gamma over an eta range");
  add_common(sweep, cfg, family, route, format, variants, prec);
  sweep->add_option("--eta-min", cfg.eta_min, "first eta");
  sweep->add_option("--eta-max", cfg.eta_max, "last eta");
  sweep->add_option("--eta-steps", cfg.eta_steps, "number of eta nodes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    cfg.command = app.get_subcommands().front()->get_name();
    cfg.family = parse_family(family);
    cfg.route = parse_route(route);
    if (format.empty()) format = cfg.command == "verify" ? "json" : "csv";
    cfg.format = parse_format(format);
    cfg.variants = split_commas(variants);
    if (prec) {
      cfg.prec_bits = prec;
    } else {
      try {
        cfg.prec_bits = PrecisionContext::from_env().working_bits;
      } catch (const NumericError& e) {
        throw ConfigError(e.what());
      }
    }
    if (cfg.command == "sweep" && cfg.format != Format::CSV) throw ConfigError("sweep writes csv only");
    cfg.validate();

    if (cfg.command == "compute") return cmd_compute(cfg);
    if (cfg.command == "verify") return cmd_verify(cfg);
    return cmd_sweep(cfg);
  } catch (const BreakdownError& e) {
    std::cerr << "lfcheck: " << e.what() << "\n";
    return 3;
  } catch (const FactorizationError& e) {
    std::cerr << "lfcheck: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {  // ConfigError, ParamError
    std::cerr << "lfcheck: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "lfcheck: " << e.what() << "\n";
    return 3;
  }
}
