#pragma once

#include <array>
#include <chrono>
#include <functional>

#include "chol_core.hpp"
#include "residuals.hpp"

namespace lfcheck {

/// Truncated Taylor expansion in eps = eta - eta0: c[k] = f^(k)(eta0)/k!.
/// `valid` counts the leading coefficients that carry information; a
/// derivative drops one.
struct Jet {
  static constexpr int order = 4;
  std::array<Scalar, order> c{};
  int valid = order;

  Jet() {
    for (auto& x : c) x = 0;
  }
  Jet(const Scalar& v) : Jet() { c[0] = v; }
  Jet(int v) : Jet(Scalar(v)) {}
  Jet(long v) : Jet(Scalar(v)) {}

  static Jet variable(const Scalar& eta0) {
    Jet j(eta0);
    j.c[1] = 1;
    return j;
  }

  Scalar value() const {
    if (valid < 1) throw NumericError("stencil order unreachable with node count");
    return c[0];
  }

  Jet derivative() const {
    Jet d;
    for (int k = 0; k + 1 < order; ++k) d.c[k] = (k + 1) * c[k + 1];
    d.valid = valid - 1;
    return d;
  }

  Jet inverse() const {
    if (c[0] == 0) throw NumericError("jet inverse of zero");
    Jet r;
    r.valid = valid;
    r.c[0] = 1 / c[0];
    for (int k = 1; k < order; ++k) {
      Scalar s(0);
      for (int i = 1; i <= k; ++i) s += c[i] * r.c[k - i];
      r.c[k] = -s / c[0];
    }
    return r;
  }

  Jet& operator+=(const Jet& o) {
    for (int k = 0; k < order; ++k) c[k] += o.c[k];
    valid = std::min(valid, o.valid);
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (int k = 0; k < order; ++k) c[k] -= o.c[k];
    valid = std::min(valid, o.valid);
    return *this;
  }
  Jet operator-() const {
    Jet r = *this;
    for (auto& x : r.c) x = -x;
    return r;
  }
};

inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }

inline Jet operator*(const Jet& a, const Jet& b) {
  Jet r;
  for (int i = 0; i < Jet::order; ++i)
    for (int k = 0; i + k < Jet::order; ++k) r.c[i + k] += a.c[i] * b.c[k];
  r.valid = std::min(a.valid, b.valid);
  return r;
}

inline Jet operator/(const Jet& a, const Jet& b) { return a * b.inverse(); }

inline Jet log(const Jet& a) {
  if (!(a.c[0] > 0)) throw NumericError("jet log of non-positive value");
  Jet d = a.derivative() / a;
  Jet r;
  r.c[0] = log(a.c[0]);
  for (int k = 1; k < Jet::order; ++k) r.c[k] = d.c[k - 1] / k;
  r.valid = a.valid;
  return r;
}

/// eta d/deta at eta0.
inline Jet vartheta(const Jet& f, const Scalar& eta0) { return Jet::variable(eta0) * f.derivative(); }

enum class Quantity { Beta, Gamma, H, P1, LogH };

inline const DiagonalSeq& column(const CoefficientTable& t, Quantity q) {
  switch (q) {
    case Quantity::Beta: return t.beta;
    case Quantity::Gamma: return t.gamma;
    case Quantity::H: return t.H;
    case Quantity::P1: return t.p1;
    case Quantity::LogH: break;
  }
  return t.beta;
}

/// Moment-route tables at eta0 + k*step, |k| <= half_width, all summed to
/// the same truncation index.
struct EtaGrid {
  WeightSpec spec;
  Scalar eta0, step;
  int half_width = 3;
  std::size_t truncation = 0;
  PrecisionContext precision;
  std::vector<CoefficientTable> nodes;

  std::size_t rows() const { return nodes.empty() ? 0 : nodes.front().size(); }
  const CoefficientTable& at(int k) const { return nodes.at(static_cast<std::size_t>(k + half_width)); }

  /// Jet of a column entry from central stencils: 4th order in step for
  /// f', f'' (5 nodes) and f''' (7 nodes). LogH differences log H_n at the
  /// nodes; H_n itself spans too many orders of magnitude to stencil well.
  Jet jet(Quantity q, std::size_t n) const {
    PrecisionScope scope(precision);
    if (n >= rows()) throw std::out_of_range("EtaGrid::jet: n beyond table");
    auto f = [&](int k) -> Scalar {
      return q == Quantity::LogH ? Scalar(log(at(k).H.at(n))) : column(at(k), q).at(n);
    };
    const Scalar& h = step;
    Jet j(f(0));
    j.c[1] = (f(-2) - 8 * f(-1) + 8 * f(1) - f(2)) / (12 * h);
    j.c[2] = (-f(2) + 16 * f(1) - 30 * f(0) + 16 * f(-1) - f(-2)) / (24 * h * h);
    if (half_width >= 3) {
      j.c[3] = (-f(3) + 8 * f(2) - 13 * f(1) + 13 * f(-1) - 8 * f(-2) + f(-3)) / (48 * h * h * h);
    } else {
      j.c[3] = 0;
      j.valid = 3;
    }
    return j;
  }

  DiagonalSeq vartheta(Quantity q) const {
    DiagonalSeq out;
    for (std::size_t n = 0; n < rows(); ++n) out.push_back(lfcheck::vartheta(jet(q, n), eta0).value());
    return out;
  }
};

inline std::vector<Scalar> grid_etas(const Scalar& eta0, const Scalar& step, int half_width) {
  std::vector<Scalar> e;
  for (int k = -half_width; k <= half_width; ++k) e.push_back(eta0 + k * step);
  return e;
}

/// N is the moment section size (tables have N-1 rows). truncation = 0
/// means: take the largest index any node needs.
inline EtaGrid make_eta_grid(const WeightSpec& spec, std::size_t N, const Scalar& h_rel,
                             const PrecisionContext& ctx, int nodes = 7, std::size_t truncation = 0) {
  if (nodes != 5 && nodes != 7) throw std::invalid_argument("eta grid needs 5 or 7 nodes");
  PrecisionScope scope(ctx);
  EtaGrid g;
  g.spec = reprecise(spec);
  g.eta0 = g.spec.eta;
  g.step = h_rel * g.eta0;
  g.half_width = nodes / 2;
  g.precision = ctx;
  if (!(g.step > 0)) throw NumericError("finite-difference step must be positive");
  auto etas = grid_etas(g.eta0, g.step, g.half_width);
  std::vector<WeightSpec> specs;
  for (const auto& e : etas) specs.push_back(g.spec.with_eta(e));  // domain check for every node
  g.truncation = truncation ? truncation : shared_truncation(g.spec, etas, 2 * N - 1, ctx);
  MomentOptions opt;
  opt.force_terms = g.truncation;
  for (const auto& s : specs) g.nodes.push_back(moment_route(s, N, ctx, opt).table);
  return g;
}

/// Fine and coarse grids for step-halving, sharing one truncation index.
struct GridPair {
  EtaGrid coarse, fine;
};

inline GridPair make_grid_pair(const WeightSpec& spec, std::size_t N, const Scalar& h_rel,
                               const PrecisionContext& ctx) {
  PrecisionScope scope(ctx);
  WeightSpec s = reprecise(spec);
  Scalar step = h_rel * s.eta;
  auto etas = grid_etas(s.eta, step, 3);
  for (const auto& e : grid_etas(s.eta, step / 2, 3)) etas.push_back(e);
  std::size_t K = shared_truncation(s, etas, 2 * N - 1, ctx);
  return {make_eta_grid(s, N, h_rel, ctx, 7, K), make_eta_grid(s, N, h_rel / 2, ctx, 7, K)};
}

/// Where identity evaluators read beta_n, gamma_n, H_n, p1_n as jets.
struct JetSource {
  Scalar eta0;
  std::function<Jet(long)> beta_at, gamma_at, logH_at, p1_at;

  Jet B(long n) const { return n < 0 ? Jet(0) : beta_at(n); }
  Jet G(long n) const { return n <= 0 ? Jet(0) : gamma_at(n); }
  Jet E() const { return Jet::variable(eta0); }
  Jet th(const Jet& f) const { return vartheta(f, eta0); }
};

inline JetSource grid_source(const EtaGrid& g) {
  JetSource s;
  s.eta0 = g.eta0;
  auto q = [&g](Quantity which) {
    return [&g, which](long n) { return g.jet(which, static_cast<std::size_t>(n)); };
  };
  s.beta_at = q(Quantity::Beta);
  s.gamma_at = q(Quantity::Gamma);
  s.logH_at = q(Quantity::LogH);
  s.p1_at = q(Quantity::P1);
  return s;
}

/// beta_n = n - b + eta, gamma_n = n eta as exact jets (Meixner, a = 1).
inline JetSource meixner_a1_source(const WeightSpec& spec) {
  JetSource s;
  s.eta0 = spec.eta;
  Scalar b = spec.b, e = spec.eta;
  s.beta_at = [b, e](long n) { return Jet(Scalar(n) - b) + Jet::variable(e); };
  s.gamma_at = [e](long n) { return Jet(n) * Jet::variable(e); };
  return s;
}

struct EtaIdentity {
  std::string identity, variant;
  bool gating = true;
  long n_min = 0, n_max = 0;
  std::function<std::pair<Jet, Jet>(const JetSource&, long)> sides;
  std::string note;
};

inline Scalar side_residual(const std::pair<Jet, Jet>& lr) {
  Scalar l = lr.first.value(), r = lr.second.value();
  return abs(l - r) / std::max({Scalar(1), Scalar(abs(l)), Scalar(abs(r))});
}

inline std::vector<EtaIdentity> toda_identities(long n_max) {
  using P = std::pair<Jet, Jet>;
  std::vector<EtaIdentity> v;
  v.push_back({"eq:Toda_system", "beta", true, 0, n_max,
               [](const JetSource& s, long n) -> P { return {s.th(s.B(n)), s.G(n + 1) - s.G(n)}; }, ""});
  v.push_back({"eq:Toda_system", "gamma", true, 1, n_max,
               [](const JetSource& s, long n) -> P { return {s.th(log(s.G(n))), s.B(n) - s.B(n - 1)}; }, ""});
  v.push_back({"eq:Toda_equation_gamma", "", true, 1, n_max,
               [](const JetSource& s, long n) -> P {
                 return {s.th(s.th(log(s.G(n)))) + Jet(2) * s.G(n), s.G(n + 1) + s.G(n - 1)};
               },
               ""});
  v.push_back({"eq:Toda_equation", "", true, 1, n_max,
               [](const JetSource& s, long n) -> P {
                 // exp(q_{n+1}-q_n) = gamma_{n+1}
                 return {s.th(s.th(s.logH_at(n))), s.G(n + 1) - s.G(n)};
               },
               "q_n = log H_n"});
  v.push_back({"eq:equationsH", "", true, 0, n_max,
               [](const JetSource& s, long n) -> P { return {s.th(s.logH_at(n)), s.B(n)}; }, ""});
  v.push_back({"eq:equations", "p1", true, 1, n_max,
               [](const JetSource& s, long n) -> P { return {s.th(s.p1_at(n)), -s.G(n)}; }, ""});
  return v;
}

/// Constant term of the second order equation: printed, and halved.
inline std::vector<EtaIdentity> charlier_ode_identities(const WeightSpec& spec, long n_max) {
  using P = std::pair<Jet, Jet>;
  const Scalar b = spec.b;
  std::vector<EtaIdentity> v;
  v.push_back({"eq:Charlier_system_gamma_beta_1", "", true, 1, n_max,
               [b](const JetSource& s, long n) -> P {
                 Jet E = s.E(), Bn = s.B(n), Gn = s.G(n);
                 Jet num = E * (E + Jet(Scalar((b - n) * n)) + (Jet(Scalar(2 * n - b)) - Bn) * Bn - Gn);
                 return {s.th(Bn), num / (E - Gn) - Gn};
               },
               ""});
  v.push_back({"eq:Charlier_system_gamma_beta_2", "", true, 1, n_max,
               [b](const JetSource& s, long n) -> P {
                 Jet Gn = s.G(n);
                 return {s.th(Gn), (Jet(Scalar(b - n + 1)) + Jet(2) * s.B(n)) * Gn - Jet(n) * s.E()};
               },
               ""});
  v.push_back({"eq:eta_compatibility_charlier_1", "", true, 1, n_max,
               [](const JetSource& s, long n) -> P {
                 return {Jet(n) * s.th(s.E() / s.G(n)), s.G(n + 1) - s.G(n - 1)};
               },
               ""});
  v.push_back({"eq:eta_compatibility_charlier_2", "", true, 1, n_max,
               [](const JetSource& s, long n) -> P {
                 return {s.th(s.G(n) * s.G(n + 1) / s.E()), Jet(n + 1) * s.G(n) - Jet(n) * s.G(n + 1)};
               },
               ""});
  v.push_back({"eq:ode_gamma_2", "", true, 1, n_max,
               [](const JetSource& s, long n) -> P {
                 Jet E = s.E(), Gn = s.G(n);
                 Jet inner = Gn / E * (s.th(s.th(log(Gn))) + Jet(2) * Gn) + Jet(n * n) * E / Gn;
                 return {s.th(inner), Jet(2) * Gn};
               },
               ""});
  for (bool printed : {true, false}) {
    v.push_back({"eq:edo_Charlier_2", printed ? "printed" : "corrected", !printed, 1, n_max,
                 [b, printed](const JetSource& s, long n) -> P {
                   Jet E = s.E(), Gn = s.G(n);
                   Jet X = s.th(Gn) / Gn + Jet(n) * E / Gn;
                   Scalar C = (-b + n - 1) * (-b + 3 * n + 1);
                   if (!printed) C /= 2;
                   Jet lhs = (Jet(1) - Gn / E) * (s.th(X) + Jet(2) * Gn) +
                             Jet(2) * (Gn - E + Jet(Scalar((n - b) * n)));
                   Jet rhs = Jet(Scalar(-0.5)) * X * X + Jet(n + 1) * X + Jet(C);
                   return {lhs, rhs};
                 },
                 printed ? "constant term as printed" : "constant term halved"});
  }
  return v;
}

inline std::vector<EtaIdentity> meixner_eta_identities(const WeightSpec& spec, long n_max) {
  using P = std::pair<Jet, Jet>;
  const Scalar a = spec.a, b = spec.b;
  std::vector<EtaIdentity> v;
  v.push_back({"eq:1", "", true, 1, n_max,
               [](const JetSource& s, long n) -> P {
                 Jet EG = s.E() * s.G(n);
                 return {s.th(EG), EG * (s.B(n) - s.B(n - 1) + Jet(1))};
               },
               ""});
  v.push_back({"eq:2", "", true, 0, n_max,
               [b](const JetSource& s, long n) -> P {
                 return {s.th(s.B(n) + s.B(n + 1) + Jet(Scalar(b - n))), s.G(n + 2) - s.G(n)};
               },
               ""});
  v.push_back({"eq:3", "", true, 0, n_max,
               [a, b](const JetSource& s, long n) -> P {
                 Jet lhs = s.th(s.E() * (s.B(n) + Jet(Scalar(a + n))));
                 Jet rhs = s.G(n + 1) * (s.B(n) + s.B(n + 1) + Jet(Scalar(b - n))) -
                           s.G(n) * (s.B(n - 1) + s.B(n) + Jet(Scalar(b - n + 1)));
                 return {lhs, rhs};
               },
               ""});
  return v;
}

inline std::vector<EtaIdentity> hahn_eta_identities(const WeightSpec& spec, long n_max) {
  using P = std::pair<Jet, Jet>;
  const Scalar a = spec.a, b = spec.b, c = spec.c;
  std::vector<EtaIdentity> v;
  v.push_back({"eq:Hahn_compatibiliyII_1", "", true, 0, n_max,
               [c](const JetSource& s, long n) -> P {
                 return {s.th(s.B(n) + s.B(n + 1) + Jet(Scalar(c - n))), s.G(n + 2) - s.G(n)};
               },
               ""});
  v.push_back({"eq:Hahn_compatibiliyII_2", "", true, 0, n_max,
               [a, b, c](const JetSource& s, long n) -> P {
                 Jet E = s.E(), Bn = s.B(n);
                 Jet inner = Jet(2) * (s.G(n + 1) + s.G(n) + Bn * Bn) + Jet(c) * (Bn - Jet(n)) +
                             Jet(n * (n - 1)) + Jet(Scalar(a + b)) * (Bn + Jet(n)) + Jet(Scalar(a * b));
                 Jet rhs = s.G(n + 1) * (Bn + s.B(n + 1) + Jet(Scalar(c - n))) -
                           s.G(n) * (s.B(n - 1) + Bn + Jet(Scalar(c - n + 1)));
                 return {s.th(E / (E + Jet(1)) * inner), rhs};
               },
               ""});
  v.push_back({"eq:Hahn_compatibiliyII_3", "", true, 0, n_max,
               [a, b, c](const JetSource& s, long n) -> P {
                 Jet E = s.E(), Bn = s.B(n), Bn1 = s.B(n + 1), Gn1 = s.G(n + 1);
                 Jet lhs = s.th(E * Gn1 * (Jet(Scalar(n + a + b)) + Bn + Bn1));
                 Jet bracket = Jet(2) * (s.G(n + 2) - s.G(n) + Bn1 * Bn1 - Bn * Bn) +
                               Jet(Scalar(a + b + c)) * (Bn1 - Bn) + Jet(Scalar(2 * n + a + b - c));
                 return {lhs, E / (E + Jet(1)) * Gn1 * bracket};
               },
               ""});
  v.push_back({"eq:Hahn_compatibiliyII_4", "", true, 0, n_max,
               [](const JetSource& s, long n) -> P {
                 Jet EGG = s.E() * s.G(n + 1) * s.G(n + 2);
                 return {s.th(EGG), EGG * (s.B(n + 2) - s.B(n) + Jet(1))};
               },
               ""});
  return v;
}

struct EtaOptions {
  std::size_t N = 16;
  Scalar h_rel = ldexp(Scalar(1), -10);
  long n_max = 10;
  Scalar tolerance = Scalar("1e-8");
  Scalar contraction = Scalar(1) / 12;  // documented order 4: error / 16 per halving
};

/// n below which rounding, not the stencil, dominates and the halving ratio
/// means nothing.
inline Scalar convergence_floor(const PrecisionContext& ctx) {
  return ldexp(Scalar(1), -static_cast<int>(ctx.working_bits / 4));
}

/// Residual on the coarse grid plus a "convergence" report whose per-n entry
/// is r(h/2)/r(h).
inline ReportList evaluate_eta_identities(const std::vector<EtaIdentity>& ids, const GridPair& grids,
                                          const std::string& family, const EtaOptions& opt) {
  PrecisionScope scope(grids.coarse.precision);
  ReportList out;
  JetSource coarse = grid_source(grids.coarse), fine = grid_source(grids.fine);
  const Scalar floor = convergence_floor(grids.coarse.precision);
  // the identities reach two rows past n
  const long n_cap = static_cast<long>(grids.coarse.rows()) - 3;
  for (const auto& id : ids) {
    auto t0 = std::chrono::steady_clock::now();
    auto main = make_report(id.identity, id.variant, family, opt.tolerance, id.gating);
    auto conv = make_report(id.identity, id.variant.empty() ? "convergence" : id.variant + " convergence",
                            family, opt.contraction, id.gating);
    main.note = id.note;
    std::string skipped;
    for (long n = id.n_min; n <= std::min(id.n_max, n_cap); ++n) {
      Scalar rc = side_residual(id.sides(coarse, n));
      Scalar rf = side_residual(id.sides(fine, n));
      main.add(n, rc);
      if (rc < floor)
        skipped += (skipped.empty() ? "" : ",") + std::to_string(n);
      else
        conv.add(n, rf / rc);
    }
    if (!skipped.empty()) conv.note = "at rounding floor, no ratio: n=" + skipped;
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    main.runtime_ms = conv.runtime_ms = ms / 2;
    out.push_back(std::move(main));
    out.push_back(std::move(conv));
  }
  return out;
}

inline ReportList toda_residuals(const GridPair& grids, const EtaOptions& opt = {}) {
  std::string fam = family_name(grids.coarse.spec.family);
  ReportList out = evaluate_eta_identities(toda_identities(opt.n_max), grids, fam, opt);

  // The gamma equation follows from the two first-order ones; its residual
  // should stay within 3x of theirs.
  PrecisionScope scope(grids.coarse.precision);
  const auto* second = find_report(out, "eq:Toda_equation_gamma");
  const auto* rb = find_report(out, "eq:Toda_system", "beta");
  const auto* rg = find_report(out, "eq:Toda_system", "gamma");
  auto consistency = make_report("eq:Toda_equation_gamma", "consistency", fam, Scalar(3));
  consistency.note = "residual / max first-order residual at n-1, n";
  auto lookup = [](const ResidualReport* r, long n) {
    for (std::size_t i = 0; i < r->n.size(); ++i)
      if (r->n[i] == n) return r->residual[i];
    return Scalar(0);
  };
  for (std::size_t i = 0; i < second->n.size(); ++i) {
    long n = second->n[i];
    Scalar first = std::max({lookup(rb, n), lookup(rb, n - 1), lookup(rg, n), lookup(rg, n + 1)});
    if (first > 0) consistency.add(n, second->residual[i] / first);
  }
  out.push_back(std::move(consistency));
  return out;
}

inline ReportList charlier_ode_residuals(const GridPair& grids, const EtaOptions& opt = {}) {
  const auto& spec = grids.coarse.spec;
  if (spec.family != Family::Charlier) throw std::invalid_argument("charlier_ode_residuals: Charlier only");
  EtaOptions o = opt;
  o.n_max = std::min<long>(opt.n_max, 8);
  auto ids = charlier_ode_identities(spec, o.n_max);
  // (eta - gamma_n) sits in a denominator
  PrecisionScope scope(grids.coarse.precision);
  std::string flagged;
  for (long n = 1; n <= o.n_max && n < static_cast<long>(grids.coarse.rows()); ++n)
    if (abs(spec.eta - grids.coarse.at(0).gamma[n]) < Scalar("1e-6") * spec.eta)
      flagged += (flagged.empty() ? "" : ",") + std::to_string(n);
  if (!flagged.empty()) ids.front().note = "eta - gamma_n near zero at n=" + flagged;
  return evaluate_eta_identities(ids, grids, "charlier", o);
}

inline ReportList meixner_hahn_eta_residuals(const GridPair& grids, const EtaOptions& opt = {}) {
  const auto& spec = grids.coarse.spec;
  if (spec.family == Family::Meixner)
    return evaluate_eta_identities(meixner_eta_identities(spec, opt.n_max), grids, "meixner", opt);
  if (spec.family == Family::HahnI)
    return evaluate_eta_identities(hahn_eta_identities(spec, opt.n_max), grids, "hahn1", opt);
  throw std::invalid_argument("meixner_hahn_eta_residuals: Meixner or Hahn only");
}

/// Toda and Meixner identities on the a = 1 closed form with exact jets.
inline ReportList meixner_a1_exact(const WeightSpec& spec, long n_max, const PrecisionContext& ctx) {
  PrecisionScope scope(ctx);
  WeightSpec s = reprecise(spec);
  if (s.family != Family::Meixner || s.a != 1) throw std::invalid_argument("meixner_a1_exact: Meixner a = 1 only");
  JetSource src = meixner_a1_source(s);
  std::vector<EtaIdentity> ids;
  for (auto& id : toda_identities(n_max))
    if (id.identity == "eq:Toda_system" || id.identity == "eq:Toda_equation_gamma") ids.push_back(id);
  for (auto& id : meixner_eta_identities(s, n_max)) ids.push_back(id);
  ReportList out;
  for (const auto& id : ids) {
    auto r = make_report(id.identity, id.variant.empty() ? "closed form" : id.variant + " closed form",
                         "meixner", exact_identity_tolerance(ctx), id.gating);
    for (long n = id.n_min; n <= id.n_max; ++n) r.add(n, side_residual(id.sides(src, n)));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace lfcheck
