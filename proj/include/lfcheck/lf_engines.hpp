#pragma once

#include "chol_core.hpp"
#include "residuals.hpp"

namespace lfcheck {

enum class LFVariant { CharlierMain, CharlierSVA, MeixnerMain, MeixnerSVA, HahnCompat, HahnDominici };

struct VariantInfo {
  LFVariant id;
  const char* name;
  Family family;
  std::size_t seed_beta;   // beta_0 .. beta_{seed_beta-1}
  std::size_t seed_gamma;  // gamma_0 .. gamma_{seed_gamma-1}, gamma_0 = 0 included
  unsigned step_length;    // how far back a step reads
  const char* order;       // evaluation order inside one step
};

inline const std::vector<VariantInfo>& variant_catalog() {
  static const std::vector<VariantInfo> v = {
      {LFVariant::CharlierMain, "charlier-main", Family::Charlier, 1, 1, 2,
       "gamma_{n+1} from eq:equation2, then beta_{n+1} from eq:betgamma_charlier_1"},
      {LFVariant::CharlierSVA, "charlier-sva", Family::Charlier, 1, 1, 1,
       "gamma_{n+1} from eq:smet_vanassche, then beta_{n+1} from eq:betgamma_charlier_1"},
      {LFVariant::MeixnerMain, "meixner-main", Family::Meixner, 1, 1, 2,
       "gamma_{n+1} from eq:Laguerre-Freud-Meixner1, then beta_{n+1} from "
       "eq:Meixner_Laguerre_Freud_step1 (corrected)"},
      {LFVariant::MeixnerSVA, "meixner-sva", Family::Meixner, 1, 1, 1,
       "u_{n+1} from (3.2), then v_{n+1} from (3.3) at n+1"},
      {LFVariant::HahnCompat, "hahn1-compat", Family::HahnI, 2, 2, 2,
       "gamma_{n+2} from eq:Hahn_compatibility_2 at n, then beta_{n+2} from "
       "eq:Hahn_compatibility_1 at n+1 (corrected forms)"},
      {LFVariant::HahnDominici, "hahn1-dominici", Family::HahnI, 2, 2, 2,
       "gamma_{n+1} from the first Dominici relation, then beta_{n+1} from the second"},
  };
  return v;
}

inline const VariantInfo& variant_info(LFVariant id) {
  for (const auto& v : variant_catalog())
    if (v.id == id) return v;
  throw std::logic_error("unknown variant");
}

inline LFVariant parse_variant(const std::string& s) {
  for (const auto& v : variant_catalog())
    if (s == v.name) return v.id;
  throw std::invalid_argument("unknown LF variant: " + s);
}

inline LFVariant default_variant(Family f) {
  switch (f) {
    case Family::Charlier: return LFVariant::CharlierMain;
    case Family::Meixner: return LFVariant::MeixnerMain;
    case Family::HahnI: return LFVariant::HahnCompat;
  }
  return LFVariant::CharlierMain;
}

struct Seeds {
  DiagonalSeq beta;
  DiagonalSeq gamma;  // gamma[0] = 0
};

/// Exactly the initial data the variant reads, taken from a moment-route table.
inline Seeds seed_from_moments(const CoefficientTable& t, LFVariant v) {
  const auto& info = variant_info(v);
  if (t.size() < std::max(info.seed_beta, info.seed_gamma))
    throw std::invalid_argument("seed_from_moments: table too short");
  Seeds s;
  s.beta.assign(t.beta.begin(), t.beta.begin() + static_cast<long>(info.seed_beta));
  s.gamma.assign(t.gamma.begin(), t.gamma.begin() + static_cast<long>(info.seed_gamma));
  s.gamma[0] = 0;
  return s;
}

struct BreakdownError : NumericError {
  std::size_t index;
  CoefficientTable partial;
  BreakdownError(const std::string& msg, std::size_t n, CoefficientTable t)
      : NumericError(msg), index(n), partial(std::move(t)) {}
};

enum class Step1Form { Corrected, Printed };

struct StepOptions {
  Step1Form meixner_step1 = Step1Form::Corrected;
};

namespace detail {

/// Backwards-safe access with the beta_{-1} = gamma_{-1} = gamma_0 = 0 conventions.
inline Scalar at(const DiagonalSeq& d, long n) {
  return n < 0 ? Scalar(0) : d.at(static_cast<std::size_t>(n));
}

struct Breakdown {
  std::size_t index;
  std::string what;
};

inline void guard(const Scalar& x, const Scalar& tiny, std::size_t n, const char* what) {
  if (!isfinite(x) || abs(x) <= tiny) throw Breakdown{n, what};
}

}  // namespace detail

/// Meixner step1 right-hand side for beta_{n+1}.
inline Scalar meixner_step1(const WeightSpec& s, const Scalar& beta_n, const Scalar& gamma_n,
                            const Scalar& gamma_n1, long n, Step1Form form) {
  const Scalar &a = s.a, &b = s.b, &eta = s.eta;
  Scalar core = eta * (gamma_n + (beta_n + b - n) * beta_n - n * (b - a - n + 1));
  if (form == Step1Form::Printed)
    return (core + eta * (eta + 1) * (beta_n + a + n)) / gamma_n1 - beta_n - b + n + 1 + 2 * eta;
  return (core + eta * (1 - eta) * (beta_n + a + n)) / gamma_n1 - beta_n - b + n + 2 * eta;
}

/// One forward step: appends the next beta and gamma. `tiny` is the
/// breakdown threshold for divisors.
inline void lf_step(const WeightSpec& s, LFVariant v, DiagonalSeq& beta, DiagonalSeq& gamma,
                    const Scalar& tiny, const StepOptions& opt = {}) {
  using detail::at;
  using detail::guard;
  const Scalar &a = s.a, &b = s.b, &c = s.c, &eta = s.eta;
  switch (v) {
    case LFVariant::CharlierMain:
    case LFVariant::CharlierSVA: {
      const long n = static_cast<long>(beta.size()) - 1;
      const Scalar &bn = beta[n], &gn = gamma[n];
      Scalar g1;
      if (v == LFVariant::CharlierMain) {
        g1 = eta - gn - bn * bn - b * bn + at(gamma, n - 1) * gn / eta;
        if (n >= 1) {
          guard(gn, tiny, n, "gamma_n");
          g1 += eta * n * n / gn;
        }
      } else {
        guard(gn - eta, tiny, n, "gamma_n - eta");
        g1 = eta + eta * (bn - n) * (bn - n + b) / (gn - eta);
      }
      guard(g1, tiny, n + 1, "gamma_{n+1}");
      gamma.push_back(g1);
      beta.push_back(eta * (n + 1) / g1 - bn + n - b);
      return;
    }
    case LFVariant::MeixnerMain: {
      const long n = static_cast<long>(beta.size()) - 1;
      const Scalar &bn = beta[n], &gn = gamma[n];
      Scalar g1 = -gn - (bn + b - n) * bn + n * (b - a - n + 1) + eta * (bn + a + n) +
                  (at(beta, n - 1) + bn + b - n + 1 - eta) * gn / eta;
      guard(g1, tiny, n + 1, "gamma_{n+1}");
      gamma.push_back(g1);
      beta.push_back(meixner_step1(s, bn, gn, g1, n, opt.meixner_step1));
      return;
    }
    case LFVariant::MeixnerSVA: {
      if (a == 1) throw ParamError("meixner-sva auxiliary variables are singular at a = 1");
      const long n = static_cast<long>(beta.size()) - 1;
      const Scalar am1 = a - 1;
      auto u_of = [&](long k, const Scalar& g) { return (k * eta - g) / am1; };
      auto v_of = [&](long k, const Scalar& bk) { return (k + a - b - 1 + eta - bk) * eta / am1; };
      const Scalar un = u_of(n, gamma[n]), vn = v_of(n, beta[n]);
      const Scalar shift = eta * (a - b - 1) / am1;
      guard(un + vn, tiny, n, "u_n + v_n");
      Scalar u1 = am1 / (eta * eta) * vn * (vn - eta) * (vn - shift) / (un + vn) - vn;
      Scalar g1 = (n + 1) * eta - am1 * u1;
      guard(g1, tiny, n + 1, "gamma_{n+1}");
      Scalar pole = u1 - eta * (n + 1) / am1;
      guard(pole, tiny, n + 1, "u_{n+1} - eta(n+1)/(a-1)");
      guard(u1 + vn, tiny, n + 1, "u_{n+1} + v_n");
      Scalar v1 = u1 / pole * (u1 + eta) * (u1 + shift) / (u1 + vn) - u1;
      gamma.push_back(g1);
      beta.push_back((n + 1) + a - b - 1 + eta - am1 * v1 / eta);
      return;
    }
    case LFVariant::HahnCompat: {
      // state beta_0..beta_{n+1}, gamma_0..gamma_{n+1}
      const long n = static_cast<long>(beta.size()) - 2;
      guard(eta - 1, tiny, n + 2, "eta - 1");
      const Scalar &bn = beta[n], &bn1 = beta[n + 1], &gn = gamma[n], &gn1 = gamma[n + 1];
      Scalar rest = (eta + 1) * ((1 - n) * bn + (n + 1) * bn1) + (eta * (a + b) - c) * (bn1 - bn) +
                    eta * (a + b) + c;
      Scalar g2 = gn - bn1 * bn1 + bn * bn - n - rest / (eta - 1);
      guard(g2, tiny, n + 2, "gamma_{n+2}");
      const long m = n + 1;
      const Scalar &bm = bn1, &bm0 = bn, &gm = gn1, &gm1 = g2;
      Scalar r = (eta * eta - 1) * (bm * gm1 - (bm0 + bm) * gm) +
                 eta * (bm * (2 * bm + a + b + c) + 2 * (gm1 + gm) + m * (a + b - c + m - 1) + a * b) +
                 (eta + 1) * ((eta * (a + b) - c + (eta + 1) * m) * (gm1 - gm) + (eta + 1) * gm);
      gamma.push_back(g2);
      beta.push_back(-r / ((eta * eta - 1) * g2));
      return;
    }
    case LFVariant::HahnDominici: {
      const long n = static_cast<long>(beta.size()) - 1;
      guard(1 - eta, tiny, n + 1, "1 - eta");
      const Scalar bn = beta[n], bp = at(beta, n - 1);
      const Scalar gn = gamma[n], gp = at(gamma, n - 1);
      auto u = [&](long k, const Scalar& bk, const Scalar& bk1) { return bk + bk1 - k + c + 1; };
      auto w = [&](long k, const Scalar& bk, const Scalar& bk1) {
        return u(k, bk, bk1) - eta * (bk + bk1 + k - 1 + a + b);
      };
      const Scalar un = u(n, bn, bp), vn = bn + bp + n - 1 + a + b;
      Scalar g1 = gp + (eta * vn * (bn - bp + 1) - un * (bn - bp - 1)) / (1 - eta);
      guard(g1, tiny, n + 1, "gamma_{n+1}");
      Scalar rhs = un * (bn - bp - 1) + (g1 - gp);
      Scalar wm = n >= 1 ? w(n - 1, bp, at(beta, n - 2)) * gp : Scalar(0);
      // W_{n+1} = (1-eta)(beta_{n+1}+beta_n) - n + c - eta(n+a+b)
      Scalar wn1 = (rhs + 2 * w(n, bn, bp) * gn - wm) / g1;
      gamma.push_back(g1);
      beta.push_back((wn1 + n - c + eta * (n + a + b)) / (1 - eta) - bn);
      return;
    }
  }
}

/// Forward LF table with `rows` rows. Stops and reports on breakdown rather
/// than regularizing.
inline CoefficientTable lf_run(const WeightSpec& spec_in, LFVariant v, const Seeds& seeds,
                               std::size_t rows, const PrecisionContext& ctx,
                               const StepOptions& opt = {}) {
  const auto& info = variant_info(v);
  if (info.family != spec_in.family)
    throw ParamError(std::string("variant ") + info.name + " does not apply to family " +
                     family_name(spec_in.family));
  PrecisionScope scope(ctx);
  WeightSpec spec = reprecise(spec_in);
  CoefficientTable t;
  t.provenance = Provenance::LFRoute;
  t.variant = info.name;
  t.precision = ctx;
  DiagonalSeq beta = seeds.beta, gamma = seeds.gamma;
  for (auto& x : beta) x.precision(Scalar::default_precision());
  for (auto& x : gamma) x.precision(Scalar::default_precision());
  const Scalar tiny = ctx.tolerance();
  auto finish = [&](std::size_t r) {
    t.beta.assign(beta.begin(), beta.begin() + static_cast<long>(std::min(r, beta.size())));
    t.gamma.assign(gamma.begin(), gamma.begin() + static_cast<long>(std::min(r, gamma.size())));
    t.beta.resize(std::min(t.beta.size(), t.gamma.size()));
    t.gamma.resize(t.beta.size());
  };
  try {
    while (beta.size() < rows || gamma.size() < rows) lf_step(spec, v, beta, gamma, tiny, opt);
  } catch (const detail::Breakdown& e) {
    finish(rows);
    throw BreakdownError("LF breakdown at n=" + std::to_string(e.index) + " (" + e.what +
                             " vanishes)",
                         e.index, t);
  }
  finish(rows);
  return t;
}

/// Per-row max(rel diff beta, rel diff gamma) between two tables, rows 0..n_max.
inline std::vector<Scalar> route_difference(const CoefficientTable& x, const CoefficientTable& y,
                                            std::size_t n_max) {
  std::vector<Scalar> d;
  for (std::size_t n = 0; n <= n_max && n < x.size() && n < y.size(); ++n)
    d.push_back(std::max(rel_diff(x.beta[n], y.beta[n]), rel_diff(x.gamma[n], y.gamma[n])));
  return d;
}

/// First row where the tables differ by more than `threshold`, or size if none.
inline std::size_t first_divergence(const CoefficientTable& x, const CoefficientTable& y,
                                    const Scalar& threshold) {
  auto d = route_difference(x, y, std::min(x.size(), y.size()));
  for (std::size_t n = 0; n < d.size(); ++n)
    if (d[n] > threshold) return n;
  return d.size();
}

// ---------------------------------------------------------------------------
// Residual evaluators on a coefficient table.

namespace detail {

struct TableView {
  const CoefficientTable& t;
  Scalar B(long n) const { return t.b(n); }
  Scalar G(long n) const { return t.g(n); }
  Scalar P1(long n) const { return n < 0 ? Scalar(0) : t.p1.at(static_cast<std::size_t>(n)); }
  long L() const { return static_cast<long>(t.size()); }
};

}  // namespace detail

inline ReportList residual_charlier(const WeightSpec& s, const CoefficientTable& t, const Scalar& tol) {
  detail::TableView v{t};
  const Scalar &b = s.b, &eta = s.eta;
  const std::string fam = "charlier";
  const long L = v.L();
  auto B = [&](long n) { return v.B(n); };
  auto G = [&](long n) { return v.G(n); };
  ReportList out;

  auto r = make_report("eq:betgamma_charlier_1", "", fam, tol);
  for (long n = 0; n + 1 < L; ++n)
    r.add(n, balance({B(n + 1), -eta * (n + 1) / G(n + 1), B(n), Scalar(-n), b}));
  out.push_back(r);

  r = make_report("eq:equation2", "", fam, tol);
  for (long n = 0; n + 1 < L; ++n)
    r.add(n, balance({G(n + 1), -eta, G(n), B(n) * B(n), b * B(n), -G(n - 1) * G(n) / eta,
                      n ? Scalar(-eta * n * n / G(n)) : Scalar(0)}));
  out.push_back(r);

  r = make_report("eq:smet_vanassche", "", fam, tol);
  for (long n = 0; n + 1 < L; ++n)
    r.add(n, balance({(G(n + 1) - eta) * (G(n) - eta), -eta * (B(n) - n) * (B(n) - n + b)}));
  out.push_back(r);

  r = make_report("eq:charlier_compatibility", "", fam, tol);
  for (long n = 1; n + 1 < L; ++n)
    r.add(n, balance({n * eta * (B(n) - B(n - 1) - 1), (G(n + 1) - G(n - 1)) * G(n)}));
  out.push_back(r);

  r = make_report("eq:a dos pasos", "", fam, tol);
  r.note = "n >= 2";
  for (long n = 2; n < L; ++n)
    r.add(n, balance({B(n) - B(n - 2) - 1, -eta * n / G(n), eta * (n - 1) / G(n - 1)}));
  out.push_back(r);

  r = make_report("eq:gamma->beta_charlier", "", fam, tol);
  for (long n = 0; n + 1 < L; ++n) r.add(n, rel_diff(G(n + 1), eta * (n + 1) / (B(n + 1) + B(n) - n + b)));
  out.push_back(r);

  r = make_report("eq:nonrecursion_beta_charlier", "", fam, tol);
  for (long n = 1; n + 1 < L; ++n) {
    Scalar d0 = B(n + 1) + B(n) - n + b;
    Scalar d1 = B(n) + B(n - 1) - n + 1 + b;
    Scalar d2 = B(n - 1) + B(n - 2) - n + 2 + b;
    Scalar first = n >= 2 ? Scalar((n - 1) / d2) : Scalar(0);
    r.add(n, balance({eta * (n + 1) / d0, -eta, -(first - 1) * eta * n / d1, B(n) * B(n), b * B(n),
                      -n * d1}));
  }
  out.push_back(r);

  r = make_report("eq:charlier_subleading", "", fam, tol);
  if (t.p1.size() == t.size()) {
    for (long n = 0; n + 1 < L; ++n)
      r.add(n, balance({v.P1(n), -Scalar(n * (n + 1)) / 2, n * B(n), G(n) * G(n + 1) / eta}));
  } else {
    r.note = "skipped: table has no p1 column";
  }
  out.push_back(r);
  return out;
}

inline ReportList residual_meixner(const WeightSpec& s, const CoefficientTable& t, const Scalar& tol) {
  detail::TableView v{t};
  const Scalar &a = s.a, &b = s.b, &eta = s.eta;
  const std::string fam = "meixner";
  const long L = v.L();
  auto B = [&](long n) { return v.B(n); };
  auto G = [&](long n) { return v.G(n); };
  ReportList out;

  auto r = make_report("eq:laguerre-freud-meixner-2", "", fam, tol);
  for (long n = 0; n + 1 < L; ++n)
    r.add(n, balance({(B(n) + B(n + 1) + b - n - eta) * G(n + 1),
                      -(B(n - 1) + B(n) + b - n + 1 - eta) * G(n), -eta * (B(n) + a + n)}));
  out.push_back(r);

  // Two readings of the constant; neither is asserted.
  for (int k : {2, 1}) {
    r = make_report("eq:laguerre-freud-meixner-3", k == 2 ? "constant 2eta" : "constant eta", fam, tol,
                    false);
    r.note = "alternative constants compared, not asserted";
    for (long n = 0; n + 2 < L; ++n)
      r.add(n, balance({G(n + 2), -G(n), -k * eta, (B(n) + B(n + 1) + b - n - eta) * (B(n + 1) - B(n) - 1)}));
    out.push_back(r);
  }

  r = make_report("eq:Laguerre-Freud-Meixner1", "", fam, tol);
  for (long n = 0; n + 1 < L; ++n)
    r.add(n, balance({G(n + 1), G(n), (B(n) + b - n) * B(n), Scalar(-n * (b - a - n + 1)),
                      -eta * (B(n) + a + n), -(B(n - 1) + B(n) + b - n + 1 - eta) * G(n) / eta}));
  out.push_back(r);

  for (auto form : {Step1Form::Printed, Step1Form::Corrected}) {
    bool printed = form == Step1Form::Printed;
    r = make_report("eq:Meixner_Laguerre_Freud_step1", printed ? "printed" : "corrected", fam, tol, !printed);
    if (printed) r.note = "as printed: eta(eta+1) and +1; inconsistent with eq:Laguerre-Freud-Meixner1";
    for (long n = 0; n + 1 < L; ++n)
      r.add(n, rel_diff(B(n + 1), meixner_step1(s, B(n), G(n), G(n + 1), n, form)));
    out.push_back(r);
  }

  r = make_report("eq:Laguerre-Freud-Meixner3", "", fam, tol);
  if (t.p1.size() == t.size()) {
    for (long n = 0; n + 2 < L; ++n)
      r.add(n, balance({v.P1(n + 1), (B(n + 1) + B(n + 2) + b - n - 1 - eta) * G(n + 2) / eta, -B(n + 1),
                        -a * (n + 2), -Scalar((n + 2) * (n + 1)) / 2}));
  } else {
    r.note = "skipped: table has no p1 column";
  }
  out.push_back(r);

  r = make_report("eq:meixner_laguerre_freud_larga", "printed", fam, tol, false);
  r.note = "evaluated as printed; a systematic residual is reported, not patched";
  for (long n = 0; n + 4 < L; ++n) {
    auto Q = [&](long k, long shift) {  // eta^{-1}(beta_k+beta_{k+1}+b-n-shift-eta) gamma_{k+1} - (n+shift+1)(beta_k+a)
      return (B(k) + B(k + 1) + b - n - shift - eta) * G(k + 1) / eta - (n + shift + 1) * (B(k) + a);
    };
    r.add(n, balance({Scalar((n + 3) * (n + 2) * (n + 1)) * (B(n) - B(n + 2) + 1),
                      -(G(n + 3) / eta - n - 3) * G(n + 2), Scalar((n + 3) * (n + 2)) * Q(n + 1, 1),
                      -Scalar((n + 2) * (n + 1)) * Q(n + 3, 3), (-B(n + 2) + a - b) * Q(n + 2, 2),
                      (B(n + 2) + B(n + 3) + b - n - 3 - eta) * G(n + 3),
                      -(n + 3) * (G(n + 2) + B(n + 2) * B(n + 2) + b * B(n + 2)),
                      Scalar((n + 3) * (n + 2)) * (B(n + 1) + B(n + 2) + b)}));
  }
  out.push_back(r);

  auto r1 = make_report("smet_vanassche_meixner_3.2", "", fam, tol);
  auto r2 = make_report("smet_vanassche_meixner_3.3", "", fam, tol);
  if (a == 1) {
    r1.note = r2.note = "skipped: auxiliary variables singular at a = 1";
  } else {
    const Scalar am1 = a - 1, shift = eta * (a - b - 1) / am1;
    auto u = [&](long k) { return (k * eta - G(k)) / am1; };
    auto w = [&](long k) { return (k + a - b - 1 + eta - B(k)) * eta / am1; };
    for (long n = 0; n + 1 < L; ++n)
      r1.add(n, balance({(u(n) + w(n)) * (u(n + 1) + w(n)), -am1 / (eta * eta) * w(n) * (w(n) - eta) * (w(n) - shift)}));
    for (long n = 1; n < L; ++n)
      r2.add(n, balance({(u(n) + w(n)) * (u(n) + w(n - 1)),
                         -u(n) / (u(n) - eta * n / am1) * (u(n) + eta) * (u(n) + shift)}));
  }
  out.push_back(r1);
  out.push_back(r2);
  return out;
}

/// Second-difference-free Hahn identities. The eta-derivative ones live in toda_ode.
inline ReportList residual_hahn(const WeightSpec& s, const CoefficientTable& t, const Scalar& tol) {
  detail::TableView v{t};
  const Scalar &a = s.a, &b = s.b, &c = s.c, &eta = s.eta;
  const std::string fam = "hahn1";
  const long L = v.L();
  auto B = [&](long n) { return v.B(n); };
  auto G = [&](long n) { return v.G(n); };
  ReportList out;
  if (abs(eta + 1) <= tol) throw ParamError("eta = -1 makes the Hahn relations singular");

  for (bool printed : {true, false}) {
    auto r = make_report("eq:Hahn_compatibility_1", printed ? "printed" : "corrected", fam, tol, !printed);
    if (printed) r.note = "as printed: -(eta+1)n in the last bracket";
    const int sgn = printed ? -1 : 1;
    for (long n = 0; n + 1 < L; ++n)
      r.add(n, balance({(eta * eta - 1) * ((B(n + 1) + B(n)) * G(n + 1) - (B(n - 1) + B(n)) * G(n)),
                        eta * (B(n) * (2 * B(n) + a + b + c) + 2 * (G(n + 1) + G(n)) + n * (a + b - c + n - 1) + a * b),
                        (eta + 1) * ((eta * (a + b) - c + sgn * (eta + 1) * n) * (G(n + 1) - G(n)) + (eta + 1) * G(n))}));
    out.push_back(r);
  }
  for (bool printed : {true, false}) {
    auto r = make_report("eq:Hahn_compatibility_2", printed ? "printed" : "corrected", fam, tol, !printed);
    if (printed) r.note = "as printed: (n-1) beta_n";
    for (long n = 0; n + 2 < L; ++n) {
      Scalar first = printed ? Scalar((n - 1) * B(n)) : Scalar((1 - n) * B(n));
      r.add(n, balance({(eta + 1) * (first + (n + 1) * B(n + 1)),
                        (eta - 1) * (G(n + 2) - G(n) + B(n + 1) * B(n + 1) - B(n) * B(n) + n),
                        (eta * (a + b) - c) * (B(n + 1) - B(n)), eta * (a + b) + c}));
    }
    out.push_back(r);
  }

  auto r = make_report("eq:Hahn1_p", "", fam, tol);
  auto rpi = make_report("eq:Hahn1_pi", "", fam, tol);
  if (t.p1.size() == t.size()) {
    for (long n = 0; n + 3 < L; ++n) {
      Scalar tri = Scalar((n + 2) * (n + 1)) / 2;
      Scalar quad = G(n + 3) + G(n + 2) + B(n + 2) * B(n + 2);
      Scalar lin = eta * a * b + (eta * (a + b) - c) * B(n + 2) + (eta * (a + b) + c) * (n + 2);
      r.add(n, balance({v.P1(n + 1), -(n + 2) * B(n + 2), -B(n + 1), -(eta - 1) / (eta + 1) * (quad + tri),
                        -lin / (eta + 1)}));
      // pi^[2]_n from the table through the dressed Pascal formula
      Scalar pi2 = tri - (n + 1) * B(n + 1) - v.P1(n + 1);
      rpi.add(n, balance({pi2, -(Scalar((n + 2) * (n + 1)) - lin) / (1 + eta), -(1 - eta) / (1 + eta) * quad,
                          (n + 2) * (B(n + 2) + B(n + 1))}));
    }
  } else {
    r.note = rpi.note = "skipped: table has no p1 column";
  }
  out.push_back(r);
  out.push_back(rpi);

  // Dominici: printed u_n reads beta_{n+1}; the reading that holds uses beta_{n-1}.
  for (bool printed : {true, false}) {
    auto u = [&](long k) { return printed ? B(k) + B(k + 1) - k + c + 1 : B(k) + B(k - 1) - k + c + 1; };
    auto w = [&](long k) { return B(k) + B(k - 1) + k - 1 + a + b; };
    auto W = [&](long k) { return k < 0 ? Scalar(0) : Scalar(u(k) - eta * w(k)); };
    const std::string var = printed ? "printed u" : "corrected u";
    auto d1 = make_report("Dominici_1", var, fam, tol, !printed);
    auto d2 = make_report("Dominici_2", var, fam, tol, !printed);
    if (printed) d1.note = d2.note = "u_n = beta_n + beta_{n+1} - n + c + 1 as printed";
    else d1.note = d2.note = "u_n = beta_n + beta_{n-1} - n + c + 1";
    const long top = printed ? L - 2 : L - 1;
    for (long n = 1; n < top; ++n) {
      d1.add(n, balance({(1 - eta) * (G(n + 1) - G(n - 1)), -eta * w(n) * (B(n) - B(n - 1) + 1),
                         u(n) * (B(n) - B(n - 1) - 1)}));
      d2.add(n, balance({W(n + 1) * G(n + 1), -2 * W(n) * G(n), W(n - 1) * G(n - 1),
                         -u(n) * (B(n) - B(n - 1) - 1), -(G(n + 1) - G(n - 1))}));
    }
    out.push_back(d1);
    out.push_back(d2);
  }
  return out;
}

inline ReportList lf_identity_residuals(const WeightSpec& s, const CoefficientTable& t, const Scalar& tol) {
  switch (s.family) {
    case Family::Charlier: return residual_charlier(s, t, tol);
    case Family::Meixner: return residual_meixner(s, t, tol);
    case Family::HahnI: return residual_hahn(s, t, tol);
  }
  return {};
}

/// Meixner a = 1 closed form beta_n = n - b + eta, gamma_n = n eta.
inline CoefficientTable meixner_a1_closed_form(const WeightSpec& s, std::size_t rows) {
  CoefficientTable t;
  t.provenance = Provenance::LFRoute;
  t.variant = "meixner-a1-closed-form";
  for (std::size_t n = 0; n < rows; ++n) {
    t.beta.push_back(Scalar(n) - s.b + s.eta);
    t.gamma.push_back(Scalar(n) * s.eta);
  }
  return t;
}

}  // namespace lfcheck
