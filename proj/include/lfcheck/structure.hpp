#pragma once

#include "lf_engines.hpp"

namespace lfcheck {

struct PascalData {
  BandedOperator B, B_inv;    // binomial sections
  BandedOperator Pi, Pi_inv;  // S B S^{-1}, S B^{-1} S^{-1}
  // pi_plus[k-1]_n = Pi(n+k, n), pi_minus[k-1]_n = Pi^{-1}(n+k, n), k = 1..3
  std::vector<DiagonalSeq> pi_plus, pi_minus;
};

/// Lower Pascal matrix B_{nm} = C(n,m) and its inverse (-1)^{n+m} C(n,m).
inline PascalData build_pascal(std::size_t N) {
  if (N == 0) throw std::invalid_argument("build_pascal: N >= 1");
  PascalData p;
  p.B = BandedOperator(N, N - 1, 0);
  p.B_inv = BandedOperator(N, N - 1, 0);
  for (unsigned n = 0; n < N; ++n)
    for (unsigned m = 0; m <= n; ++m) {
      Scalar c = binomial(n, m);
      p.B.set(n, m, c);
      p.B_inv.set(n, m, (n + m) % 2 ? Scalar(-c) : c);
    }
  return p;
}

inline PascalData dress_pascal(const CholeskyFactorization& f, PascalData p) {
  PrecisionScope scope(f.precision);
  const std::size_t N = f.S.size();
  if (p.B.size() != N) p = build_pascal(N);
  p.Pi = f.S * p.B * f.S_inv;
  p.Pi_inv = f.S * p.B_inv * f.S_inv;
  p.pi_plus.clear();
  p.pi_minus.clear();
  for (long k = 1; k <= 3; ++k) {
    p.pi_plus.push_back(p.Pi.diag(-k));
    p.pi_minus.push_back(p.Pi_inv.diag(-k));
  }
  return p;
}

/// Psi with its band: `lower` subdiagonals (deg sigma), `upper` superdiagonals (deg theta).
struct StructureMatrix {
  BandedOperator Psi;
  std::size_t lower = 0, upper = 0;
  Family family = Family::Charlier;
  std::string route;

  /// psi^(k): k > 0 gives Psi(n, n+k), k < 0 gives Psi(n-k, n).
  DiagonalSeq diagonal(long k) const { return Psi.diag(k); }
};

struct PsiRoutes {
  StructureMatrix left;   // Pi^{-1} H theta(J^T)
  StructureMatrix right;  // sigma(J) H Pi^T
};

inline std::size_t sigma_degree(Family f) {
  switch (f) {
    case Family::Charlier: return 0;
    case Family::Meixner: return 1;
    case Family::HahnI: return 2;
  }
  return 0;
}

/// Both definitional products on the leading m x m block, m = table rows.
inline PsiRoutes build_psi_definitional(const WeightSpec& spec_in, const CholeskyFactorization& f,
                                        const CoefficientTable& t, const PascalData& p) {
  PrecisionScope scope(f.precision);
  const WeightSpec spec = reprecise(spec_in);
  const std::size_t m = t.size();
  BandedOperator J = jacobi_matrix(t);
  BandedOperator H = BandedOperator::diagonal(DiagonalSeq(t.H.begin(), t.H.begin() + static_cast<long>(m)));
  BandedOperator Pi = p.Pi.leading(m), Pi_inv = p.Pi_inv.leading(m);
  PsiRoutes r;
  r.left.Psi = Pi_inv * H * spec.pearson.theta(J.transpose());
  r.right.Psi = spec.pearson.sigma(J) * H * Pi.transpose();
  for (auto* s : {&r.left, &r.right}) {
    s->lower = sigma_degree(spec.family);
    s->upper = 2;
    s->family = spec.family;
  }
  r.left.route = "Pi^{-1} H theta(J^T)";
  r.right.route = "sigma(J) H Pi^T";
  return r;
}

/// Psi H^{-1} assembled from beta, gamma only (theorem displays). Rows/cols
/// below m - 3 are complete.
inline BandedOperator psi_hinv_closed_form(const WeightSpec& s, const CoefficientTable& t) {
  const std::size_t m = t.size();
  const std::size_t lo = sigma_degree(s.family);
  BandedOperator M(m, lo, 2);
  const Scalar &a = s.a, &b = s.b, &c = s.c, &eta = s.eta;
  auto B = [&](long n) { return t.b(n); };
  auto G = [&](long n) { return t.g(n); };
  for (std::size_t i = 0; i < m; ++i) {
    const long n = static_cast<long>(i);
    auto put = [&](long j, const Scalar& v) {
      if (j >= 0 && j < static_cast<long>(m)) M.set(i, static_cast<std::size_t>(j), v);
    };
    const bool has1 = i + 1 < m;
    switch (s.family) {
      case Family::Charlier:
        put(n, eta);
        if (has1) put(n + 1, (n + 1) * eta / G(n + 1));
        put(n + 2, Scalar(1));
        break;
      case Family::Meixner:
        if (n >= 1) put(n - 1, eta * G(n));
        put(n, eta * (B(n) + a + n));
        if (has1) put(n + 1, B(n) + B(n + 1) + b - n);
        put(n + 2, Scalar(1));
        break;
      case Family::HahnI:
        if (n >= 2) put(n - 2, eta * G(n - 1) * G(n));
        if (n >= 1) put(n - 1, eta * G(n) * (n - 1 + B(n - 1) + B(n) + a + b));
        if (has1) {
          put(n, eta / (eta + 1) *
                     (2 * (G(n) + G(n + 1) + B(n) * B(n)) + (a + b + c) * B(n) + a * b + n * (a + b - c) +
                      n * (n - 1)));
          put(n + 1, B(n) + B(n + 1) + c - n);
        }
        put(n + 2, Scalar(1));
        break;
    }
  }
  M.restrict_window(m > 2 ? m - 2 : 0);
  return M;
}

inline StructureMatrix build_psi_closed_form(const WeightSpec& s, const CoefficientTable& t) {
  if (!t.has_norms()) throw std::invalid_argument("closed-form Psi needs H in the table");
  if (t.size() < 4) throw std::invalid_argument("closed-form Psi needs at least 4 rows");
  StructureMatrix r;
  BandedOperator M = psi_hinv_closed_form(s, t);
  r.Psi = M * BandedOperator::diagonal(t.H);
  r.lower = sigma_degree(s.family);
  r.upper = 2;
  r.family = s.family;
  r.route = "closed form";
  return r;
}

namespace detail {

inline BandedOperator times_hinv(const BandedOperator& X, const DiagonalSeq& H) {
  DiagonalSeq inv;
  for (std::size_t i = 0; i < X.size(); ++i) inv.push_back(1 / H.at(i));
  return X * BandedOperator::diagonal(inv);
}

inline Scalar entry_scale(std::initializer_list<Scalar> xs) {
  Scalar m(1);
  for (const auto& x : xs) m = std::max(m, Scalar(abs(x)));
  return m;
}

}  // namespace detail

struct StructureOptions {
  bool sabotage = false;
  Scalar sabotage_delta = ldexp(Scalar(1), -20);
  std::size_t sabotage_row = 4;
  std::vector<std::string> z_samples = {"0", "0.5", "-0.5", "1", "-1", "1.6180339887498948482045868343656381177203091798057628621354486227"};
  std::size_t min_window = 10;
};

/// [M, J] - M with M = Psi H^{-1}; per-entry scale max(1, |MJ|, |JM|, |M|).
inline ResidualReport compatibility_residual(const BandedOperator& M, const BandedOperator& J,
                                             const std::string& fam, const Scalar& tol) {
  auto r = make_report("eq:compatibility_Jacobi_structure_a", "", fam, tol);
  BandedOperator MJ = M * J, JM = J * M;
  std::size_t w = std::min(MJ.window(), JM.window());
  r.note = "rows < " + std::to_string(w);
  for (std::size_t i = 0; i < w; ++i) {
    Scalar worst(0);
    for (std::size_t j = 0; j < w; ++j) {
      Scalar res = MJ(i, j) - JM(i, j) - M(i, j);
      worst = std::max(worst, Scalar(abs(res) / detail::entry_scale({MJ(i, j), JM(i, j), M(i, j)})));
    }
    r.add(static_cast<long>(i), worst);
  }
  return r;
}

/// [J, K] - K with K = Psi^T H^{-1}.
inline ResidualReport compatibility_residual_b(const BandedOperator& K, const BandedOperator& J,
                                               const std::string& fam, const Scalar& tol) {
  auto r = make_report("eq:compatibility_Jacobi_structure_b", "", fam, tol);
  BandedOperator KJ = K * J, JK = J * K;
  std::size_t w = std::min(KJ.window(), JK.window());
  for (std::size_t i = 0; i < w; ++i) {
    Scalar worst(0);
    for (std::size_t j = 0; j < w; ++j) {
      Scalar res = JK(i, j) - KJ(i, j) - K(i, j);
      worst = std::max(worst, Scalar(abs(res) / detail::entry_scale({KJ(i, j), JK(i, j), K(i, j)})));
    }
    r.add(static_cast<long>(i), worst);
  }
  return r;
}

/// theta(z) P(z-1) = Psi H^{-1} P(z) and sigma(z) P(z+1) = Psi^T H^{-1} P(z),
/// rows inside the window of the operator.
inline ReportList shift_equation_check(const WeightSpec& s, const CoefficientTable& t, const BandedOperator& M,
                                       const BandedOperator& K, const std::vector<Scalar>& zs,
                                       const std::string& fam, const Scalar& tol) {
  auto rt = make_report("eq:P_shift", "theta", fam, tol);
  auto rs = make_report("eq:P_shift", "sigma", fam, tol);
  const std::size_t m = t.size();
  for (const auto& z : zs) {
    DiagonalSeq P = polynomial_vector(t, m, z), Pm = polynomial_vector(t, m, z - 1),
                Pp = polynomial_vector(t, m, z + 1);
    const Scalar th = s.pearson.theta(z), sg = s.pearson.sigma(z);
    for (auto [op, lhs_vec, coef, rep] :
         {std::tuple{&M, &Pm, th, &rt}, std::tuple{&K, &Pp, sg, &rs}}) {
      const std::size_t w = std::min(op->window(), m - std::min(m, op->upper()));
      for (std::size_t n = 0; n < w; ++n) {
        Scalar rhs(0), mag(0);
        for (std::size_t k = 0; k < m; ++k) {
          if (!op->in_band(n, k)) continue;
          Scalar term = (*op)(n, k) * P[k];
          rhs += term;
          mag += abs(term);
        }
        Scalar lhs = coef * (*lhs_vec)[n];
        Scalar res = abs(lhs - rhs) / detail::entry_scale({lhs, mag});
        rep->add(static_cast<long>(n), res);
      }
    }
  }
  // per-n max over z samples
  for (auto* rep : {&rt, &rs}) {
    std::vector<long> ns;
    std::vector<Scalar> rr;
    for (std::size_t i = 0; i < rep->n.size(); ++i) {
      auto it = std::find(ns.begin(), ns.end(), rep->n[i]);
      if (it == ns.end()) {
        ns.push_back(rep->n[i]);
        rr.push_back(rep->residual[i]);
      } else {
        auto& slot = rr[static_cast<std::size_t>(it - ns.begin())];
        slot = std::max(slot, rep->residual[i]);
      }
    }
    rep->n = ns;
    rep->residual = rr;
    rep->note = std::to_string(zs.size()) + " sample points";
  }
  return {rt, rs};
}

/// Everything in the structure suite for one family.
inline ReportList structure_checks(const WeightSpec& spec_in, const CholeskyFactorization& f,
                                   const CoefficientTable& t, const Scalar& tol,
                                   const StructureOptions& opt = {}) {
  PrecisionScope scope(f.precision);
  const WeightSpec s = reprecise(spec_in);
  const std::string fam = family_name(s.family);
  const std::size_t m = t.size();
  ReportList out;
  if (t.p1.size() != m || t.p2.size() != m) throw std::invalid_argument("structure checks need p1, p2");

  // Inverse of S in terms of its subdiagonals.
  {
    auto r = make_report("pro:Sinv", "", fam, tol);
    const BandedOperator &S = f.S, &L = f.S_inv;
    auto s1 = [&](std::size_t n) { return S(n + 1, n); };
    auto s2 = [&](std::size_t n) { return S(n + 2, n); };
    auto s3 = [&](std::size_t n) { return S(n + 3, n); };
    for (std::size_t n = 0; n + 5 < S.size(); ++n) {
      Scalar e1 = rel_diff(L(n + 1, n), -s1(n));
      Scalar e2 = rel_diff(L(n + 2, n), -s2(n) + s1(n + 1) * s1(n));
      Scalar e3 = rel_diff(L(n + 3, n), -s3(n) + s2(n + 1) * s1(n) + s1(n + 2) * s2(n) -
                                            s1(n + 2) * s1(n + 1) * s1(n));
      r.add(static_cast<long>(n), std::max({e1, e2, e3}));
    }
    out.push_back(r);
  }

  PascalData pd = dress_pascal(f, build_pascal(f.S.size()));
  auto P1 = [&](std::size_t n) { return t.p1.at(n); };
  auto P2 = [&](std::size_t n) { return t.p2.at(n); };
  auto B = [&](long n) { return t.b(n); };

  // Dressed Pascal coefficients.
  {
    auto r = make_report("eq:pis", "", fam, tol);
    auto r3p = make_report("eq:piss", "printed", fam, tol, false);
    r3p.note = "leading term (n+3)(n+2)(n+1)/3 as printed";
    auto r3 = make_report("eq:piss", "corrected", fam, tol);
    r3.note = "leading term (n+3)(n+2)(n+1)/6";
    auto rs = make_report("eq:pis2", "", fam, tol);
    for (std::size_t n = 0; n + 3 < m; ++n) {
      const Scalar nn(n);
      Scalar tri = (nn + 2) * (nn + 1) / 2;
      Scalar e = std::max(rel_diff(pd.pi_plus[0][n], nn + 1), rel_diff(pd.pi_minus[0][n], -(nn + 1)));
      e = std::max(e, rel_diff(pd.pi_plus[1][n], tri - (nn + 1) * B(n + 1) - P1(n + 1)));
      e = std::max(e, rel_diff(pd.pi_minus[1][n], tri + (nn + 1) * B(n + 1) + P1(n + 1)));
      // the p1_{n+2}, p1_{n+1} form of the same coefficient
      e = std::max(e, rel_diff(pd.pi_plus[1][n], tri + P1(n + 2) * (nn + 1) - (nn + 2) * P1(n + 1)));
      r.add(static_cast<long>(n), e);

      Scalar cube = (nn + 3) * (nn + 2) * (nn + 1) / 6;
      Scalar even = tri * P1(n + 3) - (nn + 3) * (nn + 2) / 2 * P1(n + 1);
      Scalar odd = (nn + 1) * P2(n + 3) - (nn + 3) * P2(n + 2) + (nn + 3) * P1(n + 2) * P1(n + 1) -
                   (nn + 2) * P1(n + 3) * P1(n + 1);
      for (int k : {2, 1}) {
        auto& rep = k == 2 ? r3p : r3;
        rep.add(static_cast<long>(n), std::max(rel_diff(pd.pi_plus[2][n], k * cube + even + odd),
                                               rel_diff(pd.pi_minus[2][n], -k * cube + even - odd)));
      }

      Scalar d2 = tri, d2next = (nn + 3) * (nn + 2) / 2;
      Scalar s3 = 2 * (P1(n + 3) * d2 - d2next * P1(n + 1));
      rs.add(static_cast<long>(n), std::max({balance({pd.pi_plus[0][n], pd.pi_minus[0][n]}),
                                             rel_diff(pd.pi_plus[1][n] + pd.pi_minus[1][n], 2 * d2),
                                             rel_diff(pd.pi_plus[2][n] + pd.pi_minus[2][n], s3)}));
    }
    out.push_back(r);
    out.push_back(r3p);
    out.push_back(r3);
    out.push_back(rs);
  }

  std::vector<Scalar> zs;
  for (const auto& z : opt.z_samples) zs.push_back(parse_scalar(z));

  // P(z+1) = Pi P(z), P(z-1) = Pi^{-1} P(z)
  {
    auto r = make_report("eq:PascalP", "", fam, tol);
    for (const auto& z : zs) {
      DiagonalSeq P = polynomial_vector(t, m, z), Pp = polynomial_vector(t, m, z + 1),
                  Pm = polynomial_vector(t, m, z - 1);
      for (std::size_t n = 0; n < m; ++n) {
        Scalar up(0), dn(0), mag_up(0), mag_dn(0);
        for (std::size_t k = 0; k <= n; ++k) {
          up += pd.Pi(n, k) * P[k];
          dn += pd.Pi_inv(n, k) * P[k];
          mag_up += abs(pd.Pi(n, k) * P[k]);
          mag_dn += abs(pd.Pi_inv(n, k) * P[k]);
        }
        r.add(static_cast<long>(n), std::max(abs(up - Pp[n]) / detail::entry_scale({mag_up, Pp[n]}),
                                             abs(dn - Pm[n]) / detail::entry_scale({mag_dn, Pm[n]})));
      }
    }
    out.push_back(r);
  }

  // Psi by two products, and by the closed form.
  PsiRoutes routes = build_psi_definitional(s, f, t, pd);
  DiagonalSeq Hm(t.H.begin(), t.H.begin() + static_cast<long>(m));
  BandedOperator M_left = detail::times_hinv(routes.left.Psi, Hm);
  BandedOperator M_right = detail::times_hinv(routes.right.Psi, Hm);
  const std::size_t w = std::min(M_left.window(), M_right.window());
  {
    auto r = make_report("eq:Psi", "two routes", fam, tol);
    r.note = "Psi H^{-1} compared on " + std::to_string(w) + " x " + std::to_string(w);
    if (w < opt.min_window) r.note += "; window below the required " + std::to_string(opt.min_window);
    for (std::size_t i = 0; i < w; ++i) {
      Scalar e(0);
      for (std::size_t j = 0; j < w; ++j) e = std::max(e, rel_diff(M_left(i, j), M_right(i, j)));
      r.add(static_cast<long>(i), e);
    }
    if (w < opt.min_window) r.add(-1, Scalar(1));
    out.push_back(r);
  }
  {
    auto r = make_report("eq:Psi", "band", fam, tol);
    r.note = std::to_string(routes.left.lower) + " sub, 2 super";
    for (std::size_t i = 0; i < w; ++i) {
      Scalar row(1), out_of_band(0);
      for (std::size_t j = 0; j < w; ++j) {
        bool inside = (i >= j) ? (i - j <= routes.left.lower) : (j - i <= 2);
        for (const auto* X : {&M_left, &M_right}) {
          if (inside) row = std::max(row, Scalar(abs((*X)(i, j))));
          else out_of_band = std::max(out_of_band, Scalar(abs((*X)(i, j))));
        }
      }
      r.add(static_cast<long>(i), out_of_band / row);
    }
    out.push_back(r);
  }
  {
    // lowest subdiagonal eta H_n prod gamma_{n+1..n+M}; highest superdiagonal H_n gamma_{n+1} gamma_{n+2}
    auto r = make_report("eq:diagonals_Psi", "", fam, tol);
    const std::size_t lo = routes.left.lower;
    for (std::size_t n = 0; n + lo < w && n + 2 < w; ++n) {
      Scalar low = s.eta, high(1);
      for (std::size_t k = 1; k <= lo; ++k) low *= t.gamma[n + k];
      for (std::size_t k = 1; k <= 2; ++k) high *= t.gamma[n + k];
      // divided by the column's H
      Scalar e = std::max(rel_diff(M_left(n + lo, n), low), rel_diff(M_left(n, n + 2), high * t.H[n] / t.H[n + 2]));
      e = std::max(e, rel_diff(M_right(n + lo, n), low));
      r.add(static_cast<long>(n), e);
    }
    out.push_back(r);
  }
  BandedOperator M_closed = psi_hinv_closed_form(s, t);
  {
    const char* id = s.family == Family::Charlier  ? "teo:generalized Charlier"
                     : s.family == Family::Meixner ? "teo:generalized Meixner"
                                                   : "teo:Hahn";
    auto r = make_report(id, "closed form", fam, tol);
    const std::size_t wc = std::min(w, M_closed.window());
    for (std::size_t i = 0; i < wc; ++i) {
      Scalar e(0);
      for (std::size_t j = 0; j < wc; ++j) e = std::max(e, rel_diff(M_left(i, j), M_closed(i, j)));
      r.add(static_cast<long>(i), e);
    }
    out.push_back(r);
  }
  if (s.family == Family::HahnI) {
    // main diagonal read off the display pattern, with pi^[2]_{-1} = pi^[2]_{-2} = 0
    auto r = make_report("eq:Laguerre-Freud-Hahn-structure", "main diagonal", fam, tol);
    const Scalar &a = s.a, &b = s.b, &eta = s.eta;
    auto pi2 = [&](long k) {
      return k < 0 ? Scalar(0) : Scalar(pd.pi_plus[1][static_cast<std::size_t>(k)]);
    };
    for (std::size_t i = 0; i < w; ++i) {
      const long n = static_cast<long>(i);
      Scalar d = eta * (t.g(n) + t.g(n + 1) + (B(n) + a) * (B(n) + b) + n * (B(n - 1) + B(n) + a + b) + pi2(n - 2));
      r.add(n, rel_diff(M_left(i, i), d));
    }
    out.push_back(r);
  }

  // From here on Psi H^{-1} is used with its declared band; the band report
  // above covers what is dropped.
  M_left = M_left.clip_band(routes.left.lower, 2);
  BandedOperator J = jacobi_matrix(t);
  {
    BandedOperator M_compat = M_left;
    if (opt.sabotage) {
      const std::size_t i = opt.sabotage_row;
      if (i + 2 >= M_compat.window()) throw std::invalid_argument("sabotage row outside window");
      M_compat.set(i, i + 2, M_compat(i, i + 2) * (1 + opt.sabotage_delta));
    }
    auto r = compatibility_residual(M_compat, J, fam, tol);
    if (opt.sabotage)
      r.note += "; sabotaged entry (" + std::to_string(opt.sabotage_row) + "," +
                std::to_string(opt.sabotage_row + 2) + ") x (1+" + to_short(opt.sabotage_delta, 4) + ")";
    out.push_back(r);
  }
  BandedOperator K =
      detail::times_hinv(routes.left.Psi.clip_band(routes.left.lower, 2).transpose(), Hm);
  out.push_back(compatibility_residual_b(K, J, fam, tol));

  {
    std::vector<Scalar> zz = zs;
    // theta roots
    zz.push_back(Scalar(0));
    zz.push_back(s.family == Family::HahnI ? Scalar(-s.c) : Scalar(-s.b));
    for (auto& r : shift_equation_check(s, t, M_left, K, zz, fam, tol)) out.push_back(r);
  }

  if (s.family == Family::Charlier) {
    const Scalar &b = s.b, &eta = s.eta;
    {
      auto r = make_report("eq:Pascal_Charlier", "", fam, tol);
      r.note = "second subdiagonal read as gamma_{n+1} gamma_{n+2}/eta (matrix display)";
      for (std::size_t n = 0; n + 2 < m; ++n) {
        Scalar e = std::max(rel_diff(pd.Pi(n + 1, n), Scalar(n + 1)),
                            rel_diff(pd.Pi(n + 2, n), t.gamma[n + 1] * t.gamma[n + 2] / eta));
        for (std::size_t k = n + 3; k < m; ++k) e = std::max(e, Scalar(abs(pd.Pi(k, n))));
        r.add(static_cast<long>(n), e);
      }
      out.push_back(r);
    }
    {
      // J^2 + bJ = eta Pi H Pi^T H^{-1}
      auto r = make_report("eq:Pascal_Jacobi_Charlier", "", fam, tol);
      BandedOperator lhs = J * J + b * J;
      BandedOperator Pi = pd.Pi.leading(m);
      BandedOperator rhs = detail::times_hinv(Pi * BandedOperator::diagonal(Hm) * Pi.transpose(), Hm);
      rhs.scale(eta);
      const std::size_t ww = std::min(lhs.window(), rhs.window());
      for (std::size_t i = 0; i < ww; ++i) {
        Scalar e(0);
        for (std::size_t j = 0; j < ww; ++j) e = std::max(e, rel_diff(lhs(i, j), rhs(i, j)));
        r.add(static_cast<long>(i), e);
      }
      out.push_back(r);
    }
    {
      // LDL^T of H theta(J^T) has L = Pi and D = H.
      auto r = make_report("eq:Pascal_Chirstoffel", "", fam, tol);
      BandedOperator X = BandedOperator::diagonal(Hm) * s.pearson.theta(J.transpose());
      const std::size_t ww = X.window();
      BandedOperator Lx(ww, ww ? ww - 1 : 0, 0);
      DiagonalSeq D(ww);
      for (std::size_t j = 0; j < ww; ++j) {
        Scalar d = X(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= Lx(j, k) * Lx(j, k) * D[k];
        D[j] = d;
        Lx.set(j, j, Scalar(1));
        for (std::size_t i = j + 1; i < ww; ++i) {
          Scalar v = X(i, j);
          for (std::size_t k = 0; k < j; ++k) v -= Lx(i, k) * Lx(j, k) * D[k];
          Lx.set(i, j, v / d);
        }
      }
      for (std::size_t i = 0; i < ww; ++i) {
        Scalar e = rel_diff(D[i], Hm[i]);
        for (std::size_t j = 0; j < i; ++j) e = std::max(e, rel_diff(Lx(i, j), pd.Pi(i, j)));
        r.add(static_cast<long>(i), e);
      }
      out.push_back(r);
    }
    {
      // zero evaluations: theta vanishes at 0 and -b
      auto P = [&](std::size_t n, const Scalar& z) { return polynomial_eval(t, n, z); };
      const Scalar zb = -b;
      auto z1p = make_report("charlier_zero_evaluation_1", "printed", fam, tol, false);
      z1p.note = "denominator with P_{n+2}(b) as printed";
      auto z1c = make_report("charlier_zero_evaluation_1", "corrected", fam, tol);
      z1c.note = "denominator with P_{n+2}(-b)";
      auto z2p = make_report("charlier_zero_evaluation_2", "printed", fam, tol, false);
      auto z2c = make_report("charlier_zero_evaluation_2", "corrected", fam, tol);
      z2c.note = "(n+1)/gamma_{n+1} = -(...) ; sign flipped relative to the printed form";
      for (std::size_t n = 0; n + 2 <= m; ++n) {
        Scalar den = P(n + 2, 0) * P(n + 1, zb) - P(n + 2, zb) * P(n + 1, 0);
        Scalar den_printed = P(n + 2, 0) * P(n + 1, zb) - P(n + 2, b) * P(n + 1, 0);
        Scalar num1 = P(n + 1, 0) * P(n, zb) - P(n + 1, zb) * P(n, 0);
        Scalar num2 = P(n + 2, 0) * P(n, zb) - P(n + 2, zb) * P(n, 0);
        const long k = static_cast<long>(n);
        z1p.add(k, rel_diff(num1 / den_printed, 1 / eta));
        z1c.add(k, rel_diff(num1 / den, 1 / eta));
        z2p.add(k, rel_diff(num2 / den, (n + 1) / t.gamma[n + 1]));
        z2c.add(k, rel_diff(-num2 / den, (n + 1) / t.gamma[n + 1]));
      }
      out.push_back(z1p);
      out.push_back(z1c);
      out.push_back(z2p);
      out.push_back(z2c);
    }
  }
  return out;
}

}  // namespace lfcheck
