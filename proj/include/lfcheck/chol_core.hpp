#pragma once

#include "moments.hpp"

namespace lfcheck {

struct FactorizationError : NumericError {
  std::size_t index;
  FactorizationError(const std::string& msg, std::size_t k) : NumericError(msg), index(k) {}
};

/// G = S^{-1} H S^{-T} for the leading N x N moment section.
struct CholeskyFactorization {
  BandedOperator S;      // unit lower triangular
  BandedOperator S_inv;  // the LDL^T factor L
  DiagonalSeq H;
  BandedOperator G;
  PrecisionContext precision;
  double bits_lost = 0;         // max log2(G_kk / H_k)
  Scalar reconstruction{0};     // max |G - S^{-1} H S^{-T}| / max |G|
};

/// Pivot-free LDL^T; the section is positive definite on valid parameters,
/// so a non-positive pivot means precision is exhausted.
inline CholeskyFactorization factorize(const MomentTable& m, std::size_t N) {
  if (N == 0) throw std::invalid_argument("factorize: N must be positive");
  if (m.rho.size() < 2 * N - 1) throw std::invalid_argument("factorize: need moments up to rho_{2N-2}");
  PrecisionScope scope(m.precision);
  CholeskyFactorization f;
  f.precision = m.precision;
  f.G = BandedOperator(N, N - 1, N - 1);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) f.G.set(i, j, m.rho[i + j]);

  BandedOperator L(N, N - 1, 0);
  DiagonalSeq D(N);
  for (std::size_t j = 0; j < N; ++j) {
    Scalar d = f.G(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= L(j, k) * L(j, k) * D[k];
    if (!(d > 0))
      throw FactorizationError("moment section not positive definite at k=" + std::to_string(j) +
                                   "; raise precision",
                               j);
    D[j] = d;
    f.bits_lost = std::max(f.bits_lost, log2(f.G(j, j) / d).convert_to<double>());
    L.set(j, j, Scalar(1));
    for (std::size_t i = j + 1; i < N; ++i) {
      Scalar s = f.G(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= L(i, k) * L(j, k) * D[k];
      L.set(i, j, s / d);
    }
  }
  f.H = D;
  f.S_inv = L;
  f.S = unit_lower_inverse(L);

  BandedOperator rec = L * BandedOperator::diagonal(D) * L.transpose();
  Scalar gmax = f.G.max_abs(N);
  Scalar diff(0);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) diff = std::max(diff, Scalar(abs(rec(i, j) - f.G(i, j))));
  f.reconstruction = diff / gmax;
  return f;
}

enum class Provenance { MomentRoute, LFRoute };

/// Rows n = 0 .. size()-1 of the recurrence z P_n = P_{n+1} + beta_n P_n + gamma_n P_{n-1}.
struct CoefficientTable {
  DiagonalSeq beta, gamma, H, p1, p2;
  Provenance provenance = Provenance::MomentRoute;
  std::string variant = "moments";
  PrecisionContext precision;

  std::size_t size() const { return beta.size(); }
  bool has_norms() const { return H.size() == beta.size(); }

  /// beta_{-1} = 0 and gamma_{-1} = gamma_0 = 0 conventions.
  Scalar b(long n) const { return n < 0 ? Scalar(0) : beta.at(static_cast<std::size_t>(n)); }
  Scalar g(long n) const { return n < 0 ? Scalar(0) : gamma.at(static_cast<std::size_t>(n)); }
};

/// gamma_n = H_n/H_{n-1}, p1_n = S_{n,n-1}, beta_n = p1_n - p1_{n+1}.
inline CoefficientTable recursion_coefficients(const CholeskyFactorization& f) {
  PrecisionScope scope(f.precision);
  const std::size_t N = f.H.size();
  CoefficientTable t;
  t.precision = f.precision;
  DiagonalSeq p1(N), p2(N);
  for (std::size_t n = 0; n < N; ++n) {
    p1[n] = n >= 1 ? f.S(n, n - 1) : Scalar(0);
    p2[n] = n >= 2 ? f.S(n, n - 2) : Scalar(0);
  }
  for (std::size_t n = 0; n + 1 < N; ++n) {
    t.beta.push_back(p1[n] - p1[n + 1]);
    t.gamma.push_back(n == 0 ? Scalar(0) : f.H[n] / f.H[n - 1]);
    t.H.push_back(f.H[n]);
    t.p1.push_back(p1[n]);
    t.p2.push_back(p2[n]);
  }
  return t;
}

/// Same quantities from Hankel determinants: H_k = Delta_{k+1}/Delta_k,
/// p1_k = -Delta~_k/Delta_k.
struct HankelRoute {
  DiagonalSeq H, p1;
};

inline HankelRoute hankel_route(const HankelTable& h) {
  HankelRoute r;
  for (std::size_t k = 0; k + 1 < h.delta.size(); ++k) {
    r.H.push_back(h.delta[k + 1] / h.delta[k]);
    r.p1.push_back(-h.delta_tilde[k] / h.delta[k]);
  }
  return r;
}

/// Moments, factorization and table in one call. N is the section size;
/// the table has N-1 rows.
struct MomentRoute {
  MomentTable moments;
  CholeskyFactorization factorization;
  CoefficientTable table;
};

inline MomentRoute moment_route(const WeightSpec& spec, std::size_t N, const PrecisionContext& ctx,
                                const MomentOptions& opt = {}) {
  MomentRoute r;
  r.moments = compute_moments(spec, 2 * N - 1, ctx, opt);
  r.factorization = factorize(r.moments, N);
  r.table = recursion_coefficients(r.factorization);
  return r;
}

/// P_n(z) by forward recurrence with P_{-1} = 0, P_0 = 1.
inline Scalar polynomial_eval(const CoefficientTable& t, std::size_t n, const Scalar& z) {
  if (n > t.size()) throw std::out_of_range("polynomial_eval: n beyond table");
  Scalar prev(0), cur(1);
  for (std::size_t k = 0; k < n; ++k) {
    Scalar next = (z - t.beta[k]) * cur - t.gamma[k] * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// (P_0(z), ..., P_{count-1}(z))
inline DiagonalSeq polynomial_vector(const CoefficientTable& t, std::size_t count, const Scalar& z) {
  if (count > t.size() + 1) throw std::out_of_range("polynomial_vector: count beyond table");
  DiagonalSeq v;
  Scalar prev(0), cur(1);
  for (std::size_t k = 0; k < count; ++k) {
    v.push_back(cur);
    if (k < t.size()) {
      Scalar next = (z - t.beta[k]) * cur - t.gamma[k] * prev;
      prev = cur;
      cur = next;
    }
  }
  return v;
}

/// Tridiagonal section with rows (gamma_n, beta_n, 1).
inline BandedOperator jacobi_matrix(const CoefficientTable& t) {
  const std::size_t n = t.size();
  BandedOperator J(n, 1, 1);
  for (std::size_t i = 0; i < n; ++i) {
    J.set(i, i, t.beta[i]);
    if (i + 1 < n) J.set(i, i + 1, Scalar(1));
    if (i >= 1) J.set(i, i - 1, t.gamma[i]);
  }
  return J;
}

/// max |(JH)_{ij} - (JH)_{ji}| / scale over the section.
inline Scalar jacobi_symmetry_residual(const CoefficientTable& t) {
  BandedOperator JH = jacobi_matrix(t) * BandedOperator::diagonal(t.H);
  Scalar r(0);
  for (std::size_t i = 0; i + 1 < t.size(); ++i) r = std::max(r, rel_diff(JH(i, i + 1), JH(i + 1, i)));
  return r;
}

}  // namespace lfcheck
