#pragma once

#include <functional>
#include <optional>

#include "weights.hpp"

namespace lfcheck {

struct MomentTable {
  WeightSpec spec;
  std::vector<Scalar> rho;          // rho_0 .. rho_{n_max}
  std::size_t truncation_index = 0;  // number of lattice terms summed
  Scalar tail_bound{0};              // max_n (bound on omitted tail) / rho_n
  PrecisionContext precision;
};

struct MomentOptions {
  std::size_t max_terms = 400000;
  std::size_t force_terms = 0;  // sum exactly this many terms (still checked)
};

/// Lattice sums rho_n = sum_k k^n w(k), all n in one pass over k.
///
/// After term K the successive-term ratio of every column is at most
/// r = ((K+1)/K)^n_max * sup_{j>=K} w(j+1)/w(j), so each omitted tail is at
/// most term_K * r / (1 - r). Summation stops once that bound, relative to
/// every rho_n, is below 2^-(working+guard).
inline MomentTable compute_moments(const WeightSpec& spec_in, std::size_t n_max,
                                   const PrecisionContext& ctx, const MomentOptions& opt = {}) {
  PrecisionScope scope(ctx);
  MomentTable m;
  m.spec = reprecise(spec_in);
  m.precision = ctx;
  const WeightSpec& spec = m.spec;
  m.rho.assign(n_max + 1, Scalar(0));

  const Scalar target = ldexp(Scalar(1), -static_cast<int>(ctx.working_bits + ctx.guard_bits));
  Scalar w(1);
  std::vector<Scalar> term(n_max + 1);
  for (std::size_t k = 0;; ++k) {
    if (k >= opt.max_terms)
      throw NumericError("moment series did not converge within " + std::to_string(opt.max_terms) +
                         " terms");
    Scalar kk(k);
    Scalar p(1);
    for (std::size_t n = 0; n <= n_max; ++n) {
      term[n] = p * w;
      m.rho[n] += term[n];
      p *= kk;
    }
    Scalar worst(1);
    if (k > 0 && Scalar(k) + 1 + spec.b > 0 && Scalar(k) + 1 + spec.c > 0) {
      Scalar r = pow(Scalar(k + 1) / kk, static_cast<int>(n_max)) * spec.ratio_sup(k);
      if (r < 1) {
        worst = 0;
        for (std::size_t n = 0; n <= n_max; ++n)
          worst = std::max(worst, Scalar(term[n] * r / ((1 - r) * m.rho[n])));
      }
    }
    m.tail_bound = worst;
    bool done = opt.force_terms ? (k + 1 >= opt.force_terms) : (worst <= target);
    if (done) {
      m.truncation_index = k + 1;
      break;
    }
    w *= spec.ratio(k);
    if (!isfinite(w)) throw NumericError("weight overflow while summing moments; raise precision");
  }
  if (!(m.rho[0] > 0)) throw NumericError("rho_0 is not positive");
  return m;
}

/// Plain pFq(upper; lower; z) by term recurrence, summed until the terms
/// are decreasing and below 2^-(working+guard) of the sum.
inline Scalar hypergeometric_pFq(const std::vector<Scalar>& upper, const std::vector<Scalar>& lower,
                                 const Scalar& z, const PrecisionContext& ctx,
                                 std::size_t max_terms = 400000) {
  PrecisionScope scope(ctx);
  const Scalar eps = ldexp(Scalar(1), -static_cast<int>(ctx.working_bits + ctx.guard_bits));
  Scalar term(1), sum(1), prev(0);
  for (std::size_t k = 0; k < max_terms; ++k) {
    Scalar ratio = z / (k + 1);
    for (const auto& u : upper) ratio *= u + k;
    for (const auto& l : lower) ratio /= l + k;
    prev = abs(term);
    term *= ratio;
    sum += term;
    if (abs(term) < prev && abs(term) <= eps * abs(sum)) return sum;
  }
  throw NumericError("hypergeometric series did not converge in " + std::to_string(max_terms) + " terms");
}

/// rho_0 as 0F1(;b+1;eta), 1F1(a;b+1;eta) or 2F1(a,b;c+1;eta).
inline Scalar first_moment_series(const WeightSpec& s, const PrecisionContext& ctx) {
  PrecisionScope scope(ctx);
  WeightSpec w = reprecise(s);
  switch (w.family) {
    case Family::Charlier: return hypergeometric_pFq({}, {w.b + 1}, w.eta, ctx);
    case Family::Meixner: return hypergeometric_pFq({w.a}, {w.b + 1}, w.eta, ctx);
    case Family::HahnI: return hypergeometric_pFq({w.a, w.b}, {w.c + 1}, w.eta, ctx);
  }
  return Scalar(0);
}

struct HankelTable {
  std::vector<Scalar> delta;        // Delta_0 .. Delta_kmax
  std::vector<Scalar> delta_tilde;  // Delta~_0 .. Delta~_kmax
  unsigned escalated_bits = 0;      // precision actually used when escalation fired
  std::vector<std::size_t> singular;
};

namespace detail {

struct DetResult {
  Scalar value;
  double bits_lost;
};

/// Determinant by Gaussian elimination with full pivoting. Bits lost are
/// estimated from the ratio of the largest input entry to the smallest pivot.
inline DetResult det_full_pivot(std::vector<std::vector<Scalar>> a) {
  const std::size_t n = a.size();
  Scalar det(1);
  Scalar amax(0);
  for (auto& row : a)
    for (auto& v : row) amax = std::max(amax, Scalar(abs(v)));
  double lost = 0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pr = col, pc = col;
    Scalar best(0);
    for (std::size_t i = col; i < n; ++i)
      for (std::size_t j = col; j < n; ++j)
        if (abs(a[i][j]) > best) {
          best = abs(a[i][j]);
          pr = i;
          pc = j;
        }
    if (best == 0) return {Scalar(0), 1e9};
    if (pr != col) {
      std::swap(a[pr], a[col]);
      det = -det;
    }
    if (pc != col) {
      for (auto& row : a) std::swap(row[pc], row[col]);
      det = -det;
    }
    const Scalar piv = a[col][col];
    det *= piv;
    if (amax > 0) lost = std::max(lost, (log2(amax / abs(piv))).convert_to<double>());
    for (std::size_t i = col + 1; i < n; ++i) {
      Scalar f = a[i][col] / piv;
      if (f == 0) continue;
      for (std::size_t j = col; j < n; ++j) a[i][j] -= f * a[col][j];
    }
  }
  return {det, lost};
}

inline std::vector<std::vector<Scalar>> hankel_section(const std::vector<Scalar>& rho, std::size_t k,
                                                       bool tilde) {
  std::vector<std::vector<Scalar>> g(k, std::vector<Scalar>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      g[i][j] = (tilde && j + 1 == k) ? rho[i + k] : rho[i + j];
  return g;
}

}  // namespace detail

/// Delta_k = det(rho_{i+j})_{i,j<k}; Delta~_k has its last column replaced
/// by (rho_k, ..., rho_{2k-1}). Delta_0 = 1, Delta~_0 = 0.
///
/// When elimination loses more than half the working bits, moments are
/// recomputed at doubled precision (at most twice) and the determinants redone.
inline HankelTable hankel_determinants(const MomentTable& m, std::size_t k_max,
                                       unsigned max_doublings = 2) {
  if (k_max > 0 && m.rho.size() < 2 * k_max)
    throw std::invalid_argument("hankel_determinants: need moments up to rho_{2k_max-1}");
  PrecisionContext ctx = m.precision;
  const MomentTable* cur = &m;
  std::optional<MomentTable> escalated;
  for (unsigned attempt = 0;; ++attempt) {
    PrecisionScope scope(ctx);
    HankelTable h;
    h.delta.push_back(Scalar(1));
    h.delta_tilde.push_back(Scalar(0));
    double worst = 0;
    for (std::size_t k = 1; k <= k_max; ++k) {
      auto d = detail::det_full_pivot(detail::hankel_section(cur->rho, k, false));
      auto dt = detail::det_full_pivot(detail::hankel_section(cur->rho, k, true));
      worst = std::max({worst, d.bits_lost, dt.bits_lost});
      if (d.value == 0) h.singular.push_back(k);
      h.delta.push_back(d.value);
      h.delta_tilde.push_back(dt.value);
    }
    if (worst <= ctx.working_bits / 2.0 || attempt >= max_doublings) {
      if (attempt > 0) {
        h.escalated_bits = ctx.working_bits;
        PrecisionScope back(m.precision);
        for (auto& v : h.delta) v.precision(Scalar::default_precision());
        for (auto& v : h.delta_tilde) v.precision(Scalar::default_precision());
      }
      return h;
    }
    ctx = ctx.doubled();
    MomentOptions opt;
    escalated = compute_moments(m.spec, m.rho.size() - 1, ctx, opt);
    cur = &*escalated;
  }
}

struct FdValue {
  Scalar value;
  Scalar error_estimate;
};

/// eta d/deta f at eta0 by the 5-point central stencil with step h_rel*eta0;
/// the error estimate compares against the same stencil at twice the step.
inline FdValue vartheta_fd(const std::function<Scalar(const Scalar&)>& f, const Scalar& eta0,
                           const Scalar& h_rel) {
  Scalar h = h_rel * eta0;
  if (!(h > 0)) throw NumericError("finite-difference step must be positive");
  // Cancellation in the stencil eats about log2(1/h) bits; keep at least 3/4.
  if (h_rel < ldexp(Scalar(1), -static_cast<int>(Scalar::default_precision() * 3.32 / 4)))
    throw NumericError("finite-difference step too small for the working precision");
  auto d1 = [&](const Scalar& s) {
    return (f(eta0 - 2 * s) - 8 * f(eta0 - s) + 8 * f(eta0 + s) - f(eta0 + 2 * s)) / (12 * s);
  };
  Scalar fine = d1(h);
  Scalar coarse = d1(2 * h);
  return {eta0 * fine, eta0 * abs(fine - coarse) / 15};
}

/// Moments of every grid node summed to the same truncation index.
inline std::size_t shared_truncation(const WeightSpec& spec, const std::vector<Scalar>& etas,
                                     std::size_t n_max, const PrecisionContext& ctx) {
  std::size_t k = 0;
  for (const auto& e : etas) k = std::max(k, compute_moments(spec.with_eta(e), n_max, ctx).truncation_index);
  return k;
}

/// Finite-difference check of rho_1 = vartheta rho_0 (n = 1 only).
inline FdValue vartheta_rho(const WeightSpec& spec, unsigned n, const Scalar& h_rel,
                            const PrecisionContext& ctx) {
  if (n != 1) throw std::invalid_argument("vartheta_rho supports n = 1");
  PrecisionScope scope(ctx);
  Scalar eta0 = spec.eta;
  Scalar h = h_rel * eta0;
  std::vector<Scalar> etas;
  for (int j = -2; j <= 2; ++j) etas.push_back(eta0 + 2 * j * h);
  MomentOptions opt;
  opt.force_terms = shared_truncation(spec, etas, 0, ctx);
  return vartheta_fd(
      [&](const Scalar& e) { return compute_moments(spec.with_eta(e), 0, ctx, opt).rho[0]; }, eta0, h_rel);
}

/// Finite-difference vartheta Delta_k, to be compared with Delta~_k. The
/// stencil runs on log Delta_k, which varies far more gently than Delta_k.
inline FdValue vartheta_delta(const WeightSpec& spec, std::size_t k, const Scalar& h_rel,
                              const PrecisionContext& ctx) {
  PrecisionScope scope(ctx);
  Scalar eta0 = spec.eta;
  Scalar h = h_rel * eta0;
  std::vector<Scalar> etas;
  for (int j = -2; j <= 2; ++j) etas.push_back(eta0 + 2 * j * h);
  MomentOptions opt;
  opt.force_terms = shared_truncation(spec, etas, 2 * k, ctx);
  auto delta = [&](const Scalar& e) {
    auto m = compute_moments(spec.with_eta(e), 2 * k, ctx, opt);
    return hankel_determinants(m, k, 0).delta[k];
  };
  FdValue d = vartheta_fd([&](const Scalar& e) { return Scalar(log(delta(e))); }, eta0, h_rel);
  Scalar value = delta(eta0);
  return {d.value * value, d.error_estimate * abs(value)};
}

}  // namespace lfcheck
