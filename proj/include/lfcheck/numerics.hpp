#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/mpfr.hpp>

namespace lfcheck {

namespace bmp = boost::multiprecision;

/// Variable-precision MPFR real. Expression templates are off so that `auto`
/// never captures a lazy expression.
using Scalar = bmp::number<bmp::mpfr_float_backend<0>, bmp::et_off>;

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline unsigned digits10_for_bits(unsigned bits) {
  return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
}

struct PrecisionContext {
  unsigned working_bits = 512;
  unsigned guard_bits = 32;

  void validate() const {
    if (working_bits < 128) throw NumericError("working_bits must be >= 128");
    if (guard_bits < 32) throw NumericError("guard_bits must be >= 32");
    if (guard_bits >= working_bits) throw NumericError("guard_bits must be below working_bits");
  }

  /// 2^(guard - working): the bound used by every exact-identity comparison.
  Scalar tolerance() const {
    return ldexp(Scalar(1), static_cast<int>(guard_bits) - static_cast<int>(working_bits));
  }

  PrecisionContext doubled() const { return {working_bits * 2, guard_bits}; }

  /// LFCHECK_PREC_BITS overrides the compiled default.
  static PrecisionContext from_env(unsigned fallback = 512) {
    PrecisionContext ctx;
    ctx.working_bits = fallback;
    if (const char* s = std::getenv("LFCHECK_PREC_BITS")) {
      char* end = nullptr;
      long v = std::strtol(s, &end, 10);
      if (end == s || *end != '\0' || v <= 0)
        throw NumericError(std::string("LFCHECK_PREC_BITS is not a positive integer: ") + s);
      ctx.working_bits = static_cast<unsigned>(v);
    }
    ctx.validate();
    return ctx;
  }
};

/// Sets the default MPFR precision for newly created scalars and restores
/// the previous value on exit. The Boost default is process-wide, so scopes
/// must not interleave across threads.
class PrecisionScope {
 public:
  explicit PrecisionScope(const PrecisionContext& ctx) : prev_(Scalar::default_precision()) {
    ctx.validate();
    Scalar::default_precision(digits10_for_bits(ctx.working_bits));
  }
  ~PrecisionScope() { Scalar::default_precision(prev_); }
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  unsigned prev_;
};

inline Scalar scale_of(const Scalar& x, const Scalar& y) {
  return std::max({Scalar(abs(x)), Scalar(abs(y)), Scalar(1)});
}

/// |x - y| / max(|x|, |y|, 1)
inline Scalar rel_diff(const Scalar& x, const Scalar& y) { return abs(x - y) / scale_of(x, y); }

inline bool rel_close(const Scalar& x, const Scalar& y, const Scalar& tol) {
  return rel_diff(x, y) <= tol;
}

inline void require_finite(const Scalar& x, const char* what) {
  if (!isfinite(x)) throw NumericError(std::string("non-finite value in ") + what);
}

inline unsigned decimal_digits(unsigned bits) {
  return static_cast<unsigned>(std::ceil(bits * 0.3010)) + 2;
}

inline std::string to_decimal(const Scalar& x, unsigned bits) {
  if (x == 0) return "0";
  return x.str(decimal_digits(bits), std::ios_base::scientific);
}

/// Short form for human-facing messages.
inline std::string to_short(const Scalar& x, int digits = 6) {
  return x.str(digits, std::ios_base::scientific);
}

inline Scalar parse_scalar(const std::string& s) {
  try {
    Scalar v(s);
    require_finite(v, "parameter");
    return v;
  } catch (const std::runtime_error&) {
    throw NumericError("cannot parse number: " + s);
  }
}

// ---------------------------------------------------------------------------
// Diagonal sequences and the shift operators acting on them.

using DiagonalSeq = std::vector<Scalar>;

inline DiagonalSeq shift_minus(const DiagonalSeq& d) {
  if (d.empty()) throw NumericError("shift_minus of an empty sequence");
  return DiagonalSeq(d.begin() + 1, d.end());
}

inline DiagonalSeq shift_plus(const DiagonalSeq& d) {
  DiagonalSeq r;
  r.reserve(d.size() + 1);
  r.emplace_back(0);
  r.insert(r.end(), d.begin(), d.end());
  return r;
}

inline DiagonalSeq shift_minus(const DiagonalSeq& d, std::size_t k) {
  DiagonalSeq r = d;
  for (std::size_t i = 0; i < k; ++i) r = shift_minus(r);
  return r;
}

/// Entrywise product truncated to the shorter length.
inline DiagonalSeq hadamard(const DiagonalSeq& x, const DiagonalSeq& y) {
  DiagonalSeq r(std::min(x.size(), y.size()));
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = x[i] * y[i];
  return r;
}

/// D = diag(1, 2, 3, ...)
inline DiagonalSeq d_seq(std::size_t n) {
  DiagonalSeq r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = Scalar(i + 1);
  return r;
}

/// D^[k]_n = (n+k)...(n+1)/k
inline DiagonalSeq d_seq(std::size_t n, unsigned k) {
  DiagonalSeq r(n);
  for (std::size_t i = 0; i < n; ++i) {
    Scalar v(1);
    for (unsigned j = 1; j <= k; ++j) v *= Scalar(i + j);
    r[i] = v / Scalar(k);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Finite sections of semi-infinite banded matrices.

class BandedOperator {
 public:
  BandedOperator() = default;
  BandedOperator(std::size_t n, std::size_t lower, std::size_t upper)
      : n_(n), lower_(std::min(lower, n ? n - 1 : 0)), upper_(std::min(upper, n ? n - 1 : 0)),
        window_(n), a_(n * n, Scalar(0)) {}

  static BandedOperator identity(std::size_t n) {
    BandedOperator r(n, 0, 0);
    for (std::size_t i = 0; i < n; ++i) r.set(i, i, Scalar(1));
    return r;
  }

  static BandedOperator diagonal(const DiagonalSeq& d) {
    BandedOperator r(d.size(), 0, 0);
    for (std::size_t i = 0; i < d.size(); ++i) r.set(i, i, d[i]);
    return r;
  }

  /// Lambda: ones on the first superdiagonal.
  static BandedOperator shift(std::size_t n) {
    BandedOperator r(n, 0, 1);
    for (std::size_t i = 0; i + 1 < n; ++i) r.set(i, i + 1, Scalar(1));
    return r;
  }

  std::size_t size() const { return n_; }
  std::size_t lower() const { return lower_; }
  std::size_t upper() const { return upper_; }
  std::size_t window() const { return window_; }

  bool in_band(std::size_t i, std::size_t j) const {
    return (i >= j) ? (i - j <= lower_) : (j - i <= upper_);
  }

  const Scalar& operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

  void set(std::size_t i, std::size_t j, const Scalar& v) {
    if (i >= n_ || j >= n_) throw NumericError("BandedOperator index out of range");
    if (!in_band(i, j)) {
      if (v != 0) throw NumericError("write outside declared band");
      return;
    }
    a_[i * n_ + j] = v;
  }

  /// Consumers may only shrink the window.
  void restrict_window(std::size_t m) { window_ = std::min(window_, m); }

  /// Drops entries outside a narrower band. Used after a product whose band
  /// is known to collapse; callers check the dropped entries first.
  BandedOperator clip_band(std::size_t lower, std::size_t upper) const {
    BandedOperator r(n_, lower, upper);
    r.window_ = window_;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        if (r.in_band(i, j)) r.a_[i * n_ + j] = (*this)(i, j);
    return r;
  }

  BandedOperator transpose() const {
    BandedOperator r(n_, upper_, lower_);
    r.window_ = window_;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) r.a_[j * n_ + i] = (*this)(i, j);
    return r;
  }

  /// k > 0: k-th superdiagonal d_n = A(n, n+k); k < 0: d_n = A(n-k, n).
  DiagonalSeq diag(long k) const {
    DiagonalSeq d;
    std::size_t off = static_cast<std::size_t>(k < 0 ? -k : k);
    if (off >= n_) return d;
    for (std::size_t i = 0; i + off < n_; ++i)
      d.push_back(k >= 0 ? (*this)(i, i + off) : (*this)(i + off, i));
    return d;
  }

  BandedOperator& operator+=(const BandedOperator& o) { return axpy(Scalar(1), o); }
  BandedOperator& operator-=(const BandedOperator& o) { return axpy(Scalar(-1), o); }

  BandedOperator& axpy(const Scalar& c, const BandedOperator& o) {
    if (o.n_ != n_) throw NumericError("size mismatch in operator sum");
    BandedOperator r(n_, std::max(lower_, o.lower_), std::max(upper_, o.upper_));
    for (std::size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] + c * o.a_[k];
    r.window_ = std::min(window_, o.window_);
    *this = std::move(r);
    return *this;
  }

  BandedOperator& scale(const Scalar& c) {
    for (auto& v : a_) v *= c;
    return *this;
  }

  /// A + c I
  BandedOperator plus_identity(const Scalar& c) const {
    BandedOperator r = *this;
    for (std::size_t i = 0; i < n_; ++i) r.a_[i * n_ + i] += c;
    return r;
  }

  /// Leading m x m block, window clipped to m.
  BandedOperator leading(std::size_t m) const {
    if (m > n_) throw NumericError("leading block larger than section");
    BandedOperator r(m, lower_, upper_);
    r.window_ = std::min(window_, m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) r.a_[i * m + j] = (*this)(i, j);
    return r;
  }

  Scalar max_abs(std::size_t m) const {
    Scalar r(0);
    for (std::size_t i = 0; i < std::min(m, n_); ++i)
      for (std::size_t j = 0; j < std::min(m, n_); ++j) r = std::max(r, Scalar(abs((*this)(i, j))));
    return r;
  }

 private:
  std::size_t n_ = 0, lower_ = 0, upper_ = 0, window_ = 0;
  std::vector<Scalar> a_;
};

inline BandedOperator operator+(BandedOperator a, const BandedOperator& b) { return a += b; }
inline BandedOperator operator-(BandedOperator a, const BandedOperator& b) { return a -= b; }
inline BandedOperator operator*(const Scalar& c, BandedOperator a) { return a.scale(c); }

/// Product of two sections. Entry (i,j) sums over k <= min(i + upper(A), j + lower(B)),
/// so it is exact once i, j < window - min(upper(A), lower(B)).
inline BandedOperator band_multiply(const BandedOperator& A, const BandedOperator& B) {
  if (A.size() != B.size()) throw NumericError("band_multiply: size mismatch");
  const std::size_t n = A.size();
  BandedOperator r(n, A.lower() + B.lower(), A.upper() + B.upper());
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t k0 = i >= A.lower() ? i - A.lower() : 0;
    std::size_t k1 = std::min(n - 1, i + A.upper());
    for (std::size_t j = 0; j < n; ++j) {
      if (!r.in_band(i, j)) continue;
      Scalar s(0);
      for (std::size_t k = k0; k <= k1; ++k)
        if (B.in_band(k, j)) s += A(i, k) * B(k, j);
      r.set(i, j, s);
    }
  }
  std::size_t w = std::min(A.window(), B.window());
  std::size_t shrink = std::min(A.upper(), B.lower());
  r.restrict_window(w > shrink ? w - shrink : 0);
  return r;
}

inline BandedOperator operator*(const BandedOperator& A, const BandedOperator& B) {
  return band_multiply(A, B);
}

/// Exact inverse of a unit lower-triangular section by forward substitution.
inline BandedOperator unit_lower_inverse(const BandedOperator& S) {
  const std::size_t n = S.size();
  if (S.upper() != 0) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (S(i, j) != 0) throw NumericError("unit_lower_inverse: matrix is not lower triangular");
  }
  for (std::size_t i = 0; i < n; ++i)
    if (S(i, i) != 1) throw NumericError("unit_lower_inverse: diagonal is not unit");
  BandedOperator r(n, n ? n - 1 : 0, 0);
  for (std::size_t j = 0; j < n; ++j) {
    r.set(j, j, Scalar(1));
    for (std::size_t i = j + 1; i < n; ++i) {
      Scalar s(0);
      for (std::size_t k = j; k < i; ++k) s -= S(i, k) * r(k, j);
      r.set(i, j, s);
    }
  }
  r.restrict_window(S.window());
  return r;
}

/// Max entrywise relative difference over the leading m x m block.
inline Scalar max_rel_diff(const BandedOperator& A, const BandedOperator& B, std::size_t m) {
  Scalar r(0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) r = std::max(r, rel_diff(A(i, j), B(i, j)));
  return r;
}

inline Scalar binomial(unsigned n, unsigned k) {
  if (k > n) return Scalar(0);
  Scalar r(1);
  for (unsigned i = 1; i <= k; ++i) r = r * Scalar(n - k + i) / Scalar(i);
  return round(r);
}

}  // namespace lfcheck
