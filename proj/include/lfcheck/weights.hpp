#pragma once

#include <array>
#include <string>
#include <vector>

#include "numerics.hpp"

namespace lfcheck {

enum class Family { Charlier, Meixner, HahnI };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::Charlier: return "charlier";
    case Family::Meixner: return "meixner";
    case Family::HahnI: return "hahn1";
  }
  return "?";
}

inline Family parse_family(const std::string& s) {
  if (s == "charlier") return Family::Charlier;
  if (s == "meixner") return Family::Meixner;
  if (s == "hahn1" || s == "hahn") return Family::HahnI;
  throw std::invalid_argument("unknown family: " + s);
}

struct ParamError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Dense polynomial, coefficients in increasing degree.
struct Poly {
  std::vector<Scalar> c;

  std::size_t degree() const { return c.empty() ? 0 : c.size() - 1; }

  Scalar operator()(const Scalar& z) const {
    Scalar r(0);
    for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * z + *it;
    return r;
  }

  /// p(A) by Horner on operator sections.
  BandedOperator operator()(const BandedOperator& A) const {
    BandedOperator r = BandedOperator::identity(A.size());
    r.scale(c.empty() ? Scalar(0) : c.back());
    for (std::size_t k = c.size(); k-- > 1;) r = band_multiply(r, A).plus_identity(c[k - 1]);
    return r;
  }

  /// Product of linear factors lead * prod (z + r_i).
  static Poly from_roots_shifted(const Scalar& lead, const std::vector<Scalar>& shifts) {
    Poly p{{lead}};
    for (const auto& s : shifts) {
      std::vector<Scalar> n(p.c.size() + 1, Scalar(0));
      for (std::size_t i = 0; i < p.c.size(); ++i) {
        n[i] += p.c[i] * s;
        n[i + 1] += p.c[i];
      }
      p.c = std::move(n);
    }
    return p;
  }
};

struct PearsonData {
  Poly sigma;
  Poly theta;
  Poly tau;  // theta = tau - sigma
};

struct WeightSpec {
  Family family = Family::Charlier;
  Scalar a{0}, b{0}, c{0}, eta{1};
  bool allow_hahn_eta_ge_one = false;
  PearsonData pearson;
  // Decimal sources of a, b, c, eta when parsed from text; lets a higher
  // precision rebuild the parameters without inheriting rounding.
  std::array<std::string, 4> source;

  /// w(k+1)/w(k)
  Scalar ratio(std::size_t k) const {
    Scalar z(k);
    return pearson.sigma(z) / pearson.theta(z + 1);
  }

  /// Upper bound on w(j+1)/w(j) over all j >= k. Each linear factor ratio
  /// (j+x)/(j+y) is monotone in j, so its supremum is max(value at k, 1).
  Scalar ratio_sup(std::size_t k) const {
    Scalar z(k);
    auto mono = [&](const Scalar& num_shift, const Scalar& den_shift) {
      return std::max(Scalar((z + num_shift) / (z + den_shift)), Scalar(1));
    };
    switch (family) {
      case Family::Charlier: return eta / ((z + 1) * (z + 1 + b));
      case Family::Meixner: return eta * mono(a, Scalar(1)) / (z + 1 + b);
      case Family::HahnI: return eta * mono(a, Scalar(1)) * mono(b, c + 1);
    }
    return Scalar(0);
  }

  WeightSpec with_eta(const Scalar& e) const;
};

namespace detail {

inline bool is_nonpositive_integer(const Scalar& x) { return x <= 0 && x == floor(x); }

inline PearsonData pearson_for(Family f, const Scalar& a, const Scalar& b, const Scalar& c,
                               const Scalar& eta) {
  PearsonData p;
  switch (f) {
    case Family::Charlier:
      p.sigma = Poly{{eta}};
      p.theta = Poly::from_roots_shifted(Scalar(1), {Scalar(0), b});
      break;
    case Family::Meixner:
      p.sigma = Poly::from_roots_shifted(eta, {a});
      p.theta = Poly::from_roots_shifted(Scalar(1), {Scalar(0), b});
      break;
    case Family::HahnI:
      p.sigma = Poly::from_roots_shifted(eta, {a, b});
      p.theta = Poly::from_roots_shifted(Scalar(1), {Scalar(0), c});
      break;
  }
  p.tau = p.theta;
  p.tau.c.resize(std::max(p.tau.c.size(), p.sigma.c.size()), Scalar(0));
  for (std::size_t i = 0; i < p.sigma.c.size(); ++i) p.tau.c[i] += p.sigma.c[i];
  return p;
}

}  // namespace detail

inline WeightSpec make_spec(Family family, const Scalar& a, const Scalar& b, const Scalar& c,
                            const Scalar& eta, bool allow_hahn_eta_ge_one = false) {
  for (const Scalar* x : {&a, &b, &c, &eta}) require_finite(*x, "weight parameter");
  if (!(eta > 0)) throw ParamError("eta > 0 violated");
  switch (family) {
    case Family::Charlier:
      if (!(b > -1)) throw ParamError("b > -1 violated");
      break;
    case Family::Meixner:
      if (!(a * (b + 1) > 0)) throw ParamError("a(b+1) > 0 violated");
      if (detail::is_nonpositive_integer(a)) throw ParamError("a is a non-positive integer (terminating weight)");
      if (detail::is_nonpositive_integer(b + 1)) throw ParamError("b+1 is a non-positive integer");
      break;
    case Family::HahnI:
      if (!(eta < 1) && !allow_hahn_eta_ge_one)
        throw ParamError("0 < eta < 1 required for hahn1 (pass the override to explore eta >= 1)");
      if (detail::is_nonpositive_integer(a) || detail::is_nonpositive_integer(b))
        throw ParamError("a or b is a non-positive integer (terminating weight)");
      if (detail::is_nonpositive_integer(c + 1)) throw ParamError("c+1 is a non-positive integer");
      break;
  }
  WeightSpec s;
  s.family = family;
  s.a = a;
  s.b = b;
  s.c = c;
  s.eta = eta;
  s.allow_hahn_eta_ge_one = allow_hahn_eta_ge_one;
  s.pearson = detail::pearson_for(family, a, b, c, eta);
  // Past the largest |parameter| every ratio sigma(k)/theta(k+1) is positive,
  // so checking the first few ratios decides positivity of the whole weight.
  Scalar bound = std::max({Scalar(abs(a)), Scalar(abs(b)), Scalar(abs(c))});
  auto k_end = static_cast<std::size_t>(ceil(bound).convert_to<double>()) + 2;
  for (std::size_t k = 0; k <= k_end; ++k)
    if (!(s.ratio(k) > 0))
      throw ParamError("weight is not positive: w(" + std::to_string(k + 1) + ")/w(" +
                       std::to_string(k) + ") <= 0");
  return s;
}

inline WeightSpec WeightSpec::with_eta(const Scalar& e) const {
  return make_spec(family, a, b, c, e, allow_hahn_eta_ge_one);
}

/// Parameters given as decimal text ("0.3"), parsed at the current precision.
inline WeightSpec make_spec(Family family, const std::string& a, const std::string& b,
                            const std::string& c, const std::string& eta,
                            bool allow_hahn_eta_ge_one = false) {
  WeightSpec s = make_spec(family, parse_scalar(a), parse_scalar(b), parse_scalar(c),
                           parse_scalar(eta), allow_hahn_eta_ge_one);
  s.source = {a, b, c, eta};
  return s;
}

/// Rebuilds the spec at the current default precision, from the decimal
/// sources when available.
inline WeightSpec reprecise(const WeightSpec& s) {
  if (!s.source[3].empty())
    return make_spec(s.family, s.source[0], s.source[1], s.source[2], s.source[3],
                     s.allow_hahn_eta_ge_one);
  auto up = [](const Scalar& x) {
    Scalar y;
    y = x;
    y.precision(Scalar::default_precision());
    return y;
  };
  return make_spec(s.family, up(s.a), up(s.b), up(s.c), up(s.eta), s.allow_hahn_eta_ge_one);
}

/// w(k) by the multiplicative Pearson recursion, w(0) = 1.
inline Scalar weight_at(const WeightSpec& s, std::size_t k) {
  Scalar w(1);
  for (std::size_t j = 0; j < k; ++j) {
    w *= s.ratio(j);
    if (!isfinite(w) || w == 0)
      throw NumericError("weight over/underflow at k=" + std::to_string(j + 1) + "; raise precision");
  }
  return w;
}

/// Weights w(0..k_max) in one pass.
inline std::vector<Scalar> weights_upto(const WeightSpec& s, std::size_t k_max) {
  std::vector<Scalar> w(k_max + 1);
  w[0] = 1;
  for (std::size_t k = 0; k < k_max; ++k) w[k + 1] = w[k] * s.ratio(k);
  return w;
}

/// |theta(k+1) w(k+1) - sigma(k) w(k)| / |sigma(k) w(k)| for each k of a weight table.
/// Purely relative: weights decay fast, so an absolute floor would hide defects.
inline std::vector<Scalar> pearson_residuals(const WeightSpec& s, const std::vector<Scalar>& w) {
  std::vector<Scalar> r;
  for (std::size_t k = 0; k + 1 < w.size(); ++k) {
    Scalar z(k);
    Scalar rhs = s.pearson.sigma(z) * w[k];
    Scalar lhs = s.pearson.theta(z + 1) * w[k + 1];
    Scalar den = rhs == 0 ? Scalar(1) : Scalar(abs(rhs));
    r.push_back(abs(lhs - rhs) / den);
  }
  return r;
}

inline Scalar pearson_residual(const WeightSpec& s, const std::vector<Scalar>& w) {
  Scalar m(0);
  for (const auto& x : pearson_residuals(s, w)) m = std::max(m, x);
  return m;
}

inline Scalar pearson_residual(const WeightSpec& s, std::size_t k_max) {
  if (k_max < 1) throw std::invalid_argument("pearson_residual needs k_max >= 1");
  return pearson_residual(s, weights_upto(s, k_max + 1));
}

}  // namespace lfcheck
