#pragma once

#include <initializer_list>
#include <optional>

#include "numerics.hpp"

namespace lfcheck {

/// One identity evaluated over a range of n (or matrix rows).
///
/// `gating` rows decide the verification exit code. Non-gating rows are
/// still evaluated and get a verdict; they carry printed forms known to
/// disagree with the data, or alternatives that are only being compared.
struct ResidualReport {
  std::string identity;  // tag string, e.g. "eq:charlier_compatibility"
  std::string variant;   // "", "printed", "corrected", "convergence", ...
  std::string family;
  std::string note;
  bool gating = true;
  Scalar tolerance{0};
  std::vector<long> n;
  std::vector<Scalar> residual;
  double runtime_ms = 0;

  void add(long k, const Scalar& r) {
    n.push_back(k);
    residual.push_back(r);
  }

  Scalar max_residual() const {
    Scalar m(0);
    for (const auto& r : residual) m = std::max(m, r);
    return m;
  }

  /// Empty reports (nothing in range) pass vacuously; the note says why.
  bool pass() const { return max_residual() <= tolerance; }

  std::string key() const { return variant.empty() ? identity : identity + "[" + variant + "]"; }
};

using ReportList = std::vector<ResidualReport>;

/// |sum of terms| / max(1, max |term|): residual of an identity written as
/// a vanishing sum, scaled by its largest piece.
inline Scalar balance(std::initializer_list<Scalar> terms) {
  Scalar s(0), m(1);
  for (const auto& t : terms) {
    s += t;
    m = std::max(m, Scalar(abs(t)));
  }
  return abs(s) / m;
}

/// Tolerance for identities evaluated on moment-route data. The Cholesky
/// pivots lose up to ~N*log2(cond) bits, so the full 2^(guard-working) is
/// out of reach at N=24; half the working bits is comfortably met.
inline Scalar exact_identity_tolerance(const PrecisionContext& ctx) {
  return ldexp(Scalar(1), -static_cast<int>(ctx.working_bits / 2));
}

inline ResidualReport make_report(std::string identity, std::string variant, std::string family,
                                  const Scalar& tol, bool gating = true) {
  ResidualReport r;
  r.identity = std::move(identity);
  r.variant = std::move(variant);
  r.family = std::move(family);
  r.tolerance = tol;
  r.gating = gating;
  return r;
}

inline const ResidualReport* find_report(const ReportList& list, const std::string& identity,
                                         const std::string& variant = "") {
  for (const auto& r : list)
    if (r.identity == identity && r.variant == variant) return &r;
  return nullptr;
}

}  // namespace lfcheck
