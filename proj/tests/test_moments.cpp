#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/hypergeometric_0F1.hpp>
#include <boost/math/special_functions/hypergeometric_1F1.hpp>
#include <boost/math/special_functions/hypergeometric_pFq.hpp>
#include <boost/multiprecision/gmp.hpp>
#include <gtest/gtest.h>

#include <lfcheck/moments.hpp>

using namespace lfcheck;
using boost::multiprecision::mpq_rational;
using boost::multiprecision::mpz_int;

namespace {

struct MomentsTest : ::testing::Test {
  PrecisionContext ctx{};
  PrecisionScope scope{ctx};
};

/// An MPFR value is a dyadic rational; convert it exactly.
mpq_rational exact(const Scalar& x) {
  mpz_t z;
  mpz_init(z);
  long e = mpfr_get_z_2exp(z, x.backend().data());
  mpz_int m(z);
  mpz_clear(z);
  mpq_rational q(m);
  mpz_int p = mpz_int(1) << static_cast<unsigned>(e < 0 ? -e : e);
  return e < 0 ? q / mpq_rational(p) : q * mpq_rational(p);
}

Scalar to_scalar(const mpq_rational& q) {
  Scalar r;
  mpfr_set_q(r.backend().data(), q.backend().data(), MPFR_RNDN);
  return r;
}

/// Plain Gaussian elimination over the rationals.
mpq_rational exact_det(std::vector<std::vector<mpq_rational>> a) {
  const std::size_t n = a.size();
  mpq_rational det(1);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && a[p][c] == 0) ++p;
    if (p == n) return 0;
    if (p != c) {
      std::swap(a[p], a[c]);
      det = -det;
    }
    det *= a[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      mpq_rational f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
    }
  }
  return det;
}

}  // namespace

TEST_F(MomentsTest, FirstMomentAgainstBoostHypergeometric) {
  auto ch = compute_moments(make_spec(Family::Charlier, "0", "0.5", "0", "1"), 0, ctx);
  EXPECT_NEAR(ch.rho[0].convert_to<double>(), boost::math::hypergeometric_0F1(1.5, 1.0), 1e-13);
  auto mx = compute_moments(make_spec(Family::Meixner, "2", "0.3", "0", "0.7"), 0, ctx);
  EXPECT_NEAR(mx.rho[0].convert_to<double>(), boost::math::hypergeometric_1F1(2.0, 1.3, 0.7), 1e-12);
  auto hn = compute_moments(make_spec(Family::HahnI, "1.2", "0.7", "0.4", "0.5"), 0, ctx);
  EXPECT_NEAR(hn.rho[0].convert_to<double>(), boost::math::hypergeometric_pFq({1.2, 0.7}, {1.4}, 0.5), 1e-12);
}

TEST_F(MomentsTest, FirstMomentAgainstSeriesAtFullPrecision) {
  for (Family f : {Family::Charlier, Family::Meixner, Family::HahnI}) {
    auto s = make_spec(f, "1.2", "0.7", "0.4", "0.5");
    auto m = compute_moments(s, 4, ctx);
    EXPECT_LE(rel_diff(m.rho[0], first_moment_series(s, ctx)), ctx.tolerance()) << family_name(f);
  }
}

TEST_F(MomentsTest, MeixnerAtAEqualsOneIsIncompleteGamma) {
  // rho_0 = M(1, b+1, eta) = b eta^-b e^eta gamma_lower(b, eta)
  double b = 0.3, eta = 0.7;
  double expected = b * std::pow(eta, -b) * std::exp(eta) * boost::math::tgamma_lower(b, eta);
  auto m = compute_moments(make_spec(Family::Meixner, "1", "0.3", "0", "0.7"), 0, ctx);
  EXPECT_NEAR(m.rho[0].convert_to<double>(), expected, 1e-13);
}

TEST_F(MomentsTest, ExponentialSeries) {
  EXPECT_LE(rel_diff(hypergeometric_pFq({}, {}, Scalar(1), ctx), exp(Scalar(1))), ctx.tolerance());
}

TEST_F(MomentsTest, SmallEtaLimit) {
  auto m = compute_moments(make_spec(Family::Meixner, "2", "0.3", "0", "1e-60"), 6, ctx);
  EXPECT_LT(abs(m.rho[0] - 1), Scalar("1e-59"));
  for (std::size_t n = 1; n <= 6; ++n) EXPECT_LT(m.rho[n], Scalar("1e-59"));
}

TEST_F(MomentsTest, TruncationAndPositivity) {
  for (Family f : {Family::Charlier, Family::Meixner, Family::HahnI}) {
    auto m = compute_moments(make_spec(f, "1.2", "0.7", "0.4", "0.5"), 46, ctx);
    EXPECT_LE(m.tail_bound, ldexp(Scalar(1), -static_cast<int>(ctx.working_bits)));
    for (const auto& r : m.rho) EXPECT_GT(r, 0);
    EXPECT_GT(m.truncation_index, 0u);
  }
}

TEST_F(MomentsTest, ForcedTruncationIsRespected) {
  auto s = make_spec(Family::Charlier, "0", "0.5", "0", "1");
  auto natural = compute_moments(s, 10, ctx);
  MomentOptions opt;
  opt.force_terms = natural.truncation_index + 7;
  auto forced = compute_moments(s, 10, ctx, opt);
  EXPECT_EQ(forced.truncation_index, natural.truncation_index + 7);
  EXPECT_LE(rel_diff(forced.rho[10], natural.rho[10]), ctx.tolerance());
}

TEST_F(MomentsTest, SmallHankelDeterminants) {
  auto m = compute_moments(make_spec(Family::HahnI, "1.2", "0.7", "0.4", "0.5"), 10, ctx);
  auto h = hankel_determinants(m, 3);
  EXPECT_EQ(h.delta[0], 1);
  EXPECT_EQ(h.delta_tilde[0], 0);
  EXPECT_LE(rel_diff(h.delta[1], m.rho[0]), ctx.tolerance());
  EXPECT_LE(rel_diff(h.delta_tilde[1], m.rho[1]), ctx.tolerance());
  EXPECT_LE(rel_diff(h.delta[2], m.rho[0] * m.rho[2] - m.rho[1] * m.rho[1]), ctx.tolerance());
}

TEST_F(MomentsTest, HankelAgainstExactRationalOracle) {
  auto m = compute_moments(make_spec(Family::Charlier, "0", "0.5", "0", "1"), 24, ctx);
  auto h = hankel_determinants(m, 12);
  std::vector<mpq_rational> rho;
  for (const auto& r : m.rho) rho.push_back(exact(r));
  for (std::size_t k = 1; k <= 12; ++k) {
    std::vector<std::vector<mpq_rational>> g(k, std::vector<mpq_rational>(k));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) g[i][j] = rho[i + j];
    Scalar oracle = to_scalar(exact_det(g));
    EXPECT_GT(h.delta[k], 0);
    EXPECT_LE(rel_diff(h.delta[k] / oracle, Scalar(1)), ldexp(Scalar(1), -256)) << "k=" << k;
  }
}

TEST_F(MomentsTest, VarthetaStencil) {
  const Scalar h = ldexp(Scalar(1), -10);
  // exact on linear functions
  auto lin = vartheta_fd([](const Scalar& e) { return e; }, Scalar("0.7"), h);
  EXPECT_LE(abs(lin.value - Scalar("0.7")), ctx.tolerance());
  // log eta -> 1 at fourth order
  auto r1 = abs(vartheta_fd([](const Scalar& e) { return Scalar(log(e)); }, Scalar("0.7"), h).value - 1);
  auto r2 = abs(vartheta_fd([](const Scalar& e) { return Scalar(log(e)); }, Scalar("0.7"), h / 2).value - 1);
  EXPECT_GT(r1 / r2, 12);
  EXPECT_LT(r1 / r2, 20);
  auto flat = vartheta_fd([](const Scalar&) { return Scalar(5); }, Scalar("0.7"), h);
  EXPECT_EQ(flat.value, 0);
  EXPECT_THROW(vartheta_fd([](const Scalar& e) { return e; }, Scalar(1), ldexp(Scalar(1), -500)), NumericError);
}

TEST_F(MomentsTest, FirstMomentIsVarthetaOfZeroth) {
  auto s = make_spec(Family::Meixner, "2", "0.3", "0", "0.7");
  auto m = compute_moments(s, 1, ctx);
  Scalar r1 = rel_diff(vartheta_rho(s, 1, ldexp(Scalar(1), -10), ctx).value, m.rho[1]);
  Scalar r2 = rel_diff(vartheta_rho(s, 1, ldexp(Scalar(1), -11), ctx).value, m.rho[1]);
  EXPECT_LT(r1, Scalar("1e-10"));
  EXPECT_GT(r1 / r2, 12);
  EXPECT_THROW(vartheta_rho(s, 2, ldexp(Scalar(1), -10), ctx), std::invalid_argument);
}

TEST_F(MomentsTest, DeltaTildeIsVarthetaDelta) {
  auto s = make_spec(Family::Charlier, "0", "0.5", "0", "1");
  auto h = hankel_determinants(compute_moments(s, 12, ctx), 6);
  for (std::size_t k = 1; k <= 6; ++k)
    EXPECT_LT(rel_diff(vartheta_delta(s, k, ldexp(Scalar(1), -10), ctx).value, h.delta_tilde[k]), Scalar("1e-9"))
        << "k=" << k;
}

TEST_F(MomentsTest, DoublingPrecisionMovesMomentsOnlyAtRounding) {
  auto s = make_spec(Family::HahnI, "1.2", "0.7", "0.4", "0.5");
  auto lo = compute_moments(s, 30, ctx);
  PrecisionContext hi_ctx = ctx.doubled();
  PrecisionScope hi(hi_ctx);
  auto high = compute_moments(s, 30, hi_ctx);
  for (std::size_t n = 0; n <= 30; ++n) EXPECT_LE(rel_diff(lo.rho[n], high.rho[n]), ctx.tolerance()) << n;
}
