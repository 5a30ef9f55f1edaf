#include <set>

#include <boost/multiprecision/cpp_int.hpp>
#include <gtest/gtest.h>

#include <lfcheck/structure.hpp>

using namespace lfcheck;
using boost::multiprecision::cpp_int;

namespace {

struct StructureTest : ::testing::Test {
  PrecisionContext ctx{};
  PrecisionScope scope{ctx};

  WeightSpec default_spec(Family f) {
    switch (f) {
      case Family::Charlier: return make_spec(f, "0", "0.5", "0", "1");
      case Family::Meixner: return make_spec(f, "2", "0.3", "0", "0.7");
      case Family::HahnI: return make_spec(f, "1.2", "0.7", "0.4", "0.5");
    }
    return {};
  }
};

cpp_int choose(unsigned n, unsigned k) {
  cpp_int r = 1;
  for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST_F(StructureTest, PascalEntriesAreExact) {
  auto p = build_pascal(33);
  for (unsigned n = 0; n <= 32; ++n)
    for (unsigned m = 0; m <= n; ++m) {
      ASSERT_EQ(p.B(n, m), Scalar(choose(n, m).str())) << n << "," << m;
      ASSERT_EQ(abs(p.B_inv(n, m)), p.B(n, m));
    }
  EXPECT_THROW(build_pascal(0), std::invalid_argument);
}

TEST_F(StructureTest, PascalInverse) {
  auto p = build_pascal(20);
  auto I = p.B * p.B_inv;
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t j = 0; j < 20; ++j) EXPECT_EQ(I(i, j), i == j ? Scalar(1) : Scalar(0));
}

TEST_F(StructureTest, DressedPascalInverse) {
  auto mr = moment_route(default_spec(Family::Meixner), 16, ctx);
  auto p = dress_pascal(mr.factorization, build_pascal(16));
  auto I = p.Pi * p.Pi_inv;
  for (std::size_t i = 0; i < I.window(); ++i)
    for (std::size_t j = 0; j < I.window(); ++j)
      EXPECT_LE(abs(I(i, j) - (i == j ? 1 : 0)), Scalar("1e-60")) << i << "," << j;
  // Pi is unit lower triangular like B
  for (std::size_t n = 0; n < 16; ++n) EXPECT_LE(abs(p.Pi(n, n) - 1), Scalar("1e-60"));
  EXPECT_EQ(p.pi_plus.size(), 3u);
}

TEST_F(StructureTest, GatingChecksPassForEveryFamily) {
  for (Family f : {Family::Charlier, Family::Meixner, Family::HahnI}) {
    auto s = default_spec(f);
    auto mr = moment_route(s, 24, ctx);
    auto reports = structure_checks(s, mr.factorization, mr.table, exact_identity_tolerance(ctx));
    EXPECT_NE(find_report(reports, "eq:compatibility_Jacobi_structure_a", ""), nullptr);
    for (const auto& r : reports)
      if (r.gating) EXPECT_TRUE(r.pass()) << family_name(f) << " " << r.key() << " " << to_short(r.max_residual());
  }
}

TEST_F(StructureTest, SabotageFlagsOnlyTheCompatibilityEntry) {
  for (Family f : {Family::Charlier, Family::Meixner, Family::HahnI}) {
    auto s = default_spec(f);
    auto mr = moment_route(s, 24, ctx);
    StructureOptions opt;
    opt.sabotage = true;
    auto reports = structure_checks(s, mr.factorization, mr.table, exact_identity_tolerance(ctx), opt);
    std::set<std::string> failed;
    for (const auto& r : reports)
      if (r.gating && !r.pass()) failed.insert(r.key());
    EXPECT_EQ(failed, std::set<std::string>{"eq:compatibility_Jacobi_structure_a"}) << family_name(f);
    const auto* compat = find_report(reports, "eq:compatibility_Jacobi_structure_a", "");
    ASSERT_NE(compat, nullptr);
    // a relative bump of 2^-20 shows up at that size, not smeared or amplified
    Scalar ratio = compat->max_residual() / ldexp(Scalar(1), -20);
    EXPECT_GT(ratio, Scalar("0.1")) << family_name(f);
    EXPECT_LT(ratio, Scalar(10)) << family_name(f);
  }
}

TEST_F(StructureTest, SabotageRowMustFitTheWindow) {
  auto s = default_spec(Family::Charlier);
  auto mr = moment_route(s, 12, ctx);
  StructureOptions opt;
  opt.sabotage = true;
  opt.sabotage_row = 50;
  EXPECT_THROW(structure_checks(s, mr.factorization, mr.table, exact_identity_tolerance(ctx), opt),
               std::invalid_argument);
}

TEST_F(StructureTest, PsiRoutesAgree) {
  for (Family f : {Family::Charlier, Family::Meixner, Family::HahnI}) {
    auto s = default_spec(f);
    auto mr = moment_route(s, 20, ctx);
    auto closed = build_psi_closed_form(s, mr.table);
    EXPECT_EQ(closed.lower, sigma_degree(f));
    auto routes = build_psi_definitional(s, mr.factorization, mr.table,
                                         dress_pascal(mr.factorization, build_pascal(mr.factorization.S.size())));
    // compare Psi H^{-1}, whose entries are polynomial in beta, gamma
    auto L = detail::times_hinv(routes.left.Psi, mr.table.H);
    auto R = detail::times_hinv(routes.right.Psi, mr.table.H);
    auto C = psi_hinv_closed_form(s, mr.table);
    std::size_t w = std::min({L.window(), R.window(), C.window()});
    ASSERT_GE(w, 8u);
    for (std::size_t i = 0; i < w; ++i)
      for (std::size_t j = 0; j < w; ++j) {
        Scalar scale = std::max({Scalar(1), Scalar(abs(L(i, j))), Scalar(abs(R(i, j)))});
        EXPECT_LE(abs(L(i, j) - R(i, j)) / scale, Scalar("1e-60")) << family_name(f) << " " << i << "," << j;
        EXPECT_LE(abs(L(i, j) - C(i, j)) / scale, Scalar("1e-60")) << family_name(f) << " " << i << "," << j;
      }
  }
}
