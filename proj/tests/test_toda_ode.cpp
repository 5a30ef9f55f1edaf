#include <gtest/gtest.h>

#include <lfcheck/toda_ode.hpp>

using namespace lfcheck;

namespace {

struct TodaTest : ::testing::Test {
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

  // small sections keep the grids cheap
  EtaOptions options() {
    EtaOptions o;
    o.N = 12;
    o.n_max = 6;
    return o;
  }
};

}  // namespace

TEST_F(TodaTest, JetArithmetic) {
  Scalar e0("0.7");
  Jet x = Jet::variable(e0);
  EXPECT_EQ(vartheta(x, e0).value(), e0);  // eta d/deta eta = eta
  EXPECT_LE(abs(vartheta(log(x), e0).value() - 1), ctx.tolerance());
  // (x^2)' = 2x, (1/x)' = -1/x^2
  EXPECT_LE(abs((x * x).derivative().value() - 2 * e0), ctx.tolerance());
  EXPECT_LE(abs(x.inverse().derivative().value() + 1 / (e0 * e0)), ctx.tolerance());
  EXPECT_LE(abs((x / x).derivative().value()), ctx.tolerance());
  Jet cube = x * x * x;
  EXPECT_LE(abs(cube.derivative().derivative().derivative().value() - 6), ctx.tolerance());
  EXPECT_THROW(Jet(0).inverse(), NumericError);
  EXPECT_THROW(log(Jet(-1)), NumericError);
}

TEST_F(TodaTest, DerivativeUsesUpValidOrders) {
  Jet j = Jet::variable(Scalar(2));
  j.valid = 3;
  EXPECT_NO_THROW(j.derivative().derivative().value());
  EXPECT_THROW(j.derivative().derivative().derivative().value(), NumericError);
}

TEST_F(TodaTest, FiveNodeGridCannotReachThirdOrder) {
  auto g = make_eta_grid(default_spec(Family::Charlier), 8, ldexp(Scalar(1), -10), ctx, 5);
  EXPECT_EQ(g.nodes.size(), 5u);
  Jet j = g.jet(Quantity::Beta, 2);
  EXPECT_NO_THROW(vartheta(vartheta(j, g.eta0), g.eta0).value());
  EXPECT_THROW(vartheta(vartheta(vartheta(j, g.eta0), g.eta0), g.eta0).value(), NumericError);
  EXPECT_THROW(make_eta_grid(default_spec(Family::Charlier), 8, ldexp(Scalar(1), -10), ctx, 6), std::invalid_argument);
}

TEST_F(TodaTest, VarthetaLogHIsBeta) {
  // H_0 = rho_0 and theta rho_0 = rho_1, so theta log H_0 = beta_0
  auto g = make_eta_grid(default_spec(Family::Meixner), 10, ldexp(Scalar(1), -10), ctx);
  auto th = g.vartheta(Quantity::LogH);
  EXPECT_LE(rel_diff(th[0], g.at(0).beta[0]), Scalar("1e-10"));
  for (int k = -3; k <= 3; ++k) EXPECT_EQ(g.at(k).size(), g.rows());
}

TEST_F(TodaTest, GridNodesShareTruncation) {
  auto pair = make_grid_pair(default_spec(Family::HahnI), 10, ldexp(Scalar(1), -10), ctx);
  EXPECT_EQ(pair.coarse.truncation, pair.fine.truncation);
  EXPECT_EQ(pair.fine.step * 2, pair.coarse.step);
}

TEST_F(TodaTest, HahnGridLeavingTheDomainThrows) {
  auto s = make_spec(Family::HahnI, "1.2", "0.7", "0.4", "0.9999");
  EXPECT_THROW(make_eta_grid(s, 8, ldexp(Scalar(1), -10), ctx), ParamError);
}

TEST_F(TodaTest, TodaIdentitiesAtFourthOrder) {
  for (Family f : {Family::Charlier, Family::Meixner, Family::HahnI}) {
    auto o = options();
    auto pair = make_grid_pair(default_spec(f), o.N, o.h_rel, ctx);
    auto reports = toda_residuals(pair, o);
    for (const auto& r : reports) {
      EXPECT_FALSE(r.n.empty()) << family_name(f) << " " << r.key();
      if (r.gating) EXPECT_TRUE(r.pass()) << family_name(f) << " " << r.key() << " " << to_short(r.max_residual());
    }
    ASSERT_NE(find_report(reports, "eq:Toda_equation_gamma", "consistency"), nullptr);
    // halving h divides the error by about 16
    const auto* conv = find_report(reports, "eq:Toda_system", "beta convergence");
    ASSERT_NE(conv, nullptr);
    for (const auto& ratio : conv->residual) {
      EXPECT_GT(ratio, Scalar("0.05"));
      EXPECT_LT(ratio, Scalar("0.075"));
    }
  }
}

TEST_F(TodaTest, CharlierOde) {
  auto o = options();
  auto pair = make_grid_pair(default_spec(Family::Charlier), o.N, o.h_rel, ctx);
  auto reports = charlier_ode_residuals(pair, o);
  for (const auto& r : reports)
    if (r.gating) EXPECT_TRUE(r.pass()) << r.key() << " " << to_short(r.max_residual());
  const auto* printed = find_report(reports, "eq:edo_Charlier_2", "printed");
  ASSERT_NE(printed, nullptr);
  EXPECT_FALSE(printed->gating);
  EXPECT_FALSE(printed->pass());
  auto meixner = make_grid_pair(default_spec(Family::Meixner), 8, o.h_rel, ctx);
  EXPECT_THROW(charlier_ode_residuals(meixner, o), std::invalid_argument);
}

TEST_F(TodaTest, MeixnerAndHahnEtaIdentities) {
  for (Family f : {Family::Meixner, Family::HahnI}) {
    auto o = options();
    auto pair = make_grid_pair(default_spec(f), o.N, o.h_rel, ctx);
    auto reports = meixner_hahn_eta_residuals(pair, o);
    EXPECT_FALSE(reports.empty());
    for (const auto& r : reports)
      if (r.gating) EXPECT_TRUE(r.pass()) << family_name(f) << " " << r.key() << " " << to_short(r.max_residual());
  }
}

TEST_F(TodaTest, MeixnerClosedFormSatisfiesEtaIdentitiesExactly) {
  auto s = make_spec(Family::Meixner, "1", "0", "0", "0.7");
  auto reports = meixner_a1_exact(s, 10, ctx);
  EXPECT_FALSE(reports.empty());
  for (const auto& r : reports)
    if (r.gating) EXPECT_TRUE(r.pass()) << r.key() << " " << to_short(r.max_residual());
  EXPECT_THROW(meixner_a1_exact(default_spec(Family::Meixner), 10, ctx), std::invalid_argument);
}
