#include <cmath>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "etfc/double.hpp"
#include "etfc/errors.hpp"
#include "etfc/single.hpp"
#include "support/fixtures.hpp"

using namespace etfc;
using etfc::support::v2;

namespace {

DoubleKnowledge knowledge_from_state(const FormationSpec& spec, const GainSet& gains, int agent,
                                     const Points& x, const Points& q, const Points& ff,
                                     double s) {
  DoubleKnowledge k;
  k.agent = agent;
  k.last_trigger = s;
  const Points rp = relative_to_neighbors(spec, agent, x);
  const Points rv = relative_to_neighbors(spec, agent, q);
  k.feedforward = feedforward_double(spec, gains, agent, rp, rv);
  for (std::size_t n = 0; n < rp.size(); ++n) {
    const int j = spec.graph().neighbors(agent)[n];
    k.neighbors.push_back({j, s, rp[n], rv[n], ff[static_cast<std::size_t>(j)]});
  }
  return k;
}

}  // namespace

TEST(Gains, SolveSatisfiesMatrixEqualityAndPositivity) {
  for (double beta1 : {0.1, 0.5, 1.0, 1.5, 3.0}) {
    const GainSet g = solve_gains(beta1, 10.0);
    EXPECT_TRUE(riccati_matrix(g).isZero(1e-12)) << "beta1 " << beta1;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(g.p());
    EXPECT_NEAR(es.eigenvalues()[0], g.rho2_p, 1e-12);
    EXPECT_GT(g.rho2_p, 0.0);
    EXPECT_NEAR(g.k4, 1.0, 1e-12);  // midpoint k3
    EXPECT_LT(g.k3, k3_upper_bound(g.k1, g.k2));
  }
}

TEST(Gains, TriangleValues) {
  const GainSet g = solve_gains(1.5, 1.5);
  EXPECT_NEAR(g.k1, 1.1547, 1e-4);
  EXPECT_NEAR(g.k2, 1.4502, 1e-4);
  EXPECT_NEAR(g.k0, 5.0237, 1e-4);
  EXPECT_NEAR(g.rho2_p, 1.1096, 1e-4);
  EXPECT_NEAR(g.k3, 0.6053, 1e-4);
}

TEST(Gains, RejectsOutOfRangeInputs) {
  EXPECT_THROW(solve_gains(2.0, 1.5), ConfigError);
  EXPECT_THROW(solve_gains(0.0, 1.5), ConfigError);
  const GainSet g = solve_gains(1.5, 1.5);
  EXPECT_THROW(solve_gains(1.5, 1.5, k3_upper_bound(g.k1, g.k2)), ConfigError);
  EXPECT_THROW(solve_gains(1.5, 1.5, -0.1), ConfigError);
  const GainSet custom = solve_gains(1.5, 1.5, 0.9);
  EXPECT_DOUBLE_EQ(custom.k3, 0.9);
  EXPECT_NEAR(custom.k4, 0.9 * (g.k2 + std::hypot(g.k1, g.k2)) / 2, 1e-12);
}

TEST(Gains, DoubleParamsValidation) {
  const GainSet g = solve_gains(1.5, 1.5);
  EXPECT_NO_THROW((DoubleParams{10, 1}.validate(g)));
  EXPECT_THROW((DoubleParams{10, 1.2}.validate(g)), ConfigError);  // cap = rho2(P) = 1.1096
  EXPECT_THROW((DoubleParams{0, 1}.validate(g)), ConfigError);
}

TEST(DoubleLaw, CommonDriftOnFormation) {
  const FormationSpec spec = support::triangle_spec();
  const GainSet g = solve_gains(1.5, 1.5);
  const Points tau = check_feasible(spec).witness;
  const Points q(3, v2(1, 0));
  for (int i = 0; i < 3; ++i) {
    const Points rp = relative_to_neighbors(spec, i, tau);
    const Points rv = relative_to_neighbors(spec, i, q);
    const Vec ud = feedforward_double(spec, g, i, rp, rv);
    EXPECT_TRUE(ud.isZero(1e-14));
    DoubleKnowledge k;
    k.feedforward = ud;
    EXPECT_TRUE(control_double(g, k, q[0]).isApprox(v2(-g.k3, 0)));
  }
}

TEST(DoubleLaw, PredictorIdentityAtS) {
  const RelativeState r{v2(0.4, -0.2), v2(1.0, 3.0)};
  const RelativeState p = predict_relative_double(r, v2(-2, 5), 0.6053, 2.0, 2.0);
  EXPECT_EQ(p.position, r.position);
  EXPECT_EQ(p.velocity, r.velocity);
  EXPECT_THROW(predict_relative_double(r, v2(0, 0), 0.6, 2.0, 1.9), StaleKnowledge);
}

TEST(DoubleLaw, PredictorSatisfiesRelativeDynamics) {
  const RelativeState r{v2(0.4, -0.2), v2(1.0, 3.0)};
  const Vec gap = v2(-2, 5);
  const double k3 = 0.6053;
  const double h = 1e-5;
  for (double t : {1.0 + 1e-3, 1.5, 3.0, 9.0}) {
    const RelativeState lo = predict_relative_double(r, gap, k3, 1.0, t - h);
    const RelativeState mid = predict_relative_double(r, gap, k3, 1.0, t);
    const RelativeState hi = predict_relative_double(r, gap, k3, 1.0, t + h);
    const Vec dx = (hi.position - lo.position) / (2 * h);
    const Vec dq = (hi.velocity - lo.velocity) / (2 * h);
    EXPECT_LE((dx - mid.velocity).lpNorm<Eigen::Infinity>(), 1e-6) << "t " << t;
    EXPECT_LE((dq - (gap - k3 * mid.velocity)).lpNorm<Eigen::Infinity>(), 1e-6) << "t " << t;
  }
}

TEST(DoubleLaw, SmallDampingLimitIsConstantAcceleration) {
  const RelativeState r{v2(0.4, -0.2), v2(1.0, 3.0)};
  const Vec gap = v2(-2, 5);
  const double tau = 0.7;
  const RelativeState p = predict_relative_double(r, gap, 1e-12, 0.0, tau);
  EXPECT_TRUE(p.position.isApprox(r.position + tau * r.velocity + 0.5 * tau * tau * gap, 1e-10));
  EXPECT_TRUE(p.velocity.isApprox(r.velocity + tau * gap, 1e-10));
  // Across the series switch the drift stays continuous.
  const RelativeState a = predict_relative_double(r, gap, 1e-4 / tau * (1 - 1e-9), 0.0, tau);
  const RelativeState b = predict_relative_double(r, gap, 1e-4 / tau * (1 + 1e-9), 0.0, tau);
  EXPECT_TRUE(a.position.isApprox(b.position, 1e-12));
}

TEST(DoubleLaw, PropagateAgreesWithPredictorOnDifferences) {
  const double k3 = 0.6053;
  Vec xi = v2(1, 2), qi = v2(0.5, -1), xj = v2(-1, 0), qj = v2(0, 0.3);
  const Vec ui = v2(1, 1), uj = v2(-2, 0.5);
  const RelativeState p = predict_relative_double({xi - xj, qi - qj}, ui - uj, k3, 0.0, 1.3);
  propagate_double(xi, qi, ui, k3, 1.3);
  propagate_double(xj, qj, uj, k3, 1.3);
  EXPECT_TRUE((xi - xj).isApprox(p.position, 1e-13));
  EXPECT_TRUE((qi - qj).isApprox(p.velocity, 1e-13));
}

TEST(DoubleLaw, ErrorFromKnowledgeMatchesTrueState) {
  const FormationSpec spec = support::triangle_spec();
  const GainSet g = solve_gains(1.5, 1.5);
  const Points x0 = support::triangle_x0();
  const Points q0 = support::triangle_q0();
  Points ff;
  for (int i = 0; i < 3; ++i)
    ff.push_back(feedforward_double(spec, g, i, relative_to_neighbors(spec, i, x0),
                                    relative_to_neighbors(spec, i, q0)));
  const double t = 2e-4;
  Points xt = x0, qt = q0;
  for (std::size_t i = 0; i < 3; ++i) propagate_double(xt[i], qt[i], ff[i], g.k3, t);
  for (int i = 0; i < 3; ++i) {
    const DoubleKnowledge k = knowledge_from_state(spec, g, i, x0, q0, ff, 0.0);
    EXPECT_TRUE(error_double(spec, g, k, 0.0).isZero(1e-10));
    EXPECT_TRUE(error_double(spec, g, k, t).isApprox(
        error_double_from_state(spec, g, i, xt, qt, ff[static_cast<std::size_t>(i)]), 1e-10));
  }
}

TEST(DoubleLaw, RestOnFormationNeverTriggers) {
  const FormationSpec spec = support::triangle_spec();
  const GainSet g = solve_gains(1.5, 1.5);
  const Points tau = check_feasible(spec).witness;
  const Points zero(3, Vec::Zero(2));
  const DoubleKnowledge k = knowledge_from_state(spec, g, 1, tau, zero, zero, 0.0);
  EXPECT_TRUE(error_double(spec, g, k, 50.0).isZero(1e-14));
  EXPECT_FALSE(next_trigger_time_double({10, 1}, spec, g, k, 0.0, 20.0).has_value());
}
