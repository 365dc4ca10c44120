#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ctl/agent.hpp"
#include "ctl/bandit_env.hpp"
#include "ctl/rng.hpp"

using ctl::Agent;
using ctl::Rng;
using ctl::SupportSet;
using ctl::Vector;

namespace {

ctl::ContextSet random_contexts(int K, int d, Rng& rng) {
  ctl::ContextSet ctx;
  ctx.arms.resize(K, d);
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < d; ++j) ctx.arms(k, j) = rng.normal();
  return ctx;
}

}  // namespace

TEST_CASE("lambda_schedule follows the formula", "[agents]") {
  SECTION("t = 1 gives zero") {
    CHECK(ctl::lambda_schedule(1.0, 0.7, 100.0) == 0.0);
  }

  SECTION("exact real arguments: lambda0 = 1, d = e, t = e^2") {
    const double e = std::exp(1.0);
    const double expect = 2.0 / e;  // sqrt(2 * 2 * 1 / e^2)
    CHECK(ctl::lambda_schedule(e * e, 1.0, e) == Catch::Approx(expect).margin(1e-15));
  }

  SECTION("decreasing in t from t = 8 on") {
    for (long t = 8; t < 5000; ++t)
      REQUIRE(ctl::lambda_schedule(static_cast<double>(t + 1), 0.3, 100.0) <
              ctl::lambda_schedule(static_cast<double>(t), 0.3, 100.0));
  }
}

TEST_CASE("threshold_value picks the mode's multiplier", "[agents]") {
  ctl::SyncParams cen{0.1, 2.0, ctl::CommMode::centralized, 10};
  ctl::SyncParams dec{0.1, 2.0, ctl::CommMode::decentralized, 10};
  CHECK(ctl::threshold_value(cen, 0.3) == Catch::Approx(3.0));
  CHECK(ctl::threshold_value(dec, 0.3) == Catch::Approx(0.6));

  ctl::SyncParams two{0.1, 2.0, ctl::CommMode::centralized, 2};
  ctl::SyncParams two_dec{0.1, 2.0, ctl::CommMode::decentralized, 2};
  CHECK(ctl::threshold_value(two, 0.3) == ctl::threshold_value(two_dec, 0.3));
}

TEST_CASE("select_arm is greedy on the reduced coordinates", "[agents]") {
  SECTION("fresh agent ties at zero and picks arm 0") {
    Agent ag(0, 6);
    Rng rng(31);
    const auto ctx = random_contexts(4, 6, rng);
    CHECK(ag.select_arm(ctx) == 0);
  }

  SECTION("singleton support maximizes that coordinate") {
    Rng rng(32);
    const int d = 8, K = 5;
    Agent ag(0, d);
    // steer the estimate onto coordinate 3 via observed unit arms
    Vector e3 = Vector::Zero(d);
    e3[3] = 1.0;
    for (int i = 0; i < 50; ++i) ag.observe(e3, 1.0);
    ag.adopt_support(SupportSet(std::vector<int>{3}));
    const auto ctx = random_contexts(K, d, rng);
    int best = 0;
    for (int k = 1; k < K; ++k)
      if (ctx.arms(k, 3) > ctx.arms(best, 3)) best = k;
    CHECK(ag.select_arm(ctx) == best);
  }

  SECTION("argmax matches a zero-padded full-dimensional scan") {
    Rng rng(33);
    for (int rep = 0; rep < 50; ++rep) {
      const int d = 10, K = 6;
      Agent ag(0, d);
      for (int i = 0; i < 20; ++i) {
        Vector a(d);
        for (int j = 0; j < d; ++j) a[j] = rng.normal();
        ag.observe(a, rng.normal());
      }
      ag.adopt_support(SupportSet(rng.sample_without_replacement(d, 3)));
      const auto ctx = random_contexts(K, d, rng);

      Vector padded = Vector::Zero(d);
      const auto& idx = ag.active_support().indices();
      for (std::size_t i = 0; i < idx.size(); ++i)
        padded[idx[i]] = ag.theta_hat()[static_cast<Eigen::Index>(i)];
      const Vector scores = ctx.arms * padded;
      CHECK(ag.select_arm(ctx) == ctl::argmax_lowest(scores));
    }
  }

  SECTION("the argmax is invariant to positive rescaling of the estimate") {
    Rng rng(34);
    const int d = 7, K = 9;
    Agent a2(0, d), a4(1, d);
    for (int i = 0; i < 30; ++i) {
      Vector a(d);
      for (int j = 0; j < d; ++j) a[j] = rng.normal();
      const double y = rng.normal();
      a2.observe(a, 2.0 * y);  // same M, b scaled by 2 vs 8: estimates collinear
      a4.observe(a, 8.0 * y);
    }
    a2.refresh_estimate();
    a4.refresh_estimate();
    const auto ctx = random_contexts(K, d, rng);
    CHECK(a2.select_arm(ctx) == a4.select_arm(ctx));
  }
}

TEST_CASE("observe logs full arms and updates the reduced ridge", "[agents]") {
  SECTION("history grows and M leaves identity") {
    Agent ag(0, 4);
    Rng rng(35);
    Vector a(4);
    for (int j = 0; j < 4; ++j) a[j] = rng.normal();
    ag.observe(a, 1.5);
    CHECK(ag.history().size() == 1);
    CHECK_FALSE(ag.ridge().M.isApprox(ctl::Matrix::Identity(4, 4)));
  }

  SECTION("an all-zero arm grows the history but not M") {
    Agent ag(0, 4);
    ag.observe(Vector::Zero(4), 2.0);
    CHECK(ag.history().size() == 1);
    CHECK(ag.ridge().M == ctl::Matrix::Identity(4, 4));
  }

  SECTION("restrict-then-update equals a batch build on restricted rows") {
    Rng rng(36);
    const int d = 9;
    Agent ag(0, d);
    ag.adopt_support(SupportSet(std::vector<int>{2, 5, 7}));
    ctl::Matrix M = ctl::Matrix::Identity(3, 3);
    Vector b = Vector::Zero(3);
    for (int i = 0; i < 25; ++i) {
      Vector a(d);
      for (int j = 0; j < d; ++j) a[j] = rng.normal();
      const double y = rng.normal();
      ag.observe(a, y);
      const double r[3] = {a[2], a[5], a[7]};
      for (int p = 0; p < 3; ++p) {
        for (int q = 0; q < 3; ++q) M(p, q) += r[p] * r[q];
        b[p] += y * r[p];
      }
    }
    CHECK((ag.ridge().M - M).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((ag.ridge().b - b).lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("local_support_estimate thresholds the full-dimensional Lasso",
          "[agents]") {
  SECTION("empty history returns the full set") {
    Agent ag(0, 12);
    CHECK(ag.local_support_estimate(0.1, 0.2, ctl::LassoConfig{}) ==
          SupportSet::full(12));
  }

  SECTION("threshold zero keeps every non-zero coordinate") {
    Rng rng(37);
    const int d = 8;
    Agent ag(0, d);
    ctl::EnvConfig env;
    env.d = d;
    env.s0 = 2;
    const auto param = ctl::gen_parameter(env, rng);
    for (int i = 0; i < 60; ++i) {
      Vector a(d);
      for (int j = 0; j < d; ++j) a[j] = rng.normal();
      ag.observe(a, a.dot(param.theta) + 0.1 * rng.normal());
    }
    ctl::LassoConfig cfg;
    const auto sup = ag.local_support_estimate(0.05, 0.0, cfg);
    // recompute the fit independently to count its non-zeros
    ctl::Matrix X(60, d);
    Vector y(60);
    for (int i = 0; i < 60; ++i) {
      X.row(i) = ag.history().contexts[static_cast<std::size_t>(i)].transpose();
      y[i] = ag.history().rewards[static_cast<std::size_t>(i)];
    }
    cfg.lambda = 0.05;
    const auto fit = ctl::lasso_fit(X, y, cfg);
    int nonzeros = 0;
    for (int j = 0; j < d; ++j)
      if (fit.coef[j] != 0.0) {
        ++nonzeros;
        CHECK(sup.contains(j));
      }
    CHECK(sup.size() == nonzeros);
  }

  SECTION("a threshold above every coefficient empties the set") {
    Rng rng(38);
    const int d = 6;
    Agent ag(0, d);
    for (int i = 0; i < 20; ++i) {
      Vector a(d);
      for (int j = 0; j < d; ++j) a[j] = rng.normal();
      ag.observe(a, rng.normal());
    }
    const auto sup = ag.local_support_estimate(0.1, 1e9, ctl::LassoConfig{});
    CHECK(sup.empty());
  }

  SECTION("noiseless well-conditioned data recovers the true support") {
    Rng rng(39);
    const int d = 20;
    ctl::EnvConfig env;
    env.d = d;
    env.s0 = 3;
    const auto param = ctl::gen_parameter(env, rng);
    Agent ag(0, d);
    for (int i = 0; i < 200; ++i) {
      Vector a(d);
      for (int j = 0; j < d; ++j) a[j] = rng.normal();
      ag.observe(a, a.dot(param.theta));
    }
    const auto sup = ag.local_support_estimate(0.01, 0.05, ctl::LassoConfig{});
    CHECK(param.support.is_subset_of(sup));
    // coefficients near truth on the support
    ctl::Matrix X(200, d);
    Vector y(200);
    for (int i = 0; i < 200; ++i) {
      X.row(i) = ag.history().contexts[static_cast<std::size_t>(i)].transpose();
      y[i] = ag.history().rewards[static_cast<std::size_t>(i)];
    }
    ctl::LassoConfig cfg;
    cfg.lambda = 0.01;
    const auto fit = ctl::lasso_fit(X, y, cfg);
    for (int j : param.support.indices())
      CHECK(fit.coef[j] == Catch::Approx(param.theta[j]).margin(0.05));
  }
}

TEST_CASE("adopt_support rebuilds the ridge from the stored history", "[agents]") {
  SECTION("re-adopting the same support is a consistent rebuild") {
    Rng rng(40);
    const int d = 7;
    Agent ag(0, d);
    ag.adopt_support(SupportSet(std::vector<int>{1, 3, 6}));
    for (int i = 0; i < 30; ++i) {
      Vector a(d);
      for (int j = 0; j < d; ++j) a[j] = rng.normal();
      ag.observe(a, rng.normal());
    }
    const ctl::Matrix M_before = ag.ridge().M;
    const Vector b_before = ag.ridge().b;
    ag.adopt_support(ag.active_support());
    CHECK((ag.ridge().M - M_before).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK((ag.ridge().b - b_before).lpNorm<Eigen::Infinity>() <= 1e-12);
  }

  SECTION("adopting the full set on a fresh agent keeps the identity state") {
    Agent ag(0, 5);
    ag.adopt_support(SupportSet::full(5));
    CHECK(ag.ridge().M == ctl::Matrix::Identity(5, 5));
    CHECK(ag.ridge().b.isZero(0.0));
  }

  SECTION("shrinking from d = 6 to {1, 4} matches a hand-computed state") {
    Agent ag(0, 6);
    Vector a1(6), a2(6), a3(6);
    a1 << 1, 2, 0, 0, -1, 3;
    a2 << 0, 1, 1, 2, 2, 0;
    a3 << 2, 0, 1, 1, 1, 1;
    ag.observe(a1, 1.0);
    ag.observe(a2, -2.0);
    ag.observe(a3, 0.5);
    ag.adopt_support(SupportSet(std::vector<int>{1, 4}));
    // restricted rows: (2, -1), (1, 2), (0, 1)
    ctl::Matrix M(2, 2);
    M << 1.0 + 4 + 1 + 0, -2.0 + 2 + 0, -2.0 + 2 + 0, 1.0 + 1 + 4 + 1;
    Vector b(2);
    b << 1.0 * 2 + (-2.0) * 1 + 0.5 * 0, 1.0 * (-1) + (-2.0) * 2 + 0.5 * 1;
    CHECK(ag.ridge().M == M);
    CHECK(ag.ridge().b == b);
    CHECK(ag.theta_hat().size() == 2);
  }

  SECTION("an empty support falls back to {0} and is counted") {
    Agent ag(0, 4);
    ag.observe(Vector::Ones(4), 1.0);
    ag.adopt_support(SupportSet{});
    CHECK(ag.active_support() == SupportSet(std::vector<int>{0}));
    CHECK(ag.fallback_count() == 1);
    CHECK(ag.ridge().M.rows() == 1);
  }

  SECTION("rebuild consistency after growing and shrinking") {
    Rng rng(41);
    const int d = 10;
    Agent ag(0, d);
    for (int phase = 0; phase < 4; ++phase) {
      for (int i = 0; i < 15; ++i) {
        Vector a(d);
        for (int j = 0; j < d; ++j) a[j] = rng.normal();
        ag.observe(a, rng.normal());
      }
      const int k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(d)));
      ag.adopt_support(SupportSet(rng.sample_without_replacement(d, k)));
      const auto fresh = ctl::ridge_from_history(
          ag.active_support(), ag.history().contexts, ag.history().rewards);
      const Vector est = ctl::ridge_estimate(fresh);
      CHECK((ag.theta_hat() - est).lpNorm<Eigen::Infinity>() <= 1e-10);
    }
  }
}
