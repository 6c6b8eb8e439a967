#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bpre/lf.h"
#include "test_support.h"

namespace bpre {
namespace {

using testing_support::random_lf_law;
using testing_support::two_state;

const auto e = std::exp(1.0);

auto pm1_model(double w) {
  return two_state(Offspring_law::linear_fractional(e, 2 * e * e), Offspring_law::linear_fractional(1 / e, 0.5), w);
}

auto random_lf_env(std::mt19937_64& gen, int n) -> Env_sequence {
  auto laws = std::vector<Offspring_law>{};
  for (auto k = 0; k < n; ++k) { laws.push_back(random_lf_law(gen, -1.0, 1.0)); }
  return Env_sequence{laws};
}

TEST(Lf_fgen, normalization_and_single_law) {
  auto env = Env_sequence{{Offspring_law::linear_fractional(2.0, 8.0)}};
  auto st = Lf_quenched_state::from_env(env);
  EXPECT_EQ(lf_fgen(st, 1.0), 1.0);
  EXPECT_NEAR(lf_fgen(st, 0.0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(lf_fgen(st, 0.0), env.law(1).pgf(0.0), 1e-15);
}

TEST(Lf_fgen, matches_composition) {
  auto gen = std::mt19937_64{41};
  for (auto rep = 0; rep < 50; ++rep) {
    auto env = random_lf_env(gen, 1 + rep % 10);
    auto st = Lf_quenched_state::from_env(env);
    for (auto s : {0.0, 0.2, 0.7, 0.99}) {
      auto composed = s;
      for (auto k = env.n(); k >= 1; --k) { composed = env.law(k).pgf(composed); }
      EXPECT_NEAR(lf_fgen(st, s), composed, 1e-10);
    }
  }
}

TEST(Lf_derivative, mean_and_single_survivor) {
  auto gen = std::mt19937_64{42};
  for (auto rep = 0; rep < 50; ++rep) {
    auto env = random_lf_env(gen, 1 + rep % 8);
    auto st = Lf_quenched_state::from_env(env);
    EXPECT_NEAR(lf_derivative(st, 1.0) / std::exp(env.walk(env.n())), 1.0, 1e-12);
    auto surv = lf_survival(st);
    EXPECT_NEAR(lf_derivative(st, 0.0), std::exp(-env.walk(env.n())) * surv * surv, 1e-14);
    EXPECT_NEAR(lf_derivative(st, 0.0), quenched_pmf(env, 1, 1), 1e-12);
    for (auto s : {0.1, 0.5, 0.9}) {
      auto h = 1e-5;
      EXPECT_LE(std::abs((lf_fgen(st, s + h) - lf_fgen(st, s - h)) / (2 * h) - lf_derivative(st, s)), 1e-6);
    }
  }
}

TEST(Lf_derivative, tail_inequality) {
  auto gen = std::mt19937_64{43};
  for (auto rep = 0; rep < 200; ++rep) {
    auto env = random_lf_env(gen, 1 + rep % 12);
    auto st = Lf_quenched_state::from_env(env);
    auto surv = 1.0 - lf_fgen(st, 0.0);
    for (auto s : {0.0, 0.3, 0.9}) {
      EXPECT_LE(lf_derivative(st, s) * (1 - s) * (1 - s), st.s_exp * surv * surv * (1 + 1e-12));
    }
  }
}

TEST(Lf_quenched_pmf, matches_pgf_engine) {
  auto gen = std::mt19937_64{44};
  for (auto rep = 0; rep < 60; ++rep) {
    auto env = random_lf_env(gen, 6);
    auto st = Lf_quenched_state::from_env(env);
    auto z0 = 1 + rep % 3;
    for (auto j = 0; j <= 12; ++j) {
      EXPECT_NEAR(lf_quenched_pmf(st, z0, j), quenched_pmf(env, z0, j, 64), 1e-10);
    }
    EXPECT_NEAR(lf_quenched_pmf(st, 1, 0), lf_fgen(st, 0.0), 1e-15);
  }
}

TEST(Lf_quenched_pmf, geometric_and_two_below_one) {
  auto gen = std::mt19937_64{45};
  for (auto rep = 0; rep < 100; ++rep) {
    auto env = random_lf_env(gen, 1 + rep % 10);
    auto st = Lf_quenched_state::from_env(env);
    auto ratio = lf_quenched_pmf(st, 1, 2) / lf_quenched_pmf(st, 1, 1);
    EXPECT_LE(ratio, 1.0);
    for (auto j = 2; j <= 8; ++j) {
      EXPECT_NEAR(lf_quenched_pmf(st, 1, j + 1) / lf_quenched_pmf(st, 1, j), ratio, 1e-10);
    }
  }
}

TEST(Lf_quenched_state, semigroup) {
  auto gen = std::mt19937_64{46};
  for (auto rep = 0; rep < 100; ++rep) {
    auto a = random_lf_env(gen, 1 + rep % 5);
    auto b = random_lf_env(gen, 1 + rep % 7);
    auto joined = a.laws();
    joined.insert(joined.end(), b.laws().begin(), b.laws().end());
    auto whole = Lf_quenched_state::from_env(Env_sequence{joined});
    auto glued = Lf_quenched_state::from_env(a).then(Lf_quenched_state::from_env(b));
    EXPECT_NEAR(glued.s_exp / whole.s_exp, 1.0, 1e-12);
    EXPECT_NEAR(glued.eta_sum / whole.eta_sum, 1.0, 1e-12);
    auto stepped = Lf_quenched_state{};
    for (const auto& q : joined) { stepped = stepped.extend(q); }
    EXPECT_NEAR(stepped.eta_sum / whole.eta_sum, 1.0, 1e-12);
  }
}

TEST(Lf_rho, strongly) {
  auto r = lf_rho(pm1_model(0.9));
  EXPECT_EQ(r.regime, Lf_regime::strongly);
  EXPECT_NEAR(r.rho, -std::log(0.9 / e + 0.1 * e), 1e-14);
  EXPECT_NEAR(0.9 / e + 0.1 * e, 0.602920, 1e-6);
  EXPECT_NEAR(r.rho, 0.50597, 1e-5);
}

TEST(Lf_rho, weakly_matches_rate_at_zero) {
  auto model = two_state(Offspring_law::linear_fractional(2.0, 8.0), Offspring_law::linear_fractional(0.5, 1.0), 2.0 / 3.0);
  auto r = lf_rho(model);
  EXPECT_EQ(r.regime, Lf_regime::weakly);
  EXPECT_NEAR(r.rho, -std::log(2 * std::sqrt(2.0) / 3), 1e-12);
  EXPECT_NEAR(r.rho, 0.058891, 1e-6);
}

TEST(Lf_rho, intermediate_branches_coincide) {
  auto p_star = e / (e + 1 / e);
  auto model = pm1_model(p_star);
  auto r = lf_rho(model);
  EXPECT_EQ(r.regime, Lf_regime::intermediate);
  EXPECT_NEAR(r.rho, std::log(std::cosh(1.0)), 1e-12);
  EXPECT_NEAR(r.rho, rate_function_at_zero(model).lambda0, 1e-10);
}

TEST(Lf_rho, preconditions) {
  auto mixed = two_state(Offspring_law::linear_fractional(2.0, 8.0), Offspring_law::finite({0.5, 0.5}), 0.7);
  EXPECT_THROW(lf_rho(mixed), Contract_error);
  EXPECT_THROW(lf_rho(pm1_model(0.2)), Contract_error);
}

TEST(Lf_rho, below_fekete_bounds) {
  auto gen = std::mt19937_64{47};
  for (auto rep = 0; rep < 15;) {
    auto model = two_state(random_lf_law(gen, -1.5, 1.5), random_lf_law(gen, -1.5, 1.5),
                           std::uniform_real_distribution<double>{0.2, 0.9}(gen));
    if (not (walk_summary(model).drift > 0.0)) { continue; }
    ++rep;
    auto rho = lf_rho(model).rho;
    for (const auto& row : fekete_bounds(model, 1, 14)) { EXPECT_LE(rho, row.a_n_over_n + 1e-9); }
  }
}

TEST(Agresti_bounds, lf_exactness_and_ordering) {
  auto gen = std::mt19937_64{48};
  for (auto rep = 0; rep < 100; ++rep) {
    auto env = random_lf_env(gen, 1 + rep % 10);
    auto b = agresti_survival_bounds(env);
    auto surv = 1.0 - lf_fgen(Lf_quenched_state::from_env(env), 0.0);
    EXPECT_NEAR(b.lower_lf, surv, 1e-12);
    EXPECT_LE(b.lower, surv + 1e-15);
    EXPECT_LE(b.lower, b.upper);
    EXPECT_LE(surv, b.upper + 1e-15);
  }
}

TEST(Agresti_bounds, general_laws) {
  auto gen = std::mt19937_64{49};
  for (auto rep = 0; rep < 100; ++rep) {
    auto laws = std::vector<Offspring_law>{};
    for (auto k = 0; k < 1 + rep % 8; ++k) { laws.push_back(testing_support::random_finite_law(gen, 1 + rep % 4)); }
    auto env = Env_sequence{laws};
    auto b = agresti_survival_bounds(env);
    auto surv = extinction_ladder(env).p[0];
    EXPECT_LE(b.lower, surv * (1 + 1e-12));
    EXPECT_LE(surv, b.upper * (1 + 1e-12));
  }
  // the eta_lf variant is not a bound for non-LF laws: one GW step with q(0)=1/4, q(2)=3/4
  auto gw = Env_sequence{{Offspring_law::finite({0.25, 0.0, 0.75})}};
  auto b = agresti_survival_bounds(gw);
  EXPECT_GT(b.lower_lf, 0.75);
  EXPECT_LE(b.lower, 0.75);
}

TEST(Agresti_bounds, immortal_line) {
  auto b = agresti_survival_bounds(Env_sequence{std::vector<Offspring_law>(6, Offspring_law::finite({0.0, 1.0}))});
  EXPECT_EQ(b.lower, 1.0);
  EXPECT_EQ(b.upper, 1.0);
}

}  // namespace
}  // namespace bpre
