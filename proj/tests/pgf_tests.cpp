#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <numeric>
#include <random>

#include "bpre/pgf.h"
#include "bpre/rho_lab.h"
#include "test_support.h"

namespace bpre {
namespace {

using testing_support::Markov_oracle;
using testing_support::random_finite_law;
using testing_support::random_lf_law;
using testing_support::two_state;

auto gw() { return Offspring_law::finite({0.25, 0.0, 0.75}); }
auto gw_model() { return Environment_model{{gw()}, {1.0}}; }

auto random_env(std::mt19937_64& gen, int n) -> Env_sequence {
  auto laws = std::vector<Offspring_law>{};
  for (auto k = 0; k < n; ++k) {
    laws.push_back(gen() % 2 ? random_lf_law(gen, -1.0, 1.0) : random_finite_law(gen, 1 + static_cast<int>(gen() % 4)));
  }
  return Env_sequence{laws};
}

TEST(Compose, identity_outer) {
  auto g = Truncated_pgf::from_law(gw(), 8);
  auto h = compose(Truncated_pgf::identity(8), g);
  for (auto k = 0; k <= 8; ++k) { EXPECT_EQ(h[k], g[k]); }
}

TEST(Compose, quadratic_self_composition) {
  auto f = Truncated_pgf::from_law(gw(), 4);
  auto ff = compose(f, f);
  EXPECT_DOUBLE_EQ(ff[0], 0.296875);
  EXPECT_DOUBLE_EQ(ff[2], 0.28125);
  EXPECT_DOUBLE_EQ(ff[4], 0.421875);
  EXPECT_NEAR(ff.tail_mass, 0.0, 1e-15);
}

TEST(Compose, constant_one_inner_gives_total_mass) {
  auto f = Truncated_pgf::from_coeffs({0.1, 0.2, 0.3});
  auto h = compose(f, Truncated_pgf::from_coeffs({1.0}));
  EXPECT_EQ(h.degree(), 0);
  EXPECT_NEAR(h[0], 0.6, 1e-15);
}

TEST(Compose, degree_overflow_reports_cap) {
  auto f = Truncated_pgf::from_law(gw(), 4);
  EXPECT_THROW(compose(f, f, max_degree + 1), Budget_error);
}

TEST(Compose, associative_within_tail_mass) {
  auto gen = std::mt19937_64{31};
  for (auto rep = 0; rep < 30; ++rep) {
    auto f = Truncated_pgf::from_law(random_finite_law(gen, 3), 24);
    auto g = Truncated_pgf::from_law(random_lf_law(gen), 24);
    auto h = Truncated_pgf::from_law(random_finite_law(gen, 2), 24);
    auto left = compose(compose(f, g), h);
    auto right = compose(f, compose(g, h));
    auto slack = 2.0 * std::max(left.tail_mass, right.tail_mass) + 1e-14;
    for (auto k = 0; k <= 24; ++k) { EXPECT_NEAR(left[k], right[k], slack); }
  }
}

TEST(Quenched_pmf, examples) {
  EXPECT_EQ(quenched_pmf(Env_sequence{{Offspring_law::finite({0.0, 1.0})}}, 1, 1), 1.0);
  auto half = Env_sequence{{Offspring_law::finite({0.5, 0.0, 0.5})}};
  EXPECT_NEAR(quenched_pmf(half, 2, 2), 0.5, 1e-15);
  EXPECT_NEAR(quenched_pmf(half, 2, 0), 0.25, 1e-15);
  EXPECT_NEAR(quenched_pmf(half, 2, 4), 0.25, 1e-15);
  auto model = example1_model(0.3, 0.4);
  auto all_q1 = std::vector<int>(12, 0);
  EXPECT_EQ(quenched_pmf(Env_sequence::from_states(model, all_q1), 1, 1), 1.0);
}

TEST(Quenched_pmf, degree_too_small) {
  auto env = Env_sequence{{gw(), gw()}};
  EXPECT_THROW(quenched_pmf(env, 1, 5, 3), Contract_error);
}

TEST(Quenched_pmf, matches_markov_oracle) {
  auto gen = std::mt19937_64{32};
  auto oracle = Markov_oracle{160};
  for (auto rep = 0; rep < 40; ++rep) {
    auto env = random_env(gen, 1 + rep % 5);
    auto z0 = 1 + rep % 3;
    auto expect = oracle.quenched(env.laws(), z0);
    auto law = quenched_law(env, z0, 16);
    for (auto j = 0; j <= 16; ++j) {
      EXPECT_NEAR(law.pmf[j], expect[static_cast<std::size_t>(j)], 1e-12) << "rep " << rep << " j " << j;
      EXPECT_NEAR(quenched_pmf(env, z0, j), expect[static_cast<std::size_t>(j)], 1e-12);
    }
    EXPECT_NEAR(law.survival, 1.0 - expect[0], 1e-12);
  }
}

TEST(Quenched_pmf, total_mass_and_survival_invariants) {
  auto gen = std::mt19937_64{33};
  for (auto rep = 0; rep < 40; ++rep) {
    auto env = random_env(gen, 1 + rep % 8);
    auto z0 = 1 + rep % 3;
    auto law = quenched_law(env, z0, 64);
    auto sum = 0.0;
    for (auto j = 0; j <= 64; ++j) {
      EXPECT_GE(law.pmf[j], 0.0);
      sum += law.pmf[j];
    }
    EXPECT_GE(sum, 1.0 - law.pmf.tail_mass - 1e-12);
    EXPECT_LE(sum, 1.0 + 1e-12);
    auto ladder = extinction_ladder(env);
    EXPECT_NEAR(law.pmf[0], std::pow(ladder.e[0], z0), 1e-14);
    EXPECT_NEAR(law.survival, 1.0 - law.pmf[0], 1e-14);
  }
}

TEST(Env_sequence, walk_and_eta_prefix) {
  auto gen = std::mt19937_64{34};
  auto env = random_env(gen, 6);
  EXPECT_EQ(env.walk(0), 0.0);
  auto eta = 0.0;
  for (auto k = 1; k <= env.n(); ++k) {
    EXPECT_NEAR(env.walk(k) - env.walk(k - 1), std::log(env.law(k).mean()), 1e-12);
    eta += mean_and_factorial_moments(env.law(k)).eta_lf * std::exp(-env.walk(k - 1));
    EXPECT_NEAR(env.eta_prefix(k), eta, 1e-12 * eta);
  }
}

TEST(Annealed_pmf, empty_environment) {
  EXPECT_EQ(annealed_pmf(gw_model(), 3, 0, 3), 1.0);
  EXPECT_EQ(annealed_pmf(gw_model(), 3, 0, 2), 0.0);
}

TEST(Annealed_pmf, gw_cannot_hold_one) { EXPECT_EQ(annealed_pmf(gw_model(), 1, 1, 1), 0.0); }

TEST(Annealed_pmf, example1_single_line) {
  for (auto n = 1; n <= 10; ++n) {
    EXPECT_NEAR(annealed_pmf(example1_model(0.3, 0.4), 1, n, 1), std::pow(0.3, n), 1e-15 * std::pow(0.3, n));
  }
}

TEST(Annealed_pmf, matches_markov_oracle) {
  auto oracle = Markov_oracle{400};
  auto models = std::vector<Environment_model>{
      two_state(Offspring_law::finite({0.2, 0.3, 0.5}), Offspring_law::finite({0.6, 0.1, 0.1, 0.2}), 0.55),
      two_state(Offspring_law::linear_fractional(2.0, 8.0), Offspring_law::linear_fractional(0.5, 1.0), 2.0 / 3.0),
      Environment_model{{Offspring_law::finite({0.3, 0.3, 0.4}), Offspring_law::linear_fractional(1.5, 3.0),
                         Offspring_law::finite({0.1, 0.0, 0.0, 0.9})},
                        {0.3, 0.3, 0.4}},
  };
  for (const auto& model : models) {
    for (auto z0 = 1; z0 <= 2; ++z0) {
      auto expect = oracle.annealed(model, z0, 4);
      auto got = annealed_pmf_vector(model, z0, 4, 12);
      // the oracle only drops paths that leave its window, so it is a one-sided bound
      auto lost = 1.0 - std::accumulate(expect.begin(), expect.end(), 0.0);
      ASSERT_LT(lost, 1e-4);
      for (auto j = 0; j <= 12; ++j) {
        EXPECT_GE(got[static_cast<std::size_t>(j)], expect[static_cast<std::size_t>(j)] - 1e-13);
        EXPECT_LE(got[static_cast<std::size_t>(j)], expect[static_cast<std::size_t>(j)] + lost + 1e-13);
      }
    }
  }
}

TEST(Annealed_pmf, supermultiplicative) {
  auto model = two_state(Offspring_law::linear_fractional(2.0, 8.0), Offspring_law::finite({0.5, 0.2, 0.3}), 0.6);
  for (auto z = 1; z <= 2; ++z) {
    auto p = std::vector<double>(13);
    for (auto n = 0; n <= 12; ++n) { p[static_cast<std::size_t>(n)] = annealed_pmf(model, z, n, z); }
    for (auto n = 1; n <= 6; ++n) {
      for (auto m = 1; m <= 6; ++m) {
        EXPECT_GE(p[static_cast<std::size_t>(n + m)] * (1 + 1e-12),
                  p[static_cast<std::size_t>(n)] * p[static_cast<std::size_t>(m)]);
      }
    }
  }
}

TEST(Annealed_pmf, enumeration_budget) {
  auto model = two_state(gw(), Offspring_law::finite({0.0, 1.0}), 0.5);
  EXPECT_THROW(annealed_pmf(model, 1, 27, 1), Budget_error);
}

TEST(Annealed_pmf, independent_of_worker_count) {
  auto model = Environment_model{{gw(), Offspring_law::linear_fractional(1.5, 3.0), Offspring_law::finite({0.4, 0.6})},
                                 {0.3, 0.3, 0.4}};
  ::setenv("BPRE_THREADS", "1", 1);
  auto one = annealed_pmf_vector(model, 1, 9, 8);
  ::setenv("BPRE_THREADS", "3", 1);
  auto three = annealed_pmf_vector(model, 1, 9, 8);
  ::unsetenv("BPRE_THREADS");
  EXPECT_EQ(one, three);
}

// P(all of generation n descends from one parent at n-1, Z_n = z0, one initial line)
// = sum_m P_{z0}(Z_{n-1} = m) m q_n(z0) q_n(0)^{m-1}
auto spine_event_oracle(const Env_sequence& env, int z0) -> double {
  auto oracle = Markov_oracle{200};
  auto prefix = std::vector<Offspring_law>(env.laws().begin(), env.laws().end() - 1);
  auto d = oracle.quenched(prefix, z0);
  const auto& last = env.law(env.n());
  auto acc = 0.0;
  for (auto m = 1; m <= 200; ++m) {
    acc += d[static_cast<std::size_t>(m)] * m * last.pmf(z0) * std::pow(last.q0(), m - 1);
  }
  return acc;
}

TEST(Phi_n, single_step) {
  auto law = Offspring_law::finite({0.2, 0.5, 0.3});
  EXPECT_NEAR(phi_n(Env_sequence{{law}}, 1), 0.5, 1e-15);
  EXPECT_NEAR(phi_n(Env_sequence{{law}}, 1), quenched_pmf(Env_sequence{{law}}, 1, 1), 1e-15);
}

TEST(Phi_n, two_steps_by_hand) {
  // q_1 = q_2: 1/2 on {0, 2}; z0 = 2.
  // e_1 = q_2(0) = 1/2, f_1'(e_1) = 2 (1/2)(1/2) = 1/2, e_0 = f_1(1/2) = 5/8
  // phi = q_2(2) * 2 e_0 * f_1'(e_1) = 1/2 * 5/4 * 1/2 = 5/16
  auto law = Offspring_law::finite({0.5, 0.0, 0.5});
  auto env = Env_sequence{{law, law}};
  EXPECT_NEAR(phi_n(env, 2), 5.0 / 16.0, 1e-15);
  EXPECT_NEAR(phi_n(env, 2), spine_event_oracle(env, 2), 1e-14);
}

TEST(Phi_n, matches_spine_event_and_bounded_by_pmf) {
  auto gen = std::mt19937_64{35};
  for (auto rep = 0; rep < 40; ++rep) {
    auto env = random_env(gen, 1 + rep % 6);
    auto z0 = 1 + rep % 3;
    auto phi = phi_n(env, z0);
    EXPECT_NEAR(phi, spine_event_oracle(env, z0), 1e-12 * std::max(phi, 1e-6));
    EXPECT_LE(phi, quenched_pmf(env, z0, z0) * (1 + 1e-12));
    if (z0 == 1) { EXPECT_NEAR(phi, quenched_pmf(env, 1, 1), 1e-13); }
  }
}

TEST(Phi_n, log_domain_survives_long_walks) {
  auto env = Env_sequence{std::vector<Offspring_law>(400, Offspring_law::finite({0.3, 0.1, 0.6}))};
  auto lp = log_phi_n(env, 1);
  // oracle: backward iteration e_i = f(e_{i+1}) from e_n = 0, log-sum of f'(e_i)
  auto e = std::vector<double>(401, 0.0);
  for (auto i = 399; i >= 0; --i) { e[static_cast<std::size_t>(i)] = 0.3 + 0.1 * e[i + 1] + 0.6 * e[i + 1] * e[i + 1]; }
  auto expect = std::log(0.1);
  for (auto i = 1; i < 400; ++i) { expect += std::log(0.1 + 1.2 * e[static_cast<std::size_t>(i)]); }
  EXPECT_NEAR(lp, expect, 1e-10 * std::abs(expect));
  EXPECT_NEAR(lp, -145.657516470965, 1e-9);
  EXPECT_EQ(phi_n(env, 1), std::exp(lp));
}

TEST(Phi_n, annealed_average_below_annealed_pmf) {
  auto model = two_state(Offspring_law::finite({0.3, 0.2, 0.5}), Offspring_law::linear_fractional(0.6, 1.0), 0.7);
  for (auto n = 1; n <= 7; ++n) {
    auto avg = 0.0;
    for (auto code = 0; code < (1 << n); ++code) {
      auto states = std::vector<int>(static_cast<std::size_t>(n));
      auto w = 1.0;
      for (auto k = 0; k < n; ++k) {
        states[static_cast<std::size_t>(k)] = (code >> k) & 1;
        w *= model.weight(states[static_cast<std::size_t>(k)]);
      }
      avg += w * phi_n(Env_sequence::from_states(model, states), 1);
    }
    EXPECT_LE(avg, annealed_pmf(model, 1, n, 1) * (1 + 1e-12));
  }
}

TEST(Subtree_identity, trivial_cases) {
  auto law = Offspring_law::finite({0.3, 0.2, 0.5});
  auto one = subtree_extinction_identity(Env_sequence{{law}}, 1);
  EXPECT_NEAR(one.lhs, 1.0, 1e-15);
  EXPECT_NEAR(one.rhs, 1.0, 1e-15);
  auto copies = subtree_extinction_identity(Env_sequence{std::vector<Offspring_law>(5, Offspring_law::finite({0.0, 1.0}))}, 1);
  EXPECT_EQ(copies.lhs, 1.0);
  EXPECT_EQ(copies.rhs, 1.0);
}

TEST(Subtree_identity, random_environments) {
  auto gen = std::mt19937_64{36};
  for (auto rep = 0; rep < 1000; ++rep) {
    auto env = random_env(gen, 1 + rep % 8);
    auto z = 1 + static_cast<int>(gen() % 3);
    auto sides = subtree_extinction_identity(env, z);
    EXPECT_NEAR(sides.lhs, sides.rhs, 1e-12 * std::max(1.0, sides.rhs)) << "rep " << rep;
  }
}

TEST(Subtree_identity, null_event) {
  EXPECT_THROW(subtree_extinction_identity(Env_sequence{}, 1), Contract_error);
}

TEST(Smallest_reachable, example1_model) {
  auto r = smallest_reachable(example1_model(0.3, 0.4));
  EXPECT_EQ(r.z0, 2);
}

TEST(Smallest_reachable, gw_even_closure) {
  auto r = smallest_reachable(gw_model());
  EXPECT_EQ(r.z0, 2);
  auto evens = std::vector<std::int64_t>{};
  for (auto k = 2; k <= 64; k += 2) { evens.push_back(k); }
  EXPECT_EQ(r.closure, evens);
}

TEST(Smallest_reachable, full_support_gives_everything) {
  auto r = smallest_reachable(Environment_model{{Offspring_law::finite({0.2, 0.3, 0.5})}, {1.0}});
  EXPECT_EQ(r.z0, 1);
  EXPECT_EQ(r.closure.size(), 64U);
  EXPECT_EQ(r.closure.front(), 1);
  EXPECT_EQ(r.closure.back(), 64);
  EXPECT_EQ(smallest_reachable(Environment_model{{Offspring_law::linear_fractional(2.0, 8.0)}, {1.0}}).z0, 1);
}

TEST(Smallest_reachable, no_extinction) {
  auto model = two_state(Offspring_law::finite({0.0, 0.5, 0.5}), Offspring_law::finite({0.0, 1.0}), 0.5);
  EXPECT_THROW(smallest_reachable(model), Contract_error);
}

TEST(Fekete, gw_matches_oracle_and_subadditive) {
  auto rows = fekete_bounds(gw_model(), 2, 16);
  ASSERT_EQ(rows.size(), 16U);
  auto oracle = Markov_oracle{300};
  auto d = oracle.start(2);
  auto rows_gw = oracle.transition(gw());
  for (const auto& row : rows) {
    d = oracle.step(d, rows_gw);
    EXPECT_NEAR(row.a_n, -std::log(d[2]), 1e-10);
    EXPECT_NEAR(row.a_n_over_n, row.a_n / row.n, 1e-15);
    EXPECT_GT(row.a_n_over_n, std::log(2.0));
  }
  for (auto n = 1; n <= 8; ++n) {
    for (auto m = 1; m <= 8; ++m) {
      EXPECT_LE(rows[static_cast<std::size_t>(n + m - 1)].a_n,
                rows[static_cast<std::size_t>(n - 1)].a_n + rows[static_cast<std::size_t>(m - 1)].a_n + 1e-12);
    }
  }
  for (auto n = 2; n <= 16; ++n) {
    EXPECT_LT(rows[static_cast<std::size_t>(n - 1)].a_n_over_n, rows[static_cast<std::size_t>(n - 2)].a_n_over_n);
  }
  EXPECT_TRUE(std::isnan(rows[0].slope));
  EXPECT_NEAR(rows[15].slope, (rows[15].a_n - rows[7].a_n) / 8.0, 1e-14);
}

TEST(Fekete, gw_one_to_two_frozen) {
  // a_24 / 24 for P_1(Z_24 = 2), frozen from the Markov oracle above at cap 300
  auto rows = small_value_table(gw_model(), 1, 2, 24);
  EXPECT_NEAR(rows[23].a_n_over_n, 0.69738, 5e-6);
}

TEST(Fekete, example1_lower_bound_paths) {
  auto r = 0.3, p = 0.4;
  auto rows = small_value_table(example1_model(r, p), 1, 2, 12);
  for (const auto& row : rows) {
    // sub-events: stay at 1 under q_1 then split; or split at once and keep two alive by one death per step
    auto stay = std::pow(r, row.n - 1) * (1 - r) * (1 - p);
    auto pair = (1 - r) * (1 - p) * std::pow(2 * (1 - r) * (1 - p) * p, row.n - 1);
    EXPECT_GE(std::exp(-row.a_n) * (1 + 1e-12), std::max(stay, pair));
  }
}

TEST(Fekete, csv_layout) {
  auto csv = fekete_csv(fekete_bounds(gw_model(), 2, 4));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "n,a_n,a_n_over_n,slope");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

}  // namespace
}  // namespace bpre
