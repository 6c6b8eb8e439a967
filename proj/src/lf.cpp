#include "bpre/lf.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bpre {

auto Lf_quenched_state::from_env(const Env_sequence& env) -> Lf_quenched_state {
  auto n = env.n();
  return {std::exp(-env.walk(n)), env.eta_prefix(n)};
}

auto Lf_quenched_state::extend(const Offspring_law& q) const -> Lf_quenched_state {
  auto mom = mean_and_factorial_moments(q);
  return {s_exp / mom.m, eta_sum + mom.eta_lf * s_exp};
}

auto Lf_quenched_state::then(const Lf_quenched_state& later) const -> Lf_quenched_state {
  return {s_exp * later.s_exp, eta_sum + s_exp * later.eta_sum};
}

auto lf_fgen(const Lf_quenched_state& state, double s) -> double {
  return 1.0 - (1.0 - s) / (state.s_exp + (1.0 - s) * state.eta_sum);
}

auto lf_derivative(const Lf_quenched_state& state, double s) -> double {
  auto den = state.s_exp + (1.0 - s) * state.eta_sum;
  return state.s_exp / (den * den);
}

auto lf_survival(const Lf_quenched_state& state) -> double { return 1.0 / (state.s_exp + state.eta_sum); }

auto lf_quenched_pmf(const Lf_quenched_state& state, std::int64_t z0, std::int64_t j) -> double {
  if (z0 < 0) { throw Contract_error{"initial size must be non-negative"}; }
  if (j < 0) { return 0.0; }
  auto d = state.s_exp + state.eta_sum;
  auto r = state.eta_sum / d;
  if (z0 == 1) {
    if (j == 0) { return 1.0 - 1.0 / d; }
    return state.s_exp / (d * d) * std::pow(r, static_cast<double>(j - 1));
  }
  if (j > max_degree) { throw Budget_error{"lf_quenched_pmf: target size above degree cap"}; }
  auto c = std::vector<double>(static_cast<std::size_t>(j) + 1, 0.0);
  c[0] = 1.0 - 1.0 / d;
  auto term = state.s_exp / (d * d);
  for (auto k = std::size_t{1}; k < c.size(); ++k) {
    c[k] = term;
    term *= r;
  }
  return series_power(c, z0, static_cast<int>(j))[static_cast<std::size_t>(j)];
}

auto lf_rho(const Environment_model& model) -> Lf_rho {
  if (not model.is_lf_pure()) { throw Contract_error{"closed form requires LF"}; }
  auto s = walk_summary(model);
  if (not (s.drift > 0.0)) { throw Contract_error{"not supercritical"}; }
  if (not (extinction_in_one_step(model) > 0.0)) { throw Contract_error{"lf_rho: requires P(Z_1 = 0) > 0"}; }
  auto regime = classify_lf_regime(model);
  auto strong_branch = -s.log_tilted_moment(1.0);
  if (regime == Lf_regime::strongly) { return {strong_branch, regime}; }
  auto lambda0 = rate_function_at_zero(model).lambda0;
  if (regime == Lf_regime::intermediate and std::abs(lambda0 - strong_branch) > 1e-9) {
    throw std::logic_error{"lf_rho: branch formulas disagree at the Intermediate boundary"};
  }
  return {regime == Lf_regime::weakly ? lambda0 : strong_branch, regime};
}

auto agresti_survival_bounds(const Env_sequence& env) -> Survival_bounds {
  auto n = env.n();
  auto general = std::exp(-env.walk(n));
  for (auto k = 0; k < n; ++k) {
    general += mean_and_factorial_moments(env.law(k + 1)).eta_general * std::exp(-env.walk(k));
  }
  auto lf = std::exp(-env.walk(n)) + env.eta_prefix(n);
  return {1.0 / general, 1.0 / lf, std::min(1.0, std::exp(env.walk_minimum()))};
}

}  // namespace bpre
