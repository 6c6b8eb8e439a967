#pragma once

#include <cstdint>

#include "bpre/environment.h"
#include "bpre/pgf.h"

namespace bpre {

// Sufficient statistics of an LF environment of length n:
//   f_{0,n}(s) = 1 - (1 - s) / (s_exp + (1 - s) eta_sum)
// with s_exp = e^{-S_n} and eta_sum = sum_{k<n} eta_lf(q_{k+1}) e^{-S_k}.
struct Lf_quenched_state {
  double s_exp = 1.0;
  double eta_sum = 0.0;

  static auto from_env(const Env_sequence& env) -> Lf_quenched_state;
  // Append one generation with law q.
  auto extend(const Offspring_law& q) const -> Lf_quenched_state;
  // State of this environment followed by `later`.
  auto then(const Lf_quenched_state& later) const -> Lf_quenched_state;
};

auto lf_fgen(const Lf_quenched_state& state, double s) -> double;
auto lf_derivative(const Lf_quenched_state& state, double s) -> double;
// P(Z_n > 0 | env, Z_0 = 1)
auto lf_survival(const Lf_quenched_state& state) -> double;
auto lf_quenched_pmf(const Lf_quenched_state& state, std::int64_t z0, std::int64_t j) -> double;

struct Lf_rho {
  double rho;
  Lf_regime regime;
};

auto lf_rho(const Environment_model& model) -> Lf_rho;

struct Survival_bounds {
  double lower;     // with eta_general: valid for every law
  double lower_lf;  // with eta_lf: equals the survival probability on LF environments
  double upper;     // min(1, e^{L_n})
};

auto agresti_survival_bounds(const Env_sequence& env) -> Survival_bounds;

}  // namespace bpre
