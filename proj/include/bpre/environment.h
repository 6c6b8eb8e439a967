#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bpre/offspring_law.h"

namespace bpre {

// Law of the i.i.d. environment Q over a finite alphabet of offspring laws.
class Environment_model {
 public:
  Environment_model(std::vector<Offspring_law> laws, std::vector<double> weights);

  auto size() const -> int { return static_cast<int>(laws_.size()); }
  auto law(int a) const -> const Offspring_law& { return laws_[static_cast<std::size_t>(a)]; }
  auto weight(int a) const -> double { return weights_[static_cast<std::size_t>(a)]; }
  auto laws() const -> const std::vector<Offspring_law>& { return laws_; }
  auto weights() const -> const std::vector<double>& { return weights_; }
  // x_a = log m_{q_a}
  auto increment(int a) const -> double { return x_[static_cast<std::size_t>(a)]; }
  auto increments() const -> const std::vector<double>& { return x_; }
  auto is_lf_pure() const -> bool;

  auto sample_state(Rng_stream& rng) const -> int;

 private:
  std::vector<Offspring_law> laws_;
  std::vector<double> weights_;
  std::vector<double> x_;
  std::vector<double> cdf_;
};

struct Walk_increment_summary {
  std::vector<double> x;
  std::vector<double> w;
  double drift;         // E[X]
  double cross_moment;  // E[X e^{-X}]

  // E[e^{-lambda X}]
  auto tilted_moment(double lambda) const -> double;
  // log E[e^{-lambda X}], evaluated without overflow
  auto log_tilted_moment(double lambda) const -> double;
  // E[X e^{-lambda X}]
  auto tilted_cross(double lambda) const -> double;
};

auto walk_summary(const Environment_model& model) -> Walk_increment_summary;

enum class Rate_flag {
  interior,        // minimizer attained at finite lambda*
  boundary,        // P(X<0)=0, P(X=0)>0: infimum in the limit lambda -> inf
  no_small_value,  // X > 0 a.s.: Lambda(0) = +inf
};

struct Rate_at_zero {
  double lambda_star;  // +inf unless interior
  double lambda0;      // -log inf_{lambda>=0} E[e^{-lambda X}]
  Rate_flag flag;
};

auto rate_function_at_zero(const Environment_model& model) -> Rate_at_zero;

struct Tilted_model {
  Environment_model model;
  double mu;  // E[e^{-nu X}] under the original weights
};

// Weights w_a <- w_a e^{-nu x_a} / mu; laws unchanged.
auto tilt(const Environment_model& model, double nu) -> Tilted_model;

// Root of E[X e^{-nu X}] = 0.
auto solve_critical_tilt(const Environment_model& model) -> double;

enum class Lf_regime { strongly, intermediate, weakly };

auto to_string(Lf_regime regime) -> std::string;
auto to_string(Rate_flag flag) -> std::string;

inline constexpr double regime_tolerance = 1e-12;

// Sign of E[X e^{-X}] with tolerance regime_tolerance.
auto classify_lf_regime(const Environment_model& model) -> Lf_regime;

// True when every nonzero x_a is an integer multiple of one span (rational ratios, denominators <= 64).
auto lattice_flag(const Environment_model& model) -> bool;

// gamma = 1 - max_a q_a(0); Q(0) <= 1 - gamma holds surely.  Zero when some state is sterile.
auto assumption1_witness(const Environment_model& model) -> double;

// P(Z_1 = 0) = E[Q(0)]
auto extinction_in_one_step(const Environment_model& model) -> double;

}  // namespace bpre
