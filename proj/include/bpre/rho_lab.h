#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bpre/environment.h"
#include "bpre/lf.h"
#include "bpre/pgf.h"
#include "bpre/spine_sim.h"

namespace bpre {

struct Positivity_diagnostics {
  double gamma_witness;     // 1 - max_a q_a(0)
  bool assumption1;         // gamma_witness > 0 and E|X| finite
  bool abs_moment_finite;   // always true on a finite alphabet
};

struct Rho_report {
  std::string model_id;
  std::int64_t z0 = 0;
  std::vector<Fekete_row> fekete;  // a_n = -log P_{z0}(Z_n = z0)
  double fekete_upper = 0.0;       // min_n a_n / n
  int fekete_argmin = 0;
  double slope_estimate = 0.0;     // (a_{2m} - a_m)/m at the largest m with 2m <= n_max
  int slope_m = 0;
  double drift = 0.0;
  Rate_at_zero lambda0{};
  std::optional<Lf_rho> lf_closed_form;
  Positivity_diagnostics diagnostics{};
  bool lattice = false;
  std::vector<std::string> ordering_violations;  // empty when the certified orderings hold
};

auto rho_report(const Environment_model& model, int n_max, const std::string& model_id = "") -> Rho_report;

struct Monotone_rho {
  double rho;     // -log E[Q(1)]
  bool infinite;  // E[Q(1)] = 0: P_k(Z_n = j) vanishes for large n

  auto rate(std::int64_t k) const -> double { return static_cast<double>(k) * rho; }
};

// Case P(Z_1 = 0) = 0.
auto monotone_rho(const Environment_model& model) -> Monotone_rho;

// Two states: q_1 = delta_1 with weight r; q_2(0) = p, q_2(2) = 1 - p with weight 1 - r.
auto example1_model(double r, double p) -> Environment_model;

struct Example1_row {
  int n;
  double p_one;         // P_1(Z_n = 1)
  double log_error;     // |log P_1(Z_n = 1) - n log r|
  bool by_enumeration;  // false: parity shortcut
  double p_two;         // P_1(Z_n = 2), exact by enumeration
  double gap;           // (1/n) log P_1(Z_n = 2) - log r
};

struct Example1_report {
  double r;
  double p;
  double threshold;  // 2(1-p)p / (1 + 2(1-p)p)
  bool separation_expected;
  std::vector<Example1_row> rows;
  double max_log_error;
};

inline constexpr int example1_enumeration_limit = 10;

auto example1_suite(double r, double p, int n_max) -> Example1_report;

// q_1(1) = p, q_1(a) = 1 - p with weight r; q_2(0) = p, q_2(2) = p, q_2(a) = 1 - 2p with weight 1 - r.
auto example2_model(double r, double p, int a) -> Environment_model;

struct Example2_row {
  int n;
  double p22;       // P_2(Z_n = 2)
  double p12;       // P_1(Z_n = 2)
  double log_gap;   // (1/n)(log P_2(Z_n = 2) - log P_1(Z_n = 2))
};

struct Example2_report {
  double r;
  double p;
  int a;
  double s_e;                // smallest fixed point of f_2
  double fixed_point_residual;
  bool sufficiency;          // 2p > f_2(2p)
  bool s_e_below_2p;
  bool three_p2_premise;     // p^2 + 2(1-p)p C(a+1,2)(2p)^(a-1) + (1-p)^2 C(2a,2)(2p)^(2a-2) <= 3p^2
  bool conclusive;           // sufficiency, premise and 3p^2 < rp all hold
  double upper_bound_log;    // log(3p^2), limit of (1/n) log P_2(Z_n = 2) lies below
  double lower_bound_log;    // log(rp), limit of (1/n) log P_1(Z_n = 2) lies above
  std::vector<Example2_row> rows;
};

auto example2_suite(double r, double p, int a, int n_max) -> Example2_report;

struct Mrca_point {
  int n;
  bool partial = false;  // sampling budget exhausted
  std::string note;
  Mrca_histogram histogram;
  double p_first = 0.0, se_first = 0.0;  // k = 1
  double p_last = 0.0, se_last = 0.0;    // k = n
  double scaled_last = 0.0, scaled_last_se = 0.0;  // n P(MRCA = n)
  int k_delta = 0;                                  // ceil(delta n)
  double scaled_delta = 0.0, scaled_delta_se = 0.0; // n^{3/2} P(MRCA = k_delta)
  double tail_delta = 0.0, tail_delta_se = 0.0;     // P(MRCA > delta n)
};

struct Mrca_regime_report {
  Lf_regime regime;
  double delta;
  std::int64_t target_size;
  std::vector<Mrca_point> points;
  // Strongly: least-squares slope of log P(MRCA > delta n) against n (NaN when undefined)
  double tail_decay_rate;
};

auto mrca_regime_suite(const Environment_model& model, const std::vector<int>& n_list, std::int64_t replicates,
                       std::uint64_t root_seed, double delta = 0.5, const Mrca_options& options = {})
    -> Mrca_regime_report;

}  // namespace bpre
