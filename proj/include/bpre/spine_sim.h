#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "bpre/environment.h"
#include "bpre/pgf.h"
#include "bpre/rng.h"

namespace bpre {

inline constexpr std::int64_t default_population_cap = 10'000'000;

struct Trajectory {
  std::vector<std::int64_t> sizes;  // Z_0..Z_n
  std::vector<int> states;          // environment state index per generation 1..n
  Env_sequence env;
  std::uint64_t root_seed = 0;
  std::uint64_t replicate_index = 0;
};

// States of generations 1..n drawn i.i.d. from the model.
auto sample_environment(const Environment_model& model, int n, Rng_stream& rng) -> std::vector<int>;

auto simulate_in_env(const Env_sequence& env, std::int64_t z0, Rng_stream& rng,
                     std::int64_t cap = default_population_cap) -> std::vector<std::int64_t>;
auto simulate_forward(const Environment_model& model, std::int64_t z0, int n, Rng_stream& rng,
                      std::int64_t cap = default_population_cap) -> Trajectory;

// Generation k individuals are indexed 0..Z_k-1 left to right; parents[k-1][i] is the
// index in generation k-1 of individual i of generation k.  Parent arrays are non-decreasing.
struct Genealogy_tree {
  std::int64_t z0 = 0;
  std::vector<std::vector<std::int64_t>> parents;

  auto n() const -> int { return static_cast<int>(parents.size()); }
  auto size(int k) const -> std::int64_t;
};

auto simulate_tree_in_env(const Env_sequence& env, std::int64_t z0, Rng_stream& rng,
                          std::int64_t cap = default_population_cap) -> Genealogy_tree;
auto simulate_tree(const Environment_model& model, std::int64_t z0, int n, Rng_stream& rng,
                   std::int64_t cap = default_population_cap) -> Genealogy_tree;

// Minimal k in 1..n such that every generation-n individual descends from one
// generation-(n-k) individual.  A single survivor gives 1.
auto mrca(const Genealogy_tree& tree) -> int;

struct Spine_sample {
  std::int64_t z0 = 1;
  std::vector<std::int64_t> right_counts;   // Y_0..Y_n
  std::vector<std::int64_t> left_siblings;  // siblings left of the spine, k = 0..n (k = 0: initial individuals)
  std::vector<std::int64_t> side_sizes;     // size at n of the subtree grown from the Y_k individuals, k = 0..n-1
  std::int64_t z_n = 0;                     // sum of side_sizes + Y_n + 1
  Genealogy_tree tree;                      // spine and right side only; the spine is index 0 in every generation

  // n - k_min + 1 where k_min >= 1 is the first generation whose right side reaches n; 1 if none.
  // Requires z0 == 1 (otherwise survivors may stem from several initial individuals).
  auto mrca() const -> int;
};

// Spine decomposition of the tree conditioned on Z_n > 0 in a fixed environment.
class Geiger_sampler {
 public:
  // series_degree >= target enables sample_mrca_at_size(target)
  Geiger_sampler(Env_sequence env, std::int64_t z0, int series_degree = -1);

  auto env() const -> const Env_sequence& { return env_; }
  auto ladder() const -> const Extinction_ladder& { return ladder_; }
  auto survival() const -> double { return survival_; }

  // Full sample with unconditioned forward subtrees on the right side.
  auto sample(Rng_stream& rng, std::int64_t cap = default_population_cap) const -> Spine_sample;

  // Draws the right side with each subtree's size at n taken from its exact marginal, stopping as
  // soon as the total exceeds target.  Returns the MRCA when Z_n == target, 0 otherwise.
  // Requires z0 == 1 and 1 <= target <= series_degree.
  auto sample_mrca_at_size(Rng_stream& rng, std::int64_t target) const -> int;

  // w[k-1] proportional to P(MRCA = k, Z_n = target | env) for k = 1..n, from
  // P(one ancestor at generation m carries all of Z_n = target) = F_m'(e_m) [s^target] f_{m,n}.
  // Same preconditions as sample_mrca_at_size.
  auto mrca_weights_at_size(std::int64_t target) const -> std::vector<double>;

 private:
  auto draw_right_count(int k, Rng_stream& rng) const -> std::int64_t;
  auto draw_left_siblings(int k, std::int64_t right, Rng_stream& rng) const -> std::int64_t;

  Env_sequence env_;
  std::int64_t z0_;
  Extinction_ladder ladder_;
  double survival_;
  std::vector<std::vector<double>> right_cdf_;  // per k, finite laws and k = 0
  int series_degree_;
  std::vector<std::vector<double>> series_;  // f_{k,n} truncated at series_degree_
};

auto geiger_sample(const Env_sequence& env, std::int64_t z0, Rng_stream& rng) -> Spine_sample;

struct Is_estimate {
  double estimate;
  double std_error;
  std::int64_t replicates;
};

// Unbiased estimate of P_{z0}(1 <= Z_n <= j_max): environments drawn from tilt(model, nu),
// quenched probabilities exact, weights mu^n e^{nu S_n}.  Replicate r uses stream (root_seed, r).
auto is_estimate_small_value(const Environment_model& model, std::int64_t z0, int n, std::int64_t j_max, double nu,
                             std::int64_t replicates, std::uint64_t root_seed) -> Is_estimate;

// P(1 <= Z_n <= j_max | env, Z_0 = z0), closed form on LF environments
auto quenched_small_value(const Env_sequence& env, std::int64_t z0, std::int64_t j_max) -> double;

enum class Mrca_method { rejection, geiger };

auto to_string(Mrca_method method) -> std::string;

struct Mrca_options {
  // Tilt for the environment stage of the geiger method; NaN picks clamp(critical tilt, 0, 1)
  // on LF models with negative increments and 0 otherwise.
  double nu = std::numeric_limits<double>::quiet_NaN();
  std::int64_t proposal_cap = 100'000'000;
  std::int64_t population_cap = default_population_cap;
  // geiger stage two: draw the MRCA from its exact law, or (false) filter survival-conditioned
  // spine samples to Z_n = target_size, which costs ~1/P(Z_n = target | Z_n > 0, env) tries
  bool exact_mrca_law = true;
  // Called roughly every 10^6 proposals with (proposed, accepted).
  std::function<void(std::int64_t, std::int64_t)> progress;
};

struct Mrca_histogram {
  int n = 0;
  std::int64_t target_size = 0;
  Mrca_method method = Mrca_method::geiger;
  std::vector<std::int64_t> counts;  // counts[k-1] for k = 1..n
  std::int64_t accepted = 0;
  std::int64_t proposed = 0;      // trees proposed
  std::int64_t env_proposed = 0;  // environments proposed (geiger method)
  double nu = 0.0;

  auto probability(int k) const -> double;
  // P(MRCA > threshold)
  auto tail(double threshold) const -> double;
};

// Empirical law of MRCA_n given Z_n = target_size, Z_0 = 1.  Replicate r uses stream
// (root_seed, r) and contributes exactly one accepted sample.
//
// rejection: forward trees from the model until Z_n = target_size.
// geiger: the environment is drawn from its law given Z_n = target_size (tilted proposal,
// accepted with probability e^{nu S_n} P(Z_n = target_size | env) <= 1), then the MRCA is
// drawn from its quenched law given Z_n = target_size (see Mrca_options::exact_mrca_law).
auto conditioned_mrca_sample(const Environment_model& model, int n, std::int64_t target_size, Mrca_method method,
                             std::int64_t replicates, std::uint64_t root_seed, const Mrca_options& options = {})
    -> Mrca_histogram;

}  // namespace bpre
