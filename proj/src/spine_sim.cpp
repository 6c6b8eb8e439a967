#include "bpre/spine_sim.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>

#include "bpre/lf.h"
#include "bpre/parallel.h"

namespace bpre {

namespace {

// Sum of `count` i.i.d. draws from law.
auto draw_total(const Offspring_law& law, std::int64_t count, Rng_stream& rng) -> std::int64_t {
  if (count == 0) { return 0; }
  if (law.is_lf()) {
    // atom at 0 plus geometric tails: Binomial number of parents with offspring,
    // then a negative binomial sum of their geometric excesses
    auto nonzero = std::binomial_distribution<std::int64_t>{count, 1.0 - law.q0()}(rng.engine());
    if (nonzero == 0 or law.lf_ratio() == 0.0) { return nonzero; }
    return nonzero + std::negative_binomial_distribution<std::int64_t>{nonzero, 1.0 - law.lf_ratio()}(rng.engine());
  }
  auto total = std::int64_t{0};
  for (auto i = std::int64_t{0}; i < count; ++i) { total += law.sample(rng); }
  return total;
}

void check_cap(std::int64_t size, std::int64_t cap) {
  if (size > cap) { throw Budget_error{"explosive trajectory: population above cap " + std::to_string(cap)}; }
}

// Grows `tree` through generations 1..n with law_at(k); stops early (returns false) on extinction.
template <typename Law_at>
auto grow_tree(Genealogy_tree& tree, std::int64_t z0, int n, Law_at&& law_at, Rng_stream& rng, std::int64_t cap,
               bool stop_on_extinction) -> bool {
  tree.z0 = z0;
  tree.parents.resize(static_cast<std::size_t>(n));
  auto prev = z0;
  for (auto k = 1; k <= n; ++k) {
    auto& gen = tree.parents[static_cast<std::size_t>(k) - 1];
    gen.clear();
    const Offspring_law& law = law_at(k);
    for (auto i = std::int64_t{0}; i < prev; ++i) {
      auto c = law.sample(rng);
      check_cap(static_cast<std::int64_t>(gen.size()) + c, cap);
      gen.insert(gen.end(), static_cast<std::size_t>(c), i);
    }
    prev = static_cast<std::int64_t>(gen.size());
    if (prev == 0 and stop_on_extinction) {
      for (auto rest = k; rest < n; ++rest) { tree.parents[static_cast<std::size_t>(rest)].clear(); }
      return false;
    }
  }
  return true;
}

auto find_in_cdf(const std::vector<double>& cdf, double u) -> std::int64_t {
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u * cdf.back());
  return std::min<std::int64_t>(it - cdf.begin(), static_cast<std::int64_t>(cdf.size()) - 1);
}

}  // namespace

auto sample_environment(const Environment_model& model, int n, Rng_stream& rng) -> std::vector<int> {
  auto states = std::vector<int>(static_cast<std::size_t>(n));
  for (auto& a : states) { a = model.sample_state(rng); }
  return states;
}

auto simulate_in_env(const Env_sequence& env, std::int64_t z0, Rng_stream& rng, std::int64_t cap)
    -> std::vector<std::int64_t> {
  if (z0 < 0) { throw Contract_error{"initial size must be non-negative"}; }
  auto sizes = std::vector<std::int64_t>{z0};
  sizes.reserve(static_cast<std::size_t>(env.n()) + 1);
  for (auto k = 1; k <= env.n(); ++k) {
    auto next = draw_total(env.law(k), sizes.back(), rng);
    check_cap(next, cap);
    sizes.push_back(next);
  }
  return sizes;
}

auto simulate_forward(const Environment_model& model, std::int64_t z0, int n, Rng_stream& rng, std::int64_t cap)
    -> Trajectory {
  auto t = Trajectory{};
  t.states = sample_environment(model, n, rng);
  t.env = Env_sequence::from_states(model, t.states);
  t.sizes = simulate_in_env(t.env, z0, rng, cap);
  t.root_seed = rng.root_seed();
  t.replicate_index = rng.replicate_index();
  return t;
}

auto Genealogy_tree::size(int k) const -> std::int64_t {
  if (k == 0) { return z0; }
  return static_cast<std::int64_t>(parents[static_cast<std::size_t>(k) - 1].size());
}

auto simulate_tree_in_env(const Env_sequence& env, std::int64_t z0, Rng_stream& rng, std::int64_t cap)
    -> Genealogy_tree {
  if (z0 < 0) { throw Contract_error{"initial size must be non-negative"}; }
  auto tree = Genealogy_tree{};
  grow_tree(tree, z0, env.n(), [&](int k) -> const Offspring_law& { return env.law(k); }, rng, cap, false);
  return tree;
}

auto simulate_tree(const Environment_model& model, std::int64_t z0, int n, Rng_stream& rng, std::int64_t cap)
    -> Genealogy_tree {
  auto states = sample_environment(model, n, rng);
  auto env = Env_sequence::from_states(model, states);
  return simulate_tree_in_env(env, z0, rng, cap);
}

auto mrca(const Genealogy_tree& tree) -> int {
  auto n = tree.n();
  if (n < 1) { throw Contract_error{"MRCA needs at least one generation"}; }
  auto survivors = tree.size(n);
  if (survivors == 0) { throw Contract_error{"MRCA: no survivors at generation n"}; }
  auto current = std::vector<std::int64_t>(static_cast<std::size_t>(survivors));
  std::iota(current.begin(), current.end(), 0);
  for (auto k = 1; k <= n; ++k) {
    const auto& parent = tree.parents[static_cast<std::size_t>(n - k)];
    auto ancestors = std::vector<std::int64_t>{};
    ancestors.reserve(current.size());
    for (auto i : current) { ancestors.push_back(parent[static_cast<std::size_t>(i)]); }
    std::sort(ancestors.begin(), ancestors.end());
    ancestors.erase(std::unique(ancestors.begin(), ancestors.end()), ancestors.end());
    if (ancestors.size() == 1) { return k; }
    current = std::move(ancestors);
  }
  throw Contract_error{"MRCA undefined for forest"};
}

auto Spine_sample::mrca() const -> int {
  auto n = static_cast<int>(right_counts.size()) - 1;
  if (not side_sizes.empty() and side_sizes[0] > 0) { throw Contract_error{"MRCA undefined for forest"}; }
  for (auto k = 1; k <= n; ++k) {
    auto reaches = k < n ? side_sizes[static_cast<std::size_t>(k)] > 0 : right_counts[static_cast<std::size_t>(n)] > 0;
    if (reaches) { return n - k + 1; }
  }
  return 1;
}

Geiger_sampler::Geiger_sampler(Env_sequence env, std::int64_t z0, int series_degree)
    : env_{std::move(env)}, z0_{z0}, ladder_{extinction_ladder(env_)}, series_degree_{series_degree} {
  if (z0_ < 1) { throw Contract_error{"Geiger sampler: z0 must be >= 1"}; }
  survival_ = -std::expm1(static_cast<double>(z0_) * std::log1p(-ladder_.p[0]));
  if (not (survival_ > 0.0)) { throw Contract_error{"conditioning on null event"}; }
  auto n = env_.n();
  right_cdf_.resize(static_cast<std::size_t>(n) + 1);
  for (auto k = 0; k <= n; ++k) {
    auto top = std::int64_t{0};
    if (k == 0) {
      top = z0_ - 1;
    } else if (env_.law(k).is_lf()) {
      continue;
    } else {
      top = env_.law(k).max_support() - 1;
    }
    auto& cdf = right_cdf_[static_cast<std::size_t>(k)];
    auto acc = 0.0;
    for (auto i = std::int64_t{0}; i <= top; ++i) {
      acc += spine_right_count_pmf(env_, ladder_, z0_, k, i);
      cdf.push_back(acc);
    }
  }
  if (series_degree_ >= 0) { series_ = quenched_series_all(env_, series_degree_); }
}

auto Geiger_sampler::draw_right_count(int k, Rng_stream& rng) const -> std::int64_t {
  if (k >= 1 and env_.law(k).is_lf()) {
    // P(Y_k = i) is proportional to r^i
    auto r = env_.law(k).lf_ratio();
    if (r == 0.0) { return 0; }
    return std::geometric_distribution<std::int64_t>{1.0 - r}(rng.engine());
  }
  return find_in_cdf(right_cdf_[static_cast<std::size_t>(k)], rng.uniform());
}

auto Geiger_sampler::draw_left_siblings(int k, std::int64_t right, Rng_stream& rng) const -> std::int64_t {
  if (k == 0) { return z0_ - right - 1; }
  const auto& law = env_.law(k);
  auto ek = ladder_.e[static_cast<std::size_t>(k)];
  if (law.is_lf()) {
    // given Y_k = i the family size j has weight r^(j-1) e^(j-i-1): geometric in j - i - 1
    auto ratio = law.lf_ratio() * ek;
    if (ratio == 0.0) { return 0; }
    return std::geometric_distribution<std::int64_t>{1.0 - ratio}(rng.engine());
  }
  auto cdf = std::vector<double>{};
  auto acc = 0.0;
  for (auto j = right + 1; j <= law.max_support(); ++j) {
    acc += law.pmf(j) * std::pow(ek, static_cast<double>(j - right - 1));
    cdf.push_back(acc);
  }
  return find_in_cdf(cdf, rng.uniform());
}

auto Geiger_sampler::sample(Rng_stream& rng, std::int64_t cap) const -> Spine_sample {
  auto n = env_.n();
  auto out = Spine_sample{};
  out.z0 = z0_;
  out.right_counts.resize(static_cast<std::size_t>(n) + 1);
  out.left_siblings.resize(static_cast<std::size_t>(n) + 1);
  out.side_sizes.assign(static_cast<std::size_t>(n), 0);

  // origin[i] = generation whose right side individual i descends from; -1 on the spine
  auto y0 = draw_right_count(0, rng);
  out.right_counts[0] = y0;
  out.left_siblings[0] = draw_left_siblings(0, y0, rng);
  out.tree.z0 = 1 + y0;
  out.tree.parents.resize(static_cast<std::size_t>(n));
  auto origin = std::vector<int>(static_cast<std::size_t>(1 + y0), 0);
  origin[0] = -1;
  for (auto k = 1; k <= n; ++k) {
    auto yk = draw_right_count(k, rng);
    out.right_counts[static_cast<std::size_t>(k)] = yk;
    out.left_siblings[static_cast<std::size_t>(k)] = draw_left_siblings(k, yk, rng);
    auto& gen = out.tree.parents[static_cast<std::size_t>(k) - 1];
    auto next_origin = std::vector<int>{};
    check_cap(1 + yk, cap);
    gen.assign(static_cast<std::size_t>(1 + yk), 0);
    next_origin.assign(static_cast<std::size_t>(1 + yk), k);
    next_origin[0] = -1;
    for (auto i = std::size_t{1}; i < origin.size(); ++i) {
      auto c = env_.law(k).sample(rng);
      check_cap(static_cast<std::int64_t>(gen.size()) + c, cap);
      gen.insert(gen.end(), static_cast<std::size_t>(c), static_cast<std::int64_t>(i));
      next_origin.insert(next_origin.end(), static_cast<std::size_t>(c), origin[i]);
    }
    origin = std::move(next_origin);
  }
  for (auto o : origin) {
    if (o >= 0 and o < n) { ++out.side_sizes[static_cast<std::size_t>(o)]; }
  }
  out.z_n = static_cast<std::int64_t>(origin.size());
  return out;
}

auto Geiger_sampler::sample_mrca_at_size(Rng_stream& rng, std::int64_t target) const -> int {
  if (z0_ != 1) { throw Contract_error{"MRCA sampling requires Z_0 = 1"}; }
  if (target < 1 or target > series_degree_) { throw Contract_error{"sample_mrca_at_size: target above series degree"}; }
  auto n = env_.n();
  auto total = std::int64_t{1};
  auto k_min = 0;
  for (auto k = 1; k <= n; ++k) {
    auto y = draw_right_count(k, rng);
    if (y == 0) { continue; }
    auto z = std::int64_t{0};
    if (k == n) {
      z = y;
    } else {
      auto room = target - total;
      auto u = rng.uniform();
      if (room == 0) {
        auto all_die = std::exp(static_cast<double>(y) * std::log1p(-ladder_.p[static_cast<std::size_t>(k)]));
        if (u >= all_die) { return 0; }
      } else {
        auto pw = series_power(series_[static_cast<std::size_t>(k)], y, static_cast<int>(room));
        auto acc = 0.0;
        z = -1;
        for (auto j = std::size_t{0}; j < pw.size(); ++j) {
          acc += pw[j];
          if (u < acc) {
            z = static_cast<std::int64_t>(j);
            break;
          }
        }
        if (z < 0) { return 0; }
      }
    }
    if (z > 0) {
      total += z;
      if (k_min == 0) { k_min = k; }
      if (total > target) { return 0; }
    }
  }
  if (total != target) { return 0; }
  return k_min == 0 ? 1 : n - k_min + 1;
}

auto Geiger_sampler::mrca_weights_at_size(std::int64_t target) const -> std::vector<double> {
  if (z0_ != 1) { throw Contract_error{"MRCA sampling requires Z_0 = 1"}; }
  if (target < 2 or target > series_degree_) { throw Contract_error{"mrca_weights_at_size: target outside 2..series degree"}; }
  auto n = env_.n();
  // log A_m, A_m = prod_{i<=m} f_i'(e_i) * [s^target] f_{m,n}
  auto log_a = std::vector<double>(static_cast<std::size_t>(n) + 1, -std::numeric_limits<double>::infinity());
  auto log_chain = 0.0;
  auto top = -std::numeric_limits<double>::infinity();
  for (auto m = 0; m <= n; ++m) {
    if (m > 0) { log_chain += std::log(env_.law(m).pgf_d1(ladder_.e[static_cast<std::size_t>(m)])); }
    auto coeff = series_[static_cast<std::size_t>(m)][static_cast<std::size_t>(target)];
    if (coeff > 0.0) {
      log_a[static_cast<std::size_t>(m)] = log_chain + std::log(coeff);
      top = std::max(top, log_a[static_cast<std::size_t>(m)]);
    }
  }
  auto w = std::vector<double>(static_cast<std::size_t>(n), 0.0);
  if (not std::isfinite(top)) { return w; }
  // deepest single-ancestor generation m gives MRCA n - m; A_n = 0 since target >= 2
  for (auto m = 0; m < n; ++m) {
    auto here = std::exp(log_a[static_cast<std::size_t>(m)] - top);
    auto next = std::exp(log_a[static_cast<std::size_t>(m) + 1] - top);
    w[static_cast<std::size_t>(n - m) - 1] = std::max(0.0, here - next);
  }
  return w;
}

auto geiger_sample(const Env_sequence& env, std::int64_t z0, Rng_stream& rng) -> Spine_sample {
  return Geiger_sampler{env, z0}.sample(rng);
}

auto quenched_small_value(const Env_sequence& env, std::int64_t z0, std::int64_t j_max) -> double {
  if (j_max < 1) { return 0.0; }
  auto lf_pure = std::all_of(env.laws().begin(), env.laws().end(), [](const auto& l) { return l.is_lf(); });
  if (lf_pure and z0 == 1) {
    auto st = Lf_quenched_state::from_env(env);
    auto d = st.s_exp + st.eta_sum;
    auto r = st.eta_sum / d;
    // sum_{j=1}^{J} (s_exp / d^2) r^(j-1)
    auto geo = r <= 0.0  ? 1.0
               : r < 1.0 ? -std::expm1(static_cast<double>(j_max) * std::log(r)) / (1.0 - r)
                         : static_cast<double>(j_max);
    return st.s_exp / (d * d) * geo;
  }
  if (j_max > max_degree) { throw Budget_error{"quenched_small_value: j_max above degree cap"}; }
  auto law = quenched_law(env, z0, static_cast<int>(j_max));
  auto acc = 0.0;
  for (auto j = 1; j <= j_max; ++j) { acc += law.pmf[j]; }
  return acc;
}

auto is_estimate_small_value(const Environment_model& model, std::int64_t z0, int n, std::int64_t j_max, double nu,
                             std::int64_t replicates, std::uint64_t root_seed) -> Is_estimate {
  if (replicates < 1) { throw Contract_error{"replicates must be >= 1"}; }
  auto tilted = tilt(model, nu);
  auto log_mu = std::log(tilted.mu);
  auto values = std::vector<double>(static_cast<std::size_t>(replicates));
  parallel_for(values.size(), [&](std::size_t r) {
    auto rng = Rng_stream{root_seed, r};
    auto states = sample_environment(tilted.model, n, rng);
    auto env = Env_sequence::from_states(model, states);
    auto log_weight = n * log_mu + nu * env.walk(n);
    values[r] = std::exp(log_weight) * quenched_small_value(env, z0, j_max);
  });
  auto mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(replicates);
  auto ss = 0.0;
  for (auto v : values) { ss += (v - mean) * (v - mean); }
  auto se = replicates > 1 ? std::sqrt(ss / static_cast<double>(replicates - 1) / static_cast<double>(replicates)) : 0.0;
  return {mean, se, replicates};
}

auto to_string(Mrca_method method) -> std::string { return method == Mrca_method::rejection ? "rejection" : "geiger"; }

auto Mrca_histogram::probability(int k) const -> double {
  if (accepted == 0 or k < 1 or k > n) { return 0.0; }
  return static_cast<double>(counts[static_cast<std::size_t>(k) - 1]) / static_cast<double>(accepted);
}

auto Mrca_histogram::tail(double threshold) const -> double {
  auto acc = 0.0;
  for (auto k = 1; k <= n; ++k) {
    if (k > threshold) { acc += probability(k); }
  }
  return acc;
}

namespace {

struct Replicate_result {
  int mrca = 0;
  std::int64_t proposed = 0;
  std::int64_t env_proposed = 0;
};

class Proposal_counter {
 public:
  Proposal_counter(const Mrca_options& options, std::int64_t replicates)
      : options_{options}, replicates_{replicates} {}

  // Adds one proposal; throws once the global cap is exceeded.
  void tick() {
    auto now = ++proposed_;
    if (now > options_.proposal_cap) {
      throw Budget_error{"MRCA sampling: proposal cap " + std::to_string(options_.proposal_cap) + " reached with " +
                         std::to_string(accepted_.load()) + " of " + std::to_string(replicates_) +
                         " accepted (acceptance rate " + std::to_string(static_cast<double>(accepted_.load()) /
                                                                         static_cast<double>(now)) + ")"};
    }
    if (options_.progress and now % 1'000'000 == 0) {
      auto lock = std::lock_guard{mutex_};
      options_.progress(now, accepted_.load());
    }
  }
  void accept() { ++accepted_; }

 private:
  const Mrca_options& options_;
  std::int64_t replicates_;
  std::atomic<std::int64_t> proposed_{0};
  std::atomic<std::int64_t> accepted_{0};
  std::mutex mutex_;
};

auto auto_nu(const Environment_model& model) -> double {
  if (not model.is_lf_pure()) { return 0.0; }
  auto negative = std::any_of(model.increments().begin(), model.increments().end(), [](double x) { return x < 0.0; });
  if (not negative or not (walk_summary(model).drift > 0.0)) { return 0.0; }
  return std::clamp(solve_critical_tilt(model), 0.0, 1.0);
}

}  // namespace

auto conditioned_mrca_sample(const Environment_model& model, int n, std::int64_t target_size, Mrca_method method,
                             std::int64_t replicates, std::uint64_t root_seed, const Mrca_options& options)
    -> Mrca_histogram {
  if (target_size < 2) { throw Contract_error{"conditioned MRCA: target size must be >= 2"}; }
  if (n < 1) { throw Contract_error{"conditioned MRCA: n must be >= 1"}; }
  if (replicates < 1) { throw Contract_error{"replicates must be >= 1"}; }
  if (target_size > max_degree) { throw Budget_error{"conditioned MRCA: target size above degree cap"}; }

  auto hist = Mrca_histogram{};
  hist.n = n;
  hist.target_size = target_size;
  hist.method = method;
  hist.counts.assign(static_cast<std::size_t>(n), 0);

  auto nu = std::isnan(options.nu) ? auto_nu(model) : options.nu;
  if (method == Mrca_method::geiger and nu != 0.0 and not (model.is_lf_pure() and nu >= 0.0 and nu <= 1.0)) {
    throw Contract_error{"conditioned MRCA: tilt must be 0 unless the model is LF and 0 <= nu <= 1"};
  }
  hist.nu = method == Mrca_method::geiger ? nu : 0.0;
  auto tilted = tilt(model, nu);
  auto counter = Proposal_counter{options, replicates};
  auto results = std::vector<Replicate_result>(static_cast<std::size_t>(replicates));

  parallel_for(results.size(), [&](std::size_t r) {
    auto rng = Rng_stream{root_seed, r};
    auto& res = results[r];
    if (method == Mrca_method::rejection) {
      auto tree = Genealogy_tree{};
      auto states = std::vector<int>(static_cast<std::size_t>(n));
      for (;;) {
        counter.tick();
        ++res.proposed;
        for (auto& a : states) { a = model.sample_state(rng); }
        auto alive = grow_tree(tree, 1, n, [&](int k) -> const Offspring_law& {
          return model.law(states[static_cast<std::size_t>(k) - 1]);
        }, rng, options.population_cap, true);
        if (alive and tree.size(n) == target_size) {
          res.mrca = mrca(tree);
          break;
        }
      }
    } else {
      for (;;) {
        counter.tick();
        ++res.env_proposed;
        auto states = sample_environment(tilted.model, n, rng);
        auto env = Env_sequence::from_states(model, states);
        // P(env)/P_nu(env) = mu^n e^{nu S_n}; the target weight is that times P(Z_n = t | env)
        auto p_target = model.is_lf_pure() ? lf_quenched_pmf(Lf_quenched_state::from_env(env), 1, target_size)
                                           : quenched_pmf(env, 1, target_size);
        auto accept = std::exp(nu * env.walk(n)) * p_target;
        if (accept > 1.0 + 1e-9) { throw std::logic_error{"conditioned MRCA: acceptance probability above 1"}; }
        if (rng.uniform() >= accept) { continue; }
        auto sampler = Geiger_sampler{env, 1, static_cast<int>(target_size)};
        if (options.exact_mrca_law) {
          auto w = sampler.mrca_weights_at_size(target_size);
          ++res.proposed;
          res.mrca = 1 + static_cast<int>(std::discrete_distribution<int>{w.begin(), w.end()}(rng.engine()));
          break;
        }
        for (;;) {
          counter.tick();
          ++res.proposed;
          auto k = sampler.sample_mrca_at_size(rng, target_size);
          if (k > 0) {
            res.mrca = k;
            break;
          }
        }
        break;
      }
    }
    counter.accept();
  });

  for (const auto& res : results) {
    ++hist.counts[static_cast<std::size_t>(res.mrca) - 1];
    ++hist.accepted;
    hist.proposed += res.proposed;
    hist.env_proposed += res.env_proposed;
  }
  if (hist.accepted == 0) { throw Budget_error{"conditioned MRCA: zero accepted replicates"}; }
  return hist;
}

}  // namespace bpre
