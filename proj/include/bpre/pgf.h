#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bpre/environment.h"

namespace bpre {

inline constexpr int default_degree = 256;
inline constexpr int max_degree = 1 << 14;
inline constexpr std::uint64_t enumeration_budget = std::uint64_t{1} << 26;

// Power series c_0..c_D of a (sub)probability generating function.
struct Truncated_pgf {
  std::vector<double> coeffs;
  double tail_mass = 0.0;  // 1 - sum c_k

  auto degree() const -> int { return static_cast<int>(coeffs.size()) - 1; }
  auto operator[](int k) const -> double { return coeffs[static_cast<std::size_t>(k)]; }

  static auto from_coeffs(std::vector<double> c) -> Truncated_pgf;
  static auto from_law(const Offspring_law& law, int degree) -> Truncated_pgf;
  static auto identity(int degree) -> Truncated_pgf;
};

// Coefficients of outer(inner(s)) up to `degree` (default: inner's degree).
// Exact up to rounding when outer carries no tail mass.
auto compose(const Truncated_pgf& outer, const Truncated_pgf& inner, int degree = -1) -> Truncated_pgf;

// out = law(g) truncated at g.size()-1.  out must not alias g.
void apply_law(const Offspring_law& law, std::span<const double> g, std::span<double> out);

// g^k truncated at degree
auto series_power(std::span<const double> g, std::int64_t k, int degree) -> std::vector<double>;

// Quenched environment (q_1, ..., q_n) with its walk.
class Env_sequence {
 public:
  Env_sequence() = default;
  explicit Env_sequence(std::vector<Offspring_law> laws);
  static auto from_states(const Environment_model& model, std::span<const int> states) -> Env_sequence;

  auto n() const -> int { return static_cast<int>(laws_.size()); }
  // 1-based: law(k) produces generation k from generation k-1
  auto law(int k) const -> const Offspring_law& { return laws_[static_cast<std::size_t>(k - 1)]; }
  auto laws() const -> const std::vector<Offspring_law>& { return laws_; }
  // S_0..S_n
  auto walk(int k) const -> double { return walk_[static_cast<std::size_t>(k)]; }
  // sum_{k<j} eta_lf(q_{k+1}) e^{-S_k}, j = 0..n
  auto eta_prefix(int j) const -> double { return eta_prefix_[static_cast<std::size_t>(j)]; }
  // L_n = min_{k<=n} S_k
  auto walk_minimum() const -> double;
  // last generation k <= n whose law has q(0) > 0; 0 if none
  auto kappa() const -> int;

 private:
  std::vector<Offspring_law> laws_;
  std::vector<double> walk_{0.0};
  std::vector<double> eta_prefix_{0.0};
};

// e_k = f_{k,n}(0) and p_k = 1 - e_k for k = 0..n, built from the survival maps
// so that p_k keeps full relative precision.
struct Extinction_ladder {
  std::vector<double> e;
  std::vector<double> p;
};

auto extinction_ladder(const Env_sequence& env) -> Extinction_ladder;

// f_{0,n} truncated at degree
auto quenched_series(const Env_sequence& env, int degree) -> Truncated_pgf;
// f_{k,n} truncated at degree, k = 0..n
auto quenched_series_all(const Env_sequence& env, int degree) -> std::vector<std::vector<double>>;

struct Quenched_law {
  Truncated_pgf pmf;  // law of Z_n given Z_0 = z0
  double survival;    // 1 - f_{0,n}(0)^z0
};

auto quenched_law(const Env_sequence& env, std::int64_t z0, int degree) -> Quenched_law;
// P(Z_n = j | env, Z_0 = z0); degree < 0 means degree = j
auto quenched_pmf(const Env_sequence& env, std::int64_t z0, std::int64_t j, int degree = -1) -> double;

// P_{z0}(Z_n = j) for j = 0..degree, exact by enumeration of all |A|^n environments.
auto annealed_pmf_vector(const Environment_model& model, std::int64_t z0, int n, int degree) -> std::vector<double>;
auto annealed_pmf(const Environment_model& model, std::int64_t z0, int n, std::int64_t j) -> double;

// q_n(z0) z0 e_0^{z0-1} prod_{i=1}^{n-1} f_i'(e_i): the quenched probability that Z_n = z0
// through a single surviving line.
auto log_phi_n(const Env_sequence& env, std::int64_t z0) -> double;
auto phi_n(const Env_sequence& env, std::int64_t z0) -> double;

// Law of the number Y_k of siblings to the right of the spine at generation k, given survival.
// k = 0 uses the z initial individuals; 1 <= k <= n uses q_k.  Finite-support or LF laws.
auto spine_right_count_pmf(const Env_sequence& env, const Extinction_ladder& ladder, std::int64_t z, int k,
                           std::int64_t i) -> double;

struct Identity_sides {
  double lhs;  // prod_{k<n} P(side subtree k is extinct by n), from the right-count laws
  double rhs;  // (p_{n-1}/p_{-1}) prod_{k<n} f_k'(e_k), f_0(s) = s^z
};

auto subtree_extinction_identity(const Env_sequence& env, std::int64_t z) -> Identity_sides;

struct Reachability {
  std::int64_t z0;
  std::vector<std::int64_t> closure;  // reachable sizes in [1, cap]
  bool capped;                        // membership above cap, or via paths through sizes above cap, not explored
  std::int64_t cap;
};

auto smallest_reachable(const Environment_model& model, std::int64_t cap = 64) -> Reachability;

struct Fekete_row {
  int n;
  double a_n;         // -log P_{z}(Z_n = j)
  double a_n_over_n;
  double slope;       // (a_n - a_{n/2}) / (n/2) for even n, NaN otherwise
};

// a_n = -log P_{z_start}(Z_n = j) for n = 1..n_max
auto small_value_table(const Environment_model& model, std::int64_t z_start, std::int64_t j, int n_max)
    -> std::vector<Fekete_row>;
auto fekete_bounds(const Environment_model& model, std::int64_t z0, int n_max) -> std::vector<Fekete_row>;
auto fekete_csv(const std::vector<Fekete_row>& rows) -> std::string;

}  // namespace bpre
