#include "bpre/pgf.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "bpre/parallel.h"

namespace bpre {

namespace {

void check_degree(int degree) {
  if (degree < 0) { throw Contract_error{"truncation degree must be non-negative"}; }
  if (degree > max_degree) {
    throw Budget_error{"truncation degree " + std::to_string(degree) + " exceeds cap " + std::to_string(max_degree)};
  }
}

// out = a * b truncated at out.size()-1; out must not alias a or b
void mul_trunc(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  auto d = out.size();
  std::fill(out.begin(), out.end(), 0.0);
  for (auto i = std::size_t{0}; i < d and i < a.size(); ++i) {
    if (a[i] == 0.0) { continue; }
    for (auto j = std::size_t{0}; i + j < d and j < b.size(); ++j) { out[i + j] += a[i] * b[j]; }
  }
}

auto total(std::span<const double> c) -> double { return std::accumulate(c.begin(), c.end(), 0.0); }

}  // namespace

auto Truncated_pgf::from_coeffs(std::vector<double> c) -> Truncated_pgf {
  if (c.empty()) { throw Contract_error{"truncated pgf: no coefficients"}; }
  auto sum = 0.0;
  for (auto x : c) {
    if (not (x >= 0.0)) { throw Contract_error{"truncated pgf: negative coefficient"}; }
    sum += x;
  }
  if (sum > 1.0 + 1e-12) { throw Contract_error{"truncated pgf: coefficients sum above 1"}; }
  return {std::move(c), 1.0 - sum};
}

auto Truncated_pgf::from_law(const Offspring_law& law, int degree) -> Truncated_pgf {
  check_degree(degree);
  auto c = law.coefficients(degree);
  auto t = 1.0 - total(c);
  return {std::move(c), std::max(t, 0.0)};
}

auto Truncated_pgf::identity(int degree) -> Truncated_pgf {
  check_degree(degree);
  auto c = std::vector<double>(static_cast<std::size_t>(degree) + 1, 0.0);
  if (degree >= 1) { c[1] = 1.0; }
  return {std::move(c), degree >= 1 ? 0.0 : 1.0};
}

auto compose(const Truncated_pgf& outer, const Truncated_pgf& inner, int degree) -> Truncated_pgf {
  if (degree < 0) { degree = inner.degree(); }
  check_degree(degree);
  auto d = static_cast<std::size_t>(degree) + 1;
  auto acc = std::vector<double>(d, 0.0);
  auto tmp = std::vector<double>(d, 0.0);
  for (auto k = outer.coeffs.size(); k-- > 0;) {
    mul_trunc(acc, inner.coeffs, tmp);
    tmp[0] += outer.coeffs[k];
    std::swap(acc, tmp);
  }
  for (auto& x : acc) { x = std::max(x, 0.0); }
  auto t = 1.0 - total(acc);
  return {std::move(acc), std::max(t, 0.0)};
}

void apply_law(const Offspring_law& law, std::span<const double> g, std::span<double> out) {
  auto d = g.size();
  if (law.is_lf()) {
    // f(g) = 1 - h / (a + c h), h = 1 - g; series division by den = a + c h
    auto a = law.lf_a();
    auto c = law.lf_c();
    auto den0 = a + c * (1.0 - g[0]);
    auto h0 = 1.0 - g[0];
    auto q0 = h0 / den0;
    out[0] = law.pgf(g[0]);
    if (d == 1) { return; }
    // q = h/den; store -q_k in out[k]: q_k = (h_k - sum_{i=1..k} den_i q_{k-i}) / den0 with h_k = -g_k, den_i = -c g_i
    // so -q_k = (g_k + c sum_{i=1..k} g_i q_{k-i}) / den0 ... with q_{k-i} = -out[k-i] for k-i >= 1
    for (auto k = std::size_t{1}; k < d; ++k) {
      auto s = g[k] * q0;
      for (auto i = std::size_t{1}; i < k; ++i) { s -= g[i] * out[k - i]; }
      out[k] = (g[k] - c * s) / den0;
    }
    return;
  }
  const auto& p = law.probs();
  if (d == 1) {
    out[0] = law.pgf(g[0]);
    return;
  }
  auto acc = std::vector<double>(d, 0.0);
  auto tmp = std::vector<double>(d, 0.0);
  for (auto k = p.size(); k-- > 0;) {
    mul_trunc(acc, g, tmp);
    tmp[0] += p[k];
    std::swap(acc, tmp);
  }
  std::copy(acc.begin(), acc.end(), out.begin());
}

auto series_power(std::span<const double> g, std::int64_t k, int degree) -> std::vector<double> {
  auto d = static_cast<std::size_t>(degree) + 1;
  auto result = std::vector<double>(d, 0.0);
  result[0] = 1.0;
  auto base = std::vector<double>(d, 0.0);
  std::copy_n(g.begin(), std::min(d, g.size()), base.begin());
  auto tmp = std::vector<double>(d, 0.0);
  while (k > 0) {
    if (k & 1) {
      mul_trunc(result, base, tmp);
      std::swap(result, tmp);
    }
    k >>= 1;
    if (k > 0) {
      mul_trunc(base, base, tmp);
      std::swap(base, tmp);
    }
  }
  return result;
}

Env_sequence::Env_sequence(std::vector<Offspring_law> laws) : laws_{std::move(laws)} {
  walk_.reserve(laws_.size() + 1);
  eta_prefix_.reserve(laws_.size() + 1);
  for (const auto& law : laws_) {
    auto s_prev = walk_.back();
    eta_prefix_.push_back(eta_prefix_.back() + mean_and_factorial_moments(law).eta_lf * std::exp(-s_prev));
    walk_.push_back(s_prev + std::log(law.mean()));
  }
}

auto Env_sequence::from_states(const Environment_model& model, std::span<const int> states) -> Env_sequence {
  auto laws = std::vector<Offspring_law>{};
  laws.reserve(states.size());
  for (auto a : states) { laws.push_back(model.law(a)); }
  return Env_sequence{std::move(laws)};
}

auto Env_sequence::walk_minimum() const -> double { return *std::min_element(walk_.begin(), walk_.end()); }

auto Env_sequence::kappa() const -> int {
  for (auto k = n(); k >= 1; --k) {
    if (law(k).q0() > 0.0) { return k; }
  }
  return 0;
}

auto extinction_ladder(const Env_sequence& env) -> Extinction_ladder {
  auto n = static_cast<std::size_t>(env.n());
  auto ladder = Extinction_ladder{std::vector<double>(n + 1, 0.0), std::vector<double>(n + 1, 1.0)};
  for (auto k = n; k-- > 0;) {
    ladder.p[k] = env.law(static_cast<int>(k) + 1).survival_map(ladder.p[k + 1]);
    ladder.e[k] = 1.0 - ladder.p[k];
  }
  return ladder;
}

auto quenched_series_all(const Env_sequence& env, int degree) -> std::vector<std::vector<double>> {
  check_degree(degree);
  auto n = static_cast<std::size_t>(env.n());
  auto out = std::vector<std::vector<double>>(n + 1, std::vector<double>(static_cast<std::size_t>(degree) + 1, 0.0));
  out[n] = Truncated_pgf::identity(degree).coeffs;
  for (auto k = n; k-- > 0;) { apply_law(env.law(static_cast<int>(k) + 1), out[k + 1], out[k]); }
  return out;
}

auto quenched_series(const Env_sequence& env, int degree) -> Truncated_pgf {
  check_degree(degree);
  auto d = static_cast<std::size_t>(degree) + 1;
  auto g = Truncated_pgf::identity(degree).coeffs;
  auto next = std::vector<double>(d, 0.0);
  for (auto k = env.n(); k >= 1; --k) {
    apply_law(env.law(k), g, next);
    std::swap(g, next);
  }
  for (auto& x : g) { x = std::max(x, 0.0); }
  auto t = 1.0 - total(g);
  return {std::move(g), std::max(t, 0.0)};
}

auto quenched_law(const Env_sequence& env, std::int64_t z0, int degree) -> Quenched_law {
  if (z0 < 0) { throw Contract_error{"initial size must be non-negative"}; }
  auto f = quenched_series(env, degree);
  auto c = series_power(f.coeffs, z0, degree);
  for (auto& x : c) { x = std::max(x, 0.0); }
  auto t = 1.0 - total(c);
  auto p0 = extinction_ladder(env).p[0];
  auto survival = z0 == 0 ? 0.0 : -std::expm1(static_cast<double>(z0) * std::log1p(-p0));
  return {{std::move(c), std::max(t, 0.0)}, survival};
}

auto quenched_pmf(const Env_sequence& env, std::int64_t z0, std::int64_t j, int degree) -> double {
  if (j < 0) { return 0.0; }
  if (degree < 0) { degree = static_cast<int>(std::min<std::int64_t>(j, max_degree + 1)); }
  if (j > degree) { throw Contract_error{"raise truncation degree"}; }
  return quenched_law(env, z0, degree).pmf[static_cast<int>(j)];
}

auto annealed_pmf_vector(const Environment_model& model, std::int64_t z0, int n, int degree)
    -> std::vector<double> {
  check_degree(degree);
  if (z0 < 0 or n < 0) { throw Contract_error{"annealed_pmf: z0 and n must be non-negative"}; }
  auto d = static_cast<std::size_t>(degree) + 1;
  auto out = std::vector<double>(d, 0.0);
  if (n == 0) {
    if (z0 <= degree) { out[static_cast<std::size_t>(z0)] = 1.0; }
    return out;
  }
  auto active = std::vector<int>{};
  for (auto a = 0; a < model.size(); ++a) {
    if (model.weight(a) > 0.0) { active.push_back(a); }
  }
  auto k = active.size();
  auto leaves = 1.0;
  for (auto i = 0; i < n; ++i) { leaves *= static_cast<double>(k); }
  if (leaves > static_cast<double>(enumeration_budget)) {
    throw Budget_error{"annealed enumeration of " + std::to_string(k) + "^" + std::to_string(n) +
                       " environments exceeds budget 2^26; use the importance-sampling estimator"};
  }
  if (z0 == 0) {
    out[0] = 1.0;
    return out;
  }

  // Split the top levels (generations n, n-1, ...) into fixed prefixes so that the
  // reduction order is the same for any worker count.
  auto split = 0;
  auto prefixes = std::size_t{1};
  while (split < n and prefixes < 64) {
    ++split;
    prefixes *= k;
  }
  auto partial = std::vector<std::vector<double>>(prefixes, std::vector<double>(d, 0.0));

  parallel_for(prefixes, [&](std::size_t prefix) {
    auto levels = std::vector<std::vector<double>>(static_cast<std::size_t>(n) + 1, std::vector<double>(d, 0.0));
    levels[0] = Truncated_pgf::identity(degree).coeffs;
    auto weight = 1.0;
    auto code = prefix;
    for (auto l = 0; l < split; ++l) {
      auto a = active[code % k];
      code /= k;
      weight *= model.weight(a);
      apply_law(model.law(a), levels[static_cast<std::size_t>(l)], levels[static_cast<std::size_t>(l) + 1]);
    }
    auto& acc = partial[prefix];
    // level l holds f_{n-l,n}; the leaf level n holds f_{0,n}
    auto dfs = [&](auto&& self, int l, double w) -> void {
      const auto& g = levels[static_cast<std::size_t>(l)];
      if (l == n) {
        if (z0 == 1) {
          for (auto i = std::size_t{0}; i < d; ++i) { acc[i] += w * g[i]; }
        } else {
          auto pw = series_power(g, z0, degree);
          for (auto i = std::size_t{0}; i < d; ++i) { acc[i] += w * pw[i]; }
        }
        return;
      }
      for (auto a : active) {
        apply_law(model.law(a), g, levels[static_cast<std::size_t>(l) + 1]);
        self(self, l + 1, w * model.weight(a));
      }
    };
    dfs(dfs, split, weight);
  });

  for (const auto& part : partial) {
    for (auto i = std::size_t{0}; i < d; ++i) { out[i] += part[i]; }
  }
  for (auto& x : out) { x = std::max(x, 0.0); }
  return out;
}

auto annealed_pmf(const Environment_model& model, std::int64_t z0, int n, std::int64_t j) -> double {
  if (j < 0) { return 0.0; }
  if (j > max_degree) { throw Budget_error{"annealed_pmf: target size above degree cap"}; }
  return annealed_pmf_vector(model, z0, n, static_cast<int>(j))[static_cast<std::size_t>(j)];
}

auto log_phi_n(const Env_sequence& env, std::int64_t z0) -> double {
  if (z0 < 1) { throw Contract_error{"phi_n: z0 must be >= 1"}; }
  if (env.n() < 1) { throw Contract_error{"phi_n: empty environment"}; }
  constexpr auto neg_inf = -std::numeric_limits<double>::infinity();
  auto n = env.n();
  auto ladder = extinction_ladder(env);
  auto qz = env.law(n).pmf(z0);
  if (qz <= 0.0) { return neg_inf; }
  auto acc = std::log(qz) + std::log(static_cast<double>(z0));
  if (z0 > 1) {
    if (ladder.e[0] <= 0.0) { return neg_inf; }
    acc += static_cast<double>(z0 - 1) * std::log(ladder.e[0]);
  }
  for (auto i = 1; i <= n - 1; ++i) {
    auto d1 = env.law(i).pgf_d1(ladder.e[static_cast<std::size_t>(i)]);
    if (d1 <= 0.0) { return neg_inf; }
    acc += std::log(d1);
  }
  return acc;
}

auto phi_n(const Env_sequence& env, std::int64_t z0) -> double { return std::exp(log_phi_n(env, z0)); }

auto spine_right_count_pmf(const Env_sequence& env, const Extinction_ladder& ladder, std::int64_t z, int k,
                           std::int64_t i) -> double {
  if (i < 0) { return 0.0; }
  auto e0 = ladder.e[0];
  if (k == 0) {
    if (i >= z) { return 0.0; }
    auto p_minus = -std::expm1(static_cast<double>(z) * std::log1p(-ladder.p[0]));
    return ladder.p[0] / p_minus * std::pow(e0, static_cast<double>(z - i - 1));
  }
  const auto& law = env.law(k);
  auto ek = ladder.e[static_cast<std::size_t>(k)];
  auto ratio = ladder.p[static_cast<std::size_t>(k)] / ladder.p[static_cast<std::size_t>(k) - 1];
  if (law.is_lf()) {
    auto r = law.lf_ratio();
    auto atom = (1.0 - law.q0()) * (1.0 - r);
    return ratio * atom * std::pow(r, static_cast<double>(i)) / (1.0 - r * ek);
  }
  auto acc = 0.0;
  auto top = law.max_support();
  for (auto j = i + 1; j <= top; ++j) { acc += law.pmf(j) * std::pow(ek, static_cast<double>(j - i - 1)); }
  return ratio * acc;
}

auto subtree_extinction_identity(const Env_sequence& env, std::int64_t z) -> Identity_sides {
  if (env.n() < 1 or z < 1) { throw Contract_error{"subtree identity: need n >= 1 and z >= 1"}; }
  auto n = env.n();
  auto ladder = extinction_ladder(env);
  auto p_minus = -std::expm1(static_cast<double>(z) * std::log1p(-ladder.p[0]));
  if (not (p_minus > 0.0)) { throw Contract_error{"conditioning on null event"}; }

  auto lhs = 1.0;
  for (auto k = 0; k < n; ++k) {
    auto ek = ladder.e[static_cast<std::size_t>(k)];
    auto factor = 0.0;
    if (k >= 1 and env.law(k).is_lf()) {
      // geometric right counts: sum_i c r^i e^i in closed form
      auto r = env.law(k).lf_ratio();
      factor = spine_right_count_pmf(env, ladder, z, k, 0) / (1.0 - r * ek);
    } else {
      auto top = k == 0 ? z - 1 : env.law(k).max_support() - 1;
      for (auto i = std::int64_t{0}; i <= top; ++i) {
        factor += spine_right_count_pmf(env, ladder, z, k, i) * std::pow(ek, static_cast<double>(i));
      }
    }
    lhs *= factor;
  }

  auto rhs = ladder.p[static_cast<std::size_t>(n) - 1] / p_minus;
  rhs *= static_cast<double>(z) * std::pow(ladder.e[0], static_cast<double>(z - 1));
  for (auto k = 1; k < n; ++k) { rhs *= env.law(k).pgf_d1(ladder.e[static_cast<std::size_t>(k)]); }
  return {lhs, rhs};
}

auto smallest_reachable(const Environment_model& model, std::int64_t cap) -> Reachability {
  if (cap < 1) { throw Contract_error{"closure cap must be >= 1"}; }
  auto capped = false;
  auto seeds = std::set<std::int64_t>{};
  auto z0 = std::numeric_limits<std::int64_t>::max();
  // supports intersected with [0, cap]
  auto supports = std::vector<std::vector<std::int64_t>>{};
  for (auto a = 0; a < model.size(); ++a) {
    const auto& law = model.law(a);
    auto top = law.max_support();
    if (top > cap) { capped = true; }
    auto s = std::vector<std::int64_t>{};
    for (auto j = std::int64_t{0}; j <= std::min(top, cap); ++j) {
      if (law.pmf(j) > 0.0) { s.push_back(j); }
    }
    if (model.weight(a) > 0.0) { supports.push_back(s); }
    if (model.weight(a) == 0.0 or law.q0() <= 0.0) { continue; }
    // smallest j >= 1 in the support; LF laws always have q(1) > 0
    auto j_min = law.is_lf() ? std::int64_t{1} : std::int64_t{0};
    for (auto j = std::int64_t{1}; j_min == 0 and j <= top; ++j) {
      if (law.pmf(j) > 0.0) { j_min = j; }
    }
    if (j_min >= 1) { z0 = std::min(z0, j_min); }
    for (auto j : s) {
      if (j >= 1) { seeds.insert(j); }
    }
  }
  if (z0 == std::numeric_limits<std::int64_t>::max()) {
    throw Contract_error{"no extinction possible: use monotone-case formula"};
  }

  auto reached = std::vector<bool>(static_cast<std::size_t>(cap) + 1, false);
  auto queue = std::vector<std::int64_t>(seeds.begin(), seeds.end());
  for (auto j : queue) { reached[static_cast<std::size_t>(j)] = true; }
  for (auto head = std::size_t{0}; head < queue.size(); ++head) {
    auto i = queue[head];
    for (const auto& s : supports) {
      // sums of i draws from s, bounded by cap
      auto cur = std::vector<bool>(static_cast<std::size_t>(cap) + 1, false);
      cur[0] = true;
      for (auto step = 0; step < i; ++step) {
        auto nxt = std::vector<bool>(static_cast<std::size_t>(cap) + 1, false);
        for (auto v = std::int64_t{0}; v <= cap; ++v) {
          if (not cur[static_cast<std::size_t>(v)]) { continue; }
          for (auto x : s) {
            if (v + x <= cap) {
              nxt[static_cast<std::size_t>(v + x)] = true;
            } else {
              capped = true;
            }
          }
        }
        cur = std::move(nxt);
      }
      for (auto v = std::int64_t{1}; v <= cap; ++v) {
        if (cur[static_cast<std::size_t>(v)] and not reached[static_cast<std::size_t>(v)]) {
          reached[static_cast<std::size_t>(v)] = true;
          queue.push_back(v);
        }
      }
    }
  }
  auto closure = std::vector<std::int64_t>{};
  for (auto v = std::int64_t{1}; v <= cap; ++v) {
    if (reached[static_cast<std::size_t>(v)]) { closure.push_back(v); }
  }
  return {z0, std::move(closure), capped, cap};
}

auto small_value_table(const Environment_model& model, std::int64_t z_start, std::int64_t j, int n_max)
    -> std::vector<Fekete_row> {
  if (n_max < 1) { throw Contract_error{"n_max must be >= 1"}; }
  auto rows = std::vector<Fekete_row>{};
  constexpr auto nan = std::numeric_limits<double>::quiet_NaN();
  for (auto n = 1; n <= n_max; ++n) {
    auto p = annealed_pmf(model, z_start, n, j);
    auto a = p > 0.0 ? -std::log(p) : std::numeric_limits<double>::infinity();
    auto slope = nan;
    if (n % 2 == 0) {
      auto half = rows[static_cast<std::size_t>(n / 2) - 1].a_n;
      slope = (a - half) / (n / 2);
    }
    rows.push_back({n, a, a / n, slope});
  }
  return rows;
}

auto fekete_bounds(const Environment_model& model, std::int64_t z0, int n_max) -> std::vector<Fekete_row> {
  return small_value_table(model, z0, z0, n_max);
}

auto fekete_csv(const std::vector<Fekete_row>& rows) -> std::string {
  auto os = std::ostringstream{};
  os.precision(17);
  os << "n,a_n,a_n_over_n,slope\n";
  for (const auto& r : rows) {
    os << r.n << ',' << r.a_n << ',' << r.a_n_over_n << ',';
    if (not std::isnan(r.slope)) { os << r.slope; }
    os << '\n';
  }
  return os.str();
}

}  // namespace bpre
