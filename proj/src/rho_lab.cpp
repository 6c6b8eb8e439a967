#include "bpre/rho_lab.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bpre {

namespace {
constexpr auto nan = std::numeric_limits<double>::quiet_NaN();
constexpr auto ordering_tol = 1e-9;
}  // namespace

auto rho_report(const Environment_model& model, int n_max, const std::string& model_id) -> Rho_report {
  if (n_max < 1) { throw Contract_error{"rho_report: n_max must be >= 1"}; }
  auto summary = walk_summary(model);
  if (not (summary.drift > 0.0)) { throw Contract_error{"not supercritical"}; }
  if (not (extinction_in_one_step(model) > 0.0)) {
    throw Contract_error{"P(Z_1 = 0) = 0: use the monotone-case rate"};
  }
  auto rep = Rho_report{};
  rep.model_id = model_id;
  rep.drift = summary.drift;
  rep.z0 = smallest_reachable(model).z0;
  rep.fekete = fekete_bounds(model, rep.z0, n_max);
  rep.fekete_upper = std::numeric_limits<double>::infinity();
  for (const auto& row : rep.fekete) {
    if (row.a_n_over_n < rep.fekete_upper) {
      rep.fekete_upper = row.a_n_over_n;
      rep.fekete_argmin = row.n;
    }
  }
  rep.slope_m = n_max / 2;
  rep.slope_estimate = rep.slope_m >= 1 ? rep.fekete[static_cast<std::size_t>(2 * rep.slope_m) - 1].slope : nan;
  rep.lambda0 = rate_function_at_zero(model);
  if (model.is_lf_pure()) { rep.lf_closed_form = lf_rho(model); }
  auto gamma = assumption1_witness(model);
  rep.diagnostics = {gamma, gamma > 0.0, true};
  rep.lattice = lattice_flag(model);

  if (rep.lf_closed_form) {
    auto rho = rep.lf_closed_form->rho;
    if (rho > rep.fekete_upper + ordering_tol) { rep.ordering_violations.push_back("lf_closed_form > fekete_upper"); }
    if (rho > rep.lambda0.lambda0 + ordering_tol) { rep.ordering_violations.push_back("lf_closed_form > lambda0"); }
  }
  return rep;
}

auto monotone_rho(const Environment_model& model) -> Monotone_rho {
  auto e_q1 = 0.0;
  for (auto a = 0; a < model.size(); ++a) {
    if (model.weight(a) > 0.0 and model.law(a).q0() > 0.0) {
      throw Contract_error{"monotone_rho: every state must have q(0) = 0"};
    }
    e_q1 += model.weight(a) * model.law(a).pmf(1);
  }
  if (e_q1 <= 0.0) { return {std::numeric_limits<double>::infinity(), true}; }
  return {0.0 - std::log(e_q1), false};  // +0 for the immortal line
}

auto example1_model(double r, double p) -> Environment_model {
  if (not (r > 0.0 and r < 1.0 and p > 0.0 and p < 1.0)) { throw Contract_error{"example 1: r, p must lie in (0,1)"}; }
  return Environment_model{{Offspring_law::finite({0.0, 1.0}), Offspring_law::finite({p, 0.0, 1.0 - p})},
                           {r, 1.0 - r}};
}

auto example1_suite(double r, double p, int n_max) -> Example1_report {
  auto model = example1_model(r, p);
  auto rep = Example1_report{};
  rep.r = r;
  rep.p = p;
  rep.threshold = 2.0 * (1.0 - p) * p / (1.0 + 2.0 * (1.0 - p) * p);
  rep.separation_expected = r < rep.threshold;
  rep.max_log_error = 0.0;
  auto log_r = std::log(r);
  // the only environment that keeps a single line at size 1 is (q_1, ..., q_1): any q_2 generation
  // leaves an even or zero population
  for (auto n = 1; n <= n_max; ++n) {
    auto all_q1 = Env_sequence{std::vector<Offspring_law>(static_cast<std::size_t>(n), model.law(0))};
    auto row = Example1_row{};
    row.n = n;
    auto pmf = annealed_pmf_vector(model, 1, n, 2);
    row.p_two = pmf[2];
    if (n <= example1_enumeration_limit) {
      row.p_one = pmf[1];
      row.by_enumeration = true;
    } else {
      row.p_one = std::exp(n * log_r) * quenched_pmf(all_q1, 1, 1);
      row.by_enumeration = false;
    }
    row.log_error = std::abs(std::log(row.p_one) - n * log_r);
    row.gap = std::log(row.p_two) / n - log_r;
    rep.max_log_error = std::max(rep.max_log_error, row.log_error);
    rep.rows.push_back(row);
  }
  return rep;
}

auto example2_model(double r, double p, int a) -> Environment_model {
  if (not (r > 0.0 and r < 1.0)) { throw Contract_error{"example 2: r must lie in (0,1)"}; }
  if (not (p > 0.0 and p < 0.5)) { throw Contract_error{"example 2: p must lie in (0, 1/2)"}; }
  if (a <= 2) { throw Contract_error{"example 2: a must exceed 2"}; }
  auto q1 = std::vector<double>(static_cast<std::size_t>(a) + 1, 0.0);
  q1[1] = p;
  q1[static_cast<std::size_t>(a)] = 1.0 - p;
  auto q2 = std::vector<double>(static_cast<std::size_t>(a) + 1, 0.0);
  q2[0] = p;
  q2[2] = p;
  q2[static_cast<std::size_t>(a)] = 1.0 - 2.0 * p;
  return Environment_model{{Offspring_law::finite(q1), Offspring_law::finite(q2)}, {r, 1.0 - r}};
}

auto example2_suite(double r, double p, int a, int n_max) -> Example2_report {
  auto model = example2_model(r, p, a);
  const auto& f2 = model.law(1);
  auto rep = Example2_report{};
  rep.r = r;
  rep.p = p;
  rep.a = a;

  // f_2(0) = p > 0 and f_2'(1) > 1, so f_2(s) - s changes sign once on (0, 1)
  auto g = [&](double s) { return f2.pgf(s) - s; };
  auto lo = 0.0;
  auto hi = 0.5;
  while (g(hi) >= 0.0) {
    hi = 0.5 * (1.0 + hi);
    if (1.0 - hi < 1e-15) { throw Contract_error{"example 2: no fixed point below 1"}; }
  }
  for (auto it = 0; it < 200; ++it) {
    auto mid = 0.5 * (lo + hi);
    if (mid <= lo or mid >= hi) { break; }
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  rep.s_e = std::abs(g(lo)) < std::abs(g(hi)) ? lo : hi;
  rep.fixed_point_residual = std::abs(g(rep.s_e));
  rep.sufficiency = 2.0 * p > f2.pgf(2.0 * p);
  rep.s_e_below_2p = rep.s_e <= 2.0 * p;

  auto ad = static_cast<double>(a);
  auto premise = p * p + 2.0 * (1.0 - p) * p * (ad + 1.0) * ad / 2.0 * std::pow(2.0 * p, ad - 1.0) +
                 (1.0 - p) * (1.0 - p) * (2.0 * ad) * (2.0 * ad - 1.0) / 2.0 * std::pow(2.0 * p, 2.0 * ad - 2.0);
  rep.three_p2_premise = premise <= 3.0 * p * p;
  rep.conclusive = rep.sufficiency and rep.three_p2_premise and 3.0 * p * p < r * p;
  rep.upper_bound_log = std::log(3.0 * p * p);
  rep.lower_bound_log = std::log(r * p);

  for (auto n = 1; n <= n_max; ++n) {
    auto row = Example2_row{};
    row.n = n;
    row.p22 = annealed_pmf(model, 2, n, 2);
    row.p12 = annealed_pmf(model, 1, n, 2);
    row.log_gap = (std::log(row.p22) - std::log(row.p12)) / n;
    rep.rows.push_back(row);
  }
  return rep;
}

auto mrca_regime_suite(const Environment_model& model, const std::vector<int>& n_list, std::int64_t replicates,
                       std::uint64_t root_seed, double delta, const Mrca_options& options) -> Mrca_regime_report {
  if (not model.is_lf_pure()) { throw Contract_error{"MRCA regime suite requires an LF model"}; }
  if (not (delta > 0.0 and delta < 1.0)) { throw Contract_error{"delta must lie in (0,1)"}; }
  auto rep = Mrca_regime_report{};
  rep.regime = classify_lf_regime(model);
  rep.delta = delta;
  rep.target_size = 2;
  rep.tail_decay_rate = nan;

  auto se = [](double p, double count) { return count > 0.0 ? std::sqrt(p * (1.0 - p) / count) : nan; };
  for (auto idx = std::size_t{0}; idx < n_list.size(); ++idx) {
    auto n = n_list[idx];
    auto pt = Mrca_point{};
    pt.n = n;
    try {
      // distinct n get disjoint stream families
      auto seed = root_seed + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(n);
      pt.histogram = conditioned_mrca_sample(model, n, rep.target_size, Mrca_method::geiger, replicates, seed, options);
    } catch (const Budget_error& err) {
      pt.partial = true;
      pt.note = err.what();
      rep.points.push_back(pt);
      continue;
    }
    const auto& h = pt.histogram;
    auto count = static_cast<double>(h.accepted);
    auto nd = static_cast<double>(n);
    pt.p_first = h.probability(1);
    pt.se_first = se(pt.p_first, count);
    pt.p_last = h.probability(n);
    pt.se_last = se(pt.p_last, count);
    pt.scaled_last = nd * pt.p_last;
    pt.scaled_last_se = nd * pt.se_last;
    pt.k_delta = static_cast<int>(std::ceil(delta * nd));
    auto pd = h.probability(pt.k_delta);
    pt.scaled_delta = std::pow(nd, 1.5) * pd;
    pt.scaled_delta_se = std::pow(nd, 1.5) * se(pd, count);
    pt.tail_delta = h.tail(delta * nd);
    pt.tail_delta_se = se(pt.tail_delta, count);
    rep.points.push_back(pt);
  }

  if (rep.regime == Lf_regime::strongly) {
    auto xs = std::vector<double>{};
    auto ys = std::vector<double>{};
    for (const auto& pt : rep.points) {
      if (not pt.partial and pt.tail_delta > 0.0) {
        xs.push_back(pt.n);
        ys.push_back(std::log(pt.tail_delta));
      }
    }
    if (xs.size() >= 2) {
      auto mx = 0.0, my = 0.0;
      for (auto i = std::size_t{0}; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
      }
      mx /= static_cast<double>(xs.size());
      my /= static_cast<double>(xs.size());
      auto sxy = 0.0, sxx = 0.0;
      for (auto i = std::size_t{0}; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
      }
      rep.tail_decay_rate = sxx > 0.0 ? sxy / sxx : nan;
    }
  }
  return rep;
}

}  // namespace bpre
