#include "bpre/environment.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace bpre {

namespace {

constexpr double zero_increment_tol = 1e-14;

auto is_zero_increment(double x) -> bool { return std::abs(x) <= zero_increment_tol; }

}  // namespace

Environment_model::Environment_model(std::vector<Offspring_law> laws, std::vector<double> weights)
    : laws_{std::move(laws)}, weights_{std::move(weights)} {
  if (laws_.empty()) { throw Contract_error{"environment model: at least one state required"}; }
  if (laws_.size() != weights_.size()) { throw Contract_error{"environment model: states and weights differ in length"}; }
  auto total = 0.0;
  for (auto w : weights_) {
    if (not std::isfinite(w) or w < 0.0) { throw Contract_error{"environment model: negative weight"}; }
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Contract_error{"environment model: weights sum to " + std::to_string(total) + ", not 1"};
  }
  x_.reserve(laws_.size());
  for (const auto& law : laws_) { x_.push_back(std::log(law.mean())); }
  cdf_.resize(weights_.size());
  std::partial_sum(weights_.begin(), weights_.end(), cdf_.begin());
  cdf_.back() = 1.0;
}

auto Environment_model::is_lf_pure() const -> bool {
  return std::all_of(laws_.begin(), laws_.end(), [](const auto& l) { return l.is_lf(); });
}

auto Environment_model::sample_state(Rng_stream& rng) const -> int {
  auto u = rng.uniform();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  auto a = static_cast<int>(it - cdf_.begin());
  a = std::min(a, size() - 1);
  // never return a zero-weight state through the clamp above
  while (weights_[static_cast<std::size_t>(a)] == 0.0 and a > 0) { --a; }
  return a;
}

auto Walk_increment_summary::log_tilted_moment(double lambda) const -> double {
  auto peak = -std::numeric_limits<double>::infinity();
  for (auto a = std::size_t{0}; a < x.size(); ++a) {
    if (w[a] > 0.0) { peak = std::max(peak, std::log(w[a]) - lambda * x[a]); }
  }
  auto acc = 0.0;
  for (auto a = std::size_t{0}; a < x.size(); ++a) {
    if (w[a] > 0.0) { acc += std::exp(std::log(w[a]) - lambda * x[a] - peak); }
  }
  return peak + std::log(acc);
}

auto Walk_increment_summary::tilted_moment(double lambda) const -> double {
  return std::exp(log_tilted_moment(lambda));
}

auto Walk_increment_summary::tilted_cross(double lambda) const -> double {
  auto acc = 0.0;
  for (auto a = std::size_t{0}; a < x.size(); ++a) {
    if (w[a] > 0.0) { acc += w[a] * x[a] * std::exp(-lambda * x[a]); }
  }
  return acc;
}

auto walk_summary(const Environment_model& model) -> Walk_increment_summary {
  auto s = Walk_increment_summary{model.increments(), model.weights(), 0.0, 0.0};
  for (auto a = 0; a < model.size(); ++a) {
    s.drift += model.weight(a) * model.increment(a);
  }
  s.cross_moment = s.tilted_cross(1.0);
  return s;
}

auto rate_function_at_zero(const Environment_model& model) -> Rate_at_zero {
  auto s = walk_summary(model);
  if (not (s.drift > 0.0)) { throw Contract_error{"not supercritical"}; }

  auto has_negative = false;
  auto p_zero = 0.0;
  for (auto a = 0; a < model.size(); ++a) {
    if (model.weight(a) == 0.0) { continue; }
    if (is_zero_increment(model.increment(a))) {
      p_zero += model.weight(a);
    } else if (model.increment(a) < 0.0) {
      has_negative = true;
    }
  }
  constexpr auto inf = std::numeric_limits<double>::infinity();
  if (not has_negative) {
    if (p_zero > 0.0) { return {inf, -std::log(p_zero), Rate_flag::boundary}; }
    return {inf, inf, Rate_flag::no_small_value};
  }

  // g(lambda) = E[e^{-lambda X}] is convex with g'(0) = -E[X] < 0: bracket the minimizer
  auto g = [&](double l) { return s.log_tilted_moment(l); };
  auto hi = 1.0;
  while (s.tilted_cross(hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e6) { throw Contract_error{"rate_function_at_zero: minimizer not bracketed"}; }
  }
  auto lo = 0.0;
  const auto inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto c = hi - inv_phi * (hi - lo);
  auto d = lo + inv_phi * (hi - lo);
  auto gc = g(c);
  auto gd = g(d);
  while (hi - lo > 1e-10) {
    if (gc < gd) {
      hi = d;
      d = c;
      gd = gc;
      c = hi - inv_phi * (hi - lo);
      gc = g(c);
    } else {
      lo = c;
      c = d;
      gc = gd;
      d = lo + inv_phi * (hi - lo);
      gd = g(d);
    }
  }
  // Golden section stalls near 1e-8 on flat minima; finish on the sign of g'(lambda) = -E[X e^{-lambda X}]
  auto width = 1e-9;
  auto polish_lo = lo, polish_hi = hi;
  while (width < 1.0 and not (s.tilted_cross(polish_lo) > 0.0 and s.tilted_cross(polish_hi) < 0.0)) {
    width *= 4.0;
    polish_lo = std::max(0.0, lo - width);
    polish_hi = hi + width;
  }
  lo = polish_lo;
  hi = polish_hi;
  if (s.tilted_cross(lo) > 0.0 and s.tilted_cross(hi) < 0.0) {
    for (auto it = 0; it < 200 and hi - lo > 0.0; ++it) {
      auto mid = 0.5 * (lo + hi);
      if (mid <= lo or mid >= hi) { break; }
      (s.tilted_cross(mid) > 0.0 ? lo : hi) = mid;
    }
  }
  auto lambda_star = 0.5 * (lo + hi);
  return {lambda_star, -g(lambda_star), Rate_flag::interior};
}

auto tilt(const Environment_model& model, double nu) -> Tilted_model {
  auto s = walk_summary(model);
  auto log_mu = s.log_tilted_moment(nu);
  auto w = std::vector<double>(static_cast<std::size_t>(model.size()));
  for (auto a = 0; a < model.size(); ++a) {
    auto wa = model.weight(a);
    w[static_cast<std::size_t>(a)] = wa > 0.0 ? std::exp(std::log(wa) - nu * model.increment(a) - log_mu) : 0.0;
  }
  // absorb rounding so the constructor's 1e-12 check holds
  auto total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) { x /= total; }
  return {Environment_model{model.laws(), std::move(w)}, std::exp(log_mu)};
}

auto solve_critical_tilt(const Environment_model& model) -> double {
  auto s = walk_summary(model);
  auto has_negative = false;
  for (auto a = 0; a < model.size(); ++a) {
    if (model.weight(a) > 0.0 and model.increment(a) < 0.0 and not is_zero_increment(model.increment(a))) {
      has_negative = true;
    }
  }
  if (not has_negative) { throw Contract_error{"no negative increments: critical tilt undefined"}; }
  if (not (s.drift > 0.0)) { throw Contract_error{"critical tilt: E[X] must be positive"}; }

  // h(nu) = E[X e^{-nu X}] is strictly decreasing with h(0) > 0
  auto lo = 0.0;
  auto hi = 1.0;
  while (s.tilted_cross(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) { throw Contract_error{"critical tilt: root not bracketed"}; }
  }
  for (auto it = 0; it < 400; ++it) {
    auto mid = 0.5 * (lo + hi);
    if (mid <= lo or mid >= hi) { break; }
    (s.tilted_cross(mid) > 0.0 ? lo : hi) = mid;
  }
  return std::abs(s.tilted_cross(lo)) < std::abs(s.tilted_cross(hi)) ? lo : hi;
}

auto to_string(Lf_regime regime) -> std::string {
  switch (regime) {
    case Lf_regime::strongly: return "Strongly";
    case Lf_regime::intermediate: return "Intermediate";
    case Lf_regime::weakly: return "Weakly";
  }
  return "?";
}

auto to_string(Rate_flag flag) -> std::string {
  switch (flag) {
    case Rate_flag::interior: return "interior";
    case Rate_flag::boundary: return "boundary";
    case Rate_flag::no_small_value: return "no small-value environment";
  }
  return "?";
}

auto classify_lf_regime(const Environment_model& model) -> Lf_regime {
  auto cross = walk_summary(model).cross_moment;
  if (cross > regime_tolerance) { return Lf_regime::strongly; }
  if (cross < -regime_tolerance) { return Lf_regime::weakly; }
  return Lf_regime::intermediate;
}

auto lattice_flag(const Environment_model& model) -> bool {
  auto nonzero = std::vector<double>{};
  for (auto a = 0; a < model.size(); ++a) {
    if (model.weight(a) > 0.0 and not is_zero_increment(model.increment(a))) { nonzero.push_back(model.increment(a)); }
  }
  if (nonzero.size() <= 1) { return true; }
  auto base = nonzero.front();
  for (auto x : nonzero) {
    auto ratio = x / base;
    auto rational = false;
    for (auto q = 1; q <= 64 and not rational; ++q) {
      auto p = std::round(ratio * q);
      rational = std::abs(ratio * q - p) <= 1e-9 * q;
    }
    if (not rational) { return false; }
  }
  return true;
}

auto assumption1_witness(const Environment_model& model) -> double {
  auto worst = 0.0;
  for (auto a = 0; a < model.size(); ++a) {
    if (model.weight(a) > 0.0) { worst = std::max(worst, model.law(a).q0()); }
  }
  return 1.0 - worst;
}

auto extinction_in_one_step(const Environment_model& model) -> double {
  auto acc = 0.0;
  for (auto a = 0; a < model.size(); ++a) { acc += model.weight(a) * model.law(a).q0(); }
  return acc;
}

}  // namespace bpre
