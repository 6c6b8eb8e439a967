#include "bpre/offspring_law.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace bpre {

auto Offspring_law::finite(std::vector<double> probs) -> Offspring_law {
  if (probs.empty()) { throw Contract_error{"offspring law: empty probability vector"}; }
  auto total = 0.0;
  for (auto p : probs) {
    if (not std::isfinite(p) or p < 0.0) { throw Contract_error{"offspring law: negative or non-finite probability"}; }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Contract_error{"offspring law: probabilities sum to " + std::to_string(total) + ", not 1"};
  }
  while (probs.size() > 1 and probs.back() == 0.0) { probs.pop_back(); }

  auto law = Offspring_law{};
  law.kind_ = Law_kind::finite;
  law.probs_ = std::move(probs);
  for (auto k = std::size_t{0}; k < law.probs_.size(); ++k) {
    auto kd = static_cast<double>(k);
    law.m_ += kd * law.probs_[k];
    law.b_ += kd * (kd - 1.0) * law.probs_[k];
  }
  if (law.m_ <= 0.0) { throw Contract_error{"degenerate law"}; }
  law.cdf_.resize(law.probs_.size());
  std::partial_sum(law.probs_.begin(), law.probs_.end(), law.cdf_.begin());
  law.cdf_.back() = 1.0;
  return law;
}

auto Offspring_law::linear_fractional(double m, double b) -> Offspring_law {
  if (not (std::isfinite(m) and m > 0.0)) { throw Contract_error{"LF law: mean must be positive"}; }
  if (not (std::isfinite(b) and b >= 0.0)) { throw Contract_error{"LF law: b must be non-negative"}; }
  auto law = Offspring_law{};
  law.kind_ = Law_kind::linear_fractional;
  law.m_ = m;
  law.b_ = b;
  law.a_ = 1.0 / m;
  law.c_ = b / (2.0 * m * m);
  law.d_ = law.a_ + law.c_;
  // q(0) = 1 - 1/d must lie in [0, 1)
  if (law.d_ < 1.0 - 1e-12) {
    throw Contract_error{"LF law: (m, b) gives a negative atom at 0 (need 1/m + b/(2m^2) >= 1)"};
  }
  law.d_ = std::max(law.d_, 1.0);
  law.r_ = law.c_ / law.d_;
  return law;
}

auto Offspring_law::max_support() const -> std::int64_t {
  if (is_lf()) { return r_ > 0.0 ? std::numeric_limits<std::int64_t>::max() : 1; }
  return static_cast<std::int64_t>(probs_.size()) - 1;
}

auto Offspring_law::pmf(std::int64_t k) const -> double {
  if (k < 0) { return 0.0; }
  if (is_lf()) {
    if (k == 0) { return 1.0 - 1.0 / d_; }
    return (1.0 - r_) / d_ * std::pow(r_, static_cast<double>(k - 1));
  }
  return k < static_cast<std::int64_t>(probs_.size()) ? probs_[static_cast<std::size_t>(k)] : 0.0;
}

auto Offspring_law::pgf(double s) const -> double {
  if (is_lf()) { return 1.0 - (1.0 - s) / (a_ + c_ * (1.0 - s)); }
  auto acc = 0.0;
  for (auto k = probs_.size(); k-- > 0;) { acc = acc * s + probs_[k]; }
  return acc;
}

auto Offspring_law::pgf_d1(double s) const -> double {
  if (is_lf()) {
    auto den = a_ + c_ * (1.0 - s);
    return a_ / (den * den);
  }
  auto acc = 0.0;
  for (auto k = probs_.size(); k-- > 1;) { acc = acc * s + static_cast<double>(k) * probs_[k]; }
  return acc;
}

auto Offspring_law::pgf_d2(double s) const -> double {
  if (is_lf()) {
    auto den = a_ + c_ * (1.0 - s);
    return 2.0 * a_ * c_ / (den * den * den);
  }
  auto acc = 0.0;
  for (auto k = probs_.size(); k-- > 2;) {
    auto kd = static_cast<double>(k);
    acc = acc * s + kd * (kd - 1.0) * probs_[k];
  }
  return acc;
}

auto Offspring_law::survival_map(double p) const -> double {
  if (is_lf()) { return p / (a_ + c_ * p); }
  // sum_k q(k) (1 - (1-p)^k), each term formed without cancellation
  auto l1p = std::log1p(-p);
  auto acc = 0.0;
  for (auto k = std::size_t{1}; k < probs_.size(); ++k) {
    if (probs_[k] == 0.0) { continue; }
    acc += probs_[k] * -std::expm1(static_cast<double>(k) * l1p);
  }
  return acc;
}

auto Offspring_law::coefficients(int degree) const -> std::vector<double> {
  auto out = std::vector<double>(static_cast<std::size_t>(degree) + 1, 0.0);
  if (is_lf()) {
    out[0] = 1.0 - 1.0 / d_;
    auto term = (1.0 - r_) / d_;
    for (auto k = 1; k <= degree; ++k) {
      out[static_cast<std::size_t>(k)] = term;
      term *= r_;
    }
    return out;
  }
  for (auto k = std::size_t{0}; k < out.size() and k < probs_.size(); ++k) { out[k] = probs_[k]; }
  return out;
}

auto Offspring_law::sample(Rng_stream& rng) const -> std::int64_t {
  auto u = rng.uniform();
  if (is_lf()) {
    if (u < 1.0 - 1.0 / d_) { return 0; }
    if (r_ == 0.0) { return 1; }
    return 1 + std::geometric_distribution<std::int64_t>{1.0 - r_}(rng.engine());
  }
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<std::int64_t>(std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1));
}

auto Offspring_law::describe() const -> std::string {
  auto os = std::ostringstream{};
  os.precision(17);
  if (is_lf()) {
    os << "lf(m=" << m_ << ", b=" << b_ << ")";
  } else {
    os << "finite(";
    for (auto k = std::size_t{0}; k < probs_.size(); ++k) { os << (k ? "," : "") << probs_[k]; }
    os << ")";
  }
  return os.str();
}

auto mean_and_factorial_moments(const Offspring_law& law) -> Moments {
  auto m = law.mean();
  auto b = law.factorial_moment2();
  return {m, b, b / (m * m), b / (2.0 * m * m)};
}

auto truncated_second_moment(const Offspring_law& law, std::int64_t a) -> double {
  if (a < 1) { throw Contract_error{"truncated_second_moment: a must be >= 1"}; }
  auto m = law.mean();
  if (not law.is_lf()) {
    auto acc = 0.0;
    for (auto y = static_cast<std::size_t>(a); y < law.probs().size(); ++y) {
      auto yd = static_cast<double>(y);
      acc += yd * yd * law.probs()[y];
    }
    return acc / (m * m);
  }
  // sum_{y>=A} y^2 r^(y-1) = r^(A-1) [A^2/(1-r) + 2A r/(1-r)^2 + r(1+r)/(1-r)^3]
  auto r = law.lf_ratio();
  auto d = law.lf_a() + law.lf_c();
  auto ad = static_cast<double>(a);
  auto om = 1.0 - r;
  auto geo = std::pow(r, ad - 1.0) * (ad * ad / om + 2.0 * ad * r / (om * om) + r * (1.0 + r) / (om * om * om));
  return (1.0 - r) / d * geo / (m * m);
}

}  // namespace bpre
