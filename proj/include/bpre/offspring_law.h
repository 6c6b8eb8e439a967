#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "bpre/rng.h"

namespace bpre {

// Thrown when an input violates an operation's contract.
class Contract_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown when an exact computation would exceed its enumeration or size budget.
class Budget_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Law_kind { finite, linear_fractional };

struct Moments {
  double m;            // f'(1)
  double b;            // f''(1), second factorial moment
  double eta_general;  // b / m^2
  double eta_lf;       // b / (2 m^2), the convention of the LF closed forms
};

// One reproduction law q on {0, 1, 2, ...}.
//
// Linear-fractional laws are parametrized by (m, b) with
//   f(s) = 1 - (1 - s) / (a + c (1 - s)),  a = 1/m,  c = b / (2 m^2).
// Writing d = a + c and r = c / d:  q(0) = 1 - 1/d,  q(k) = (1 - r) r^(k-1) / d for k >= 1.
class Offspring_law {
 public:
  static auto finite(std::vector<double> probs) -> Offspring_law;
  static auto linear_fractional(double m, double b) -> Offspring_law;

  auto kind() const -> Law_kind { return kind_; }
  auto is_lf() const -> bool { return kind_ == Law_kind::linear_fractional; }

  // Finite laws only: p_0..p_D with trailing zeros stripped.
  auto probs() const -> const std::vector<double>& { return probs_; }
  // LF laws only.
  auto lf_m() const -> double { return m_; }
  auto lf_b() const -> double { return b_; }
  auto lf_a() const -> double { return a_; }
  auto lf_c() const -> double { return c_; }
  auto lf_ratio() const -> double { return r_; }

  // Largest k with q(k) > 0; max() for LF laws with r > 0.
  auto max_support() const -> std::int64_t;

  auto pmf(std::int64_t k) const -> double;
  auto q0() const -> double { return pmf(0); }
  auto mean() const -> double { return m_; }
  auto factorial_moment2() const -> double { return b_; }

  auto pgf(double s) const -> double;
  auto pgf_d1(double s) const -> double;
  auto pgf_d2(double s) const -> double;
  // 1 - f(1 - p), accurate when p is tiny.
  auto survival_map(double p) const -> double;

  // q(0..degree)
  auto coefficients(int degree) const -> std::vector<double>;

  auto sample(Rng_stream& rng) const -> std::int64_t;

  auto describe() const -> std::string;

 private:
  Offspring_law() = default;

  Law_kind kind_ = Law_kind::finite;
  std::vector<double> probs_;
  std::vector<double> cdf_;
  double m_ = 0.0;
  double b_ = 0.0;
  double a_ = 0.0;
  double c_ = 0.0;
  double d_ = 0.0;
  double r_ = 0.0;
};

auto mean_and_factorial_moments(const Offspring_law& law) -> Moments;

// Sum over y >= a of y^2 q(y) / m^2.
auto truncated_second_moment(const Offspring_law& law, std::int64_t a) -> double;

}  // namespace bpre
