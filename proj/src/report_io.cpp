#include "bpre/report_io.h"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace bpre {

namespace {

using nlohmann::json;

// JSON has no NaN or infinity
auto num(double x) -> json { return std::isfinite(x) ? json(x) : json(nullptr); }

auto fmt(double x) -> std::string {
  if (std::isnan(x)) { return ""; }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class Csv {
 public:
  Csv() { os_ << "n,quantity,value,lo,hi\n"; }
  void row(int n, const std::string& quantity, double value, double lo = NAN, double hi = NAN) {
    os_ << n << ',' << quantity << ',' << fmt(value) << ',' << fmt(lo) << ',' << fmt(hi) << '\n';
  }
  auto str() const -> std::string { return os_.str(); }

 private:
  std::ostringstream os_;
};

}  // namespace

auto to_json(const Rho_report& rep) -> json {
  auto rows = json::array();
  for (const auto& r : rep.fekete) {
    rows.push_back({{"n", r.n}, {"a_n", num(r.a_n)}, {"a_n_over_n", num(r.a_n_over_n)}});
  }
  auto lf = json(nullptr);
  if (rep.lf_closed_form) {
    lf = {{"rho", num(rep.lf_closed_form->rho)}, {"regime", to_string(rep.lf_closed_form->regime)}};
  }
  auto slopes = json::array();
  for (const auto& r : rep.fekete) {
    if (not std::isnan(r.slope)) { slopes.push_back({{"n", r.n}, {"slope", num(r.slope)}}); }
  }
  return {
      {"model_id", rep.model_id},
      {"z0", rep.z0},
      {"certified",
       {{"fekete", rows},
        {"fekete_upper", num(rep.fekete_upper)},
        {"fekete_argmin", rep.fekete_argmin},
        {"drift", num(rep.drift)},
        {"lambda0", {{"value", num(rep.lambda0.lambda0)}, {"lambda_star", num(rep.lambda0.lambda_star)},
                     {"flag", to_string(rep.lambda0.flag)}}},
        {"lf_closed_form", lf},
        {"diagnostics", {{"gamma_witness", num(rep.diagnostics.gamma_witness)},
                         {"assumption1", rep.diagnostics.assumption1},
                         {"abs_moment_finite", rep.diagnostics.abs_moment_finite},
                         {"lattice", rep.lattice}}},
        {"ordering_violations", rep.ordering_violations}}},
      {"estimated", {{"slope_estimate", num(rep.slope_estimate)}, {"slope_m", rep.slope_m}, {"slopes", slopes}}},
  };
}

auto to_json(const Example1_report& rep) -> json {
  auto rows = json::array();
  for (const auto& r : rep.rows) {
    rows.push_back({{"n", r.n}, {"p_one", num(r.p_one)}, {"log_error", num(r.log_error)},
                    {"method", r.by_enumeration ? "enumeration" : "parity"}, {"p_two", num(r.p_two)},
                    {"gap", num(r.gap)}});
  }
  return {{"example", 1},
          {"r", rep.r},
          {"p", rep.p},
          {"certified", {{"rows", rows}, {"max_log_error", num(rep.max_log_error)}, {"threshold", num(rep.threshold)},
                         {"separation_expected", rep.separation_expected}}},
          {"estimated", json::object()}};
}

auto to_json(const Example2_report& rep) -> json {
  auto rows = json::array();
  for (const auto& r : rep.rows) {
    rows.push_back({{"n", r.n}, {"p22", num(r.p22)}, {"p12", num(r.p12)}, {"log_gap", num(r.log_gap)}});
  }
  return {{"example", 2},
          {"r", rep.r},
          {"p", rep.p},
          {"a", rep.a},
          {"certified",
           {{"s_e", num(rep.s_e)},
            {"fixed_point_residual", num(rep.fixed_point_residual)},
            {"sufficiency", rep.sufficiency},
            {"s_e_below_2p", rep.s_e_below_2p},
            {"three_p2_premise", rep.three_p2_premise},
            {"verdict", rep.conclusive ? "conclusive" : "inconclusive at this (p,a)"},
            {"upper_bound_log", num(rep.upper_bound_log)},
            {"lower_bound_log", num(rep.lower_bound_log)},
            {"rows", rows}}},
          {"estimated", json::object()}};
}

auto to_json(const Mrca_histogram& hist) -> json {
  auto bins = json::array();
  for (auto k = 1; k <= hist.n; ++k) { bins.push_back({{"k", k}, {"count", hist.counts[static_cast<std::size_t>(k) - 1]}}); }
  return {{"n", hist.n},
          {"target_size", hist.target_size},
          {"bins", bins},
          {"accepted", hist.accepted},
          {"proposed", hist.proposed},
          {"env_proposed", hist.env_proposed},
          {"method", to_string(hist.method)},
          {"nu", num(hist.nu)}};
}

auto to_json(const Mrca_regime_report& rep) -> json {
  auto points = json::array();
  for (const auto& pt : rep.points) {
    auto p = json{{"n", pt.n}, {"partial", pt.partial}};
    if (pt.partial) {
      p["note"] = pt.note;
    } else {
      p["histogram"] = to_json(pt.histogram);
      p["p_first"] = {{"value", num(pt.p_first)}, {"se", num(pt.se_first)}};
      p["p_last"] = {{"value", num(pt.p_last)}, {"se", num(pt.se_last)}};
      p["n_p_last"] = {{"value", num(pt.scaled_last)}, {"se", num(pt.scaled_last_se)}};
      p["k_delta"] = pt.k_delta;
      p["n32_p_delta"] = {{"value", num(pt.scaled_delta)}, {"se", num(pt.scaled_delta_se)}};
      p["tail_delta"] = {{"value", num(pt.tail_delta)}, {"se", num(pt.tail_delta_se)}};
    }
    points.push_back(p);
  }
  return {{"certified", {{"regime", to_string(rep.regime)}}},
          {"estimated", {{"delta", rep.delta}, {"target_size", rep.target_size}, {"points", points},
                         {"tail_decay_rate", num(rep.tail_decay_rate)}}}};
}

auto to_json(const Trajectory& traj) -> json {
  return {{"sizes", traj.sizes}, {"states", traj.states}, {"root_seed", traj.root_seed},
          {"replicate_index", traj.replicate_index}};
}

auto emit_plot_data(const Rho_report& rep) -> std::string {
  auto csv = Csv{};
  for (const auto& r : rep.fekete) { csv.row(r.n, "a_n_over_n", r.a_n_over_n); }
  for (const auto& r : rep.fekete) { csv.row(r.n, "lambda0", rep.lambda0.lambda0); }
  if (rep.lf_closed_form) {
    for (const auto& r : rep.fekete) { csv.row(r.n, "lf_rho", rep.lf_closed_form->rho); }
  }
  for (const auto& r : rep.fekete) {
    if (not std::isnan(r.slope)) { csv.row(r.n, "slope", r.slope); }
  }
  return csv.str();
}

auto emit_plot_data(const Mrca_regime_report& rep) -> std::string {
  auto csv = Csv{};
  for (const auto& pt : rep.points) {
    if (pt.partial) { continue; }
    const auto& h = pt.histogram;
    auto count = static_cast<double>(h.accepted);
    for (auto k = 1; k <= pt.n; ++k) {
      auto p = h.probability(k);
      auto half = 1.96 * std::sqrt(p * (1.0 - p) / count);
      csv.row(pt.n, "mrca=" + std::to_string(k), p, std::max(0.0, p - half), std::min(1.0, p + half));
    }
  }
  return csv.str();
}

auto emit_plot_data(const Example1_report& rep) -> std::string {
  auto csv = Csv{};
  for (const auto& r : rep.rows) { csv.row(r.n, "log_p_one_over_n", std::log(r.p_one) / r.n); }
  for (const auto& r : rep.rows) { csv.row(r.n, "log_p_two_over_n", std::log(r.p_two) / r.n); }
  return csv.str();
}

auto emit_plot_data(const Example2_report& rep) -> std::string {
  auto csv = Csv{};
  for (const auto& r : rep.rows) { csv.row(r.n, "log_p22_over_n", std::log(r.p22) / r.n); }
  for (const auto& r : rep.rows) { csv.row(r.n, "log_p12_over_n", std::log(r.p12) / r.n); }
  return csv.str();
}

auto config_hash(const std::string& canonical_config) -> std::string {
  auto h = std::uint64_t{0xcbf29ce484222325ull};
  for (auto ch : canonical_config) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace bpre
