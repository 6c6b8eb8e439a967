#include "cli.h"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "bpre/model_io.h"
#include "bpre/report_io.h"

namespace bpre::cli {

namespace {

using nlohmann::json;

struct Config {
  std::string command;
  std::string model_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  int n = 10;
  int n_max = 16;
  std::vector<int> n_list;
  std::int64_t replicates = 1000;
  int degree = 16;
  int which = 1;
  double r = 0.3;
  double p = 0.5;
  int a = 10;
  double delta = 0.5;
};

const auto commands = std::vector<std::string>{"simulate", "exact", "rho", "mrca", "examples", "validate"};

auto usage() -> std::string {
  return "usage: bpre <simulate|exact|rho|mrca|examples|validate> [options]\n"
         "  simulate --model F --n N --replicates R --seed S [--out F]\n"
         "  exact    --model F --n N [--degree D] [--out F]\n"
         "  rho      --model F --n-max N [--out F]\n"
         "  mrca     --model F --n-list 8,12,16 --replicates R --seed S [--delta D] [--out F]\n"
         "  examples --which 1|2 --r R --p P [--a A] --n-max N [--out F]\n"
         "  validate --model F\n"
         "BPRE_THREADS caps the worker count; results do not depend on it.\n";
}

auto fixed(double x, int digits = 6) -> std::string {
  if (std::isnan(x)) { return "nan"; }
  if (std::isinf(x)) { return x > 0 ? "inf" : "-inf"; }
  auto os = std::ostringstream{};
  os << std::setprecision(digits) << x;
  return os.str();
}

// Everything that determines the output, in a fixed order.
auto canonical(const Config& c, const std::optional<Environment_model>& model) -> std::string {
  auto j = json{{"command", c.command}, {"n", c.n},         {"n_max", c.n_max},     {"n_list", c.n_list},
                {"replicates", c.replicates}, {"degree", c.degree}, {"which", c.which}, {"r", c.r},
                {"p", c.p},           {"a", c.a},           {"delta", c.delta}};
  if (c.seed) { j["seed"] = *c.seed; }
  if (model) { j["model"] = model_to_json(*model); }
  return j.dump();
}

void check_out_path(const std::string& path) {
  if (path.empty()) { return; }
  auto dir = std::filesystem::path{path}.parent_path();
  if (not dir.empty() and not std::filesystem::is_directory(dir)) {
    throw Contract_error{"output directory does not exist: " + dir.string()};
  }
}

void write_text(const std::string& path, const std::string& text) {
  auto f = std::ofstream{path, std::ios::binary};
  if (not f) { throw Contract_error{"cannot write " + path}; }
  f << text;
}

// Report to --out (JSON) and, when given, the plot CSV next to it.
void emit(const Config& c, const json& doc, const std::string& csv, std::ostream& out) {
  if (c.out_path.empty()) {
    out << doc.dump(2) << '\n';
    return;
  }
  write_text(c.out_path, doc.dump(2) + "\n");
  if (not csv.empty()) {
    auto csv_path = std::filesystem::path{c.out_path}.replace_extension(".csv").string();
    write_text(csv_path, csv);
  }
}

auto require_seed(const Config& c) -> std::uint64_t {
  if (not c.seed) { throw Contract_error{"seed required"}; }
  return *c.seed;
}

auto require_model(const Config& c) -> Environment_model {
  if (c.model_path.empty()) { throw Contract_error{"--model required"}; }
  return load_model(c.model_path);
}

auto stamp(json doc, const Config& c, const std::optional<Environment_model>& model) -> json {
  doc["config_hash"] = config_hash(canonical(c, model));
  doc["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  return doc;
}

auto cmd_simulate(const Config& c, std::ostream& out) -> int {
  auto seed = require_seed(c);
  auto model = require_model(c);
  if (c.n < 0 or c.replicates < 1) { throw Contract_error{"simulate: need n >= 0 and replicates >= 1"}; }
  auto runs = json::array();
  auto survivors = std::int64_t{0};
  auto mean = 0.0;
  for (auto r = std::int64_t{0}; r < c.replicates; ++r) {
    auto rng = Rng_stream{seed, static_cast<std::uint64_t>(r)};
    auto t = simulate_forward(model, 1, c.n, rng);
    survivors += t.sizes.back() > 0;
    mean += static_cast<double>(t.sizes.back()) / static_cast<double>(c.replicates);
    runs.push_back(to_json(t));
  }
  auto doc = json{{"certified", json::object()},
                  {"estimated", {{"n", c.n}, {"replicates", c.replicates}, {"mean_z_n", mean},
                                 {"survival_fraction", static_cast<double>(survivors) / static_cast<double>(c.replicates)},
                                 {"trajectories", runs}}}};
  emit(c, stamp(doc, c, model), "", out);
  out << "simulate: n=" << c.n << " replicates=" << c.replicates << " mean Z_n=" << fixed(mean)
      << " survival=" << fixed(static_cast<double>(survivors) / static_cast<double>(c.replicates)) << " [estimated]\n";
  return 0;
}

auto cmd_exact(const Config& c, std::ostream& out) -> int {
  auto model = require_model(c);
  if (c.n < 0) { throw Contract_error{"exact: n must be >= 0"}; }
  auto pmf = annealed_pmf_vector(model, 1, c.n, c.degree);
  auto doc = json{{"certified", {{"n", c.n}, {"z0", 1}, {"degree", c.degree}, {"pmf", pmf}}},
                  {"estimated", json::object()}};
  auto csv = std::string{"n,quantity,value,lo,hi\n"};
  for (auto j = std::size_t{0}; j < pmf.size(); ++j) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%d,P(Z_n=%zu),%.17g,,\n", c.n, j, pmf[j]);
    csv += buf;
  }
  emit(c, stamp(doc, c, model), csv, out);
  out << "exact: n=" << c.n << " P_1(Z_n=1)=" << fixed(pmf.size() > 1 ? pmf[1] : 0.0) << " P_1(Z_n=0)=" << fixed(pmf[0])
      << " [certified]\n";
  return 0;
}

auto cmd_rho(const Config& c, std::ostream& out, std::ostream& err) -> int {
  auto model = require_model(c);
  if (extinction_in_one_step(model) == 0.0) {
    auto m = monotone_rho(model);
    auto doc = json{{"certified", {{"monotone_case", true}, {"rho", m.infinite ? json(nullptr) : json(m.rho)},
                                   {"infinite", m.infinite}}},
                    {"estimated", json::object()}};
    emit(c, stamp(doc, c, model), "", out);
    out << "rho: monotone case rho=" << fixed(m.rho) << " [certified]\n";
    return 0;
  }
  auto id = c.model_path.empty() ? std::string{} : std::filesystem::path{c.model_path}.stem().string();
  auto rep = rho_report(model, c.n_max, id);
  emit(c, stamp(to_json(rep), c, model), emit_plot_data(rep), out);
  out << "rho: z0=" << rep.z0 << " fekete_upper=" << fixed(rep.fekete_upper) << " (n=" << rep.fekete_argmin
      << ") lambda0=" << fixed(rep.lambda0.lambda0);
  if (rep.lf_closed_form) {
    out << " lf_rho=" << fixed(rep.lf_closed_form->rho) << " " << to_string(rep.lf_closed_form->regime);
  }
  out << " [certified] slope=" << fixed(rep.slope_estimate) << " [estimated]\n";
  for (const auto& v : rep.ordering_violations) { err << "warning: ordering violated: " << v << '\n'; }
  return 0;
}

auto cmd_mrca(const Config& c, std::ostream& out) -> int {
  auto seed = require_seed(c);
  auto model = require_model(c);
  auto n_list = c.n_list.empty() ? std::vector<int>{c.n} : c.n_list;
  if (model.is_lf_pure()) {
    auto rep = mrca_regime_suite(model, n_list, c.replicates, seed, c.delta);
    emit(c, stamp(to_json(rep), c, model), emit_plot_data(rep), out);
    out << "mrca: regime=" << to_string(rep.regime);
    for (const auto& pt : rep.points) {
      out << " n=" << pt.n << (pt.partial ? ":partial" : ":P(k=1)=" + fixed(pt.p_first, 4) + ",P(k=n)=" + fixed(pt.p_last, 4));
    }
    out << " [estimated]\n";
    return 0;
  }
  auto hists = json::array();
  auto summary = std::string{"mrca:"};
  for (auto n : n_list) {
    auto h = conditioned_mrca_sample(model, n, 2, Mrca_method::geiger, c.replicates,
                                     seed + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(n));
    hists.push_back(to_json(h));
    summary += " n=" + std::to_string(n) + ":P(k=1)=" + fixed(h.probability(1), 4) + ",P(k=n)=" + fixed(h.probability(n), 4);
  }
  emit(c, stamp(json{{"certified", json::object()}, {"estimated", {{"histograms", hists}}}}, c, model), "", out);
  out << summary << " [estimated]\n";
  return 0;
}

auto cmd_examples(const Config& c, std::ostream& out) -> int {
  if (c.which == 1) {
    auto rep = example1_suite(c.r, c.p, c.n_max);
    emit(c, stamp(to_json(rep), c, std::nullopt), emit_plot_data(rep), out);
    const auto& last = rep.rows.back();
    out << "examples: 1 r=" << c.r << " p=" << c.p << " max log error=" << fixed(rep.max_log_error, 3)
        << " gap(n=" << last.n << ")=" << fixed(last.gap) << " separation "
        << (rep.separation_expected ? "expected" : "not expected") << " [certified]\n";
    return 0;
  }
  if (c.which == 2) {
    auto rep = example2_suite(c.r, c.p, c.a, c.n_max);
    emit(c, stamp(to_json(rep), c, std::nullopt), emit_plot_data(rep), out);
    out << "examples: 2 s_e=" << fixed(rep.s_e, 12) << " log gap(n=" << rep.rows.back().n
        << ")=" << fixed(rep.rows.back().log_gap) << " " << (rep.conclusive ? "conclusive" : "inconclusive at this (p,a)")
        << " [certified]\n";
    return 0;
  }
  throw Contract_error{"--which must be 1 or 2"};
}

auto cmd_validate(const Config& c, std::ostream& out) -> int {
  auto model = require_model(c);
  auto s = walk_summary(model);
  out << "states: " << model.size() << '\n';
  out << "E[X] = " << fixed(s.drift, 10);
  if (s.drift > 0.0) {
    out << ": supercritical\n";
  } else if (s.drift == 0.0) {
    out << ": warning: not supercritical boundary: E[X]=0\n";
  } else {
    out << ": warning: not supercritical\n";
  }
  auto p_ext = extinction_in_one_step(model);
  out << "P(Z_1=0) = " << fixed(p_ext, 10) << (p_ext > 0.0 ? "" : " (monotone case)") << '\n';
  auto gamma = assumption1_witness(model);
  out << "assumption 1 witness gamma = " << fixed(gamma, 10) << (gamma > 0.0 ? ": pass" : ": fail") << '\n';
  out << "lattice: " << (lattice_flag(model) ? "yes" : "no") << '\n';
  out << "LF-pure: " << (model.is_lf_pure() ? "yes" : "no") << '\n';
  if (model.is_lf_pure() and s.drift > 0.0) { out << "regime: " << to_string(classify_lf_regime(model)) << '\n'; }
  if (p_ext > 0.0) {
    auto reach = smallest_reachable(model);
    out << "z0 = " << reach.z0 << '\n';
    out << "closure (<= " << reach.cap << (reach.capped ? ", capped" : "") << "):";
    for (auto k : reach.closure) { out << ' ' << k; }
    out << '\n';
  } else {
    out << "z0: not applicable (no extinction possible)\n";
  }
  if (s.drift > 0.0) {
    auto rate = rate_function_at_zero(model);
    out << "lambda0 = " << fixed(rate.lambda0, 10) << " (" << to_string(rate.flag) << ")\n";
  }
  return 0;
}

}  // namespace

auto run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) -> int {
  if (args.empty() or std::find(commands.begin(), commands.end(), args[0]) == commands.end()) {
    if (not args.empty() and (args[0] == "--help" or args[0] == "-h")) {
      out << usage();
      return 0;
    }
    err << (args.empty() ? std::string{"missing command\n"} : "unknown command: " + args[0] + "\n") << usage();
    return 1;
  }
  auto c = Config{};
  c.command = args[0];
  auto app = CLI::App{"bpre " + c.command};
  app.add_option("--model", c.model_path);
  app.add_option("--out", c.out_path);
  app.add_option("--seed", c.seed);
  app.add_option("--n", c.n);
  app.add_option("--n-max", c.n_max);
  app.add_option("--n-list", c.n_list)->delimiter(',');
  app.add_option("--replicates", c.replicates);
  app.add_option("--degree", c.degree);
  app.add_option("--which", c.which);
  app.add_option("--r", c.r);
  app.add_option("--p", c.p);
  app.add_option("--a", c.a);
  app.add_option("--delta", c.delta);
  try {
    auto rest = std::vector<std::string>(args.rbegin(), args.rend() - 1);  // CLI11 parses a reversed vector
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << usage();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  try {
    check_out_path(c.out_path);
    if (c.command == "simulate") { return cmd_simulate(c, out); }
    if (c.command == "exact") { return cmd_exact(c, out); }
    if (c.command == "rho") { return cmd_rho(c, out, err); }
    if (c.command == "mrca") { return cmd_mrca(c, out); }
    if (c.command == "examples") { return cmd_examples(c, out); }
    return cmd_validate(c, out);
  } catch (const Contract_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const Budget_error& e) {
    err << "budget exceeded: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace bpre::cli
