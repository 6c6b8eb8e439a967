#include "bpre/model_io.h"

#include <fstream>
#include <sstream>

namespace bpre {

namespace {

auto line_column(const std::string& text, std::size_t byte) -> std::pair<int, int> {
  auto line = 1;
  auto column = 1;
  for (auto i = std::size_t{0}; i < text.size() and i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

auto parse_law(const nlohmann::json& j, std::size_t index) -> Offspring_law {
  auto where = "state " + std::to_string(index) + ": ";
  if (not j.is_object() or not j.contains("type") or not j["type"].is_string()) {
    throw Contract_error{where + "needs a string field \"type\""};
  }
  auto type = j["type"].get<std::string>();
  if (type == "finite") {
    if (not j.contains("probs") or not j["probs"].is_array()) { throw Contract_error{where + "needs array \"probs\""}; }
    auto probs = std::vector<double>{};
    for (const auto& p : j["probs"]) {
      if (not p.is_number()) { throw Contract_error{where + "probs must be numbers"}; }
      probs.push_back(p.get<double>());
    }
    return Offspring_law::finite(std::move(probs));
  }
  if (type == "lf") {
    if (not j.contains("m") or not j["m"].is_number() or not j.contains("b") or not j["b"].is_number()) {
      throw Contract_error{where + "lf state needs numbers \"m\" and \"b\""};
    }
    return Offspring_law::linear_fractional(j["m"].get<double>(), j["b"].get<double>());
  }
  throw Contract_error{where + "unknown type \"" + type + "\""};
}

}  // namespace

auto parse_model(const std::string& text) -> Environment_model {
  auto doc = nlohmann::json{};
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& err) {
    auto [line, column] = line_column(text, err.byte);
    throw Contract_error{"malformed model JSON at line " + std::to_string(line) + ", column " + std::to_string(column)};
  }
  if (not doc.is_object() or not doc.contains("states") or not doc["states"].is_array()) {
    throw Contract_error{"model JSON needs an array \"states\""};
  }
  if (not doc.contains("weights") or not doc["weights"].is_array()) {
    throw Contract_error{"model JSON needs an array \"weights\""};
  }
  auto laws = std::vector<Offspring_law>{};
  for (auto i = std::size_t{0}; i < doc["states"].size(); ++i) { laws.push_back(parse_law(doc["states"][i], i)); }
  auto weights = std::vector<double>{};
  for (const auto& w : doc["weights"]) {
    if (not w.is_number()) { throw Contract_error{"weights must be numbers"}; }
    weights.push_back(w.get<double>());
  }
  return Environment_model{std::move(laws), std::move(weights)};
}

auto load_model(const std::string& path) -> Environment_model {
  auto in = std::ifstream{path};
  if (not in) { throw Contract_error{"cannot read model file " + path}; }
  auto buf = std::ostringstream{};
  buf << in.rdbuf();
  return parse_model(buf.str());
}

auto model_to_json(const Environment_model& model) -> nlohmann::json {
  auto states = nlohmann::json::array();
  for (const auto& law : model.laws()) {
    if (law.is_lf()) {
      states.push_back({{"type", "lf"}, {"m", law.lf_m()}, {"b", law.lf_b()}});
    } else {
      states.push_back({{"type", "finite"}, {"probs", law.probs()}});
    }
  }
  return {{"states", states}, {"weights", model.weights()}};
}

}  // namespace bpre
