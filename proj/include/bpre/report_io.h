#pragma once

#include <string>

#include <json.hpp>

#include "bpre/rho_lab.h"

namespace bpre {

// Reports carry a "certified" section (exact enumeration or closed form) and an
// "estimated" section (Monte Carlo or non-certified proxies).
auto to_json(const Rho_report& rep) -> nlohmann::json;
auto to_json(const Example1_report& rep) -> nlohmann::json;
auto to_json(const Example2_report& rep) -> nlohmann::json;
auto to_json(const Mrca_histogram& hist) -> nlohmann::json;
auto to_json(const Mrca_regime_report& rep) -> nlohmann::json;
auto to_json(const Trajectory& traj) -> nlohmann::json;

// Tidy CSV "n,quantity,value,lo,hi", rows in a fixed order.
auto emit_plot_data(const Rho_report& rep) -> std::string;
auto emit_plot_data(const Mrca_regime_report& rep) -> std::string;
auto emit_plot_data(const Example1_report& rep) -> std::string;
auto emit_plot_data(const Example2_report& rep) -> std::string;

// 64-bit FNV-1a of the text, as 16 hex digits.
auto config_hash(const std::string& canonical_config) -> std::string;

}  // namespace bpre
