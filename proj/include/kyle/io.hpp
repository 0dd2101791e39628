#pragma once

// Serialization of rules and reports. JSON through nlohmann::json, CSV with a
// mandatory header, '.' decimals and '\n' line endings. Numbers are written in
// shortest round-trip form, so every reader recovers the written doubles.

#include <string>
#include <vector>

#include <json.hpp>

#include "kyle/metastable.hpp"
#include "kyle/phase_sweep.hpp"
#include "kyle/poly_ext.hpp"

namespace kyle {

using Json = nlohmann::json;

std::string format_double(double x);
double parse_double(const std::string& s);

Json to_json(const PriceRule& r);
Json to_json(const PolyPriceRule& r);
Json to_json(const Moments& m);
Json to_json(const EquilibriumReport& r);
Json to_json(const MetastablePoint& p);
Json to_json(const StayReport& r);
Json to_json(const PolyFitReport& r);
Json to_json(const ModelParams& p);

PriceRule price_rule_from_json(const Json& j);
PolyPriceRule poly_rule_from_json(const Json& j);
Moments moments_from_json(const Json& j);
EquilibriumReport equilibrium_report_from_json(const Json& j);
MetastablePoint metastable_point_from_json(const Json& j);
StayReport stay_report_from_json(const Json& j);
PolyFitReport poly_report_from_json(const Json& j);
ModelParams model_params_from_json(const Json& j);

inline constexpr const char* kSweepHeader = "gamma,phase,lambda,theta,e_order,e_profit,mm_cost,iters";
inline constexpr const char* kCurvesHeader = "v,x_star,profit,flow_q05,flow_q95";

std::string sweep_csv(const std::vector<PhasePoint>& points);
std::vector<PhasePoint> parse_sweep_csv(const std::string& text);

std::string curves_csv(const std::vector<CurvePoint>& points);
std::vector<CurvePoint> parse_curves_csv(const std::string& text);

/// JSON text with a trailing newline, fixed key order and 2-space indent.
std::string dump_json(const Json& j);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace kyle
