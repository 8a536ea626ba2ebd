#pragma once

#include <string>

#include "json.hpp"

#include "wmcusum/analysis.hpp"
#include "wmcusum/config.hpp"
#include "wmcusum/experiments.hpp"
#include "wmcusum/model.hpp"
#include "wmcusum/validation.hpp"

namespace wmcusum {

/// Decimal rendering with 9 significant digits, '.' separator, independent of the C++ locale.
/// Infinities print as "inf", NaN as "nan".
std::string format_number(double value);

/// value rounded to what format_number prints, for embedding in JSON documents.
double round_for_output(double value);

/// JSON number rounded like format_number; non-finite values (unbounded bounds, undefined
/// standard errors) become null.
nlohmann::json json_number(double value);

nlohmann::json to_json(const SystemParams& p);
nlohmann::json to_json(const ClosedLoopGains& g);
nlohmann::json to_json(const KldBreakdown& k);
nlohmann::json to_json(const AddBound& b);
nlohmann::json to_json(const AttackModel& a);
nlohmann::json to_json(const RunConfig& c);
nlohmann::json to_json(const ExperimentSpec& s);
nlohmann::json to_json(const AddEstimate& e);
nlohmann::json to_json(const RunLengthEstimate& e);
nlohmann::json to_json(const TradeoffCurve& c);
nlohmann::json to_json(const CheckResult& r);

} // namespace wmcusum
