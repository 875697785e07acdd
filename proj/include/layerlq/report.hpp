#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "layerlq/error.hpp"
#include "layerlq/scenario.hpp"

namespace layerlq {

inline constexpr int kSchemaVersion = 1;

/// Reports keep acceptance-relevant checks under "asserted" and everything that
/// varies between hosts (timings) or is informational under "diagnostic".
nlohmann::json compose_report(const Scenario& scenario, const ComposedPlant& plant);
nlohmann::json synthesis_report(const Scenario& scenario, const SynthesisResult& result);
nlohmann::json cost_report_json(const CostReport& report);
nlohmann::json simulation_report(const Scenario& scenario, const ControllerRun& run);
nlohmann::json comparison_report(const Scenario& scenario, const Comparison& comparison);
nlohmann::json bench_report(const std::vector<BenchRow>& rows);

/// Rank section for a layer-1 pair that cannot be stabilized.
nlohmann::json rank_report(const Scenario& scenario, Index layer1_rank, Index composed_rank);

nlohmann::json error_json(const Error& err);
nlohmann::json error_json(ErrorCode code, const std::string& message);

/// Drops every "diagnostic" member so two reports can be compared byte for byte.
nlohmann::json strip_diagnostics(nlohmann::json report);

nlohmann::json matrix_json(const Matrix& m);

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

}  // namespace layerlq
