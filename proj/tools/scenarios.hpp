#pragma once

#include <cstddef>
#include <vector>

#include "json.hpp"
#include "output.hpp"
#include "roughflow/rough_path.hpp"
#include "roughflow/vector_fields.hpp"

namespace roughflow::cli {

/// Runs the experiment named by cfg["command"] on a validated, resolved
/// configuration. Tables go to `writer`; scalar results are added to
/// `summary`.
void run_scenario(const nlohmann::json& cfg, ResultWriter& writer, unsigned threads, nlohmann::json& summary);

// Builders shared with the tests.
TimeGrid config_grid(const nlohmann::json& cfg);
std::vector<double> config_noise_values(const nlohmann::json& cfg, const TimeGrid& grid);
RoughPath config_path(const nlohmann::json& cfg, const TimeGrid& grid);
VectorFieldSet config_fields(const nlohmann::json& cfg);
DriftField config_drift(const nlohmann::json& cfg);
/// Output grid indices 0, n / count, ..., n.
std::vector<std::size_t> config_schedule(const nlohmann::json& cfg);

}  // namespace roughflow::cli
