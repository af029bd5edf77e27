#pragma once

#include <string>

#include <json.hpp>

#include "cgra/ilp_model.hpp"
#include "cgra/mapper.hpp"

namespace cgra {

/// Map report: status, II, NN, placement by op id, routes as MRRG key lists,
/// per-NN log. Wall-clock fields are only included with `timings`, so equal
/// runs produce byte-identical reports by default.
nlohmann::ordered_json outcome_to_json(const Dfg& dfg, const Mrrg& mrrg, const MapOutcome& outcome, bool timings);

/// Human-readable summary of the same content.
std::string outcome_to_text(const Dfg& dfg, const Mrrg& mrrg, const MapOutcome& outcome);

nlohmann::ordered_json model_stats_json(const ModelStats& stats);

/// "nn,mapped,total,fraction" rows.
std::string characterization_csv(const Characterization& ch);
/// "benchmark,ii,first_nn,timed_out" rows.
std::string characterization_cells_csv(const Characterization& ch);
nlohmann::ordered_json characterization_json(const Characterization& ch);

}  // namespace cgra
