#pragma once

#include "selfish/core_model.hpp"
#include "selfish/delay_analysis.hpp"
#include "selfish/mdp_engine.hpp"
#include "selfish/optimizer.hpp"
#include "selfish/simulator.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace selfish {

using Json = nlohmann::ordered_json;

Json to_json(const ChainState& s);
ChainState chain_state_from_json(const Json& j);
Json to_json(Action action);
Action action_from_json(const Json& j);

/// {"alpha","gamma","variant","T","policy":[{"a","h","fork","action"},...]}
Json policy_to_json(const Policy& policy);
/// Throws std::invalid_argument on a malformed document or an incomplete grid.
Policy policy_from_json(const Json& j);

Json to_json(const SolveResult& result);
Json to_json(const BoundsReport& report);
Json to_json(const ThresholdReport& report);
Json to_json(const SimResult& result);
Json to_json(const BatchResult& batch);
Json to_json(const PolicyEvaluation& evaluation);
Json delay_to_json(double q, std::optional<std::uint64_t> min_k, double gain_at_min_k);

/// Locale-independent fixed notation.
std::string format_fixed(double value, int decimals);

std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string batch_csv(const BatchResult& batch);

/// Grid with rows a = 0..view and columns h = 0..view. Each cell holds one
/// letter per fork label (irrelevant, relevant, active); '*' marks states the
/// policy never visits from the start.
std::string render_policy_table(const Policy& policy, const MiningParams& params, int view);

/// Writes through a temporary file in the same directory and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

} // namespace selfish
