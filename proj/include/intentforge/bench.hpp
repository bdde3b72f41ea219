// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "intentforge/catalog.hpp"
#include "intentforge/cocreation/agent.hpp"

namespace intentforge::bench {

struct ScenarioTurn {
    std::string label;
    std::string userText;
    std::vector<std::string> expectations;
};

struct GroundTruth {
    std::vector<OfferingSelection> bundle;
    Money totalCost;
    int days = 0;
    Money budget;
    std::int64_t minUsers = 0;
};

struct Scenario {
    std::string scenarioId;
    std::vector<ScenarioTurn> turns;
    GroundTruth groundTruth;
};

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Throws ScenarioError on schema problems, duplicate labels, or bundle
/// members missing from `graph`.
Scenario parse_scenario(const nlohmann::json& j, const CatalogGraph& graph);
Scenario load_scenario_file(const std::string& path, const CatalogGraph& graph);
std::string default_scenario_path();

enum class Baseline { Pass, Partial, Fail };
std::string_view to_string(Baseline b);

struct CheckResult {
    std::string label;
    std::string name;
    bool passed = false;
};

struct BenchResult {
    std::string backendId;
    /// "reasoning" or "non-reasoning"
    std::string group = "reasoning";
    int correctComposition = 0;
    int compositionTotal = 0;
    int hallucinatedProducts = 0;
    bool correctTotalCost = false;
    bool correctDuration = false;
    Baseline baselineAchievement = Baseline::Fail;
    std::optional<double> dialogueTimeSeconds;
    std::optional<std::int64_t> totalTokens;
    std::optional<std::string> failureReason;
    std::vector<CheckResult> checks;

    bool operator==(const BenchResult&) const;
};

nlohmann::json to_json(const BenchResult& r);

struct Composition {
    int correct = 0;
    int hallucinated = 0;
};

/// Tier-insensitive: counts ground-truth offering families among `proposed`
/// (offering ids or product names); unresolvable names are hallucinations.
Composition score_composition(const std::vector<std::string>& proposed, const GroundTruth& truth, const CatalogGraph& graph);

Baseline classify_baseline(int correctComposition, int compositionTotal, int hallucinated, bool cost, bool duration,
                           bool payloadEmitted);

/// Scores a stored transcript. Pure: same inputs, same result.
BenchResult score_transcript(const std::vector<cocreation::Turn>& transcript, const Scenario& scenario,
                             const CatalogGraph& graph, const std::string& backendId, const std::string& group,
                             std::optional<std::string> failureReason = std::nullopt);

struct RunOutput {
    BenchResult result;
    std::vector<cocreation::Turn> transcript;
};

/// Drives a session turn by turn; never throws for backend failures.
RunOutput run_scenario(const Scenario& scenario, std::unique_ptr<cocreation::Reasoner> backend, const CatalogGraph& graph,
                       std::shared_ptr<cocreation::Clock> clock = std::make_shared<cocreation::WallClock>());

/// "table", "json" or "csv". Throws std::invalid_argument otherwise.
std::string emit_report(const std::vector<BenchResult>& results, const std::string& format);

}  // namespace intentforge::bench
