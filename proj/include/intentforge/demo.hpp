// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "intentforge/bus.hpp"
#include "intentforge/catalog.hpp"
#include "intentforge/tdd_qa.hpp"
#include "intentforge/traversal.hpp"

namespace intentforge {

struct DemoOptions {
    std::uint64_t seed = 42;
    std::string scenarioPath;  // empty: bundled scenario
    int stepDurationTicks = 3;
    /// Matched by the RAN controller's fault plan in the second run.
    std::string faultMatcher = "res-ran-slice";
};

struct DemoRun {
    std::string runId;
    /// Every test was red before the first dispatch.
    bool startedRed = false;
    SlaReport report;
    std::vector<RemediationRequest> requests;
};

struct DemoResult {
    ConfirmedIntent intent;
    nlohmann::json enrichedDraft;
    OrchestrationPlan plan;
    DemoRun faultFree;
    DemoRun faultInjected;
    bus::BusStats busStats;

    /// Stable summary; byte-identical for identical options.
    nlohmann::json to_json() const;
};

/// Q1..Q5 with the reference reasoner, enrichment over the bus, plan,
/// then a fault-free run and a run with one injected RAN fault.
DemoResult run_demo(const CatalogGraph& graph, const DemoOptions& options = {});

/// The enrichment stages registered on the bus: catalog validation, cost
/// estimation and test derivation.
std::vector<std::string> enrichment_stages();
void register_enrichment_agents(bus::MessageBus& bus, const CatalogGraph& graph);

}  // namespace intentforge
