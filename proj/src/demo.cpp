// SPDX-License-Identifier: Apache-2.0
#include "intentforge/demo.hpp"

#include <stdexcept>

#include "intentforge/bench.hpp"
#include "intentforge/cocreation/agent.hpp"
#include "intentforge/cocreation/reasoner.hpp"
#include "intentforge/inventory.hpp"

namespace intentforge {

using nlohmann::json;

std::vector<std::string> enrichment_stages() { return {"catalog-validator", "cost-estimator", "test-deriver"}; }

void register_enrichment_agents(bus::MessageBus& b, const CatalogGraph& g) {
    b.register_agent("catalog-validator", [&g](const bus::Envelope& e) -> std::optional<json> {
        auto draft = e.body().at("draft");
        try {
            validate_intent(g, intent_from_json(draft.at("intent")));
        } catch (const PlanError& err) {
            return json{{"veto", err.what()}};
        }
        draft["validated"] = true;
        return draft;
    });
    b.register_agent("cost-estimator", [&g](const bus::Envelope& e) -> std::optional<json> {
        auto draft = e.body().at("draft");
        auto intent = intent_from_json(draft.at("intent"));
        auto cost = compute_cost(g, intent.offeringSelections, intent.period.days);
        if (intent.constraints.budget && *intent.constraints.budget < cost)
            return json{{"veto", "estimated cost " + cost.to_string() + " exceeds budget " + intent.constraints.budget->to_string()}};
        draft["estimatedCost"] = intentforge::to_json(cost);
        return draft;
    });
    b.register_agent("test-deriver", [&g](const bus::Envelope& e) -> std::optional<json> {
        auto draft = e.body().at("draft");
        auto plan = build_plan(g, intent_from_json(draft.at("intent")));
        draft["planId"] = plan.planId;
        draft["planDigest"] = plan.canonicalDigest;
        json tests = json::array();
        for (const auto& t : plan.derivedTests) tests.push_back({{"testSpecId", t.testSpecId}, {"boundRef", t.boundRef}});
        draft["derivedTests"] = tests;
        return draft;
    });
}

namespace {

DemoRun provision(const OrchestrationPlan& plan, RunConfig cfg, bus::MessageBus& b) {
    Engine engine(std::move(cfg));
    auto& run = engine.run(engine.execute_plan(plan));
    AssuranceLoop loop(run, plan, {}, &b);
    DemoRun out;
    out.runId = run.id();
    out.startedRed = std::all_of(loop.pipeline().instances().begin(), loop.pipeline().instances().end(),
                                 [](const TestInstance& t) { return t.status == TestStatus::Red; });
    out.report = loop.run_until_settled();
    out.requests = loop.pipeline().requests();
    return out;
}

json run_json(const DemoRun& r) {
    json reqs = json::array();
    for (const auto& q : r.requests) reqs.push_back(to_json(q));
    return {{"runId", r.runId}, {"startedRed", r.startedRed}, {"report", to_json(r.report)}, {"remediationRequests", reqs}};
}

}  // namespace

json DemoResult::to_json() const {
    return {{"intent", intentforge::to_json(intent)},
            {"enrichment", enrichedDraft},
            {"plan",
             {{"planId", plan.planId},
              {"digest", plan.canonicalDigest},
              {"totalCost", intentforge::to_json(plan.totalCost)},
              {"serviceOrders", plan.serviceOrders.size()},
              {"resourceOrders", plan.resourceOrders.size()},
              {"derivedTests", plan.derivedTests.size()}}},
            {"faultFree", run_json(faultFree)},
            {"faultInjected", run_json(faultInjected)},
            {"bus", bus::to_json(busStats)}};
}

DemoResult run_demo(const CatalogGraph& g, const DemoOptions& opt) {
    auto scenario = bench::load_scenario_file(opt.scenarioPath.empty() ? bench::default_scenario_path() : opt.scenarioPath, g);
    InventoryStore inventory(g);
    cocreation::Agent agent(g, cocreation::make_reasoner("reference"), "demo-" + std::to_string(opt.seed), {},
                            std::make_shared<cocreation::LogicalClock>(), &inventory);
    for (const auto& turn : scenario.turns) {
        if (agent.session().status == cocreation::SessionStatus::Finalized) break;
        agent.send(turn.userText);
    }
    if (!agent.finalized()) throw std::runtime_error("co-creation did not reach a confirmed intent");

    DemoResult out;
    out.intent = agent.finalized()->intent;

    bus::MessageBus b(bus::BusConfig{opt.seed});
    register_enrichment_agents(b, g);
    out.enrichedDraft = b.run_chain({"enrich-" + out.intent.intentId, enrichment_stages()}, {{"intent", to_json(out.intent)}});

    out.plan = build_plan(g, out.intent);
    if (out.enrichedDraft.value("planDigest", "") != out.plan.canonicalDigest)
        throw std::runtime_error("enrichment chain derived a different plan");

    auto cfg = RunConfig::uniform(opt.stepDurationTicks, opt.seed);
    out.faultFree = provision(out.plan, cfg, b);
    cfg.controllers[Domain::RAN].faultPlan = FaultPlan{opt.faultMatcher, 1};
    out.faultInjected = provision(out.plan, cfg, b);
    b.run_until_idle();
    out.busStats = b.stats();
    return out;
}

}  // namespace intentforge
