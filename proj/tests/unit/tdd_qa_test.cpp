// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "intentforge/bus.hpp"
#include "intentforge/canonical.hpp"
#include "intentforge/tdd_qa.hpp"
#include "oracles.hpp"

namespace intentforge {
namespace {

using testing::ground_truth_plan;

OrchestrationPlan latency_plan(int window = 3) {
    OrchestrationPlan p;
    p.planId = "plan-lat";
    p.serviceOrders.push_back({"so-001", "ss-edge-cache", {}, "sel:po-edge-large"});
    DerivedTest t;
    t.testSpecId = "ts-edge-latency";
    t.boundRef = "so-001";
    t.resolvedThreshold = Decimal::from_int(15);
    t.kind = TestKind::Latency;
    t.comparator = Comparator::Lt;
    t.targetMetric = "latencyMs";
    t.evaluationWindowTicks = window;
    p.derivedTests.push_back(t);
    return p;
}

TelemetryEvent completed_log(std::int64_t tick, const std::string& ref, int attempt = 1) {
    TelemetryEvent e;
    e.tick = tick;
    e.itemRef = ref;
    e.detail = {{"from", "inProgress"}, {"to", "completed"}, {"attempt", attempt}};
    return e;
}

TelemetryEvent perf(std::int64_t tick, const std::string& ref, const std::string& metric, int value) {
    TelemetryEvent e;
    e.tick = tick;
    e.itemRef = ref;
    e.kind = EventKind::Performance;
    e.metric = Metric{metric, Decimal::from_int(value), ""};
    return e;
}

const TestInstance& by_ref(const Pipeline& p, const std::string& ref) {
    for (const auto& t : p.instances()) {
        if (t.boundItemRef == ref) return t;
    }
    throw std::runtime_error("no instance for " + ref);
}

TEST(Instantiate, AllRedOnePerDerivedTest) {
    auto tests = instantiate_tests(ground_truth_plan());
    ASSERT_EQ(tests.size(), ground_truth_plan().derivedTests.size());
    EXPECT_EQ(tests.size(), 9u);
    for (std::size_t i = 0; i < tests.size(); ++i) {
        EXPECT_EQ(tests[i].status, TestStatus::Red);
        EXPECT_EQ(tests[i].derivedFrom, i);
        EXPECT_TRUE(tests[i].history.empty());
    }
    EXPECT_EQ(tests[0].testInstanceId, "ti-001");
    int steering = 0;
    for (const auto& t : tests) steering += t.test.testSpecId == "ts-steering-connectivity";
    EXPECT_EQ(steering, 2);
}

TEST(Instantiate, ZeroTestsTriviallyCompliant) {
    OrchestrationPlan p;
    p.planId = "p";
    Pipeline pl(p, "run-x");
    EXPECT_TRUE(pl.instances().empty());
    EXPECT_EQ(pl.report().overall, Overall::Compliant);
}

TEST(Evaluate, LatencyWindowExample) {
    Pipeline p(latency_plan(), "run-lat");
    p.evaluate(completed_log(1, "so-001"));
    EXPECT_TRUE(p.evaluate(perf(2, "so-001", "latencyMs", 12)).empty());
    EXPECT_TRUE(p.evaluate(perf(3, "so-001", "latencyMs", 13)).empty());
    auto tr = p.evaluate(perf(4, "so-001", "latencyMs", 11));
    ASSERT_EQ(tr.size(), 1u);
    EXPECT_EQ(tr[0].from, TestStatus::Red);
    EXPECT_EQ(tr[0].to, TestStatus::Green);
    EXPECT_EQ(tr[0].tick, 4);
    EXPECT_EQ(tr[0].cause, "sample");

    tr = p.evaluate(perf(5, "so-001", "latencyMs", 22));
    ASSERT_EQ(tr.size(), 1u);
    EXPECT_EQ(tr[0].to, TestStatus::Red);
    p.advance_to(5);
    auto rep = p.report();
    EXPECT_EQ(rep.perTest[0].violations, 1);
    EXPECT_EQ(rep.overall, Overall::Violated);

    auto reqs = p.take_requests();
    ASSERT_EQ(reqs.size(), 1u);
    EXPECT_EQ(reqs[0].itemRef, "so-001");
    EXPECT_EQ(reqs[0].action, RemediationAction::Reprovision);
    EXPECT_EQ(reqs[0].attempt, 1);
    EXPECT_EQ(reqs[0].reason, "regression");
    EXPECT_EQ(reqs[0].testInstanceId, "ti-001");

    // back to green, then a second regression within the same attempt
    for (int t = 6; t <= 8; ++t) p.evaluate(perf(t, "so-001", "latencyMs", 12));
    EXPECT_EQ(p.instances()[0].status, TestStatus::Green);
    p.evaluate(perf(9, "so-001", "latencyMs", 30));
    p.advance_to(9);
    EXPECT_TRUE(p.take_requests().empty());
    EXPECT_EQ(p.report().perTest[0].violations, 2);
    EXPECT_EQ(p.instances()[0].history.size(), 8u);
}

TEST(Evaluate, ThresholdBoundaryIsStrict) {
    Pipeline p(latency_plan(1), "run");
    p.evaluate(completed_log(1, "so-001"));
    EXPECT_TRUE(p.evaluate(perf(2, "so-001", "latencyMs", 15)).empty());
    EXPECT_EQ(p.evaluate(perf(3, "so-001", "latencyMs", 14)).size(), 1u);
}

TEST(Evaluate, UnboundOrUnknownMetricIsNoOp) {
    Pipeline p(latency_plan(), "run");
    EXPECT_TRUE(p.evaluate(perf(1, "so-999", "latencyMs", 1)).empty());
    EXPECT_TRUE(p.evaluate(perf(2, "so-001", "jitterMs", 1)).empty());
    EXPECT_EQ(p.warnings().size(), 1u);
}

TEST(Evaluate, PreProvisioningRedRaisesNothing) {
    Pipeline p(latency_plan(), "run");
    p.evaluate(perf(1, "so-001", "latencyMs", 40));
    p.evaluate(perf(2, "so-001", "latencyMs", 40));
    p.advance_to(20);
    EXPECT_TRUE(p.take_requests().empty());
    EXPECT_EQ(p.report().overall, Overall::Settling);
}

TEST(Evaluate, PersistentRedAfterGrace) {
    Pipeline p(latency_plan(), "run");
    p.evaluate(completed_log(1, "so-001"));
    for (int t = 2; t <= 6; ++t) p.evaluate(perf(t, "so-001", "latencyMs", 40));
    p.advance_to(6);
    EXPECT_TRUE(p.take_requests().empty());
    p.advance_to(7);
    auto reqs = p.take_requests();
    ASSERT_EQ(reqs.size(), 1u);
    EXPECT_EQ(reqs[0].reason, "persistentRed");
    EXPECT_EQ(reqs[0].tick, 7);
    p.advance_to(30);
    EXPECT_TRUE(p.take_requests().empty());
}

TEST(Evaluate, AbsenceTurnsPresenceTestRed) {
    auto plan = latency_plan();
    plan.derivedTests[0].kind = TestKind::Connectivity;
    plan.derivedTests[0].targetMetric = "connectivity";
    plan.derivedTests[0].comparator = Comparator::Ge;
    plan.derivedTests[0].resolvedThreshold = Decimal::from_int(1);
    plan.derivedTests[0].evaluationWindowTicks = 2;
    Pipeline p(plan, "run");
    p.evaluate(completed_log(1, "so-001"));
    EXPECT_EQ(p.evaluate(perf(2, "so-001", "connectivity", 1)).size(), 1u);
    EXPECT_TRUE(p.advance_to(3).empty());
    auto tr = p.advance_to(4);
    ASSERT_EQ(tr.size(), 1u);
    EXPECT_EQ(tr[0].cause, "absence");
    EXPECT_EQ(tr[0].tick, 4);
}

TEST(Evaluate, ApprovalModeMarksRequests) {
    Pipeline p(latency_plan(), "run", QaConfig{true, 2});
    p.evaluate(completed_log(1, "so-001"));
    for (int t = 2; t <= 4; ++t) p.evaluate(perf(t, "so-001", "latencyMs", 12));
    p.evaluate(perf(5, "so-001", "latencyMs", 40));
    auto reqs = p.take_requests();
    ASSERT_EQ(reqs.size(), 1u);
    EXPECT_TRUE(reqs[0].requiresApproval);
}

TEST(Loop, FaultFreeGroundTruthCompliant) {
    Engine e(RunConfig::uniform(3, 42));
    auto& run = e.run(e.execute_plan(ground_truth_plan()));
    AssuranceLoop loop(run, ground_truth_plan());
    for (const auto& t : loop.pipeline().instances()) EXPECT_EQ(t.status, TestStatus::Red);
    auto rep = loop.run_until_settled();
    EXPECT_EQ(rep.overall, Overall::Compliant);
    EXPECT_EQ(rep.durationTicks, 15);
    for (const auto& t : rep.perTest) {
        EXPECT_EQ(t.violations, 0);
        EXPECT_EQ(t.status, TestStatus::Green);
        EXPECT_EQ(t.redTicks + t.greenTicks, rep.durationTicks);
    }
    EXPECT_TRUE(loop.pipeline().requests().empty());
    const auto& throughput = by_ref(loop.pipeline(), "ro-006");
    EXPECT_EQ(throughput.history.size(), 5u);
    for (const auto& r : rep.perTest) {
        if (r.boundItemRef == "ro-006") {
            EXPECT_EQ(r.redTicks, 12);
            EXPECT_EQ(r.greenTicks, 3);
        }
    }
    for (const auto& ev : run.events()) EXPECT_NE(ev.severity, Severity::Error);
}

// every instance goes green within completion tick + window
TEST(Loop, TddContractTiming) {
    Engine e(RunConfig::uniform(3, 42));
    auto& run = e.run(e.execute_plan(ground_truth_plan()));
    AssuranceLoop loop(run, ground_truth_plan());
    loop.run_until_settled();
    std::map<std::string, std::int64_t> up;
    for (const auto& ev : run.events()) {
        if (ev.kind != EventKind::Log) continue;
        if (ev.detail.value("to", "") == "completed" || ev.detail.value("up", false)) up[ev.itemRef] = ev.tick;
    }
    for (const auto& t : loop.pipeline().instances()) {
        ASSERT_FALSE(t.history.empty());
        std::int64_t firstGreen = -1;
        for (const auto& h : t.history) {
            if (h.verdict == TestStatus::Green) {
                firstGreen = h.tick;
                break;
            }
        }
        ASSERT_GT(firstGreen, 0) << t.testInstanceId;
        EXPECT_LE(firstGreen, up.at(t.boundItemRef) + t.test.evaluationWindowTicks) << t.testInstanceId;
    }
}

TEST(Loop, InjectedFaultOneRemediationThenCompliant) {
    auto cfg = RunConfig::uniform(3, 42);
    cfg.controllers[Domain::RAN].faultPlan = FaultPlan{"res-ran-slice", 1};
    Engine e(cfg);
    auto& run = e.run(e.execute_plan(ground_truth_plan()));
    std::vector<std::string> kinds;
    AssuranceLoop loop(run, ground_truth_plan(), {}, nullptr, [&](const std::string& k, const nlohmann::json&) { kinds.push_back(k); });
    auto rep = loop.run_until_settled();
    ASSERT_EQ(loop.pipeline().requests().size(), 1u);
    const auto& req = loop.pipeline().requests()[0];
    EXPECT_EQ(req.itemRef, "ro-005");
    EXPECT_EQ(req.action, RemediationAction::Retry);
    EXPECT_EQ(req.reason, "fault");
    EXPECT_EQ(req.tick, 10);
    EXPECT_EQ(rep.overall, Overall::Compliant);
    EXPECT_EQ(run.item("ro-005")->attempts, 2);
    EXPECT_EQ(std::count(kinds.begin(), kinds.end(), "remediationRequest"), 1);
    EXPECT_EQ(std::count(kinds.begin(), kinds.end(), "runReport"), 1);
    EXPECT_GT(std::count(kinds.begin(), kinds.end(), "testTransition"), 0);
    EXPECT_GT(std::count(kinds.begin(), kinds.end(), "itemTransition"), 0);
    for (const auto& t : rep.perTest) EXPECT_EQ(t.violations, 0);
}

TEST(Loop, FaultWithoutRemediationIsViolated) {
    auto cfg = RunConfig::uniform(3, 42);
    cfg.controllers[Domain::RAN].faultPlan = FaultPlan{"ro-005", 1};
    Engine e(cfg);
    auto& run = e.run(e.execute_plan(ground_truth_plan()));
    AssuranceLoop loop(run, ground_truth_plan(), QaConfig{true, 2});
    auto rep = loop.run_until_settled();
    EXPECT_EQ(rep.overall, Overall::Violated);
    ASSERT_EQ(loop.pipeline().requests().size(), 1u);
    EXPECT_TRUE(loop.pipeline().requests()[0].requiresApproval);
    EXPECT_EQ(run.item("ro-005")->state, ItemState::Failed);

    auto ack = loop.approve(loop.pipeline().requests()[0]);
    EXPECT_TRUE(ack.accepted);
    rep = loop.run_until_settled();
    EXPECT_EQ(rep.overall, Overall::Compliant);
}

TEST(Loop, SnapshotDuringProvisioningIsSettling) {
    Engine e;
    auto& run = e.run(e.execute_plan(ground_truth_plan()));
    AssuranceLoop loop(run, ground_truth_plan());
    for (int i = 0; i < 5; ++i) loop.step();
    EXPECT_EQ(loop.report().overall, Overall::Settling);
}

TEST(Loop, MustStartBeforeDispatch) {
    Engine e;
    auto& run = e.run(e.execute_plan(ground_truth_plan()));
    run.tick();
    EXPECT_THROW(AssuranceLoop(run, ground_truth_plan()), std::logic_error);
}

TEST(Loop, DeterministicAndReplayable) {
    auto once = [](Pipeline* replay) {
        Engine e(RunConfig::uniform(3, 42));
        auto& run = e.run(e.execute_plan(ground_truth_plan()));
        AssuranceLoop loop(run, ground_truth_plan());
        auto rep = loop.run_until_settled();
        if (replay) {
            for (const auto& ev : run.events()) replay->evaluate(ev);
            replay->advance_to(run.now());
            EXPECT_EQ(canonical_report(replay->report()), canonical_report(rep));
        }
        return canonical_report(rep);
    };
    Pipeline replay(ground_truth_plan(), "run-" + ground_truth_plan().canonicalDigest.substr(0, 12));
    EXPECT_EQ(once(&replay), once(nullptr));
}

TEST(Loop, TransitionsPublishedOnBus) {
    bus::MessageBus b;
    std::vector<nlohmann::json> seen;
    b.subscribe("qa/transitions", [&](const bus::Envelope& env) -> std::optional<nlohmann::json> {
        seen.push_back(env.body());
        return std::nullopt;
    });
    Engine e;
    auto& run = e.run(e.execute_plan(ground_truth_plan()));
    AssuranceLoop loop(run, ground_truth_plan(), {}, &b);
    loop.run_until_settled();
    b.run_until_idle();
    EXPECT_EQ(seen.size(), 9u);
    for (const auto& s : seen) EXPECT_EQ(s["to"], "green");
}

TEST(Report, CanonicalJsonShape) {
    Pipeline p(latency_plan(), "run-lat");
    p.advance_to(2);
    auto j = to_json(p.report());
    EXPECT_EQ(j["runRef"], "run-lat");
    EXPECT_EQ(j["overall"], "settling");
    EXPECT_EQ(j["perTest"][0]["redTicks"], 2);
    EXPECT_EQ(canonical_report(p.report()), canonical_json(j));
}

}  // namespace
}  // namespace intentforge
