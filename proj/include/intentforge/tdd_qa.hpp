// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "intentforge/orchestrator.hpp"
#include "intentforge/traversal.hpp"

namespace intentforge {

namespace bus {
class MessageBus;
}

enum class TestStatus { Red, Green };
enum class Overall { Compliant, Violated, Settling };

std::string_view to_string(TestStatus s);
std::string_view to_string(Overall o);

struct EvaluationRecord {
    std::int64_t tick = 0;
    std::optional<Decimal> observed;
    TestStatus verdict = TestStatus::Red;

    bool operator==(const EvaluationRecord&) const = default;
};

struct TestInstance {
    std::string testInstanceId;
    /// Index into the plan's derivedTests.
    std::size_t derivedFrom = 0;
    DerivedTest test;
    std::string boundItemRef;
    TestStatus status = TestStatus::Red;
    std::int64_t lastEvaluationTick = 0;
    std::vector<EvaluationRecord> history;
};

nlohmann::json to_json(const TestInstance& t);

/// One instance per derived test, ids "ti-001".., all red.
std::vector<TestInstance> instantiate_tests(const OrchestrationPlan& plan);

struct StatusTransition {
    std::string testInstanceId;
    std::string boundItemRef;
    TestStatus from = TestStatus::Red;
    TestStatus to = TestStatus::Red;
    std::int64_t tick = 0;
    /// sample, absence or fault
    std::string cause;

    bool operator==(const StatusTransition&) const = default;
};

nlohmann::json to_json(const StatusTransition& t);

struct RemediationRequest {
    /// Empty when the failed item has no bound test.
    std::string testInstanceId;
    std::string itemRef;
    int attempt = 0;
    RemediationAction action = RemediationAction::Retry;
    std::int64_t tick = 0;
    /// fault, regression or persistentRed
    std::string reason;
    bool requiresApproval = false;

    bool operator==(const RemediationRequest&) const = default;
};

nlohmann::json to_json(const RemediationRequest& r);

struct TestReport {
    std::string testInstanceId;
    std::string testSpecId;
    std::string boundItemRef;
    TestStatus status = TestStatus::Red;
    std::int64_t redTicks = 0;
    std::int64_t greenTicks = 0;
    int violations = 0;

    bool operator==(const TestReport&) const = default;
};

struct SlaReport {
    std::string runRef;
    std::int64_t durationTicks = 0;
    std::vector<TestReport> perTest;
    Overall overall = Overall::Settling;

    bool operator==(const SlaReport&) const = default;
};

nlohmann::json to_json(const SlaReport& r);
std::string canonical_report(const SlaReport& r);

struct QaConfig {
    bool requireApproval = false;
    /// Ticks of persistent red after completion before a reprovision request,
    /// as a multiple of the test's window.
    int graceWindows = 2;
};

/// Consumes one run's telemetry in tick order. A tick is closed (absence
/// checks, grace timers, red/green accounting) when an event of a later tick
/// arrives or advance_to() is called, so replaying a stored stream reproduces
/// the same report.
class Pipeline {
public:
    Pipeline(const OrchestrationPlan& plan, std::string runRef, QaConfig config = {});

    const std::vector<TestInstance>& instances() const { return instances_; }
    const TestInstance* instance(std::string_view id) const;
    std::int64_t closed_through() const { return closed_; }

    /// Transitions caused by this event (and by closing earlier ticks).
    std::vector<StatusTransition> evaluate(const TelemetryEvent& event);
    /// Closes every tick up to and including `tick`.
    std::vector<StatusTransition> advance_to(std::int64_t tick);
    /// Remediation request for a green->red transition on a completed item,
    /// at most one per (test instance, attempt).
    std::optional<RemediationRequest> on_red(const StatusTransition& transition);
    /// Requests raised since the last call.
    std::vector<RemediationRequest> take_requests();
    const std::vector<RemediationRequest>& requests() const { return allRequests_; }
    /// Warnings such as telemetry for a metric no bound test expects.
    const std::vector<std::string>& warnings() const { return warnings_; }

    SlaReport report() const;

private:
    struct Track {
        std::map<std::int64_t, Decimal> samples;
        std::int64_t redTicks = 0;
        std::int64_t greenTicks = 0;
        std::int64_t greenStreak = 0;
        int violations = 0;
        bool everGreen = false;
        /// Attempt of the bound item that has an outstanding request.
        std::optional<int> requestedAttempt;
    };

    TestStatus window_verdict(const TestInstance& t, const Track& k, std::int64_t tick) const;
    void set_status(TestInstance& t, TestStatus to, std::int64_t tick, const std::string& cause, std::vector<StatusTransition>& out);
    void close_tick(std::int64_t tick, std::vector<StatusTransition>& out);
    void raise(RemediationRequest r);
    bool item_completed(const std::string& ref) const;
    int item_attempt(const std::string& ref) const;

    std::string runRef_;
    QaConfig config_;
    std::vector<TestInstance> instances_;
    std::vector<Track> tracks_;
    std::map<std::string, std::vector<std::size_t>> byRef_;
    std::map<std::string, std::string> itemState_;
    std::map<std::string, int> itemAttempt_;
    std::map<std::string, std::int64_t> completedAt_;
    std::set<std::pair<std::string, int>> raised_;
    std::vector<RemediationRequest> newRequests_;
    std::vector<RemediationRequest> allRequests_;
    std::vector<std::string> warnings_;
    std::int64_t closed_ = 0;
};

/// Push notifications in gateway terms: itemTransition, testTransition,
/// remediationRequest, runReport.
using LoopSink = std::function<void(const std::string& kind, const nlohmann::json& body)>;

/// Drives one run together with its pipeline. Unless approval is required,
/// remediation requests are applied to the run as they appear.
class AssuranceLoop {
public:
    /// Throws std::logic_error if the run has already ticked.
    AssuranceLoop(Run& run, const OrchestrationPlan& plan, QaConfig config = {}, bus::MessageBus* bus = nullptr, LoopSink sink = {});

    void step();
    /// One step unless settled; returns false (emitting runReport once) when settled.
    bool advance();
    /// Steps until compliant with every item completed, or until the run has
    /// been stalled for a grace period, or `maxTicks` have elapsed.
    SlaReport run_until_settled(int maxTicks = 500);
    SlaReport report() const { return pipeline_.report(); }
    const Pipeline& pipeline() const { return pipeline_; }
    Run& run() { return run_; }
    /// Applies a request that was held for approval; returns the orchestrator's ack.
    RemediationAck approve(const RemediationRequest& request);

private:
    void emit(const std::string& kind, const nlohmann::json& body);
    bool finish();

    Run& run_;
    QaConfig config_;
    Pipeline pipeline_;
    bus::MessageBus* bus_;
    LoopSink sink_;
    std::int64_t maxWindow_ = 1;
    std::int64_t stalled_ = 0;
    bool reported_ = false;
};

}  // namespace intentforge
