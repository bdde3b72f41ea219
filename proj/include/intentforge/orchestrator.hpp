// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "intentforge/traversal.hpp"

namespace intentforge {

enum class ItemKind { Service, Resource };
enum class ItemState { Acknowledged, InProgress, Completed, Failed };
enum class EventKind { Fault, Log, Performance };
enum class Severity { Info, Warn, Error };
enum class RemediationAction { Retry, Reprovision };

std::string_view to_string(ItemKind k);
std::string_view to_string(ItemState s);
std::string_view to_string(EventKind k);
std::string_view to_string(Severity s);
std::string_view to_string(RemediationAction a);
std::optional<ItemState> item_state_from_string(std::string_view s);
std::optional<RemediationAction> remediation_action_from_string(std::string_view s);

/// acknowledged->inProgress->{completed, failed}; failed/completed->inProgress
/// only when `remediation` is set.
bool legal_transition(ItemState from, ItemState to, bool remediation);

struct ProvisioningItem {
    std::string itemId;
    std::string planRef;
    ItemKind kind = ItemKind::Service;
    std::optional<Domain> domain;
    std::string specId;
    /// Item this one waits for; empty for items hanging off a selection root.
    std::string dependsOn;
    std::string rootRef;
    ItemState state = ItemState::Acknowledged;
    std::int64_t startedTick = -1;
    std::int64_t completedTick = -1;
    int attempts = 0;
    int remediations = 0;
};

nlohmann::json to_json(const ProvisioningItem& item);

struct Metric {
    std::string name;
    Decimal value;
    std::string unit;

    bool operator==(const Metric&) const = default;
};

struct TelemetryEvent {
    std::int64_t tick = 0;
    std::string itemRef;
    EventKind kind = EventKind::Log;
    Severity severity = Severity::Info;
    std::optional<Metric> metric;
    /// Log events: {"from", "to", "attempt"}; faults: {"attempt", "reason"}.
    nlohmann::json detail = nlohmann::json::object();

    bool operator==(const TelemetryEvent&) const = default;
};

nlohmann::json to_json(const TelemetryEvent& e);
TelemetryEvent telemetry_from_json(const nlohmann::json& j);

struct FaultPlan {
    /// Item id, spec id, or a prefix ending in '*'.
    std::string itemMatcher;
    int failOnAttempt = 1;

    bool matches(const ProvisioningItem& item) const;
};

struct Controller {
    Domain domain = Domain::Infrastructure;
    int stepDurationTicks = 3;
    std::optional<FaultPlan> faultPlan;
};

struct MetricProfile {
    Decimal steady;
    /// Samples are steady + uniform noise in [-noise, +noise], 0.01 resolution.
    Decimal noise;
    std::string unit;
};

/// latencyMs 12 +-1 ms, throughputMbps 800 +-20, heartbeats exactly 1.
std::map<std::string, MetricProfile> default_metric_profile();

struct RunConfig {
    std::map<Domain, Controller> controllers;
    int serviceStepDurationTicks = 3;
    std::vector<FaultPlan> faultPlans;
    std::uint64_t seed = 42;
    int maxAttempts = 3;
    bool requireApproval = false;
    std::map<std::string, MetricProfile> metricProfile = default_metric_profile();

    /// One controller per domain, every one taking `ticks`.
    static RunConfig uniform(int ticks, std::uint64_t seed = 42);
};

nlohmann::json to_json(const RunConfig& c);
/// Accepts {"controllers": {"RAN": {"stepDurationTicks": n, "faultPlan": {...}}, ...},
/// "serviceStepDurationTicks", "faultPlans", "seed", "maxAttempts",
/// "remediation": {"requireApproval"}, "metricProfile"}. Missing domains get 3 ticks.
RunConfig run_config_from_json(const nlohmann::json& j);

class OrchestratorError : public std::runtime_error {
public:
    enum class Kind { MissingController, DuplicateRun, DigestMismatch, UnknownRun, UnknownItem, IllegalState };
    OrchestratorError(Kind kind, const std::string& what);
    Kind kind;
};

struct RemediationAck {
    bool accepted = false;
    bool degraded = false;
    int attempt = 0;
    std::string detail;
};

nlohmann::json to_json(const RemediationAck& a);

/// One execution of a plan. Single writer: every mutation goes through tick()
/// or remediate(), both serialized by the owning Engine's lock.
class Run {
public:
    Run(std::string runId, const OrchestrationPlan& plan, const RunConfig& config);

    const std::string& id() const { return id_; }
    const std::string& plan_id() const { return planId_; }
    std::int64_t now() const { return now_; }
    const std::vector<ProvisioningItem>& items() const { return items_; }
    const ProvisioningItem* item(std::string_view id) const;
    /// Item ids bound to each selection root.
    const std::map<std::string, std::vector<std::string>>& roots() const { return roots_; }
    const std::vector<TelemetryEvent>& events() const { return events_; }
    bool degraded() const { return degraded_; }
    const RunConfig& config() const { return config_; }

    /// Advances one tick and returns the events it produced, ordered by itemRef.
    std::vector<TelemetryEvent> tick();
    /// Validates now, applies at the start of the next tick.
    RemediationAck remediate(const std::string& itemRef, RemediationAction action);

    std::size_t count(ItemState s) const;
    /// Every item completed.
    bool completed() const;
    /// Nothing in flight and nothing dispatchable, but not completed.
    bool stalled() const;
    bool root_completed(const std::string& rootRef) const;

private:
    void transition(ProvisioningItem& item, ItemState to, std::vector<TelemetryEvent>& out, bool remediation);
    int duration_for(const ProvisioningItem& item) const;
    bool fault_fires(const ProvisioningItem& item) const;
    Metric sample(const std::string& metric);

    std::string id_;
    std::string planId_;
    RunConfig config_;
    std::vector<ProvisioningItem> items_;
    std::map<std::string, std::vector<std::string>> roots_;
    /// Metrics each itemRef (item or root) reports once up.
    std::map<std::string, std::vector<std::string>> metrics_;
    /// Root -> (up, tick it last changed).
    std::map<std::string, std::pair<bool, std::int64_t>> rootUp_;
    /// Remediations accepted this tick, applied at the start of the next.
    std::map<std::string, RemediationAction> pending_;
    std::vector<TelemetryEvent> events_;
    std::int64_t now_ = 0;
    bool degraded_ = false;
    std::mt19937_64 rng_;
};

class Engine {
public:
    explicit Engine(RunConfig config = RunConfig::uniform(3));

    const RunConfig& config() const { return config_; }
    /// Verifies the digest and controller coverage, creates every item
    /// acknowledged and returns the run id.
    std::string execute_plan(const OrchestrationPlan& plan);
    Run& run(const std::string& runId);
    std::vector<std::string> run_ids() const;

private:
    RunConfig config_;
    std::map<std::string, std::unique_ptr<Run>> runs_;
    std::map<std::string, std::string> byDigest_;
    std::mutex mu_;
};

}  // namespace intentforge
