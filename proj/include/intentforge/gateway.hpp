// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "intentforge/bus.hpp"
#include "intentforge/catalog.hpp"
#include "intentforge/cocreation/agent.hpp"
#include "intentforge/inventory.hpp"
#include "intentforge/orchestrator.hpp"
#include "intentforge/tdd_qa.hpp"
#include "intentforge/traversal.hpp"

namespace intentforge::gateway {

enum class PushKind { AgentTurn, TaskUpdate, PlanReady, ItemTransition, TestTransition, RemediationRequest, RunReport };
std::string_view to_string(PushKind k);
std::optional<PushKind> push_kind_from_string(std::string_view s);

struct PushEvent {
    std::int64_t sequence = 0;
    PushKind kind = PushKind::AgentTurn;
    nlohmann::json body;
};

nlohmann::json to_json(const PushEvent& e);

/// Append-only, replayable from any cursor.
class EventLog {
public:
    std::int64_t append(PushKind kind, nlohmann::json body);
    /// Events with sequence > cursor, at most `limit`.
    std::vector<PushEvent> since(std::int64_t cursor, std::size_t limit = 1000) const;
    /// Blocks until an event past `cursor` exists, the timeout passes, or close() is called.
    bool wait_past(std::int64_t cursor, std::chrono::milliseconds timeout) const;
    std::int64_t last() const;
    void close();
    bool closed() const;

private:
    mutable std::mutex mu_;
    mutable std::condition_variable cv_;
    std::vector<PushEvent> events_;
    bool closed_ = false;
};

class ApiError : public std::runtime_error {
public:
    ApiError(int status, const std::string& what) : std::runtime_error(what), status(status) {}
    int status;
};

struct GatewayConfig {
    std::string backend = "reference";
    RunConfig runConfig = RunConfig::uniform(3);
    /// 0: runs are driven to settlement inside POST /runs. Otherwise one tick
    /// per interval on a background thread.
    int tickIntervalMs = 0;
    int maxRunTicks = 500;
    /// Empty: no authentication.
    std::string bearerToken;
    std::string inventoryPath;
};

/// Everything the HTTP layer exposes, without the HTTP. Thread-safe; mutations
/// of one session or run are serialized.
class GatewayService {
public:
    GatewayService(CatalogGraph graph, GatewayConfig config = {});
    ~GatewayService();
    GatewayService(const GatewayService&) = delete;
    GatewayService& operator=(const GatewayService&) = delete;

    const CatalogGraph& graph() const { return graph_; }
    const GatewayConfig& config() const { return config_; }
    EventLog& events() { return events_; }

    nlohmann::json health() const;
    nlohmann::json offerings(const std::string& query = {}) const;

    /// {"backend"?: id}. Returns the session view.
    nlohmann::json create_session(const nlohmann::json& request = nlohmann::json::object());
    nlohmann::json session(const std::string& id);
    /// {"text"}.
    nlohmann::json post_message(const std::string& id, const nlohmann::json& request);
    /// {"confirmedBy"?}. On finalization the plan is built and announced.
    nlohmann::json confirm(const std::string& id, const nlohmann::json& request);
    nlohmann::json tasks(const std::string& id);

    nlohmann::json plan(const std::string& planId);
    /// {"planId"}.
    nlohmann::json create_run(const nlohmann::json& request);
    nlohmann::json run_view(const std::string& runId);
    nlohmann::json run_report(const std::string& runId);
    /// {"itemRef", "action": "retry"|"reprovision"}.
    nlohmann::json remediate(const std::string& runId, const nlohmann::json& request);
    /// Advances a run by up to `ticks` ticks; returns its view.
    nlohmann::json tick_run(const std::string& runId, int ticks);

    nlohmann::json events_since(std::int64_t cursor, std::size_t limit = 1000) const;
    nlohmann::json bus_stats() const;

    /// Stops background runs and wakes event-stream readers.
    void shutdown();

private:
    struct SessionEntry {
        std::mutex mu;
        std::unique_ptr<cocreation::Agent> agent;
        std::size_t transitionsSeen = 0;
        std::optional<std::string> planId;
    };
    struct RunEntry {
        std::mutex mu;
        std::string planId;
        Run* run = nullptr;
        std::unique_ptr<AssuranceLoop> loop;
        bool settled = false;
        std::thread worker;
    };

    SessionEntry& session_entry(const std::string& id);
    RunEntry& run_entry(const std::string& id);
    nlohmann::json session_json(SessionEntry& e);
    nlohmann::json run_json(RunEntry& e);
    void publish_task_updates(SessionEntry& e);
    void maybe_plan(SessionEntry& e);

    CatalogGraph graph_;
    GatewayConfig config_;
    InventoryStore inventory_;
    Engine engine_;
    bus::MessageBus bus_;
    EventLog events_;

    mutable std::mutex mu_;
    std::map<std::string, std::unique_ptr<SessionEntry>> sessions_;
    std::map<std::string, OrchestrationPlan> plans_;
    std::map<std::string, std::unique_ptr<RunEntry>> runs_;
    int sessionCounter_ = 0;
    std::atomic<bool> stopping_{false};
};

/// HTTP binding of GatewayService (REST + event stream).
class HttpGateway {
public:
    explicit HttpGateway(GatewayService& service);
    ~HttpGateway();

    /// Binds and serves on a background thread; returns the bound port.
    /// port 0 picks a free one. Throws std::runtime_error on bind failure.
    int start(const std::string& host, int port);
    /// Serves on the calling thread until stop().
    void serve(const std::string& host, int port);
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// INTENTFORGE_PORT, default 8080.
int port_from_env();

}  // namespace intentforge::gateway
