// SPDX-License-Identifier: Apache-2.0
#include "intentforge/gateway.hpp"

#include <algorithm>
#include <cstdlib>

#include "intentforge/cocreation/reasoner.hpp"

namespace intentforge::gateway {

using nlohmann::json;

std::string_view to_string(PushKind k) {
    switch (k) {
    case PushKind::AgentTurn: return "agentTurn";
    case PushKind::TaskUpdate: return "taskUpdate";
    case PushKind::PlanReady: return "planReady";
    case PushKind::ItemTransition: return "itemTransition";
    case PushKind::TestTransition: return "testTransition";
    case PushKind::RemediationRequest: return "remediationRequest";
    case PushKind::RunReport: return "runReport";
    }
    return "agentTurn";
}

std::optional<PushKind> push_kind_from_string(std::string_view s) {
    for (auto k : {PushKind::AgentTurn, PushKind::TaskUpdate, PushKind::PlanReady, PushKind::ItemTransition, PushKind::TestTransition,
                   PushKind::RemediationRequest, PushKind::RunReport}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

json to_json(const PushEvent& e) { return {{"sequence", e.sequence}, {"kind", std::string(to_string(e.kind))}, {"body", e.body}}; }

std::int64_t EventLog::append(PushKind kind, json body) {
    std::int64_t seq;
    {
        std::lock_guard lock(mu_);
        seq = static_cast<std::int64_t>(events_.size()) + 1;
        events_.push_back({seq, kind, std::move(body)});
    }
    cv_.notify_all();
    return seq;
}

std::vector<PushEvent> EventLog::since(std::int64_t cursor, std::size_t limit) const {
    std::lock_guard lock(mu_);
    std::vector<PushEvent> out;
    for (auto i = static_cast<std::size_t>(std::max<std::int64_t>(cursor, 0)); i < events_.size() && out.size() < limit; ++i)
        out.push_back(events_[i]);
    return out;
}

bool EventLog::wait_past(std::int64_t cursor, std::chrono::milliseconds timeout) const {
    std::unique_lock lock(mu_);
    return cv_.wait_for(lock, timeout, [&] { return closed_ || static_cast<std::int64_t>(events_.size()) > cursor; }) && !closed_;
}

std::int64_t EventLog::last() const {
    std::lock_guard lock(mu_);
    return static_cast<std::int64_t>(events_.size());
}

bool EventLog::closed() const {
    std::lock_guard lock(mu_);
    return closed_;
}

void EventLog::close() {
    {
        std::lock_guard lock(mu_);
        closed_ = true;
    }
    cv_.notify_all();
}

// ---------------------------------------------------------------- service

namespace {

std::optional<PushKind> loop_kind(const std::string& k) { return push_kind_from_string(k); }

const json& require_object(const json& j) {
    if (!j.is_object()) throw ApiError(400, "request body must be a JSON object");
    return j;
}

std::string require_string(const json& j, const char* key) {
    require_object(j);
    if (!j.contains(key) || !j[key].is_string()) throw ApiError(400, std::string("missing string field: ") + key);
    return j[key].get<std::string>();
}

}  // namespace

GatewayService::GatewayService(CatalogGraph graph, GatewayConfig config)
    : graph_(std::move(graph)),
      config_(std::move(config)),
      inventory_(graph_, config_.inventoryPath),
      engine_(config_.runConfig),
      bus_(bus::BusConfig{config_.runConfig.seed}) {
    bus_.subscribe("qa/transitions", [](const bus::Envelope&) -> std::optional<json> { return std::nullopt; });
}

GatewayService::~GatewayService() { shutdown(); }

void GatewayService::shutdown() {
    if (stopping_.exchange(true)) return;
    events_.close();
    std::vector<RunEntry*> entries;
    {
        std::lock_guard lock(mu_);
        for (auto& [_, r] : runs_) entries.push_back(r.get());
    }
    for (auto* r : entries) {
        if (r->worker.joinable()) r->worker.join();
    }
}

json GatewayService::health() const {
    std::lock_guard lock(mu_);
    return {{"status", "ok"},
            {"catalogVersion", graph_.version},
            {"offerings", graph_.offerings.size()},
            {"sessions", sessions_.size()},
            {"runs", runs_.size()}};
}

json GatewayService::offerings(const std::string& query) const {
    json out = json::array();
    for (const auto* o : find_offerings(graph_, query)) out.push_back(offering_summary(*o));
    return out;
}

GatewayService::SessionEntry& GatewayService::session_entry(const std::string& id) {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ApiError(404, "unknown session: " + id);
    return *it->second;
}

GatewayService::RunEntry& GatewayService::run_entry(const std::string& id) {
    std::lock_guard lock(mu_);
    auto it = runs_.find(id);
    if (it == runs_.end()) throw ApiError(404, "unknown run: " + id);
    return *it->second;
}

json GatewayService::session_json(SessionEntry& e) {
    const auto& s = e.agent->session();
    auto j = cocreation::to_json(s);
    j["backend"] = e.agent->reasoner().id();
    j["pendingQuestion"] = nullptr;
    if (s.status == cocreation::SessionStatus::AwaitingUser) {
        for (auto it = s.transcript.rbegin(); it != s.transcript.rend(); ++it) {
            if (it->role == cocreation::Role::Agent) {
                j["pendingQuestion"] = it->content;
                break;
            }
        }
    }
    j["quoteShown"] = s.draft.quotedCost.has_value();
    j["planId"] = e.planId ? json(*e.planId) : json(nullptr);
    return j;
}

void GatewayService::publish_task_updates(SessionEntry& e) {
    const auto& s = e.agent->session();
    const auto& hist = s.taskList.history();
    for (; e.transitionsSeen < hist.size(); ++e.transitionsSeen) {
        const auto& t = hist[e.transitionsSeen];
        events_.append(PushKind::TaskUpdate, {{"sessionId", s.sessionId},
                                              {"taskId", t.taskId},
                                              {"from", std::string(cocreation::to_string(t.from))},
                                              {"to", std::string(cocreation::to_string(t.to))}});
    }
}

void GatewayService::maybe_plan(SessionEntry& e) {
    if (e.planId || !e.agent->finalized()) return;
    OrchestrationPlan p;
    try {
        p = build_plan(graph_, e.agent->finalized()->intent);
    } catch (const PlanError& err) {
        throw ApiError(422, err.what());
    }
    {
        std::lock_guard lock(mu_);
        plans_[p.planId] = p;
    }
    e.planId = p.planId;
    events_.append(PushKind::PlanReady, {{"sessionId", e.agent->session().sessionId},
                                         {"planId", p.planId},
                                         {"intentId", p.intentId},
                                         {"digest", p.canonicalDigest},
                                         {"totalCost", intentforge::to_json(p.totalCost)}});
}

json GatewayService::create_session(const json& request) {
    require_object(request);
    auto backend = request.value("backend", config_.backend);
    std::unique_ptr<cocreation::Reasoner> reasoner;
    try {
        reasoner = cocreation::make_reasoner(backend);
    } catch (const std::invalid_argument& err) {
        throw ApiError(400, err.what());
    } catch (const cocreation::ReasonerError& err) {
        throw ApiError(503, err.what());
    }
    auto entry = std::make_unique<SessionEntry>();
    std::string id;
    {
        std::lock_guard lock(mu_);
        char buf[32];
        std::snprintf(buf, sizeof buf, "session-%04d", ++sessionCounter_);
        id = buf;
    }
    cocreation::AgentConfig cfg;
    cfg.inferConfirmationFromText = false;
    entry->agent = std::make_unique<cocreation::Agent>(graph_, std::move(reasoner), id, cfg, std::make_shared<cocreation::WallClock>(),
                                                       &inventory_);
    entry->agent->onTurn = [this, id](const cocreation::Turn& t) {
        events_.append(PushKind::AgentTurn, {{"sessionId", id}, {"turn", cocreation::to_json(t)}});
    };
    auto& ref = *entry;
    {
        std::lock_guard lock(mu_);
        sessions_[id] = std::move(entry);
    }
    std::lock_guard lock(ref.mu);
    return session_json(ref);
}

json GatewayService::session(const std::string& id) {
    auto& e = session_entry(id);
    std::lock_guard lock(e.mu);
    return session_json(e);
}

json GatewayService::post_message(const std::string& id, const json& request) {
    auto text = require_string(request, "text");
    auto& e = session_entry(id);
    std::lock_guard lock(e.mu);
    std::vector<cocreation::Turn> added;
    try {
        added = e.agent->send(text);
    } catch (const std::logic_error& err) {
        throw ApiError(409, err.what());
    }
    publish_task_updates(e);
    maybe_plan(e);
    json turns = json::array();
    for (const auto& t : added) turns.push_back(cocreation::to_json(t));
    auto view = session_json(e);
    view["added"] = turns;
    return view;
}

json GatewayService::confirm(const std::string& id, const json& request) {
    require_object(request);
    auto by = request.value("confirmedBy", std::string("operator"));
    auto& e = session_entry(id);
    std::lock_guard lock(e.mu);
    std::vector<cocreation::Turn> added;
    try {
        added = e.agent->confirm(by);
    } catch (const cocreation::FinalizeError& err) {
        throw ApiError(409, err.what());
    } catch (const std::logic_error& err) {
        throw ApiError(409, err.what());
    }
    publish_task_updates(e);
    maybe_plan(e);
    json turns = json::array();
    for (const auto& t : added) turns.push_back(cocreation::to_json(t));
    auto view = session_json(e);
    view["added"] = turns;
    return view;
}

json GatewayService::tasks(const std::string& id) {
    auto& e = session_entry(id);
    std::lock_guard lock(e.mu);
    return {{"sessionId", id}, {"tasks", cocreation::to_json(e.agent->session().taskList)}};
}

json GatewayService::plan(const std::string& planId) {
    std::lock_guard lock(mu_);
    auto it = plans_.find(planId);
    if (it == plans_.end()) throw ApiError(404, "unknown plan: " + planId);
    return intentforge::to_json(it->second);
}

json GatewayService::run_json(RunEntry& e) {
    json items = json::array();
    for (const auto& it : e.run->items()) items.push_back(intentforge::to_json(it));
    json tests = json::array();
    for (const auto& t : e.loop->pipeline().instances()) tests.push_back(intentforge::to_json(t));
    json reqs = json::array();
    for (const auto& r : e.loop->pipeline().requests()) reqs.push_back(intentforge::to_json(r));
    return {{"runId", e.run->id()},
            {"planId", e.planId},
            {"tick", e.run->now()},
            {"completed", e.run->completed()},
            {"degraded", e.run->degraded()},
            {"settled", e.settled},
            {"requireApproval", config_.runConfig.requireApproval},
            {"items", items},
            {"tests", tests},
            {"remediationRequests", reqs},
            {"report", intentforge::to_json(e.loop->report())}};
}

json GatewayService::create_run(const json& request) {
    auto planId = require_string(request, "planId");
    OrchestrationPlan p;
    {
        std::lock_guard lock(mu_);
        auto it = plans_.find(planId);
        if (it == plans_.end()) throw ApiError(404, "unknown plan: " + planId);
        p = it->second;
    }
    std::string runId;
    try {
        runId = engine_.execute_plan(p);
    } catch (const OrchestratorError& err) {
        throw ApiError(err.kind == OrchestratorError::Kind::DuplicateRun ? 409 : 422, err.what());
    }
    auto entry = std::make_unique<RunEntry>();
    entry->planId = planId;
    entry->run = &engine_.run(runId);
    entry->loop = std::make_unique<AssuranceLoop>(*entry->run, p, QaConfig{config_.runConfig.requireApproval, 2}, &bus_,
                                                  [this](const std::string& kind, const json& body) {
                                                      if (auto k = loop_kind(kind)) events_.append(*k, body);
                                                  });
    auto& ref = *entry;
    {
        std::lock_guard lock(mu_);
        runs_[runId] = std::move(entry);
    }
    std::lock_guard lock(ref.mu);
    if (config_.tickIntervalMs <= 0) {
        ref.loop->run_until_settled(config_.maxRunTicks);
        ref.settled = true;
        bus_.run_until_idle();
    } else {
        ref.worker = std::thread([this, &ref] {
            while (!stopping_) {
                {
                    std::lock_guard l(ref.mu);
                    ref.settled = !ref.loop->advance();
                    if (ref.run->now() >= config_.maxRunTicks) break;
                }
                bus_.run_until_idle();
                std::this_thread::sleep_for(std::chrono::milliseconds(config_.tickIntervalMs));
            }
        });
    }
    return run_json(ref);
}

json GatewayService::run_view(const std::string& runId) {
    auto& e = run_entry(runId);
    std::lock_guard lock(e.mu);
    return run_json(e);
}

json GatewayService::run_report(const std::string& runId) {
    auto& e = run_entry(runId);
    std::lock_guard lock(e.mu);
    return intentforge::to_json(e.loop->report());
}

json GatewayService::remediate(const std::string& runId, const json& request) {
    auto itemRef = require_string(request, "itemRef");
    auto action = remediation_action_from_string(request.value("action", std::string("retry")));
    if (!action) throw ApiError(400, "action must be retry or reprovision");
    auto& e = run_entry(runId);
    std::lock_guard lock(e.mu);
    RemediationRequest req;
    req.itemRef = itemRef;
    req.action = *action;
    req.tick = e.run->now();
    req.reason = "operator";
    RemediationAck ack;
    try {
        ack = e.loop->approve(req);
    } catch (const OrchestratorError& err) {
        throw ApiError(err.kind == OrchestratorError::Kind::UnknownItem ? 404 : 409, err.what());
    }
    if (config_.tickIntervalMs <= 0 && ack.accepted) {
        e.loop->run_until_settled(config_.maxRunTicks);
        bus_.run_until_idle();
    }
    auto view = run_json(e);
    view["ack"] = intentforge::to_json(ack);
    return view;
}

json GatewayService::tick_run(const std::string& runId, int ticks) {
    auto& e = run_entry(runId);
    std::lock_guard lock(e.mu);
    for (int i = 0; i < ticks && e.loop->advance(); ++i) {
    }
    bus_.run_until_idle();
    return run_json(e);
}

json GatewayService::events_since(std::int64_t cursor, std::size_t limit) const {
    json arr = json::array();
    std::int64_t last = cursor;
    for (const auto& ev : events_.since(cursor, limit)) {
        arr.push_back(to_json(ev));
        last = ev.sequence;
    }
    return {{"events", arr}, {"cursor", last}};
}

json GatewayService::bus_stats() const { return bus::to_json(bus_.stats()); }

int port_from_env() {
    if (const char* p = std::getenv("INTENTFORGE_PORT")) {
        try {
            int v = std::stoi(p);
            if (v > 0 && v < 65536) return v;
        } catch (const std::exception&) {
        }
        throw std::invalid_argument(std::string("INTENTFORGE_PORT is not a port: ") + p);
    }
    return 8080;
}

}  // namespace intentforge::gateway
