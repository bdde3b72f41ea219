// SPDX-License-Identifier: Apache-2.0
#include "intentforge/bus.hpp"

#include <algorithm>
#include <cstdio>

#include "intentforge/canonical.hpp"

namespace intentforge::bus {

using nlohmann::json;

std::string_view to_string(MessageKind k) {
    switch (k) {
    case MessageKind::Task: return "task";
    case MessageKind::Reply: return "reply";
    case MessageKind::Event: return "event";
    }
    return "task";
}

json to_json(const Envelope& e) {
    return {{"messageId", e.messageId},
            {"correlationId", e.correlationId},
            {"queue", e.queue},
            {"replyTo", e.replyTo ? json(*e.replyTo) : json(nullptr)},
            {"kind", std::string(to_string(e.kind))},
            {"payload", json::parse(e.payload)},
            {"attempt", e.attempt},
            {"enqueuedAt", e.enqueuedAt},
            {"publisher", e.publisher}};
}

json to_json(const BusStats& s) {
    return {{"published", s.published},
            {"delivered", s.delivered},
            {"redelivered", s.redelivered},
            {"expired", s.expired},
            {"duplicateRepliesDropped", s.duplicateRepliesDropped},
            {"timeouts", s.timeouts},
            {"depth", s.depth},
            {"subscribers", s.subscribers}};
}

std::string agent_queue(std::string_view agentId) { return "agents/" + std::string(agentId); }

MessageBus::MessageBus(BusConfig config) : config_(config), rng_(config.seed) {}

std::string MessageBus::next_id_locked(const char* prefix) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s-%06llu", prefix, static_cast<unsigned long long>(++counter_));
    return buf;
}

std::string MessageBus::subscribe(const std::string& queue, Handler handler) {
    if (queue.empty()) throw BusError(BusError::Kind::InvalidArgument, "queue name is empty");
    std::lock_guard lock(mu_);
    if (shutDown_) throw BusError(BusError::Kind::ShutDown, "bus is shut down");
    expire_locked();
    Subscription s{next_id_locked("sub"), queue, std::move(handler), {}};
    auto it = retained_.find(queue);
    if (it != retained_.end()) {
        s.inbox = std::move(it->second);
        retained_.erase(it);
    }
    auto id = s.id;
    subs_.emplace(id, std::move(s));
    return id;
}

void MessageBus::unsubscribe(const std::string& id) {
    std::lock_guard lock(mu_);
    subs_.erase(id);
}

std::string MessageBus::register_agent(const std::string& agentId, Handler handler) {
    {
        std::lock_guard lock(mu_);
        if (!agents_.insert(agentId).second) throw BusError(BusError::Kind::DuplicateAgent, "agent " + agentId + " is already registered");
    }
    subscribe(agent_queue(agentId), std::move(handler));
    return agent_queue(agentId);
}

std::string MessageBus::publish(const std::string& queue, const json& payload, std::optional<std::string> correlationId,
                                const std::string& publisher, std::optional<std::string> replyTo, MessageKind kind) {
    if (queue.empty()) throw BusError(BusError::Kind::InvalidArgument, "queue name is empty");
    std::lock_guard lock(mu_);
    if (shutDown_) throw BusError(BusError::Kind::ShutDown, "bus is shut down");
    Envelope e;
    e.messageId = next_id_locked("msg");
    e.correlationId = correlationId ? *correlationId : e.messageId;
    e.queue = queue;
    e.replyTo = std::move(replyTo);
    e.kind = kind;
    e.payload = canonical_json(payload);
    e.enqueuedAt = now_;
    e.publisher = publisher;
    ++stats_.published;
    bool any = false;
    for (auto& [id, s] : subs_) {
        if (s.queue == queue) {
            s.inbox.push_back(e);
            any = true;
        }
    }
    if (!any) retained_[queue].push_back(e);
    return e.messageId;
}

void MessageBus::expire_locked() {
    for (auto it = retained_.begin(); it != retained_.end();) {
        auto& q = it->second;
        while (!q.empty() && now_ - q.front().enqueuedAt >= config_.retentionTicks) {
            q.pop_front();
            ++stats_.expired;
        }
        it = q.empty() ? retained_.erase(it) : std::next(it);
    }
}

bool MessageBus::step() {
    Envelope e;
    Handler handler;
    std::string subId;
    {
        std::lock_guard lock(mu_);
        ++now_;
        expire_locked();
        std::vector<Subscription*> ready;
        for (auto& [id, s] : subs_) {
            if (!s.inbox.empty()) ready.push_back(&s);
        }
        if (ready.empty()) return false;
        auto* s = ready[std::uniform_int_distribution<std::size_t>(0, ready.size() - 1)(rng_)];
        e = s->inbox.front();
        s->inbox.pop_front();
        handler = s->handler;
        subId = s->id;
        ++stats_.delivered;
        if (e.attempt < config_.maxDeliveries && config_.redeliveryProbability > 0 &&
            std::uniform_real_distribution<double>(0, 1)(rng_) < config_.redeliveryProbability) {
            Envelope again = e;
            ++again.attempt;
            s->inbox.push_back(std::move(again));
            ++stats_.redelivered;
        }
    }
    std::optional<json> reply;
    bool failed = false;
    std::string error;
    try {
        reply = handler(e);
    } catch (const std::exception& ex) {
        failed = true;
        error = ex.what();
    }
    if (e.replyTo && (reply || failed)) {
        json body = failed ? json{{"error", error}} : json{{"ok", *reply}};
        std::lock_guard lock(mu_);
        if (!shutDown_) publish(*e.replyTo, body, e.correlationId, subId, std::nullopt, MessageKind::Reply);
    }
    return true;
}

std::size_t MessageBus::run_until_idle(std::size_t maxSteps) {
    std::size_t n = 0;
    while (n < maxSteps && step()) ++n;
    return n;
}

void MessageBus::advance(std::int64_t ticks) {
    std::lock_guard lock(mu_);
    now_ += ticks;
    expire_locked();
}

json MessageBus::request(const std::string& queue, const json& payload, std::int64_t timeoutTicks, const std::string& publisher) {
    if (timeoutTicks <= 0) throw BusError(BusError::Kind::InvalidArgument, "timeout must be positive");
    std::string corr;
    std::string replyQueue;
    std::int64_t deadline = 0;
    std::optional<json> result;
    std::string subId;
    {
        std::lock_guard lock(mu_);
        corr = next_id_locked("corr");
        replyQueue = "replies/" + corr;
        deadline = now_ + timeoutTicks;
    }
    subId = subscribe(replyQueue, [&](const Envelope& e) -> std::optional<json> {
        if (e.correlationId != corr) return std::nullopt;
        if (result) {
            std::lock_guard lock(mu_);
            ++stats_.duplicateRepliesDropped;
            return std::nullopt;
        }
        result = e.body();
        return std::nullopt;
    });
    publish(queue, payload, corr, publisher, replyQueue);
    while (!result) {
        if (now() >= deadline) break;
        step();
    }
    // drain duplicates already queued for this reply queue
    {
        std::lock_guard lock(mu_);
        auto it = subs_.find(subId);
        if (it != subs_.end()) {
            stats_.duplicateRepliesDropped += it->second.inbox.size();
            subs_.erase(it);
        }
    }
    if (!result) {
        std::lock_guard lock(mu_);
        ++stats_.timeouts;
        throw BusError(BusError::Kind::Timeout, "request " + corr + " to " + queue + " timed out", corr, now_);
    }
    if (result->contains("error")) {
        throw BusError(BusError::Kind::HandlerFailure, (*result)["error"].get<std::string>(), corr, now());
    }
    return (*result)["ok"];
}

json MessageBus::run_chain(const EnrichmentChain& chain, const json& initialDraft, std::int64_t stageTimeoutTicks) {
    json draft = initialDraft;
    std::vector<ProvenanceEntry> prov;
    for (std::size_t i = 0; i < chain.stages.size(); ++i) {
        const auto& agent = chain.stages[i];
        int stage = static_cast<int>(i) + 1;
        json reply;
        try {
            reply = request(agent_queue(agent), {{"chainId", chain.chainId}, {"stage", stage}, {"draft", draft}}, stageTimeoutTicks,
                            chain.chainId);
        } catch (const BusError& e) {
            throw ChainError(e.kind, "chain " + chain.chainId + " failed at stage " + std::to_string(stage) + " (" + agent + "): " + e.what(),
                             stage, agent, prov);
        }
        if (reply.is_object() && reply.contains("veto")) {
            throw ChainError(BusError::Kind::Veto,
                             "chain " + chain.chainId + " vetoed at stage " + std::to_string(stage) + " (" + agent + "): " +
                                 reply["veto"].get<std::string>(),
                             stage, agent, prov);
        }
        draft = reply;
        prov.push_back({stage, agent, now()});
        json entries = json::array();
        for (const auto& p : prov) entries.push_back({{"stage", p.stage}, {"agentId", p.agentId}, {"tick", p.tick}});
        if (draft.is_object()) draft["provenance"] = entries;
    }
    return draft;
}

void MessageBus::shutdown() {
    run_until_idle();
    std::lock_guard lock(mu_);
    shutDown_ = true;
}

bool MessageBus::is_shut_down() const {
    std::lock_guard lock(mu_);
    return shutDown_;
}

std::int64_t MessageBus::now() const {
    std::lock_guard lock(mu_);
    return now_;
}

BusStats MessageBus::stats() const {
    std::lock_guard lock(mu_);
    BusStats s = stats_;
    for (const auto& [id, sub] : subs_) {
        s.depth[sub.queue] += sub.inbox.size();
        ++s.subscribers[sub.queue];
    }
    for (const auto& [q, d] : retained_) s.depth[q] += d.size();
    return s;
}

}  // namespace intentforge::bus
