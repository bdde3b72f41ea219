// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace intentforge::bus {

enum class MessageKind { Task, Reply, Event };
std::string_view to_string(MessageKind k);

struct Envelope {
    std::string messageId;
    std::string correlationId;
    std::string queue;
    std::optional<std::string> replyTo;
    MessageKind kind = MessageKind::Task;
    /// Canonical JSON bytes.
    std::string payload;
    int attempt = 1;
    std::int64_t enqueuedAt = 0;
    std::string publisher;

    nlohmann::json body() const { return nlohmann::json::parse(payload); }
};

nlohmann::json to_json(const Envelope& e);

struct BusConfig {
    std::uint64_t seed = 1;
    /// Messages on a queue nobody listens to are dropped after this many ticks.
    std::int64_t retentionTicks = 10000;
    /// Chance that a delivered message is delivered again (at-least-once).
    double redeliveryProbability = 0.0;
    int maxDeliveries = 3;
};

/// A reply payload, or nothing for fire-and-forget handlers. Throwing turns
/// into an error reply for requests.
using Handler = std::function<std::optional<nlohmann::json>(const Envelope&)>;

class BusError : public std::runtime_error {
public:
    enum class Kind { ShutDown, Timeout, HandlerFailure, Veto, InvalidArgument, DuplicateAgent };
    BusError(Kind k, const std::string& what, std::string correlationId = {}, std::int64_t tick = 0)
        : std::runtime_error(what), kind(k), correlationId(std::move(correlationId)), tick(tick) {}
    Kind kind;
    std::string correlationId;
    std::int64_t tick;
};

struct BusStats {
    std::uint64_t published = 0;
    std::uint64_t delivered = 0;
    std::uint64_t redelivered = 0;
    std::uint64_t expired = 0;
    std::uint64_t duplicateRepliesDropped = 0;
    std::uint64_t timeouts = 0;
    std::map<std::string, std::size_t> depth;
    std::map<std::string, std::size_t> subscribers;
};

nlohmann::json to_json(const BusStats& s);

struct ProvenanceEntry {
    int stage = 0;
    std::string agentId;
    std::int64_t tick = 0;
};

struct EnrichmentChain {
    std::string chainId;
    std::vector<std::string> stages;
};

class ChainError : public BusError {
public:
    ChainError(Kind k, const std::string& what, int stage, std::string agentId, std::vector<ProvenanceEntry> partial)
        : BusError(k, what), stage(stage), agentId(std::move(agentId)), provenance(std::move(partial)) {}
    /// 1-based index of the failing stage.
    int stage;
    std::string agentId;
    std::vector<ProvenanceEntry> provenance;
};

std::string agent_queue(std::string_view agentId);

/// In-process message bus with a seeded, logical-time scheduler.
///
/// Publishing is thread-safe. Deliveries happen on the thread that calls
/// step()/run_until_idle()/request(); each handler runs serially.
class MessageBus {
public:
    explicit MessageBus(BusConfig config = {});

    std::string subscribe(const std::string& queue, Handler handler);
    void unsubscribe(const std::string& subscriptionId);
    /// Subscribes on agents/<agentId>; one queue per agent.
    std::string register_agent(const std::string& agentId, Handler handler);

    std::string publish(const std::string& queue, const nlohmann::json& payload,
                        std::optional<std::string> correlationId = std::nullopt, const std::string& publisher = {},
                        std::optional<std::string> replyTo = std::nullopt, MessageKind kind = MessageKind::Task);

    /// Waits (in logical ticks) for the first reply with the request's correlation id.
    nlohmann::json request(const std::string& queue, const nlohmann::json& payload, std::int64_t timeoutTicks,
                           const std::string& publisher = {});

    /// Runs the chain stage by stage; each stage replies with the new draft or {"veto": reason}.
    nlohmann::json run_chain(const EnrichmentChain& chain, const nlohmann::json& initialDraft, std::int64_t stageTimeoutTicks = 50);

    /// Delivers one message if any is ready; advances the clock by one tick either way.
    bool step();
    /// Steps until nothing is deliverable. Returns deliveries made.
    std::size_t run_until_idle(std::size_t maxSteps = 1000000);
    void advance(std::int64_t ticks);

    void shutdown();
    bool is_shut_down() const;
    std::int64_t now() const;
    BusStats stats() const;

private:
    struct Subscription {
        std::string id;
        std::string queue;
        Handler handler;
        std::deque<Envelope> inbox;
    };

    void expire_locked();
    std::string next_id_locked(const char* prefix);

    BusConfig config_;
    mutable std::recursive_mutex mu_;
    std::mt19937_64 rng_;
    std::int64_t now_ = 0;
    std::uint64_t counter_ = 0;
    bool shutDown_ = false;
    std::map<std::string, Subscription> subs_;
    std::map<std::string, std::deque<Envelope>> retained_;
    std::set<std::string> agents_;
    BusStats stats_;
};

}  // namespace intentforge::bus
