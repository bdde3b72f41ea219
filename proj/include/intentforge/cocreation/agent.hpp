// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "intentforge/catalog.hpp"
#include "intentforge/cocreation/guardrails.hpp"
#include "intentforge/cocreation/reasoner.hpp"
#include "intentforge/cocreation/session.hpp"
#include "intentforge/inventory.hpp"
#include "intentforge/traversal.hpp"

namespace intentforge::cocreation {

class ToolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using ToolHandler = std::function<nlohmann::json(const nlohmann::json& args)>;

/// The only path by which a reasoner reads the catalog or places an order.
class ToolRegistry {
public:
    void add(ToolSpec spec, ToolHandler handler);
    const std::vector<ToolSpec>& specs() const { return specs_; }
    bool has(const std::string& name) const { return handlers_.count(name) > 0; }
    /// Throws ToolError for unknown tools and handler failures.
    nlohmann::json invoke(const std::string& name, const nlohmann::json& args) const;

private:
    std::vector<ToolSpec> specs_;
    std::map<std::string, ToolHandler> handlers_;
};

struct FinalizedIntent {
    ConfirmedIntent intent;
    std::string inventoryRecordId;
    nlohmann::json orderPayload;
};

class OrderSink {
public:
    virtual ~OrderSink() = default;
    virtual void submit(const FinalizedIntent& order) = 0;
};

class FinalizeError : public std::runtime_error {
public:
    enum class Kind { TaskIncomplete, Unconfirmed, InvalidDraft };
    FinalizeError(Kind k, const std::string& what) : std::runtime_error(what), kind(k) {}
    Kind kind;
};

struct AgentConfig {
    /// Effects allowed per user message before the current task is blocked.
    int maxStepsPerTurn = 16;
    /// The gateway turns this off and confirms through an explicit call.
    bool inferConfirmationFromText = true;
};

enum class StepOutcome { Continue, Yield, Done };

/// Drives one co-creation session: tasks, reasoner effects, guardrails, tools.
///
/// Not thread-safe; callers serialize access per session.
class Agent {
public:
    Agent(const CatalogGraph& graph, std::unique_ptr<Reasoner> reasoner, std::string sessionId, AgentConfig config = {},
          std::shared_ptr<Clock> clock = std::make_shared<LogicalClock>(), InventoryStore* inventory = nullptr,
          OrderSink* sink = nullptr);

    /// Appends a user turn and runs steps until the agent hands control back.
    /// Returns the turns added.
    std::vector<Turn> send(const std::string& userText);

    /// Explicit confirmation. Throws FinalizeError(Unconfirmed) when there is
    /// no quote and payload to confirm yet.
    std::vector<Turn> confirm(const std::string& confirmedBy = "operator");

    /// One reasoner effect.
    StepOutcome step();

    FinalizedIntent finalize_intent();
    const std::optional<FinalizedIntent>& finalized() const { return finalized_; }

    const Session& session() const { return session_; }
    const Reasoner& reasoner() const { return *reasoner_; }
    const ToolRegistry& tools() const { return tools_; }

    /// Called with every appended turn and every task transition.
    std::function<void(const Turn&)> onTurn;
    std::function<void(const Task&)> onTask;

private:
    Turn& append(Role role, std::string content, nlohmann::json meta, std::optional<int> tokens = std::nullopt);
    void transition(const Task& t, TaskState to, std::vector<EvidencePointer> evidence = {});
    std::vector<Turn> run_until_yield(std::size_t from);
    void absorb_user_turn(int index);
    void sync_draft_from_goal();
    std::optional<std::vector<EvidencePointer>> criteria_met(const Task& t) const;
    void register_tools();
    void clear_quote();

    nlohmann::json tool_list_offerings(const nlohmann::json& args);
    nlohmann::json tool_get_offering(const nlohmann::json& args);
    nlohmann::json tool_propose_bundles(const nlohmann::json& args);
    nlohmann::json tool_select_bundle(const nlohmann::json& args);
    nlohmann::json tool_quote_price(const nlohmann::json& args);
    nlohmann::json tool_preview_order(const nlohmann::json& args);
    nlohmann::json tool_submit_order(const nlohmann::json& args);

    const CatalogGraph& graph_;
    std::unique_ptr<Reasoner> reasoner_;
    AgentConfig config_;
    std::shared_ptr<Clock> clock_;
    InventoryStore* inventory_;
    OrderSink* sink_;
    Session session_;
    ToolRegistry tools_;
    std::optional<FinalizedIntent> finalized_;
    bool submitted_ = false;
    std::string confirmedBy_ = "user";

    std::optional<nlohmann::json> lastToolResult_;
    std::optional<std::string> lastToolName_;
    bool lastToolOk_ = true;
    std::optional<int> selectionTurn_;
    std::optional<int> presentedTurn_;
    std::optional<int> quoteToolTurn_;
};

/// Order payload for the draft: validFor spans start .. start + days - 1.
nlohmann::json build_order_payload(const std::string& intentId, const std::vector<OfferingSelection>& selections,
                                   const ServicePeriod& period, Money total);

}  // namespace intentforge::cocreation
