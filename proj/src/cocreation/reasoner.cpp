// SPDX-License-Identifier: Apache-2.0
#include "intentforge/cocreation/reasoner.hpp"

#include <cstdlib>

namespace intentforge::cocreation {

using nlohmann::json;

std::string_view to_string(ReplyPurpose p) {
    switch (p) {
    case ReplyPurpose::Info: return "info";
    case ReplyPurpose::Proposal: return "proposal";
    case ReplyPurpose::Quote: return "quote";
    case ReplyPurpose::Question: return "question";
    }
    return "info";
}

json to_json(const Effect& e) {
    if (const auto* r = std::get_if<TextReply>(&e)) {
        return {{"type", "text"}, {"purpose", std::string(to_string(r->purpose))}, {"endsTurn", r->endsTurn}};
    }
    if (const auto* c = std::get_if<ToolCall>(&e)) return {{"type", "tool"}, {"name", c->name}, {"args", c->args}};
    return {{"type", "finalize"}};
}

const std::string& skill_prompt() {
    static const std::string s =
        "You are a network service co-creation assistant for a Network-as-a-Service catalog.\n"
        "Rules:\n"
        "- Discover products only through the catalog tools. You may recommend only products explicitly listed in the catalog.\n"
        "- Do not interpret, map, or translate user use-cases into products without checking the catalog.\n"
        "- Never mention services. Never assume capabilities.\n"
        "- Prefer to suggest a valid combination of products each time. If no valid combination exists, suggest a single "
        "product or ask how to proceed.\n"
        "- Always mention the total cost to the user, written as \"Total cost: <amount> EUR\".\n"
        "- Name products as \"<offering name> / <tier>\" and list each with its price.\n"
        "- Use select_bundle for the chosen products, quote_price for costs, preview_order for the order payload.\n"
        "- The order payload is {intentId, orderItems:[{offeringId, characteristics, validFor:{startDate, endDate}}], "
        "totalCost:{amount, currency}} where endDate = startDate + days - 1.\n"
        "- Do not place any order without explicit user confirmation. Only use ordering tools to place an order.\n";
    return s;
}

namespace {

/// Per-user-turn scripts: the k-th list runs after the k-th user message.
class TurnScriptedReasoner : public Reasoner {
public:
    TurnScriptedReasoner(std::string id, std::string group, std::vector<std::vector<Effect>> script)
        : id_(std::move(id)), group_(std::move(group)), script_(std::move(script)) {}

    std::string id() const override { return id_; }
    std::string group() const override { return group_; }
    ReasonerCapabilities capabilities() const override { return {toolCalling_, 4096}; }

    Effect next(const ReasonerContext& ctx) override {
        std::size_t users = 0;
        for (const auto& t : ctx.session.transcript) users += t.role == Role::User ? 1 : 0;
        if (users != turn_) {
            turn_ = users;
            pos_ = 0;
        }
        if (turn_ >= 1 && turn_ - 1 < script_.size() && pos_ < script_[turn_ - 1].size()) return script_[turn_ - 1][pos_++];
        return TextReply{"Could you tell me more about what you need?", {}, ReplyPurpose::Question, true};
    }

    bool toolCalling_ = true;

private:
    std::string id_;
    std::string group_;
    std::vector<std::vector<Effect>> script_;
    std::size_t turn_ = 0;
    std::size_t pos_ = 0;
};

class ScriptedReasoner : public Reasoner {
public:
    ScriptedReasoner(std::string id, std::vector<Effect> effects) : id_(std::move(id)), effects_(std::move(effects)) {}
    std::string id() const override { return id_; }
    Effect next(const ReasonerContext&) override {
        if (pos_ < effects_.size()) return effects_[pos_++];
        return TextReply{"What would you like to do next?", {}, ReplyPurpose::Question, true};
    }

private:
    std::string id_;
    std::vector<Effect> effects_;
    std::size_t pos_ = 0;
};

}  // namespace

std::unique_ptr<Reasoner> make_hallucinator_reasoner() {
    TextReply pitch{
        "For live sports in Patras I recommend:\n"
        "- Quantum Backhaul Booster: 400.00 EUR per day\n"
        "- StreamMax 5G Turbo: 250.00 EUR per day\n"
        "- Arena Vision Pack: 150.00 EUR per day",
        {"Quantum Backhaul Booster", "StreamMax 5G Turbo", "Arena Vision Pack"},
        ReplyPurpose::Proposal,
        true};
    TextReply cheaper{
        "A lighter option:\n- StreamMax 5G Turbo: 250.00 EUR per day\n- Arena Vision Pack: 150.00 EUR per day",
        {"StreamMax 5G Turbo", "Arena Vision Pack"},
        ReplyPurpose::Proposal,
        true};
    auto r = std::make_unique<TurnScriptedReasoner>("hallucinator", "non-reasoning",
                                                    std::vector<std::vector<Effect>>{{pitch}, {cheaper}, {pitch}});
    r->toolCalling_ = false;
    return r;
}

std::unique_ptr<Reasoner> make_partial_composer_reasoner() {
    TextReply proposal{
        "Here is a bundle for your event:\n"
        "- On-demand Network Slice / Gold: 700.00 EUR per day\n"
        "- Edge Media Cache Server / Large: 200.00 EUR per day\n"
        "- Service Setup and VPN / Standard: 100.00 EUR once\n"
        "- Live Stats Analytics Add-on: 50.00 EUR per day\n"
        "Total: 6400.00 EUR",
        {"On-demand Network Slice / Gold", "Edge Media Cache Server / Large", "Service Setup and VPN / Standard",
         "Live Stats Analytics Add-on"},
        ReplyPurpose::Proposal,
        true};
    std::vector<std::vector<Effect>> script{
        {ToolCall{"list_offerings", json::object()}, proposal},
        {proposal},
        {proposal},
        {TextReply{"The dates are noted.", {}, ReplyPurpose::Info, true}},
        {ToolCall{"submit_order", json::object()}},
    };
    return std::make_unique<TurnScriptedReasoner>("partial-composer", "non-reasoning", std::move(script));
}

std::unique_ptr<Reasoner> make_scripted_reasoner(std::string id, std::vector<Effect> effects) {
    return std::make_unique<ScriptedReasoner>(std::move(id), std::move(effects));
}

HttpReasonerConfig HttpReasonerConfig::from_env() {
    HttpReasonerConfig c;
    if (const char* u = std::getenv("INTENTFORGE_LLM_URL")) c.url = u;
    if (const char* m = std::getenv("INTENTFORGE_LLM_MODEL")) c.model = m;
    if (const char* t = std::getenv("INTENTFORGE_LLM_TIMEOUT_MS")) c.timeout = std::chrono::milliseconds(std::atoll(t));
    return c;
}

std::vector<std::string> builtin_backends() {
    return {"reference", "wrong-duration", "partial-composer", "hallucinator", "http"};
}

std::unique_ptr<Reasoner> make_reasoner(const std::string& backendId) {
    if (backendId == "reference") return make_reference_reasoner();
    if (backendId == "wrong-duration") return make_wrong_duration_reasoner();
    if (backendId == "partial-composer") return make_partial_composer_reasoner();
    if (backendId == "hallucinator") return make_hallucinator_reasoner();
    if (backendId == "http") {
        auto cfg = HttpReasonerConfig::from_env();
        if (cfg.url.empty()) throw ReasonerError("INTENTFORGE_LLM_URL is not set");
        return make_http_reasoner(cfg);
    }
    throw std::invalid_argument("unknown backend '" + backendId + "'");
}

}  // namespace intentforge::cocreation
