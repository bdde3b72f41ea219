// SPDX-License-Identifier: Apache-2.0
#include "intentforge/cocreation/agent.hpp"

#include <algorithm>
#include <set>

#include "intentforge/bundles.hpp"
#include "intentforge/canonical.hpp"

namespace intentforge::cocreation {

using nlohmann::json;

void ToolRegistry::add(ToolSpec spec, ToolHandler handler) {
    handlers_[spec.name] = std::move(handler);
    specs_.push_back(std::move(spec));
}

json ToolRegistry::invoke(const std::string& name, const json& args) const {
    auto it = handlers_.find(name);
    if (it == handlers_.end()) throw ToolError("unknown tool " + name);
    try {
        return it->second(args);
    } catch (const ToolError&) {
        throw;
    } catch (const std::exception& e) {
        throw ToolError(name + ": " + e.what());
    }
}

json build_order_payload(const std::string& intentId, const std::vector<OfferingSelection>& selections,
                         const ServicePeriod& period, Money total) {
    json items = json::array();
    for (const auto& s : selections) {
        json cv = json::object();
        for (const auto& [k, v] : s.characteristicValues) cv[k] = to_json_value(v);
        items.push_back({{"offeringId", s.offeringId},
                         {"characteristics", cv},
                         {"validFor",
                          {{"startDate", format_iso_date(period.startDate)},
                           {"endDate", format_iso_date(add_days(period.startDate, period.days - 1))}}}});
    }
    return {{"intentId", intentId}, {"orderItems", items}, {"totalCost", to_json(total)}};
}

namespace {

std::vector<std::string> selection_ids(const std::vector<OfferingSelection>& sels) {
    std::vector<std::string> ids;
    for (const auto& s : sels) ids.push_back(s.offeringId);
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::vector<std::string> string_array(const json& args, const char* key) {
    if (!args.contains(key) || !args[key].is_array()) throw ToolError(std::string("missing array argument '") + key + "'");
    std::vector<std::string> out;
    for (const auto& v : args[key]) {
        if (!v.is_string()) throw ToolError(std::string("argument '") + key + "' must hold strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

std::optional<Money> money_arg(const json& args, const char* key) {
    if (!args.contains(key) || args[key].is_null()) return std::nullopt;
    const auto& v = args[key];
    if (v.is_object()) return money_from_json(v);
    if (v.is_number_integer()) return Money::euros(v.get<std::int64_t>());
    if (v.is_number()) return Money{static_cast<std::int64_t>(v.get<double>() * 100 + 0.5)};
    if (v.is_string()) {
        if (auto m = parse_money_amount(v.get<std::string>())) return m;
    }
    throw ToolError(std::string("argument '") + key + "' is not an amount");
}

Decimal euros_decimal(Money m) { return Decimal::from_scaled(m.cents * 100); }

}  // namespace

Agent::Agent(const CatalogGraph& graph, std::unique_ptr<Reasoner> reasoner, std::string sessionId, AgentConfig config,
             std::shared_ptr<Clock> clock, InventoryStore* inventory, OrderSink* sink)
    : graph_(graph),
      reasoner_(std::move(reasoner)),
      config_(config),
      clock_(std::move(clock)),
      inventory_(inventory),
      sink_(sink) {
    session_.sessionId = std::move(sessionId);
    register_tools();
}

Turn& Agent::append(Role role, std::string content, json meta, std::optional<int> tokens) {
    Turn t;
    t.index = static_cast<int>(session_.transcript.size());
    t.role = role;
    t.tokenCount = tokens ? *tokens : estimate_tokens(content);
    t.content = std::move(content);
    t.timestamp = clock_->now_ms();
    t.meta = std::move(meta);
    session_.transcript.push_back(std::move(t));
    if (onTurn) onTurn(session_.transcript.back());
    return session_.transcript.back();
}

void Agent::transition(const Task& t, TaskState to, std::vector<EvidencePointer> evidence) {
    std::string id = t.taskId;
    session_.taskList.transition(id, to, std::move(evidence));
    if (onTask) {
        for (const auto& task : session_.taskList.tasks()) {
            if (task.taskId == id) onTask(task);
        }
    }
}

void Agent::clear_quote() {
    auto& d = session_.draft;
    d.quotedCost.reset();
    d.quoteTurn.reset();
    quoteToolTurn_.reset();
    d.payload.reset();
    d.payloadTurn.reset();
    d.confirmed = false;
    d.confirmationTurn.reset();
}

void Agent::sync_draft_from_goal() {
    if (!session_.goal) return;
    const auto& g = *session_.goal;
    auto& d = session_.draft;
    if (auto b = g.latest(ConstraintName::Budget)) d.constraints.budget = Money{b->as_number().scaled() / 100};
    if (auto u = g.latest(ConstraintName::MinConcurrentUsers)) d.constraints.minConcurrentUsers = u->as_number().to_int();
    if (auto l = g.latest(ConstraintName::LatencyCeilingMs)) d.constraints.latencyCeilingMs = l->as_number();
    if (auto du = g.latest(ConstraintName::Duration)) {
        int days = static_cast<int>(du->as_number().to_int());
        if (d.days != days) {
            d.days = days;
            clear_quote();
        }
    }
    if (auto sd = g.latest(ConstraintName::StartDate); sd && d.days) {
        ServicePeriod p{*parse_iso_date(sd->as_string()), *d.days};
        if (d.period != p) {
            d.period = p;
            d.payload.reset();
            d.payloadTurn.reset();
            d.confirmed = false;
            d.confirmationTurn.reset();
        }
    }
}

void Agent::absorb_user_turn(int index) {
    interpret_intent(session_, index);
    if (!session_.goal) return;
    decompose_goal(session_);
    sync_draft_from_goal();
    session_.taskList.mark_reopenable();
    auto& d = session_.draft;
    if (config_.inferConfirmationFromText && extract(session_.transcript[static_cast<std::size_t>(index)].content).affirmation &&
        !d.confirmed && d.quoteTurn && d.payloadTurn && index > *d.quoteTurn && index > *d.payloadTurn) {
        d.confirmed = true;
        d.confirmationTurn = index;
    }
}

std::vector<Turn> Agent::send(const std::string& userText) {
    if (session_.status == SessionStatus::Finalized || session_.status == SessionStatus::Aborted) {
        throw std::logic_error("session " + session_.sessionId + " is " + std::string(to_string(session_.status)));
    }
    auto from = session_.transcript.size();
    auto& t = append(Role::User, userText, json::object());
    session_.status = SessionStatus::Active;
    absorb_user_turn(t.index);
    if (!session_.goal) {
        append(Role::Agent, "Please describe the service you would like to set up.",
               {{"effect", {{"type", "text"}}}, {"purpose", "question"}, {"harness", true}});
        session_.status = SessionStatus::AwaitingUser;
        return {session_.transcript.begin() + static_cast<std::ptrdiff_t>(from), session_.transcript.end()};
    }
    return run_until_yield(from);
}

std::vector<Turn> Agent::confirm(const std::string& confirmedBy) {
    if (session_.status == SessionStatus::Finalized || session_.status == SessionStatus::Aborted) {
        throw std::logic_error("session " + session_.sessionId + " is " + std::string(to_string(session_.status)));
    }
    auto& d = session_.draft;
    if (!d.quoteTurn || !d.payloadTurn) {
        throw FinalizeError(FinalizeError::Kind::Unconfirmed, "nothing to confirm yet: no quoted order payload");
    }
    auto from = session_.transcript.size();
    auto& t = append(Role::User, "Confirmed.", {{"confirmation", true}, {"confirmedBy", confirmedBy}});
    d.confirmed = true;
    d.confirmationTurn = t.index;
    confirmedBy_ = confirmedBy;
    session_.status = SessionStatus::Active;
    session_.taskList.mark_reopenable();
    return run_until_yield(from);
}

std::vector<Turn> Agent::run_until_yield(std::size_t from) {
    int steps = 0;
    while (!finalized_ || session_.status != SessionStatus::Finalized) {
        if (steps >= config_.maxStepsPerTurn) {
            if (const auto* cur = session_.taskList.in_progress()) {
                std::string what = cur->description;
                transition(*cur, TaskState::Blocked);
                append(Role::Agent, "I could not finish this step: " + what + ". How would you like to proceed?",
                       {{"effect", {{"type", "text"}}}, {"purpose", "question"}, {"harness", true}});
            }
            session_.status = SessionStatus::AwaitingUser;
            break;
        }
        ++steps;
        if (step() != StepOutcome::Continue) break;
    }
    return {session_.transcript.begin() + static_cast<std::ptrdiff_t>(from), session_.transcript.end()};
}

std::optional<std::vector<EvidencePointer>> Agent::criteria_met(const Task& t) const {
    const auto& d = session_.draft;
    std::vector<EvidencePointer> ev;
    switch (t.kind) {
    case TaskKind::Discovery: {
        for (const auto& id : catalog_grounded_ids(session_)) ev.push_back({EvidenceKind::CatalogEntity, id, std::nullopt});
        if (ev.empty()) return std::nullopt;
        return ev;
    }
    case TaskKind::BundleProposal:
        if (d.offeringSelections.empty() || !selectionTurn_ || !presentedTurn_ || *presentedTurn_ < *selectionTurn_) {
            return std::nullopt;
        }
        for (const auto& s : d.offeringSelections) ev.push_back({EvidenceKind::CatalogEntity, s.offeringId, std::nullopt});
        ev.push_back({EvidenceKind::TranscriptTurn, "turn-" + std::to_string(*presentedTurn_), std::nullopt});
        return ev;
    case TaskKind::CostQuotation:
        if (!d.days || !d.quotedCost || !d.quoteTurn || !quoteToolTurn_) return std::nullopt;
        ev.push_back({EvidenceKind::CostComputation, "turn-" + std::to_string(*quoteToolTurn_), Scalar(euros_decimal(*d.quotedCost))});
        ev.push_back({EvidenceKind::TranscriptTurn, "turn-" + std::to_string(*d.quoteTurn), std::nullopt});
        return ev;
    case TaskKind::ConstraintReconciliation: {
        if (!d.constraints.budget || !d.constraints.minConcurrentUsers || !d.quotedCost || !d.quoteTurn || !quoteToolTurn_) {
            return std::nullopt;
        }
        if (*d.quotedCost > *d.constraints.budget) return std::nullopt;
        std::optional<std::int64_t> cap;
        for (const auto& s : d.offeringSelections) {
            if (const auto* o = graph_.offering(s.offeringId)) {
                if (auto c = offering_capacity(*o)) cap = cap ? std::min(*cap, *c) : *c;
            }
        }
        if (!cap || *cap < *d.constraints.minConcurrentUsers) return std::nullopt;
        ev.push_back({EvidenceKind::CharacteristicValue, "budget", Scalar(euros_decimal(*d.constraints.budget))});
        ev.push_back({EvidenceKind::CharacteristicValue, "minConcurrentUsers", Scalar::number(*d.constraints.minConcurrentUsers)});
        ev.push_back({EvidenceKind::CostComputation, "turn-" + std::to_string(*quoteToolTurn_), Scalar(euros_decimal(*d.quotedCost))});
        return ev;
    }
    case TaskKind::OrderSerialization:
        if (!d.period || !d.payload || !d.payloadTurn) return std::nullopt;
        ev.push_back({EvidenceKind::TranscriptTurn, "turn-" + std::to_string(*d.payloadTurn), std::nullopt});
        return ev;
    case TaskKind::Confirmation:
        if (!d.confirmed || !d.confirmationTurn) return std::nullopt;
        ev.push_back({EvidenceKind::TranscriptTurn, "turn-" + std::to_string(*d.confirmationTurn), std::nullopt});
        return ev;
    }
    return std::nullopt;
}

StepOutcome Agent::step() {
    if (finalized_ && session_.status == SessionStatus::Finalized) return StepOutcome::Done;
    const Task* cur = session_.taskList.in_progress();
    if (!cur) {
        if (const auto* c = session_.taskList.next_candidate()) {
            transition(*c, TaskState::InProgress);
            cur = session_.taskList.in_progress();
        }
    }
    std::string curId = cur ? cur->taskId : std::string{};
    auto current = [&]() -> const Task* {
        for (const auto& t : session_.taskList.tasks()) {
            if (t.taskId == curId && t.state == TaskState::InProgress) return &t;
        }
        return nullptr;
    };

    Effect effect;
    try {
        ReasonerContext ctx{session_, cur, tools_.specs(), lastToolResult_, lastToolName_, lastToolOk_};
        effect = reasoner_->next(ctx);
    } catch (const std::exception& e) {
        session_.diagnostic = e.what();
        session_.status = SessionStatus::AwaitingUser;
        append(Role::Agent, std::string("The reasoning backend failed: ") + e.what(),
               {{"effect", {{"type", "error"}}}, {"harness", true}, {"backendError", e.what()}});
        if (const auto* t = current()) transition(*t, TaskState::Blocked);
        return StepOutcome::Yield;
    }
    lastToolResult_.reset();
    lastToolName_.reset();
    lastToolOk_ = true;
    auto usage = reasoner_->last_usage_tokens();

    auto verdict = check_guardrails(session_, effect, graph_);
    json meta{{"effect", to_json(effect)}};
    if (!verdict.allowed) {
        meta["vetoedBy"] = verdict.rule;
        meta["vetoDetail"] = verdict.detail;
        std::string content;
        if (const auto* r = std::get_if<TextReply>(&effect)) {
            meta["recommendations"] = recommended_names(*r);
            meta["purpose"] = std::string(to_string(r->purpose));
            content = r->text;
        } else {
            content = canonical_json(to_json(effect));
        }
        append(Role::Agent, content, meta, usage);
        append(Role::Agent, corrective_text(verdict),
               {{"effect", {{"type", "text"}}}, {"purpose", "info"}, {"corrective", true}, {"rule", verdict.rule}, {"harness", true}});
        if (const auto* c = std::get_if<ToolCall>(&effect)) {
            lastToolName_ = c->name;
            lastToolOk_ = false;
            lastToolResult_ = json{{"error", corrective_text(verdict)}, {"vetoedBy", verdict.rule}};
            return StepOutcome::Continue;
        }
        if (const auto* t = current()) transition(*t, TaskState::NeedsInfo);
        session_.status = SessionStatus::AwaitingUser;
        return StepOutcome::Yield;
    }

    if (const auto* c = std::get_if<ToolCall>(&effect)) {
        json result;
        bool ok = true;
        try {
            result = tools_.invoke(c->name, c->args);
        } catch (const std::exception& e) {
            ok = false;
            result = json{{"error", e.what()}};
        }
        json tmeta{{"tool", c->name}, {"args", c->args}, {"ok", ok}, {"result", result}};
        append(Role::Tool, canonical_json({{"tool", c->name}, {"args", c->args}, {"result", result}}), tmeta, usage);
        lastToolName_ = c->name;
        lastToolOk_ = ok;
        lastToolResult_ = result;
        if (finalized_ && submitted_) {
            append(Role::Agent,
                   "Order " + finalized_->intent.intentId + " has been submitted for provisioning. Total cost: " +
                       money_from_json(finalized_->orderPayload.at("totalCost")).to_string() + ".",
                   {{"effect", {{"type", "text"}}}, {"purpose", "info"}, {"harness", true}});
            return StepOutcome::Done;
        }
        if (const auto* t = current()) {
            if (auto ev = criteria_met(*t)) transition(*t, TaskState::Completed, std::move(*ev));
        }
        return StepOutcome::Continue;
    }

    if (const auto* r = std::get_if<TextReply>(&effect)) {
        auto names = recommended_names(*r);
        meta["purpose"] = std::string(to_string(r->purpose));
        meta["recommendations"] = names;
        auto total = extract_total(r->text);
        if (total) meta["quotedTotal"] = to_json(*total);
        auto& turn = append(Role::Agent, r->text, meta, usage);
        int idx = turn.index;

        auto& d = session_.draft;
        if (!names.empty() && !d.offeringSelections.empty()) {
            std::set<std::string> ids;
            bool exact = true;
            for (const auto& n : names) {
                auto found = resolve_product_mention(graph_, n);
                if (found.size() != 1) exact = false;
                else ids.insert(found[0]->id);
            }
            auto sel = selection_ids(d.offeringSelections);
            if (exact && std::vector<std::string>(ids.begin(), ids.end()) == sel) presentedTurn_ = idx;
        }
        if (total && d.quotedCost && *total == *d.quotedCost && quoteToolTurn_) d.quoteTurn = idx;

        if (const auto* t = current()) {
            if (auto ev = criteria_met(*t)) transition(*t, TaskState::Completed, std::move(*ev));
            else if (r->endsTurn) transition(*t, TaskState::NeedsInfo);
        }
        if (r->endsTurn) {
            session_.status = SessionStatus::AwaitingUser;
            return StepOutcome::Yield;
        }
        return StepOutcome::Continue;
    }

    // Finalize
    try {
        finalize_intent();
        append(Role::Agent, "The intent " + finalized_->intent.intentId + " is confirmed and recorded.",
               {{"effect", {{"type", "finalize"}}}, {"harness", true}});
        return StepOutcome::Done;
    } catch (const FinalizeError& e) {
        append(Role::Agent, std::string("I cannot finalize yet: ") + e.what(),
               {{"effect", {{"type", "finalize"}}}, {"rejected", true}, {"harness", true}});
        if (const auto* t = current()) transition(*t, TaskState::NeedsInfo);
        session_.status = SessionStatus::AwaitingUser;
        return StepOutcome::Yield;
    }
}

FinalizedIntent Agent::finalize_intent() {
    if (finalized_) return *finalized_;
    for (const auto& t : session_.taskList.tasks()) {
        if (t.state != TaskState::Completed) {
            throw FinalizeError(FinalizeError::Kind::TaskIncomplete,
                                "task " + t.taskId + " is " + std::string(to_string(t.state)));
        }
    }
    if (session_.taskList.empty()) throw FinalizeError(FinalizeError::Kind::TaskIncomplete, "no goal has been stated");
    const auto& d = session_.draft;
    if (!d.confirmed || !d.confirmationTurn || !d.quotedCost) {
        throw FinalizeError(FinalizeError::Kind::Unconfirmed, "the order has not been explicitly confirmed");
    }
    if (!d.period || d.offeringSelections.empty()) {
        throw FinalizeError(FinalizeError::Kind::InvalidDraft, "the draft has no bundle or service period");
    }
    ConfirmedIntent ci;
    ci.intentId = session_.intent_id();
    ci.offeringSelections = d.offeringSelections;
    ci.constraints = d.constraints;
    ci.period = *d.period;
    ci.confirmation = {confirmedBy_, session_.sessionId + "#turn-" + std::to_string(*d.confirmationTurn)};
    try {
        validate_intent(graph_, ci);
    } catch (const PlanError& e) {
        throw FinalizeError(FinalizeError::Kind::InvalidDraft, e.what());
    }
    auto payload = d.payload ? *d.payload : build_order_payload(ci.intentId, ci.offeringSelections, ci.period, *d.quotedCost);
    std::string recordId;
    if (inventory_) {
        InventoryRecord r;
        r.id = ci.intentId;
        r.kind = InventoryKind::Intent;
        r.sourceSpecId = ci.offeringSelections.front().offeringId;
        r.state = "confirmed";
        r.payload = {{"intent", to_json(ci)}, {"order", payload}};
        if (auto prev = inventory_->latest(r.id)) r.supersedes = prev->revision;
        recordId = inventory_->record(std::move(r));
    }
    finalized_ = FinalizedIntent{ci, recordId, payload};
    session_.status = SessionStatus::Finalized;
    return *finalized_;
}

// ---------------------------------------------------------------- tools

void Agent::register_tools() {
    auto obj = [](json props, std::vector<std::string> required = {}) {
        return json{{"type", "object"}, {"properties", std::move(props)}, {"required", required}};
    };
    tools_.add({"list_offerings", "List catalog product offerings, optionally filtered by a name or tier substring.",
                obj({{"query", {{"type", "string"}}}})},
               [this](const json& a) { return tool_list_offerings(a); });
    tools_.add({"get_offering", "Get one catalog product offering by id.", obj({{"offeringId", {{"type", "string"}}}}, {"offeringId"})},
               [this](const json& a) { return tool_get_offering(a); });
    tools_.add({"propose_bundles",
                "Enumerate tier combinations over offering names and rank them against budget (EUR) and minimum concurrent users.",
                obj({{"families", {{"type", "array"}, {"items", {{"type", "string"}}}}},
                     {"budget", {{"type", "number"}}},
                     {"minConcurrentUsers", {{"type", "integer"}}},
                     {"days", {{"type", "integer"}}}},
                    {"families", "days"})},
               [this](const json& a) { return tool_propose_bundles(a); });
    tools_.add({"select_bundle", "Put a set of offerings into the draft order, with characteristic values per offering.",
                obj({{"offeringIds", {{"type", "array"}, {"items", {{"type", "string"}}}}},
                     {"characteristics", {{"type", "object"}}}},
                    {"offeringIds"})},
               [this](const json& a) { return tool_select_bundle(a); });
    tools_.add({"quote_price", "Price offerings for a number of days. Defaults to the draft bundle and duration.",
                obj({{"offeringIds", {{"type", "array"}, {"items", {{"type", "string"}}}}}, {"days", {{"type", "integer"}}}})},
               [this](const json& a) { return tool_quote_price(a); });
    tools_.add({"preview_order", "Validate and store the order payload for the draft bundle.",
                obj({{"payload", {{"type", "object"}}}}, {"payload"})},
               [this](const json& a) { return tool_preview_order(a); });
    tools_.add({"submit_order", "Submit the confirmed order for provisioning.", obj(json::object())},
               [this](const json& a) { return tool_submit_order(a); });
}

json Agent::tool_list_offerings(const json& args) {
    std::string q = args.contains("query") && args["query"].is_string() ? args["query"].get<std::string>() : "";
    json arr = json::array();
    for (const auto* o : find_offerings(graph_, q)) arr.push_back(offering_summary(*o));
    return {{"offerings", arr}};
}

json Agent::tool_get_offering(const json& args) {
    if (!args.contains("offeringId") || !args["offeringId"].is_string()) throw ToolError("missing offeringId");
    const auto* o = graph_.offering(args["offeringId"].get<std::string>());
    if (!o) throw ToolError("no offering " + args["offeringId"].get<std::string>());
    return {{"offering", offering_summary(*o)}};
}

json Agent::tool_propose_bundles(const json& args) {
    auto families = string_array(args, "families");
    BundleConstraints c;
    c.budget = money_arg(args, "budget");
    if (args.contains("minConcurrentUsers") && !args["minConcurrentUsers"].is_null()) {
        c.minConcurrentUsers = args["minConcurrentUsers"].get<std::int64_t>();
    }
    int days = args.value("days", 0);
    if (days <= 0) throw ToolError("days must be a positive integer");
    auto proposals = propose_bundles(graph_, families, c, days);
    if (proposals.empty()) throw ToolError("no catalog offerings match the requested product names");
    json arr = json::array();
    for (const auto& p : proposals) {
        auto j = to_json(p);
        json names = json::array();
        for (const auto& id : p.offeringIds) names.push_back(graph_.offering(id)->display_name());
        j["names"] = names;
        arr.push_back(j);
    }
    return {{"proposals", arr}, {"days", days}};
}

json Agent::tool_select_bundle(const json& args) {
    auto ids = string_array(args, "offeringIds");
    if (ids.empty()) throw ToolError("offeringIds is empty");
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw ToolError("an offering is listed twice");
    json chars = args.value("characteristics", json::object());
    std::vector<OfferingSelection> sels;
    json names = json::array();
    for (const auto& id : ids) {
        const auto* o = graph_.offering(id);
        if (!o) throw ToolError("no offering " + id);
        OfferingSelection s{id, {}};
        if (chars.contains(id)) {
            for (const auto& [k, v] : chars[id].items()) {
                auto it = std::find_if(o->characteristics.begin(), o->characteristics.end(),
                                       [&](const CharacteristicSpec& c) { return c.name == k; });
                if (it == o->characteristics.end()) throw ToolError(id + " has no characteristic " + k);
                auto value = scalar_from_json(v);
                if (value.kind() != it->valueKind) throw ToolError(id + "." + k + " has the wrong type");
                if (it->allowedValues &&
                    std::find(it->allowedValues->begin(), it->allowedValues->end(), value) == it->allowedValues->end()) {
                    throw ToolError(id + "." + k + " does not allow " + value.to_display());
                }
                s.characteristicValues[k] = value;
            }
        }
        sels.push_back(std::move(s));
        names.push_back(o->display_name());
    }
    session_.draft.offeringSelections = std::move(sels);
    selectionTurn_ = static_cast<int>(session_.transcript.size());
    presentedTurn_.reset();
    clear_quote();
    return {{"offeringIds", ids}, {"selected", names}};
}

json Agent::tool_quote_price(const json& args) {
    auto& d = session_.draft;
    std::vector<std::string> ids = args.contains("offeringIds") ? string_array(args, "offeringIds") : selection_ids(d.offeringSelections);
    std::sort(ids.begin(), ids.end());
    if (ids.empty()) throw ToolError("nothing to quote: no offerings given and no bundle selected");
    int days = args.contains("days") && !args["days"].is_null() ? args["days"].get<int>() : d.days.value_or(0);
    if (days <= 0) throw ToolError("the service duration is unknown");
    json items = json::array();
    for (const auto& id : ids) {
        const auto* o = graph_.offering(id);
        if (!o) throw ToolError("no offering " + id);
        auto subtotal = compute_cost(graph_, std::vector<std::string>{id}, days);
        items.push_back({{"offeringId", id},
                         {"name", o->display_name()},
                         {"unitCost", to_json(o->unitCost)},
                         {"costPeriod", std::string(to_string(o->costPeriod))},
                         {"subtotal", to_json(subtotal)}});
    }
    auto total = compute_cost(graph_, ids, days);
    if (ids == selection_ids(d.offeringSelections) && d.days == days) {
        d.quotedCost = total;
        d.quoteTurn.reset();
        quoteToolTurn_ = static_cast<int>(session_.transcript.size());
    }
    return {{"items", items}, {"days", days}, {"total", to_json(total)}};
}

json Agent::tool_preview_order(const json& args) {
    const json& p = args.contains("payload") ? args["payload"] : args;
    auto& d = session_.draft;
    if (!p.is_object()) throw ToolError("payload must be an object");
    if (p.value("intentId", std::string{}) != session_.intent_id()) {
        throw ToolError("payload intentId must be " + session_.intent_id());
    }
    if (!p.contains("orderItems") || !p["orderItems"].is_array() || p["orderItems"].empty()) {
        throw ToolError("payload needs a non-empty orderItems array");
    }
    std::vector<std::string> ids;
    for (const auto& item : p["orderItems"]) {
        auto id = item.value("offeringId", std::string{});
        if (!graph_.offering(id)) throw ToolError("no offering " + id);
        ids.push_back(id);
        if (!item.contains("validFor")) throw ToolError(id + " has no validFor");
        auto start = parse_iso_date(item["validFor"].value("startDate", std::string{}));
        auto end = parse_iso_date(item["validFor"].value("endDate", std::string{}));
        if (!start || !end) throw ToolError(id + " validFor dates must be ISO-8601 calendar dates");
        if (inclusive_days(*start, *end) < 1) throw ToolError(id + " validFor ends before it starts");
        if (item.contains("characteristics") && !item["characteristics"].is_object()) {
            throw ToolError(id + " characteristics must be an object");
        }
    }
    std::sort(ids.begin(), ids.end());
    if (ids != selection_ids(d.offeringSelections)) throw ToolError("payload items do not match the selected bundle");
    if (!p.contains("totalCost")) throw ToolError("payload has no totalCost");
    money_from_json(p["totalCost"]);
    d.payload = p;
    d.payloadTurn = static_cast<int>(session_.transcript.size());
    d.confirmed = false;
    d.confirmationTurn.reset();
    return {{"payload", p}, {"valid", true}};
}

json Agent::tool_submit_order(const json&) {
    if (!session_.draft.confirmed) throw ToolError("the order has not been confirmed by the user");
    auto f = finalize_intent();
    if (sink_ && !submitted_) sink_->submit(f);
    submitted_ = true;
    return {{"intentId", f.intent.intentId}, {"inventoryRecordId", f.inventoryRecordId}, {"payload", f.orderPayload}};
}

}  // namespace intentforge::cocreation
