// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <map>

#include "intentforge/cocreation/reasoner.hpp"
#include "intentforge/text.hpp"

namespace intentforge::cocreation {

using nlohmann::json;

namespace {

struct FamilyRule {
    std::vector<std::string> keywords;
    std::string family;
};

const std::vector<FamilyRule>& family_rules() {
    static const std::vector<FamilyRule> r{
        {{"5g", "mobile"}, "On-demand Network Slice"},
        {{"media", "stream", "video"}, "Edge Media Cache Server"},
        {{"monitor"}, "Network Slice Observability"},
        {{"api"}, "Service APIs Exposure"},
        {{}, "Service Setup and VPN"},
    };
    return r;
}

struct OfferingInfo {
    std::string name;
    std::string tier;
    Money unitCost;
    std::string costPeriod;
    std::vector<std::string> parameters;
};

std::string price_text(const OfferingInfo& o) {
    return o.unitCost.to_string() + (o.costPeriod == "once" ? " once" : " per day");
}

class ReferenceReasoner : public Reasoner {
public:
    explicit ReferenceReasoner(bool extraDay) : extraDay_(extraDay) {}

    std::string id() const override { return extraDay_ ? "wrong-duration" : "reference"; }
    std::string group() const override { return "reasoning"; }

    Effect next(const ReasonerContext& ctx) override {
        load(ctx.session);
        if (ctx.lastToolName && !ctx.lastToolOk) {
            std::string err = ctx.lastToolResult ? ctx.lastToolResult->value("error", std::string{}) : std::string{};
            return question("I could not complete that step (" + err + "). How would you like to proceed?");
        }
        const auto& d = ctx.session.draft;
        if (!ctx.task) {
            if (d.confirmed) return ToolCall{"submit_order", json::object()};
            return question("Is there anything else you would like to change?");
        }
        switch (ctx.task->kind) {
        case TaskKind::Discovery:
            return ToolCall{"list_offerings", json::object()};
        case TaskKind::BundleProposal:
            if (auto e = bundle_flow(ctx.session)) return *e;
            return question("Which of these products would you like to keep?");
        case TaskKind::CostQuotation:
            if (!d.days) return question("For how many days do you need the service, and from which start date?");
            if (d.offeringSelections.empty()) {
                if (auto e = bundle_flow(ctx.session)) return *e;
            }
            if (auto e = quote_flow(ctx.session)) return *e;
            return question("Would you like me to adjust the selection?");
        case TaskKind::ConstraintReconciliation: {
            if (auto e = bundle_flow(ctx.session)) return *e;
            if (!d.days) return question("For how many days do you need the service?");
            if (auto e = quote_flow(ctx.session)) return *e;
            const auto& c = d.constraints;
            if (!c.budget && !c.minConcurrentUsers) {
                return question("Does this fit your plans? Please tell me your total budget and how many simultaneous "
                                "users the service must support.");
            }
            if (!c.minConcurrentUsers) {
                return question("How many simultaneous users must the service support? I can then balance cost and "
                                "performance.");
            }
            if (!c.budget) return question("What is your total budget for the whole period?");
            return question("No combination in the catalog meets both the budget and the number of users. Would you like "
                            "to raise the budget or lower the number of users?");
        }
        case TaskKind::OrderSerialization:
            if (auto e = serialization_flow(ctx.session)) return *e;
            return question("Would you like to change anything in the order?");
        case TaskKind::Confirmation:
            if (d.confirmed) return TextReply{"Thank you for confirming. I will place the order now.", {}, ReplyPurpose::Info, false};
            if (!d.payload) {
                if (auto e = serialization_flow(ctx.session)) return *e;
            }
            return confirmation_request(ctx.session);
        }
        return question("How would you like to proceed?");
    }

private:
    static TextReply question(std::string text) { return TextReply{std::move(text), {}, ReplyPurpose::Question, true}; }

    void load(const Session& s) {
        offerings_.clear();
        lastPropose_ = nullptr;
        lastSelect_ = -1;
        lastQuote_ = nullptr;
        for (const auto& t : s.transcript) {
            if (t.role != Role::Tool || !t.meta.value("ok", false)) continue;
            auto tool = t.meta.value("tool", std::string{});
            const auto& res = t.meta["result"];
            if (tool == "list_offerings") {
                for (const auto& o : res["offerings"]) {
                    OfferingInfo info{o["name"], o["tier"], money_from_json(o["unitCost"]), o["costPeriod"], {}};
                    for (const auto& p : o["parameters"]) info.parameters.push_back(p);
                    offerings_[o["id"]] = info;
                }
            } else if (tool == "propose_bundles") {
                lastPropose_ = &t;
            } else if (tool == "select_bundle") {
                lastSelect_ = t.index;
            } else if (tool == "quote_price") {
                lastQuote_ = &t;
            }
        }
        presented_ = false;
        if (lastSelect_ >= 0) {
            for (const auto& t : s.transcript) {
                if (t.index > lastSelect_ && t.role == Role::Agent && !t.meta.contains("vetoedBy") &&
                    t.meta.value("purpose", std::string{}) == "proposal") {
                    presented_ = true;
                }
            }
        }
    }

    std::vector<std::string> families(const Session& s) const {
        std::vector<std::string> out;
        const auto& feats = s.goal ? s.goal->features : std::vector<std::string>{};
        for (const auto& r : family_rules()) {
            bool hit = r.keywords.empty();
            for (const auto& k : r.keywords) hit = hit || std::find(feats.begin(), feats.end(), k) != feats.end();
            if (hit) out.push_back(r.family);
        }
        return out;
    }

    json propose_args(const Session& s) const {
        const auto& d = s.draft;
        json a{{"families", families(s)}, {"days", d.days.value_or(1)}};
        if (d.constraints.budget) a["budget"] = d.constraints.budget->cents / 100;
        if (d.constraints.minConcurrentUsers) a["minConcurrentUsers"] = *d.constraints.minConcurrentUsers;
        return a;
    }

    std::vector<Money> cost_vector(const json& ids, const std::vector<std::string>& fams) const {
        std::vector<Money> v(fams.size());
        for (const auto& id : ids) {
            auto it = offerings_.find(id.get<std::string>());
            if (it == offerings_.end()) continue;
            for (std::size_t i = 0; i < fams.size(); ++i) {
                if (text::iequals(fams[i], it->second.name)) v[i] = it->second.unitCost;
            }
        }
        return v;
    }

    std::vector<std::string> choose(const Session& s) const {
        const auto& props = lastPropose_->meta["result"]["proposals"];
        auto fams = families(s);
        const json* pick = nullptr;
        if (s.draft.constraints.minConcurrentUsers) {
            for (const auto& p : props) {
                if (p["satisfied"].get<bool>()) {
                    pick = &p;
                    break;
                }
            }
        } else {
            for (const auto& p : props) {
                if (!p["satisfied"].get<bool>()) continue;
                if (!pick || cost_vector(p["offeringIds"], fams) > cost_vector((*pick)["offeringIds"], fams)) pick = &p;
            }
        }
        if (!pick) pick = &props.front();
        return (*pick)["offeringIds"].get<std::vector<std::string>>();
    }

    std::optional<Effect> bundle_flow(const Session& s) {
        const auto& d = s.draft;
        if (offerings_.empty()) return ToolCall{"list_offerings", json::object()};
        auto args = propose_args(s);
        if (!lastPropose_ || lastPropose_->meta["args"] != args) return ToolCall{"propose_bundles", args};
        if (lastPropose_->meta["result"]["proposals"].empty()) return question("No product combination matched. How would you like to proceed?");
        auto ids = choose(s);
        std::vector<std::string> current;
        for (const auto& sel : d.offeringSelections) current.push_back(sel.offeringId);
        if (ids != current) {
            json chars = json::object();
            auto loc = s.goal ? s.goal->latest(ConstraintName::Location) : std::nullopt;
            for (const auto& id : ids) {
                auto it = offerings_.find(id);
                if (it == offerings_.end()) continue;
                const auto& p = it->second.parameters;
                if (loc && std::find(p.begin(), p.end(), "cityName") != p.end()) chars[id] = {{"cityName", loc->as_string()}};
            }
            return ToolCall{"select_bundle", {{"offeringIds", ids}, {"characteristics", chars}}};
        }
        if (!presented_) return proposal(s, ids);
        return std::nullopt;
    }

    TextReply proposal(const Session& s, const std::vector<std::string>& ids) const {
        const auto& c = s.draft.constraints;
        auto loc = s.goal ? s.goal->latest(ConstraintName::Location) : std::nullopt;
        std::string intro;
        if (c.minConcurrentUsers) {
            intro = "This is the lowest-cost combination in the catalog for at least " + std::to_string(*c.minConcurrentUsers) +
                    " simultaneous users";
        } else if (c.budget) {
            intro = "Here is an alternative combination within your budget of " + c.budget->to_string();
        } else {
            intro = "Based on the catalog, this combination matches your request";
        }
        if (loc) intro += " in " + loc->as_string();
        std::string text = intro + ":";
        std::vector<std::string> names;
        for (const auto& id : ids) {
            auto it = offerings_.find(id);
            if (it == offerings_.end()) continue;
            const auto& o = it->second;
            names.push_back(o.name + " / " + o.tier);
            text += "\n- " + names.back() + ": " + price_text(o);
        }
        return TextReply{text, names, ReplyPurpose::Proposal, false};
    }

    std::optional<Effect> serialization_flow(const Session& s) {
        const auto& d = s.draft;
        if (d.offeringSelections.empty()) {
            if (auto e = bundle_flow(s)) return e;
        }
        if (!d.days) return question("For how many days do you need the service?");
        if (!d.period) return question("When should the service start? Please give a start date such as 2026-11-02.");
        if (auto e = quote_flow(s)) return e;
        if (!d.payload) return ToolCall{"preview_order", {{"payload", payload(s)}}};
        return std::nullopt;
    }

    std::optional<Effect> quote_flow(const Session& s) const {
        const auto& d = s.draft;
        if (!d.days) return question("For how many days do you need the service?");
        if (!d.quotedCost) return ToolCall{"quote_price", json::object()};
        if (d.quoteTurn) return std::nullopt;
        std::string text = "Price breakdown:";
        std::vector<std::string> names;
        if (lastQuote_) {
            for (const auto& item : lastQuote_->meta["result"]["items"]) {
                names.push_back(item["name"]);
                text += "\n- " + names.back() + ": " + money_from_json(item["subtotal"]).to_string();
            }
        }
        text += "\nTotal cost: " + d.quotedCost->to_string() + " for " + std::to_string(*d.days) + " days.";
        return TextReply{text, names, ReplyPurpose::Quote, false};
    }

    json payload(const Session& s) const {
        const auto& d = s.draft;
        auto start = d.period->startDate;
        auto end = add_days(start, d.period->days - (extraDay_ ? 0 : 1));
        json items = json::array();
        for (const auto& sel : d.offeringSelections) {
            json cv = json::object();
            for (const auto& [k, v] : sel.characteristicValues) cv[k] = to_json_value(v);
            items.push_back({{"offeringId", sel.offeringId},
                             {"characteristics", cv},
                             {"validFor", {{"startDate", format_iso_date(start)}, {"endDate", format_iso_date(end)}}}});
        }
        return {{"intentId", s.intent_id()}, {"orderItems", items}, {"totalCost", to_json(*d.quotedCost)}};
    }

    TextReply confirmation_request(const Session& s) const {
        const auto& d = s.draft;
        const auto& p = *d.payload;
        std::string text = "The order is ready:";
        std::vector<std::string> names;
        for (const auto& sel : d.offeringSelections) {
            auto it = offerings_.find(sel.offeringId);
            if (it == offerings_.end()) continue;
            names.push_back(it->second.name + " / " + it->second.tier);
            text += "\n- " + names.back() + ": " + price_text(it->second);
        }
        const auto& vf = p.at("orderItems").at(0).at("validFor");
        text += "\nService period: " + vf.at("startDate").get<std::string>() + " to " + vf.at("endDate").get<std::string>() + ".";
        text += "\nTotal cost: " + money_from_json(p["totalCost"]).to_string() + ".";
        text += "\nPlease reply with an explicit confirmation to place the order.";
        return TextReply{text, names, ReplyPurpose::Quote, true};
    }

    bool extraDay_;
    std::map<std::string, OfferingInfo> offerings_;
    const Turn* lastPropose_ = nullptr;
    const Turn* lastQuote_ = nullptr;
    int lastSelect_ = -1;
    bool presented_ = false;
};

}  // namespace

std::unique_ptr<Reasoner> make_reference_reasoner() { return std::make_unique<ReferenceReasoner>(false); }
std::unique_ptr<Reasoner> make_wrong_duration_reasoner() { return std::make_unique<ReferenceReasoner>(true); }

}  // namespace intentforge::cocreation
