// SPDX-License-Identifier: Apache-2.0
#include "intentforge/traversal.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "intentforge/canonical.hpp"
#include "intentforge/text.hpp"

namespace intentforge {

using nlohmann::json;

// ---------------------------------------------------------------- dates

std::optional<Date> parse_iso_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    auto num = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
        int v = 0;
        for (std::size_t i = pos; i < pos + len; ++i) {
            if (s[i] < '0' || s[i] > '9') return std::nullopt;
            v = v * 10 + (s[i] - '0');
        }
        return v;
    };
    auto y = num(0, 4);
    auto m = num(5, 2);
    auto d = num(8, 2);
    if (!y || !m || !d) return std::nullopt;
    Date date{std::chrono::year(*y), std::chrono::month(static_cast<unsigned>(*m)), std::chrono::day(static_cast<unsigned>(*d))};
    if (!date.ok()) return std::nullopt;
    return date;
}

std::string format_iso_date(Date d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                  static_cast<unsigned>(d.day()));
    return buf;
}

Date add_days(Date d, int days) { return Date(std::chrono::sys_days(d) + std::chrono::days(days)); }

int inclusive_days(Date start, Date end) {
    return static_cast<int>((std::chrono::sys_days(end) - std::chrono::sys_days(start)).count()) + 1;
}

// ---------------------------------------------------------------- JSON

namespace {

json scalar_map_json(const std::map<std::string, Scalar>& m) {
    json j = json::object();
    for (const auto& [k, v] : m) j[k] = to_json_value(v);
    return j;
}

std::map<std::string, Scalar> scalar_map_from_json(const json& j) {
    std::map<std::string, Scalar> out;
    if (j.is_null()) return out;
    for (const auto& [k, v] : j.items()) out[k] = scalar_from_json(v);
    return out;
}

json selections_json(const std::vector<OfferingSelection>& sels) {
    json arr = json::array();
    for (const auto& s : sels) {
        arr.push_back({{"offeringId", s.offeringId}, {"characteristicValues", scalar_map_json(s.characteristicValues)}});
    }
    return arr;
}

std::vector<OfferingSelection> selections_from_json(const json& arr) {
    std::vector<OfferingSelection> out;
    for (const auto& s : arr) {
        out.push_back({s.at("offeringId").get<std::string>(),
                       scalar_map_from_json(s.value("characteristicValues", json::object()))});
    }
    return out;
}

json period_json(const ServicePeriod& p) { return {{"startDate", format_iso_date(p.startDate)}, {"days", p.days}}; }

ServicePeriod period_from_json(const json& j) {
    auto d = parse_iso_date(j.at("startDate").get<std::string>());
    if (!d) throw std::invalid_argument("invalid startDate " + j.at("startDate").dump());
    return {*d, j.at("days").get<int>()};
}

Comparator comparator_from(std::string_view s) {
    for (auto c : {Comparator::Lt, Comparator::Le, Comparator::Gt, Comparator::Ge, Comparator::Eq}) {
        if (to_string(c) == s) return c;
    }
    throw std::invalid_argument("unknown comparator " + std::string(s));
}

TestKind test_kind_from(std::string_view s) {
    for (auto k : {TestKind::Connectivity, TestKind::Latency, TestKind::Throughput, TestKind::SliceAdmission,
                   TestKind::ApiAvailability}) {
        if (to_string(k) == s) return k;
    }
    throw std::invalid_argument("unknown test kind " + std::string(s));
}

}  // namespace

json to_json(const IntentConstraints& c) {
    json j = json::object();
    if (c.budget) j["budget"] = to_json(*c.budget);
    if (c.minConcurrentUsers) j["minConcurrentUsers"] = *c.minConcurrentUsers;
    if (c.latencyCeilingMs) j["latencyCeilingMs"] = to_json_value(*c.latencyCeilingMs);
    return j;
}

IntentConstraints constraints_from_json(const json& j) {
    IntentConstraints c;
    if (j.is_null()) return c;
    if (j.contains("budget") && !j.at("budget").is_null()) c.budget = money_from_json(j.at("budget"));
    if (j.contains("minConcurrentUsers") && !j.at("minConcurrentUsers").is_null()) {
        c.minConcurrentUsers = j.at("minConcurrentUsers").get<std::int64_t>();
    }
    if (j.contains("latencyCeilingMs") && !j.at("latencyCeilingMs").is_null()) {
        c.latencyCeilingMs = decimal_from_json(j.at("latencyCeilingMs"));
    }
    return c;
}

json to_json(const ConfirmedIntent& intent) {
    return {{"intentId", intent.intentId},
            {"offeringSelections", selections_json(intent.offeringSelections)},
            {"constraints", to_json(intent.constraints)},
            {"period", period_json(intent.period)},
            {"confirmation",
             {{"confirmedBy", intent.confirmation.confirmedBy}, {"transcriptRef", intent.confirmation.transcriptRef}}}};
}

ConfirmedIntent intent_from_json(const json& j) {
    ConfirmedIntent i;
    i.intentId = j.at("intentId").get<std::string>();
    i.offeringSelections = selections_from_json(j.at("offeringSelections"));
    i.constraints = constraints_from_json(j.value("constraints", json::object()));
    i.period = period_from_json(j.at("period"));
    const auto& c = j.at("confirmation");
    i.confirmation = {c.at("confirmedBy").get<std::string>(), c.at("transcriptRef").get<std::string>()};
    return i;
}

std::string root_ref(std::string_view offeringId) { return "sel:" + std::string(offeringId); }
bool is_root_ref(std::string_view ref) { return ref.rfind("sel:", 0) == 0; }

json plan_content_json(const OrchestrationPlan& p) {
    json services = json::array();
    for (const auto& s : p.serviceOrders) {
        services.push_back({{"itemId", s.itemId},
                            {"serviceSpecId", s.serviceSpecId},
                            {"resolvedCharacteristics", scalar_map_json(s.resolvedCharacteristics)},
                            {"parentRef", s.parentRef}});
    }
    json resources = json::array();
    for (const auto& r : p.resourceOrders) {
        resources.push_back({{"itemId", r.itemId},
                             {"resourceSpecId", r.resourceSpecId},
                             {"domain", std::string(to_string(r.domain))},
                             {"resolvedCharacteristics", scalar_map_json(r.resolvedCharacteristics)},
                             {"parentServiceRef", r.parentServiceRef}});
    }
    json tests = json::array();
    for (const auto& t : p.derivedTests) {
        tests.push_back({{"testSpecId", t.testSpecId},
                         {"boundRef", t.boundRef},
                         {"resolvedThreshold", to_json_value(t.resolvedThreshold)},
                         {"kind", std::string(to_string(t.kind))},
                         {"comparator", std::string(to_string(t.comparator))},
                         {"targetMetric", t.targetMetric},
                         {"evaluationWindowTicks", t.evaluationWindowTicks}});
    }
    return {{"planId", p.planId},
            {"intentId", p.intentId},
            {"catalogVersion", p.catalogVersion},
            {"selections", selections_json(p.selections)},
            {"constraints", to_json(p.constraints)},
            {"period", period_json(p.period)},
            {"serviceOrders", services},
            {"resourceOrders", resources},
            {"derivedTests", tests},
            {"totalCost", to_json(p.totalCost)}};
}

json to_json(const OrchestrationPlan& p) {
    json j = plan_content_json(p);
    j["canonicalDigest"] = p.canonicalDigest;
    return j;
}

OrchestrationPlan plan_from_json(const json& j) {
    OrchestrationPlan p;
    p.planId = j.at("planId").get<std::string>();
    p.intentId = j.at("intentId").get<std::string>();
    p.catalogVersion = j.at("catalogVersion").get<std::string>();
    p.selections = selections_from_json(j.at("selections"));
    p.constraints = constraints_from_json(j.value("constraints", json::object()));
    p.period = period_from_json(j.at("period"));
    for (const auto& s : j.at("serviceOrders")) {
        p.serviceOrders.push_back({s.at("itemId").get<std::string>(), s.at("serviceSpecId").get<std::string>(),
                                   scalar_map_from_json(s.at("resolvedCharacteristics")),
                                   s.at("parentRef").get<std::string>()});
    }
    for (const auto& r : j.at("resourceOrders")) {
        auto d = domain_from_string(r.at("domain").get<std::string>());
        if (!d) throw std::invalid_argument("unknown domain " + r.at("domain").dump());
        p.resourceOrders.push_back({r.at("itemId").get<std::string>(), r.at("resourceSpecId").get<std::string>(), *d,
                                    scalar_map_from_json(r.at("resolvedCharacteristics")),
                                    r.at("parentServiceRef").get<std::string>()});
    }
    for (const auto& t : j.at("derivedTests")) {
        p.derivedTests.push_back({t.at("testSpecId").get<std::string>(), t.at("boundRef").get<std::string>(),
                                  decimal_from_json(t.at("resolvedThreshold")), test_kind_from(t.at("kind").get<std::string>()),
                                  comparator_from(t.at("comparator").get<std::string>()),
                                  t.at("targetMetric").get<std::string>(), t.at("evaluationWindowTicks").get<int>()});
    }
    p.totalCost = money_from_json(j.at("totalCost"));
    p.canonicalDigest = j.value("canonicalDigest", std::string{});
    return p;
}

std::string canonical_plan_bytes(const OrchestrationPlan& p) { return canonical_json(plan_content_json(p)); }
std::string compute_plan_digest(const OrchestrationPlan& p) { return sha256_hex(canonical_plan_bytes(p)); }
bool verify_plan_digest(const OrchestrationPlan& p) { return !p.canonicalDigest.empty() && compute_plan_digest(p) == p.canonicalDigest; }

json to_json(const TraceEntry& e) { return {{"stage", e.stage}, {"nodeId", e.nodeId}, {"ref", e.ref}}; }

PlanError::PlanError(Kind k, const std::string& what) : std::runtime_error(what), kind(k) {}

// ---------------------------------------------------------------- cost

Money compute_cost(const CatalogGraph& g, const std::vector<std::string>& ids, int days) {
    if (days <= 0) throw PlanError(PlanError::Kind::InvalidIntent, "days must be positive");
    Money total;
    for (const auto& id : ids) {
        const auto* o = g.offering(id);
        if (!o) throw PlanError(PlanError::Kind::DanglingOffering, "unknown offering " + id);
        total += o->costPeriod == CostPeriod::PerDay ? o->unitCost * days : o->unitCost;
    }
    return total;
}

Money compute_cost(const CatalogGraph& g, const std::vector<OfferingSelection>& sels, int days) {
    std::vector<std::string> ids;
    for (const auto& s : sels) ids.push_back(s.offeringId);
    return compute_cost(g, ids, days);
}

// ---------------------------------------------------------------- validation

void validate_intent(const CatalogGraph& g, const ConfirmedIntent& intent) {
    auto bad = [](const std::string& what) { throw PlanError(PlanError::Kind::InvalidIntent, "invalid intent: " + what); };
    if (intent.intentId.empty()) bad("missing intentId");
    if (intent.period.days <= 0) bad("period.days must be positive");
    if (!intent.period.startDate.ok()) bad("period.startDate is not a valid date");
    if (intent.confirmation.confirmedBy.empty() || intent.confirmation.transcriptRef.empty()) bad("missing confirmation evidence");
    std::set<std::string> seen;
    for (const auto& sel : intent.offeringSelections) {
        const auto* o = g.offering(sel.offeringId);
        if (!o) bad("offering " + sel.offeringId + " is not in the catalog");
        if (!seen.insert(sel.offeringId).second) bad("offering " + sel.offeringId + " selected twice");
        for (const auto& [name, value] : sel.characteristicValues) {
            auto it = std::find_if(o->characteristics.begin(), o->characteristics.end(),
                                   [&](const CharacteristicSpec& c) { return c.name == name; });
            if (it == o->characteristics.end()) bad(sel.offeringId + " has no characteristic " + name);
            if (it->valueKind != value.kind()) bad(sel.offeringId + "." + name + " expects a " + std::string(to_string(it->valueKind)));
            if (it->allowedValues &&
                std::find(it->allowedValues->begin(), it->allowedValues->end(), value) == it->allowedValues->end()) {
                bad(sel.offeringId + "." + name + " does not allow " + value.to_display());
            }
        }
    }
}

// ---------------------------------------------------------------- traversal

namespace {

std::string pad3(int n) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%03d", n);
    return buf;
}

class Traverser {
public:
    Traverser(const CatalogGraph& g, OrchestrationPlan& plan, std::vector<TraceEntry>* trace)
        : g_(g), plan_(plan), trace_(trace) {}

    void selection(const OfferingSelection& sel) {
        const auto& o = *g_.offering(sel.offeringId);
        const std::string root = root_ref(o.id);
        std::string path = o.id;
        note("offering", o.id, root);

        rules::Bindings env;
        env["tier"] = Scalar(o.tier);
        env["days"] = Scalar::number(plan_.period.days);
        if (plan_.constraints.minConcurrentUsers) env["minConcurrentUsers"] = Scalar::number(*plan_.constraints.minConcurrentUsers);
        if (plan_.constraints.latencyCeilingMs) env["latencyCeilingMs"] = Scalar(*plan_.constraints.latencyCeilingMs);
        add_defaults(o.characteristics, env);
        for (const auto& [k, v] : o.fixedCharacteristicValues) env[k] = v;
        for (const auto& [k, v] : sel.characteristicValues) env[k] = v;

        // Stage 1: offering -> product specification.
        const auto& ps = *g_.product_spec(o.productSpecId);
        path += " > " + ps.id;
        note("productSpec", ps.id, root);
        add_defaults(ps.characteristics, env);
        apply_rules(ps.ruleSetIds, env, path);
        tests(ps.testSpecIds, env, root, path);

        // Stage 2: recursive service decomposition.
        for (const auto& sid : sorted(ps.serviceSpecIds)) service(sid, env, root, path);
    }

private:
    static std::vector<std::string> sorted(std::vector<std::string> v) {
        std::sort(v.begin(), v.end());
        return v;
    }

    void note(const char* stage, const std::string& node, const std::string& ref) {
        if (trace_) trace_->push_back({stage, node, ref});
    }

    static void add_defaults(const std::vector<CharacteristicSpec>& chars, rules::Bindings& env) {
        for (const auto& c : chars) {
            if (c.defaultValue && !env.count(c.name)) env[c.name] = *c.defaultValue;
        }
    }

    rules::Bindings apply_rules(const std::vector<std::string>& ruleSetIds, rules::Bindings& env, const std::string& path) {
        rules::Bindings produced;
        for (const auto& rsId : ruleSetIds) {
            const auto& rs = *g_.rule_set(rsId);
            rules::Evaluation ev;
            try {
                ev = rules::evaluate_ruleset_traced(rs, env);
            } catch (const rules::RuleEvalError& e) {
                throw PlanError(PlanError::Kind::RuleEvaluation,
                                "rule evaluation failed at " + path + " (" + rsId + "): " + e.what());
            }
            for (const auto& rid : ev.firedRuleIds) note("rule", rid, rsId);
            for (auto& [k, v] : ev.produced) {
                env.insert_or_assign(k, v);
                produced.insert_or_assign(k, v);
            }
        }
        return produced;
    }

    void tests(const std::vector<std::string>& ids, const rules::Bindings& env, const std::string& boundRef,
               const std::string& path) {
        for (const auto& tid : sorted(ids)) {
            const auto& t = *g_.test_spec(tid);
            Decimal threshold;
            if (t.thresholdSource == ThresholdSource::Literal) {
                threshold = t.thresholdValue.as_number();
            } else {
                const auto& name = t.thresholdValue.as_string();
                auto it = env.find(name);
                if (it == env.end() || !it->second.is_number()) {
                    throw PlanError(PlanError::Kind::UnresolvedThreshold, "test spec " + tid + " at " + path +
                                                                              ": characteristic '" + name +
                                                                              "' has no numeric value");
                }
                threshold = it->second.as_number();
            }
            note("testSpec", tid, boundRef);
            plan_.derivedTests.push_back(
                {tid, boundRef, threshold, t.kind, t.comparator, t.targetMetric, t.evaluationWindowTicks});
        }
    }

    static std::map<std::string, Scalar> resolve(const std::vector<CharacteristicSpec>& chars, const rules::Bindings& env) {
        std::map<std::string, Scalar> out;
        for (const auto& c : chars) {
            if (auto it = env.find(c.name); it != env.end()) out[c.name] = it->second;
            else if (c.defaultValue) out[c.name] = *c.defaultValue;
        }
        return out;
    }

    void service(const std::string& id, rules::Bindings env, const std::string& parentRef, const std::string& parentPath) {
        const auto& s = *g_.service_spec(id);
        std::string itemId = "so-" + pad3(++services_);
        std::string path = parentPath + " > " + s.id;
        note("serviceSpec", s.id, itemId);
        add_defaults(s.characteristics, env);
        auto produced = apply_rules(s.ruleSetIds, env, path);
        auto resolved = resolve(s.characteristics, env);
        for (auto& [k, v] : produced) resolved[k] = v;
        plan_.serviceOrders.push_back({itemId, s.id, std::move(resolved), parentRef});
        tests(s.testSpecIds, env, itemId, path);

        for (const auto& child : sorted(s.childServiceSpecIds)) service(child, env, itemId, path);
        // Stage 3: resource resolution at the leaves.
        for (const auto& rid : sorted(s.resourceSpecIds)) {
            const auto& r = *g_.resource_spec(rid);
            std::string rItem = "ro-" + pad3(++resources_);
            note("resourceSpec", r.id, rItem);
            auto rResolved = resolve(r.characteristics, env);
            plan_.resourceOrders.push_back({rItem, r.id, r.domain, rResolved, itemId});
            auto rEnv = env;
            for (const auto& [k, v] : rResolved) rEnv[k] = v;
            tests(r.testSpecIds, rEnv, rItem, path + " > " + r.id);
        }
    }

    const CatalogGraph& g_;
    OrchestrationPlan& plan_;
    std::vector<TraceEntry>* trace_;
    int services_ = 0;
    int resources_ = 0;
};

OrchestrationPlan traverse(const CatalogGraph& g, const std::string& intentId, std::vector<OfferingSelection> selections,
                           const IntentConstraints& constraints, const ServicePeriod& period,
                           std::vector<TraceEntry>* trace) {
    std::sort(selections.begin(), selections.end(),
              [](const OfferingSelection& a, const OfferingSelection& b) { return a.offeringId < b.offeringId; });
    OrchestrationPlan plan;
    plan.planId = "plan-" + intentId;
    plan.intentId = intentId;
    plan.catalogVersion = g.version;
    plan.selections = selections;
    plan.constraints = constraints;
    plan.period = period;
    Traverser t(g, plan, trace);
    for (const auto& sel : selections) t.selection(sel);
    plan.totalCost = compute_cost(g, selections, period.days);
    plan.canonicalDigest = compute_plan_digest(plan);
    return plan;
}

}  // namespace

OrchestrationPlan build_plan(const CatalogGraph& g, const ConfirmedIntent& intent) {
    validate_intent(g, intent);
    return traverse(g, intent.intentId, intent.offeringSelections, intent.constraints, intent.period, nullptr);
}

std::vector<TraceEntry> explain_plan(const OrchestrationPlan& plan, const CatalogGraph& g) {
    if (plan.catalogVersion != g.version) {
        throw PlanError(PlanError::Kind::VersionMismatch,
                        "plan was built against catalog " + plan.catalogVersion + ", not " + g.version);
    }
    for (const auto& s : plan.selections) {
        if (!g.offering(s.offeringId)) throw PlanError(PlanError::Kind::DanglingOffering, "unknown offering " + s.offeringId);
    }
    std::vector<TraceEntry> trace;
    auto replay = traverse(g, plan.intentId, plan.selections, plan.constraints, plan.period, &trace);
    if (replay.canonicalDigest != plan.canonicalDigest) {
        throw PlanError(PlanError::Kind::DigestMismatch, "plan " + plan.planId + " does not replay against this catalog");
    }
    return trace;
}

}  // namespace intentforge
