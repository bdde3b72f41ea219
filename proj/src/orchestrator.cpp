// SPDX-License-Identifier: Apache-2.0
#include "intentforge/orchestrator.hpp"

#include <algorithm>

namespace intentforge {

using nlohmann::json;

std::string_view to_string(ItemKind k) { return k == ItemKind::Service ? "service" : "resource"; }

std::string_view to_string(ItemState s) {
    switch (s) {
    case ItemState::Acknowledged: return "acknowledged";
    case ItemState::InProgress: return "inProgress";
    case ItemState::Completed: return "completed";
    case ItemState::Failed: return "failed";
    }
    return "acknowledged";
}

std::string_view to_string(EventKind k) {
    switch (k) {
    case EventKind::Fault: return "fault";
    case EventKind::Log: return "log";
    case EventKind::Performance: return "performance";
    }
    return "log";
}

std::string_view to_string(Severity s) {
    switch (s) {
    case Severity::Info: return "info";
    case Severity::Warn: return "warn";
    case Severity::Error: return "error";
    }
    return "info";
}

std::string_view to_string(RemediationAction a) { return a == RemediationAction::Retry ? "retry" : "reprovision"; }

std::optional<ItemState> item_state_from_string(std::string_view s) {
    for (auto v : {ItemState::Acknowledged, ItemState::InProgress, ItemState::Completed, ItemState::Failed}) {
        if (to_string(v) == s) return v;
    }
    return std::nullopt;
}

std::optional<RemediationAction> remediation_action_from_string(std::string_view s) {
    if (s == "retry") return RemediationAction::Retry;
    if (s == "reprovision") return RemediationAction::Reprovision;
    return std::nullopt;
}

bool legal_transition(ItemState from, ItemState to, bool remediation) {
    if (from == ItemState::Acknowledged) return to == ItemState::InProgress && !remediation;
    if (from == ItemState::InProgress) return (to == ItemState::Completed || to == ItemState::Failed) && !remediation;
    return to == ItemState::InProgress && remediation;
}

json to_json(const ProvisioningItem& i) {
    json j{{"itemId", i.itemId},
           {"planRef", i.planRef},
           {"kind", std::string(to_string(i.kind))},
           {"specId", i.specId},
           {"dependsOn", i.dependsOn},
           {"rootRef", i.rootRef},
           {"state", std::string(to_string(i.state))},
           {"startedTick", i.startedTick},
           {"completedTick", i.completedTick},
           {"attempts", i.attempts}};
    j["domain"] = i.domain ? json(std::string(to_string(*i.domain))) : json(nullptr);
    return j;
}

json to_json(const TelemetryEvent& e) {
    json j{{"tick", e.tick},
           {"itemRef", e.itemRef},
           {"kind", std::string(to_string(e.kind))},
           {"severity", std::string(to_string(e.severity))},
           {"detail", e.detail}};
    if (e.metric) j["metric"] = {{"name", e.metric->name}, {"value", to_json_value(e.metric->value)}, {"unit", e.metric->unit}};
    return j;
}

TelemetryEvent telemetry_from_json(const json& j) {
    TelemetryEvent e;
    e.tick = j.at("tick").get<std::int64_t>();
    e.itemRef = j.at("itemRef").get<std::string>();
    auto kind = j.at("kind").get<std::string>();
    e.kind = kind == "fault" ? EventKind::Fault : kind == "performance" ? EventKind::Performance : EventKind::Log;
    auto sev = j.value("severity", "info");
    e.severity = sev == "error" ? Severity::Error : sev == "warn" ? Severity::Warn : Severity::Info;
    e.detail = j.value("detail", json::object());
    if (j.contains("metric")) {
        const auto& m = j["metric"];
        e.metric = Metric{m.at("name").get<std::string>(), decimal_from_json(m.at("value")), m.value("unit", "")};
    }
    return e;
}

bool FaultPlan::matches(const ProvisioningItem& item) const {
    if (!itemMatcher.empty() && itemMatcher.back() == '*') {
        auto prefix = std::string_view(itemMatcher).substr(0, itemMatcher.size() - 1);
        return item.itemId.rfind(prefix, 0) == 0 || item.specId.rfind(prefix, 0) == 0;
    }
    return item.itemId == itemMatcher || item.specId == itemMatcher;
}

std::map<std::string, MetricProfile> default_metric_profile() {
    return {{"latencyMs", {Decimal::from_int(12), Decimal::from_int(1), "ms"}},
            {"throughputMbps", {Decimal::from_int(800), Decimal::from_int(20), "Mbps"}},
            {"connectivity", {Decimal::from_int(1), Decimal{}, "heartbeat"}},
            {"sliceAdmitted", {Decimal::from_int(1), Decimal{}, "heartbeat"}},
            {"apiAvailable", {Decimal::from_int(1), Decimal{}, "heartbeat"}}};
}

RunConfig RunConfig::uniform(int ticks, std::uint64_t seed) {
    RunConfig c;
    for (auto d : {Domain::RAN, Domain::Transport, Domain::Core, Domain::Infrastructure}) c.controllers[d] = Controller{d, ticks, {}};
    c.serviceStepDurationTicks = ticks;
    c.seed = seed;
    return c;
}

namespace {

json fault_json(const FaultPlan& f) { return {{"itemMatcher", f.itemMatcher}, {"failOnAttempt", f.failOnAttempt}}; }

FaultPlan fault_from_json(const json& j) {
    FaultPlan f{j.at("itemMatcher").get<std::string>(), j.value("failOnAttempt", 1)};
    if (f.failOnAttempt < 1) throw std::invalid_argument("failOnAttempt must be positive");
    return f;
}

int positive(const json& j, const char* key, int fallback) {
    int v = j.value(key, fallback);
    if (v < 1) throw std::invalid_argument(std::string(key) + " must be positive");
    return v;
}

}  // namespace

json to_json(const RunConfig& c) {
    json ctl = json::object();
    for (const auto& [d, k] : c.controllers) {
        json one{{"stepDurationTicks", k.stepDurationTicks}};
        if (k.faultPlan) one["faultPlan"] = fault_json(*k.faultPlan);
        ctl[std::string(to_string(d))] = one;
    }
    json faults = json::array();
    for (const auto& f : c.faultPlans) faults.push_back(fault_json(f));
    json profile = json::object();
    for (const auto& [name, p] : c.metricProfile) {
        profile[name] = {{"steady", to_json_value(p.steady)}, {"noise", to_json_value(p.noise)}, {"unit", p.unit}};
    }
    return {{"controllers", ctl},
            {"serviceStepDurationTicks", c.serviceStepDurationTicks},
            {"faultPlans", faults},
            {"seed", c.seed},
            {"maxAttempts", c.maxAttempts},
            {"remediation", {{"requireApproval", c.requireApproval}}},
            {"metricProfile", profile}};
}

RunConfig run_config_from_json(const json& j) {
    RunConfig c = RunConfig::uniform(3);
    const auto controllers = j.value("controllers", json::object());
    for (const auto& [name, v] : controllers.items()) {
        auto d = domain_from_string(name);
        if (!d) throw std::invalid_argument("unknown controller domain: " + name);
        auto& k = c.controllers[*d];
        k.stepDurationTicks = positive(v, "stepDurationTicks", 3);
        if (v.contains("faultPlan") && !v["faultPlan"].is_null()) k.faultPlan = fault_from_json(v["faultPlan"]);
    }
    c.serviceStepDurationTicks = positive(j, "serviceStepDurationTicks", 3);
    for (const auto& f : j.value("faultPlans", json::array())) c.faultPlans.push_back(fault_from_json(f));
    c.seed = j.value("seed", std::uint64_t{42});
    c.maxAttempts = positive(j, "maxAttempts", 3);
    c.requireApproval = j.value("remediation", json::object()).value("requireApproval", false);
    const auto profile = j.value("metricProfile", json::object());
    for (const auto& [name, p] : profile.items()) {
        c.metricProfile[name] = {decimal_from_json(p.at("steady")), decimal_from_json(p.value("noise", json(0))), p.value("unit", "")};
    }
    return c;
}

OrchestratorError::OrchestratorError(Kind k, const std::string& what) : std::runtime_error(what), kind(k) {}

json to_json(const RemediationAck& a) {
    return {{"accepted", a.accepted}, {"degraded", a.degraded}, {"attempt", a.attempt}, {"detail", a.detail}};
}

// ---------------------------------------------------------------- run

Run::Run(std::string runId, const OrchestrationPlan& plan, const RunConfig& config)
    : id_(std::move(runId)), planId_(plan.planId), config_(config), rng_(config.seed) {
    std::map<std::string, std::string> rootOf;
    for (const auto& so : plan.serviceOrders) {
        ProvisioningItem it;
        it.itemId = so.itemId;
        it.planRef = plan.planId;
        it.kind = ItemKind::Service;
        it.specId = so.serviceSpecId;
        if (is_root_ref(so.parentRef)) {
            it.rootRef = so.parentRef;
        } else {
            it.dependsOn = so.parentRef;
            it.rootRef = rootOf.at(so.parentRef);
        }
        rootOf[it.itemId] = it.rootRef;
        items_.push_back(std::move(it));
    }
    for (const auto& ro : plan.resourceOrders) {
        ProvisioningItem it;
        it.itemId = ro.itemId;
        it.planRef = plan.planId;
        it.kind = ItemKind::Resource;
        it.domain = ro.domain;
        it.specId = ro.resourceSpecId;
        it.dependsOn = ro.parentServiceRef;
        it.rootRef = rootOf.at(ro.parentServiceRef);
        items_.push_back(std::move(it));
    }
    for (const auto& sel : plan.selections) roots_[root_ref(sel.offeringId)];
    for (const auto& it : items_) roots_[it.rootRef].push_back(it.itemId);
    for (const auto& t : plan.derivedTests) {
        auto& m = metrics_[t.boundRef];
        if (std::find(m.begin(), m.end(), t.targetMetric) == m.end()) m.push_back(t.targetMetric);
    }
}

const ProvisioningItem* Run::item(std::string_view id) const {
    for (const auto& it : items_) {
        if (it.itemId == id) return &it;
    }
    return nullptr;
}

std::size_t Run::count(ItemState s) const {
    return static_cast<std::size_t>(std::count_if(items_.begin(), items_.end(), [s](const auto& i) { return i.state == s; }));
}

bool Run::completed() const { return pending_.empty() && count(ItemState::Completed) == items_.size(); }

bool Run::stalled() const {
    if (completed() || !pending_.empty() || count(ItemState::InProgress) > 0) return false;
    for (const auto& it : items_) {
        if (it.state == ItemState::Acknowledged && (it.dependsOn.empty() || item(it.dependsOn)->state == ItemState::Completed))
            return false;
    }
    return true;
}

bool Run::root_completed(const std::string& rootRef) const {
    auto it = roots_.find(rootRef);
    if (it == roots_.end()) return false;
    return std::all_of(it->second.begin(), it->second.end(), [&](const auto& id) { return item(id)->state == ItemState::Completed; });
}

int Run::duration_for(const ProvisioningItem& item) const {
    if (item.kind == ItemKind::Service) return config_.serviceStepDurationTicks;
    return config_.controllers.at(*item.domain).stepDurationTicks;
}

bool Run::fault_fires(const ProvisioningItem& item) const {
    auto fires = [&](const FaultPlan& f) { return f.failOnAttempt == item.attempts && f.matches(item); };
    if (item.domain) {
        const auto& fp = config_.controllers.at(*item.domain).faultPlan;
        if (fp && fires(*fp)) return true;
    }
    return std::any_of(config_.faultPlans.begin(), config_.faultPlans.end(), fires);
}

Metric Run::sample(const std::string& metric) {
    auto p = config_.metricProfile.find(metric);
    if (p == config_.metricProfile.end()) return {metric, Decimal::from_int(1), ""};
    auto steps = p->second.noise.scaled() / 100;
    auto k = steps > 0 ? static_cast<std::int64_t>(rng_() % static_cast<std::uint64_t>(2 * steps + 1)) - steps : 0;
    return {metric, p->second.steady + Decimal::from_scaled(k * 100), p->second.unit};
}

void Run::transition(ProvisioningItem& item, ItemState to, std::vector<TelemetryEvent>& out, bool remediation) {
    TelemetryEvent e;
    e.tick = now_;
    e.itemRef = item.itemId;
    e.kind = EventKind::Log;
    e.detail = {{"from", std::string(to_string(item.state))}, {"to", std::string(to_string(to))}, {"attempt", item.attempts}};
    if (remediation) e.detail["remediation"] = true;
    if (to == ItemState::Failed) e.severity = Severity::Warn;
    item.state = to;
    out.push_back(std::move(e));
}

std::vector<TelemetryEvent> Run::tick() {
    ++now_;
    std::vector<TelemetryEvent> out;

    for (const auto& [id, action] : pending_) {
        auto& it = *std::find_if(items_.begin(), items_.end(), [&](const auto& i) { return i.itemId == id; });
        ++it.attempts;
        ++it.remediations;
        it.startedTick = now_;
        it.completedTick = -1;
        transition(it, ItemState::InProgress, out, true);
        out.back().detail["action"] = std::string(to_string(action));
    }
    pending_.clear();

    for (auto& it : items_) {
        if (it.state != ItemState::InProgress || it.startedTick + duration_for(it) > now_) continue;
        if (fault_fires(it)) {
            it.completedTick = -1;
            transition(it, ItemState::Failed, out, false);
            TelemetryEvent f;
            f.tick = now_;
            f.itemRef = it.itemId;
            f.kind = EventKind::Fault;
            f.severity = Severity::Error;
            f.detail = {{"attempt", it.attempts}, {"reason", "injected fault"}};
            out.push_back(std::move(f));
        } else {
            it.completedTick = now_;
            transition(it, ItemState::Completed, out, false);
        }
    }

    for (const auto& [root, ids] : roots_) {
        bool up = root_completed(root);
        auto& was = rootUp_[root];
        if (up == was.first) continue;
        was = {up, now_};
        TelemetryEvent e;
        e.tick = now_;
        e.itemRef = root;
        e.detail = {{"root", true}, {"up", up}};
        out.push_back(std::move(e));
    }

    for (auto& it : items_) {
        if (it.state != ItemState::Acknowledged) continue;
        if (!it.dependsOn.empty() && item(it.dependsOn)->state != ItemState::Completed) continue;
        it.attempts = 1;
        it.startedTick = now_;
        transition(it, ItemState::InProgress, out, false);
    }

    for (const auto& [ref, names] : metrics_) {
        bool up = false;
        if (is_root_ref(ref)) {
            auto r = rootUp_.find(ref);
            up = r != rootUp_.end() && r->second.first && r->second.second < now_;
        } else if (auto* it = item(ref)) {
            up = it->state == ItemState::Completed && it->completedTick < now_;
        }
        if (!up) continue;
        for (const auto& name : names) {
            TelemetryEvent e;
            e.tick = now_;
            e.itemRef = ref;
            e.kind = EventKind::Performance;
            e.metric = sample(name);
            out.push_back(std::move(e));
        }
    }

    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.itemRef < b.itemRef; });
    events_.insert(events_.end(), out.begin(), out.end());
    return out;
}

RemediationAck Run::remediate(const std::string& itemRef, RemediationAction action) {
    auto* it = item(itemRef);
    if (!it) throw OrchestratorError(OrchestratorError::Kind::UnknownItem, "unknown item: " + itemRef);
    auto illegal = [&](const std::string& why) {
        return OrchestratorError(OrchestratorError::Kind::IllegalState,
                                 std::string(to_string(action)) + " on " + itemRef + " (" + std::string(to_string(it->state)) + "): " + why);
    };
    if (action != RemediationAction::Retry && action != RemediationAction::Reprovision)
        throw OrchestratorError(OrchestratorError::Kind::IllegalState, "unknown remediation action");
    if (action == RemediationAction::Retry && it->state != ItemState::Failed) throw illegal("retry needs a failed item");
    if (action == RemediationAction::Reprovision && it->state != ItemState::Completed && it->state != ItemState::Failed)
        throw illegal("reprovision needs a completed or failed item");
    if (pending_.count(itemRef)) throw illegal("a remediation is already queued");
    if (!it->dependsOn.empty() && (item(it->dependsOn)->state != ItemState::Completed || pending_.count(it->dependsOn)))
        throw illegal("parent " + it->dependsOn + " is not completed");
    for (const auto& other : items_) {
        if (other.dependsOn == itemRef && (other.state == ItemState::InProgress || pending_.count(other.itemId)))
            throw illegal("dependent " + other.itemId + " is in flight");
    }
    if (it->remediations >= config_.maxAttempts) {
        degraded_ = true;
        return {false, true, it->attempts, "maxAttempts exhausted; run degraded"};
    }
    pending_[itemRef] = action;
    return {true, false, it->attempts + 1, std::string(to_string(action)) + " queued"};
}

// ---------------------------------------------------------------- engine

Engine::Engine(RunConfig config) : config_(std::move(config)) {}

std::string Engine::execute_plan(const OrchestrationPlan& plan) {
    if (!verify_plan_digest(plan)) throw OrchestratorError(OrchestratorError::Kind::DigestMismatch, "plan digest does not verify: " + plan.planId);
    for (const auto& ro : plan.resourceOrders) {
        if (!config_.controllers.count(ro.domain))
            throw OrchestratorError(OrchestratorError::Kind::MissingController,
                                    "no controller for domain " + std::string(to_string(ro.domain)) + " (" + ro.itemId + ")");
    }
    std::lock_guard lock(mu_);
    if (byDigest_.count(plan.canonicalDigest))
        throw OrchestratorError(OrchestratorError::Kind::DuplicateRun, "plan already running as " + byDigest_[plan.canonicalDigest]);
    auto id = "run-" + plan.canonicalDigest.substr(0, 12);
    runs_[id] = std::make_unique<Run>(id, plan, config_);
    byDigest_[plan.canonicalDigest] = id;
    return id;
}

Run& Engine::run(const std::string& runId) {
    std::lock_guard lock(mu_);
    auto it = runs_.find(runId);
    if (it == runs_.end()) throw OrchestratorError(OrchestratorError::Kind::UnknownRun, "unknown run: " + runId);
    return *it->second;
}

std::vector<std::string> Engine::run_ids() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : runs_) out.push_back(id);
    return out;
}

}  // namespace intentforge
