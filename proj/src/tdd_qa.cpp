// SPDX-License-Identifier: Apache-2.0
#include "intentforge/tdd_qa.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "intentforge/bus.hpp"
#include "intentforge/canonical.hpp"

namespace intentforge {

using nlohmann::json;

std::string_view to_string(TestStatus s) { return s == TestStatus::Green ? "green" : "red"; }

std::string_view to_string(Overall o) {
    switch (o) {
    case Overall::Compliant: return "compliant";
    case Overall::Violated: return "violated";
    case Overall::Settling: return "settling";
    }
    return "settling";
}

json to_json(const TestInstance& t) {
    json hist = json::array();
    for (const auto& h : t.history) {
        hist.push_back({{"tick", h.tick},
                        {"observed", h.observed ? to_json_value(*h.observed) : json(nullptr)},
                        {"verdict", std::string(to_string(h.verdict))}});
    }
    return {{"testInstanceId", t.testInstanceId},
            {"derivedFrom", t.derivedFrom},
            {"testSpecId", t.test.testSpecId},
            {"kind", std::string(to_string(t.test.kind))},
            {"targetMetric", t.test.targetMetric},
            {"comparator", std::string(to_string(t.test.comparator))},
            {"threshold", to_json_value(t.test.resolvedThreshold)},
            {"evaluationWindowTicks", t.test.evaluationWindowTicks},
            {"boundItemRef", t.boundItemRef},
            {"status", std::string(to_string(t.status))},
            {"lastEvaluationTick", t.lastEvaluationTick},
            {"history", hist}};
}

std::vector<TestInstance> instantiate_tests(const OrchestrationPlan& plan) {
    std::vector<TestInstance> out;
    for (std::size_t i = 0; i < plan.derivedTests.size(); ++i) {
        char id[24];
        std::snprintf(id, sizeof id, "ti-%03zu", i + 1);
        TestInstance t;
        t.testInstanceId = id;
        t.derivedFrom = i;
        t.test = plan.derivedTests[i];
        t.boundItemRef = t.test.boundRef;
        out.push_back(std::move(t));
    }
    return out;
}

json to_json(const StatusTransition& t) {
    return {{"testInstanceId", t.testInstanceId},
            {"boundItemRef", t.boundItemRef},
            {"from", std::string(to_string(t.from))},
            {"to", std::string(to_string(t.to))},
            {"tick", t.tick},
            {"cause", t.cause}};
}

json to_json(const RemediationRequest& r) {
    return {{"testInstanceId", r.testInstanceId},
            {"itemRef", r.itemRef},
            {"attempt", r.attempt},
            {"action", std::string(to_string(r.action))},
            {"tick", r.tick},
            {"reason", r.reason},
            {"requiresApproval", r.requiresApproval}};
}

json to_json(const SlaReport& r) {
    json per = json::array();
    for (const auto& t : r.perTest) {
        per.push_back({{"testInstanceId", t.testInstanceId},
                       {"testSpecId", t.testSpecId},
                       {"boundItemRef", t.boundItemRef},
                       {"status", std::string(to_string(t.status))},
                       {"redTicks", t.redTicks},
                       {"greenTicks", t.greenTicks},
                       {"violations", t.violations}});
    }
    return {{"runRef", r.runRef}, {"durationTicks", r.durationTicks}, {"perTest", per}, {"overall", std::string(to_string(r.overall))}};
}

std::string canonical_report(const SlaReport& r) { return canonical_json(to_json(r)); }

// ---------------------------------------------------------------- pipeline

Pipeline::Pipeline(const OrchestrationPlan& plan, std::string runRef, QaConfig config)
    : runRef_(std::move(runRef)), config_(config), instances_(instantiate_tests(plan)), tracks_(instances_.size()) {
    for (std::size_t i = 0; i < instances_.size(); ++i) byRef_[instances_[i].boundItemRef].push_back(i);
}

const TestInstance* Pipeline::instance(std::string_view id) const {
    for (const auto& t : instances_) {
        if (t.testInstanceId == id) return &t;
    }
    return nullptr;
}

bool Pipeline::item_completed(const std::string& ref) const {
    auto it = itemState_.find(ref);
    return it != itemState_.end() && it->second == "completed";
}

int Pipeline::item_attempt(const std::string& ref) const {
    auto it = itemAttempt_.find(ref);
    return it == itemAttempt_.end() ? 1 : it->second;
}

TestStatus Pipeline::window_verdict(const TestInstance& t, const Track& k, std::int64_t tick) const {
    const auto w = std::max(1, t.test.evaluationWindowTicks);
    auto pass = [&](Decimal v) { return compare(t.test.comparator, v, t.test.resolvedThreshold); };
    if (is_presence_kind(t.test.kind)) {
        for (auto it = k.samples.upper_bound(tick - w); it != k.samples.end() && it->first <= tick; ++it) {
            if (pass(it->second)) return TestStatus::Green;
        }
        return TestStatus::Red;
    }
    for (auto s = tick - w + 1; s <= tick; ++s) {
        auto it = k.samples.find(s);
        if (it == k.samples.end() || !pass(it->second)) return TestStatus::Red;
    }
    return TestStatus::Green;
}

void Pipeline::set_status(TestInstance& t, TestStatus to, std::int64_t tick, const std::string& cause, std::vector<StatusTransition>& out) {
    if (t.status == to) return;
    auto& k = tracks_[static_cast<std::size_t>(&t - instances_.data())];
    StatusTransition tr{t.testInstanceId, t.boundItemRef, t.status, to, tick, cause};
    t.status = to;
    if (to == TestStatus::Green) {
        k.everGreen = true;
        k.requestedAttempt.reset();
    } else if (k.everGreen) {
        ++k.violations;
    }
    out.push_back(tr);
    on_red(tr);
}

void Pipeline::raise(RemediationRequest r) {
    auto key = std::make_pair(r.testInstanceId.empty() ? "item:" + r.itemRef : r.testInstanceId, r.attempt);
    if (!raised_.insert(key).second) return;
    r.requiresApproval = config_.requireApproval;
    for (std::size_t i = 0; i < instances_.size(); ++i) {
        if (instances_[i].testInstanceId == r.testInstanceId) tracks_[i].requestedAttempt = r.attempt;
    }
    newRequests_.push_back(r);
    allRequests_.push_back(std::move(r));
}

std::optional<RemediationRequest> Pipeline::on_red(const StatusTransition& tr) {
    if (tr.from != TestStatus::Green || tr.to != TestStatus::Red) return std::nullopt;
    if (is_root_ref(tr.boundItemRef) || !item_completed(tr.boundItemRef)) return std::nullopt;
    auto before = allRequests_.size();
    raise({tr.testInstanceId, tr.boundItemRef, item_attempt(tr.boundItemRef), RemediationAction::Reprovision, tr.tick, "regression", false});
    if (allRequests_.size() == before) return std::nullopt;
    return allRequests_.back();
}

void Pipeline::close_tick(std::int64_t tick, std::vector<StatusTransition>& out) {
    for (std::size_t i = 0; i < instances_.size(); ++i) {
        auto& t = instances_[i];
        auto& k = tracks_[i];
        if (t.status == TestStatus::Green && window_verdict(t, k, tick) == TestStatus::Red) {
            t.history.push_back({tick, std::nullopt, TestStatus::Red});
            t.lastEvaluationTick = tick;
            set_status(t, TestStatus::Red, tick, "absence", out);
        }
        if (t.status == TestStatus::Red && !is_root_ref(t.boundItemRef) && item_completed(t.boundItemRef)) {
            auto grace = static_cast<std::int64_t>(config_.graceWindows) * std::max(1, t.test.evaluationWindowTicks);
            if (tick - completedAt_[t.boundItemRef] >= grace) {
                raise({t.testInstanceId, t.boundItemRef, item_attempt(t.boundItemRef), RemediationAction::Reprovision, tick,
                       "persistentRed", false});
            }
        }
        if (t.status == TestStatus::Green) {
            ++k.greenTicks;
            ++k.greenStreak;
        } else {
            ++k.redTicks;
            k.greenStreak = 0;
        }
    }
    closed_ = tick;
}

std::vector<StatusTransition> Pipeline::advance_to(std::int64_t tick) {
    std::vector<StatusTransition> out;
    while (closed_ < tick) close_tick(closed_ + 1, out);
    return out;
}

std::vector<StatusTransition> Pipeline::evaluate(const TelemetryEvent& ev) {
    auto out = advance_to(ev.tick - 1);
    auto bound = byRef_.find(ev.itemRef);
    switch (ev.kind) {
    case EventKind::Log:
        if (ev.detail.value("root", false)) {
            bool up = ev.detail.value("up", false);
            itemState_[ev.itemRef] = up ? "completed" : "inProgress";
            if (up) completedAt_[ev.itemRef] = ev.tick;
        } else if (ev.detail.contains("to")) {
            auto to = ev.detail["to"].get<std::string>();
            itemState_[ev.itemRef] = to;
            itemAttempt_[ev.itemRef] = ev.detail.value("attempt", 1);
            if (to == "completed") completedAt_[ev.itemRef] = ev.tick;
        }
        break;
    case EventKind::Fault: {
        int attempt = ev.detail.value("attempt", item_attempt(ev.itemRef));
        itemState_[ev.itemRef] = "failed";
        if (bound == byRef_.end()) {
            raise({"", ev.itemRef, attempt, RemediationAction::Retry, ev.tick, "fault", false});
            break;
        }
        for (auto i : bound->second) {
            set_status(instances_[i], TestStatus::Red, ev.tick, "fault", out);
            raise({instances_[i].testInstanceId, ev.itemRef, attempt, RemediationAction::Retry, ev.tick, "fault", false});
        }
        break;
    }
    case EventKind::Performance: {
        if (bound == byRef_.end() || !ev.metric) break;
        bool matched = false;
        for (auto i : bound->second) {
            auto& t = instances_[i];
            if (t.test.targetMetric != ev.metric->name) continue;
            matched = true;
            auto& k = tracks_[i];
            k.samples[ev.tick] = ev.metric->value;
            auto v = window_verdict(t, k, ev.tick);
            t.history.push_back({ev.tick, ev.metric->value, v});
            t.lastEvaluationTick = ev.tick;
            set_status(t, v, ev.tick, "sample", out);
        }
        if (!matched) warnings_.push_back("tick " + std::to_string(ev.tick) + ": no bound test expects metric " + ev.metric->name + " on " + ev.itemRef);
        break;
    }
    }
    return out;
}

std::vector<RemediationRequest> Pipeline::take_requests() { return std::exchange(newRequests_, {}); }

SlaReport Pipeline::report() const {
    SlaReport r;
    r.runRef = runRef_;
    r.durationTicks = closed_;
    bool allSettledGreen = true;
    bool violated = false;
    for (std::size_t i = 0; i < instances_.size(); ++i) {
        const auto& t = instances_[i];
        const auto& k = tracks_[i];
        r.perTest.push_back({t.testInstanceId, t.test.testSpecId, t.boundItemRef, t.status, k.redTicks, k.greenTicks, k.violations});
        if (t.status != TestStatus::Green || k.greenStreak < std::max(1, t.test.evaluationWindowTicks)) allSettledGreen = false;
        if (t.status == TestStatus::Red) {
            auto st = itemState_.find(t.boundItemRef);
            bool failed = st != itemState_.end() && st->second == "failed";
            if (k.everGreen || k.requestedAttempt || failed) violated = true;
        }
    }
    r.overall = allSettledGreen ? Overall::Compliant : violated ? Overall::Violated : Overall::Settling;
    return r;
}

// ---------------------------------------------------------------- loop

namespace {

QaConfig merged(QaConfig c, const Run& run) {
    c.requireApproval = c.requireApproval || run.config().requireApproval;
    return c;
}

}  // namespace

AssuranceLoop::AssuranceLoop(Run& run, const OrchestrationPlan& plan, QaConfig config, bus::MessageBus* bus, LoopSink sink)
    : run_(run), config_(merged(config, run)), pipeline_(plan, run.id(), config_), bus_(bus), sink_(std::move(sink)) {
    if (run.now() != 0) throw std::logic_error("tests must be instantiated before the run dispatches any item");
    for (const auto& t : plan.derivedTests) maxWindow_ = std::max<std::int64_t>(maxWindow_, t.evaluationWindowTicks);
}

void AssuranceLoop::emit(const std::string& kind, const json& body) {
    if (sink_) sink_(kind, body);
}

void AssuranceLoop::step() {
    auto publish = [&](const std::vector<StatusTransition>& trs) {
        for (const auto& tr : trs) {
            auto body = to_json(tr);
            body["runRef"] = run_.id();
            emit("testTransition", body);
            if (bus_) bus_->publish("qa/transitions", body, std::nullopt, "tdd-qa");
        }
    };
    for (const auto& ev : run_.tick()) {
        if (ev.kind == EventKind::Log) {
            auto body = to_json(ev);
            body["runRef"] = run_.id();
            emit("itemTransition", body);
        }
        publish(pipeline_.evaluate(ev));
    }
    publish(pipeline_.advance_to(run_.now()));
    for (const auto& req : pipeline_.take_requests()) {
        auto body = to_json(req);
        body["runRef"] = run_.id();
        if (!req.requiresApproval) {
            try {
                body["ack"] = to_json(run_.remediate(req.itemRef, req.action));
            } catch (const OrchestratorError& e) {
                body["ack"] = {{"accepted", false}, {"degraded", false}, {"attempt", 0}, {"detail", e.what()}};
            }
        }
        emit("remediationRequest", body);
    }
}

bool AssuranceLoop::finish() {
    if (!reported_) emit("runReport", to_json(pipeline_.report()));
    reported_ = true;
    return false;
}

bool AssuranceLoop::advance() {
    if (run_.completed() && pipeline_.report().overall == Overall::Compliant) return finish();
    if (run_.stalled()) {
        if (++stalled_ > config_.graceWindows * maxWindow_) return finish();
    } else {
        stalled_ = 0;
    }
    step();
    reported_ = false;
    return true;
}

SlaReport AssuranceLoop::run_until_settled(int maxTicks) {
    for (int i = 0; i < maxTicks && advance(); ++i) {
    }
    finish();
    return pipeline_.report();
}

RemediationAck AssuranceLoop::approve(const RemediationRequest& request) {
    auto ack = run_.remediate(request.itemRef, request.action);
    auto body = to_json(request);
    body["runRef"] = run_.id();
    body["approved"] = true;
    body["ack"] = to_json(ack);
    emit("remediationRequest", body);
    return ack;
}

}  // namespace intentforge
