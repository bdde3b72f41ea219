// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <filesystem>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "intentforge/canonical.hpp"
#include "intentforge/cocreation/agent.hpp"
#include "oracles.hpp"
#include "session_fuzz.hpp"

namespace intentforge::cocreation {
namespace {

using nlohmann::json;

const CatalogGraph& fixture() {
    static const CatalogGraph g = load_catalog_file(testing::fixture_path());
    return g;
}

const std::vector<std::string>& Q() { return testing::benchmark_turns(); }

using testing::CollectingSink;
using testing::count_vetoes;
using testing::ScriptCase;

const Task& task(const Session& s, TaskKind k) {
    for (const auto& t : s.taskList.tasks()) {
        if (t.kind == k) return t;
    }
    throw std::runtime_error("no task");
}

std::vector<std::string> selected(const Session& s) {
    std::vector<std::string> ids;
    for (const auto& sel : s.draft.offeringSelections) ids.push_back(sel.offeringId);
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::vector<std::string> sorted(std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    return v;
}

// ------------------------------------------------------------ interpretation

TEST(Interpret, BenchmarkIntent) {
    Session s;
    s.sessionId = "s";
    s.transcript.push_back({0, Role::User, Q()[0], 1, 0, json::object()});
    auto g = interpret_intent(s, 0);
    ASSERT_TRUE(g);
    EXPECT_NE(g->objective.find("sports media"), std::string::npos);
    EXPECT_NE(g->objective.find("Patras"), std::string::npos);
    EXPECT_EQ(g->latest(ConstraintName::Location)->as_string(), "Patras");
    EXPECT_EQ(g->latest(ConstraintName::Duration)->as_number().to_int(), 7);
    auto has = [&](const std::string& m) {
        return std::find(g->missingInfo.begin(), g->missingInfo.end(), m) != g->missingInfo.end();
    };
    EXPECT_TRUE(has("startDate"));
    EXPECT_TRUE(has("budget"));
    for (const auto& c : g->explicitConstraints) EXPECT_EQ(c.turn, 0);
    auto f = g->features;
    EXPECT_NE(std::find(f.begin(), f.end(), "5g"), f.end());
    EXPECT_NE(std::find(f.begin(), f.end(), "media"), f.end());
    EXPECT_NE(std::find(f.begin(), f.end(), "monitor"), f.end());
    EXPECT_EQ(std::find(f.begin(), f.end(), "api"), f.end());
}

TEST(Interpret, UsersAppendedWithProvenance) {
    Session s;
    s.sessionId = "s";
    s.transcript.push_back({0, Role::User, Q()[0], 1, 0, json::object()});
    interpret_intent(s, 0);
    s.transcript.push_back({1, Role::Agent, "ok", 2, 0, json::object()});
    s.transcript.push_back({2, Role::User, "I need 1000 simultaneous users", 3, 0, json::object()});
    auto g = interpret_intent(s, 2);
    ASSERT_TRUE(g);
    auto it = std::find_if(g->explicitConstraints.begin(), g->explicitConstraints.end(),
                           [](const GoalConstraint& c) { return c.name == ConstraintName::MinConcurrentUsers; });
    ASSERT_NE(it, g->explicitConstraints.end());
    EXPECT_EQ(it->value.as_number().to_int(), 1000);
    EXPECT_EQ(it->turn, 2);
}

TEST(Interpret, ExtractionExamples) {
    auto b = extract(Q()[1]);
    ASSERT_TRUE(b.budget);
    EXPECT_EQ(*b.budget, Money::euros(9000));
    EXPECT_FALSE(extract(Q()[2]).budget);
    EXPECT_EQ(extract(Q()[2]).users, 1000);
    auto d = extract(Q()[3]);
    EXPECT_EQ(format_iso_date(*d.startDate), "2026-11-02");
    EXPECT_EQ(d.durationDays, 7);
    EXPECT_EQ(format_iso_date(*extract("starting November 2, 2026").startDate), "2026-11-02");
    EXPECT_EQ(extract("for two weeks").durationDays, 14);
    EXPECT_EQ(extract("latency under 10 ms").latencyCeilingMs, Decimal::from_int(10));
    EXPECT_TRUE(extract(Q()[4]).affirmation);
    EXPECT_TRUE(extract("yes, proceed").affirmation);
    EXPECT_FALSE(extract("no, do not proceed").affirmation);
    EXPECT_FALSE(extract("Yes but wait for the new dates").affirmation);
    EXPECT_FALSE(extract("I have 9000 euros").budget);
}

TEST(Interpret, EmptyMessageAsksForInput) {
    Agent a(fixture(), make_reference_reasoner(), "empty");
    auto turns = a.send("   ");
    EXPECT_FALSE(a.session().goal);
    EXPECT_TRUE(a.session().taskList.empty());
    ASSERT_EQ(turns.size(), 2u);
    EXPECT_EQ(turns[1].role, Role::Agent);
    EXPECT_EQ(a.session().status, SessionStatus::AwaitingUser);
}

TEST(Decompose, SixPendingTasksIdempotent) {
    Session s;
    s.sessionId = "s";
    s.transcript.push_back({0, Role::User, Q()[0], 1, 0, json::object()});
    interpret_intent(s, 0);
    decompose_goal(s);
    ASSERT_EQ(s.taskList.tasks().size(), 6u);
    std::set<TaskKind> kinds;
    for (const auto& t : s.taskList.tasks()) {
        EXPECT_EQ(t.state, TaskState::Pending);
        EXPECT_FALSE(t.acceptanceCriteria.empty());
        kinds.insert(t.kind);
    }
    EXPECT_EQ(kinds.size(), 6u);
    decompose_goal(s);
    EXPECT_EQ(s.taskList.tasks().size(), 6u);

    Session bare;
    bare.sessionId = "b";
    bare.transcript.push_back({0, Role::User, "hello", 1, 0, json::object()});
    interpret_intent(bare, 0);
    decompose_goal(bare);
    EXPECT_EQ(bare.taskList.tasks().size(), 6u);
}

// ------------------------------------------------------------ reference session

struct Run {
    std::unique_ptr<Agent> agent;
    std::unique_ptr<InventoryStore> inventory;
    std::unique_ptr<CollectingSink> sink;
};

Run make_run(std::unique_ptr<Reasoner> r, const std::string& id = "bench-1") {
    Run run;
    run.inventory = std::make_unique<InventoryStore>(fixture());
    run.sink = std::make_unique<CollectingSink>();
    run.agent = std::make_unique<Agent>(fixture(), std::move(r), id, AgentConfig{}, std::make_shared<LogicalClock>(),
                                        run.inventory.get(), run.sink.get());
    run.sink->session = &run.agent->session();
    return run;
}

TEST(ReferenceSession, Q1DiscoversAndProposesPremium) {
    auto run = make_run(make_reference_reasoner());
    run.agent->send(Q()[0]);
    const auto& s = run.agent->session();
    const auto& disc = task(s, TaskKind::Discovery);
    EXPECT_EQ(disc.state, TaskState::Completed);
    EXPECT_EQ(disc.evidence.size(), 9u);
    for (const auto& e : disc.evidence) {
        EXPECT_EQ(e.kind, EvidenceKind::CatalogEntity);
        EXPECT_TRUE(fixture().offering(e.ref));
    }
    EXPECT_EQ(task(s, TaskKind::BundleProposal).state, TaskState::Completed);
    EXPECT_EQ(task(s, TaskKind::CostQuotation).state, TaskState::Completed);
    EXPECT_EQ(task(s, TaskKind::ConstraintReconciliation).state, TaskState::NeedsInfo);
    EXPECT_EQ(selected(s), sorted({"po-slice-platinum", "po-edge-large-gpu", "po-setup-vpn", "po-slice-observability"}));
    EXPECT_EQ(*s.draft.quotedCost, Money::euros(9900));
    EXPECT_EQ(s.status, SessionStatus::AwaitingUser);
    EXPECT_EQ(count_vetoes(s, "G1") + count_vetoes(s, "G3") + count_vetoes(s, "G4") + count_vetoes(s, "G5"), 0);
    // slice and edge carry the city
    for (const auto& sel : s.draft.offeringSelections) {
        if (sel.offeringId.rfind("po-slice-p", 0) == 0 || sel.offeringId.rfind("po-edge", 0) == 0) {
            EXPECT_EQ(sel.characteristicValues.at("cityName").as_string(), "Patras");
        }
    }
}

TEST(ReferenceSession, FullDialogueFinalizes) {
    auto run = make_run(make_reference_reasoner());
    auto& a = *run.agent;
    const auto& s = a.session();
    a.send(Q()[0]);
    a.send(Q()[1]);
    EXPECT_EQ(selected(s), sorted({"po-slice-platinum", "po-edge-small", "po-setup-vpn", "po-slice-observability"}));
    EXPECT_EQ(*s.draft.quotedCost, Money::euros(8150));
    EXPECT_EQ(task(s, TaskKind::ConstraintReconciliation).state, TaskState::NeedsInfo);

    a.send(Q()[2]);
    EXPECT_EQ(selected(s), sorted({"po-slice-gold", "po-edge-large", "po-setup-vpn", "po-slice-observability"}));
    EXPECT_EQ(*s.draft.quotedCost, Money::euros(7100));
    EXPECT_EQ(task(s, TaskKind::ConstraintReconciliation).state, TaskState::Completed);
    EXPECT_EQ(task(s, TaskKind::OrderSerialization).state, TaskState::NeedsInfo);

    a.send(Q()[3]);
    ASSERT_TRUE(s.draft.payload);
    const auto& item = (*s.draft.payload)["orderItems"][0];
    EXPECT_EQ(item["validFor"]["startDate"], "2026-11-02");
    EXPECT_EQ(item["validFor"]["endDate"], "2026-11-08");
    EXPECT_EQ(money_from_json((*s.draft.payload)["totalCost"]), Money::euros(7100));
    EXPECT_FALSE(s.draft.confirmed);
    EXPECT_EQ(task(s, TaskKind::Confirmation).state, TaskState::NeedsInfo);
    EXPECT_TRUE(run.sink->orders.empty());

    a.send(Q()[4]);
    EXPECT_EQ(s.status, SessionStatus::Finalized);
    ASSERT_TRUE(a.finalized());
    const auto& f = *a.finalized();
    EXPECT_EQ(f.intent.offeringSelections.size(), 4u);
    EXPECT_EQ(f.intent.period.days, 7);
    EXPECT_EQ(f.intent.intentId, "intent-bench-1");
    EXPECT_EQ(f.intent.confirmation.transcriptRef.rfind("bench-1#turn-", 0), 0u);
    ASSERT_EQ(run.sink->orders.size(), 1u);
    EXPECT_TRUE(run.sink->confirmedAtSubmit[0]);
    auto rec = run.inventory->latest(f.inventoryRecordId);
    ASSERT_TRUE(rec);
    EXPECT_EQ(rec->kind, InventoryKind::Intent);
    EXPECT_EQ(rec->state, "confirmed");
    for (const auto& t : s.taskList.tasks()) {
        EXPECT_EQ(t.state, TaskState::Completed) << t.taskId;
        EXPECT_FALSE(t.evidence.empty()) << t.taskId;
    }
    int totalVetoes = 0;
    for (const auto& t : s.transcript) totalVetoes += t.meta.contains("vetoedBy") ? 1 : 0;
    EXPECT_EQ(totalVetoes, 0);

    auto again = a.finalize_intent();
    EXPECT_EQ(again.intent.intentId, f.intent.intentId);
    EXPECT_EQ(run.inventory->history(f.inventoryRecordId).size(), 1u);
    EXPECT_THROW(a.send("one more thing"), std::logic_error);
}

TEST(ReferenceSession, TranscriptIsByteIdenticalAcrossRuns) {
    auto transcript = [] {
        auto run = make_run(make_reference_reasoner());
        for (const auto& q : Q()) run.agent->send(q);
        return canonical_json(transcript_json(run.agent->session().transcript));
    };
    auto first = transcript();
    for (int i = 0; i < 3; ++i) EXPECT_EQ(transcript(), first);
}

TEST(ReferenceSession, TranscriptJsonRoundTrips) {
    auto run = make_run(make_reference_reasoner());
    for (const auto& q : Q()) run.agent->send(q);
    const auto& tr = run.agent->session().transcript;
    auto back = transcript_from_json(transcript_json(tr));
    EXPECT_EQ(canonical_json(transcript_json(back)), canonical_json(transcript_json(tr)));
}

TEST(ReferenceSession, WrongDurationSerializesOneExtraDay) {
    auto run = make_run(make_wrong_duration_reasoner());
    for (const auto& q : Q()) run.agent->send(q);
    const auto& s = run.agent->session();
    ASSERT_TRUE(s.draft.payload);
    EXPECT_EQ((*s.draft.payload)["orderItems"][0]["validFor"]["endDate"], "2026-11-09");
    EXPECT_EQ(*s.draft.quotedCost, Money::euros(7100));
}

TEST(ReferenceSession, CostTaskWithoutDurationAsksForIt) {
    auto run = make_run(make_reference_reasoner());
    auto turns = run.agent->send("I need a 5G slice for streaming media in Patras.");
    const auto& s = run.agent->session();
    EXPECT_EQ(task(s, TaskKind::CostQuotation).state, TaskState::NeedsInfo);
    EXPECT_FALSE(s.draft.quotedCost);
    const auto& last = turns.back();
    EXPECT_EQ(last.role, Role::Agent);
    EXPECT_EQ(last.meta.value("purpose", ""), "question");
    EXPECT_NE(last.content.find("days"), std::string::npos);
    EXPECT_NE(last.content.find("start date"), std::string::npos);
}

TEST(ReferenceSession, ConfirmationCompletesOnAffirmation) {
    auto run = make_run(make_reference_reasoner());
    for (std::size_t i = 0; i < 4; ++i) run.agent->send(Q()[i]);
    run.agent->send("yes, proceed");
    const auto& s = run.agent->session();
    EXPECT_TRUE(s.draft.confirmed);
    EXPECT_EQ(task(s, TaskKind::Confirmation).state, TaskState::Completed);
    ASSERT_TRUE(s.draft.confirmationTurn);
    EXPECT_EQ(s.transcript[static_cast<std::size_t>(*s.draft.confirmationTurn)].role, Role::User);
    EXPECT_GT(*s.draft.confirmationTurn, *s.draft.quoteTurn);
}

TEST(ReferenceSession, ExplicitConfirmWithTextInferenceOff) {
    auto inv = std::make_unique<InventoryStore>(fixture());
    AgentConfig cfg;
    cfg.inferConfirmationFromText = false;
    Agent a(fixture(), make_reference_reasoner(), "gw", cfg, std::make_shared<LogicalClock>(), inv.get());
    EXPECT_THROW(a.confirm(), FinalizeError);
    for (std::size_t i = 0; i < 4; ++i) a.send(Q()[i]);
    a.send(Q()[4]);
    EXPECT_FALSE(a.session().draft.confirmed);
    EXPECT_NE(a.session().status, SessionStatus::Finalized);
    a.confirm("alice");
    EXPECT_EQ(a.session().status, SessionStatus::Finalized);
    EXPECT_EQ(a.finalized()->intent.confirmation.confirmedBy, "alice");
}

TEST(ReferenceSession, FinalizeNamesIncompleteTask) {
    auto run = make_run(make_reference_reasoner());
    run.agent->send(Q()[0]);
    try {
        run.agent->finalize_intent();
        FAIL();
    } catch (const FinalizeError& e) {
        EXPECT_EQ(e.kind, FinalizeError::Kind::TaskIncomplete);
        EXPECT_NE(std::string(e.what()).find("task-"), std::string::npos);
    }
}

TEST(ReferenceSession, BackendFailureSetsDiagnostic) {
    struct Broken : Reasoner {
        std::string id() const override { return "broken"; }
        Effect next(const ReasonerContext&) override { throw ReasonerError("connection refused"); }
    };
    Agent a(fixture(), std::make_unique<Broken>(), "x");
    a.send(Q()[0]);
    EXPECT_EQ(a.session().status, SessionStatus::AwaitingUser);
    ASSERT_TRUE(a.session().diagnostic);
    EXPECT_NE(a.session().diagnostic->find("connection refused"), std::string::npos);
    EXPECT_EQ(task(a.session(), TaskKind::Discovery).state, TaskState::Blocked);
    a.send("hello again");
    EXPECT_EQ(task(a.session(), TaskKind::Discovery).state, TaskState::Blocked);
}

// ------------------------------------------------------------ guardrails

TextReply proposal_text(std::string text, std::vector<std::string> names = {}) {
    return TextReply{std::move(text), std::move(names), ReplyPurpose::Proposal, true};
}

Session grounded_session() {
    Agent a(fixture(), make_scripted_reasoner("g", {ToolCall{"list_offerings", json::object()},
                                                    TextReply{"Noted.", {}, ReplyPurpose::Info, true}}),
            "g");
    a.send(Q()[0]);
    return a.session();
}

TEST(Guardrails, CheckExamples) {
    Session bare;
    auto s = grounded_session();
    auto v = check_guardrails(s, proposal_text("- Quantum Backhaul Booster: 400.00 EUR per day"), fixture());
    EXPECT_FALSE(v.allowed);
    EXPECT_EQ(v.rule, "G1");
    v = check_guardrails(bare, ToolCall{"submit_order", json::object()}, fixture());
    EXPECT_EQ(v.rule, "G2");
    v = check_guardrails(s, TextReply{"The quote is 7100.00 EUR total.", {}, ReplyPurpose::Quote, true}, fixture());
    EXPECT_TRUE(v.allowed) << v.rule << " " << v.detail;
    v = check_guardrails(s, TextReply{"Here is your quote.", {}, ReplyPurpose::Quote, true}, fixture());
    EXPECT_EQ(v.rule, "G3");
    v = check_guardrails(s, proposal_text("I suggest the On-demand Network Slice / Gold."), fixture());
    EXPECT_EQ(v.rule, "G3");
    v = check_guardrails(s, TextReply{"We will deploy an Edge Compute Node next to the stadium.", {}, ReplyPurpose::Info, true},
                         fixture());
    EXPECT_EQ(v.rule, "G4");
    v = check_guardrails(s, TextReply{"This setup will guarantee a perfect stream.", {}, ReplyPurpose::Info, true}, fixture());
    EXPECT_EQ(v.rule, "G4");
    v = check_guardrails(bare, proposal_text("- On-demand Network Slice / Gold: 700.00 EUR per day"), fixture());
    EXPECT_EQ(v.rule, "G5");
    v = check_guardrails(s, proposal_text("- On-demand Network Slice / Gold: 700.00 EUR per day"), fixture());
    EXPECT_TRUE(v.allowed) << v.rule << " " << v.detail;
    v = check_guardrails(s, ToolCall{"select_bundle", {{"offeringIds", {"po-fake"}}}}, fixture());
    EXPECT_EQ(v.rule, "G1");
}

class GuardrailTranscripts : public ::testing::TestWithParam<ScriptCase> {};

TEST_P(GuardrailTranscripts, VetoLoggedAndCorrected) {
    const auto& c = GetParam();
    auto inv = std::make_unique<InventoryStore>(fixture());
    CollectingSink sink;
    Agent a(fixture(), make_scripted_reasoner(c.name, c.effects), "s-" + c.name, AgentConfig{}, std::make_shared<LogicalClock>(),
            inv.get(), &sink);
    a.send(Q()[0]);
    a.send(Q()[1]);
    const auto& s = a.session();
    if (c.expectedRule.empty()) {
        for (const auto& t : s.transcript) EXPECT_FALSE(t.meta.contains("vetoedBy")) << t.content;
    } else {
        EXPECT_GE(count_vetoes(s, c.expectedRule), 1);
        bool corrective = false;
        for (std::size_t i = 0; i + 1 < s.transcript.size(); ++i) {
            if (s.transcript[i].meta.value("vetoedBy", "") == c.expectedRule) {
                corrective = s.transcript[i + 1].meta.value("corrective", false);
            }
        }
        EXPECT_TRUE(corrective);
    }
    EXPECT_TRUE(sink.orders.empty());
    EXPECT_EQ(inv->size(), 0u);
    for (const auto& t : s.taskList.tasks()) {
        if (t.state == TaskState::Completed) EXPECT_FALSE(t.evidence.empty());
    }
}

INSTANTIATE_TEST_SUITE_P(
    Scripts, GuardrailTranscripts, ::testing::ValuesIn(testing::guardrail_scripts()),
    [](const ::testing::TestParamInfo<ScriptCase>& i) { return i.param.name; });

TEST(Guardrails, PartialComposerNeverOrders) {
    auto run = make_run(make_partial_composer_reasoner());
    for (const auto& q : Q()) run.agent->send(q);
    const auto& s = run.agent->session();
    EXPECT_GE(count_vetoes(s, "G1"), 1);
    EXPECT_GE(count_vetoes(s, "G2"), 1);
    EXPECT_TRUE(run.sink->orders.empty());
    EXPECT_NE(s.status, SessionStatus::Finalized);
}

TEST(Guardrails, HallucinatorNeverCallsTools) {
    auto run = make_run(make_hallucinator_reasoner());
    for (const auto& q : Q()) run.agent->send(q);
    const auto& s = run.agent->session();
    for (const auto& t : s.transcript) EXPECT_NE(t.role, Role::Tool);
    EXPECT_GE(count_vetoes(s, "G1"), 1);
    EXPECT_FALSE(run.agent->reasoner().capabilities().toolCalling);
}

// ------------------------------------------------------------ fuzzing

TEST(TaskFuzz, RandomSessionsKeepStateMachineInvariants) {
    auto out = testing::fuzz_sessions(fixture(), 0, 1000);
    EXPECT_TRUE(out.ok) << out.failure;
    EXPECT_EQ(out.illegalTransitions, 0);
    EXPECT_EQ(out.unconfirmedOrders, 0);
    EXPECT_LE(out.maxInProgress, 1);
    RecordProperty("finalized", out.finalized);
    EXPECT_GT(out.finalized, 0);
}

}  // namespace
}  // namespace intentforge::cocreation
