// SPDX-License-Identifier: Apache-2.0
// One line per acceptance criterion; exit status is the number of failures.
#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "intentforge/bench.hpp"
#include "intentforge/bundles.hpp"
#include "intentforge/bus.hpp"
#include "intentforge/demo.hpp"
#include "intentforge/rule_dsl.hpp"
#include "oracles.hpp"
#include "session_fuzz.hpp"

using namespace intentforge;
using nlohmann::json;

namespace {

struct Check {
    bool ok = true;
    std::ostringstream detail;
    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail.str("");
            detail << "failed: " << what;
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const CatalogGraph& fixture() { return testing::fixture_graph(); }

const bench::Scenario& scenario() {
    static const bench::Scenario s = bench::load_scenario_file(bench::default_scenario_path(), fixture());
    return s;
}

std::string row(const bench::BenchResult& r) {
    std::ostringstream os;
    os << r.correctComposition << "/" << r.compositionTotal << ", hallucinations " << r.hallucinatedProducts << ", cost "
       << (r.correctTotalCost ? "pass" : "fail") << ", duration " << (r.correctDuration ? "pass" : "fail") << ", baseline "
       << bench::to_string(r.baselineAchievement);
    return os.str();
}

void c1(Check& c) {
    auto t0 = Clock::now();
    auto out = bench::run_scenario(scenario(), cocreation::make_reasoner("reference"), fixture());
    auto table = bench::emit_report({out.result}, "table");
    double secs = seconds_since(t0);
    const auto& r = out.result;
    c.require(r.correctComposition == 4 && r.compositionTotal == 4, "composition 4/4");
    c.require(r.hallucinatedProducts == 0, "no hallucinations");
    c.require(r.correctTotalCost && r.correctDuration, "cost and duration");
    c.require(r.baselineAchievement == bench::Baseline::Pass, "baseline pass");
    c.require(table.find("4/4") != std::string::npos, "table shows 4/4");
    c.require(secs < 5.0, "runtime under 5 s");
    if (c.ok) c.detail << row(r) << " in " << secs << " s";
}

void c2(Check& c) {
    struct Want {
        const char* id;
        int comp;
        int halluc;
        std::optional<bool> cost;
        bool duration;
        bench::Baseline base;
        bool timed;
    };
    const Want wants[] = {
        {"hallucinator", 0, 3, false, false, bench::Baseline::Fail, false},
        {"partial-composer", 3, 1, std::nullopt, false, bench::Baseline::Fail, true},
        {"wrong-duration", 4, 0, true, false, bench::Baseline::Partial, true},
    };
    std::vector<std::string> rows;
    for (const auto& w : wants) {
        auto r = bench::run_scenario(scenario(), cocreation::make_reasoner(w.id), fixture(),
                                     std::make_shared<cocreation::LogicalClock>())
                     .result;
        std::string tag = std::string(w.id) + " ";
        c.require(r.correctComposition == w.comp && r.compositionTotal == 4, tag + "composition");
        c.require(r.hallucinatedProducts == w.halluc, tag + "hallucinations");
        if (w.cost) c.require(r.correctTotalCost == *w.cost, tag + "cost");
        c.require(r.correctDuration == w.duration, tag + "duration");
        c.require(r.baselineAchievement == w.base, tag + "baseline");
        c.require(r.dialogueTimeSeconds.has_value() == w.timed && r.totalTokens.has_value() == w.timed, tag + "time/token cells");
        rows.push_back(std::string(w.id) + " {" + row(r) + "}");
    }
    if (c.ok) c.detail << rows[0] << "; " << rows[1] << "; " << rows[2];
}

void c3(Check& c) {
    std::mt19937_64 rng(99);
    auto families = offering_families(fixture());
    c.require(families.size() == 5, "five offering families");
    std::size_t maxCombos = 0;
    for (int i = 0; i < 200 && c.ok; ++i) {
        std::vector<std::string> pick;
        for (const auto& f : families) {
            if (rng() % 2) pick.push_back(f);
        }
        if (pick.empty()) pick.push_back(families[rng() % families.size()]);
        std::optional<std::int64_t> budget, users;
        if (rng() % 4) budget = static_cast<std::int64_t>(rng() % 1500000);
        if (rng() % 4) users = static_cast<std::int64_t>(rng() % 6000);
        int days = 1 + static_cast<int>(rng() % 30);
        BundleConstraints bc;
        if (budget) bc.budget = Money{*budget};
        bc.minConcurrentUsers = users;
        auto got = propose_bundles(fixture(), pick, bc, days);
        auto want = testing::brute_force_bundles(fixture(), pick, budget, users, days);
        maxCombos = std::max(maxCombos, got.size());
        c.require(got.size() <= 36, "at most 36 combinations");
        c.require(got.size() == want.size(), "same number of bundles as the enumerator");
        for (std::size_t k = 0; c.ok && k < got.size(); ++k) {
            c.require(got[k].offeringIds == want[k].ids && got[k].totalCost.cents == want[k].cents &&
                          got[k].satisfied == want[k].feasible && got[k].violations == want[k].violations,
                      "set " + std::to_string(i) + " bundle " + std::to_string(k) + " differs from the enumerator");
        }
    }
    auto gt = propose_bundles(fixture(), testing::ground_truth_families(), {Money::euros(9000), 1000}, 7);
    c.require(!gt.empty() && gt[0].satisfied, "ground-truth constraints feasible");
    if (!gt.empty()) {
        c.require(gt[0].totalCost.to_string() == "7100.00 EUR", "ground-truth total 7100.00 EUR");
        c.require(gt[0].offeringIds ==
                      std::vector<std::string>{"po-edge-large", "po-setup-vpn", "po-slice-gold", "po-slice-observability"},
                  "ground-truth bundle");
    }
    if (c.ok) c.detail << "200 sets exact to the cent (max " << maxCombos << " combinations); best {Gold slice, Large edge, Setup, Observability} = "
                       << gt[0].totalCost.to_string();
}

void c4(Check& c) {
    std::set<std::string> digests;
    for (int i = 0; i < 100; ++i) digests.insert(build_plan(fixture(), testing::ground_truth_intent()).canonicalDigest);
    c.require(digests.size() == 1, "one digest over 100 builds");
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 50 && c.ok; ++i) {
        auto g = testing::random_catalog(rng);
        c.require(validate_catalog(g).empty(), "random catalog valid");
        std::vector<std::string> ids;
        for (const auto& o : g.offerings) ids.push_back(o.id);
        auto plan = build_plan(g, testing::intent_for(ids, 3));
        std::map<std::string, int> got;
        for (const auto& t : plan.derivedTests) got[t.testSpecId]++;
        c.require(got == testing::expected_test_counts(g, ids), "catalog " + std::to_string(i) + " test injection");
    }
    if (c.ok) c.detail << "100 builds -> 1 digest " << digests.begin()->substr(0, 12) << "..; 50 random catalogs match reachability";
}

void c5(Check& c) {
    auto t0 = Clock::now();
    auto a = run_demo(fixture(), {42});
    auto b = run_demo(fixture(), {42});
    double secs = seconds_since(t0) / 2;
    for (const auto* run : {&a.faultFree, &a.faultInjected}) c.require(run->startedRed, "all tests start red");
    c.require(a.faultFree.report.overall == Overall::Compliant, "fault-free compliant");
    int violations = 0;
    for (const auto& t : a.faultFree.report.perTest) violations += t.violations;
    c.require(violations == 0, "fault-free has no violations");
    c.require(a.faultInjected.requests.size() == 1, "exactly one remediation request");
    if (a.faultInjected.requests.size() == 1) c.require(a.faultInjected.requests[0].action == RemediationAction::Retry, "retry");
    c.require(a.faultInjected.report.overall == Overall::Compliant, "compliant after retry");
    c.require(canonical_report(a.faultFree.report) == canonical_report(b.faultFree.report) &&
                  canonical_report(a.faultInjected.report) == canonical_report(b.faultInjected.report),
              "byte-identical reports");
    c.require(secs < 10.0, "runtime under 10 s");
    if (c.ok)
        c.detail << a.faultFree.report.perTest.size() << " tests red->green; fault run 1 retry request then compliant; reports identical; "
                 << secs << " s per run";
}

std::pair<bool, std::string> run_script(const testing::ScriptCase& sc) {
    InventoryStore inv(fixture());
    testing::CollectingSink sink;
    cocreation::Agent a(fixture(), cocreation::make_scripted_reasoner(sc.name, sc.effects), "s-" + sc.name, {},
                        std::make_shared<cocreation::LogicalClock>(), &inv, &sink);
    const auto& Q = testing::benchmark_turns();
    a.send(Q[0]);
    a.send(Q[1]);
    const auto& s = a.session();
    if (!sink.orders.empty() || inv.size() != 0) return {false, sc.name + " placed an order"};
    if (sc.expectedRule.empty()) {
        for (const auto& t : s.transcript) {
            if (t.meta.contains("vetoedBy")) return {false, sc.name + " vetoed unexpectedly"};
        }
        return {true, {}};
    }
    if (testing::count_vetoes(s, sc.expectedRule) < 1) return {false, sc.name + " not attributed to " + sc.expectedRule};
    for (const auto* other : {"G1", "G2", "G3", "G4", "G5"}) {
        if (other != sc.expectedRule && testing::count_vetoes(s, other) > 0) return {false, sc.name + " also vetoed by " + other};
    }
    return {true, {}};
}

const testing::FuzzOutcome& fuzz() {
    static const testing::FuzzOutcome out = testing::fuzz_sessions(fixture(), 0, 1000);
    return out;
}

void c6(Check& c) {
    auto scripts = testing::guardrail_scripts();
    c.require(scripts.size() >= 10, "at least 10 scripts");
    std::map<std::string, int> fired;
    for (const auto& sc : scripts) {
        auto [ok, why] = run_script(sc);
        c.require(ok, why);
        if (ok && !sc.expectedRule.empty()) fired[sc.expectedRule]++;
    }
    for (const auto* g : {"G1", "G2", "G3", "G4", "G5"}) c.require(fired[g] > 0, std::string(g) + " triggered");
    const auto& f = fuzz();
    c.require(f.unconfirmedOrders == 0, "no unconfirmed order under fuzzing");
    c.require(f.ok, f.failure);
    if (c.ok)
        c.detail << scripts.size() << " scripts, G1-G5 each attributed; 1000 fuzzed sessions, 0 unconfirmed orders ("
                 << f.finalized << " finalized)";
}

void c7(Check& c) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 1000 && c.ok; ++i) {
        auto r = testing::random_rule(rng);
        auto text = rules::print_rule(r);
        try {
            auto back = rules::parse_rule(text);
            c.require(rules::structurally_equal(r, back) && rules::print_rule(back) == text, "round trip of " + text);
        } catch (const std::exception& e) {
            c.require(false, "reparse of " + text + ": " + e.what());
        }
    }
    std::ifstream in(std::string(INTENTFORGE_SOURCE_DIR) + "/tests/data/rules_golden.json");
    auto corpus = json::parse(in);
    c.require(corpus.size() >= 20, "golden corpus of 20");
    int n = 0;
    for (const auto& g : corpus) {
        rules::RuleSet rs{"golden", {}};
        for (const auto& text : g.at("rules")) rs.rules.push_back(rules::parse_rule(text.get<std::string>(), "r" + std::to_string(++n)));
        rules::Bindings env;
        for (const auto& [k, v] : g.at("env").items()) env[k] = scalar_from_json(v);
        if (g.contains("error")) {
            try {
                rules::evaluate_ruleset(rs, env);
                c.require(false, "expected error in " + g.dump());
            } catch (const rules::RuleEvalError&) {
            }
        } else {
            rules::Bindings want;
            for (const auto& [k, v] : g.at("produced").items()) want[k] = scalar_from_json(v);
            c.require(rules::evaluate_ruleset(rs, env) == want, "golden " + g.dump());
        }
    }
    const std::tuple<const char*, int, int> typeErrors[] = {
        {"when 1 then x := 2", 1, 6},        {"when true then x := \"a\" + 1", 1, 21}, {"when $a and $a > 1 then x := 1", 1, 13},
        {"when true then\n  x := not 3", 2, 12}, {"when \"a\" < \"b\" then x := 1", 1, 6}, {"when true then x := -\"a\"", 1, 22},
    };
    for (const auto& [text, line, col] : typeErrors) {
        try {
            rules::parse_rule(text);
            c.require(false, std::string("no type error for ") + text);
        } catch (const rules::RuleTypeError& e) {
            c.require(e.pos.line == line && e.pos.column == col, std::string("position for ") + text);
        }
    }
    if (c.ok) c.detail << "1000 round trips, " << corpus.size() << " golden cases, " << std::size(typeErrors) << " type errors positioned";
}

void c8(Check& c) {
    using namespace bus;
    int schedules = 0;
    for (std::uint64_t seed = 1; seed <= 500 && c.ok; ++seed, ++schedules) {
        std::mt19937_64 rng(seed);
        BusConfig cfg{seed, 10000, std::uniform_real_distribution<double>(0, 0.6)(rng), 3};
        MessageBus b(cfg);
        int queues = 1 + static_cast<int>(rng() % 4);
        int publishers = 1 + static_cast<int>(rng() % 3);
        std::map<std::string, int> handled;
        std::map<std::pair<std::string, std::string>, std::vector<int>> firstSeen, published;
        std::set<std::string> seen;
        for (int q = 0; q < queues; ++q) {
            auto name = "q" + std::to_string(q);
            b.subscribe(name, [&, name](const Envelope& e) -> std::optional<json> {
                ++handled[e.messageId];
                if (seen.insert(e.messageId).second) firstSeen[{e.publisher, name}].push_back(e.body()["n"]);
                return std::nullopt;
            });
        }
        std::vector<std::string> ids;
        int total = 10 + static_cast<int>(rng() % 30);
        for (int i = 0; i < total; ++i) {
            auto pub = "p" + std::to_string(rng() % publishers);
            auto q = "q" + std::to_string(rng() % queues);
            ids.push_back(b.publish(q, {{"n", i}}, std::nullopt, pub));
            published[{pub, q}].push_back(i);
            if (rng() % 3 == 0) b.step();
        }
        b.register_agent("echo", [](const Envelope& e) -> std::optional<json> { return e.body(); });
        c.require(b.request(agent_queue("echo"), {{"seed", seed}}, 1000) == json{{"seed", seed}}, "correlated reply");
        b.shutdown();
        for (const auto& id : ids) c.require(handled[id] >= 1, "at-least-once delivery");
        for (const auto& [key, order] : published) c.require(firstSeen[key] == order, "per-queue FIFO");

        MessageBus cb(BusConfig{seed, 10000, cfg.redeliveryProbability, 3});
        int stages = static_cast<int>(rng() % 5);
        int failAt = static_cast<int>(rng() % (stages + 1));
        std::vector<std::string> names;
        std::vector<int> calls(static_cast<std::size_t>(stages), 0);
        for (int s = 1; s <= stages; ++s) {
            names.push_back("s" + std::to_string(s));
            bool fails = s == failAt;
            bool veto = rng() % 2 == 0;
            cb.register_agent(names.back(), [&, s, fails, veto](const Envelope& e) -> std::optional<json> {
                ++calls[static_cast<std::size_t>(s - 1)];
                if (fails && veto) return json{{"veto", "no"}};
                if (fails) return std::nullopt;
                auto d = e.body()["draft"];
                d["trail"].push_back(s);
                return d;
            });
        }
        try {
            auto out = cb.run_chain({"c", names}, {{"trail", json::array()}}, 30);
            c.require(failAt == 0, "chain should have aborted");
            if (stages > 0) c.require(out["provenance"].size() == static_cast<std::size_t>(stages), "provenance per stage");
        } catch (const ChainError& e) {
            c.require(e.stage == failAt && e.provenance.size() == static_cast<std::size_t>(failAt - 1), "abort stage");
            for (int s = failAt + 1; s <= stages; ++s) c.require(calls[static_cast<std::size_t>(s - 1)] == 0, "no stage after abort");
        }
        if (!c.ok) c.detail << " (seed " << seed << ")";
    }
    if (c.ok) c.detail << schedules << " randomized schedules: at-least-once, FIFO, correlation, chain abort";
}

void c9(Check& c) {
    const auto& f = fuzz();
    c.require(f.illegalTransitions == 0, "no illegal task transition");
    c.require(f.maxInProgress <= 1, "at most one task in progress");
    c.require(f.ok, f.failure);
    if (c.ok) c.detail << "1000 fuzzed sessions: 0 illegal transitions, max " << f.maxInProgress << " task in progress";
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<void(Check&)>> criteria[] = {
        {"reference benchmark", c1},      {"failure-mode taxonomy", c2}, {"cost oracle", c3},
        {"traversal determinism", c4},    {"red to green demo", c5},     {"guardrails", c6},
        {"rule language", c7},            {"message bus", c8},           {"task state machine", c9},
    };
    int failures = 0;
    for (std::size_t i = 0; i < std::size(criteria); ++i) {
        Check c;
        try {
            criteria[i].second(c);
        } catch (const std::exception& e) {
            c.ok = false;
            c.detail.str("");
            c.detail << "exception: " << e.what();
        }
        failures += c.ok ? 0 : 1;
        std::cout << "criterion " << i + 1 << " " << (c.ok ? "PASS" : "FAIL") << " " << criteria[i].first << ": " << c.detail.str()
                  << std::endl;
    }
    return failures;
}
