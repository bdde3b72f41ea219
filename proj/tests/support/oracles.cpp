// SPDX-License-Identifier: Apache-2.0
#include "oracles.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

namespace intentforge::testing {

namespace {

std::string lowered(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::optional<std::int64_t> capacity_of(const ProductOffering& o) {
    auto it = o.fixedCharacteristicValues.find("maxConcurrentUsers");
    if (it == o.fixedCharacteristicValues.end()) return std::nullopt;
    return it->second.as_number().to_int();
}

}  // namespace

std::vector<OracleBundle> brute_force_bundles(const CatalogGraph& g, const std::vector<std::string>& families,
                                              std::optional<std::int64_t> budgetCents,
                                              std::optional<std::int64_t> minUsers, int days) {
    std::vector<std::vector<const ProductOffering*>> groups;
    std::vector<std::string> done;
    for (const auto& f : families) {
        if (std::find(done.begin(), done.end(), lowered(f)) != done.end()) continue;
        done.push_back(lowered(f));
        std::vector<const ProductOffering*> grp;
        for (const auto& o : g.offerings) {
            if (lowered(o.name) == lowered(f)) grp.push_back(&o);
        }
        if (grp.empty()) return {};
        groups.push_back(grp);
    }
    if (groups.empty()) return {};

    std::vector<OracleBundle> out;
    std::vector<std::size_t> idx(groups.size(), 0);
    while (true) {
        OracleBundle b;
        std::optional<std::int64_t> cap;
        for (std::size_t i = 0; i < groups.size(); ++i) {
            const auto* o = groups[i][idx[i]];
            b.ids.push_back(o->id);
            b.cents += o->costPeriod == CostPeriod::Once ? o->unitCost.cents : o->unitCost.cents * days;
            if (auto c = capacity_of(*o)) cap = cap ? std::min(*cap, *c) : *c;
        }
        std::sort(b.ids.begin(), b.ids.end());
        if (budgetCents && b.cents > *budgetCents) b.violations.push_back("budget");
        if (minUsers && (!cap || *cap < *minUsers)) b.violations.push_back("users");
        b.feasible = b.violations.empty();
        out.push_back(b);

        std::size_t k = 0;
        while (k < groups.size() && ++idx[k] == groups[k].size()) idx[k++] = 0;
        if (k == groups.size()) break;
    }
    std::sort(out.begin(), out.end(), [](const OracleBundle& a, const OracleBundle& b) {
        if (a.feasible != b.feasible) return a.feasible && !b.feasible;
        if (a.cents != b.cents) return a.cents < b.cents;
        return a.ids < b.ids;
    });
    return out;
}

std::map<std::string, int> expected_test_counts(const CatalogGraph& g, const std::vector<std::string>& offeringIds) {
    std::map<std::string, int> counts;
    std::function<void(const std::string&)> visitService = [&](const std::string& id) {
        for (const auto& s : g.serviceSpecs) {
            if (s.id != id) continue;
            for (const auto& t : s.testSpecIds) counts[t]++;
            for (const auto& c : s.childServiceSpecIds) visitService(c);
            for (const auto& r : s.resourceSpecIds) {
                for (const auto& rs : g.resourceSpecs) {
                    if (rs.id != r) continue;
                    for (const auto& t : rs.testSpecIds) counts[t]++;
                }
            }
        }
    };
    for (const auto& oid : offeringIds) {
        for (const auto& o : g.offerings) {
            if (o.id != oid) continue;
            for (const auto& p : g.productSpecs) {
                if (p.id != o.productSpecId) continue;
                for (const auto& t : p.testSpecIds) counts[t]++;
                for (const auto& s : p.serviceSpecIds) visitService(s);
            }
        }
    }
    return counts;
}

CatalogGraph random_catalog(std::mt19937_64& rng) {
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    auto chance = [&](int pct) { return pick(1, 100) <= pct; };

    CatalogGraph g;
    g.version = "random";
    int nTests = pick(1, 4);
    int nRes = pick(1, 4);
    int nSvc = pick(1, 6);
    int nOff = pick(1, 3);
    // offerings + product specs + services + resources + tests <= 20
    while (2 * nOff + nSvc + nRes + nTests > 20) --nSvc;

    static const TestKind kinds[] = {TestKind::Connectivity, TestKind::Latency, TestKind::Throughput,
                                     TestKind::SliceAdmission, TestKind::ApiAvailability};
    for (int i = 0; i < nTests; ++i) {
        TestSpecification t;
        t.id = "t" + std::to_string(i);
        t.name = t.id;
        t.kind = kinds[pick(0, 4)];
        t.targetMetric = "m" + std::to_string(i);
        t.comparator = Comparator::Ge;
        t.thresholdValue = Scalar::number(pick(0, 50));
        t.evaluationWindowTicks = pick(1, 3);
        g.testSpecs.push_back(t);
    }
    auto someTests = [&] {
        std::vector<std::string> ids;
        for (int i = 0; i < nTests; ++i) {
            if (chance(30)) ids.push_back("t" + std::to_string(i));
        }
        return ids;
    };
    static const Domain domains[] = {Domain::RAN, Domain::Transport, Domain::Core, Domain::Infrastructure};
    for (int i = 0; i < nRes; ++i) {
        ResourceSpecification r;
        r.id = "r" + std::to_string(i);
        r.name = r.id;
        r.domain = domains[pick(0, 3)];
        r.testSpecIds = someTests();
        g.resourceSpecs.push_back(r);
    }
    // Children only point to higher-numbered services, so the graph stays acyclic.
    for (int i = 0; i < nSvc; ++i) {
        ServiceSpecification s;
        s.id = "s" + std::to_string(i);
        s.name = s.id;
        for (int j = i + 1; j < nSvc; ++j) {
            if (chance(35)) s.childServiceSpecIds.push_back("s" + std::to_string(j));
        }
        for (int j = 0; j < nRes; ++j) {
            if (chance(40)) s.resourceSpecIds.push_back("r" + std::to_string(j));
        }
        s.testSpecIds = someTests();
        g.serviceSpecs.push_back(s);
    }
    for (int i = 0; i < nOff; ++i) {
        ProductSpecification p;
        p.id = "p" + std::to_string(i);
        p.name = p.id;
        for (int j = 0; j < nSvc; ++j) {
            if (chance(40)) p.serviceSpecIds.push_back("s" + std::to_string(j));
        }
        p.testSpecIds = someTests();
        g.productSpecs.push_back(p);

        ProductOffering o;
        o.id = "o" + std::to_string(i);
        o.name = "Offering " + std::to_string(i);
        o.tier = "Std";
        o.unitCost = Money::euros(pick(0, 100));
        o.productSpecId = p.id;
        g.offerings.push_back(o);
    }
    return g;
}

rules::ExprPtr random_expr(std::mt19937_64& rng, ValueKind kind, int depth) {
    using namespace rules;
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    static const char* numVars[] = {"n", "users", "latencyMs", "days"};
    static const char* strVars[] = {"tier", "profile"};
    static const char* boolVars[] = {"flag", "premium"};
    static const char* words[] = {"Gold", "Silver", "URLLC", "eMBB", "Large (GPU)", ""};

    bool leaf = depth <= 0 || pick(0, 3) == 0;
    switch (kind) {
    case ValueKind::Number:
        if (leaf) {
            if (pick(0, 2) == 0) return make_ref(numVars[pick(0, 3)]);
            auto raw = std::int64_t{pick(-50000, 500000)};
            if (pick(0, 1)) raw = (raw / Decimal::kScale) * Decimal::kScale;
            return make_literal(Scalar(Decimal::from_scaled(raw)));
        }
        if (pick(0, 5) == 0) return make_unary(UnaryOp::Negate, random_expr(rng, ValueKind::Number, depth - 1));
        return make_binary(static_cast<BinaryOp>(pick(0, 3)), random_expr(rng, ValueKind::Number, depth - 1),
                           random_expr(rng, ValueKind::Number, depth - 1));
    case ValueKind::String:
        if (pick(0, 1)) return make_ref(strVars[pick(0, 1)]);
        return make_literal(Scalar(std::string(words[pick(0, 5)])));
    case ValueKind::Boolean:
        if (leaf) {
            if (pick(0, 1)) return make_ref(boolVars[pick(0, 1)]);
            return make_literal(Scalar(pick(0, 1) == 1));
        }
        switch (pick(0, 4)) {
        case 0:
            return make_unary(UnaryOp::Not, random_expr(rng, ValueKind::Boolean, depth - 1));
        case 1:
            return make_binary(pick(0, 1) ? BinaryOp::And : BinaryOp::Or, random_expr(rng, ValueKind::Boolean, depth - 1),
                               random_expr(rng, ValueKind::Boolean, depth - 1));
        case 2:
            return make_binary(pick(0, 1) ? BinaryOp::Eq : BinaryOp::Ne, random_expr(rng, ValueKind::String, depth - 1),
                               random_expr(rng, ValueKind::String, depth - 1));
        case 3:
            return make_binary(pick(0, 1) ? BinaryOp::Eq : BinaryOp::Ne, random_expr(rng, ValueKind::Boolean, depth - 1),
                               random_expr(rng, ValueKind::Boolean, depth - 1));
        default:
            return make_binary(static_cast<BinaryOp>(pick(4, 9)), random_expr(rng, ValueKind::Number, depth - 1),
                               random_expr(rng, ValueKind::Number, depth - 1));
        }
    }
    return nullptr;
}

rules::Rule random_rule(std::mt19937_64& rng) {
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    rules::Rule r;
    r.condition = random_expr(rng, ValueKind::Boolean, pick(0, 4));
    int n = pick(1, 3);
    static const ValueKind kinds[] = {ValueKind::Number, ValueKind::String, ValueKind::Boolean};
    for (int i = 0; i < n; ++i) {
        r.actions.push_back({"out" + std::to_string(i), random_expr(rng, kinds[pick(0, 2)], pick(0, 4))});
    }
    return r;
}

std::vector<std::string> ground_truth_families() {
    return {"On-demand Network Slice", "Edge Media Cache Server", "Service Setup and VPN", "Network Slice Observability"};
}

std::string fixture_path() { return INTENTFORGE_SOURCE_DIR "/data/catalog/fixture.json"; }

const CatalogGraph& fixture_graph() {
    static const CatalogGraph g = load_catalog_file(fixture_path());
    return g;
}

ConfirmedIntent intent_for(const std::vector<std::string>& offeringIds, int days) {
    ConfirmedIntent i;
    i.intentId = "intent-test";
    for (const auto& id : offeringIds) i.offeringSelections.push_back({id, {}});
    i.period = {*parse_iso_date("2026-11-02"), days};
    i.confirmation = {"operator", "session-1#turn-9"};
    return i;
}

ConfirmedIntent ground_truth_intent() {
    auto i = intent_for({"po-slice-gold", "po-edge-large", "po-setup-vpn", "po-slice-observability"}, 7);
    i.offeringSelections[0].characteristicValues["cityName"] = Scalar("Patras");
    i.offeringSelections[1].characteristicValues["cityName"] = Scalar("Patras");
    i.constraints.budget = Money::euros(9000);
    i.constraints.minConcurrentUsers = 1000;
    return i;
}

const OrchestrationPlan& ground_truth_plan() {
    static const OrchestrationPlan p = build_plan(fixture_graph(), ground_truth_intent());
    return p;
}

const std::vector<std::string>& benchmark_turns() {
    static const std::vector<std::string> t{
        "I am interested in products for a high-resolution sports media experience across mobile and connected devices "
        "using 5G capabilities in the city of Patras, Greece, for one week. The service should enable users to watch live "
        "sports and interact with real-time stats without quality degradation. As admin, I want to be able to monitor the "
        "performance of my service.",
        "This proposal is out of my budget. My budget is 9000€ in total. Can you suggest alternative product "
        "combinations?",
        "The service must support 1000 simultaneous users. I can stretch the budget if needed, but please balance cost and "
        "performance.",
        "The service should start on 2026-11-02 and run for 7 days.",
        "Yes, I confirm. Please proceed with the order.",
    };
    return t;
}

}  // namespace intentforge::testing
