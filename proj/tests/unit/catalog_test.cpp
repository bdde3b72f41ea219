// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "intentforge/catalog.hpp"
#include "oracles.hpp"

namespace intentforge {
namespace {

std::string fixture_text() {
    std::ifstream in(testing::fixture_path());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json fixture_json() { return nlohmann::json::parse(fixture_text()); }

TEST(Catalog, FixtureHasTableOneOfferings) {
    auto g = load_catalog(fixture_text());
    EXPECT_EQ(g.offerings.size(), 9u);
    const auto* p = g.offering("po-slice-platinum");
    ASSERT_NE(p, nullptr);
    EXPECT_EQ(p->display_name(), "On-demand Network Slice / Platinum");
    EXPECT_EQ(p->unitCost, Money::euros(1000));
    EXPECT_EQ(p->costPeriod, CostPeriod::PerDay);

    struct Row {
        const char* id;
        int euros;
        CostPeriod period;
    };
    const Row rows[] = {{"po-slice-gold", 700, CostPeriod::PerDay},       {"po-slice-silver", 300, CostPeriod::PerDay},
                        {"po-edge-large-gpu", 300, CostPeriod::PerDay},   {"po-edge-large", 200, CostPeriod::PerDay},
                        {"po-edge-small", 50, CostPeriod::PerDay},        {"po-api-exposure", 100, CostPeriod::PerDay},
                        {"po-slice-observability", 100, CostPeriod::PerDay}, {"po-setup-vpn", 100, CostPeriod::Once}};
    for (const auto& r : rows) {
        const auto* o = g.offering(r.id);
        ASSERT_NE(o, nullptr) << r.id;
        EXPECT_EQ(o->unitCost, Money::euros(r.euros)) << r.id;
        EXPECT_EQ(o->costPeriod, r.period) << r.id;
    }
}

TEST(Catalog, FixtureValidatesClean) {
    auto g = parse_catalog(fixture_text());
    EXPECT_TRUE(validate_catalog(g).empty());
}

TEST(Catalog, EmptyDocument) {
    auto g = load_catalog(R"({"version":"v0","offerings":[],"productSpecs":[],"serviceSpecs":[],"resourceSpecs":[],"testSpecs":[],"ruleSets":[]})");
    EXPECT_EQ(g.version, "v0");
    EXPECT_TRUE(g.offerings.empty());
}

TEST(Catalog, ParseErrorReportsPosition) {
    try {
        load_catalog("{\n  \"version\": \"x\",\n  oops\n}");
        FAIL();
    } catch (const CatalogError& e) {
        EXPECT_EQ(e.kind, CatalogError::Kind::Parse);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(Catalog, CycleNamesPath) {
    auto j = fixture_json();
    for (auto& s : j["serviceSpecs"]) {
        if (s["id"] == "ss-slice-ran") s["childServiceSpecIds"] = {"ss-e2e-slice"};
    }
    try {
        load_catalog(j.dump());
        FAIL();
    } catch (const CatalogError& e) {
        EXPECT_EQ(e.kind, CatalogError::Kind::CompositionCycle);
        EXPECT_NE(std::string(e.what()).find("ss-e2e-slice -> ss-slice-ran -> ss-e2e-slice"), std::string::npos) << e.what();
    }
}

TEST(Catalog, DanglingProductSpec) {
    auto j = fixture_json();
    j["offerings"][0]["productSpecId"] = "X";
    auto g = parse_catalog(j.dump());
    auto v = validate_catalog(g);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].entityId, j["offerings"][0]["id"].get<std::string>());
    EXPECT_EQ(v[0].rule, "danglingRef");
    EXPECT_EQ(v[0].detail, "X");
    try {
        load_catalog(j.dump());
        FAIL();
    } catch (const CatalogError& e) {
        EXPECT_EQ(e.kind, CatalogError::Kind::DanglingReference);
        EXPECT_NE(std::string(e.what()).find("X"), std::string::npos);
    }
}

TEST(Catalog, DuplicateOfferingId) {
    auto j = fixture_json();
    j["offerings"].push_back(j["offerings"][0]);
    auto v = validate_catalog(parse_catalog(j.dump()));
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].rule, "duplicateId");
}

TEST(Catalog, RoundTrip) {
    auto g = load_catalog(fixture_text());
    auto text = serialize_catalog(g);
    auto g2 = load_catalog(text);
    EXPECT_EQ(catalog_to_json(g), catalog_to_json(g2));
    EXPECT_EQ(serialize_catalog(g2), text);
}

TEST(Catalog, FindOfferings) {
    auto g = load_catalog(fixture_text());
    auto edge = find_offerings(g, "Edge Media");
    ASSERT_EQ(edge.size(), 3u);
    std::vector<std::string> tiers;
    for (const auto* o : edge) tiers.push_back(o->tier);
    EXPECT_EQ(tiers, (std::vector<std::string>{"Large", "Large (GPU)", "Small"}));
    EXPECT_EQ(find_offerings(g, "").size(), 9u);
    EXPECT_TRUE(find_offerings(g, "xyzzy").empty());
    EXPECT_EQ(find_offerings(g, "gold").size(), 1u);
    auto a = find_offerings(g, "e");
    auto b = find_offerings(g, "e");
    EXPECT_EQ(a, b);
    for (std::size_t i = 1; i < a.size(); ++i) EXPECT_LT(a[i - 1]->id, a[i]->id);
}

TEST(Catalog, ResolveMentions) {
    auto g = load_catalog(fixture_text());
    ASSERT_EQ(resolve_product_mention(g, "On-demand Network Slice / Gold").size(), 1u);
    ASSERT_EQ(resolve_product_mention(g, "edge media cache server (Large (GPU))").size(), 1u);
    EXPECT_EQ(resolve_product_mention(g, "Edge Media Cache Server").size(), 3u);
    EXPECT_TRUE(resolve_product_mention(g, "Quantum Backhaul Booster").empty());
}

TEST(Catalog, ThresholdRefMustBeReachable) {
    auto j = fixture_json();
    for (auto& t : j["testSpecs"]) {
        if (t["id"] == "ts-edge-latency") {
            t["thresholdSource"] = "characteristicRef";
            t["thresholdValue"] = "nowhere";
        }
    }
    auto v = validate_catalog(parse_catalog(j.dump()));
    ASSERT_FALSE(v.empty());
    EXPECT_EQ(v[0].rule, "thresholdRef");
}

}  // namespace
}  // namespace intentforge
