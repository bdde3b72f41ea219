// SPDX-License-Identifier: Apache-2.0
#include <map>
#include <random>
#include <set>
#include <thread>

#include <gtest/gtest.h>

#include "intentforge/bus.hpp"

namespace intentforge::bus {
namespace {

using nlohmann::json;

TEST(Bus, DeliversToSubscriber) {
    MessageBus bus;
    std::vector<json> seen;
    bus.subscribe("q", [&](const Envelope& e) -> std::optional<json> {
        seen.push_back(e.body());
        return std::nullopt;
    });
    bus.publish("q", {{"a", 1}});
    bus.run_until_idle();
    ASSERT_GE(seen.size(), 1u);
    EXPECT_EQ(seen[0], (json{{"a", 1}}));
}

TEST(Bus, RetainsUntilFirstSubscriberOrTtl) {
    MessageBus bus(BusConfig{1, 100});
    bus.publish("late", {{"n", 1}});
    EXPECT_EQ(bus.stats().depth["late"], 1u);
    bus.advance(10);
    int seen = 0;
    bus.subscribe("late", [&](const Envelope&) -> std::optional<json> {
        ++seen;
        return std::nullopt;
    });
    bus.run_until_idle();
    EXPECT_EQ(seen, 1);

    bus.publish("gone", {{"n", 2}});
    bus.advance(100);
    bus.subscribe("gone", [&](const Envelope&) -> std::optional<json> {
        ++seen;
        return std::nullopt;
    });
    bus.run_until_idle();
    EXPECT_EQ(seen, 1);
    EXPECT_EQ(bus.stats().expired, 1u);
}

TEST(Bus, DefaultRetentionIsTenThousandTicks) { EXPECT_EQ(BusConfig{}.retentionTicks, 10000); }

TEST(Bus, FifoFromOnePublisher) {
    MessageBus bus;
    std::vector<int> order;
    bus.subscribe("q", [&](const Envelope& e) -> std::optional<json> {
        order.push_back(e.body()["n"]);
        return std::nullopt;
    });
    bus.publish("q", {{"n", 1}}, std::nullopt, "p");
    bus.publish("q", {{"n", 2}}, std::nullopt, "p");
    bus.run_until_idle();
    EXPECT_EQ(order, (std::vector<int>{1, 2}));
}

TEST(Bus, RequestEchoAndTimeout) {
    MessageBus bus;
    bus.register_agent("echo", [](const Envelope& e) -> std::optional<json> { return e.body(); });
    EXPECT_EQ(bus.request(agent_queue("echo"), {{"x", "y"}}, 10), (json{{"x", "y"}}));
    EXPECT_THROW(bus.register_agent("echo", [](const Envelope&) { return std::optional<json>{}; }), BusError);

    MessageBus fresh;
    try {
        fresh.request("agents/dead", {{"x", 1}}, 50);
        FAIL();
    } catch (const BusError& e) {
        EXPECT_EQ(e.kind, BusError::Kind::Timeout);
        EXPECT_EQ(e.tick, 50);
        EXPECT_FALSE(e.correlationId.empty());
        EXPECT_NE(std::string(e.what()).find(e.correlationId), std::string::npos);
    }
    EXPECT_THROW(fresh.request("q", {}, 0), BusError);
}

TEST(Bus, HandlerErrorPropagates) {
    MessageBus bus;
    bus.register_agent("bad", [](const Envelope&) -> std::optional<json> { throw std::runtime_error("boom"); });
    try {
        bus.request(agent_queue("bad"), {}, 10);
        FAIL();
    } catch (const BusError& e) {
        EXPECT_EQ(e.kind, BusError::Kind::HandlerFailure);
        EXPECT_STREQ(e.what(), "boom");
    }
}

TEST(Bus, DuplicateRepliesSeenOnce) {
    MessageBus bus(BusConfig{7, 10000, 1.0, 3});
    int calls = 0;
    bus.register_agent("echo", [&](const Envelope& e) -> std::optional<json> {
        ++calls;
        return e.body();
    });
    auto r = bus.request(agent_queue("echo"), {{"v", 1}}, 100);
    EXPECT_EQ(r, (json{{"v", 1}}));
    bus.run_until_idle();
    EXPECT_GE(calls, 1);
    EXPECT_GE(bus.stats().redelivered, 1u);
}

TEST(Bus, ShutdownRejectsPublish) {
    MessageBus bus;
    int seen = 0;
    bus.subscribe("q", [&](const Envelope&) -> std::optional<json> {
        ++seen;
        return std::nullopt;
    });
    bus.publish("q", {});
    bus.shutdown();
    EXPECT_EQ(seen, 1);
    EXPECT_THROW(bus.publish("q", {}), BusError);
}

Handler annotator(const std::string& name) {
    return [name](const Envelope& e) -> std::optional<json> {
        auto d = e.body()["draft"];
        d["notes"].push_back(name);
        return d;
    };
}

TEST(Chain, ThreeStagesInOrder) {
    MessageBus bus;
    for (auto n : {"x", "y", "z"}) bus.register_agent(n, annotator(n));
    auto out = bus.run_chain({"c1", {"x", "y", "z"}}, {{"notes", json::array()}});
    EXPECT_EQ(out["notes"], (json{"x", "y", "z"}));
    ASSERT_EQ(out["provenance"].size(), 3u);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(out["provenance"][i]["stage"], i + 1);
    EXPECT_EQ(out["provenance"][1]["agentId"], "y");
}

TEST(Chain, StageTimeoutAborts) {
    MessageBus bus;
    int zCalls = 0;
    bus.register_agent("x", annotator("x"));
    bus.subscribe("agents/nobody", [](const Envelope&) -> std::optional<json> { return std::nullopt; });
    bus.register_agent("z", [&](const Envelope&) -> std::optional<json> {
        ++zCalls;
        return json::object();
    });
    try {
        bus.run_chain({"c2", {"x", "nobody", "z"}}, {{"notes", json::array()}}, 20);
        FAIL();
    } catch (const ChainError& e) {
        EXPECT_EQ(e.kind, BusError::Kind::Timeout);
        EXPECT_EQ(e.stage, 2);
        EXPECT_EQ(e.agentId, "nobody");
        EXPECT_EQ(e.provenance.size(), 1u);
        EXPECT_NE(std::string(e.what()).find("stage 2"), std::string::npos);
    }
    EXPECT_EQ(zCalls, 0);
}

TEST(Chain, VetoAndEmpty) {
    MessageBus bus;
    bus.register_agent("x", annotator("x"));
    bus.register_agent("v", [](const Envelope&) -> std::optional<json> { return json{{"veto", "over budget"}}; });
    try {
        bus.run_chain({"c3", {"x", "v"}}, {{"notes", json::array()}});
        FAIL();
    } catch (const ChainError& e) {
        EXPECT_EQ(e.kind, BusError::Kind::Veto);
        EXPECT_EQ(e.stage, 2);
    }
    json d{{"k", 1}};
    EXPECT_EQ(bus.run_chain({"c4", {}}, d), d);
}

TEST(BusProperties, RandomizedSchedules) {
    for (std::uint64_t seed = 1; seed <= 500; ++seed) {
        std::mt19937_64 rng(seed);
        BusConfig cfg{seed, 10000, std::uniform_real_distribution<double>(0, 0.6)(rng), 3};
        MessageBus bus(cfg);
        int queues = 1 + static_cast<int>(rng() % 4);
        int publishers = 1 + static_cast<int>(rng() % 3);
        std::map<std::string, int> handled;
        std::map<std::pair<std::string, std::string>, std::vector<int>> firstSeen;
        std::set<std::string> seenIds;
        for (int q = 0; q < queues; ++q) {
            auto name = "q" + std::to_string(q);
            bus.subscribe(name, [&, name](const Envelope& e) -> std::optional<json> {
                ++handled[e.messageId];
                if (seenIds.insert(e.messageId).second) firstSeen[{e.publisher, name}].push_back(e.body()["n"]);
                return std::nullopt;
            });
        }
        std::map<std::pair<std::string, std::string>, std::vector<int>> published;
        std::vector<std::string> ids;
        int total = 10 + static_cast<int>(rng() % 30);
        for (int i = 0; i < total; ++i) {
            auto pub = "p" + std::to_string(rng() % publishers);
            auto q = "q" + std::to_string(rng() % queues);
            ids.push_back(bus.publish(q, {{"n", i}}, std::nullopt, pub));
            published[{pub, q}].push_back(i);
            if (rng() % 3 == 0) bus.step();
        }
        // request/reply interleaved with the traffic
        bus.register_agent("echo", [](const Envelope& e) -> std::optional<json> { return e.body(); });
        auto corrBefore = bus.stats().published;
        auto reply = bus.request(agent_queue("echo"), {{"seed", seed}}, 1000);
        ASSERT_EQ(reply, (json{{"seed", seed}})) << seed;
        ASSERT_GT(bus.stats().published, corrBefore);
        bus.shutdown();
        for (const auto& id : ids) ASSERT_GE(handled[id], 1) << "seed " << seed << " " << id;
        for (const auto& [key, order] : published) ASSERT_EQ(firstSeen[key], order) << "seed " << seed;

        // chain abort under failure injection
        MessageBus cbus(BusConfig{seed, 10000, cfg.redeliveryProbability, 3});
        int stages = static_cast<int>(rng() % 5);
        int failAt = static_cast<int>(rng() % (stages + 1));  // 0 = no failure
        std::vector<std::string> names;
        std::vector<int> calls(static_cast<std::size_t>(stages), 0);
        for (int s = 1; s <= stages; ++s) {
            auto n = "s" + std::to_string(s);
            names.push_back(n);
            bool fails = s == failAt;
            bool veto = rng() % 2 == 0;
            cbus.register_agent(n, [&, s, fails, veto](const Envelope& e) -> std::optional<json> {
                ++calls[static_cast<std::size_t>(s - 1)];
                if (fails && veto) return json{{"veto", "no"}};
                if (fails) return std::nullopt;
                auto d = e.body()["draft"];
                d["trail"].push_back(s);
                return d;
            });
        }
        try {
            auto out = cbus.run_chain({"c", names}, {{"trail", json::array()}}, 30);
            ASSERT_EQ(failAt, 0) << seed;
            if (stages > 0) ASSERT_EQ(out["provenance"].size(), static_cast<std::size_t>(stages));
        } catch (const ChainError& e) {
            ASSERT_EQ(e.stage, failAt) << seed;
            ASSERT_EQ(e.provenance.size(), static_cast<std::size_t>(failAt - 1));
            for (std::size_t k = 0; k < e.provenance.size(); ++k) ASSERT_EQ(e.provenance[k].stage, static_cast<int>(k) + 1);
            for (int s = failAt + 1; s <= stages; ++s) ASSERT_EQ(calls[static_cast<std::size_t>(s - 1)], 0);
        }
    }
}

TEST(BusProperties, ConcurrentPublishersKeepPerQueueOrder) {
    MessageBus bus(BusConfig{3});
    std::map<std::string, std::vector<int>> seen;
    for (int q = 0; q < 4; ++q) {
        auto name = "cq" + std::to_string(q);
        bus.subscribe(name, [&, name](const Envelope& e) -> std::optional<json> {
            seen[name].push_back(e.body()["n"]);
            return std::nullopt;
        });
    }
    std::vector<std::thread> threads;
    for (int q = 0; q < 4; ++q) {
        threads.emplace_back([&bus, q] {
            for (int i = 0; i < 200; ++i) bus.publish("cq" + std::to_string(q), {{"n", i}}, std::nullopt, "t" + std::to_string(q));
        });
    }
    for (auto& t : threads) t.join();
    bus.run_until_idle();
    for (int q = 0; q < 4; ++q) {
        const auto& v = seen["cq" + std::to_string(q)];
        ASSERT_EQ(v.size(), 200u);
        for (int i = 0; i < 200; ++i) ASSERT_EQ(v[static_cast<std::size_t>(i)], i);
    }
}

TEST(Bus, StatsJson) {
    MessageBus bus;
    bus.publish("a", {});
    auto j = to_json(bus.stats());
    EXPECT_EQ(j["published"], 1);
    EXPECT_EQ(j["depth"]["a"], 1);
}

}  // namespace
}  // namespace intentforge::bus
