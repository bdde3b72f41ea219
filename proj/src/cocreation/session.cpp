// SPDX-License-Identifier: Apache-2.0
#include "intentforge/cocreation/session.hpp"

#include <algorithm>
#include <regex>

#include "intentforge/text.hpp"

namespace intentforge::cocreation {

using nlohmann::json;

std::string_view to_string(Role r) {
    switch (r) {
    case Role::User: return "user";
    case Role::Agent: return "agent";
    case Role::Tool: return "tool";
    }
    return "user";
}

std::string_view to_string(SessionStatus s) {
    switch (s) {
    case SessionStatus::Active: return "active";
    case SessionStatus::AwaitingUser: return "awaitingUser";
    case SessionStatus::Finalized: return "finalized";
    case SessionStatus::Aborted: return "aborted";
    }
    return "active";
}

std::string_view to_string(ConstraintName n) {
    switch (n) {
    case ConstraintName::Budget: return "budget";
    case ConstraintName::MinConcurrentUsers: return "minConcurrentUsers";
    case ConstraintName::LatencyCeilingMs: return "latencyCeilingMs";
    case ConstraintName::Location: return "location";
    case ConstraintName::Duration: return "duration";
    case ConstraintName::StartDate: return "startDate";
    }
    return "budget";
}

int estimate_tokens(std::string_view text) {
    auto words = static_cast<int>(text::split_words(text).size());
    return (words * 4 + 2) / 3;
}

std::optional<Scalar> StructuredGoal::latest(ConstraintName n) const {
    for (auto it = explicitConstraints.rbegin(); it != explicitConstraints.rend(); ++it) {
        if (it->name == n) return it->value;
    }
    return std::nullopt;
}

json to_json(const Turn& t) {
    return {{"index", t.index},
            {"role", std::string(to_string(t.role))},
            {"content", t.content},
            {"timestamp", t.timestamp},
            {"tokenCount", t.tokenCount},
            {"meta", t.meta}};
}

json transcript_json(const std::vector<Turn>& transcript) {
    json arr = json::array();
    for (const auto& t : transcript) arr.push_back(to_json(t));
    return arr;
}

std::vector<Turn> transcript_from_json(const json& j) {
    std::vector<Turn> out;
    for (const auto& t : j) {
        Turn turn;
        turn.index = t.at("index").get<int>();
        auto role = t.at("role").get<std::string>();
        turn.role = role == "agent" ? Role::Agent : role == "tool" ? Role::Tool : Role::User;
        turn.content = t.at("content").get<std::string>();
        turn.timestamp = t.at("timestamp").get<std::int64_t>();
        turn.tokenCount = t.at("tokenCount").get<int>();
        turn.meta = t.value("meta", json::object());
        out.push_back(std::move(turn));
    }
    return out;
}

json to_json(const StructuredGoal& g) {
    json cs = json::array();
    for (const auto& c : g.explicitConstraints) {
        cs.push_back({{"name", std::string(to_string(c.name))}, {"value", to_json_value(c.value)}, {"turn", c.turn}});
    }
    return {{"objective", g.objective},
            {"explicitConstraints", cs},
            {"assumptions", g.assumptions},
            {"missingInfo", g.missingInfo},
            {"features", g.features}};
}

json to_json(const DraftIntent& d) {
    json sels = json::array();
    for (const auto& s : d.offeringSelections) {
        json cv = json::object();
        for (const auto& [k, v] : s.characteristicValues) cv[k] = to_json_value(v);
        sels.push_back({{"offeringId", s.offeringId}, {"characteristicValues", cv}});
    }
    json j{{"offeringSelections", sels}, {"constraints", to_json(d.constraints)}, {"confirmed", d.confirmed}};
    j["period"] = d.period ? json{{"startDate", format_iso_date(d.period->startDate)}, {"days", d.period->days}} : json(nullptr);
    j["days"] = d.days ? json(*d.days) : json(nullptr);
    j["quotedCost"] = d.quotedCost ? to_json(*d.quotedCost) : json(nullptr);
    j["payload"] = d.payload ? *d.payload : json(nullptr);
    j["confirmationTurn"] = d.confirmationTurn ? json(*d.confirmationTurn) : json(nullptr);
    return j;
}

json to_json(const Session& s) {
    json j{{"sessionId", s.sessionId},
           {"status", std::string(to_string(s.status))},
           {"transcript", transcript_json(s.transcript)},
           {"taskList", to_json(s.taskList)},
           {"draft", to_json(s.draft)}};
    j["goal"] = s.goal ? to_json(*s.goal) : json(nullptr);
    if (s.diagnostic) j["diagnostic"] = *s.diagnostic;
    return j;
}

// ---------------------------------------------------------------- extraction

namespace {

std::optional<int> small_number(const std::string& w) {
    static const std::pair<const char*, int> words[] = {{"one", 1}, {"a", 1},    {"an", 1},    {"two", 2},
                                                        {"three", 3}, {"four", 4}, {"five", 5}, {"six", 6}};
    for (const auto& [k, v] : words) {
        if (w == k) return v;
    }
    if (!w.empty() && std::all_of(w.begin(), w.end(), [](char c) { return c >= '0' && c <= '9'; })) return std::stoi(w);
    return std::nullopt;
}

std::int64_t digits_only(const std::string& s) {
    std::int64_t v = 0;
    for (char c : s) {
        if (c >= '0' && c <= '9') v = v * 10 + (c - '0');
    }
    return v;
}

std::optional<Money> find_budget(const std::string& t) {
    static const std::regex money(R"((?:€\s*([0-9][0-9,]*(?:\.[0-9]{1,2})?))|(?:([0-9][0-9,]*(?:\.[0-9]{1,2})?)\s*(?:€|eur\b|euros?\b)))",
                                  std::regex::icase);
    static const std::regex cue(R"(budget|spend|afford|up to|at most|maximum|cap\b)", std::regex::icase);
    std::smatch c;
    if (!std::regex_search(t, c, cue)) return std::nullopt;
    auto cuePos = c.position(0);
    std::optional<Money> best, after;
    for (auto it = std::sregex_iterator(t.begin(), t.end(), money); it != std::sregex_iterator(); ++it) {
        auto text = (*it)[1].matched ? (*it)[1].str() : (*it)[2].str();
        auto m = parse_money_amount(text);
        if (!m) continue;
        best = m;
        if (!after && it->position(0) >= cuePos) after = m;
    }
    return after ? after : best;
}

std::optional<Date> find_date(const std::string& t) {
    static const std::regex iso(R"(\b([0-9]{4}-[0-9]{2}-[0-9]{2})\b)");
    std::smatch m;
    if (std::regex_search(t, m, iso)) return parse_iso_date(m[1].str());
    static const std::regex named(
        R"(\b(january|february|march|april|may|june|july|august|september|october|november|december)\s+([0-9]{1,2})(?:st|nd|rd|th)?,?\s+([0-9]{4})\b)",
        std::regex::icase);
    if (std::regex_search(t, m, named)) {
        static const char* months[] = {"january", "february", "march",     "april",   "may",      "june",
                                       "july",    "august",   "september", "october", "november", "december"};
        auto name = text::lower(m[1].str());
        int month = 0;
        for (int i = 0; i < 12; ++i) {
            if (name == months[i]) month = i + 1;
        }
        char buf[40];
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", std::stoi(m[3].str()), month, std::stoi(m[2].str()));
        return parse_iso_date(buf);
    }
    return std::nullopt;
}

}  // namespace

Extraction extract(std::string_view userText) {
    Extraction e;
    std::string t(userText);
    std::string low = text::lower(t);
    std::smatch m;

    e.budget = find_budget(t);

    static const std::regex users(R"(([0-9][0-9,]*)\s+(?:simultaneous\s+|concurrent\s+)?(?:users|viewers|devices|subscribers)\b)",
                                  std::regex::icase);
    if (std::regex_search(t, m, users)) e.users = digits_only(m[1].str());

    static const std::regex latency(R"((?:<|under|below|less than)\s*([0-9]+(?:\.[0-9]{1,4})?)\s*ms\b)", std::regex::icase);
    if (std::regex_search(t, m, latency)) e.latencyCeilingMs = Decimal::parse(m[1].str());

    static const std::regex city(R"(city of ([A-Z][A-Za-z-]+))");
    static const std::regex inCity(R"(\bin ([A-Z][a-z]+), [A-Z][a-z]+)");
    if (std::regex_search(t, m, city) || std::regex_search(t, m, inCity)) e.location = m[1].str();

    static const std::regex weeks(R"(\b(one|a|two|three|four|[0-9]+)\s+weeks?\b)");
    static const std::regex days(R"(\b(one|a|two|three|four|five|six|[0-9]+)\s+days?\b)");
    if (std::regex_search(low, m, weeks)) {
        if (auto n = small_number(m[1].str())) e.durationDays = *n * 7;
    } else if (std::regex_search(low, m, days)) {
        if (auto n = small_number(m[1].str())) e.durationDays = *n;
    }

    e.startDate = find_date(t);

    static const std::regex yes(R"(^\s*(yes|yep|yeah|confirm|confirmed|i confirm|proceed|go ahead|approve|approved|ok|okay|sure)\b)");
    static const std::regex no(R"(\b(no|not|don't|do not|cancel|wait)\b)");
    e.affirmation = std::regex_search(low, yes) && !std::regex_search(low, no);

    static const char* keywords[] = {"5g", "mobile", "media", "video", "stream", "sports", "monitor", "api", "latency", "edge"};
    for (const char* k : keywords) {
        if (std::regex_search(low, std::regex(std::string("\\b") + k))) e.features.push_back(k);
    }
    return e;
}

std::optional<StructuredGoal> interpret_intent(Session& s, int turnIndex) {
    const auto& turn = s.transcript.at(static_cast<std::size_t>(turnIndex));
    auto body = text::trim(turn.content);
    if (body.empty()) return s.goal;
    auto e = extract(body);
    if (!s.goal) {
        s.goal = StructuredGoal{};
        s.goal->objective = body;
    }
    auto& g = *s.goal;
    auto add = [&](ConstraintName n, Scalar v) { g.explicitConstraints.push_back({n, std::move(v), turnIndex}); };
    if (e.budget) add(ConstraintName::Budget, Scalar(Decimal::from_scaled(e.budget->cents * 100)));
    if (e.users) add(ConstraintName::MinConcurrentUsers, Scalar::number(*e.users));
    if (e.latencyCeilingMs) add(ConstraintName::LatencyCeilingMs, Scalar(*e.latencyCeilingMs));
    if (e.location) add(ConstraintName::Location, Scalar(*e.location));
    if (e.durationDays) add(ConstraintName::Duration, Scalar::number(*e.durationDays));
    if (e.startDate) add(ConstraintName::StartDate, Scalar(format_iso_date(*e.startDate)));
    for (auto& f : e.features) {
        if (std::find(g.features.begin(), g.features.end(), f) == g.features.end()) g.features.push_back(f);
    }

    g.assumptions.clear();
    if (auto loc = g.latest(ConstraintName::Location)) g.assumptions.push_back("coverage is limited to " + loc->as_string());
    if (auto d = g.latest(ConstraintName::Duration)) {
        g.assumptions.push_back("the service runs for " + d->to_display() + " consecutive days");
    }
    g.missingInfo.clear();
    for (auto n : {ConstraintName::Budget, ConstraintName::MinConcurrentUsers, ConstraintName::StartDate, ConstraintName::Duration}) {
        if (!g.latest(n)) g.missingInfo.emplace_back(to_string(n));
    }
    return g;
}

const TaskList& decompose_goal(Session& s) {
    for (auto k : task_template()) s.taskList.ensure(k);
    return s.taskList;
}

}  // namespace intentforge::cocreation
