// SPDX-License-Identifier: Apache-2.0
#include "intentforge/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "intentforge/cocreation/guardrails.hpp"
#include "intentforge/text.hpp"

namespace intentforge::bench {

using nlohmann::json;
using cocreation::Role;
using cocreation::Turn;

std::string_view to_string(Baseline b) {
    switch (b) {
    case Baseline::Pass: return "pass";
    case Baseline::Partial: return "partial";
    case Baseline::Fail: return "fail";
    }
    return "fail";
}

bool BenchResult::operator==(const BenchResult& o) const {
    auto key = [](const BenchResult& r) {
        return std::tie(r.backendId, r.group, r.correctComposition, r.compositionTotal, r.hallucinatedProducts,
                        r.correctTotalCost, r.correctDuration, r.baselineAchievement, r.dialogueTimeSeconds, r.totalTokens,
                        r.failureReason);
    };
    if (key(*this) != key(o) || checks.size() != o.checks.size()) return false;
    for (std::size_t i = 0; i < checks.size(); ++i) {
        if (checks[i].label != o.checks[i].label || checks[i].name != o.checks[i].name || checks[i].passed != o.checks[i].passed) {
            return false;
        }
    }
    return true;
}

Scenario parse_scenario(const json& j, const CatalogGraph& g) {
    Scenario s;
    try {
        s.scenarioId = j.at("scenarioId").get<std::string>();
        std::set<std::string> labels;
        for (const auto& t : j.at("turns")) {
            ScenarioTurn turn{t.at("label").get<std::string>(), t.at("userText").get<std::string>(), {}};
            if (t.contains("expectations")) turn.expectations = t["expectations"].get<std::vector<std::string>>();
            if (!labels.insert(turn.label).second) throw ScenarioError("duplicate turn label " + turn.label);
            s.turns.push_back(std::move(turn));
        }
        const auto& gt = j.at("groundTruth");
        for (const auto& b : gt.at("bundle")) {
            OfferingSelection sel{b.at("offeringId").get<std::string>(), {}};
            if (b.contains("characteristics")) {
                for (const auto& [k, v] : b["characteristics"].items()) sel.characteristicValues[k] = scalar_from_json(v);
            }
            if (!g.offering(sel.offeringId)) throw ScenarioError("ground-truth offering " + sel.offeringId + " is not in the catalog");
            s.groundTruth.bundle.push_back(std::move(sel));
        }
        s.groundTruth.totalCost = money_from_json(gt.at("totalCost"));
        s.groundTruth.days = gt.at("days").get<int>();
        s.groundTruth.budget = money_from_json(gt.at("budget"));
        s.groundTruth.minUsers = gt.at("minUsers").get<std::int64_t>();
    } catch (const ScenarioError&) {
        throw;
    } catch (const std::exception& e) {
        throw ScenarioError(std::string("invalid scenario: ") + e.what());
    }
    if (s.turns.empty()) throw ScenarioError("scenario has no turns");
    return s;
}

Scenario load_scenario_file(const std::string& path, const CatalogGraph& g) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot read " + path);
    try {
        return parse_scenario(json::parse(in), g);
    } catch (const json::parse_error& e) {
        throw ScenarioError(path + ": " + e.what());
    }
}

std::string default_scenario_path() { return std::string(INTENTFORGE_SOURCE_DIR) + "/scenarios/sports-media-patras.json"; }

Composition score_composition(const std::vector<std::string>& proposed, const GroundTruth& truth, const CatalogGraph& g) {
    std::set<std::string> truthFamilies;
    for (const auto& b : truth.bundle) truthFamilies.insert(text::lower(g.offering(b.offeringId)->name));
    std::set<std::string> families;
    std::set<std::string> unknown;
    for (const auto& p : proposed) {
        if (const auto* o = g.offering(p)) {
            families.insert(text::lower(o->name));
            continue;
        }
        auto found = resolve_product_mention(g, p);
        if (found.empty()) unknown.insert(text::lower(text::trim(p)));
        for (const auto* o : found) families.insert(text::lower(o->name));
    }
    Composition c;
    for (const auto& f : families) c.correct += truthFamilies.count(f) ? 1 : 0;
    c.hallucinated = static_cast<int>(unknown.size());
    return c;
}

Baseline classify_baseline(int correct, int total, int hallucinated, bool cost, bool duration, bool payload) {
    if (!payload) return Baseline::Fail;
    if (correct == total && hallucinated == 0 && cost && duration) return Baseline::Pass;
    return Baseline::Partial;
}

namespace {

bool is_catalog_tool(const std::string& t) { return t == "list_offerings" || t == "get_offering" || t == "propose_bundles"; }

const json* submitted_payload(const std::vector<Turn>& tr) {
    const json* p = nullptr;
    for (const auto& t : tr) {
        if (t.role == Role::Tool && t.meta.value("tool", "") == "submit_order" && t.meta.value("ok", false)) {
            p = &t.meta["result"]["payload"];
        }
    }
    return p;
}

bool span_matches(const json& payload, int days) {
    if (!payload.contains("orderItems") || payload["orderItems"].empty()) return false;
    for (const auto& item : payload["orderItems"]) {
        auto s = parse_iso_date(item["validFor"].value("startDate", ""));
        auto e = parse_iso_date(item["validFor"].value("endDate", ""));
        if (!s || !e || inclusive_days(*s, *e) != days) return false;
    }
    return true;
}

std::vector<CheckResult> evaluate_checks(const std::vector<Turn>& tr, const Scenario& sc, const CatalogGraph& g) {
    std::vector<CheckResult> out;
    std::vector<std::size_t> starts;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        if (tr[i].role == Role::User) starts.push_back(i);
    }
    std::vector<std::string> truthIds;
    for (const auto& b : sc.groundTruth.bundle) truthIds.push_back(b.offeringId);
    std::sort(truthIds.begin(), truthIds.end());

    for (std::size_t k = 0; k < sc.turns.size(); ++k) {
        std::size_t from = k < starts.size() ? starts[k] : tr.size();
        std::size_t to = k + 1 < starts.size() ? starts[k + 1] : tr.size();
        auto window = [&](auto pred) {
            for (std::size_t i = from; i < to; ++i) {
                if (pred(tr[i])) return true;
            }
            return false;
        };
        auto upTo = [&](auto pred) {
            for (std::size_t i = 0; i < to; ++i) {
                if (pred(tr[i])) return true;
            }
            return false;
        };
        // Latest allowed selection and quote as of the end of this turn.
        std::vector<std::string> selection;
        bool quoted = false;
        Money quote;
        std::optional<Money> budget;
        for (std::size_t i = 0; i < to; ++i) {
            const auto& t = tr[i];
            if (t.role == Role::Tool && t.meta.value("ok", false)) {
                auto tool = t.meta.value("tool", "");
                if (tool == "select_bundle") {
                    selection = t.meta["result"]["offeringIds"].get<std::vector<std::string>>();
                    quoted = false;
                }
            }
            if (t.role == Role::Agent && !t.meta.contains("vetoedBy") && t.meta.contains("quotedTotal")) {
                quote = money_from_json(t.meta["quotedTotal"]);
                quoted = true;
            }
            if (t.role == Role::User) {
                if (auto b = cocreation::extract(t.content).budget) budget = b;
            }
        }
        for (const auto& name : sc.turns[k].expectations) {
            bool ok = false;
            if (k >= starts.size()) {
                ok = false;
            } else if (name == "catalogDiscovered") {
                ok = upTo([](const Turn& t) {
                    return t.role == Role::Tool && t.meta.value("ok", false) && is_catalog_tool(t.meta.value("tool", ""));
                });
            } else if (name == "bundleProposed") {
                ok = window([](const Turn& t) {
                    return t.role == Role::Agent && !t.meta.contains("vetoedBy") && t.meta.value("purpose", "") == "proposal";
                });
            } else if (name == "totalQuoted") {
                ok = window([](const Turn& t) {
                    return t.role == Role::Agent && !t.meta.contains("vetoedBy") && t.meta.contains("quotedTotal");
                });
            } else if (name == "withinBudget") {
                ok = quoted && budget && quote <= *budget;
            } else if (name == "groundTruthBundle") {
                ok = selection == truthIds;
            } else if (name == "groundTruthCost") {
                ok = quoted && quote == sc.groundTruth.totalCost;
            } else if (name == "payloadPreviewed") {
                ok = window([](const Turn& t) {
                    return t.role == Role::Tool && t.meta.value("tool", "") == "preview_order" && t.meta.value("ok", false);
                });
            } else if (name == "confirmationRequested") {
                ok = window([](const Turn& t) {
                    return t.role == Role::Agent && !t.meta.contains("vetoedBy") && t.meta.value("purpose", "") == "quote" &&
                           t.content.find("confirm") != std::string::npos;
                });
            } else if (name == "orderSubmitted") {
                ok = window([](const Turn& t) {
                    return t.role == Role::Tool && t.meta.value("tool", "") == "submit_order" && t.meta.value("ok", false);
                });
            }
            out.push_back({sc.turns[k].label, name, ok});
        }
    }
    (void)g;
    return out;
}

}  // namespace

BenchResult score_transcript(const std::vector<Turn>& tr, const Scenario& sc, const CatalogGraph& g, const std::string& backendId,
                             const std::string& group, std::optional<std::string> failureReason) {
    BenchResult r;
    r.backendId = backendId;
    r.group = group;
    r.compositionTotal = static_cast<int>(sc.groundTruth.bundle.size());

    const json* payload = submitted_payload(tr);
    std::vector<std::string> proposed;
    if (payload) {
        for (const auto& item : (*payload)["orderItems"]) proposed.push_back(item.value("offeringId", ""));
    } else {
        for (const auto& t : tr) {
            if (t.role == Role::Agent && t.meta.contains("recommendations") && !t.meta["recommendations"].empty()) {
                proposed = t.meta["recommendations"].get<std::vector<std::string>>();
            }
        }
    }
    r.correctComposition = score_composition(proposed, sc.groundTruth, g).correct;

    std::set<std::string> invented;
    for (const auto& t : tr) {
        if (t.role != Role::Agent || !t.meta.contains("recommendations")) continue;
        for (const auto& n : t.meta["recommendations"]) {
            if (resolve_product_mention(g, n.get<std::string>()).empty()) invented.insert(text::lower(text::trim(n.get<std::string>())));
        }
    }
    r.hallucinatedProducts = static_cast<int>(invented.size());

    std::optional<Money> lastQuote;
    for (const auto& t : tr) {
        if (t.role == Role::Agent && !t.meta.contains("vetoedBy") && t.meta.contains("quotedTotal")) {
            lastQuote = money_from_json(t.meta["quotedTotal"]);
        }
    }
    r.correctTotalCost = lastQuote && *lastQuote == sc.groundTruth.totalCost;
    r.correctDuration = payload && span_matches(*payload, sc.groundTruth.days);

    bool usedTools = std::any_of(tr.begin(), tr.end(), [](const Turn& t) {
        return t.role == Role::Tool && t.meta.value("ok", false) && is_catalog_tool(t.meta.value("tool", ""));
    });
    if (usedTools && !tr.empty()) {
        r.dialogueTimeSeconds = static_cast<double>(tr.back().timestamp - tr.front().timestamp) / 1000.0;
        std::int64_t tokens = 0;
        for (const auto& t : tr) tokens += t.tokenCount;
        r.totalTokens = tokens;
    }
    r.baselineAchievement = classify_baseline(r.correctComposition, r.compositionTotal, r.hallucinatedProducts,
                                              r.correctTotalCost, r.correctDuration, payload != nullptr);
    if (failureReason) {
        r.failureReason = failureReason;
    } else if (!payload) {
        r.failureReason = usedTools ? "no order payload was submitted" : "catalog tools were never used";
    }
    r.checks = evaluate_checks(tr, sc, g);
    return r;
}

RunOutput run_scenario(const Scenario& sc, std::unique_ptr<cocreation::Reasoner> backend, const CatalogGraph& g,
                       std::shared_ptr<cocreation::Clock> clock) {
    std::string id = backend->id();
    std::string group = backend->group();
    InventoryStore inventory(g);
    cocreation::Agent agent(g, std::move(backend), "bench-" + sc.scenarioId, {}, std::move(clock), &inventory);
    std::optional<std::string> failure;
    for (const auto& turn : sc.turns) {
        if (agent.session().status == cocreation::SessionStatus::Finalized) break;
        try {
            agent.send(turn.userText);
        } catch (const std::exception& e) {
            failure = std::string(turn.label) + ": " + e.what();
            break;
        }
    }
    if (!failure && agent.session().diagnostic) failure = *agent.session().diagnostic;
    auto tr = agent.session().transcript;
    auto result = score_transcript(tr, sc, g, id, group, failure);
    return {result, std::move(tr)};
}

json to_json(const BenchResult& r) {
    json checks = json::array();
    for (const auto& c : r.checks) checks.push_back({{"label", c.label}, {"name", c.name}, {"passed", c.passed}});
    return {{"backendId", r.backendId},
            {"group", r.group},
            {"correctComposition", r.correctComposition},
            {"compositionTotal", r.compositionTotal},
            {"hallucinatedProducts", r.hallucinatedProducts},
            {"correctTotalCost", r.correctTotalCost ? "pass" : "fail"},
            {"correctDuration", r.correctDuration ? "pass" : "fail"},
            {"baselineAchievement", std::string(to_string(r.baselineAchievement))},
            {"dialogueTimeSeconds", r.dialogueTimeSeconds ? json(*r.dialogueTimeSeconds) : json(nullptr)},
            {"totalTokens", r.totalTokens ? json(*r.totalTokens) : json(nullptr)},
            {"failureReason", r.failureReason ? json(*r.failureReason) : json(nullptr)},
            {"checks", checks}};
}

namespace {

std::string cap(std::string_view s) {
    std::string out(s);
    if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string fixed(double v, int digits) {
    std::ostringstream o;
    o << std::fixed << std::setprecision(digits) << v;
    return o.str();
}

}  // namespace

std::string emit_report(const std::vector<BenchResult>& results, const std::string& format) {
    if (format == "json") {
        json arr = json::array();
        for (const auto& r : results) arr.push_back(to_json(r));
        return arr.dump(2) + "\n";
    }
    if (format == "csv") {
        std::string out =
            "backendId,group,correctComposition,compositionTotal,hallucinatedProducts,correctTotalCost,correctDuration,"
            "baselineAchievement,dialogueTimeSeconds,totalTokens,failureReason\n";
        for (const auto& r : results) {
            out += csv_field(r.backendId) + "," + r.group + "," + std::to_string(r.correctComposition) + "," +
                   std::to_string(r.compositionTotal) + "," + std::to_string(r.hallucinatedProducts) + "," +
                   (r.correctTotalCost ? "pass" : "fail") + "," + (r.correctDuration ? "pass" : "fail") + "," +
                   std::string(to_string(r.baselineAchievement)) + "," +
                   (r.dialogueTimeSeconds ? fixed(*r.dialogueTimeSeconds, 3) : "") + "," +
                   (r.totalTokens ? std::to_string(*r.totalTokens) : "") + "," + csv_field(r.failureReason.value_or("")) + "\n";
        }
        return out;
    }
    if (format == "table") {
        const std::vector<std::string> header{"LLM",
                                              "Correct Product Composition",
                                              "Hallucinated Products",
                                              "Correct Total Cost",
                                              "Correct Duration",
                                              "Baseline Achievement",
                                              "Total Dialogue Time (min)",
                                              "Total Tokens"};
        std::vector<std::vector<std::string>> rows{header};
        std::vector<std::string> sections;
        for (const auto& [group, title] : {std::pair{"reasoning", "Reasoning Models"}, std::pair{"non-reasoning", "Non-Reasoning Models"}}) {
            bool any = false;
            for (const auto& r : results) {
                if (r.group != group) continue;
                if (!any) rows.push_back({title});
                any = true;
                rows.push_back({r.backendId, std::to_string(r.correctComposition) + "/" + std::to_string(r.compositionTotal),
                                std::to_string(r.hallucinatedProducts), r.correctTotalCost ? "Pass" : "Fail",
                                r.correctDuration ? "Pass" : "Fail", cap(to_string(r.baselineAchievement)),
                                r.dialogueTimeSeconds ? fixed(*r.dialogueTimeSeconds / 60.0, 2) : "-",
                                r.totalTokens ? std::to_string(*r.totalTokens) : "-"});
            }
        }
        for (const auto& r : results) {
            if (r.group != "reasoning" && r.group != "non-reasoning") {
                rows.push_back({r.backendId, std::to_string(r.correctComposition) + "/" + std::to_string(r.compositionTotal),
                                std::to_string(r.hallucinatedProducts), r.correctTotalCost ? "Pass" : "Fail",
                                r.correctDuration ? "Pass" : "Fail", cap(to_string(r.baselineAchievement)),
                                r.dialogueTimeSeconds ? fixed(*r.dialogueTimeSeconds / 60.0, 2) : "-",
                                r.totalTokens ? std::to_string(*r.totalTokens) : "-"});
            }
        }
        std::vector<std::size_t> width(header.size(), 0);
        for (const auto& row : rows) {
            if (row.size() == 1) continue;
            for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
        }
        std::string out;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto& row = rows[r];
            if (row.size() == 1) {
                out += row[0] + "\n";
                continue;
            }
            for (std::size_t i = 0; i < row.size(); ++i) {
                out += row[i];
                if (i + 1 < row.size()) out += std::string(width[i] - row[i].size() + 2, ' ');
            }
            out += "\n";
        }
        return out;
    }
    throw std::invalid_argument("unknown report format '" + format + "' (table, json, csv)");
}

}  // namespace intentforge::bench
