// SPDX-License-Identifier: Apache-2.0
#include "intentforge/cocreation/guardrails.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include "intentforge/text.hpp"

namespace intentforge::cocreation {

namespace {

const std::regex& money_regex() {
    static const std::regex re(
        R"((€\s*[0-9][0-9,]*(\.[0-9]{1,2})?)|([0-9][0-9,]*(\.[0-9]{1,2})?\s*(€|eur\b|euros?\b)))", std::regex::icase);
    return re;
}

std::string strip_markup(std::string s) {
    s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == '*' || c == '`' || c == '_'; }), s.end());
    return text::trim(s);
}

bool is_bullet(const std::string& line) {
    auto t = text::trim(line);
    if (t.empty()) return false;
    if (t[0] == '-' || t[0] == '*' || t.rfind("•", 0) == 0) return true;
    std::size_t i = 0;
    while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i;
    return i > 0 && i < t.size() && (t[i] == '.' || t[i] == ')');
}

std::string bullet_name(std::string line) {
    auto t = text::trim(line);
    if (t.rfind("•", 0) == 0) t = t.substr(std::string("•").size());
    std::size_t i = 0;
    while (i < t.size() && (t[i] == '-' || t[i] == '*' || std::isdigit(static_cast<unsigned char>(t[i])) || t[i] == '.' ||
                            t[i] == ')' || t[i] == ' ')) {
        if (t[i] == '*' && i + 1 < t.size() && t[i + 1] != ' ' && t[i + 1] != '*') break;
        ++i;
    }
    t = t.substr(i);
    std::size_t cut = t.size();
    for (const char* sep : {":", " - ", " – ", " — ", " at ", " for €"}) {
        auto p = t.find(sep);
        if (p != std::string::npos) cut = std::min(cut, p);
    }
    // A price straight after the name: "Name €300/day" or "Name 300 EUR".
    std::smatch m;
    std::string head = t.substr(0, cut);
    if (std::regex_search(head, m, money_regex())) head = head.substr(0, static_cast<std::size_t>(m.position(0)));
    return strip_markup(head);
}

std::set<std::string> names_lower(const std::vector<std::string>& v) {
    std::set<std::string> out;
    for (const auto& s : v) out.insert(text::lower(s));
    return out;
}

const std::vector<std::string>& capability_lexicon() {
    static const std::vector<std::string> words = {"guarantee", "unlimited", "zero latency", "100% uptime", "lossless"};
    return words;
}

bool is_catalog_tool(const std::string& name) {
    return name == "list_offerings" || name == "get_offering" || name == "propose_bundles";
}

std::vector<std::string> toolcall_offering_ids(const ToolCall& c) {
    std::vector<std::string> ids;
    if (c.name == "select_bundle" || c.name == "quote_price") {
        if (c.args.contains("offeringIds") && c.args["offeringIds"].is_array()) {
            for (const auto& id : c.args["offeringIds"]) {
                if (id.is_string()) ids.push_back(id.get<std::string>());
            }
        }
    } else if (c.name == "preview_order") {
        const auto& p = c.args.contains("payload") ? c.args["payload"] : c.args;
        if (p.contains("orderItems") && p["orderItems"].is_array()) {
            for (const auto& item : p["orderItems"]) {
                if (item.contains("offeringId") && item["offeringId"].is_string()) ids.push_back(item["offeringId"].get<std::string>());
            }
        }
    }
    return ids;
}

}  // namespace

bool contains_money(std::string_view t) {
    std::string s(t);
    return std::regex_search(s, money_regex());
}

std::optional<Money> extract_total(std::string_view t) {
    std::string s(t);
    static const std::regex total(
        R"(total[^0-9€\n]{0,40}(?:€\s*([0-9][0-9,]*(?:\.[0-9]{1,2})?)|([0-9][0-9,]*(?:\.[0-9]{1,2})?)\s*(?:€|eur\b|euros?\b)))",
        std::regex::icase);
    static const std::regex trailing(R"(([0-9][0-9,]*(?:\.[0-9]{1,2})?)\s*(?:€|eur\b|euros?\b)\s*(?:in\s+)?total\b)",
                                     std::regex::icase);
    std::optional<Money> last;
    std::ptrdiff_t lastPos = -1;
    for (auto it = std::sregex_iterator(s.begin(), s.end(), total); it != std::sregex_iterator(); ++it) {
        auto text = (*it)[1].matched ? (*it)[1].str() : (*it)[2].str();
        if (auto m = parse_money_amount(text)) {
            last = m;
            lastPos = it->position();
        }
    }
    for (auto it = std::sregex_iterator(s.begin(), s.end(), trailing); it != std::sregex_iterator(); ++it) {
        if (it->position() <= lastPos) continue;
        if (auto m = parse_money_amount((*it)[1].str())) {
            last = m;
            lastPos = it->position();
        }
    }
    return last;
}

std::vector<std::string> recommended_names(const TextReply& r) {
    std::vector<std::string> out = r.recommendations;
    auto seen = names_lower(out);
    std::string line;
    std::size_t start = 0;
    while (start <= r.text.size()) {
        auto end = r.text.find('\n', start);
        if (end == std::string::npos) end = r.text.size();
        line = r.text.substr(start, end - start);
        start = end + 1;
        if (!is_bullet(line) || !contains_money(line)) continue;
        auto name = bullet_name(line);
        if (name.empty() || text::icontains(name, "total")) continue;
        if (seen.insert(text::lower(name)).second) out.push_back(name);
    }
    return out;
}

std::vector<std::string> catalog_grounded_ids(const Session& s) {
    std::set<std::string> ids;
    for (const auto& t : s.transcript) {
        if (t.role != Role::Tool || !t.meta.value("ok", false)) continue;
        if (!is_catalog_tool(t.meta.value("tool", std::string{}))) continue;
        const auto& res = t.meta["result"];
        if (res.contains("offerings")) {
            for (const auto& o : res["offerings"]) ids.insert(o.at("id").get<std::string>());
        }
        if (res.contains("offering")) ids.insert(res["offering"].at("id").get<std::string>());
        if (res.contains("proposals")) {
            for (const auto& p : res["proposals"]) {
                for (const auto& id : p.at("offeringIds")) ids.insert(id.get<std::string>());
            }
        }
    }
    return {ids.begin(), ids.end()};
}

Verdict check_guardrails(const Session& s, const Effect& effect, const CatalogGraph& g) {
    const auto* reply = std::get_if<TextReply>(&effect);
    const auto* call = std::get_if<ToolCall>(&effect);
    std::vector<std::string> names = reply ? recommended_names(*reply) : std::vector<std::string>{};

    // G1: product names or ids absent from the catalog.
    std::vector<std::string> unknown;
    for (const auto& n : names) {
        if (resolve_product_mention(g, n).empty()) unknown.push_back(n);
    }
    if (call) {
        for (const auto& id : toolcall_offering_ids(*call)) {
            if (!g.offering(id)) unknown.push_back(id);
        }
    }
    if (!unknown.empty()) return Verdict::veto("G1", "not in the catalog: " + text::join(unknown, ", "));

    // G2: no order without explicit confirmation.
    if (call && call->name == "submit_order" && !s.draft.confirmed) {
        return Verdict::veto("G2", "order submission before explicit user confirmation");
    }

    if (reply) {
        // G3: proposals and quotes must carry a cost.
        if (reply->purpose == ReplyPurpose::Quote && !extract_total(reply->text)) {
            return Verdict::veto("G3", "quote without a total cost");
        }
        if ((reply->purpose == ReplyPurpose::Proposal || !names.empty()) && !contains_money(reply->text)) {
            return Verdict::veto("G3", "product proposal without a cost");
        }

        // G4: no services, no assumed capabilities.
        for (const auto& sv : g.serviceSpecs) {
            if (text::icontains(reply->text, sv.name)) return Verdict::veto("G4", "mentions service " + sv.name);
        }
        for (const auto& rs : g.resourceSpecs) {
            if (text::icontains(reply->text, rs.name)) return Verdict::veto("G4", "mentions resource " + rs.name);
        }
        for (const auto& w : capability_lexicon()) {
            if (text::icontains(reply->text, w)) return Verdict::veto("G4", "claims a capability (\"" + w + "\")");
        }
    }

    // G5: products must come out of catalog tool results, not out of the use case.
    std::vector<std::string> offered;
    for (const auto& n : names) {
        for (const auto* o : resolve_product_mention(g, n)) offered.push_back(o->id);
    }
    if (call) {
        for (const auto& id : toolcall_offering_ids(*call)) offered.push_back(id);
    }
    if (!offered.empty()) {
        auto grounded = catalog_grounded_ids(s);
        if (grounded.empty()) return Verdict::veto("G5", "products suggested before any catalog lookup");
        std::vector<std::string> ungrounded;
        for (const auto& id : offered) {
            if (!std::binary_search(grounded.begin(), grounded.end(), id)) ungrounded.push_back(id);
        }
        if (!ungrounded.empty()) return Verdict::veto("G5", "not returned by a catalog tool: " + text::join(ungrounded, ", "));
    }
    return Verdict::allow();
}

std::string corrective_text(const Verdict& v) {
    if (v.rule == "G1") return "I can only recommend products that exist in the catalog. Let me check the catalog again.";
    if (v.rule == "G2") return "I cannot place the order until you explicitly confirm it.";
    if (v.rule == "G3") return "I need to include the total cost before proposing this. Let me prepare a quote.";
    if (v.rule == "G4") return "I can only describe products using their catalog descriptions.";
    if (v.rule == "G5") return "I need to look up the catalog before suggesting products.";
    return "I cannot do that.";
}

}  // namespace intentforge::cocreation
