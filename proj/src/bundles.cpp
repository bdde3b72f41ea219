// SPDX-License-Identifier: Apache-2.0
#include "intentforge/bundles.hpp"

#include <algorithm>
#include <set>

#include "intentforge/text.hpp"
#include "intentforge/traversal.hpp"

namespace intentforge {

nlohmann::json to_json(const BundleProposal& p) {
    nlohmann::json j{{"offeringIds", p.offeringIds},
                     {"totalCost", to_json(p.totalCost)},
                     {"satisfied", p.satisfied},
                     {"violations", p.violations}};
    j["capacity"] = p.capacity ? nlohmann::json(*p.capacity) : nlohmann::json(nullptr);
    return j;
}

std::vector<std::string> offering_families(const CatalogGraph& g) {
    std::set<std::string> names;
    for (const auto& o : g.offerings) names.insert(o.name);
    return {names.begin(), names.end()};
}

namespace {

void enumerate(const std::vector<std::vector<const ProductOffering*>>& groups, std::size_t i,
               std::vector<const ProductOffering*>& pick, std::vector<std::vector<const ProductOffering*>>& out) {
    if (i == groups.size()) {
        out.push_back(pick);
        return;
    }
    for (const auto* o : groups[i]) {
        pick.push_back(o);
        enumerate(groups, i + 1, pick, out);
        pick.pop_back();
    }
}

}  // namespace

std::vector<BundleProposal> propose_bundles(const CatalogGraph& g, const std::vector<std::string>& families,
                                            const BundleConstraints& c, int days) {
    std::vector<std::vector<const ProductOffering*>> groups;
    std::set<std::string> seen;
    for (const auto& f : families) {
        if (!seen.insert(text::lower(f)).second) continue;
        std::vector<const ProductOffering*> group;
        for (const auto& o : g.offerings) {
            if (text::iequals(o.name, f)) group.push_back(&o);
        }
        if (group.empty()) return {};
        groups.push_back(std::move(group));
    }
    if (groups.empty()) return {};

    std::vector<std::vector<const ProductOffering*>> combos;
    std::vector<const ProductOffering*> pick;
    enumerate(groups, 0, pick, combos);

    std::vector<BundleProposal> out;
    for (const auto& combo : combos) {
        BundleProposal p;
        for (const auto* o : combo) {
            p.offeringIds.push_back(o->id);
            if (auto cap = offering_capacity(*o)) p.capacity = p.capacity ? std::min(*p.capacity, *cap) : *cap;
        }
        std::sort(p.offeringIds.begin(), p.offeringIds.end());
        p.totalCost = compute_cost(g, p.offeringIds, days);
        if (c.budget && p.totalCost > *c.budget) p.violations.push_back("budget");
        if (c.minConcurrentUsers && (!p.capacity || *p.capacity < *c.minConcurrentUsers)) p.violations.push_back("users");
        p.satisfied = p.violations.empty();
        out.push_back(std::move(p));
    }
    std::sort(out.begin(), out.end(), [](const BundleProposal& a, const BundleProposal& b) {
        if (a.satisfied != b.satisfied) return a.satisfied;
        if (a.totalCost != b.totalCost) return a.totalCost < b.totalCost;
        return a.offeringIds < b.offeringIds;
    });
    return out;
}

}  // namespace intentforge
