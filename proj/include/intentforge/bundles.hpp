// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "intentforge/catalog.hpp"
#include "intentforge/money.hpp"

namespace intentforge {

struct BundleConstraints {
    std::optional<Money> budget;
    std::optional<std::int64_t> minConcurrentUsers;
};

struct BundleProposal {
    /// One offering per requested family, sorted by id.
    std::vector<std::string> offeringIds;
    Money totalCost;
    /// Smallest capacity among capacity-bearing members; absent if none carry one.
    std::optional<std::int64_t> capacity;
    bool satisfied = true;
    /// "budget", "users"
    std::vector<std::string> violations;

    bool operator==(const BundleProposal&) const = default;
};

nlohmann::json to_json(const BundleProposal& p);

/// Distinct offering names in the catalog, sorted.
std::vector<std::string> offering_families(const CatalogGraph& graph);

/// Every tier combination over `families` (offering names, matched
/// case-insensitively), ranked feasible first, then by cost, then by ids.
/// An unknown family yields no proposals.
std::vector<BundleProposal> propose_bundles(const CatalogGraph& graph, const std::vector<std::string>& families,
                                            const BundleConstraints& constraints, int days);

}  // namespace intentforge
