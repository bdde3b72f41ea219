// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "intentforge/catalog.hpp"
#include "intentforge/money.hpp"
#include "intentforge/rule_dsl.hpp"
#include "intentforge/traversal.hpp"

namespace intentforge::testing {

struct OracleBundle {
    std::vector<std::string> ids;
    std::int64_t cents = 0;
    bool feasible = true;
    std::vector<std::string> violations;
};

/// Straight nested-loop enumeration, written without any library helpers.
std::vector<OracleBundle> brute_force_bundles(const CatalogGraph& g, const std::vector<std::string>& families,
                                              std::optional<std::int64_t> budgetCents,
                                              std::optional<std::int64_t> minUsers, int days);

/// Expected derived-test multiset (testSpecId -> count) from path counting.
std::map<std::string, int> expected_test_counts(const CatalogGraph& g, const std::vector<std::string>& offeringIds);

/// Small acyclic catalog with literal-threshold tests; at most 20 nodes.
CatalogGraph random_catalog(std::mt19937_64& rng);

rules::ExprPtr random_expr(std::mt19937_64& rng, ValueKind kind, int depth);
rules::Rule random_rule(std::mt19937_64& rng);

std::vector<std::string> ground_truth_families();
std::string fixture_path();
const CatalogGraph& fixture_graph();
ConfirmedIntent intent_for(const std::vector<std::string>& offeringIds, int days);
/// Gold slice, large edge, setup and observability for 7 days from 2026-11-02.
ConfirmedIntent ground_truth_intent();
const OrchestrationPlan& ground_truth_plan();

/// The five benchmark user messages, Q1..Q5.
const std::vector<std::string>& benchmark_turns();

}  // namespace intentforge::testing
