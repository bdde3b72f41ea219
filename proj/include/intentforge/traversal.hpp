// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "intentforge/catalog.hpp"
#include "intentforge/money.hpp"
#include "intentforge/scalar.hpp"

namespace intentforge {

using Date = std::chrono::year_month_day;

std::optional<Date> parse_iso_date(std::string_view s);
std::string format_iso_date(Date d);
Date add_days(Date d, int days);
/// Inclusive day count between two dates (same day = 1).
int inclusive_days(Date start, Date end);

struct OfferingSelection {
    std::string offeringId;
    std::map<std::string, Scalar> characteristicValues;

    bool operator==(const OfferingSelection&) const = default;
};

struct IntentConstraints {
    std::optional<Money> budget;
    std::optional<std::int64_t> minConcurrentUsers;
    std::optional<Decimal> latencyCeilingMs;

    bool operator==(const IntentConstraints&) const = default;
};

struct ServicePeriod {
    Date startDate{};
    int days = 0;

    bool operator==(const ServicePeriod&) const = default;
};

struct Confirmation {
    std::string confirmedBy;
    std::string transcriptRef;

    bool operator==(const Confirmation&) const = default;
};

/// An intent the operator has explicitly confirmed. Only cocreation's
/// finalization (or a trusted file) produces one.
struct ConfirmedIntent {
    std::string intentId;
    std::vector<OfferingSelection> offeringSelections;
    IntentConstraints constraints;
    ServicePeriod period;
    Confirmation confirmation;

    bool operator==(const ConfirmedIntent&) const = default;
};

nlohmann::json to_json(const ConfirmedIntent& intent);
ConfirmedIntent intent_from_json(const nlohmann::json& j);
nlohmann::json to_json(const IntentConstraints& c);
IntentConstraints constraints_from_json(const nlohmann::json& j);

struct ServiceOrder {
    std::string itemId;
    std::string serviceSpecId;
    std::map<std::string, Scalar> resolvedCharacteristics;
    /// Parent service item, or the selection root "sel:<offeringId>".
    std::string parentRef;
};

struct ResourceOrder {
    std::string itemId;
    std::string resourceSpecId;
    Domain domain = Domain::Infrastructure;
    std::map<std::string, Scalar> resolvedCharacteristics;
    std::string parentServiceRef;
};

struct DerivedTest {
    std::string testSpecId;
    /// A service/resource item id, or a selection root "sel:<offeringId>".
    std::string boundRef;
    Decimal resolvedThreshold;
    TestKind kind = TestKind::Connectivity;
    Comparator comparator = Comparator::Ge;
    std::string targetMetric;
    int evaluationWindowTicks = 1;
};

struct OrchestrationPlan {
    std::string planId;
    std::string intentId;
    std::string catalogVersion;
    /// What the plan was built from, so it can be replayed by explain_plan.
    std::vector<OfferingSelection> selections;
    IntentConstraints constraints;
    ServicePeriod period;

    std::vector<ServiceOrder> serviceOrders;
    std::vector<ResourceOrder> resourceOrders;
    std::vector<DerivedTest> derivedTests;
    Money totalCost;
    std::string canonicalDigest;

    std::size_t item_count() const { return serviceOrders.size() + resourceOrders.size(); }
};

std::string root_ref(std::string_view offeringId);
bool is_root_ref(std::string_view ref);

/// JSON without the digest field: the exact bytes that get hashed.
nlohmann::json plan_content_json(const OrchestrationPlan& plan);
nlohmann::json to_json(const OrchestrationPlan& plan);
OrchestrationPlan plan_from_json(const nlohmann::json& j);
std::string canonical_plan_bytes(const OrchestrationPlan& plan);
std::string compute_plan_digest(const OrchestrationPlan& plan);
bool verify_plan_digest(const OrchestrationPlan& plan);

class PlanError : public std::runtime_error {
public:
    enum class Kind { InvalidIntent, RuleEvaluation, UnresolvedThreshold, DanglingOffering, VersionMismatch, DigestMismatch };
    PlanError(Kind kind, const std::string& what);
    Kind kind;
};

/// Throws PlanError(InvalidIntent) naming the first broken invariant.
void validate_intent(const CatalogGraph& graph, const ConfirmedIntent& intent);

OrchestrationPlan build_plan(const CatalogGraph& graph, const ConfirmedIntent& intent);

struct TraceEntry {
    /// offering, productSpec, serviceSpec, resourceSpec, rule, testSpec
    std::string stage;
    std::string nodeId;
    /// Order item for spec visits, rule set id for rules, bound ref for tests.
    std::string ref;

    bool operator==(const TraceEntry&) const = default;
};

nlohmann::json to_json(const TraceEntry& e);

/// Replays the traversal that produced `plan` and returns the visit trace.
std::vector<TraceEntry> explain_plan(const OrchestrationPlan& plan, const CatalogGraph& graph);

Money compute_cost(const CatalogGraph& graph, const std::vector<std::string>& offeringIds, int days);
Money compute_cost(const CatalogGraph& graph, const std::vector<OfferingSelection>& selections, int days);

}  // namespace intentforge
