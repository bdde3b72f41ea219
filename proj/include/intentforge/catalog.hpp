// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "intentforge/money.hpp"
#include "intentforge/rule_dsl.hpp"
#include "intentforge/scalar.hpp"

namespace intentforge {

struct CharacteristicSpec {
    std::string name;
    ValueKind valueKind = ValueKind::String;
    std::optional<std::string> unit;
    std::optional<std::vector<Scalar>> allowedValues;
    std::optional<Scalar> defaultValue;
};

enum class CostPeriod { PerDay, Once };

struct ProductOffering {
    std::string id;
    std::string name;
    std::string tier;
    Money unitCost;
    CostPeriod costPeriod = CostPeriod::PerDay;
    std::string productSpecId;
    std::vector<CharacteristicSpec> characteristics;
    std::map<std::string, Scalar> fixedCharacteristicValues;

    /// "On-demand Network Slice / Gold"
    std::string display_name() const { return name + " / " + tier; }
};

struct ProductSpecification {
    std::string id;
    std::string name;
    std::vector<std::string> serviceSpecIds;
    std::vector<std::string> ruleSetIds;
    std::vector<std::string> testSpecIds;
    std::vector<CharacteristicSpec> characteristics;
};

struct ServiceSpecification {
    std::string id;
    std::string name;
    std::vector<std::string> childServiceSpecIds;
    std::vector<std::string> resourceSpecIds;
    std::vector<std::string> ruleSetIds;
    std::vector<std::string> testSpecIds;
    std::vector<CharacteristicSpec> characteristics;
};

enum class Domain { RAN, Transport, Core, Infrastructure };

struct ResourceSpecification {
    std::string id;
    std::string name;
    Domain domain = Domain::Infrastructure;
    std::vector<CharacteristicSpec> characteristics;
    std::vector<std::string> testSpecIds;
};

enum class TestKind { Connectivity, Latency, Throughput, SliceAdmission, ApiAvailability };
enum class Comparator { Lt, Le, Gt, Ge, Eq };
enum class ThresholdSource { Literal, CharacteristicRef };

struct TestSpecification {
    std::string id;
    std::string name;
    TestKind kind = TestKind::Connectivity;
    std::string targetMetric;
    Comparator comparator = Comparator::Ge;
    ThresholdSource thresholdSource = ThresholdSource::Literal;
    /// The literal threshold, or the characteristic name when thresholdSource is CharacteristicRef.
    Scalar thresholdValue;
    int evaluationWindowTicks = 1;
};

/// Names every traversal environment starts with, besides the offering's
/// own characteristics.
inline constexpr std::array<std::string_view, 4> kSeededEnvironmentNames = {"tier", "days", "minConcurrentUsers",
                                                                           "latencyCeilingMs"};

/// Connectivity, slice admission and API availability are heartbeat checks.
bool is_presence_kind(TestKind k);
bool compare(Comparator c, Decimal observed, Decimal threshold);

std::string_view to_string(CostPeriod p);
std::string_view to_string(Domain d);
std::string_view to_string(TestKind k);
std::string_view to_string(Comparator c);
std::string_view to_string(ThresholdSource s);
std::optional<Domain> domain_from_string(std::string_view s);

/// The knowledge graph: offerings down to resource specifications, with the
/// test specifications and rule sets hanging off the nodes.
///
/// Collections are plain vectors so that a malformed graph (duplicates,
/// dangling references) can still be represented and reported on. Treat a
/// graph returned by load_catalog as immutable.
struct CatalogGraph {
    std::string version;
    std::vector<ProductOffering> offerings;
    std::vector<ProductSpecification> productSpecs;
    std::vector<ServiceSpecification> serviceSpecs;
    std::vector<ResourceSpecification> resourceSpecs;
    std::vector<TestSpecification> testSpecs;
    std::vector<rules::RuleSet> ruleSets;

    const ProductOffering* offering(std::string_view id) const;
    const ProductSpecification* product_spec(std::string_view id) const;
    const ServiceSpecification* service_spec(std::string_view id) const;
    const ResourceSpecification* resource_spec(std::string_view id) const;
    const TestSpecification* test_spec(std::string_view id) const;
    const rules::RuleSet* rule_set(std::string_view id) const;
    /// True when `id` names any entity of any kind.
    bool contains(std::string_view id) const;
};

struct Violation {
    std::string entityId;
    /// danglingRef, duplicateId, compositionCycle, characteristicInvariant,
    /// negativeCost, thresholdRef, invalidWindow, duplicateRuleId
    std::string rule;
    std::string detail;

    bool operator==(const Violation&) const = default;
};

std::vector<Violation> validate_catalog(const CatalogGraph& graph);

class CatalogError : public std::runtime_error {
public:
    enum class Kind { Parse, Schema, DanglingReference, DuplicateId, CompositionCycle, Invalid };
    CatalogError(Kind kind, const std::string& what, std::vector<Violation> violations = {});
    Kind kind;
    std::vector<Violation> violations;
};

/// Parses without checking graph invariants. Throws CatalogError (Parse or Schema).
CatalogGraph parse_catalog(std::string_view document);
/// Parses and validates; the first violation class found decides the error kind.
CatalogGraph load_catalog(std::string_view document);
CatalogGraph load_catalog_file(const std::string& path);

nlohmann::json catalog_to_json(const CatalogGraph& graph);
std::string serialize_catalog(const CatalogGraph& graph);

/// Case-insensitive substring match on name or tier, ordered by id.
std::vector<const ProductOffering*> find_offerings(const CatalogGraph& graph, std::string_view query = {});

nlohmann::json offering_summary(const ProductOffering& o);

/// Capacity of an offering if it carries a `maxConcurrentUsers` value.
std::optional<std::int64_t> offering_capacity(const ProductOffering& o);

/// Matches "Name" or "Name / Tier" or "Name (Tier)" against the catalog, case-insensitively.
/// Returns the offerings of the family when only a name is given.
std::vector<const ProductOffering*> resolve_product_mention(const CatalogGraph& graph, std::string_view mention);

/// Path of the bundled fixture, from INTENTFORGE_CATALOG or the source tree.
std::string default_catalog_path();

}  // namespace intentforge
