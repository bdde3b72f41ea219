// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "intentforge/catalog.hpp"

namespace intentforge {

enum class InventoryKind { Product, Service, Resource, Intent };

std::string_view to_string(InventoryKind k);
std::optional<InventoryKind> inventory_kind_from_string(std::string_view s);

struct InventoryRecord {
    std::string id;
    InventoryKind kind = InventoryKind::Intent;
    std::string sourceSpecId;
    std::string state;
    /// Store sequence number at write time.
    std::int64_t createdAt = 0;
    nlohmann::json payload;
    int revision = 1;
    /// Set when this record is a new revision of an existing id.
    std::optional<int> supersedes;
    std::string catalogVersion;

    bool operator==(const InventoryRecord&) const = default;
};

nlohmann::json to_json(const InventoryRecord& r);
InventoryRecord inventory_record_from_json(const nlohmann::json& j);

class InventoryError : public std::runtime_error {
public:
    enum class Kind { DuplicateId, StaleRevision, UnknownId, DanglingSource, Io };
    InventoryError(Kind kind, const std::string& what) : std::runtime_error(what), kind(kind) {}
    Kind kind;
};

/// Append-only record store, optionally mirrored to a newline-delimited JSON file.
///
/// Writes are serialized; reads take a shared lock and only see committed
/// revisions.
class InventoryStore {
public:
    explicit InventoryStore(const CatalogGraph& graph, std::string filePath = {});

    /// Stores `record` and returns its id. A record for an existing id must
    /// set `supersedes` to the latest revision number.
    std::string record(InventoryRecord record);

    /// Convenience for appending a state change to an existing id.
    std::string revise(const std::string& id, std::string state, nlohmann::json payload);

    std::optional<InventoryRecord> latest(const std::string& id) const;
    std::vector<InventoryRecord> history(const std::string& id) const;
    std::vector<InventoryRecord> all() const;
    /// The persisted form, one canonical JSON object per line.
    std::vector<std::string> lines() const;
    std::size_t size() const;

private:
    const CatalogGraph& graph_;
    std::string path_;
    mutable std::shared_mutex mu_;
    std::vector<std::string> lines_;
    std::vector<InventoryRecord> records_;
    std::map<std::string, std::vector<std::size_t>> byId_;
    std::int64_t seq_ = 0;
};

}  // namespace intentforge
