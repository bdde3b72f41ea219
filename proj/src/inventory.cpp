// SPDX-License-Identifier: Apache-2.0
#include "intentforge/inventory.hpp"

#include <fstream>
#include <mutex>

#include "intentforge/canonical.hpp"

namespace intentforge {

std::string_view to_string(InventoryKind k) {
    switch (k) {
    case InventoryKind::Product: return "product";
    case InventoryKind::Service: return "service";
    case InventoryKind::Resource: return "resource";
    case InventoryKind::Intent: return "intent";
    }
    return "intent";
}

std::optional<InventoryKind> inventory_kind_from_string(std::string_view s) {
    for (auto k : {InventoryKind::Product, InventoryKind::Service, InventoryKind::Resource, InventoryKind::Intent}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

nlohmann::json to_json(const InventoryRecord& r) {
    nlohmann::json j{{"id", r.id},
                     {"kind", std::string(to_string(r.kind))},
                     {"sourceSpecId", r.sourceSpecId},
                     {"state", r.state},
                     {"createdAt", r.createdAt},
                     {"payload", r.payload},
                     {"revision", r.revision},
                     {"catalogVersion", r.catalogVersion}};
    j["supersedes"] = r.supersedes ? nlohmann::json(*r.supersedes) : nlohmann::json(nullptr);
    return j;
}

InventoryRecord inventory_record_from_json(const nlohmann::json& j) {
    InventoryRecord r;
    r.id = j.at("id").get<std::string>();
    auto kind = inventory_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) throw std::invalid_argument("unknown inventory kind " + j.at("kind").dump());
    r.kind = *kind;
    r.sourceSpecId = j.at("sourceSpecId").get<std::string>();
    r.state = j.at("state").get<std::string>();
    r.createdAt = j.at("createdAt").get<std::int64_t>();
    r.payload = j.at("payload");
    r.revision = j.at("revision").get<int>();
    if (j.contains("supersedes") && !j.at("supersedes").is_null()) r.supersedes = j.at("supersedes").get<int>();
    r.catalogVersion = j.value("catalogVersion", std::string{});
    return r;
}

InventoryStore::InventoryStore(const CatalogGraph& graph, std::string filePath) : graph_(graph), path_(std::move(filePath)) {
    if (path_.empty()) return;
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto r = inventory_record_from_json(nlohmann::json::parse(line));
        seq_ = std::max(seq_, r.createdAt);
        byId_[r.id].push_back(records_.size());
        records_.push_back(std::move(r));
        lines_.push_back(line);
    }
}

std::string InventoryStore::record(InventoryRecord r) {
    std::unique_lock lock(mu_);
    if (!graph_.contains(r.sourceSpecId)) {
        throw InventoryError(InventoryError::Kind::DanglingSource, "inventory record " + r.id + ": sourceSpecId '" +
                                                                      r.sourceSpecId + "' is not in catalog " + graph_.version);
    }
    auto it = byId_.find(r.id);
    if (it == byId_.end()) {
        if (r.supersedes) throw InventoryError(InventoryError::Kind::UnknownId, "no record " + r.id + " to supersede");
        r.revision = 1;
    } else {
        int latest = records_[it->second.back()].revision;
        if (!r.supersedes) throw InventoryError(InventoryError::Kind::DuplicateId, "record " + r.id + " already exists");
        if (*r.supersedes != latest) {
            throw InventoryError(InventoryError::Kind::StaleRevision, "record " + r.id + " is at revision " +
                                                                          std::to_string(latest) + ", not " +
                                                                          std::to_string(*r.supersedes));
        }
        r.revision = latest + 1;
    }
    r.createdAt = ++seq_;
    r.catalogVersion = graph_.version;
    auto line = canonical_json(to_json(r));
    if (!path_.empty()) {
        std::ofstream out(path_, std::ios::app);
        out << line << '\n';
        if (!out) throw InventoryError(InventoryError::Kind::Io, "cannot append to " + path_);
    }
    byId_[r.id].push_back(records_.size());
    lines_.push_back(std::move(line));
    records_.push_back(r);
    return r.id;
}

std::string InventoryStore::revise(const std::string& id, std::string state, nlohmann::json payload) {
    auto prev = latest(id);
    if (!prev) throw InventoryError(InventoryError::Kind::UnknownId, "no record " + id);
    InventoryRecord r = *prev;
    r.state = std::move(state);
    r.payload = std::move(payload);
    r.supersedes = prev->revision;
    return record(std::move(r));
}

std::optional<InventoryRecord> InventoryStore::latest(const std::string& id) const {
    std::shared_lock lock(mu_);
    auto it = byId_.find(id);
    if (it == byId_.end()) return std::nullopt;
    return records_[it->second.back()];
}

std::vector<InventoryRecord> InventoryStore::history(const std::string& id) const {
    std::shared_lock lock(mu_);
    std::vector<InventoryRecord> out;
    if (auto it = byId_.find(id); it != byId_.end()) {
        for (auto i : it->second) out.push_back(records_[i]);
    }
    return out;
}

std::vector<InventoryRecord> InventoryStore::all() const {
    std::shared_lock lock(mu_);
    return records_;
}

std::vector<std::string> InventoryStore::lines() const {
    std::shared_lock lock(mu_);
    return lines_;
}

std::size_t InventoryStore::size() const {
    std::shared_lock lock(mu_);
    return records_.size();
}

}  // namespace intentforge
