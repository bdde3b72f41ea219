// SPDX-License-Identifier: Apache-2.0
#include "intentforge/catalog.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "intentforge/canonical.hpp"
#include "intentforge/text.hpp"

#ifndef INTENTFORGE_SOURCE_DIR
#define INTENTFORGE_SOURCE_DIR "."
#endif

namespace intentforge {

using nlohmann::json;

bool is_presence_kind(TestKind k) {
    return k == TestKind::Connectivity || k == TestKind::SliceAdmission || k == TestKind::ApiAvailability;
}

bool compare(Comparator c, Decimal observed, Decimal threshold) {
    switch (c) {
        case Comparator::Lt: return observed < threshold;
        case Comparator::Le: return observed <= threshold;
        case Comparator::Gt: return observed > threshold;
        case Comparator::Ge: return observed >= threshold;
        case Comparator::Eq: return observed == threshold;
    }
    return false;
}

std::string_view to_string(CostPeriod p) { return p == CostPeriod::PerDay ? "perDay" : "once"; }

std::string_view to_string(Domain d) {
    switch (d) {
        case Domain::RAN: return "RAN";
        case Domain::Transport: return "Transport";
        case Domain::Core: return "Core";
        case Domain::Infrastructure: return "Infrastructure";
    }
    return "?";
}

std::optional<Domain> domain_from_string(std::string_view s) {
    for (auto d : {Domain::RAN, Domain::Transport, Domain::Core, Domain::Infrastructure}) {
        if (to_string(d) == s) return d;
    }
    return std::nullopt;
}

std::string_view to_string(TestKind k) {
    switch (k) {
        case TestKind::Connectivity: return "connectivity";
        case TestKind::Latency: return "latency";
        case TestKind::Throughput: return "throughput";
        case TestKind::SliceAdmission: return "sliceAdmission";
        case TestKind::ApiAvailability: return "apiAvailability";
    }
    return "?";
}

std::string_view to_string(Comparator c) {
    switch (c) {
        case Comparator::Lt: return "lt";
        case Comparator::Le: return "le";
        case Comparator::Gt: return "gt";
        case Comparator::Ge: return "ge";
        case Comparator::Eq: return "eq";
    }
    return "?";
}

std::string_view to_string(ThresholdSource s) {
    return s == ThresholdSource::Literal ? "literal" : "characteristicRef";
}

namespace {

template <typename T>
const T* find_by_id(const std::vector<T>& v, std::string_view id) {
    auto it = std::find_if(v.begin(), v.end(), [&](const T& x) { return x.id == id; });
    return it == v.end() ? nullptr : &*it;
}

}  // namespace

const ProductOffering* CatalogGraph::offering(std::string_view id) const { return find_by_id(offerings, id); }
const ProductSpecification* CatalogGraph::product_spec(std::string_view id) const { return find_by_id(productSpecs, id); }
const ServiceSpecification* CatalogGraph::service_spec(std::string_view id) const { return find_by_id(serviceSpecs, id); }
const ResourceSpecification* CatalogGraph::resource_spec(std::string_view id) const {
    return find_by_id(resourceSpecs, id);
}
const TestSpecification* CatalogGraph::test_spec(std::string_view id) const { return find_by_id(testSpecs, id); }
const rules::RuleSet* CatalogGraph::rule_set(std::string_view id) const { return find_by_id(ruleSets, id); }

bool CatalogGraph::contains(std::string_view id) const {
    return offering(id) || product_spec(id) || service_spec(id) || resource_spec(id) || test_spec(id) || rule_set(id);
}

CatalogError::CatalogError(Kind k, const std::string& what, std::vector<Violation> v)
    : std::runtime_error(what), kind(k), violations(std::move(v)) {}

// ---------------------------------------------------------------- validation

namespace {

void check_characteristics(const std::string& owner, const std::vector<CharacteristicSpec>& chars,
                           std::vector<Violation>& out) {
    for (const auto& c : chars) {
        if (c.unit && c.valueKind != ValueKind::Number) {
            out.push_back({owner, "characteristicInvariant", c.name + ": unit given for a non-number characteristic"});
        }
        if (c.allowedValues) {
            for (const auto& v : *c.allowedValues) {
                if (v.kind() != c.valueKind) {
                    out.push_back({owner, "characteristicInvariant", c.name + ": allowed value " + v.to_display() + " has the wrong kind"});
                }
            }
        }
        if (c.defaultValue) {
            if (c.defaultValue->kind() != c.valueKind) {
                out.push_back({owner, "characteristicInvariant", c.name + ": default value has the wrong kind"});
            } else if (c.allowedValues &&
                       std::find(c.allowedValues->begin(), c.allowedValues->end(), *c.defaultValue) == c.allowedValues->end()) {
                out.push_back({owner, "characteristicInvariant", c.name + ": default value is not an allowed value"});
            }
        }
    }
}

/// Finds every elementary cycle reachable by DFS over child service edges,
/// reported once each as "A -> B -> A" starting from its smallest id.
std::vector<std::vector<std::string>> find_cycles(const CatalogGraph& g) {
    std::map<std::string, std::vector<std::string>> children;
    for (const auto& s : g.serviceSpecs) {
        auto kids = s.childServiceSpecIds;
        std::sort(kids.begin(), kids.end());
        children[s.id] = kids;
    }
    std::set<std::vector<std::string>> seen;
    std::vector<std::vector<std::string>> cycles;
    std::map<std::string, int> color;  // 0 white, 1 on stack, 2 done
    std::vector<std::string> stack;
    std::function<void(const std::string&)> dfs = [&](const std::string& id) {
        color[id] = 1;
        stack.push_back(id);
        for (const auto& child : children[id]) {
            if (!children.count(child)) continue;  // dangling, reported elsewhere
            if (color[child] == 1) {
                auto start = std::find(stack.begin(), stack.end(), child);
                std::vector<std::string> cyc(start, stack.end());
                auto min_it = std::min_element(cyc.begin(), cyc.end());
                std::rotate(cyc.begin(), min_it, cyc.end());
                if (seen.insert(cyc).second) cycles.push_back(cyc);
            } else if (color[child] == 0) {
                dfs(child);
            }
        }
        stack.pop_back();
        color[id] = 2;
    };
    for (const auto& [id, _] : children) {
        if (color[id] == 0) dfs(id);
    }
    return cycles;
}

void check_thresholds(const CatalogGraph& g, std::vector<Violation>& out) {
    // For each node: the union of names that can be bound when it is visited.
    std::map<std::string, std::set<std::string>> available;
    std::set<std::pair<std::string, std::string>> reported;
    auto add_rule_targets = [&](const std::vector<std::string>& ruleSetIds, std::set<std::string>& names) {
        for (const auto& rsId : ruleSetIds) {
            if (const auto* rs = g.rule_set(rsId)) {
                for (const auto& r : rs->rules) {
                    for (const auto& a : r.actions) names.insert(a.target);
                }
            }
        }
    };
    auto add_chars = [](const std::vector<CharacteristicSpec>& chars, std::set<std::string>& names) {
        for (const auto& c : chars) names.insert(c.name);
    };
    auto check_tests = [&](const std::vector<std::string>& testIds, const std::set<std::string>& names) {
        for (const auto& tid : testIds) {
            const auto* t = g.test_spec(tid);
            if (!t || t->thresholdSource != ThresholdSource::CharacteristicRef) continue;
            if (!t->thresholdValue.is_string()) {
                if (reported.insert({tid, ""}).second) {
                    out.push_back({tid, "thresholdRef", "characteristicRef threshold must be a characteristic name"});
                }
                continue;
            }
            const auto& name = t->thresholdValue.as_string();
            if (!names.count(name) && reported.insert({tid, name}).second) {
                out.push_back({tid, "thresholdRef", "characteristic '" + name + "' is not reachable on the traversal path"});
            }
        }
    };
    std::set<std::string> visiting;
    std::function<void(const std::string&, std::set<std::string>)> visit_service = [&](const std::string& id,
                                                                                    std::set<std::string> names) {
        const auto* s = g.service_spec(id);
        if (!s || visiting.count(id)) return;
        visiting.insert(id);
        add_chars(s->characteristics, names);
        add_rule_targets(s->ruleSetIds, names);
        check_tests(s->testSpecIds, names);
        for (const auto& c : s->childServiceSpecIds) visit_service(c, names);
        for (const auto& rid : s->resourceSpecIds) {
            if (const auto* r = g.resource_spec(rid)) {
                auto rnames = names;
                add_chars(r->characteristics, rnames);
                check_tests(r->testSpecIds, rnames);
            }
        }
        visiting.erase(id);
    };
    for (const auto& o : g.offerings) {
        std::set<std::string> names(kSeededEnvironmentNames.begin(), kSeededEnvironmentNames.end());
        add_chars(o.characteristics, names);
        for (const auto& [k, _] : o.fixedCharacteristicValues) names.insert(k);
        const auto* p = g.product_spec(o.productSpecId);
        if (!p) continue;
        add_chars(p->characteristics, names);
        add_rule_targets(p->ruleSetIds, names);
        check_tests(p->testSpecIds, names);
        for (const auto& sid : p->serviceSpecIds) visit_service(sid, names);
    }
}

}  // namespace

std::vector<Violation> validate_catalog(const CatalogGraph& g) {
    std::vector<Violation> out;

    std::map<std::string, int> counts;
    auto count = [&](const auto& coll) {
        for (const auto& x : coll) ++counts[x.id];
    };
    count(g.offerings);
    count(g.productSpecs);
    count(g.serviceSpecs);
    count(g.resourceSpecs);
    count(g.testSpecs);
    count(g.ruleSets);
    for (const auto& [id, n] : counts) {
        if (n > 1) out.push_back({id, "duplicateId", "id used by " + std::to_string(n) + " entities"});
    }

    auto ref = [&](const std::string& owner, const std::string& target, bool ok) {
        if (!ok) out.push_back({owner, "danglingRef", target});
    };
    for (const auto& o : g.offerings) ref(o.id, o.productSpecId, g.product_spec(o.productSpecId) != nullptr);
    for (const auto& p : g.productSpecs) {
        for (const auto& id : p.serviceSpecIds) ref(p.id, id, g.service_spec(id) != nullptr);
        for (const auto& id : p.ruleSetIds) ref(p.id, id, g.rule_set(id) != nullptr);
        for (const auto& id : p.testSpecIds) ref(p.id, id, g.test_spec(id) != nullptr);
    }
    for (const auto& s : g.serviceSpecs) {
        for (const auto& id : s.childServiceSpecIds) ref(s.id, id, g.service_spec(id) != nullptr);
        for (const auto& id : s.resourceSpecIds) ref(s.id, id, g.resource_spec(id) != nullptr);
        for (const auto& id : s.ruleSetIds) ref(s.id, id, g.rule_set(id) != nullptr);
        for (const auto& id : s.testSpecIds) ref(s.id, id, g.test_spec(id) != nullptr);
    }
    for (const auto& r : g.resourceSpecs) {
        for (const auto& id : r.testSpecIds) ref(r.id, id, g.test_spec(id) != nullptr);
    }

    for (const auto& cyc : find_cycles(g)) {
        auto path = cyc;
        path.push_back(cyc.front());
        out.push_back({cyc.front(), "compositionCycle", text::join(path, " -> ")});
    }

    for (const auto& o : g.offerings) {
        if (o.unitCost.cents < 0) out.push_back({o.id, "negativeCost", o.unitCost.to_string()});
        check_characteristics(o.id, o.characteristics, out);
        for (const auto& [name, value] : o.fixedCharacteristicValues) {
            auto it = std::find_if(o.characteristics.begin(), o.characteristics.end(),
                                   [&](const CharacteristicSpec& c) { return c.name == name; });
            if (it != o.characteristics.end() && it->valueKind != value.kind()) {
                out.push_back({o.id, "characteristicInvariant", name + ": fixed value has the wrong kind"});
            }
        }
    }
    for (const auto& p : g.productSpecs) check_characteristics(p.id, p.characteristics, out);
    for (const auto& s : g.serviceSpecs) check_characteristics(s.id, s.characteristics, out);
    for (const auto& r : g.resourceSpecs) check_characteristics(r.id, r.characteristics, out);
    for (const auto& t : g.testSpecs) {
        if (t.evaluationWindowTicks <= 0) out.push_back({t.id, "invalidWindow", std::to_string(t.evaluationWindowTicks)});
        if (t.thresholdSource == ThresholdSource::Literal && !t.thresholdValue.is_number()) {
            out.push_back({t.id, "thresholdRef", "literal threshold must be a number"});
        }
    }
    for (const auto& rs : g.ruleSets) {
        std::set<std::string> ids;
        for (const auto& r : rs.rules) {
            if (!ids.insert(r.id).second) out.push_back({rs.id, "duplicateRuleId", r.id});
        }
    }
    if (find_cycles(g).empty()) check_thresholds(g, out);
    return out;
}

// ---------------------------------------------------------------- parsing

namespace {

class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

    [[noreturn]] void fail(const std::string& what) const {
        throw CatalogError(CatalogError::Kind::Schema, "schema error at " + path_ + ": " + what);
    }

    const json& at(const char* key) const {
        if (!j_.is_object()) fail("expected an object");
        auto it = j_.find(key);
        if (it == j_.end()) fail(std::string("missing field '") + key + "'");
        return *it;
    }

    bool has(const char* key) const { return j_.is_object() && j_.contains(key) && !j_.at(key).is_null(); }

    std::string str(const char* key) const {
        const auto& v = at(key);
        if (!v.is_string()) child(key).fail("expected a string");
        return v.get<std::string>();
    }

    std::vector<std::string> strs(const char* key) const {
        std::vector<std::string> out;
        if (!has(key)) return out;
        const auto& v = at(key);
        if (!v.is_array()) child(key).fail("expected an array of ids");
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_string()) child(key, i).fail("expected a string");
            out.push_back(v[i].get<std::string>());
        }
        return out;
    }

    Reader child(const char* key) const { return Reader(at(key), path_ + "." + key); }
    Reader child(const char* key, std::size_t i) const {
        return Reader(at(key).at(i), path_ + "." + key + "[" + std::to_string(i) + "]");
    }

    const json& raw() const { return j_; }
    const std::string& path() const { return path_; }

private:
    const json& j_;
    std::string path_;
};

template <typename F>
auto guarded(const Reader& r, F&& f) {
    try {
        return f();
    } catch (const CatalogError&) {
        throw;
    } catch (const std::exception& e) {
        r.fail(e.what());
    }
}

CharacteristicSpec read_characteristic(const Reader& r) {
    CharacteristicSpec c;
    c.name = r.str("name");
    auto kind = value_kind_from_string(r.str("valueKind"));
    if (!kind) r.child("valueKind").fail("expected number, string or boolean");
    c.valueKind = *kind;
    if (r.has("unit")) c.unit = r.str("unit");
    if (r.has("allowedValues")) {
        c.allowedValues.emplace();
        const auto& arr = r.at("allowedValues");
        if (!arr.is_array()) r.child("allowedValues").fail("expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            c.allowedValues->push_back(guarded(r.child("allowedValues", i), [&] { return scalar_from_json(arr[i]); }));
        }
    }
    if (r.has("defaultValue")) c.defaultValue = guarded(r.child("defaultValue"), [&] { return scalar_from_json(r.at("defaultValue")); });
    return c;
}

std::vector<CharacteristicSpec> read_characteristics(const Reader& r) {
    std::vector<CharacteristicSpec> out;
    if (!r.has("characteristics")) return out;
    if (!r.at("characteristics").is_array()) r.child("characteristics").fail("expected an array");
    for (std::size_t i = 0; i < r.at("characteristics").size(); ++i) out.push_back(read_characteristic(r.child("characteristics", i)));
    return out;
}

template <typename T, typename F>
std::vector<T> read_collection(const Reader& root, const char* key, F&& read_one) {
    std::vector<T> out;
    if (!root.has(key)) return out;
    if (!root.at(key).is_array()) root.child(key).fail("expected an array");
    for (std::size_t i = 0; i < root.at(key).size(); ++i) out.push_back(read_one(root.child(key, i)));
    return out;
}

std::pair<int, int> line_col(std::string_view doc, std::size_t byte) {
    int line = 1;
    int col = 1;
    for (std::size_t i = 0; i < byte && i < doc.size(); ++i) {
        if (doc[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace

CatalogGraph parse_catalog(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        auto [line, col] = line_col(document, e.byte == 0 ? 0 : e.byte - 1);
        throw CatalogError(CatalogError::Kind::Parse, "parse error at line " + std::to_string(line) + ", column " +
                                                          std::to_string(col) + " (byte " + std::to_string(e.byte) +
                                                          "): " + e.what());
    }
    Reader root(doc, "$");
    if (!doc.is_object()) root.fail("expected an object");

    CatalogGraph g;
    g.version = root.str("version");
    g.offerings = read_collection<ProductOffering>(root, "offerings", [](const Reader& r) {
        ProductOffering o;
        o.id = r.str("id");
        o.name = r.str("name");
        o.tier = r.str("tier");
        o.unitCost = guarded(r.child("unitCost"), [&] { return money_from_json(r.at("unitCost")); });
        auto period = r.str("costPeriod");
        if (period == "perDay") o.costPeriod = CostPeriod::PerDay;
        else if (period == "once") o.costPeriod = CostPeriod::Once;
        else r.child("costPeriod").fail("expected perDay or once");
        o.productSpecId = r.str("productSpecId");
        o.characteristics = read_characteristics(r);
        if (r.has("fixedCharacteristicValues")) {
            const auto& fixed = r.at("fixedCharacteristicValues");
            if (!fixed.is_object()) r.child("fixedCharacteristicValues").fail("expected an object");
            for (const auto& [k, v] : fixed.items()) {
                o.fixedCharacteristicValues[k] = guarded(r.child("fixedCharacteristicValues"), [&] { return scalar_from_json(v); });
            }
        }
        return o;
    });
    g.productSpecs = read_collection<ProductSpecification>(root, "productSpecs", [](const Reader& r) {
        ProductSpecification p;
        p.id = r.str("id");
        p.name = r.str("name");
        p.serviceSpecIds = r.strs("serviceSpecIds");
        p.ruleSetIds = r.strs("ruleSetIds");
        p.testSpecIds = r.strs("testSpecIds");
        p.characteristics = read_characteristics(r);
        return p;
    });
    g.serviceSpecs = read_collection<ServiceSpecification>(root, "serviceSpecs", [](const Reader& r) {
        ServiceSpecification s;
        s.id = r.str("id");
        s.name = r.str("name");
        s.childServiceSpecIds = r.strs("childServiceSpecIds");
        s.resourceSpecIds = r.strs("resourceSpecIds");
        s.ruleSetIds = r.strs("ruleSetIds");
        s.testSpecIds = r.strs("testSpecIds");
        s.characteristics = read_characteristics(r);
        return s;
    });
    g.resourceSpecs = read_collection<ResourceSpecification>(root, "resourceSpecs", [](const Reader& r) {
        ResourceSpecification s;
        s.id = r.str("id");
        s.name = r.str("name");
        auto d = domain_from_string(r.str("domain"));
        if (!d) r.child("domain").fail("expected RAN, Transport, Core or Infrastructure");
        s.domain = *d;
        s.characteristics = read_characteristics(r);
        s.testSpecIds = r.strs("testSpecIds");
        return s;
    });
    g.testSpecs = read_collection<TestSpecification>(root, "testSpecs", [](const Reader& r) {
        TestSpecification t;
        t.id = r.str("id");
        t.name = r.str("name");
        auto kind = r.str("kind");
        bool known = false;
        for (auto k : {TestKind::Connectivity, TestKind::Latency, TestKind::Throughput, TestKind::SliceAdmission,
                       TestKind::ApiAvailability}) {
            if (to_string(k) == kind) {
                t.kind = k;
                known = true;
            }
        }
        if (!known) r.child("kind").fail("unknown test kind '" + kind + "'");
        t.targetMetric = r.str("targetMetric");
        auto cmp = r.str("comparator");
        known = false;
        for (auto c : {Comparator::Lt, Comparator::Le, Comparator::Gt, Comparator::Ge, Comparator::Eq}) {
            if (to_string(c) == cmp) {
                t.comparator = c;
                known = true;
            }
        }
        if (!known) r.child("comparator").fail("unknown comparator '" + cmp + "'");
        auto src = r.str("thresholdSource");
        if (src == "literal") t.thresholdSource = ThresholdSource::Literal;
        else if (src == "characteristicRef") t.thresholdSource = ThresholdSource::CharacteristicRef;
        else r.child("thresholdSource").fail("expected literal or characteristicRef");
        t.thresholdValue = guarded(r.child("thresholdValue"), [&] { return scalar_from_json(r.at("thresholdValue")); });
        const auto& w = r.at("evaluationWindowTicks");
        if (!w.is_number_integer()) r.child("evaluationWindowTicks").fail("expected an integer");
        t.evaluationWindowTicks = w.get<int>();
        return t;
    });
    g.ruleSets = read_collection<rules::RuleSet>(root, "ruleSets", [](const Reader& r) {
        rules::RuleSet rs;
        rs.id = r.str("id");
        auto texts = r.strs("rules");
        for (std::size_t i = 0; i < texts.size(); ++i) {
            auto rid = rs.id + ".r" + std::to_string(i + 1);
            try {
                rs.rules.push_back(rules::parse_rule(texts[i], rid));
            } catch (const std::exception& e) {
                r.child("rules", i).fail(e.what());
            }
        }
        return rs;
    });
    return g;
}

CatalogGraph load_catalog(std::string_view document) {
    CatalogGraph g = parse_catalog(document);
    auto violations = validate_catalog(g);
    if (violations.empty()) return g;
    const auto& first = violations.front();
    auto kind = CatalogError::Kind::Invalid;
    std::string what;
    if (first.rule == "duplicateId") {
        kind = CatalogError::Kind::DuplicateId;
        what = "duplicate id " + first.entityId;
    } else if (first.rule == "danglingRef") {
        kind = CatalogError::Kind::DanglingReference;
        what = "dangling reference from " + first.entityId + " to missing id " + first.detail;
    } else if (first.rule == "compositionCycle") {
        kind = CatalogError::Kind::CompositionCycle;
        what = "service composition cycle: " + first.detail;
    } else {
        what = "invalid catalog: " + first.entityId + " violates " + first.rule + " (" + first.detail + ")";
    }
    throw CatalogError(kind, what, std::move(violations));
}

CatalogGraph load_catalog_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CatalogError(CatalogError::Kind::Parse, "cannot open catalog file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_catalog(ss.str());
}

// ---------------------------------------------------------------- serialization

namespace {

json characteristic_json(const CharacteristicSpec& c) {
    json j = {{"name", c.name}, {"valueKind", std::string(to_string(c.valueKind))}};
    if (c.unit) j["unit"] = *c.unit;
    if (c.allowedValues) {
        j["allowedValues"] = json::array();
        for (const auto& v : *c.allowedValues) j["allowedValues"].push_back(to_json_value(v));
    }
    if (c.defaultValue) j["defaultValue"] = to_json_value(*c.defaultValue);
    return j;
}

json characteristics_json(const std::vector<CharacteristicSpec>& cs) {
    json arr = json::array();
    for (const auto& c : cs) arr.push_back(characteristic_json(c));
    return arr;
}

}  // namespace

json catalog_to_json(const CatalogGraph& g) {
    json doc = {{"version", g.version}};
    doc["offerings"] = json::array();
    for (const auto& o : g.offerings) {
        json fixed = json::object();
        for (const auto& [k, v] : o.fixedCharacteristicValues) fixed[k] = to_json_value(v);
        doc["offerings"].push_back({{"id", o.id},
                                    {"name", o.name},
                                    {"tier", o.tier},
                                    {"unitCost", to_json(o.unitCost)},
                                    {"costPeriod", std::string(to_string(o.costPeriod))},
                                    {"productSpecId", o.productSpecId},
                                    {"characteristics", characteristics_json(o.characteristics)},
                                    {"fixedCharacteristicValues", fixed}});
    }
    doc["productSpecs"] = json::array();
    for (const auto& p : g.productSpecs) {
        doc["productSpecs"].push_back({{"id", p.id},
                                       {"name", p.name},
                                       {"serviceSpecIds", p.serviceSpecIds},
                                       {"ruleSetIds", p.ruleSetIds},
                                       {"testSpecIds", p.testSpecIds},
                                       {"characteristics", characteristics_json(p.characteristics)}});
    }
    doc["serviceSpecs"] = json::array();
    for (const auto& s : g.serviceSpecs) {
        doc["serviceSpecs"].push_back({{"id", s.id},
                                       {"name", s.name},
                                       {"childServiceSpecIds", s.childServiceSpecIds},
                                       {"resourceSpecIds", s.resourceSpecIds},
                                       {"ruleSetIds", s.ruleSetIds},
                                       {"testSpecIds", s.testSpecIds},
                                       {"characteristics", characteristics_json(s.characteristics)}});
    }
    doc["resourceSpecs"] = json::array();
    for (const auto& r : g.resourceSpecs) {
        doc["resourceSpecs"].push_back({{"id", r.id},
                                        {"name", r.name},
                                        {"domain", std::string(to_string(r.domain))},
                                        {"characteristics", characteristics_json(r.characteristics)},
                                        {"testSpecIds", r.testSpecIds}});
    }
    doc["testSpecs"] = json::array();
    for (const auto& t : g.testSpecs) {
        doc["testSpecs"].push_back({{"id", t.id},
                                    {"name", t.name},
                                    {"kind", std::string(to_string(t.kind))},
                                    {"targetMetric", t.targetMetric},
                                    {"comparator", std::string(to_string(t.comparator))},
                                    {"thresholdSource", std::string(to_string(t.thresholdSource))},
                                    {"thresholdValue", to_json_value(t.thresholdValue)},
                                    {"evaluationWindowTicks", t.evaluationWindowTicks}});
    }
    doc["ruleSets"] = json::array();
    for (const auto& rs : g.ruleSets) {
        json rulesArr = json::array();
        for (const auto& r : rs.rules) rulesArr.push_back(rules::print_rule(r));
        doc["ruleSets"].push_back({{"id", rs.id}, {"rules", rulesArr}});
    }
    return doc;
}

std::string serialize_catalog(const CatalogGraph& g) { return catalog_to_json(g).dump(2); }

// ---------------------------------------------------------------- queries

std::vector<const ProductOffering*> find_offerings(const CatalogGraph& g, std::string_view query) {
    std::vector<const ProductOffering*> out;
    for (const auto& o : g.offerings) {
        if (query.empty() || text::icontains(o.name, query) || text::icontains(o.tier, query) ||
            text::icontains(o.display_name(), query)) {
            out.push_back(&o);
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const auto* a, const auto* b) { return a->id < b->id; });
    return out;
}

json offering_summary(const ProductOffering& o) {
    json j = {{"id", o.id},
              {"name", o.name},
              {"tier", o.tier},
              {"unitCost", to_json(o.unitCost)},
              {"costPeriod", std::string(to_string(o.costPeriod))}};
    json params = json::array();
    for (const auto& c : o.characteristics) params.push_back(c.name);
    j["parameters"] = params;
    if (auto cap = offering_capacity(o)) j["maxConcurrentUsers"] = *cap;
    return j;
}

std::optional<std::int64_t> offering_capacity(const ProductOffering& o) {
    auto it = o.fixedCharacteristicValues.find("maxConcurrentUsers");
    if (it == o.fixedCharacteristicValues.end() || !it->second.is_number()) return std::nullopt;
    return it->second.as_number().to_int();
}

std::vector<const ProductOffering*> resolve_product_mention(const CatalogGraph& g, std::string_view mention) {
    std::string m = text::trim(mention);
    std::vector<const ProductOffering*> out;
    auto by_name_tier = [&](std::string_view name, std::optional<std::string_view> tier) {
        for (const auto& o : g.offerings) {
            if (!text::iequals(o.name, text::trim(name))) continue;
            if (tier && !text::iequals(o.tier, text::trim(*tier))) continue;
            out.push_back(&o);
        }
    };
    if (auto slash = m.find(" / "); slash != std::string::npos) {
        by_name_tier(std::string_view(m).substr(0, slash), std::string_view(m).substr(slash + 3));
    } else {
        by_name_tier(m, std::nullopt);
        if (out.empty() && !m.empty() && m.back() == ')') {
            if (auto open = m.find(" ("); open != std::string::npos) {
                by_name_tier(std::string_view(m).substr(0, open),
                             std::string_view(m).substr(open + 2, m.size() - open - 3));
            }
        }
        if (out.empty()) {
            for (const auto& o : g.offerings) {
                if (text::iequals(o.name + " " + o.tier, m)) out.push_back(&o);
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const auto* a, const auto* b) { return a->id < b->id; });
    return out;
}

std::string default_catalog_path() {
    if (const char* env = std::getenv("INTENTFORGE_CATALOG"); env && *env) return env;
    return std::string(INTENTFORGE_SOURCE_DIR) + "/data/catalog/fixture.json";
}

}  // namespace intentforge
