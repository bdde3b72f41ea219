// SPDX-License-Identifier: Apache-2.0
#include <fstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "intentforge/bench.hpp"
#include "intentforge/bundles.hpp"
#include "intentforge/catalog.hpp"
#include "intentforge/cocreation/agent.hpp"
#include "intentforge/demo.hpp"
#include "intentforge/orchestrator.hpp"
#include "intentforge/rule_dsl.hpp"
#include "intentforge/tdd_qa.hpp"
#include "intentforge/traversal.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace intentforge;

namespace {

py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

json from_py(const py::handle& o) { return json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>()); }

struct Catalog {
    std::shared_ptr<const CatalogGraph> graph;
};

Catalog load(const std::optional<std::string>& path) {
    return {std::make_shared<const CatalogGraph>(load_catalog_file(path.value_or(default_catalog_path())))};
}

py::list violations(const std::string& path) {
    py::list out;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read " + path);
    std::string doc((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    for (const auto& v : validate_catalog(parse_catalog(doc))) {
        py::dict d;
        d["entityId"] = v.entityId;
        d["rule"] = v.rule;
        d["detail"] = v.detail;
        out.append(d);
    }
    return out;
}

class Session {
public:
    Session(Catalog c, const std::string& backend, const std::string& sessionId)
        : catalog_(std::move(c)) {
        cocreation::AgentConfig cfg;
        cfg.inferConfirmationFromText = false;
        agent_ = std::make_unique<cocreation::Agent>(*catalog_.graph, cocreation::make_reasoner(backend), sessionId, cfg);
    }
    py::object send(const std::string& text) { return turns(agent_->send(text)); }
    py::object confirm(const std::string& by) { return turns(agent_->confirm(by)); }
    py::object view() const { return to_py(cocreation::to_json(agent_->session())); }
    py::object intent() const {
        if (!agent_->finalized()) return py::none();
        return to_py(to_json(agent_->finalized()->intent));
    }

private:
    static py::object turns(const std::vector<cocreation::Turn>& ts) {
        json a = json::array();
        for (const auto& t : ts) a.push_back(cocreation::to_json(t));
        return to_py(a);
    }
    Catalog catalog_;
    std::unique_ptr<cocreation::Agent> agent_;
};

py::object provision(const Catalog&, const py::object& planObj, int stepTicks, const std::optional<std::string>& fault,
                     std::uint64_t seed, int maxTicks) {
    auto plan = plan_from_json(from_py(planObj));
    auto cfg = RunConfig::uniform(stepTicks, seed);
    if (fault) cfg.faultPlans.push_back({*fault, 1});
    Engine engine(cfg);
    auto& run = engine.run(engine.execute_plan(plan));
    AssuranceLoop loop(run, plan);
    auto report = loop.run_until_settled(maxTicks);
    json reqs = json::array();
    for (const auto& r : loop.pipeline().requests()) reqs.push_back(to_json(r));
    return to_py({{"runId", run.id()}, {"report", to_json(report)}, {"requests", reqs}, {"canonical", canonical_report(report)}});
}

}  // namespace

PYBIND11_MODULE(_intentforge, m) {
    m.doc() = "Intent co-creation, planning, provisioning and assurance";

    py::register_exception<CatalogError>(m, "CatalogError", PyExc_ValueError);
    py::register_exception<PlanError>(m, "PlanError", PyExc_ValueError);
    py::register_exception<rules::RuleSyntaxError>(m, "RuleSyntaxError", PyExc_ValueError);
    py::register_exception<rules::RuleTypeError>(m, "RuleTypeError", PyExc_ValueError);
    py::register_exception<rules::RuleEvalError>(m, "RuleEvalError", PyExc_ValueError);
    py::register_exception<cocreation::FinalizeError>(m, "FinalizeError", PyExc_RuntimeError);
    py::register_exception<bench::ScenarioError>(m, "ScenarioError", PyExc_ValueError);

    m.def("default_catalog_path", &default_catalog_path);
    m.def("default_scenario_path", &bench::default_scenario_path);

    py::class_<Catalog>(m, "Catalog")
        .def_property_readonly("version", [](const Catalog& c) { return c.graph->version; })
        .def("offerings",
             [](const Catalog& c, const std::string& q) {
                 json a = json::array();
                 for (const auto* o : find_offerings(*c.graph, q)) a.push_back(offering_summary(*o));
                 return to_py(a);
             },
             py::arg("q") = "")
        .def("families", [](const Catalog& c) { return offering_families(*c.graph); })
        .def("propose_bundles",
             [](const Catalog& c, const std::vector<std::string>& families, int days, std::optional<std::int64_t> budgetCents,
                std::optional<std::int64_t> minUsers) {
                 BundleConstraints bc;
                 if (budgetCents) bc.budget = Money{*budgetCents};
                 bc.minConcurrentUsers = minUsers;
                 json a = json::array();
                 for (const auto& p : propose_bundles(*c.graph, families, bc, days)) a.push_back(to_json(p));
                 return to_py(a);
             },
             py::arg("families"), py::arg("days"), py::arg("budget_cents") = py::none(), py::arg("min_users") = py::none())
        .def("build_plan", [](const Catalog& c, const py::object& intent) {
            return to_py(to_json(build_plan(*c.graph, intent_from_json(from_py(intent)))));
        })
        .def("provision", &provision, py::arg("plan"), py::arg("step_ticks") = 3, py::arg("fault") = py::none(), py::arg("seed") = 42,
             py::arg("max_ticks") = 500)
        .def("run_bench",
             [](const Catalog& c, const std::string& backend, const std::optional<std::string>& scenario) {
                 auto sc = bench::load_scenario_file(scenario.value_or(bench::default_scenario_path()), *c.graph);
                 auto out = bench::run_scenario(sc, cocreation::make_reasoner(backend), *c.graph,
                                                std::make_shared<cocreation::LogicalClock>());
                 return to_py(to_json(out.result));
             },
             py::arg("backend") = "reference", py::arg("scenario") = py::none())
        .def("run_demo",
             [](const Catalog& c, std::uint64_t seed, const std::string& scenario) {
                 DemoOptions o;
                 o.seed = seed;
                 o.scenarioPath = scenario;
                 return to_py(run_demo(*c.graph, o).to_json());
             },
             py::arg("seed") = 42, py::arg("scenario") = "")
        .def("session", [](const Catalog& c, const std::string& backend, const std::string& id) { return Session(c, backend, id); },
             py::arg("backend") = "reference", py::arg("session_id") = "py-session");

    m.def("load_catalog", &load, py::arg("path") = py::none());
    m.def("validate_catalog", &violations, py::arg("path"));

    py::class_<Session>(m, "Session")
        .def("send", &Session::send)
        .def("confirm", &Session::confirm, py::arg("confirmed_by") = "operator")
        .def("view", &Session::view)
        .def("intent", &Session::intent);

    m.def("canonical_rule", [](const std::string& text) { return rules::print_rule(rules::parse_rule(text)); });
    m.def("plan_digest", [](const py::object& plan) { return compute_plan_digest(plan_from_json(from_py(plan))); });
    m.def("backends", &cocreation::builtin_backends);
}
