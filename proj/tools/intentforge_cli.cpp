// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>

#include <chrono>
#include <csignal>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "intentforge/bench.hpp"
#include "intentforge/catalog.hpp"
#include "intentforge/cocreation/agent.hpp"
#include "intentforge/demo.hpp"
#include "intentforge/gateway.hpp"
#include "intentforge/traversal.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace intentforge;

namespace {

/// Domain failure: printed as a diagnostic, exit 1.
struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void print_violations(const std::vector<Violation>& vs, std::ostream& os) {
    for (const auto& v : vs) os << v.rule << "\t" << v.entityId << "\t" << v.detail << "\n";
    os << vs.size() << " violation(s)\n";
}

/// Loads and validates; prints the report and fails on any violation.
CatalogGraph checked_catalog(const std::string& path) {
    CatalogGraph g;
    try {
        g = parse_catalog(read_file(path));
    } catch (const CatalogError& e) {
        throw Failure(std::string("catalog ") + path + ": " + e.what());
    }
    auto vs = validate_catalog(g);
    if (!vs.empty()) {
        print_violations(vs, std::cerr);
        throw Failure("catalog " + path + " is invalid");
    }
    return g;
}

int cmd_catalog_validate(const std::string& file) {
    CatalogGraph g;
    try {
        g = parse_catalog(read_file(file));
    } catch (const CatalogError& e) {
        std::cout << e.what() << "\n";
        return 1;
    }
    auto vs = validate_catalog(g);
    if (vs.empty()) {
        std::cout << "OK\n";
        return 0;
    }
    print_violations(vs, std::cout);
    return 1;
}

int cmd_plan(const std::string& catalog, const std::string& intentFile) {
    auto g = checked_catalog(catalog);
    ConfirmedIntent intent;
    try {
        intent = intent_from_json(json::parse(read_file(intentFile)));
    } catch (const json::exception& e) {
        throw Failure("intent " + intentFile + ": " + e.what());
    }
    auto p = build_plan(g, intent);
    std::cout << to_json(p).dump(2) << "\n";
    std::cout << "digest: " << p.canonicalDigest << "\n";
    return 0;
}

void print_turn(const cocreation::Turn& t) {
    if (t.role == cocreation::Role::User) return;
    std::cout << "[" << cocreation::to_string(t.role) << "] " << t.content << "\n";
}

int cmd_repl(const std::string& catalog, const std::string& backend) {
    auto g = checked_catalog(catalog);
    cocreation::AgentConfig cfg;
    cfg.inferConfirmationFromText = false;
    cocreation::Agent agent(g, cocreation::make_reasoner(backend), "repl", cfg, std::make_shared<cocreation::WallClock>());
    agent.onTurn = print_turn;
    std::cout << "backend " << backend << ". Commands: :confirm  :tasks  :quit\n";
    std::string line;
    while (std::cout << "> " << std::flush, std::getline(std::cin, line)) {
        if (line == ":quit") break;
        try {
            if (line == ":tasks") {
                std::cout << cocreation::to_json(agent.session().taskList).dump(2) << "\n";
            } else if (line == ":confirm") {
                agent.confirm("operator");
            } else if (!line.empty()) {
                agent.send(line);
            }
        } catch (const std::exception& e) {
            std::cout << "error: " << e.what() << "\n";
        }
        if (agent.finalized()) {
            auto p = build_plan(g, agent.finalized()->intent);
            std::cout << "finalized; plan " << p.planId << " digest " << p.canonicalDigest << "\n";
            break;
        }
    }
    return 0;
}

std::string timestamp() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream ss;
    ss << std::put_time(&tm, "%Y%m%dT%H%M%SZ");
    return ss.str();
}

int cmd_bench(const std::string& catalog, const std::string& scenarioPath, const std::vector<std::string>& backends,
              const std::string& format, const std::string& outDir) {
    auto g = checked_catalog(catalog);
    auto sc = bench::load_scenario_file(scenarioPath, g);
    std::vector<std::string> ids = backends;
    if (ids.size() == 1 && ids[0] == "all") ids = cocreation::builtin_backends();
    std::vector<bench::BenchResult> results;
    for (const auto& id : ids) {
        std::unique_ptr<cocreation::Reasoner> r;
        try {
            r = cocreation::make_reasoner(id);
        } catch (const std::invalid_argument& e) {
            throw Failure(e.what());
        } catch (const cocreation::ReasonerError& e) {
            if (ids.size() == 1) throw Failure(e.what());
            std::cerr << "skipping " << id << ": " << e.what() << "\n";
            continue;
        }
        results.push_back(bench::run_scenario(sc, std::move(r), g).result);
    }
    auto text = bench::emit_report(results, format);
    std::cout << text;
    if (!outDir.empty()) {
        fs::create_directories(outDir);
        auto ext = format == "table" ? "txt" : format;
        auto path = fs::path(outDir) / ("bench-" + timestamp() + "." + ext);
        std::ofstream(path) << text;
        std::cerr << "wrote " << path.string() << "\n";
    }
    return 0;
}

int cmd_demo(const std::string& catalog, std::uint64_t seed, const std::string& scenario, bool reportOnly) {
    auto g = checked_catalog(catalog);
    DemoOptions opt;
    opt.seed = seed;
    if (!scenario.empty()) opt.scenarioPath = scenario;
    auto d = run_demo(g, opt);
    if (reportOnly) {
        std::cout << canonical_report(d.faultFree.report) << "\n" << canonical_report(d.faultInjected.report) << "\n";
    } else {
        std::cout << d.to_json().dump(2) << "\n";
    }
    return d.faultFree.report.overall == Overall::Compliant && d.faultInjected.report.overall == Overall::Compliant ? 0 : 1;
}

gateway::HttpGateway* g_server = nullptr;

int cmd_serve(const std::string& catalog, const std::string& host, int port, const std::string& backend, int tickMs,
              bool requireApproval, const std::string& inventory) {
    auto g = checked_catalog(catalog);
    gateway::GatewayConfig cfg;
    cfg.backend = backend;
    cfg.tickIntervalMs = tickMs;
    cfg.runConfig.requireApproval = requireApproval;
    cfg.inventoryPath = inventory;
    if (const char* t = std::getenv("INTENTFORGE_TOKEN")) cfg.bearerToken = t;
    gateway::GatewayService svc(std::move(g), cfg);
    gateway::HttpGateway http(svc);
    g_server = &http;
    std::signal(SIGINT, [](int) {
        if (g_server) g_server->stop();
    });
    std::signal(SIGTERM, [](int) {
        if (g_server) g_server->stop();
    });
    std::cerr << "listening on " << host << ":" << port << "\n";
    http.serve(host, port);
    g_server = nullptr;
    svc.shutdown();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"intentforge: intent co-creation, planning, provisioning and assurance"};
    app.require_subcommand(1);
    std::string catalog = default_catalog_path();
    app.add_option("--catalog", catalog, "Catalog document (INTENTFORGE_CATALOG)");

    auto* cat = app.add_subcommand("catalog", "Catalog tools");
    cat->require_subcommand(1);
    std::string catFile;
    auto* validate = cat->add_subcommand("validate", "Validate a catalog document");
    validate->add_option("file", catFile)->required();

    auto* plan = app.add_subcommand("plan", "Build the orchestration plan for a confirmed intent");
    std::string intentFile;
    plan->add_option("--intent", intentFile)->required();

    auto* session = app.add_subcommand("session", "Interactive co-creation");
    session->require_subcommand(1);
    auto* repl = session->add_subcommand("repl", "Terminal session");
    std::string replBackend = "reference";
    repl->add_option("--backend", replBackend);

    auto* bench = app.add_subcommand("bench", "Benchmark harness");
    bench->require_subcommand(1);
    auto* benchRun = bench->add_subcommand("run", "Run the scenario against backends");
    std::string scenario = bench::default_scenario_path();
    std::vector<std::string> backends{"reference"};
    std::string format = "table";
    std::string outDir = "reports";
    benchRun->add_option("--scenario", scenario);
    benchRun->add_option("--backend", backends, "Backend id, repeatable, or 'all'");
    benchRun->add_option("--format", format)->check(CLI::IsMember({"table", "json", "csv"}));
    bool noWrite = false;
    benchRun->add_option("--out", outDir, "Report directory");
    benchRun->add_flag("--no-write", noWrite, "Print only");

    auto* demo = app.add_subcommand("demo", "Demonstrations");
    demo->require_subcommand(1);
    auto* e2e = demo->add_subcommand("e2e", "Q1..Q5, plan, provision, red to green, report");
    std::uint64_t seed = 42;
    std::string demoScenario;
    bool reportOnly = false;
    e2e->add_option("--seed", seed);
    e2e->add_option("--scenario", demoScenario);
    e2e->add_flag("--report-only", reportOnly, "Print only the canonical SLA reports");

    auto* serve = app.add_subcommand("serve", "HTTP gateway");
    std::string host = "0.0.0.0";
    int port = 0;
    std::string serveBackend = "reference";
    int tickMs = 0;
    bool approval = false;
    std::string inventory;
    serve->add_option("--host", host);
    serve->add_option("--port", port, "Default INTENTFORGE_PORT or 8080");
    serve->add_option("--backend", serveBackend);
    serve->add_option("--tick-ms", tickMs, "0 settles runs synchronously");
    serve->add_flag("--require-approval", approval);
    serve->add_option("--inventory", inventory);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (validate->parsed()) return cmd_catalog_validate(catFile);
        if (plan->parsed()) return cmd_plan(catalog, intentFile);
        if (repl->parsed()) return cmd_repl(catalog, replBackend);
        if (benchRun->parsed()) return cmd_bench(catalog, scenario, backends, format, noWrite ? std::string() : outDir);
        if (e2e->parsed()) return cmd_demo(catalog, seed, demoScenario, reportOnly);
        if (serve->parsed()) return cmd_serve(catalog, host, port > 0 ? port : gateway::port_from_env(), serveBackend, tickMs, approval, inventory);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
