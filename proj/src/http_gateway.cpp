// SPDX-License-Identifier: Apache-2.0
#include <httplib.h>

#include <functional>
#include <list>

#include "intentforge/gateway.hpp"

namespace intentforge::gateway {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
        return json::parse(req.body);
    } catch (const json::parse_error& e) {
        throw ApiError(400, std::string("malformed JSON: ") + e.what());
    }
}

std::int64_t parse_cursor(const std::string& s) {
    if (s.empty()) return 0;
    try {
        std::size_t used = 0;
        auto v = std::stoll(s, &used);
        if (used != s.size() || v < 0) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ApiError(400, "cursor must be a non-negative integer");
    }
}

/// Bounded LRU of (method path key) -> response for Idempotency-Key replays.
class IdempotencyCache {
public:
    struct Entry {
        int status;
        std::string body;
    };
    std::optional<Entry> get(const std::string& key) {
        std::lock_guard lock(mu_);
        auto it = map_.find(key);
        if (it == map_.end()) return std::nullopt;
        return it->second;
    }
    void put(const std::string& key, Entry e) {
        std::lock_guard lock(mu_);
        if (map_.count(key)) return;
        order_.push_back(key);
        map_[key] = std::move(e);
        while (order_.size() > 1024) {
            map_.erase(order_.front());
            order_.pop_front();
        }
    }

private:
    std::mutex mu_;
    std::map<std::string, Entry> map_;
    std::list<std::string> order_;
};

}  // namespace

struct HttpGateway::Impl {
    GatewayService& svc;
    httplib::Server server;
    std::thread thread;
    IdempotencyCache idem;

    explicit Impl(GatewayService& s) : svc(s) { routes(); }

    using Handler = std::function<std::pair<int, json>(const httplib::Request&)>;

    httplib::Server::Handler wrap(Handler h, bool idempotent) {
        return [this, h = std::move(h), idempotent](const httplib::Request& req, httplib::Response& res) {
            std::string key;
            if (idempotent && req.has_header("Idempotency-Key")) {
                key = req.method + " " + req.path + " " + req.get_header_value("Idempotency-Key");
                if (auto hit = idem.get(key)) {
                    res.status = hit->status;
                    res.set_header("Idempotent-Replay", "true");
                    res.set_content(hit->body, "application/json");
                    return;
                }
            }
            int status;
            json body;
            try {
                std::tie(status, body) = h(req);
            } catch (const ApiError& e) {
                status = e.status;
                body = {{"error", e.what()}, {"status", e.status}};
            } catch (const std::invalid_argument& e) {
                status = 400;
                body = {{"error", e.what()}, {"status", 400}};
            } catch (const std::exception& e) {
                status = 500;
                body = {{"error", e.what()}, {"status", 500}};
            }
            if (!key.empty() && status < 500) idem.put(key, {status, body.dump()});
            send_json(res, status, body);
        };
    }

    void get(const std::string& pattern, Handler h) { server.Get(pattern, wrap(std::move(h), false)); }
    void post(const std::string& pattern, Handler h) { server.Post(pattern, wrap(std::move(h), true)); }

    void routes() {
        server.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
            const auto& token = svc.config().bearerToken;
            if (token.empty() || req.path == "/healthz") return httplib::Server::HandlerResponse::Unhandled;
            if (req.get_header_value("Authorization") == "Bearer " + token) return httplib::Server::HandlerResponse::Unhandled;
            res.set_header("WWW-Authenticate", "Bearer");
            send_json(res, 401, {{"error", "missing or invalid bearer token"}, {"status", 401}});
            return httplib::Server::HandlerResponse::Handled;
        });
        server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (res.body.empty()) send_json(res, res.status, {{"error", "not found"}, {"status", res.status}});
        });

        get("/healthz", [this](const auto&) { return std::pair{200, svc.health()}; });
        get("/catalog/offerings", [this](const httplib::Request& r) { return std::pair{200, svc.offerings(r.get_param_value("q"))}; });
        post("/sessions", [this](const httplib::Request& r) { return std::pair{201, svc.create_session(parse_body(r))}; });
        get(R"(/sessions/([^/]+))", [this](const httplib::Request& r) { return std::pair{200, svc.session(r.matches[1])}; });
        post(R"(/sessions/([^/]+)/message)",
             [this](const httplib::Request& r) { return std::pair{200, svc.post_message(r.matches[1], parse_body(r))}; });
        post(R"(/sessions/([^/]+)/confirm)",
             [this](const httplib::Request& r) { return std::pair{200, svc.confirm(r.matches[1], parse_body(r))}; });
        get(R"(/sessions/([^/]+)/tasks)", [this](const httplib::Request& r) { return std::pair{200, svc.tasks(r.matches[1])}; });
        get(R"(/plans/([^/]+))", [this](const httplib::Request& r) { return std::pair{200, svc.plan(r.matches[1])}; });
        post("/runs", [this](const httplib::Request& r) { return std::pair{201, svc.create_run(parse_body(r))}; });
        get(R"(/runs/([^/]+))", [this](const httplib::Request& r) { return std::pair{200, svc.run_view(r.matches[1])}; });
        get(R"(/runs/([^/]+)/report)", [this](const httplib::Request& r) { return std::pair{200, svc.run_report(r.matches[1])}; });
        post(R"(/runs/([^/]+)/remediate)",
             [this](const httplib::Request& r) { return std::pair{200, svc.remediate(r.matches[1], parse_body(r))}; });
        post(R"(/runs/([^/]+)/tick)", [this](const httplib::Request& r) {
            auto b = parse_body(r);
            int n = b.value("ticks", 1);
            if (n < 1) throw ApiError(400, "ticks must be positive");
            return std::pair{200, svc.tick_run(r.matches[1], n)};
        });
        get("/bus/stats", [this](const auto&) { return std::pair{200, svc.bus_stats()}; });

        server.Get("/events", [this](const httplib::Request& req, httplib::Response& res) {
            try {
                bool sse = req.get_header_value("Accept").find("text/event-stream") != std::string::npos ||
                           req.has_header("Last-Event-ID");
                auto cursor = parse_cursor(req.has_header("Last-Event-ID") ? req.get_header_value("Last-Event-ID")
                                                                           : req.get_param_value("cursor"));
                if (!sse) {
                    send_json(res, 200, svc.events_since(cursor));
                    return;
                }
                res.set_header("Cache-Control", "no-cache");
                auto pos = std::make_shared<std::int64_t>(cursor);
                res.set_chunked_content_provider("text/event-stream", [this, pos](std::size_t, httplib::DataSink& sink) {
                    if (!svc.events().wait_past(*pos, std::chrono::milliseconds(15000))) {
                        if (svc.events().closed()) {
                            sink.done();
                            return true;
                        }
                        if (svc.events().last() <= *pos) {
                            static const std::string ping = ": keep-alive\n\n";
                            if (!sink.is_writable() || !sink.write(ping.data(), ping.size())) return false;
                            return true;
                        }
                    }
                    for (const auto& ev : svc.events().since(*pos)) {
                        std::string frame = "id: " + std::to_string(ev.sequence) + "\nevent: " + std::string(to_string(ev.kind)) +
                                            "\ndata: " + to_json(ev).dump() + "\n\n";
                        if (!sink.write(frame.data(), frame.size())) return false;
                        *pos = ev.sequence;
                    }
                    return true;
                });
            } catch (const ApiError& e) {
                send_json(res, e.status, {{"error", e.what()}, {"status", e.status}});
            }
        });
    }
};

HttpGateway::HttpGateway(GatewayService& service) : impl_(std::make_unique<Impl>(service)) {}

HttpGateway::~HttpGateway() { stop(); }

int HttpGateway::start(const std::string& host, int port) {
    int bound = port;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port(host);
        if (bound <= 0) throw std::runtime_error("cannot bind " + host);
    } else if (!impl_->server.bind_to_port(host, port)) {
        throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    }
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return bound;
}

void HttpGateway::serve(const std::string& host, int port) {
    if (!impl_->server.listen(host, port)) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
}

void HttpGateway::stop() {
    if (!impl_) return;
    impl_->svc.events().close();
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace intentforge::gateway
