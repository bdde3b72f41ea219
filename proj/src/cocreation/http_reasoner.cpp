// SPDX-License-Identifier: Apache-2.0
#include <regex>

#include <httplib.h>

#include "intentforge/cocreation/guardrails.hpp"
#include "intentforge/cocreation/reasoner.hpp"

namespace intentforge::cocreation {

using nlohmann::json;

namespace {

ReplyPurpose infer_purpose(const std::string& text) {
    if (extract_total(text)) return ReplyPurpose::Quote;
    if (contains_money(text)) return ReplyPurpose::Proposal;
    if (text.find('?') != std::string::npos) return ReplyPurpose::Question;
    return ReplyPurpose::Info;
}

class HttpReasoner : public Reasoner {
public:
    explicit HttpReasoner(HttpReasonerConfig cfg) : cfg_(std::move(cfg)) {
        static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
        std::smatch m;
        if (!std::regex_match(cfg_.url, m, url)) throw ReasonerError("bad reasoner URL " + cfg_.url);
        base_ = m[1].str();
        path_ = m[2].matched ? m[2].str() : "/v1/chat/completions";
    }

    std::string id() const override { return "http:" + cfg_.model; }
    std::optional<int> last_usage_tokens() const override { return usage_; }

    Effect next(const ReasonerContext& ctx) override {
        usage_.reset();
        json body{{"model", cfg_.model}, {"messages", messages(ctx)}, {"tools", tools(ctx)}, {"stream", false}};
        httplib::Client cli(base_);
        auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg_.timeout).count();
        auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg_.timeout).count() % 1000000;
        cli.set_read_timeout(secs, usecs);
        cli.set_connection_timeout(secs, usecs);
        auto res = cli.Post(path_, body.dump(), "application/json");
        if (!res) throw ReasonerError("backend unreachable: " + httplib::to_string(res.error()));
        if (res->status != 200) throw ReasonerError("backend returned HTTP " + std::to_string(res->status));
        json reply;
        try {
            reply = json::parse(res->body);
        } catch (const std::exception& e) {
            throw ReasonerError(std::string("backend returned invalid JSON: ") + e.what());
        }
        if (reply.contains("usage") && reply["usage"].contains("total_tokens")) usage_ = reply["usage"]["total_tokens"].get<int>();
        if (!reply.contains("choices") || reply["choices"].empty()) throw ReasonerError("backend returned no choices");
        const auto& msg = reply["choices"][0]["message"];
        if (msg.contains("tool_calls") && msg["tool_calls"].is_array() && !msg["tool_calls"].empty()) {
            const auto& fn = msg["tool_calls"][0]["function"];
            json args = json::object();
            if (fn.contains("arguments")) {
                const auto& a = fn["arguments"];
                try {
                    args = a.is_string() ? json::parse(a.get<std::string>()) : a;
                } catch (const std::exception&) {
                    throw ReasonerError("tool call arguments are not JSON");
                }
            }
            return ToolCall{fn.value("name", std::string{}), args};
        }
        std::string text = msg.contains("content") && msg["content"].is_string() ? msg["content"].get<std::string>() : "";
        return TextReply{text, {}, infer_purpose(text), true};
    }

private:
    json messages(const ReasonerContext& ctx) const {
        json out = json::array();
        std::string sys = skill_prompt();
        sys += "The intentId for this session is " + ctx.session.intent_id() + ".\n";
        if (ctx.task) sys += "Current task: " + ctx.task->description + "\n";
        out.push_back({{"role", "system"}, {"content", sys}});
        for (const auto& t : ctx.session.transcript) {
            if (t.role == Role::User) {
                out.push_back({{"role", "user"}, {"content", t.content}});
            } else if (t.role == Role::Agent) {
                if (t.meta.contains("effect") && t.meta["effect"].value("type", "") == "tool") continue;
                out.push_back({{"role", "assistant"}, {"content", t.content}});
            } else {
                std::string callId = "call-" + std::to_string(t.index);
                out.push_back({{"role", "assistant"},
                               {"content", nullptr},
                               {"tool_calls",
                                json::array({{{"id", callId},
                                              {"type", "function"},
                                              {"function",
                                               {{"name", t.meta.value("tool", std::string{})},
                                                {"arguments", t.meta.value("args", json::object()).dump()}}}}})}});
                json res = t.meta.value("ok", false) ? t.meta.value("result", json::object())
                                                     : json{{"error", t.meta.value("result", json::object()).value("error", "")}};
                out.push_back({{"role", "tool"}, {"tool_call_id", callId}, {"content", res.dump()}});
            }
        }
        return out;
    }

    static json tools(const ReasonerContext& ctx) {
        json out = json::array();
        for (const auto& t : ctx.tools) {
            out.push_back({{"type", "function"},
                           {"function", {{"name", t.name}, {"description", t.description}, {"parameters", t.argumentSchema}}}});
        }
        return out;
    }

    HttpReasonerConfig cfg_;
    std::string base_;
    std::string path_;
    std::optional<int> usage_;
};

}  // namespace

std::unique_ptr<Reasoner> make_http_reasoner(HttpReasonerConfig config) {
    return std::make_unique<HttpReasoner>(std::move(config));
}

}  // namespace intentforge::cocreation
