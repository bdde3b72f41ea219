// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "intentforge/cocreation/session.hpp"

namespace intentforge::cocreation {

enum class ReplyPurpose { Info, Proposal, Quote, Question };
std::string_view to_string(ReplyPurpose p);

struct TextReply {
    std::string text;
    /// Product names the reply presents as orderable ("Name / Tier").
    std::vector<std::string> recommendations;
    ReplyPurpose purpose = ReplyPurpose::Info;
    /// False lets the agent keep working before handing control back to the user.
    bool endsTurn = true;
};

struct ToolCall {
    std::string name;
    nlohmann::json args = nlohmann::json::object();
};

struct Finalize {};

using Effect = std::variant<TextReply, ToolCall, Finalize>;

nlohmann::json to_json(const Effect& e);

struct ToolSpec {
    std::string name;
    std::string description;
    nlohmann::json argumentSchema;
};

struct ReasonerCapabilities {
    bool toolCalling = true;
    int maxTurnTokens = 4096;
};

struct ReasonerContext {
    const Session& session;
    /// The task the agent is working on, if any.
    const Task* task;
    const std::vector<ToolSpec>& tools;
    /// Result of the previous effect when it was a tool call.
    std::optional<nlohmann::json> lastToolResult;
    std::optional<std::string> lastToolName;
    bool lastToolOk = true;
};

class ReasonerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Reasoner {
public:
    virtual ~Reasoner() = default;
    virtual std::string id() const = 0;
    virtual ReasonerCapabilities capabilities() const { return {}; }
    /// "reasoning" or "non-reasoning", used to group report rows.
    virtual std::string group() const { return "reasoning"; }
    virtual Effect next(const ReasonerContext& ctx) = 0;
    /// Tokens the backend reported for its last effect, when it reports usage.
    virtual std::optional<int> last_usage_tokens() const { return std::nullopt; }
};

/// Template-driven backend with no randomness.
std::unique_ptr<Reasoner> make_reference_reasoner();
/// Invents products and never calls a tool.
std::unique_ptr<Reasoner> make_hallucinator_reasoner();
/// Finds three real products, invents a fourth, misprices, orders unconfirmed.
std::unique_ptr<Reasoner> make_partial_composer_reasoner();
/// Follows the reference flow but serializes one day too many.
std::unique_ptr<Reasoner> make_wrong_duration_reasoner();
/// Replays a fixed list of effects, then asks the user for input forever.
std::unique_ptr<Reasoner> make_scripted_reasoner(std::string id, std::vector<Effect> effects);

struct HttpReasonerConfig {
    std::string url;
    std::string model;
    std::chrono::milliseconds timeout{60000};
    /// Read INTENTFORGE_LLM_URL, INTENTFORGE_LLM_MODEL, INTENTFORGE_LLM_TIMEOUT_MS.
    static HttpReasonerConfig from_env();
};

/// Chat-completions style endpoint with function calling.
std::unique_ptr<Reasoner> make_http_reasoner(HttpReasonerConfig config);

/// "reference", "hallucinator", "partial-composer", "wrong-duration", "http".
std::unique_ptr<Reasoner> make_reasoner(const std::string& backendId);
std::vector<std::string> builtin_backends();

/// The operator skill text handed to LLM backends as the system prompt.
const std::string& skill_prompt();

}  // namespace intentforge::cocreation
