// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "intentforge/cocreation/tasks.hpp"
#include "intentforge/money.hpp"
#include "intentforge/traversal.hpp"

namespace intentforge::cocreation {

enum class Role { User, Agent, Tool };
std::string_view to_string(Role r);

struct Turn {
    int index = 0;
    Role role = Role::User;
    std::string content;
    std::int64_t timestamp = 0;
    int tokenCount = 0;
    /// Structured side data: effect kind, recommendations, tool name/args/result, vetoes.
    nlohmann::json meta = nlohmann::json::object();
};

/// ceil(words * 4 / 3)
int estimate_tokens(std::string_view text);

/// Milliseconds. Logical clocks tick once per reading so transcripts are reproducible.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::int64_t now_ms() = 0;
};

class LogicalClock : public Clock {
public:
    std::int64_t now_ms() override { return ++t_; }

private:
    std::int64_t t_ = 0;
};

class WallClock : public Clock {
public:
    std::int64_t now_ms() override {
        return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
            .count();
    }
};

enum class ConstraintName { Budget, MinConcurrentUsers, LatencyCeilingMs, Location, Duration, StartDate };
std::string_view to_string(ConstraintName n);

struct GoalConstraint {
    ConstraintName name = ConstraintName::Budget;
    Scalar value;
    /// Transcript turn index that stated it.
    int turn = 0;
};

struct StructuredGoal {
    std::string objective;
    /// Latest value per name wins; earlier statements stay for audit.
    std::vector<GoalConstraint> explicitConstraints;
    std::vector<std::string> assumptions;
    std::vector<std::string> missingInfo;
    /// Lower-case keywords seen in user turns ("5g", "media", ...).
    std::vector<std::string> features;

    std::optional<Scalar> latest(ConstraintName n) const;
};

struct DraftIntent {
    std::vector<OfferingSelection> offeringSelections;
    IntentConstraints constraints;
    std::optional<ServicePeriod> period;
    std::optional<int> days;
    std::optional<Money> quotedCost;
    std::optional<int> quoteTurn;
    std::optional<nlohmann::json> payload;
    std::optional<int> payloadTurn;
    bool confirmed = false;
    std::optional<int> confirmationTurn;
};

enum class SessionStatus { Active, AwaitingUser, Finalized, Aborted };
std::string_view to_string(SessionStatus s);

struct Session {
    std::string sessionId;
    std::vector<Turn> transcript;
    std::optional<StructuredGoal> goal;
    TaskList taskList;
    DraftIntent draft;
    SessionStatus status = SessionStatus::Active;
    std::optional<std::string> diagnostic;

    std::string intent_id() const { return "intent-" + sessionId; }
};

nlohmann::json to_json(const Turn& t);
nlohmann::json to_json(const StructuredGoal& g);
nlohmann::json to_json(const DraftIntent& d);
nlohmann::json to_json(const Session& s);
nlohmann::json transcript_json(const std::vector<Turn>& transcript);
std::vector<Turn> transcript_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------- interpretation

/// What a single user message says, extracted deterministically.
struct Extraction {
    std::optional<Money> budget;
    std::optional<std::int64_t> users;
    std::optional<Decimal> latencyCeilingMs;
    std::optional<std::string> location;
    std::optional<int> durationDays;
    std::optional<Date> startDate;
    bool affirmation = false;
    std::vector<std::string> features;
};

Extraction extract(std::string_view userText);

/// Folds a user turn into the session goal (creating it on first use) and
/// returns the goal. An empty message leaves the session without a goal.
std::optional<StructuredGoal> interpret_intent(Session& session, int turnIndex);

/// Makes sure the six template tasks exist; never duplicates.
const TaskList& decompose_goal(Session& session);

}  // namespace intentforge::cocreation
