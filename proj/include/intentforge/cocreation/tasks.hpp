// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "intentforge/scalar.hpp"

namespace intentforge::cocreation {

enum class TaskState { Pending, InProgress, Completed, Blocked, NeedsInfo };
enum class TaskKind { Discovery, BundleProposal, CostQuotation, ConstraintReconciliation, OrderSerialization, Confirmation };

std::string_view to_string(TaskState s);
std::string_view to_string(TaskKind k);
bool is_legal_transition(TaskState from, TaskState to);

enum class EvidenceKind { CatalogEntity, CharacteristicValue, TranscriptTurn, CostComputation };
std::string_view to_string(EvidenceKind k);

struct EvidencePointer {
    EvidenceKind kind = EvidenceKind::TranscriptTurn;
    std::string ref;
    std::optional<Scalar> value;

    bool operator==(const EvidencePointer&) const = default;
};

struct Task {
    std::string taskId;
    TaskKind kind = TaskKind::Discovery;
    std::string description;
    std::vector<std::string> acceptanceCriteria;
    TaskState state = TaskState::Pending;
    std::vector<EvidencePointer> evidence;
    /// Set when new user input arrives while the task waits on it.
    bool reopenable = false;
};

class IllegalTransition : public std::logic_error {
public:
    IllegalTransition(const std::string& taskId, TaskState from, TaskState to);
    std::string taskId;
    TaskState from;
    TaskState to;
};

struct TaskTransition {
    std::string taskId;
    TaskState from;
    TaskState to;
};

/// Session-scoped to-do list. Every state change goes through transition(),
/// which throws IllegalTransition rather than let the list reach a bad state.
class TaskList {
public:
    /// Adds the template task for `kind` unless one already exists.
    /// Returns true when a task was added.
    bool ensure(TaskKind kind);

    const std::vector<Task>& tasks() const { return tasks_; }
    const Task* find(TaskKind kind) const;
    const Task* in_progress() const;
    /// First reopenable waiting task, else first pending task.
    const Task* next_candidate() const;
    bool all_completed() const;
    bool empty() const { return tasks_.empty(); }

    void transition(const std::string& taskId, TaskState to, std::vector<EvidencePointer> evidence = {});
    /// Flags every needs_info or blocked task as reopenable.
    void mark_reopenable();

    const std::vector<TaskTransition>& history() const { return history_; }

private:
    Task* get(const std::string& taskId);
    std::vector<Task> tasks_;
    std::vector<TaskTransition> history_;
};

/// The six template tasks, in execution order.
const std::vector<TaskKind>& task_template();
Task make_task(TaskKind kind);

nlohmann::json to_json(const EvidencePointer& e);
nlohmann::json to_json(const Task& t);
nlohmann::json to_json(const TaskList& l);

}  // namespace intentforge::cocreation
