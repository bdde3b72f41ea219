// SPDX-License-Identifier: Apache-2.0
#include "intentforge/cocreation/tasks.hpp"

#include <algorithm>

namespace intentforge::cocreation {

std::string_view to_string(TaskState s) {
    switch (s) {
    case TaskState::Pending: return "pending";
    case TaskState::InProgress: return "in_progress";
    case TaskState::Completed: return "completed";
    case TaskState::Blocked: return "blocked";
    case TaskState::NeedsInfo: return "needs_info";
    }
    return "pending";
}

std::string_view to_string(TaskKind k) {
    switch (k) {
    case TaskKind::Discovery: return "discovery";
    case TaskKind::BundleProposal: return "bundle_proposal";
    case TaskKind::CostQuotation: return "cost_quotation";
    case TaskKind::ConstraintReconciliation: return "constraint_reconciliation";
    case TaskKind::OrderSerialization: return "order_serialization";
    case TaskKind::Confirmation: return "confirmation";
    }
    return "discovery";
}

std::string_view to_string(EvidenceKind k) {
    switch (k) {
    case EvidenceKind::CatalogEntity: return "catalogEntity";
    case EvidenceKind::CharacteristicValue: return "characteristicValue";
    case EvidenceKind::TranscriptTurn: return "transcriptTurn";
    case EvidenceKind::CostComputation: return "costComputation";
    }
    return "transcriptTurn";
}

bool is_legal_transition(TaskState from, TaskState to) {
    switch (from) {
    case TaskState::Pending: return to == TaskState::InProgress;
    case TaskState::InProgress:
        return to == TaskState::Completed || to == TaskState::Blocked || to == TaskState::NeedsInfo;
    case TaskState::Blocked:
    case TaskState::NeedsInfo: return to == TaskState::InProgress;
    case TaskState::Completed: return false;
    }
    return false;
}

IllegalTransition::IllegalTransition(const std::string& id, TaskState f, TaskState t)
    : std::logic_error("illegal task transition " + id + ": " + std::string(to_string(f)) + " -> " + std::string(to_string(t))),
      taskId(id),
      from(f),
      to(t) {}

const std::vector<TaskKind>& task_template() {
    static const std::vector<TaskKind> kinds = {TaskKind::Discovery,     TaskKind::BundleProposal,
                                                TaskKind::CostQuotation, TaskKind::ConstraintReconciliation,
                                                TaskKind::OrderSerialization, TaskKind::Confirmation};
    return kinds;
}

Task make_task(TaskKind kind) {
    Task t;
    t.kind = kind;
    t.taskId = "task-" + std::string(to_string(kind));
    switch (kind) {
    case TaskKind::Discovery:
        t.description = "Look up the available product offerings in the catalog";
        t.acceptanceCriteria = {"a catalog tool returned at least one offering"};
        break;
    case TaskKind::BundleProposal:
        t.description = "Propose a combination of catalog offerings for the goal";
        t.acceptanceCriteria = {"a bundle of catalog offerings is selected in the draft",
                                "the bundle was presented to the user with prices"};
        break;
    case TaskKind::CostQuotation:
        t.description = "Quote the total cost of the selected bundle for the service period";
        t.acceptanceCriteria = {"the service duration is known", "a pricing quote exists for the current selection",
                                "the total cost was stated to the user"};
        break;
    case TaskKind::ConstraintReconciliation:
        t.description = "Reconcile the bundle with the budget and user-count constraints";
        t.acceptanceCriteria = {"budget and minimum concurrent users are known",
                                "the selected bundle fits the budget and serves the required users",
                                "the reconciled total cost was stated to the user"};
        break;
    case TaskKind::OrderSerialization:
        t.description = "Serialize the order payload";
        t.acceptanceCriteria = {"the service start date is known", "an order payload preview matches the current draft"};
        break;
    case TaskKind::Confirmation:
        t.description = "Obtain explicit confirmation of the quoted order";
        t.acceptanceCriteria = {"the user affirmed the order after the quote and payload preview"};
        break;
    }
    return t;
}

bool TaskList::ensure(TaskKind kind) {
    if (find(kind)) return false;
    tasks_.push_back(make_task(kind));
    return true;
}

const Task* TaskList::find(TaskKind kind) const {
    for (const auto& t : tasks_) {
        if (t.kind == kind) return &t;
    }
    return nullptr;
}

const Task* TaskList::in_progress() const {
    for (const auto& t : tasks_) {
        if (t.state == TaskState::InProgress) return &t;
    }
    return nullptr;
}

const Task* TaskList::next_candidate() const {
    for (const auto& t : tasks_) {
        if (t.reopenable && (t.state == TaskState::NeedsInfo || t.state == TaskState::Blocked)) return &t;
    }
    for (const auto& t : tasks_) {
        if (t.state == TaskState::Pending) return &t;
    }
    return nullptr;
}

bool TaskList::all_completed() const {
    return std::all_of(tasks_.begin(), tasks_.end(), [](const Task& t) { return t.state == TaskState::Completed; });
}

Task* TaskList::get(const std::string& taskId) {
    for (auto& t : tasks_) {
        if (t.taskId == taskId) return &t;
    }
    return nullptr;
}

void TaskList::transition(const std::string& taskId, TaskState to, std::vector<EvidencePointer> evidence) {
    Task* t = get(taskId);
    if (!t) throw std::logic_error("unknown task " + taskId);
    if (!is_legal_transition(t->state, to)) throw IllegalTransition(taskId, t->state, to);
    if (to == TaskState::InProgress) {
        if (const auto* cur = in_progress(); cur && cur->taskId != taskId) throw IllegalTransition(taskId, t->state, to);
    }
    if (to == TaskState::Completed && evidence.empty() && t->evidence.empty()) {
        throw std::logic_error("task " + taskId + " cannot complete without evidence");
    }
    history_.push_back({taskId, t->state, to});
    t->state = to;
    t->reopenable = false;
    for (auto& e : evidence) t->evidence.push_back(std::move(e));
}

void TaskList::mark_reopenable() {
    for (auto& t : tasks_) {
        if (t.state == TaskState::NeedsInfo || t.state == TaskState::Blocked) t.reopenable = true;
    }
}

nlohmann::json to_json(const EvidencePointer& e) {
    nlohmann::json j{{"kind", std::string(to_string(e.kind))}, {"ref", e.ref}};
    if (e.value) j["value"] = to_json_value(*e.value);
    return j;
}

nlohmann::json to_json(const Task& t) {
    nlohmann::json ev = nlohmann::json::array();
    for (const auto& e : t.evidence) ev.push_back(to_json(e));
    return {{"taskId", t.taskId},
            {"kind", std::string(to_string(t.kind))},
            {"description", t.description},
            {"acceptanceCriteria", t.acceptanceCriteria},
            {"state", std::string(to_string(t.state))},
            {"evidence", ev}};
}

nlohmann::json to_json(const TaskList& l) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& t : l.tasks()) arr.push_back(to_json(t));
    return arr;
}

}  // namespace intentforge::cocreation
