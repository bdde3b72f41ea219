// SPDX-License-Identifier: Apache-2.0
//
// Refinement rules attached to catalog nodes.
//
//   rule    := "when" expr "then" action { "," action }
//   action  := ident ":=" expr
//   expr    := or
//   or      := and { "or" and }
//   and     := not { "and" not }
//   not     := "not" not | cmp
//   cmp     := sum [ ("=="|"!="|"<"|"<="|">"|">=") sum ]
//   sum     := product { ("+"|"-") product }
//   product := unary { ("*"|"/") unary }
//   unary   := "-" unary | primary
//   primary := number | string | "true" | "false" | "$" ident | "(" expr ")"
//
// Rules are statically typed. `$name` references get their type from how
// they are used; a name used both as a number and a string is rejected.
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "intentforge/scalar.hpp"

namespace intentforge::rules {

struct SourcePos {
    int line = 1;
    int column = 1;
};

enum class UnaryOp { Not, Negate };
enum class BinaryOp { Add, Sub, Mul, Div, Eq, Ne, Lt, Le, Gt, Ge, And, Or };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Literal {
    Scalar value;
};
struct Ref {
    std::string name;
};
struct Unary {
    UnaryOp op;
    ExprPtr operand;
};
struct Binary {
    BinaryOp op;
    ExprPtr lhs;
    ExprPtr rhs;
};

struct Expr {
    std::variant<Literal, Ref, Unary, Binary> node;
    SourcePos pos;
};

ExprPtr make_literal(Scalar v, SourcePos pos = {});
ExprPtr make_ref(std::string name, SourcePos pos = {});
ExprPtr make_unary(UnaryOp op, ExprPtr operand, SourcePos pos = {});
ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs, SourcePos pos = {});

/// Structural equality; source positions are ignored.
bool structurally_equal(const Expr& a, const Expr& b);

struct Action {
    std::string target;
    ExprPtr value;
};

struct Rule {
    std::string id;
    ExprPtr condition;
    std::vector<Action> actions;
};

bool structurally_equal(const Rule& a, const Rule& b);

struct RuleSet {
    std::string id;
    std::vector<Rule> rules;
};

class RuleSyntaxError : public std::runtime_error {
public:
    RuleSyntaxError(SourcePos pos, const std::string& what);
    SourcePos pos;
};

class RuleTypeError : public std::runtime_error {
public:
    RuleTypeError(SourcePos pos, std::string subexpression, const std::string& what);
    SourcePos pos;
    std::string subexpression;
};

class RuleEvalError : public std::runtime_error {
public:
    enum class Kind { UnboundReference, DivisionByZero, TypeMismatch, Overflow };
    RuleEvalError(Kind kind, std::string name, const std::string& what);
    Kind kind;
    /// Unbound name or rule id, depending on kind.
    std::string name;
};

/// Known kinds for characteristic names, used to type `$refs` and action
/// targets. Names absent from the map are inferred from usage.
using TypeEnv = std::map<std::string, ValueKind, std::less<>>;

Rule parse_rule(std::string_view text, std::string id = {}, const TypeEnv& types = {});
ExprPtr parse_expr(std::string_view text);

/// Static type of an expression; throws RuleTypeError.
ValueKind check_expr(const Expr& e, const TypeEnv& types = {});

std::string print_expr(const Expr& e);
std::string print_rule(const Rule& r);

using Bindings = std::map<std::string, Scalar, std::less<>>;

struct Evaluation {
    Bindings produced;
    std::vector<std::string> firedRuleIds;
};

Scalar evaluate_expr(const Expr& e, const Bindings& env);

/// Rules run in list order; a firing rule's actions overwrite earlier
/// bindings. `env` is never modified; on error nothing is returned.
Evaluation evaluate_ruleset_traced(const RuleSet& set, const Bindings& env);
Bindings evaluate_ruleset(const RuleSet& set, const Bindings& env);

}  // namespace intentforge::rules
