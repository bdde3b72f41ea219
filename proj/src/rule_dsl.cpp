// SPDX-License-Identifier: Apache-2.0
#include "intentforge/rule_dsl.hpp"

#include <cctype>
#include <sstream>

namespace intentforge::rules {

namespace {

std::string at(SourcePos p) { return std::to_string(p.line) + ":" + std::to_string(p.column); }

}  // namespace

RuleSyntaxError::RuleSyntaxError(SourcePos p, const std::string& what)
    : std::runtime_error("syntax error at " + at(p) + ": " + what), pos(p) {}

RuleTypeError::RuleTypeError(SourcePos p, std::string sub, const std::string& what)
    : std::runtime_error("type error at " + at(p) + " in `" + sub + "`: " + what), pos(p), subexpression(std::move(sub)) {}

RuleEvalError::RuleEvalError(Kind k, std::string n, const std::string& what)
    : std::runtime_error(what), kind(k), name(std::move(n)) {}

ExprPtr make_literal(Scalar v, SourcePos pos) { return std::make_shared<Expr>(Expr{Literal{std::move(v)}, pos}); }
ExprPtr make_ref(std::string name, SourcePos pos) { return std::make_shared<Expr>(Expr{Ref{std::move(name)}, pos}); }
ExprPtr make_unary(UnaryOp op, ExprPtr operand, SourcePos pos) {
    return std::make_shared<Expr>(Expr{Unary{op, std::move(operand)}, pos});
}
ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs, SourcePos pos) {
    return std::make_shared<Expr>(Expr{Binary{op, std::move(lhs), std::move(rhs)}, pos});
}

bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.node.index() != b.node.index()) return false;
    if (auto* l = std::get_if<Literal>(&a.node)) return l->value == std::get<Literal>(b.node).value;
    if (auto* r = std::get_if<Ref>(&a.node)) return r->name == std::get<Ref>(b.node).name;
    if (auto* u = std::get_if<Unary>(&a.node)) {
        const auto& v = std::get<Unary>(b.node);
        return u->op == v.op && structurally_equal(*u->operand, *v.operand);
    }
    const auto& x = std::get<Binary>(a.node);
    const auto& y = std::get<Binary>(b.node);
    return x.op == y.op && structurally_equal(*x.lhs, *y.lhs) && structurally_equal(*x.rhs, *y.rhs);
}

bool structurally_equal(const Rule& a, const Rule& b) {
    if (!structurally_equal(*a.condition, *b.condition) || a.actions.size() != b.actions.size()) return false;
    for (std::size_t i = 0; i < a.actions.size(); ++i) {
        if (a.actions[i].target != b.actions[i].target) return false;
        if (!structurally_equal(*a.actions[i].value, *b.actions[i].value)) return false;
    }
    return true;
}

// ---------------------------------------------------------------- lexer

namespace {

enum class Tok {
    Number, String, Ident, Ref, When, Then, And, Or, Not, True, False,
    LParen, RParen, Comma, Assign, Plus, Minus, Star, Slash, Eq, Ne, Lt, Le, Gt, Ge, End
};

struct Token {
    Tok kind;
    std::string text;
    SourcePos pos;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    SourcePos pos;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k, ++i) {
            if (src[i] == '\n') {
                ++pos.line;
                pos.column = 1;
            } else {
                ++pos.column;
            }
        }
    };
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        SourcePos start = pos;
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '.')) ++j;
            out.push_back({Tok::Number, std::string(src.substr(i, j - i)), start});
            advance(j - i);
            continue;
        }
        if (c == '"') {
            std::string value;
            std::size_t j = i + 1;
            bool closed = false;
            while (j < src.size()) {
                if (src[j] == '\\' && j + 1 < src.size() && (src[j + 1] == '"' || src[j + 1] == '\\')) {
                    value.push_back(src[j + 1]);
                    j += 2;
                } else if (src[j] == '"') {
                    closed = true;
                    ++j;
                    break;
                } else if (src[j] == '\n') {
                    break;
                } else {
                    value.push_back(src[j++]);
                }
            }
            if (!closed) throw RuleSyntaxError(start, "unterminated string literal");
            out.push_back({Tok::String, std::move(value), start});
            advance(j - i);
            continue;
        }
        if (c == '$') {
            std::size_t j = i + 1;
            if (j >= src.size() || !ident_start(src[j])) throw RuleSyntaxError(start, "expected a name after '$'");
            while (j < src.size() && ident_char(src[j])) ++j;
            out.push_back({Tok::Ref, std::string(src.substr(i + 1, j - i - 1)), start});
            advance(j - i);
            continue;
        }
        if (ident_start(c)) {
            std::size_t j = i;
            while (j < src.size() && ident_char(src[j])) ++j;
            std::string word(src.substr(i, j - i));
            Tok kind = Tok::Ident;
            if (word == "when") kind = Tok::When;
            else if (word == "then") kind = Tok::Then;
            else if (word == "and") kind = Tok::And;
            else if (word == "or") kind = Tok::Or;
            else if (word == "not") kind = Tok::Not;
            else if (word == "true") kind = Tok::True;
            else if (word == "false") kind = Tok::False;
            out.push_back({kind, std::move(word), start});
            advance(j - i);
            continue;
        }
        auto two = i + 1 < src.size() ? src.substr(i, 2) : std::string_view{};
        Tok kind;
        std::size_t len = 2;
        if (two == ":=") kind = Tok::Assign;
        else if (two == "==") kind = Tok::Eq;
        else if (two == "!=") kind = Tok::Ne;
        else if (two == "<=") kind = Tok::Le;
        else if (two == ">=") kind = Tok::Ge;
        else {
            len = 1;
            switch (c) {
                case '(': kind = Tok::LParen; break;
                case ')': kind = Tok::RParen; break;
                case ',': kind = Tok::Comma; break;
                case '+': kind = Tok::Plus; break;
                case '-': kind = Tok::Minus; break;
                case '*': kind = Tok::Star; break;
                case '/': kind = Tok::Slash; break;
                case '<': kind = Tok::Lt; break;
                case '>': kind = Tok::Gt; break;
                default: throw RuleSyntaxError(start, std::string("unexpected character '") + c + "'");
            }
        }
        out.push_back({kind, std::string(src.substr(i, len)), start});
        advance(len);
    }
    out.push_back({Tok::End, "", pos});
    return out;
}

// ---------------------------------------------------------------- parser

class Parser {
public:
    explicit Parser(std::string_view src) : toks_(lex(src)) {}

    Rule rule() {
        expect(Tok::When, "'when'");
        Rule r;
        r.condition = expr();
        expect(Tok::Then, "'then'");
        do {
            const Token& name = peek();
            if (name.kind != Tok::Ident) throw RuleSyntaxError(name.pos, "expected a characteristic name, found " + describe(name));
            ++p_;
            expect(Tok::Assign, "':='");
            r.actions.push_back({name.text, expr()});
        } while (accept(Tok::Comma));
        expect_end();
        return r;
    }

    ExprPtr whole_expr() {
        auto e = expr();
        expect_end();
        return e;
    }

private:
    const Token& peek() const { return toks_[p_]; }
    bool accept(Tok k) {
        if (peek().kind != k) return false;
        ++p_;
        return true;
    }
    static std::string describe(const Token& t) { return t.kind == Tok::End ? "end of input" : "'" + t.text + "'"; }
    void expect(Tok k, const char* what) {
        if (!accept(k)) throw RuleSyntaxError(peek().pos, std::string("expected ") + what + ", found " + describe(peek()));
    }
    void expect_end() {
        if (peek().kind != Tok::End) throw RuleSyntaxError(peek().pos, "unexpected " + describe(peek()));
    }

    ExprPtr expr() { return or_expr(); }

    ExprPtr or_expr() {
        auto lhs = and_expr();
        while (peek().kind == Tok::Or) {
            auto pos = toks_[p_++].pos;
            lhs = make_binary(BinaryOp::Or, lhs, and_expr(), pos);
        }
        return lhs;
    }

    ExprPtr and_expr() {
        auto lhs = not_expr();
        while (peek().kind == Tok::And) {
            auto pos = toks_[p_++].pos;
            lhs = make_binary(BinaryOp::And, lhs, not_expr(), pos);
        }
        return lhs;
    }

    ExprPtr not_expr() {
        if (peek().kind == Tok::Not) {
            auto pos = toks_[p_++].pos;
            return make_unary(UnaryOp::Not, not_expr(), pos);
        }
        return cmp_expr();
    }

    static std::optional<BinaryOp> cmp_op(Tok k) {
        switch (k) {
            case Tok::Eq: return BinaryOp::Eq;
            case Tok::Ne: return BinaryOp::Ne;
            case Tok::Lt: return BinaryOp::Lt;
            case Tok::Le: return BinaryOp::Le;
            case Tok::Gt: return BinaryOp::Gt;
            case Tok::Ge: return BinaryOp::Ge;
            default: return std::nullopt;
        }
    }

    ExprPtr cmp_expr() {
        auto lhs = sum_expr();
        if (auto op = cmp_op(peek().kind)) {
            auto pos = toks_[p_++].pos;
            lhs = make_binary(*op, lhs, sum_expr(), pos);
            if (cmp_op(peek().kind)) throw RuleSyntaxError(peek().pos, "comparisons cannot be chained; add parentheses");
        }
        return lhs;
    }

    ExprPtr sum_expr() {
        auto lhs = product_expr();
        while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
            auto op = peek().kind == Tok::Plus ? BinaryOp::Add : BinaryOp::Sub;
            auto pos = toks_[p_++].pos;
            lhs = make_binary(op, lhs, product_expr(), pos);
        }
        return lhs;
    }

    ExprPtr product_expr() {
        auto lhs = unary_expr();
        while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
            auto op = peek().kind == Tok::Star ? BinaryOp::Mul : BinaryOp::Div;
            auto pos = toks_[p_++].pos;
            lhs = make_binary(op, lhs, unary_expr(), pos);
        }
        return lhs;
    }

    ExprPtr unary_expr() {
        if (peek().kind == Tok::Minus) {
            auto pos = toks_[p_++].pos;
            // A minus directly in front of a number literal is part of the literal.
            if (peek().kind == Tok::Number) return make_literal(-number(toks_[p_++]), pos);
            return make_unary(UnaryOp::Negate, unary_expr(), pos);
        }
        return primary();
    }

    static Decimal number(const Token& t) {
        auto d = Decimal::parse(t.text);
        if (!d) throw RuleSyntaxError(t.pos, "invalid number '" + t.text + "' (at most 4 decimal places)");
        return *d;
    }

    ExprPtr primary() {
        const Token& t = toks_[p_];
        switch (t.kind) {
            case Tok::Number: ++p_; return make_literal(number(t), t.pos);
            case Tok::String: ++p_; return make_literal(Scalar(t.text), t.pos);
            case Tok::True: ++p_; return make_literal(Scalar(true), t.pos);
            case Tok::False: ++p_; return make_literal(Scalar(false), t.pos);
            case Tok::Ref: ++p_; return make_ref(t.text, t.pos);
            case Tok::LParen: {
                ++p_;
                auto inner = expr();
                expect(Tok::RParen, "')'");
                return inner;
            }
            default: throw RuleSyntaxError(t.pos, "expected an expression, found " + describe(t));
        }
    }

    std::vector<Token> toks_;
    std::size_t p_ = 0;
};

// ---------------------------------------------------------------- typing

/// Unification over characteristic names: each `$name` starts as a type
/// variable and is pinned by its first use.
class Typer {
public:
    explicit Typer(const TypeEnv& env) : env_(env) {}

    struct Term {
        std::optional<ValueKind> kind;
        std::string var;  // set when kind is not yet known
    };

    Term infer(const Expr& e) {
        if (auto* l = std::get_if<Literal>(&e.node)) return {l->value.kind(), {}};
        if (auto* r = std::get_if<Ref>(&e.node)) return var_term(r->name);
        if (auto* u = std::get_if<Unary>(&e.node)) {
            if (u->op == UnaryOp::Not) {
                require(*u->operand, ValueKind::Boolean, "'not' needs a boolean operand");
                return {ValueKind::Boolean, {}};
            }
            require(*u->operand, ValueKind::Number, "'-' needs a number operand");
            return {ValueKind::Number, {}};
        }
        const auto& b = std::get<Binary>(e.node);
        switch (b.op) {
            case BinaryOp::Add:
            case BinaryOp::Sub:
            case BinaryOp::Mul:
            case BinaryOp::Div:
                require(*b.lhs, ValueKind::Number, "arithmetic needs number operands");
                require(*b.rhs, ValueKind::Number, "arithmetic needs number operands");
                return {ValueKind::Number, {}};
            case BinaryOp::Lt:
            case BinaryOp::Le:
            case BinaryOp::Gt:
            case BinaryOp::Ge:
                require(*b.lhs, ValueKind::Number, "ordering needs number operands");
                require(*b.rhs, ValueKind::Number, "ordering needs number operands");
                return {ValueKind::Boolean, {}};
            case BinaryOp::Eq:
            case BinaryOp::Ne: {
                auto l = infer(*b.lhs);
                auto r = infer(*b.rhs);
                unify(l, r, *b.rhs, "equality needs operands of the same type");
                return {ValueKind::Boolean, {}};
            }
            case BinaryOp::And:
            case BinaryOp::Or:
                require(*b.lhs, ValueKind::Boolean, "'and'/'or' need boolean operands");
                require(*b.rhs, ValueKind::Boolean, "'and'/'or' need boolean operands");
                return {ValueKind::Boolean, {}};
        }
        return {};
    }

    void require(const Expr& e, ValueKind k, const char* why) { unify(infer(e), Term{k, {}}, e, why); }

    void bind_target(const std::string& target, const Expr& value) {
        unify(var_term(target), infer(value), value, "value does not match the type of '" + target + "'");
    }

    std::optional<ValueKind> resolved(const Term& t) {
        if (t.kind) return t.kind;
        return kinds_[find(t.var)];
    }

private:
    Term var_term(const std::string& name) {
        if (auto it = env_.find(name); it != env_.end()) return {it->second, {}};
        if (!parent_.count(name)) parent_[name] = name;
        std::string root = find(name);
        if (auto k = kinds_[root]) return {k, {}};
        return {std::nullopt, root};
    }

    std::string find(const std::string& v) {
        std::string r = v;
        while (parent_[r] != r) r = parent_[r];
        parent_[v] = r;
        return r;
    }

    void unify(const Term& a, const Term& b, const Expr& at_expr, const std::string& why) {
        auto ka = resolved(a);
        auto kb = resolved(b);
        if (ka && kb) {
            if (*ka != *kb) fail(at_expr, why, *ka, *kb);
            return;
        }
        if (ka) {
            kinds_[find(b.var)] = ka;
        } else if (kb) {
            kinds_[find(a.var)] = kb;
        } else {
            auto ra = find(a.var);
            auto rb = find(b.var);
            if (ra != rb) parent_[rb] = ra;
        }
    }

    [[noreturn]] void fail(const Expr& e, const std::string& why, ValueKind expected, ValueKind got) {
        throw RuleTypeError(e.pos, print_expr(e),
                            why + " (" + std::string(to_string(got)) + " vs " + std::string(to_string(expected)) + ")");
    }

    const TypeEnv& env_;
    std::map<std::string, std::string> parent_;
    std::map<std::string, std::optional<ValueKind>> kinds_;
};

void type_check(const Rule& r, const TypeEnv& env) {
    Typer t(env);
    t.require(*r.condition, ValueKind::Boolean, "the condition must be boolean");
    for (const auto& a : r.actions) t.bind_target(a.target, *a.value);
}

// ---------------------------------------------------------------- printer

int precedence(const Expr& e) {
    if (auto* u = std::get_if<Unary>(&e.node)) return u->op == UnaryOp::Not ? 3 : 7;
    if (auto* b = std::get_if<Binary>(&e.node)) {
        switch (b->op) {
            case BinaryOp::Or: return 1;
            case BinaryOp::And: return 2;
            case BinaryOp::Eq:
            case BinaryOp::Ne:
            case BinaryOp::Lt:
            case BinaryOp::Le:
            case BinaryOp::Gt:
            case BinaryOp::Ge: return 4;
            case BinaryOp::Add:
            case BinaryOp::Sub: return 5;
            case BinaryOp::Mul:
            case BinaryOp::Div: return 6;
        }
    }
    if (auto* l = std::get_if<Literal>(&e.node); l && l->value.is_number() && l->value.as_number() < Decimal{}) {
        return 7;  // prints with a leading minus
    }
    return 8;
}

const char* op_text(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return "+";
        case BinaryOp::Sub: return "-";
        case BinaryOp::Mul: return "*";
        case BinaryOp::Div: return "/";
        case BinaryOp::Eq: return "==";
        case BinaryOp::Ne: return "!=";
        case BinaryOp::Lt: return "<";
        case BinaryOp::Le: return "<=";
        case BinaryOp::Gt: return ">";
        case BinaryOp::Ge: return ">=";
        case BinaryOp::And: return "and";
        case BinaryOp::Or: return "or";
    }
    return "?";
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void print(const Expr& e, std::string& out);

void print_child(const Expr& e, bool parens, std::string& out) {
    if (parens) out.push_back('(');
    print(e, out);
    if (parens) out.push_back(')');
}

void print(const Expr& e, std::string& out) {
    if (auto* l = std::get_if<Literal>(&e.node)) {
        out += l->value.is_string() ? quote(l->value.as_string()) : l->value.to_display();
        return;
    }
    if (auto* r = std::get_if<Ref>(&e.node)) {
        out += "$" + r->name;
        return;
    }
    if (auto* u = std::get_if<Unary>(&e.node)) {
        if (u->op == UnaryOp::Not) {
            out += "not ";
            print_child(*u->operand, precedence(*u->operand) < 3, out);
            return;
        }
        out += "-";
        // "-5" would read back as a negative literal, so bare number operands need parentheses.
        bool number_literal = std::holds_alternative<Literal>(u->operand->node) &&
                              std::get<Literal>(u->operand->node).value.is_number() &&
                              precedence(*u->operand) == 8;
        print_child(*u->operand, number_literal || precedence(*u->operand) < 7, out);
        return;
    }
    const auto& b = std::get<Binary>(e.node);
    int p = precedence(e);
    bool comparison = p == 4;
    print_child(*b.lhs, comparison ? precedence(*b.lhs) <= p : precedence(*b.lhs) < p, out);
    out += " ";
    out += op_text(b.op);
    out += " ";
    print_child(*b.rhs, precedence(*b.rhs) <= p, out);
}

// ---------------------------------------------------------------- evaluator

Scalar eval(const Expr& e, const Bindings& base, const Bindings& produced) {
    if (auto* l = std::get_if<Literal>(&e.node)) return l->value;
    if (auto* r = std::get_if<Ref>(&e.node)) {
        if (auto it = produced.find(r->name); it != produced.end()) return it->second;
        if (auto it = base.find(r->name); it != base.end()) return it->second;
        throw RuleEvalError(RuleEvalError::Kind::UnboundReference, r->name, "unbound reference $" + r->name);
    }
    auto mismatch = [&](const char* what) -> RuleEvalError {
        return RuleEvalError(RuleEvalError::Kind::TypeMismatch, print_expr(e), std::string(what) + " in `" + print_expr(e) + "`");
    };
    if (auto* u = std::get_if<Unary>(&e.node)) {
        Scalar v = eval(*u->operand, base, produced);
        if (u->op == UnaryOp::Not) {
            if (!v.is_bool()) throw mismatch("'not' applied to a non-boolean");
            return Scalar(!v.as_bool());
        }
        if (!v.is_number()) throw mismatch("'-' applied to a non-number");
        return Scalar(-v.as_number());
    }
    const auto& b = std::get<Binary>(e.node);
    if (b.op == BinaryOp::And || b.op == BinaryOp::Or) {
        Scalar l = eval(*b.lhs, base, produced);
        if (!l.is_bool()) throw mismatch("boolean operator on a non-boolean");
        if (b.op == BinaryOp::And && !l.as_bool()) return Scalar(false);
        if (b.op == BinaryOp::Or && l.as_bool()) return Scalar(true);
        Scalar r = eval(*b.rhs, base, produced);
        if (!r.is_bool()) throw mismatch("boolean operator on a non-boolean");
        return r;
    }
    Scalar l = eval(*b.lhs, base, produced);
    Scalar r = eval(*b.rhs, base, produced);
    if (b.op == BinaryOp::Eq || b.op == BinaryOp::Ne) {
        if (l.kind() != r.kind()) throw mismatch("equality between different types");
        return Scalar((l == r) == (b.op == BinaryOp::Eq));
    }
    if (!l.is_number() || !r.is_number()) throw mismatch("numeric operator on a non-number");
    Decimal x = l.as_number();
    Decimal y = r.as_number();
    try {
        switch (b.op) {
            case BinaryOp::Add: return Scalar(x + y);
            case BinaryOp::Sub: return Scalar(x - y);
            case BinaryOp::Mul: return Scalar(x * y);
            case BinaryOp::Div: return Scalar(x / y);
            case BinaryOp::Lt: return Scalar(x < y);
            case BinaryOp::Le: return Scalar(x <= y);
            case BinaryOp::Gt: return Scalar(x > y);
            case BinaryOp::Ge: return Scalar(x >= y);
            default: break;
        }
    } catch (const std::domain_error&) {
        throw RuleEvalError(RuleEvalError::Kind::DivisionByZero, print_expr(e), "division by zero in `" + print_expr(e) + "`");
    } catch (const std::overflow_error&) {
        throw RuleEvalError(RuleEvalError::Kind::Overflow, print_expr(e), "numeric overflow in `" + print_expr(e) + "`");
    }
    throw mismatch("unknown operator");
}

}  // namespace

Rule parse_rule(std::string_view text, std::string id, const TypeEnv& types) {
    Rule r = Parser(text).rule();
    r.id = std::move(id);
    type_check(r, types);
    return r;
}

ExprPtr parse_expr(std::string_view text) { return Parser(text).whole_expr(); }

ValueKind check_expr(const Expr& e, const TypeEnv& types) {
    Typer t(types);
    auto term = t.infer(e);
    // An unconstrained bare reference has no fixed type; report it as string.
    return t.resolved(term).value_or(ValueKind::String);
}

std::string print_expr(const Expr& e) {
    std::string out;
    print(e, out);
    return out;
}

std::string print_rule(const Rule& r) {
    std::string out = "when " + print_expr(*r.condition) + " then ";
    for (std::size_t i = 0; i < r.actions.size(); ++i) {
        if (i) out += ", ";
        out += r.actions[i].target + " := " + print_expr(*r.actions[i].value);
    }
    return out;
}

Scalar evaluate_expr(const Expr& e, const Bindings& env) { return eval(e, env, Bindings{}); }

Evaluation evaluate_ruleset_traced(const RuleSet& set, const Bindings& env) {
    Evaluation result;
    for (const auto& rule : set.rules) {
        Scalar cond = eval(*rule.condition, env, result.produced);
        if (!cond.is_bool()) {
            throw RuleEvalError(RuleEvalError::Kind::TypeMismatch, rule.id, "condition of rule " + rule.id + " is not boolean");
        }
        if (!cond.as_bool()) continue;
        result.firedRuleIds.push_back(rule.id);
        for (const auto& a : rule.actions) {
            Scalar v = eval(*a.value, env, result.produced);
            result.produced.insert_or_assign(a.target, std::move(v));
        }
    }
    return result;
}

Bindings evaluate_ruleset(const RuleSet& set, const Bindings& env) { return evaluate_ruleset_traced(set, env).produced; }

}  // namespace intentforge::rules
