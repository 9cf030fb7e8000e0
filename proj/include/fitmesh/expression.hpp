#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <string_view>

#include "fitmesh/errors.hpp"

namespace fitmesh {

/// Arithmetic expression over the variables {x, t}.
///
/// Grammar ('^' binds tightest and is right-associative, '*' and '/' bind
/// tighter than '+' and '-', same-precedence binary operators associate left,
/// unary minus sits between '*' and '^' so that -x^2 == -(x^2)):
///
///   expr   := term  (('+' | '-') term)*
///   term   := unary (('*' | '/') unary)*
///   unary  := '-' unary | power
///   power  := atom ['^' unary]
///   atom   := number | 'x' | 't' | func '(' expr ')' | '(' expr ')'
///   func   := 'exp' | 'sin' | 'cos' | 'ln' | 'sqrt'
///
/// Instances are immutable after parsing; evaluation is pure and safe to run
/// concurrently from any number of threads.
class Expression {
public:
    Expression() = default;

    /// Evaluate at (x, t). Throws DomainError when the value is undefined.
    double operator()(double x, double t) const {
        if (!root_) throw DomainError("evaluating an empty expression");
        return eval(*root_, x, t);
    }

    /// Render back to parseable text. Re-parsing the result yields an
    /// expression with identical values everywhere.
    std::string to_string() const { return root_ ? print(*root_) : std::string(); }

    bool uses_x() const { return root_ && uses(*root_, Kind::var_x); }
    bool uses_t() const { return root_ && uses(*root_, Kind::var_t); }
    bool is_constant() const { return !uses_x() && !uses_t(); }

private:
    enum class Kind { number, var_x, var_t, add, sub, mul, div, pow, neg, call };
    enum class Func { exp, sin, cos, ln, sqrt };

    struct Node {
        Kind kind;
        double number = 0.0;
        Func func = Func::exp;
        std::shared_ptr<const Node> a;
        std::shared_ptr<const Node> b;
    };
    using NodePtr = std::shared_ptr<const Node>;

    explicit Expression(NodePtr root) : root_(std::move(root)) {}

    static double eval(const Node& n, double x, double t) {
        switch (n.kind) {
            case Kind::number: return n.number;
            case Kind::var_x: return x;
            case Kind::var_t: return t;
            case Kind::add: return eval(*n.a, x, t) + eval(*n.b, x, t);
            case Kind::sub: return eval(*n.a, x, t) - eval(*n.b, x, t);
            case Kind::mul: return eval(*n.a, x, t) * eval(*n.b, x, t);
            case Kind::div: {
                const double den = eval(*n.b, x, t);
                if (den == 0.0) throw DomainError("division by zero");
                return eval(*n.a, x, t) / den;
            }
            case Kind::pow: {
                const double r = std::pow(eval(*n.a, x, t), eval(*n.b, x, t));
                if (!std::isfinite(r)) throw DomainError("power out of domain");
                return r;
            }
            case Kind::neg: return -eval(*n.a, x, t);
            case Kind::call: {
                const double v = eval(*n.a, x, t);
                switch (n.func) {
                    case Func::exp: {
                        const double r = std::exp(v);
                        if (!std::isfinite(r)) throw DomainError("exp overflow");
                        return r;
                    }
                    case Func::sin: return std::sin(v);
                    case Func::cos: return std::cos(v);
                    case Func::ln:
                        if (v <= 0.0) throw DomainError("ln of nonpositive argument");
                        return std::log(v);
                    case Func::sqrt:
                        if (v < 0.0) throw DomainError("sqrt of negative argument");
                        return std::sqrt(v);
                }
                throw DomainError("unreachable");
            }
        }
        throw DomainError("unreachable");
    }

    // Precedence ranks used when printing: '+/-'=1, '*//'=2, neg=3, '^'=4, atoms=5.
    static int rank(const Node& n) {
        switch (n.kind) {
            case Kind::add: case Kind::sub: return 1;
            case Kind::mul: case Kind::div: return 2;
            case Kind::neg: return 3;
            case Kind::pow: return 4;
            default: return 5;
        }
    }

    static std::string wrap(const Node& n, bool parens) {
        std::string s = print(n);
        return parens ? "(" + s + ")" : s;
    }

    static std::string print(const Node& n) {
        switch (n.kind) {
            case Kind::number: {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.17g", n.number);
                return buf;
            }
            case Kind::var_x: return "x";
            case Kind::var_t: return "t";
            case Kind::add:
                return wrap(*n.a, rank(*n.a) < 1) + "+" + wrap(*n.b, rank(*n.b) <= 1);
            case Kind::sub:
                return wrap(*n.a, rank(*n.a) < 1) + "-" + wrap(*n.b, rank(*n.b) <= 1);
            case Kind::mul:
                return wrap(*n.a, rank(*n.a) < 2) + "*" + wrap(*n.b, rank(*n.b) <= 2);
            case Kind::div:
                return wrap(*n.a, rank(*n.a) < 2) + "/" + wrap(*n.b, rank(*n.b) <= 2);
            case Kind::pow:
                // Left operand parenthesized unless it is an atom, so that
                // (a^b)^c and (-a)^b survive the round trip.
                return wrap(*n.a, rank(*n.a) <= 4) + "^" + wrap(*n.b, rank(*n.b) < 3);
            case Kind::neg:
                return "-" + wrap(*n.a, rank(*n.a) < 3);
            case Kind::call: {
                static constexpr const char* names[] = {"exp", "sin", "cos", "ln", "sqrt"};
                return std::string(names[static_cast<int>(n.func)]) + "(" + print(*n.a) + ")";
            }
        }
        return {};
    }

    static bool uses(const Node& n, Kind k) {
        if (n.kind == k) return true;
        if (n.a && uses(*n.a, k)) return true;
        if (n.b && uses(*n.b, k)) return true;
        return false;
    }

    class Parser;
    friend Expression parse_expression(std::string_view text);

    NodePtr root_;
};

class Expression::Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    NodePtr parse() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("empty expression", pos_);
        NodePtr e = parse_expr();
        skip_ws();
        if (pos_ < text_.size()) throw ParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    static NodePtr make(Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
        auto n = std::make_shared<Node>();
        n->kind = k;
        n->a = std::move(a);
        n->b = std::move(b);
        return n;
    }

    static NodePtr make_number(double value) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::number;
        n->number = value;
        return n;
    }

    static NodePtr make_call(Func f, NodePtr arg) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::call;
        n->func = f;
        n->a = std::move(arg);
        return n;
    }

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    bool accept(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c, const char* what) {
        if (!accept(c)) throw ParseError(std::string("expected ") + what, pos_);
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        for (;;) {
            if (accept('+')) lhs = make(Kind::add, lhs, parse_term());
            else if (accept('-')) lhs = make(Kind::sub, lhs, parse_term());
            else return lhs;
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        for (;;) {
            if (accept('*')) lhs = make(Kind::mul, lhs, parse_unary());
            else if (accept('/')) lhs = make(Kind::div, lhs, parse_unary());
            else return lhs;
        }
    }

    NodePtr parse_unary() {
        if (accept('-')) return make(Kind::neg, parse_unary());
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_atom();
        if (accept('^')) return make(Kind::pow, base, parse_unary());
        return base;
    }

    NodePtr parse_atom() {
        const char c = peek();
        if (c == '(') {
            ++pos_;
            NodePtr e = parse_expr();
            expect(')', "')'");
            return e;
        }
        if (c == '.' || (c >= '0' && c <= '9')) return parse_number();
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') return parse_identifier();
        throw ParseError("expected a value", pos_);
    }

    NodePtr parse_number() {
        double value = 0.0;
        const char* first = text_.data() + pos_;
        const char* last = text_.data() + text_.size();
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc()) throw ParseError("malformed number", pos_);
        pos_ += static_cast<std::size_t>(ptr - first);
        return make_number(value);
    }

    NodePtr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            const bool word = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                              (c >= '0' && c <= '9') || c == '_';
            if (!word) break;
            ++pos_;
        }
        const std::string_view name = text_.substr(start, pos_ - start);
        if (name == "x") return make(Kind::var_x);
        if (name == "t") return make(Kind::var_t);

        Func f;
        if (name == "exp") f = Func::exp;
        else if (name == "sin") f = Func::sin;
        else if (name == "cos") f = Func::cos;
        else if (name == "ln") f = Func::ln;
        else if (name == "sqrt") f = Func::sqrt;
        else throw ParseError("unknown identifier '" + std::string(name) + "'", start);

        expect('(', "'(' after function name");
        NodePtr arg = parse_expr();
        expect(')', "')'");
        return make_call(f, std::move(arg));
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

/// Parse expression text. Throws ParseError (with offset) on malformed input.
inline Expression parse_expression(std::string_view text) {
    Expression::Parser p(text);
    return Expression(p.parse());
}

} // namespace fitmesh
