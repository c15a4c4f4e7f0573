#include "chemo/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <vector>

namespace chemo {

struct Expression::Node {
    enum class Kind { number, var_x, var_y, neg, add, sub, mul, div, pow, cos, sin, exp } kind;
    double value = 0.0;
    std::shared_ptr<const Node> lhs, rhs;

    double eval(double x, double y) const {
        switch (kind) {
        case Kind::number: return value;
        case Kind::var_x: return x;
        case Kind::var_y: return y;
        case Kind::neg: return -lhs->eval(x, y);
        case Kind::add: return lhs->eval(x, y) + rhs->eval(x, y);
        case Kind::sub: return lhs->eval(x, y) - rhs->eval(x, y);
        case Kind::mul: return lhs->eval(x, y) * rhs->eval(x, y);
        case Kind::div: return lhs->eval(x, y) / rhs->eval(x, y);
        case Kind::pow: return std::pow(lhs->eval(x, y), rhs->eval(x, y));
        case Kind::cos: return std::cos(lhs->eval(x, y));
        case Kind::sin: return std::sin(lhs->eval(x, y));
        case Kind::exp: return std::exp(lhs->eval(x, y));
        }
        return 0.0;
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind k, NodePtr a = nullptr, NodePtr b = nullptr, double v = 0.0) {
    auto n = std::make_shared<Expression::Node>();
    n->kind = k;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    n->value = v;
    return n;
}

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodePtr parse() {
        NodePtr n = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ExpressionError("expression \"" + s_ + "\": " + msg + " at column " +
                              std::to_string(pos_ + 1));
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr() {
        NodePtr n = term();
        for (;;) {
            if (accept('+'))
                n = make(Kind::add, n, term());
            else if (accept('-'))
                n = make(Kind::sub, n, term());
            else
                return n;
        }
    }

    NodePtr term() {
        NodePtr n = unary();
        for (;;) {
            if (accept('*'))
                n = make(Kind::mul, n, unary());
            else if (accept('/'))
                n = make(Kind::div, n, unary());
            else
                return n;
        }
    }

    NodePtr unary() {
        if (accept('-')) return make(Kind::neg, unary());
        if (accept('+')) return unary();
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (accept('^')) return make(Kind::pow, base, unary());
        return base;
    }

    NodePtr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        if (accept('(')) {
            NodePtr n = expr();
            if (!accept(')')) fail("expected ')'");
            return n;
        }
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
            if (ec != std::errc()) fail("malformed number");
            pos_ = static_cast<std::size_t>(ptr - s_.data());
            return make(Kind::number, nullptr, nullptr, v);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            const std::string name = s_.substr(start, pos_ - start);
            if (name == "x") return make(Kind::var_x);
            if (name == "y") return make(Kind::var_y);
            if (name == "pi") return make(Kind::number, nullptr, nullptr, std::numbers::pi);
            if (name == "e") return make(Kind::number, nullptr, nullptr, std::numbers::e);
            Kind k;
            if (name == "cos")
                k = Kind::cos;
            else if (name == "sin")
                k = Kind::sin;
            else if (name == "exp")
                k = Kind::exp;
            else {
                pos_ = start;
                fail("unknown identifier '" + name + "'");
            }
            if (!accept('(')) fail("expected '(' after " + name);
            NodePtr arg = expr();
            if (!accept(')')) fail("expected ')'");
            return make(k, arg);
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

} // namespace

Expression Expression::parse(const std::string& text) {
    Expression e;
    e.text_ = text;
    e.root_ = Parser(text).parse();
    return e;
}

double Expression::operator()(double x, double y) const { return root_->eval(x, y); }

} // namespace chemo
