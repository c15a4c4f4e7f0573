/// @file expression.hpp
/// @brief Tiny evaluator for closed-form initial data such as
/// "1 + 0.5*cos(pi*x)*cos(pi*y)".
///
/// Grammar: numbers, variables x and y, constants pi and e, binary + - * / ^
/// (^ is right-associative and binds tighter than unary minus), parentheses
/// and the functions cos, sin, exp.

#pragma once

#include <memory>
#include <stdexcept>
#include <string>

namespace chemo {

struct ExpressionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Expression {
public:
    /// Throws ExpressionError with the offending column on malformed input.
    static Expression parse(const std::string& text);

    double operator()(double x, double y = 0.0) const;
    const std::string& text() const { return text_; }

    struct Node;

private:
    std::string text_;
    std::shared_ptr<const Node> root_;
};

} // namespace chemo
