#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace metastab {

/// Error raised when an evaluation produces a non-finite value (log of a
/// nonpositive argument, division by zero, ...).
struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Smooth scalar expression in the variables x1..xd.
///
/// Supported grammar: real literals, +, -, *, /, ^ and the unary functions
/// exp, log, sin, cos, sqrt, tanh. All primitives are C^infinity on their
/// domain; non-smooth functions (abs, min, ...) are intentionally absent.
class Expression {
public:
    Expression() = default;

    /// Parses infix text, e.g. "x1^4/4 - x1^2/2 + x1/10".
    static Expression parse(const std::string& text, int dim);

    static Expression constant(double c);
    static Expression variable(int index, int dim);  // 0-based index

    int dimension() const { return dim_; }
    bool valid() const { return node_ != nullptr; }

    double evaluate(const Eigen::VectorXd& x) const;

    /// Exact symbolic partial derivative with respect to x_{index} (0-based).
    Expression derivative(int index) const;

    Expression operator+(const Expression& o) const;
    Expression operator-(const Expression& o) const;
    Expression operator*(const Expression& o) const;

    std::string to_string() const;

    struct Node;  // opaque expression node
    using NodePtr = std::shared_ptr<const Node>;

private:
    explicit Expression(NodePtr node, int dim) : node_(std::move(node)), dim_(dim) {}

    NodePtr node_;
    int dim_ = 0;

    friend class ExpressionParser;
};

}  // namespace metastab
