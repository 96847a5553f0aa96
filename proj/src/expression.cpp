#include "metastab/expression.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace metastab {

enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Exp, Log, Sin, Cos, Sqrt, Tanh };

struct Expression::Node {
    Op op;
    double value = 0.0;  // Const
    int var = -1;        // Var
    NodePtr a, b;
};

namespace {

using Node = Expression::Node;
}  // namespace

// Internal helpers operate on NodePtr directly; light constant folding keeps
// derivative trees from blowing up.
namespace detail {

using NodePtr = std::shared_ptr<const Node>;

NodePtr make_const(double c) {
    auto n = std::make_shared<Node>();
    n->op = Op::Const;
    n->value = c;
    return n;
}

NodePtr make_var(int i) {
    auto n = std::make_shared<Node>();
    n->op = Op::Var;
    n->var = i;
    return n;
}

bool is_const(const NodePtr& n, double c) { return n->op == Op::Const && n->value == c; }

NodePtr make_bin(Op op, NodePtr a, NodePtr b) {
    if (a->op == Op::Const && b->op == Op::Const) {
        switch (op) {
            case Op::Add: return make_const(a->value + b->value);
            case Op::Sub: return make_const(a->value - b->value);
            case Op::Mul: return make_const(a->value * b->value);
            case Op::Div:
                if (b->value != 0.0) return make_const(a->value / b->value);
                break;
            case Op::Pow: return make_const(std::pow(a->value, b->value));
            default: break;
        }
    }
    switch (op) {
        case Op::Add:
            if (is_const(a, 0.0)) return b;
            if (is_const(b, 0.0)) return a;
            break;
        case Op::Sub:
            if (is_const(b, 0.0)) return a;
            break;
        case Op::Mul:
            if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
            if (is_const(a, 1.0)) return b;
            if (is_const(b, 1.0)) return a;
            break;
        case Op::Div:
            if (is_const(a, 0.0)) return make_const(0.0);
            if (is_const(b, 1.0)) return a;
            break;
        case Op::Pow:
            if (is_const(b, 1.0)) return a;
            if (is_const(b, 0.0)) return make_const(1.0);
            break;
        default: break;
    }
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

NodePtr make_un(Op op, NodePtr a) {
    if (op == Op::Neg) {
        if (a->op == Op::Const) return make_const(-a->value);
        if (a->op == Op::Neg) return a->a;
    }
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = std::move(a);
    return n;
}

double eval(const Node& n, const Eigen::VectorXd& x) {
    switch (n.op) {
        case Op::Const: return n.value;
        case Op::Var: return x[n.var];
        case Op::Add: return eval(*n.a, x) + eval(*n.b, x);
        case Op::Sub: return eval(*n.a, x) - eval(*n.b, x);
        case Op::Mul: return eval(*n.a, x) * eval(*n.b, x);
        case Op::Div: return eval(*n.a, x) / eval(*n.b, x);
        case Op::Pow: return std::pow(eval(*n.a, x), eval(*n.b, x));
        case Op::Neg: return -eval(*n.a, x);
        case Op::Exp: return std::exp(eval(*n.a, x));
        case Op::Log: return std::log(eval(*n.a, x));
        case Op::Sin: return std::sin(eval(*n.a, x));
        case Op::Cos: return std::cos(eval(*n.a, x));
        case Op::Sqrt: return std::sqrt(eval(*n.a, x));
        case Op::Tanh: return std::tanh(eval(*n.a, x));
    }
    return 0.0;
}

NodePtr diff(const NodePtr& n, int i) {
    switch (n->op) {
        case Op::Const: return make_const(0.0);
        case Op::Var: return make_const(n->var == i ? 1.0 : 0.0);
        case Op::Add: return make_bin(Op::Add, diff(n->a, i), diff(n->b, i));
        case Op::Sub: return make_bin(Op::Sub, diff(n->a, i), diff(n->b, i));
        case Op::Mul:
            return make_bin(Op::Add, make_bin(Op::Mul, diff(n->a, i), n->b),
                            make_bin(Op::Mul, n->a, diff(n->b, i)));
        case Op::Div:
            // (a/b)' = a'/b - a b'/b^2
            return make_bin(
                Op::Sub, make_bin(Op::Div, diff(n->a, i), n->b),
                make_bin(Op::Div, make_bin(Op::Mul, n->a, diff(n->b, i)),
                         make_bin(Op::Mul, n->b, n->b)));
        case Op::Pow: {
            if (n->b->op == Op::Const) {
                // (a^c)' = c a^{c-1} a'
                double c = n->b->value;
                return make_bin(
                    Op::Mul, make_const(c),
                    make_bin(Op::Mul, make_bin(Op::Pow, n->a, make_const(c - 1.0)),
                             diff(n->a, i)));
            }
            // a^b = exp(b log a)
            NodePtr rewritten =
                make_un(Op::Exp, make_bin(Op::Mul, n->b, make_un(Op::Log, n->a)));
            return diff(rewritten, i);
        }
        case Op::Neg: return make_un(Op::Neg, diff(n->a, i));
        case Op::Exp: return make_bin(Op::Mul, make_un(Op::Exp, n->a), diff(n->a, i));
        case Op::Log: return make_bin(Op::Div, diff(n->a, i), n->a);
        case Op::Sin: return make_bin(Op::Mul, make_un(Op::Cos, n->a), diff(n->a, i));
        case Op::Cos:
            return make_un(Op::Neg, make_bin(Op::Mul, make_un(Op::Sin, n->a), diff(n->a, i)));
        case Op::Sqrt:
            return make_bin(Op::Div, diff(n->a, i),
                            make_bin(Op::Mul, make_const(2.0), make_un(Op::Sqrt, n->a)));
        case Op::Tanh: {
            NodePtr t = make_un(Op::Tanh, n->a);
            NodePtr sech2 = make_bin(Op::Sub, make_const(1.0), make_bin(Op::Mul, t, t));
            return make_bin(Op::Mul, sech2, diff(n->a, i));
        }
    }
    return make_const(0.0);
}

void print(const Node& n, std::ostringstream& out) {
    auto paren = [&](const NodePtr& c) {
        out << '(';
        print(*c, out);
        out << ')';
    };
    switch (n.op) {
        case Op::Const: out << n.value; break;
        case Op::Var: out << 'x' << (n.var + 1); break;
        case Op::Add: paren(n.a); out << " + "; paren(n.b); break;
        case Op::Sub: paren(n.a); out << " - "; paren(n.b); break;
        case Op::Mul: paren(n.a); out << " * "; paren(n.b); break;
        case Op::Div: paren(n.a); out << " / "; paren(n.b); break;
        case Op::Pow: paren(n.a); out << '^'; paren(n.b); break;
        case Op::Neg: out << "-"; paren(n.a); break;
        case Op::Exp: out << "exp"; paren(n.a); break;
        case Op::Log: out << "log"; paren(n.a); break;
        case Op::Sin: out << "sin"; paren(n.a); break;
        case Op::Cos: out << "cos"; paren(n.a); break;
        case Op::Sqrt: out << "sqrt"; paren(n.a); break;
        case Op::Tanh: out << "tanh"; paren(n.a); break;
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Recursive-descent parser.

class ExpressionParser {
public:
    ExpressionParser(const std::string& text, int dim) : text_(text), dim_(dim) {}

    Expression::NodePtr parse() {
        auto n = parse_sum();
        skip_ws();
        if (pos_ != text_.size())
            throw ParseError("unexpected trailing input at position " + std::to_string(pos_) +
                             " in '" + text_ + "'");
        return n;
    }

private:
    using NodePtr = Expression::NodePtr;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool consume(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    NodePtr parse_sum() {
        NodePtr lhs = parse_term();
        for (;;) {
            if (consume('+'))
                lhs = detail::make_bin(Op::Add, lhs, parse_term());
            else if (consume('-'))
                lhs = detail::make_bin(Op::Sub, lhs, parse_term());
            else
                return lhs;
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        for (;;) {
            if (consume('*'))
                lhs = detail::make_bin(Op::Mul, lhs, parse_unary());
            else if (consume('/'))
                lhs = detail::make_bin(Op::Div, lhs, parse_unary());
            else
                return lhs;
        }
    }

    NodePtr parse_unary() {
        if (consume('-')) return detail::make_un(Op::Neg, parse_unary());
        if (consume('+')) return parse_unary();
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_atom();
        if (consume('^')) {
            // right-associative; exponent may itself be signed
            NodePtr e = parse_unary_power();
            return detail::make_bin(Op::Pow, base, e);
        }
        return base;
    }

    NodePtr parse_unary_power() {
        if (consume('-')) return detail::make_un(Op::Neg, parse_unary_power());
        NodePtr base = parse_atom();
        if (consume('^')) return detail::make_bin(Op::Pow, base, parse_unary_power());
        return base;
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of expression: '" + text_ + "'");
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr n = parse_sum();
            if (!consume(')')) throw ParseError("missing ')' in '" + text_ + "'");
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
        throw ParseError(std::string("unexpected character '") + c + "' in '" + text_ + "'");
    }

    NodePtr parse_number() {
        size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
            ++pos_;
        // scientific suffix
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            size_t save = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    ++pos_;
            } else {
                pos_ = save;
            }
        }
        return detail::make_const(std::stod(text_.substr(start, pos_ - start)));
    }

    NodePtr parse_ident() {
        size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string name = text_.substr(start, pos_ - start);
        if (name.size() >= 2 && name[0] == 'x') {
            bool digits = true;
            for (size_t i = 1; i < name.size(); ++i)
                digits = digits && std::isdigit(static_cast<unsigned char>(name[i]));
            if (digits) {
                int idx = std::stoi(name.substr(1)) - 1;
                if (idx < 0 || idx >= dim_)
                    throw ParseError("variable " + name + " out of range for dimension " +
                                     std::to_string(dim_));
                return detail::make_var(idx);
            }
        }
        Op op;
        if (name == "exp") op = Op::Exp;
        else if (name == "log") op = Op::Log;
        else if (name == "sin") op = Op::Sin;
        else if (name == "cos") op = Op::Cos;
        else if (name == "sqrt") op = Op::Sqrt;
        else if (name == "tanh") op = Op::Tanh;
        else throw ParseError("unknown identifier '" + name + "'");
        if (!consume('(')) throw ParseError("expected '(' after " + name);
        NodePtr arg = parse_sum();
        if (!consume(')')) throw ParseError("missing ')' after " + name + " argument");
        return detail::make_un(op, arg);
    }

    const std::string& text_;
    int dim_;
    size_t pos_ = 0;
};

// ---------------------------------------------------------------------------

Expression Expression::parse(const std::string& text, int dim) {
    ExpressionParser p(text, dim);
    return Expression(p.parse(), dim);
}

Expression Expression::constant(double c) { return Expression(detail::make_const(c), 0); }

Expression Expression::variable(int index, int dim) {
    if (index < 0 || index >= dim) throw ParseError("variable index out of range");
    return Expression(detail::make_var(index), dim);
}

double Expression::evaluate(const Eigen::VectorXd& x) const {
    if (!node_) throw EvalError("empty expression");
    if (x.size() < dim_) throw EvalError("point dimension does not match expression");
    double v = detail::eval(*node_, x);
    if (!std::isfinite(v))
        throw EvalError("non-finite value while evaluating '" + to_string() + "'");
    return v;
}

Expression Expression::derivative(int index) const {
    return Expression(detail::diff(node_, index), dim_);
}

Expression Expression::operator+(const Expression& o) const {
    return Expression(detail::make_bin(Op::Add, node_, o.node_), std::max(dim_, o.dim_));
}

Expression Expression::operator-(const Expression& o) const {
    return Expression(detail::make_bin(Op::Sub, node_, o.node_), std::max(dim_, o.dim_));
}

Expression Expression::operator*(const Expression& o) const {
    return Expression(detail::make_bin(Op::Mul, node_, o.node_), std::max(dim_, o.dim_));
}

std::string Expression::to_string() const {
    if (!node_) return "<empty>";
    std::ostringstream out;
    detail::print(*node_, out);
    return out.str();
}

}  // namespace metastab
