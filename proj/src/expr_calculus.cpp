#include "jetflow/expr.hpp"

#include <cmath>
#include <optional>

namespace jetflow::expr {

namespace {

bool is_integer(double v) { return std::isfinite(v) && std::floor(v) == v; }

/// Folded value of op(x), or nullopt when it is undefined or non-finite.
std::optional<double> fold_unary(UnaryOp op, double x)
{
    double r = 0.0;
    switch (op) {
    case UnaryOp::neg: r = -x; break;
    case UnaryOp::sin: r = std::sin(x); break;
    case UnaryOp::cos: r = std::cos(x); break;
    case UnaryOp::exp: r = std::exp(x); break;
    case UnaryOp::sqrt:
        if (x < 0.0) return std::nullopt;
        r = std::sqrt(x);
        break;
    }
    if (!std::isfinite(r)) return std::nullopt;
    return r;
}

std::optional<double> fold_binary(BinaryOp op, double x, double y)
{
    double r = 0.0;
    switch (op) {
    case BinaryOp::add: r = x + y; break;
    case BinaryOp::sub: r = x - y; break;
    case BinaryOp::mul: r = x * y; break;
    case BinaryOp::div:
        if (y == 0.0) return std::nullopt;
        r = x / y;
        break;
    case BinaryOp::pow:
        if (x < 0.0 && !is_integer(y)) return std::nullopt;
        if (x == 0.0 && y < 0.0) return std::nullopt;
        r = std::pow(x, y);
        break;
    }
    if (!std::isfinite(r)) return std::nullopt;
    return r;
}

Expr make_unary(UnaryOp op, Expr a)
{
    if (a.is_constant()) {
        if (auto v = fold_unary(op, a.value())) return Expr::constant(*v);
    }
    if (op == UnaryOp::neg && a.kind() == NodeKind::unary && a.unary_op() == UnaryOp::neg) return a.operand();
    return Expr::unary(op, std::move(a));
}

Expr make_binary(BinaryOp op, Expr a, Expr b)
{
    if (a.is_constant() && b.is_constant()) {
        if (auto v = fold_binary(op, a.value(), b.value())) return Expr::constant(*v);
    }
    switch (op) {
    case BinaryOp::add:
        if (b.is_constant(0.0)) return a;
        if (a.is_constant(0.0)) return b;
        break;
    case BinaryOp::sub:
        if (b.is_constant(0.0)) return a;
        if (a.is_constant(0.0)) return make_unary(UnaryOp::neg, std::move(b));
        break;
    case BinaryOp::mul:
        if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
        if (b.is_constant(1.0)) return a;
        if (a.is_constant(1.0)) return b;
        // a*(b*c) -> (a*b)*c
        if (b.kind() == NodeKind::binary && b.binary_op() == BinaryOp::mul)
            return make_binary(BinaryOp::mul, make_binary(BinaryOp::mul, std::move(a), b.lhs()), b.rhs());
        break;
    case BinaryOp::div:
        if (b.is_constant(1.0)) return a;
        break;
    case BinaryOp::pow:
        if (b.is_constant(1.0)) return a;
        if (b.is_constant(0.0)) return Expr::constant(1.0);
        break;
    }
    return Expr::binary(op, std::move(a), std::move(b));
}

Expr d(const Expr& e, std::string_view var)
{
    using B = BinaryOp;
    switch (e.kind()) {
    case NodeKind::constant:
    case NodeKind::parameter:
        return Expr::constant(0.0);
    case NodeKind::variable:
        return Expr::constant(e.name() == var ? 1.0 : 0.0);
    case NodeKind::unary: {
        const Expr& u = e.operand();
        Expr du = d(u, var);
        if (du.is_constant(0.0)) return du;
        switch (e.unary_op()) {
        case UnaryOp::neg:
            return make_unary(UnaryOp::neg, du);
        case UnaryOp::sin:
            return make_binary(B::mul, du, Expr::unary(UnaryOp::cos, u));
        case UnaryOp::cos:
            return make_unary(UnaryOp::neg, make_binary(B::mul, du, Expr::unary(UnaryOp::sin, u)));
        case UnaryOp::exp:
            return make_binary(B::mul, du, e);
        case UnaryOp::sqrt:
            return make_binary(B::div, du, make_binary(B::mul, Expr::constant(2.0), e));
        }
        break;
    }
    case NodeKind::binary: {
        const Expr& a = e.lhs();
        const Expr& b = e.rhs();
        switch (e.binary_op()) {
        case B::add:
            return make_binary(B::add, d(a, var), d(b, var));
        case B::sub:
            return make_binary(B::sub, d(a, var), d(b, var));
        case B::mul:
            return make_binary(B::add, make_binary(B::mul, d(a, var), b), make_binary(B::mul, a, d(b, var)));
        case B::div: {
            Expr da = d(a, var);
            Expr db = d(b, var);
            if (db.is_constant(0.0)) return make_binary(B::div, da, b);
            Expr num = make_binary(B::sub, make_binary(B::mul, da, b), make_binary(B::mul, a, db));
            return make_binary(B::div, num, make_binary(B::pow, b, Expr::constant(2.0)));
        }
        case B::pow: {
            // exponent is a constant by construction
            Expr da = d(a, var);
            if (da.is_constant(0.0)) return da;
            const double c = b.value();
            Expr factor = make_binary(B::mul, Expr::constant(c), make_binary(B::pow, a, Expr::constant(c - 1.0)));
            return make_binary(B::mul, factor, da);
        }
        }
        break;
    }
    }
    return Expr::constant(0.0);
}

}  // namespace

Expr simplify(const Expr& e)
{
    switch (e.kind()) {
    case NodeKind::constant:
    case NodeKind::variable:
    case NodeKind::parameter:
        return e;
    case NodeKind::unary:
        return make_unary(e.unary_op(), simplify(e.operand()));
    case NodeKind::binary:
        return make_binary(e.binary_op(), simplify(e.lhs()), simplify(e.rhs()));
    }
    return e;
}

Expr diff(const Expr& e, std::string_view var) { return simplify(d(e, var)); }

Expr bind(const Expr& e, const Bindings& values)
{
    switch (e.kind()) {
    case NodeKind::constant:
        return e;
    case NodeKind::variable:
    case NodeKind::parameter: {
        const auto it = values.find(e.name());
        return it == values.end() ? e : Expr::constant(it->second);
    }
    case NodeKind::unary:
        return make_unary(e.unary_op(), bind(e.operand(), values));
    case NodeKind::binary:
        return make_binary(e.binary_op(), bind(e.lhs(), values), bind(e.rhs(), values));
    }
    return e;
}

}  // namespace jetflow::expr
