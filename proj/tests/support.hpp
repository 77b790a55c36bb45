#pragma once

// Helpers shared by the unit tests and the acceptance binary: a random
// expression generator that stays inside the evaluation domain, and
// finite-difference oracles that only use eval().

#include "jetflow/expr.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace jetflow::test {

inline double uniform(std::mt19937_64& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int pick(std::mt19937_64& rng, int lo, int hi)
{
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// Random tree of depth <= `depth` over `names`. Divisions, square roots and
/// exponentials are guarded so that the tree is finite wherever the names
/// are bounded.
inline expr::Expr random_expr(std::mt19937_64& rng, int depth, const std::vector<std::string>& names,
                              const std::vector<std::string>& parameters = {})
{
    using expr::BinaryOp;
    using expr::Expr;
    using expr::UnaryOp;

    if (depth <= 1 || pick(rng, 0, 5) == 0) {
        const int kind = pick(rng, 0, parameters.empty() ? 2 : 3);
        if (kind == 0) return Expr::constant(std::round(uniform(rng, -4, 4) * 4) / 4);
        if (kind == 3) return Expr::parameter(parameters[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(parameters.size()) - 1))]);
        return Expr::variable(names[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(names.size()) - 1))]);
    }
    auto sub = [&] { return random_expr(rng, depth - 1, names, parameters); };
    switch (pick(rng, 0, 10)) {
    case 0: return Expr::binary(BinaryOp::add, sub(), sub());
    case 1: return Expr::binary(BinaryOp::sub, sub(), sub());
    case 2:
    case 3: return Expr::binary(BinaryOp::mul, sub(), sub());
    case 4: {
        // a / (c + b^2), c >= 1
        auto den = Expr::binary(BinaryOp::add, Expr::constant(1 + pick(rng, 0, 2)),
                                Expr::binary(BinaryOp::pow, sub(), Expr::constant(2)));
        return Expr::binary(BinaryOp::div, sub(), den);
    }
    case 5: return Expr::binary(BinaryOp::pow, sub(), Expr::constant(pick(rng, 0, 3)));
    case 6: return Expr::unary(UnaryOp::neg, sub());
    case 7: return Expr::unary(UnaryOp::sin, sub());
    case 8: return Expr::unary(UnaryOp::cos, sub());
    case 9: return Expr::unary(UnaryOp::exp, Expr::unary(UnaryOp::sin, sub()));
    default: {
        auto arg = Expr::binary(BinaryOp::add, Expr::constant(1), Expr::binary(BinaryOp::pow, sub(), Expr::constant(2)));
        return Expr::unary(UnaryOp::sqrt, arg);
    }
    }
}

inline expr::Bindings random_bindings(std::mt19937_64& rng, const std::vector<std::string>& names, double box = 1.0)
{
    expr::Bindings b;
    for (const auto& n : names) b[n] = uniform(rng, -box, box);
    return b;
}

/// Central difference of eval(e) in `var` with step max(1, |x|) 2^-17.
inline double central_difference(const expr::Expr& e, expr::Bindings b, const std::string& var)
{
    const double x = b.at(var);
    const double h = std::max(1.0, std::abs(x)) * std::ldexp(1.0, -17);
    b[var] = x + h;
    const double fp = expr::eval(e, b);
    b[var] = x - h;
    const double fm = expr::eval(e, b);
    return (fp - fm) / (2 * h);
}

inline double relative_error(double value, double reference)
{
    return std::abs(value - reference) / std::max(1.0, std::abs(reference));
}

}  // namespace jetflow::test
