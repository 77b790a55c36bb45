#include "jetflow/expr.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace jetflow::expr {

namespace {

[[noreturn]] void domain_fail(const char* what) { throw DomainError(what); }

double checked(double r, const char* op)
{
    if (!std::isfinite(r)) throw DomainError(std::string("non-finite result in ") + op);
    return r;
}

double apply_unary(UnaryOp op, double x)
{
    switch (op) {
    case UnaryOp::neg: return -x;
    case UnaryOp::sin: return checked(std::sin(x), "sin");
    case UnaryOp::cos: return checked(std::cos(x), "cos");
    case UnaryOp::exp: return checked(std::exp(x), "exp");
    case UnaryOp::sqrt:
        if (x < 0.0) domain_fail("sqrt of a negative number");
        return std::sqrt(x);
    }
    return x;
}

double apply_binary(BinaryOp op, double x, double y)
{
    switch (op) {
    case BinaryOp::add: return checked(x + y, "addition");
    case BinaryOp::sub: return checked(x - y, "subtraction");
    case BinaryOp::mul: return checked(x * y, "multiplication");
    case BinaryOp::div:
        if (y == 0.0) domain_fail("division by zero");
        return checked(x / y, "division");
    case BinaryOp::pow:
        if (x < 0.0 && std::floor(y) != y) domain_fail("negative base raised to a non-integer power");
        if (x == 0.0 && y < 0.0) domain_fail("zero raised to a negative power");
        return checked(std::pow(x, y), "power");
    }
    return 0.0;
}

}  // namespace

double eval(const Expr& e, const Bindings& bindings)
{
    switch (e.kind()) {
    case NodeKind::constant:
        return e.value();
    case NodeKind::variable:
    case NodeKind::parameter: {
        const auto it = bindings.find(e.name());
        if (it == bindings.end()) throw UnboundNameError(e.name());
        return it->second;
    }
    case NodeKind::unary:
        return apply_unary(e.unary_op(), eval(e.operand(), bindings));
    case NodeKind::binary: {
        // left before right: fixed association order
        const double x = eval(e.lhs(), bindings);
        const double y = eval(e.rhs(), bindings);
        return apply_binary(e.binary_op(), x, y);
    }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Program

Program::Program(const Expr& e, std::span<const std::string> slots, const Bindings& constants)
{
    emit(e, slots, constants, 1);
}

void Program::emit(const Expr& e, std::span<const std::string> slots, const Bindings& constants, std::size_t depth)
{
    max_depth_ = std::max(max_depth_, depth);
    switch (e.kind()) {
    case NodeKind::constant:
        code_.push_back({Op::push_const, 0, e.value()});
        return;
    case NodeKind::variable:
    case NodeKind::parameter: {
        const auto it = std::find(slots.begin(), slots.end(), e.name());
        if (it != slots.end()) {
            code_.push_back({Op::push_slot, static_cast<std::size_t>(it - slots.begin()), 0.0});
            constant_ = false;
            return;
        }
        const auto c = constants.find(e.name());
        if (c == constants.end()) throw UnboundNameError(e.name());
        code_.push_back({Op::push_const, 0, c->second});
        return;
    }
    case NodeKind::unary: {
        emit(e.operand(), slots, constants, depth);
        static constexpr std::array<Op, 5> ops{Op::neg, Op::sin, Op::cos, Op::exp, Op::sqrt};
        code_.push_back({ops[static_cast<std::size_t>(e.unary_op())], 0, 0.0});
        return;
    }
    case NodeKind::binary: {
        emit(e.lhs(), slots, constants, depth);
        emit(e.rhs(), slots, constants, depth + 1);
        static constexpr std::array<Op, 5> ops{Op::add, Op::sub, Op::mul, Op::div, Op::pow};
        code_.push_back({ops[static_cast<std::size_t>(e.binary_op())], 0, 0.0});
        return;
    }
    }
}

double Program::operator()(std::span<const double> slot_values) const
{
    constexpr std::size_t kInline = 64;
    std::array<double, kInline> inline_stack{};
    std::vector<double> heap_stack;
    double* stack = inline_stack.data();
    if (max_depth_ > kInline) {
        heap_stack.resize(max_depth_);
        stack = heap_stack.data();
    }
    std::size_t top = 0;
    for (const Instr& in : code_) {
        switch (in.op) {
        case Op::push_const: stack[top++] = in.value; break;
        case Op::push_slot: stack[top++] = slot_values[in.slot]; break;
        case Op::neg: stack[top - 1] = -stack[top - 1]; break;
        case Op::sin: stack[top - 1] = apply_unary(UnaryOp::sin, stack[top - 1]); break;
        case Op::cos: stack[top - 1] = apply_unary(UnaryOp::cos, stack[top - 1]); break;
        case Op::exp: stack[top - 1] = apply_unary(UnaryOp::exp, stack[top - 1]); break;
        case Op::sqrt: stack[top - 1] = apply_unary(UnaryOp::sqrt, stack[top - 1]); break;
        case Op::add: --top; stack[top - 1] = apply_binary(BinaryOp::add, stack[top - 1], stack[top]); break;
        case Op::sub: --top; stack[top - 1] = apply_binary(BinaryOp::sub, stack[top - 1], stack[top]); break;
        case Op::mul: --top; stack[top - 1] = apply_binary(BinaryOp::mul, stack[top - 1], stack[top]); break;
        case Op::div: --top; stack[top - 1] = apply_binary(BinaryOp::div, stack[top - 1], stack[top]); break;
        case Op::pow: --top; stack[top - 1] = apply_binary(BinaryOp::pow, stack[top - 1], stack[top]); break;
        }
    }
    return code_.empty() ? 0.0 : stack[0];
}

}  // namespace jetflow::expr
