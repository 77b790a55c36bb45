#pragma once

// Arithmetic expression language used to declare Hamiltonians, potentials,
// entropies and metric entries as strings. Expressions are immutable trees;
// derivatives are symbolic so rate laws built from them hold to machine
// precision.

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace jetflow::expr {

enum class NodeKind { constant, variable, parameter, unary, binary };
enum class UnaryOp { neg, sin, cos, exp, sqrt };
enum class BinaryOp { add, sub, mul, div, pow };

struct Node;

/// Immutable handle to an expression tree. Copies share structure.
class Expr {
public:
    Expr() = default;  // the constant 0

    static Expr constant(double value);
    static Expr variable(std::string name);
    static Expr parameter(std::string name);
    static Expr unary(UnaryOp op, Expr operand);
    static Expr binary(BinaryOp op, Expr lhs, Expr rhs);

    [[nodiscard]] NodeKind kind() const;
    [[nodiscard]] double value() const;             // constant only
    [[nodiscard]] const std::string& name() const;  // variable / parameter only
    [[nodiscard]] UnaryOp unary_op() const;
    [[nodiscard]] BinaryOp binary_op() const;
    [[nodiscard]] const Expr& operand() const;  // unary only
    [[nodiscard]] const Expr& lhs() const;      // binary only
    [[nodiscard]] const Expr& rhs() const;      // binary only

    [[nodiscard]] bool is_constant() const { return kind() == NodeKind::constant; }
    [[nodiscard]] bool is_constant(double v) const { return is_constant() && value() == v; }

    /// Structural identity (same tree shape, names and bitwise-equal constants).
    friend bool operator==(const Expr& a, const Expr& b);

private:
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

struct Node {
    NodeKind kind = NodeKind::constant;
    double value = 0.0;
    std::string name;
    UnaryOp uop = UnaryOp::neg;
    BinaryOp bop = BinaryOp::add;
    Expr a;
    Expr b;
};

/// Legal identifiers for a parse. Variables are differentiable coordinates;
/// parameters are constants bound at evaluation time.
struct Alphabet {
    std::vector<std::string> variables;
    std::vector<std::string> parameters;

    /// q1..qn, p1..pn, z, t plus the given parameter names.
    static Alphabet jet(std::size_t n, std::vector<std::string> parameters = {});

    [[nodiscard]] bool is_variable(std::string_view name) const;
    [[nodiscard]] bool is_parameter(std::string_view name) const;
};

using Bindings = std::map<std::string, double, std::less<>>;

enum class ParseErrc {
    lexical,
    unknown_identifier,
    unbalanced_parentheses,
    non_constant_exponent,
    unexpected_token,
    unexpected_end,
};

class ParseError : public std::runtime_error {
public:
    ParseError(ParseErrc code, std::size_t position, std::string token, const std::string& what);

    [[nodiscard]] ParseErrc code() const noexcept { return code_; }
    /// Byte offset into the source (source length for end-of-input).
    [[nodiscard]] std::size_t position() const noexcept { return position_; }
    /// Offending token text; empty at end of input.
    [[nodiscard]] const std::string& token() const noexcept { return token_; }

private:
    ParseErrc code_;
    std::size_t position_;
    std::string token_;
};

/// A free name has no binding.
class UnboundNameError : public std::runtime_error {
public:
    explicit UnboundNameError(const std::string& name);
    [[nodiscard]] const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

/// sqrt of a negative number, division by zero, or a non-finite result.
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Expr parse(std::string_view source, const Alphabet& alphabet);

double eval(const Expr& e, const Bindings& bindings);

/// Exact partial derivative with respect to the variable `var`, simplified.
/// Parameters and other variables are treated as constants.
Expr diff(const Expr& e, std::string_view var);

/// Constant folding, 0/1 identity elimination and left-association of products.
Expr simplify(const Expr& e);

/// Replaces every name bound in `values` by its constant, then simplifies.
Expr bind(const Expr& e, const Bindings& values);

/// Canonical, re-parseable surface syntax.
std::string to_string(const Expr& e);

/// Constructor-style dump, e.g. Add(Div(Pow(p1,2),2),q1).
std::string to_tree_string(const Expr& e);

std::set<std::string> free_variables(const Expr& e);
std::set<std::string> free_parameters(const Expr& e);
bool depends_on(const Expr& e, std::string_view name);

/// Expression flattened to postfix form with names resolved to slot indices.
/// Parameters may be frozen to constants at compile time. Evaluation is
/// reentrant.
class Program {
public:
    Program() = default;
    /// Throws UnboundNameError when a name is neither a slot nor a bound constant.
    Program(const Expr& e, std::span<const std::string> slots, const Bindings& constants = {});

    [[nodiscard]] double operator()(std::span<const double> slot_values) const;
    [[nodiscard]] bool is_constant() const { return constant_; }

private:
    enum class Op : unsigned char { push_const, push_slot, neg, sin, cos, exp, sqrt, add, sub, mul, div, pow };
    struct Instr {
        Op op;
        std::size_t slot;
        double value;
    };
    void emit(const Expr& e, std::span<const std::string> slots, const Bindings& constants, std::size_t depth);

    std::vector<Instr> code_;
    std::size_t max_depth_ = 0;
    bool constant_ = true;
};

}  // namespace jetflow::expr
