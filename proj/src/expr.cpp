#include "jetflow/expr.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cctype>
#include <charconv>
#include <optional>
#include <utility>

namespace jetflow::expr {

namespace {

const Node& zero_node()
{
    static const Node node{};
    return node;
}

const Node& deref(const std::shared_ptr<const Node>& p) { return p ? *p : zero_node(); }

}  // namespace

// ---------------------------------------------------------------------------
// Expr

Expr Expr::constant(double value)
{
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::constant;
    n->value = value;
    return Expr(std::move(n));
}

Expr Expr::variable(std::string name)
{
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::variable;
    n->name = std::move(name);
    return Expr(std::move(n));
}

Expr Expr::parameter(std::string name)
{
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::parameter;
    n->name = std::move(name);
    return Expr(std::move(n));
}

Expr Expr::unary(UnaryOp op, Expr operand)
{
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::unary;
    n->uop = op;
    n->a = std::move(operand);
    return Expr(std::move(n));
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs)
{
    if (op == BinaryOp::pow && !rhs.is_constant()) throw std::invalid_argument("exponent of '^' must be a constant");
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::binary;
    n->bop = op;
    n->a = std::move(lhs);
    n->b = std::move(rhs);
    return Expr(std::move(n));
}

NodeKind Expr::kind() const { return deref(node_).kind; }
double Expr::value() const { return deref(node_).value; }
const std::string& Expr::name() const { return deref(node_).name; }
UnaryOp Expr::unary_op() const { return deref(node_).uop; }
BinaryOp Expr::binary_op() const { return deref(node_).bop; }
const Expr& Expr::operand() const { return deref(node_).a; }
const Expr& Expr::lhs() const { return deref(node_).a; }
const Expr& Expr::rhs() const { return deref(node_).b; }

bool operator==(const Expr& x, const Expr& y)
{
    if (x.node_ == y.node_) return true;
    if (x.kind() != y.kind()) return false;
    switch (x.kind()) {
    case NodeKind::constant:
        return std::bit_cast<std::uint64_t>(x.value()) == std::bit_cast<std::uint64_t>(y.value());
    case NodeKind::variable:
    case NodeKind::parameter:
        return x.name() == y.name();
    case NodeKind::unary:
        return x.unary_op() == y.unary_op() && x.operand() == y.operand();
    case NodeKind::binary:
        return x.binary_op() == y.binary_op() && x.lhs() == y.lhs() && x.rhs() == y.rhs();
    }
    return false;
}

// ---------------------------------------------------------------------------
// Alphabet and errors

Alphabet Alphabet::jet(std::size_t n, std::vector<std::string> parameters)
{
    Alphabet a;
    for (std::size_t i = 1; i <= n; ++i) a.variables.push_back("q" + std::to_string(i));
    for (std::size_t i = 1; i <= n; ++i) a.variables.push_back("p" + std::to_string(i));
    a.variables.emplace_back("z");
    a.variables.emplace_back("t");
    a.parameters = std::move(parameters);
    return a;
}

bool Alphabet::is_variable(std::string_view name) const
{
    return std::find(variables.begin(), variables.end(), name) != variables.end();
}

bool Alphabet::is_parameter(std::string_view name) const
{
    return std::find(parameters.begin(), parameters.end(), name) != parameters.end();
}

ParseError::ParseError(ParseErrc code, std::size_t position, std::string token, const std::string& what)
    : std::runtime_error(what), code_(code), position_(position), token_(std::move(token))
{
}

UnboundNameError::UnboundNameError(const std::string& name)
    : std::runtime_error("unbound name '" + name + "'"), name_(name)
{
}

// ---------------------------------------------------------------------------
// Lexer / parser
//
//   expr     := term (('+' | '-') term)*
//   term     := unary (('*' | '/') unary)*
//   unary    := '-' unary | power
//   power    := primary ('^' exponent)?
//   exponent := '-' exponent | primary ('^' exponent)?      (must fold to a constant)
//   primary  := number | identifier | function '(' expr ')' | '(' expr ')'

namespace {

enum class Tok { number, ident, plus, minus, star, slash, caret, lparen, rparen, end };

struct Token {
    Tok kind;
    std::size_t pos;
    std::string text;
    double number = 0.0;
};

constexpr std::array<std::pair<std::string_view, UnaryOp>, 4> kFunctions{{
    {"sin", UnaryOp::sin},
    {"cos", UnaryOp::cos},
    {"exp", UnaryOp::exp},
    {"sqrt", UnaryOp::sqrt},
}};

std::optional<UnaryOp> lookup_function(std::string_view name)
{
    for (const auto& [n, op] : kFunctions)
        if (n == name) return op;
    return std::nullopt;
}

std::vector<Token> lex(std::string_view src)
{
    std::vector<Token> out;
    std::size_t i = 0;
    const auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
    while (i < src.size()) {
        const char c = src[i];
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            ++i;
            continue;
        }
        const std::size_t start = i;
        if (is_digit(c) || (c == '.' && i + 1 < src.size() && is_digit(src[i + 1]))) {
            while (i < src.size() && is_digit(src[i])) ++i;
            if (i < src.size() && src[i] == '.') {
                ++i;
                while (i < src.size() && is_digit(src[i])) ++i;
            }
            if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
                std::size_t j = i + 1;
                if (j < src.size() && (src[j] == '+' || src[j] == '-')) ++j;
                if (j < src.size() && is_digit(src[j])) {
                    while (j < src.size() && is_digit(src[j])) ++j;
                    i = j;
                }
            }
            Token t{Tok::number, start, std::string(src.substr(start, i - start))};
            const auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
            if (res.ec != std::errc{} || res.ptr != t.text.data() + t.text.size())
                throw ParseError(ParseErrc::lexical, start, t.text,
                                 "malformed number '" + t.text + "' at position " + std::to_string(start));
            out.push_back(std::move(t));
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) ++i;
            out.push_back({Tok::ident, start, std::string(src.substr(start, i - start))});
            continue;
        }
        Tok kind;
        switch (c) {
        case '+': kind = Tok::plus; break;
        case '-': kind = Tok::minus; break;
        case '*': kind = Tok::star; break;
        case '/': kind = Tok::slash; break;
        case '^': kind = Tok::caret; break;
        case '(': kind = Tok::lparen; break;
        case ')': kind = Tok::rparen; break;
        default:
            throw ParseError(ParseErrc::lexical, start, std::string(1, c),
                             std::string("unexpected character '") + c + "' at position " + std::to_string(start));
        }
        out.push_back({kind, start, std::string(1, c)});
        ++i;
    }
    out.push_back({Tok::end, src.size(), ""});
    return out;
}

bool is_closed(const Expr& e)
{
    switch (e.kind()) {
    case NodeKind::constant: return true;
    case NodeKind::variable:
    case NodeKind::parameter: return false;
    case NodeKind::unary: return is_closed(e.operand());
    case NodeKind::binary: return is_closed(e.lhs()) && is_closed(e.rhs());
    }
    return false;
}

class Parser {
public:
    Parser(std::string_view src, const Alphabet& alphabet) : tokens_(lex(src)), alphabet_(alphabet) {}

    Expr run()
    {
        Expr e = expression();
        const Token& t = peek();
        if (t.kind == Tok::rparen)
            throw ParseError(ParseErrc::unbalanced_parentheses, t.pos, t.text,
                             "unbalanced ')' at position " + std::to_string(t.pos));
        if (t.kind != Tok::end) unexpected(t);
        return e;
    }

private:
    const Token& peek() const { return tokens_[pos_]; }
    const Token& next() { return tokens_[pos_++]; }

    [[noreturn]] void unexpected(const Token& t) const
    {
        if (t.kind == Tok::end)
            throw ParseError(ParseErrc::unexpected_end, t.pos, "",
                             "unexpected end of input at position " + std::to_string(t.pos));
        throw ParseError(ParseErrc::unexpected_token, t.pos, t.text,
                         "unexpected token '" + t.text + "' at position " + std::to_string(t.pos));
    }

    Expr expression()
    {
        Expr lhs = term();
        while (peek().kind == Tok::plus || peek().kind == Tok::minus) {
            const BinaryOp op = next().kind == Tok::plus ? BinaryOp::add : BinaryOp::sub;
            lhs = Expr::binary(op, std::move(lhs), term());
        }
        return lhs;
    }

    Expr term()
    {
        Expr lhs = unary();
        while (peek().kind == Tok::star || peek().kind == Tok::slash) {
            const BinaryOp op = next().kind == Tok::star ? BinaryOp::mul : BinaryOp::div;
            lhs = Expr::binary(op, std::move(lhs), unary());
        }
        return lhs;
    }

    Expr unary()
    {
        if (peek().kind == Tok::minus) {
            next();
            return Expr::unary(UnaryOp::neg, unary());
        }
        return power();
    }

    Expr power()
    {
        Expr base = primary();
        if (peek().kind != Tok::caret) return base;
        next();
        const std::size_t at = peek().pos;
        Expr ex = exponent();
        if (!is_closed(ex))
            throw ParseError(ParseErrc::non_constant_exponent, at, tokens_[pos_ - 1].text,
                             "exponent at position " + std::to_string(at) + " is not a constant");
        Expr folded = simplify(ex);
        if (!folded.is_constant())
            throw ParseError(ParseErrc::non_constant_exponent, at, "",
                             "exponent at position " + std::to_string(at) + " does not evaluate to a finite constant");
        return Expr::binary(BinaryOp::pow, std::move(base), std::move(folded));
    }

    Expr exponent()
    {
        if (peek().kind == Tok::minus) {
            next();
            return Expr::unary(UnaryOp::neg, exponent());
        }
        Expr base = primary();
        if (peek().kind != Tok::caret) return base;
        next();
        return Expr::binary(BinaryOp::pow, std::move(base), exponent());
    }

    Expr primary()
    {
        const Token& t = next();
        switch (t.kind) {
        case Tok::number:
            return Expr::constant(t.number);
        case Tok::lparen: {
            Expr inner = expression();
            const Token& close = peek();
            if (close.kind != Tok::rparen) {
                if (close.kind == Tok::end)
                    throw ParseError(ParseErrc::unbalanced_parentheses, close.pos, "",
                                     "missing ')' for '(' at position " + std::to_string(t.pos));
                unexpected(close);
            }
            next();
            return inner;
        }
        case Tok::ident: {
            if (auto fn = lookup_function(t.text)) {
                if (peek().kind != Tok::lparen)
                    throw ParseError(ParseErrc::unexpected_token, t.pos, t.text,
                                     "function '" + t.text + "' at position " + std::to_string(t.pos) +
                                         " must be followed by '('");
                const Token& open = next();
                Expr arg = expression();
                if (peek().kind != Tok::rparen) {
                    if (peek().kind == Tok::end)
                        throw ParseError(ParseErrc::unbalanced_parentheses, peek().pos, "",
                                         "missing ')' for '(' at position " + std::to_string(open.pos));
                    unexpected(peek());
                }
                next();
                return Expr::unary(*fn, std::move(arg));
            }
            if (alphabet_.is_variable(t.text)) return Expr::variable(t.text);
            if (alphabet_.is_parameter(t.text)) return Expr::parameter(t.text);
            throw ParseError(ParseErrc::unknown_identifier, t.pos, t.text,
                             "unknown identifier '" + t.text + "' at position " + std::to_string(t.pos));
        }
        case Tok::rparen:
            throw ParseError(ParseErrc::unbalanced_parentheses, t.pos, t.text,
                             "unbalanced ')' at position " + std::to_string(t.pos));
        default:
            unexpected(t);
        }
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    const Alphabet& alphabet_;
};

}  // namespace

Expr parse(std::string_view source, const Alphabet& alphabet) { return Parser(source, alphabet).run(); }

// ---------------------------------------------------------------------------
// Printing

namespace {

constexpr int kPrecAdd = 1;
constexpr int kPrecMul = 2;
constexpr int kPrecNeg = 3;
constexpr int kPrecPow = 4;
constexpr int kPrecAtom = 5;

std::string format_number(double v)
{
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

std::string_view function_name(UnaryOp op)
{
    switch (op) {
    case UnaryOp::sin: return "sin";
    case UnaryOp::cos: return "cos";
    case UnaryOp::exp: return "exp";
    case UnaryOp::sqrt: return "sqrt";
    case UnaryOp::neg: return "-";
    }
    return "?";
}

int precedence(const Expr& e)
{
    switch (e.kind()) {
    case NodeKind::constant: return std::signbit(e.value()) ? kPrecNeg : kPrecAtom;
    case NodeKind::variable:
    case NodeKind::parameter: return kPrecAtom;
    case NodeKind::unary: return e.unary_op() == UnaryOp::neg ? kPrecNeg : kPrecAtom;
    case NodeKind::binary:
        switch (e.binary_op()) {
        case BinaryOp::add:
        case BinaryOp::sub: return kPrecAdd;
        case BinaryOp::mul:
        case BinaryOp::div: return kPrecMul;
        case BinaryOp::pow: return kPrecPow;
        }
    }
    return kPrecAtom;
}

void print(const Expr& e, std::string& out);

void print_wrapped(const Expr& e, bool wrap, std::string& out)
{
    if (wrap) out += '(';
    print(e, out);
    if (wrap) out += ')';
}

void print(const Expr& e, std::string& out)
{
    switch (e.kind()) {
    case NodeKind::constant:
        out += format_number(e.value());
        return;
    case NodeKind::variable:
    case NodeKind::parameter:
        out += e.name();
        return;
    case NodeKind::unary:
        if (e.unary_op() == UnaryOp::neg) {
            out += '-';
            print_wrapped(e.operand(), precedence(e.operand()) <= kPrecNeg, out);
        } else {
            out += function_name(e.unary_op());
            print_wrapped(e.operand(), true, out);
        }
        return;
    case NodeKind::binary: {
        const BinaryOp op = e.binary_op();
        if (op == BinaryOp::pow) {
            print_wrapped(e.lhs(), precedence(e.lhs()) <= kPrecPow, out);
            out += '^';
            print_wrapped(e.rhs(), precedence(e.rhs()) != kPrecAtom, out);
            return;
        }
        const int p = precedence(e);
        print_wrapped(e.lhs(), precedence(e.lhs()) < p, out);
        switch (op) {
        case BinaryOp::add: out += '+'; break;
        case BinaryOp::sub: out += '-'; break;
        case BinaryOp::mul: out += '*'; break;
        case BinaryOp::div: out += '/'; break;
        case BinaryOp::pow: break;
        }
        const int pr = precedence(e.rhs());
        // a-(-b) reads better than a--b
        print_wrapped(e.rhs(), pr <= p || (p == kPrecAdd && pr == kPrecNeg), out);
        return;
    }
    }
}

void print_tree(const Expr& e, std::string& out)
{
    switch (e.kind()) {
    case NodeKind::constant:
        out += format_number(e.value());
        return;
    case NodeKind::variable:
    case NodeKind::parameter:
        out += e.name();
        return;
    case NodeKind::unary: {
        static constexpr std::array<std::string_view, 5> names{"Neg", "Sin", "Cos", "Exp", "Sqrt"};
        out += names[static_cast<std::size_t>(e.unary_op())];
        out += '(';
        print_tree(e.operand(), out);
        out += ')';
        return;
    }
    case NodeKind::binary: {
        static constexpr std::array<std::string_view, 5> names{"Add", "Sub", "Mul", "Div", "Pow"};
        out += names[static_cast<std::size_t>(e.binary_op())];
        out += '(';
        print_tree(e.lhs(), out);
        out += ',';
        print_tree(e.rhs(), out);
        out += ')';
        return;
    }
    }
}

void collect(const Expr& e, NodeKind kind, std::set<std::string>& out)
{
    switch (e.kind()) {
    case NodeKind::constant: return;
    case NodeKind::variable:
    case NodeKind::parameter:
        if (e.kind() == kind) out.insert(e.name());
        return;
    case NodeKind::unary: collect(e.operand(), kind, out); return;
    case NodeKind::binary:
        collect(e.lhs(), kind, out);
        collect(e.rhs(), kind, out);
        return;
    }
}

}  // namespace

std::string to_string(const Expr& e)
{
    std::string out;
    print(e, out);
    return out;
}

std::string to_tree_string(const Expr& e)
{
    std::string out;
    print_tree(e, out);
    return out;
}

std::set<std::string> free_variables(const Expr& e)
{
    std::set<std::string> out;
    collect(e, NodeKind::variable, out);
    return out;
}

std::set<std::string> free_parameters(const Expr& e)
{
    std::set<std::string> out;
    collect(e, NodeKind::parameter, out);
    return out;
}

bool depends_on(const Expr& e, std::string_view name)
{
    switch (e.kind()) {
    case NodeKind::constant: return false;
    case NodeKind::variable:
    case NodeKind::parameter: return e.name() == name;
    case NodeKind::unary: return depends_on(e.operand(), name);
    case NodeKind::binary: return depends_on(e.lhs(), name) || depends_on(e.rhs(), name);
    }
    return false;
}

}  // namespace jetflow::expr
