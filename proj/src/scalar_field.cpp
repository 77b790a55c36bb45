#include "jetflow/structures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace jetflow {

namespace {

// Central-difference step relative to the coordinate scale.
constexpr double kFdStep = 1.0 / 131072.0;  // 2^-17

std::vector<std::string> jet_slots(std::size_t n)
{
    std::vector<std::string> slots = expr::Alphabet::jet(n).variables;  // q.., p.., z, t
    return slots;
}

std::string coordinate_name(std::size_t n, std::size_t index)
{
    if (index < n) return "q" + std::to_string(index + 1);
    if (index < 2 * n) return "p" + std::to_string(index - n + 1);
    return "z";
}

class ExprField final : public ScalarField::Impl {
public:
    ExprField(const expr::Expr& e, std::size_t n, const expr::Bindings& parameters)
        : n_(n), expr_(e), parameters_(parameters)
    {
        const auto slots = jet_slots(n);
        value_ = expr::Program(e, slots, parameters);
        partials_.reserve(slots.size());
        programs_.reserve(slots.size());
        for (const auto& name : slots) {
            partials_.push_back(expr::diff(e, name));
            programs_.emplace_back(partials_.back(), slots, parameters);
        }
        time_dependent_ = !expr::bind(partials_.back(), parameters).is_constant(0.0);
    }

    double value(const Vector& x, double t) const override
    {
        return run(value_, x, t);
    }

    void gradient(const Vector& x, double t, Vector& out) const override
    {
        const std::size_t dim = 2 * n_ + 1;
        out.resize(static_cast<Eigen::Index>(dim));
        for (std::size_t i = 0; i < dim; ++i) out[static_cast<Eigen::Index>(i)] = run(programs_[i], x, t);
    }

    double time_derivative(const Vector& x, double t) const override { return run(programs_.back(), x, t); }
    Precision precision() const override { return Precision::exact; }
    bool time_dependent() const override { return time_dependent_; }
    const expr::Expr* expression() const override { return &expr_; }
    const expr::Expr* partial_expression(std::size_t index) const override
    {
        return index < partials_.size() ? &partials_[index] : nullptr;
    }
    std::optional<double> constant_partial(std::size_t index) const override
    {
        if (index >= partials_.size() || !expr::free_variables(partials_[index]).empty()) return std::nullopt;
        return expr::eval(partials_[index], parameters_);
    }

private:
    double run(const expr::Program& prog, const Vector& x, double t) const
    {
        const std::size_t dim = 2 * n_ + 1;
        constexpr std::size_t kInline = 32;
        if (dim + 1 <= kInline) {
            std::array<double, kInline> slots{};
            std::copy(x.data(), x.data() + dim, slots.begin());
            slots[dim] = t;
            return prog(std::span<const double>(slots.data(), dim + 1));
        }
        std::vector<double> slots(x.data(), x.data() + dim);
        slots.push_back(t);
        return prog(slots);
    }

    std::size_t n_;
    expr::Expr expr_;
    expr::Bindings parameters_;
    expr::Program value_;
    std::vector<expr::Expr> partials_;
    std::vector<expr::Program> programs_;
    bool time_dependent_ = true;
};

class FunctionField final : public ScalarField::Impl {
public:
    FunctionField(std::function<double(const Point&, double)> fn, bool time_dependent)
        : fn_(std::move(fn)), time_dependent_(time_dependent)
    {
    }

    double value(const Vector& x, double t) const override { return fn_(Point::from_flat(x), t); }

    void gradient(const Vector& x, double t, Vector& out) const override
    {
        out.resize(x.size());
        Vector y = x;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double h = std::max(1.0, std::abs(x[i])) * kFdStep;
            y[i] = x[i] + h;
            const double fp = value(y, t);
            y[i] = x[i] - h;
            const double fm = value(y, t);
            y[i] = x[i];
            out[i] = (fp - fm) / (2.0 * h);
        }
    }

    double time_derivative(const Vector& x, double t) const override
    {
        if (!time_dependent_) return 0.0;
        const double h = std::max(1.0, std::abs(t)) * kFdStep;
        return (value(x, t + h) - value(x, t - h)) / (2.0 * h);
    }

    Precision precision() const override { return Precision::finite_difference; }
    bool time_dependent() const override { return time_dependent_; }

private:
    std::function<double(const Point&, double)> fn_;
    bool time_dependent_;
};

class ProductField final : public ScalarField::Impl {
public:
    ProductField(ScalarField a, ScalarField b) : a_(std::move(a)), b_(std::move(b)) {}

    double value(const Vector& x, double t) const override { return a_.value(x, t) * b_.value(x, t); }

    void gradient(const Vector& x, double t, Vector& out) const override
    {
        Vector ga;
        Vector gb;
        a_.gradient(x, t, ga);
        b_.gradient(x, t, gb);
        out = a_.value(x, t) * gb + b_.value(x, t) * ga;
    }

    double time_derivative(const Vector& x, double t) const override
    {
        return a_.value(x, t) * b_.partial_t(x, t) + b_.value(x, t) * a_.partial_t(x, t);
    }

    Precision precision() const override
    {
        return a_.precision() == Precision::exact && b_.precision() == Precision::exact ? Precision::exact
                                                                                          : Precision::finite_difference;
    }
    bool time_dependent() const override { return a_.time_dependent() || b_.time_dependent(); }

private:
    ScalarField a_;
    ScalarField b_;
};

}  // namespace

ScalarField::ScalarField(std::size_t n, std::shared_ptr<const Impl> impl) : n_(n), impl_(std::move(impl))
{
    if (n_ == 0) throw DimensionError("scalar field needs n >= 1");
}

ScalarField ScalarField::from_expr(const expr::Expr& e, std::size_t n, const expr::Bindings& parameters)
{
    return ScalarField(n, std::make_shared<ExprField>(e, n, parameters));
}

ScalarField ScalarField::parse(std::string_view source, std::size_t n, const expr::Bindings& parameters)
{
    std::vector<std::string> names;
    names.reserve(parameters.size());
    for (const auto& [name, value] : parameters) names.push_back(name);
    return from_expr(expr::parse(source, expr::Alphabet::jet(n, std::move(names))), n, parameters);
}

ScalarField ScalarField::coordinate(std::size_t n, std::size_t index)
{
    if (index > 2 * n) throw DimensionError("coordinate index out of range");
    return from_expr(expr::Expr::variable(coordinate_name(n, index)), n);
}

ScalarField ScalarField::constant(std::size_t n, double c) { return from_expr(expr::Expr::constant(c), n); }

ScalarField ScalarField::from_function(std::size_t n, std::function<double(const Point&, double)> fn,
                                       bool time_dependent)
{
    return ScalarField(n, std::make_shared<FunctionField>(std::move(fn), time_dependent));
}

ScalarField operator*(const ScalarField& a, const ScalarField& b)
{
    if (a.n() != b.n()) throw DimensionError("product of fields on different jet spaces");
    return ScalarField(a.n(), std::make_shared<ProductField>(a, b));
}

void ScalarField::check(const Point& x) const
{
    if (x.n() != n_)
        throw DimensionError("point has n = " + std::to_string(x.n()) + ", field expects n = " + std::to_string(n_));
}

double ScalarField::operator()(const Point& x, double t) const
{
    check(x);
    return impl_->value(x.coords(), t);
}

Vector ScalarField::gradient(const Point& x, double t) const
{
    check(x);
    Vector g;
    impl_->gradient(x.coords(), t, g);
    return g;
}

Vector ScalarField::fiber_derivative(const Point& x, double t) const
{
    return gradient(x, t).segment(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
}

double ScalarField::partial_t(const Point& x, double t) const
{
    check(x);
    return impl_->time_derivative(x.coords(), t);
}

std::optional<expr::Expr> ScalarField::expression() const
{
    if (const auto* e = impl_->expression()) return *e;
    return std::nullopt;
}

std::optional<expr::Expr> ScalarField::partial_expression(std::size_t index) const
{
    if (const auto* e = impl_->partial_expression(index)) return *e;
    return std::nullopt;
}

std::optional<double> ScalarField::constant_partial(std::size_t index) const
{
    return impl_->constant_partial(index);
}

}  // namespace jetflow
