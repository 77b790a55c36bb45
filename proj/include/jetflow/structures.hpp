#pragma once

// Geometric structures on the one-jet bundle T*N x R in Darboux coordinates
// (q^1..q^n, p_1..p_n, z): Poisson tensors, the contact form and its Reeb
// field, metrics on the base, symmetric bivectors, and metriplectic
// 4-brackets built by the Kulkarni-Nomizu product.
//
// Flat coordinate layout everywhere: index i < n is q^(i+1), n <= i < 2n is
// p_(i-n+1), index 2n is z.

#include "jetflow/expr.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace jetflow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

constexpr std::size_t q_index(std::size_t i) { return i; }
constexpr std::size_t p_index(std::size_t n, std::size_t i) { return n + i; }
constexpr std::size_t z_index(std::size_t n) { return 2 * n; }

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Metric failed the symmetric positive-definite check at an evaluation point.
class NonSpdMetricError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// alpha ^ (d alpha)^n vanishes: the Reeb system is singular.
class ContactDegeneracyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// State (q, p, z) in R^(2n+1).
class Point {
public:
    Point() = default;
    explicit Point(std::size_t n);
    Point(std::span<const double> q, std::span<const double> p, double z);
    Point(std::initializer_list<double> q, std::initializer_list<double> p, double z);

    /// Throws DimensionError unless the length is odd.
    static Point from_flat(std::span<const double> x);
    static Point from_flat(const Vector& x);

    [[nodiscard]] std::size_t n() const { return n_; }
    [[nodiscard]] std::size_t dim() const { return 2 * n_ + 1; }

    [[nodiscard]] std::span<const double> q() const { return {x_.data(), n_}; }
    [[nodiscard]] std::span<double> q() { return {x_.data(), n_}; }
    [[nodiscard]] std::span<const double> p() const { return {x_.data() + n_, n_}; }
    [[nodiscard]] std::span<double> p() { return {x_.data() + n_, n_}; }
    [[nodiscard]] double z() const { return x_[static_cast<Eigen::Index>(2 * n_)]; }
    [[nodiscard]] double& z() { return x_[static_cast<Eigen::Index>(2 * n_)]; }

    [[nodiscard]] const Vector& coords() const { return x_; }
    [[nodiscard]] Vector& coords() { return x_; }
    [[nodiscard]] double operator[](std::size_t i) const { return x_[static_cast<Eigen::Index>(i)]; }

    [[nodiscard]] bool finite() const { return x_.allFinite(); }

    friend bool operator==(const Point& a, const Point& b) { return a.n_ == b.n_ && a.x_ == b.x_; }

private:
    std::size_t n_ = 0;
    Vector x_;
};

enum class Precision { exact, finite_difference };

/// Time-dependent observable on the jet space with partial derivatives.
/// Fields built from expressions carry exact symbolic partials; fields built
/// from black-box functions or bracket compositions carry central-difference
/// partials and report Precision::finite_difference.
class ScalarField {
public:
    class Impl {
    public:
        virtual ~Impl() = default;
        [[nodiscard]] virtual double value(const Vector& x, double t) const = 0;
        /// Full coordinate gradient, length 2n+1.
        virtual void gradient(const Vector& x, double t, Vector& out) const = 0;
        [[nodiscard]] virtual double time_derivative(const Vector& x, double t) const = 0;
        [[nodiscard]] virtual Precision precision() const = 0;
        [[nodiscard]] virtual bool time_dependent() const { return true; }
        /// Symbolic form and partials (index 2n+1 is t), when available.
        [[nodiscard]] virtual const expr::Expr* expression() const { return nullptr; }
        [[nodiscard]] virtual const expr::Expr* partial_expression(std::size_t) const { return nullptr; }
        [[nodiscard]] virtual std::optional<double> constant_partial(std::size_t) const { return std::nullopt; }
    };

    ScalarField(std::size_t n, std::shared_ptr<const Impl> impl);

    /// Names outside q1..qn, p1..pn, z, t must be bound in `parameters`.
    static ScalarField from_expr(const expr::Expr& e, std::size_t n, const expr::Bindings& parameters = {});
    /// Parses `source` over the jet alphabet; parameter names are the keys of `parameters`.
    static ScalarField parse(std::string_view source, std::size_t n, const expr::Bindings& parameters = {});
    /// The coordinate function x^index.
    static ScalarField coordinate(std::size_t n, std::size_t index);
    static ScalarField constant(std::size_t n, double c);
    /// Black-box value with central-difference partials.
    static ScalarField from_function(std::size_t n, std::function<double(const Point&, double)> fn,
                                     bool time_dependent = true);

    /// Pointwise product with product-rule partials.
    friend ScalarField operator*(const ScalarField& a, const ScalarField& b);

    [[nodiscard]] std::size_t n() const { return n_; }
    [[nodiscard]] std::size_t dim() const { return 2 * n_ + 1; }

    [[nodiscard]] double operator()(const Point& x, double t) const;
    [[nodiscard]] double value(const Vector& x, double t) const { return impl_->value(x, t); }
    [[nodiscard]] Vector gradient(const Point& x, double t) const;
    void gradient(const Vector& x, double t, Vector& out) const { impl_->gradient(x, t, out); }
    /// p-block of the gradient.
    [[nodiscard]] Vector fiber_derivative(const Point& x, double t) const;
    [[nodiscard]] double partial_t(const Point& x, double t) const;
    [[nodiscard]] double partial_t(const Vector& x, double t) const { return impl_->time_derivative(x, t); }

    [[nodiscard]] Precision precision() const { return impl_->precision(); }
    [[nodiscard]] bool time_dependent() const { return impl_->time_dependent(); }
    [[nodiscard]] std::optional<expr::Expr> expression() const;
    /// Symbolic partial with respect to coordinate `index` (2n+1 for t).
    [[nodiscard]] std::optional<expr::Expr> partial_expression(std::size_t index) const;
    /// Value of a partial that is a constant everywhere, if known symbolically.
    [[nodiscard]] std::optional<double> constant_partial(std::size_t index) const;

private:
    void check(const Point& x) const;
    std::size_t n_;
    std::shared_ptr<const Impl> impl_;
};

/// Bivector J^{ij}(x) on R^dim.
class PoissonTensor {
public:
    using EntriesFn = std::function<Matrix(const Vector&)>;

    PoissonTensor(std::size_t dim, EntriesFn entries, std::size_t casimir_count, bool constant = false);

    [[nodiscard]] std::size_t dim() const { return dim_; }
    [[nodiscard]] std::size_t casimir_count() const { return casimirs_; }
    [[nodiscard]] bool is_constant() const { return constant_; }

    [[nodiscard]] Matrix entries(const Vector& x) const;
    [[nodiscard]] Matrix entries(const Point& x) const { return entries(x.coords()); }
    /// J(x) * covector.
    [[nodiscard]] Vector apply(const Vector& x, const Vector& covector) const;

private:
    std::size_t dim_;
    EntriesFn entries_;
    std::size_t casimirs_;
    bool constant_;
    std::optional<Matrix> cached_;
};

/// Darboux block form [[0, I, 0], [-I, 0, 0], [0, 0, 0_r]].
PoissonTensor canonical_poisson(std::size_t n_pairs, std::size_t n_casimirs);

/// Max over (i,j,k) of |sum_l J^{il} d_l J^{jk} + J^{jl} d_l J^{ki} + J^{kl} d_l J^{ij}|.
/// Exactly 0 for constant tensors; central differences otherwise.
double jacobi_residual(const PoissonTensor& J, const Vector& x);
double jacobi_residual(const PoissonTensor& J, const Point& x);

/// Max |J^{ij} + J^{ji}| at x.
double antisymmetry_residual(const PoissonTensor& J, const Vector& x);

/// {f, g} = J(df, dg). The result has finite-difference partials.
ScalarField poisson_bracket(const PoissonTensor& J, const ScalarField& f, const ScalarField& g);

/// Riemannian metric g_{ij}(q) on the base N.
class MetricField {
public:
    using EntriesFn = std::function<Matrix(std::span<const double> q)>;

    MetricField(std::size_t n, EntriesFn entries);
    static MetricField identity(std::size_t n);
    /// Throws NonSpdMetricError if `g` is not symmetric positive definite.
    static MetricField constant(const Matrix& g);

    [[nodiscard]] std::size_t n() const { return n_; }
    [[nodiscard]] bool is_identity() const { return identity_; }

    /// g_{ij}(q); throws NonSpdMetricError when not SPD.
    [[nodiscard]] Matrix metric(std::span<const double> q) const;
    /// g^{ij}(q); throws NonSpdMetricError when not SPD.
    [[nodiscard]] Matrix inverse(std::span<const double> q) const;
    /// Smallest eigenvalue of g(q).
    [[nodiscard]] double min_eigenvalue(std::span<const double> q) const;

private:
    std::size_t n_;
    EntriesFn entries_;
    bool identity_ = false;
    std::optional<Matrix> constant_metric_;
    std::optional<Matrix> constant_inverse_;
};

/// Symmetric bilinear form on covectors, sigma(df, dg).
class SymmetricBivector {
public:
    using Fn = std::function<double(const Vector& x, const Vector& a, const Vector& b)>;

    explicit SymmetricBivector(Fn fn) : fn_(std::move(fn)) {}

    /// <d^fiber f, d^fiber g>_g = g^{ij} f_{p_i} g_{p_j}.
    static SymmetricBivector fiber_metric(const MetricField& metric);
    /// f_z g_z.
    static SymmetricBivector entropy_direction(std::size_t n);
    /// Euclidean dot product of full gradients.
    static SymmetricBivector euclidean();

    [[nodiscard]] double operator()(const Vector& x, const Vector& a, const Vector& b) const { return fn_(x, a, b); }
    [[nodiscard]] double apply(const ScalarField& f, const ScalarField& g, const Point& x, double t) const;

private:
    Fn fn_;
};

/// Quadrilinear bracket (f, k; g, n) acting on gradients.
class FourBracket {
public:
    using Fn = std::function<double(const Vector& x, const Vector& df, const Vector& dk, const Vector& dg,
                                    const Vector& dn)>;

    explicit FourBracket(Fn fn) : fn_(std::move(fn)) {}

    [[nodiscard]] double operator()(const Vector& x, const Vector& df, const Vector& dk, const Vector& dg,
                                    const Vector& dn) const
    {
        return fn_(x, df, dk, dg, dn);
    }
    [[nodiscard]] double apply(const ScalarField& f, const ScalarField& k, const ScalarField& g,
                               const ScalarField& n, const Point& x, double t) const;

    /// R^{ijkl}(x), row-major with l fastest; dim^4 entries.
    [[nodiscard]] std::vector<double> index_tensor(const Point& x) const;

private:
    Fn fn_;
};

/// sigma(df,dg) mu(dk,dn) - sigma(df,dn) mu(dk,dg) + mu(df,dg) sigma(dk,dn) - mu(df,dn) sigma(dk,dg).
FourBracket kn_product(const SymmetricBivector& sigma, const SymmetricBivector& mu);

/// sigma(df, dg) mu(dk, dn) with no antisymmetrization. Not a valid
/// 4-bracket; used to exercise the axiom checks.
FourBracket raw_product(const SymmetricBivector& sigma, const SymmetricBivector& mu);

/// Kulkarni-Nomizu product of the fiber metric and the z-direction bivector.
FourBracket jet_bundle_bracket(const MetricField& metric);

/// Absolute residuals of: first-pair antisymmetry, second-pair antisymmetry,
/// pair exchange, cyclic identity, and Leibniz in slot 1 with f*h.
using SymmetryResiduals = std::array<double, 5>;
SymmetryResiduals symmetry_residuals(const FourBracket& B, std::span<const ScalarField, 4> fs, const Point& x,
                                     double t);
/// Same, with an explicit second factor h for the Leibniz test (default h = fs[3]).
SymmetryResiduals symmetry_residuals(const FourBracket& B, std::span<const ScalarField, 4> fs,
                                     const ScalarField& h, const Point& x, double t);

/// Coordinate 1-form alpha = a_i(x) dx^i on R^dim.
class ContactForm {
public:
    using CoeffFn = std::function<Vector(const Vector&)>;
    using DifferentialFn = std::function<Matrix(const Vector&)>;

    /// Without `differential`, d alpha is taken by central differences.
    ContactForm(std::size_t dim, CoeffFn coefficients, DifferentialFn differential = {});
    /// alpha = dz - sum p_i dq^i.
    static ContactForm canonical(std::size_t n);

    [[nodiscard]] std::size_t dim() const { return dim_; }
    [[nodiscard]] bool is_canonical() const { return canonical_; }
    [[nodiscard]] Vector coefficients(const Vector& x) const { return coefficients_(x); }
    /// W_{ij} = d alpha(e_i, e_j) = d_i a_j - d_j a_i.
    [[nodiscard]] Matrix differential(const Vector& x) const;

private:
    std::size_t dim_;
    CoeffFn coefficients_;
    DifferentialFn differential_;
    bool canonical_ = false;
};

/// Solves alpha(R) = 1, d alpha(R, .) = 0.
Vector reeb_field(const ContactForm& alpha, const Point& x);
Vector reeb_field(const ContactForm& alpha, const Vector& x);

}  // namespace jetflow
