#include "jetflow/structures.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <string>

namespace jetflow {

// ---------------------------------------------------------------------------
// Point

Point::Point(std::size_t n) : n_(n), x_(Vector::Zero(static_cast<Eigen::Index>(2 * n + 1)))
{
    if (n == 0) throw DimensionError("point needs n >= 1");
}

Point::Point(std::span<const double> q, std::span<const double> p, double z) : Point(q.size())
{
    if (p.size() != q.size()) throw DimensionError("q and p blocks differ in length");
    std::copy(q.begin(), q.end(), this->q().begin());
    std::copy(p.begin(), p.end(), this->p().begin());
    this->z() = z;
}

Point::Point(std::initializer_list<double> q, std::initializer_list<double> p, double z)
    : Point(std::span<const double>(q.begin(), q.size()), std::span<const double>(p.begin(), p.size()), z)
{
}

Point Point::from_flat(std::span<const double> x)
{
    if (x.size() < 3 || x.size() % 2 == 0)
        throw DimensionError("flat state must have odd length 2n+1 >= 3, got " + std::to_string(x.size()));
    Point pt((x.size() - 1) / 2);
    std::copy(x.begin(), x.end(), pt.x_.data());
    return pt;
}

Point Point::from_flat(const Vector& x) { return from_flat(std::span<const double>(x.data(), static_cast<std::size_t>(x.size()))); }

// ---------------------------------------------------------------------------
// Poisson tensors

PoissonTensor::PoissonTensor(std::size_t dim, EntriesFn entries, std::size_t casimir_count, bool constant)
    : dim_(dim), entries_(std::move(entries)), casimirs_(casimir_count), constant_(constant)
{
    if (dim_ == 0) throw DimensionError("Poisson tensor needs dim >= 1");
    if (constant_) cached_ = entries_(Vector::Zero(static_cast<Eigen::Index>(dim_)));
}

Matrix PoissonTensor::entries(const Vector& x) const
{
    if (static_cast<std::size_t>(x.size()) != dim_)
        throw DimensionError("Poisson tensor of dim " + std::to_string(dim_) + " evaluated at a point of dim " +
                             std::to_string(x.size()));
    if (cached_) return *cached_;
    return entries_(x);
}

Vector PoissonTensor::apply(const Vector& x, const Vector& covector) const
{
    if (static_cast<std::size_t>(covector.size()) != dim_) throw DimensionError("covector dimension mismatch");
    if (cached_) return *cached_ * covector;
    return entries(x) * covector;
}

PoissonTensor canonical_poisson(std::size_t n_pairs, std::size_t n_casimirs)
{
    if (n_pairs == 0) throw DimensionError("canonical Poisson tensor needs at least one canonical pair");
    const std::size_t dim = 2 * n_pairs + n_casimirs;
    const auto np = static_cast<Eigen::Index>(n_pairs);
    auto entries = [dim, np](const Vector&) {
        Matrix J = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
        J.block(0, np, np, np) = Matrix::Identity(np, np);
        J.block(np, 0, np, np) = -Matrix::Identity(np, np);
        return J;
    };
    return PoissonTensor(dim, entries, n_casimirs, true);
}

double jacobi_residual(const PoissonTensor& J, const Vector& x)
{
    if (J.is_constant()) return 0.0;
    const auto dim = static_cast<Eigen::Index>(J.dim());
    const Matrix J0 = J.entries(x);
    // dJ[l](j,k) = d_l J^{jk}
    std::vector<Matrix> dJ;
    dJ.reserve(static_cast<std::size_t>(dim));
    Vector y = x;
    for (Eigen::Index l = 0; l < dim; ++l) {
        const double h = 1e-5 * std::max(1.0, std::abs(x[l]));
        y[l] = x[l] + h;
        const Matrix Jp = J.entries(y);
        y[l] = x[l] - h;
        const Matrix Jm = J.entries(y);
        y[l] = x[l];
        dJ.push_back((Jp - Jm) / (2.0 * h));
    }
    double worst = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j)
            for (Eigen::Index k = 0; k < dim; ++k) {
                double s = 0.0;
                for (Eigen::Index l = 0; l < dim; ++l) {
                    const auto& d = dJ[static_cast<std::size_t>(l)];
                    s += J0(i, l) * d(j, k) + J0(j, l) * d(k, i) + J0(k, l) * d(i, j);
                }
                worst = std::max(worst, std::abs(s));
            }
    return worst;
}

double jacobi_residual(const PoissonTensor& J, const Point& x) { return jacobi_residual(J, x.coords()); }

double antisymmetry_residual(const PoissonTensor& J, const Vector& x)
{
    const Matrix M = J.entries(x);
    return (M + M.transpose()).cwiseAbs().maxCoeff();
}

ScalarField poisson_bracket(const PoissonTensor& J, const ScalarField& f, const ScalarField& g)
{
    if (f.n() != g.n()) throw DimensionError("Poisson bracket of fields on different jet spaces");
    if (J.dim() != f.dim())
        throw DimensionError("Poisson tensor dim " + std::to_string(J.dim()) + " does not match field dim " +
                             std::to_string(f.dim()));
    return ScalarField::from_function(
        f.n(),
        [J, f, g](const Point& x, double t) {
            const Vector df = f.gradient(x, t);
            const Vector dg = g.gradient(x, t);
            return df.dot(J.apply(x.coords(), dg));
        },
        f.time_dependent() || g.time_dependent());
}

// ---------------------------------------------------------------------------
// Metrics

namespace {

void require_spd(const Matrix& g)
{
    if (g.rows() != g.cols()) throw NonSpdMetricError("metric is not square");
    if (!g.allFinite()) throw NonSpdMetricError("metric has non-finite entries");
    const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
    if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw NonSpdMetricError("metric is not symmetric");
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(g, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    if (!(lo > 0.0)) throw NonSpdMetricError("metric is not positive definite (min eigenvalue " + std::to_string(lo) + ")");
}

Matrix spd_inverse(const Matrix& g)
{
    const Eigen::LLT<Matrix> llt(g);
    if (llt.info() != Eigen::Success) throw NonSpdMetricError("Cholesky factorization of the metric failed");
    return llt.solve(Matrix::Identity(g.rows(), g.cols()));
}

}  // namespace

MetricField::MetricField(std::size_t n, EntriesFn entries) : n_(n), entries_(std::move(entries))
{
    if (n_ == 0) throw DimensionError("metric needs n >= 1");
}

MetricField MetricField::identity(std::size_t n)
{
    const auto k = static_cast<Eigen::Index>(n);
    MetricField m(n, [k](std::span<const double>) { return Matrix::Identity(k, k); });
    m.identity_ = true;
    m.constant_metric_ = Matrix::Identity(k, k);
    m.constant_inverse_ = Matrix::Identity(k, k);
    return m;
}

MetricField MetricField::constant(const Matrix& g)
{
    require_spd(g);
    MetricField m(static_cast<std::size_t>(g.rows()), [g](std::span<const double>) { return g; });
    m.constant_metric_ = g;
    m.constant_inverse_ = spd_inverse(g);
    m.identity_ = g.isIdentity(0.0);
    return m;
}

Matrix MetricField::metric(std::span<const double> q) const
{
    if (q.size() != n_) throw DimensionError("metric evaluated with a q-block of the wrong length");
    if (constant_metric_) return *constant_metric_;
    Matrix g = entries_(q);
    if (static_cast<std::size_t>(g.rows()) != n_) throw DimensionError("metric entries have the wrong size");
    require_spd(g);
    return g;
}

Matrix MetricField::inverse(std::span<const double> q) const
{
    if (constant_inverse_) {
        if (q.size() != n_) throw DimensionError("metric evaluated with a q-block of the wrong length");
        return *constant_inverse_;
    }
    return spd_inverse(metric(q));
}

double MetricField::min_eigenvalue(std::span<const double> q) const
{
    const Matrix g = constant_metric_ ? *constant_metric_ : entries_(q);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(g, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------------------
// Bivectors and 4-brackets

SymmetricBivector SymmetricBivector::fiber_metric(const MetricField& metric)
{
    const auto n = static_cast<Eigen::Index>(metric.n());
    if (metric.is_identity()) {
        return SymmetricBivector([n](const Vector&, const Vector& a, const Vector& b) {
            return a.segment(n, n).dot(b.segment(n, n));
        });
    }
    return SymmetricBivector([metric, n](const Vector& x, const Vector& a, const Vector& b) {
        const Matrix ginv = metric.inverse(std::span<const double>(x.data(), static_cast<std::size_t>(n)));
        return a.segment(n, n).dot(ginv * b.segment(n, n));
    });
}

SymmetricBivector SymmetricBivector::entropy_direction(std::size_t n)
{
    const auto iz = static_cast<Eigen::Index>(z_index(n));
    return SymmetricBivector([iz](const Vector&, const Vector& a, const Vector& b) { return a[iz] * b[iz]; });
}

SymmetricBivector SymmetricBivector::euclidean()
{
    return SymmetricBivector([](const Vector&, const Vector& a, const Vector& b) { return a.dot(b); });
}

double SymmetricBivector::apply(const ScalarField& f, const ScalarField& g, const Point& x, double t) const
{
    return fn_(x.coords(), f.gradient(x, t), g.gradient(x, t));
}

double FourBracket::apply(const ScalarField& f, const ScalarField& k, const ScalarField& g, const ScalarField& n,
                          const Point& x, double t) const
{
    return fn_(x.coords(), f.gradient(x, t), k.gradient(x, t), g.gradient(x, t), n.gradient(x, t));
}

std::vector<double> FourBracket::index_tensor(const Point& x) const
{
    const auto dim = static_cast<Eigen::Index>(x.dim());
    std::vector<Vector> unit;
    for (Eigen::Index i = 0; i < dim; ++i) unit.push_back(Vector::Unit(dim, i));
    std::vector<double> R;
    R.reserve(static_cast<std::size_t>(dim * dim * dim * dim));
    for (const auto& ei : unit)
        for (const auto& ej : unit)
            for (const auto& ek : unit)
                for (const auto& el : unit) R.push_back(fn_(x.coords(), ei, ej, ek, el));
    return R;
}

FourBracket kn_product(const SymmetricBivector& sigma, const SymmetricBivector& mu)
{
    return FourBracket([sigma, mu](const Vector& x, const Vector& df, const Vector& dk, const Vector& dg,
                                   const Vector& dn) {
        return sigma(x, df, dg) * mu(x, dk, dn) - sigma(x, df, dn) * mu(x, dk, dg) + mu(x, df, dg) * sigma(x, dk, dn) -
               mu(x, df, dn) * sigma(x, dk, dg);
    });
}

FourBracket raw_product(const SymmetricBivector& sigma, const SymmetricBivector& mu)
{
    return FourBracket([sigma, mu](const Vector& x, const Vector& df, const Vector& dk, const Vector& dg,
                                   const Vector& dn) { return sigma(x, df, dg) * mu(x, dk, dn); });
}

FourBracket jet_bundle_bracket(const MetricField& metric)
{
    return kn_product(SymmetricBivector::fiber_metric(metric), SymmetricBivector::entropy_direction(metric.n()));
}

SymmetryResiduals symmetry_residuals(const FourBracket& B, std::span<const ScalarField, 4> fs, const Point& x,
                                     double t)
{
    return symmetry_residuals(B, fs, fs[3], x, t);
}

SymmetryResiduals symmetry_residuals(const FourBracket& B, std::span<const ScalarField, 4> fs, const ScalarField& h,
                                     const Point& x, double t)
{
    const Vector& c = x.coords();
    const Vector f = fs[0].gradient(x, t);
    const Vector k = fs[1].gradient(x, t);
    const Vector g = fs[2].gradient(x, t);
    const Vector n = fs[3].gradient(x, t);
    const Vector dh = h.gradient(x, t);
    const Vector dfh = (fs[0] * h).gradient(x, t);

    const double base = B(c, f, k, g, n);
    SymmetryResiduals r{};
    r[0] = std::abs(base + B(c, k, f, g, n));
    r[1] = std::abs(base + B(c, f, k, n, g));
    r[2] = std::abs(base - B(c, g, n, f, k));
    r[3] = std::abs(base + B(c, f, g, n, k) + B(c, f, n, k, g));
    r[4] = std::abs(B(c, dfh, k, g, n) - fs[0](x, t) * B(c, dh, k, g, n) - B(c, f, k, g, n) * h(x, t));
    return r;
}

// ---------------------------------------------------------------------------
// Contact form and Reeb field

ContactForm::ContactForm(std::size_t dim, CoeffFn coefficients, DifferentialFn differential)
    : dim_(dim), coefficients_(std::move(coefficients)), differential_(std::move(differential))
{
    if (dim_ < 3 || dim_ % 2 == 0) throw DimensionError("contact form needs odd dimension >= 3");
}

ContactForm ContactForm::canonical(std::size_t n)
{
    if (n == 0) throw DimensionError("canonical contact form needs n >= 1");
    const auto k = static_cast<Eigen::Index>(n);
    const auto dim = 2 * k + 1;
    auto coeffs = [k, dim](const Vector& x) {
        Vector a = Vector::Zero(dim);
        a.head(k) = -x.segment(k, k);
        a[2 * k] = 1.0;
        return a;
    };
    auto differential = [k, dim](const Vector&) {
        Matrix W = Matrix::Zero(dim, dim);
        W.block(0, k, k, k) = Matrix::Identity(k, k);
        W.block(k, 0, k, k) = -Matrix::Identity(k, k);
        return W;
    };
    ContactForm form(2 * n + 1, coeffs, differential);
    form.canonical_ = true;
    return form;
}

Matrix ContactForm::differential(const Vector& x) const
{
    if (differential_) return differential_(x);
    const auto dim = static_cast<Eigen::Index>(dim_);
    Matrix D(dim, dim);  // D(i, j) = d_i a_j
    Vector y = x;
    for (Eigen::Index i = 0; i < dim; ++i) {
        const double h = std::max(1.0, std::abs(x[i])) / 131072.0;
        y[i] = x[i] + h;
        const Vector ap = coefficients_(y);
        y[i] = x[i] - h;
        const Vector am = coefficients_(y);
        y[i] = x[i];
        D.row(i) = ((ap - am) / (2.0 * h)).transpose();
    }
    return D - D.transpose();
}

Vector reeb_field(const ContactForm& alpha, const Vector& x)
{
    if (static_cast<std::size_t>(x.size()) != alpha.dim()) throw DimensionError("point dimension does not match contact form");
    const auto dim = static_cast<Eigen::Index>(alpha.dim());
    if (alpha.is_canonical()) return Vector::Unit(dim, dim - 1);

    const Vector a = alpha.coefficients(x);
    const Matrix W = alpha.differential(x);
    // [W a; a^T 0] (R, lambda) = (0, 1); nonsingular exactly when alpha ^ (d alpha)^n != 0
    Matrix M = Matrix::Zero(dim + 1, dim + 1);
    M.topLeftCorner(dim, dim) = W;
    M.topRightCorner(dim, 1) = a;
    M.bottomLeftCorner(1, dim) = a.transpose();
    Vector rhs = Vector::Zero(dim + 1);
    rhs[dim] = 1.0;

    Eigen::FullPivLU<Matrix> lu(M);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible())
        throw ContactDegeneracyError("contact condition violated: Reeb system is singular (rank " +
                                     std::to_string(lu.rank()) + " of " + std::to_string(dim + 1) + ")");
    const Vector sol = lu.solve(rhs);
    return sol.head(dim);
}

Vector reeb_field(const ContactForm& alpha, const Point& x) { return reeb_field(alpha, x.coords()); }

}  // namespace jetflow
