#include "jetflow/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace jetflow {

bool VerifyReport::pass() const
{
    return std::all_of(results.begin(), results.end(), [](const IdentityResult& r) { return r.pass; });
}

const IdentityResult* VerifyReport::find(std::string_view identity) const
{
    for (const auto& r : results)
        if (r.identity == identity) return &r;
    return nullptr;
}

expr::Expr random_polynomial(std::size_t n, std::mt19937_64& rng, int max_degree, bool time_dependent)
{
    using expr::BinaryOp;
    using expr::Expr;
    const auto names = expr::Alphabet::jet(n).variables;  // last entry is t
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    std::uniform_int_distribution<int> terms(1, 6);
    std::uniform_int_distribution<int> degree(0, max_degree);
    std::uniform_int_distribution<std::size_t> var(0, 2 * n);

    Expr sum = Expr::constant(0.0);
    const int count = terms(rng);
    for (int i = 0; i < count; ++i) {
        Expr term = Expr::constant(coeff(rng));
        const int d = degree(rng);
        for (int k = 0; k < d; ++k) term = Expr::binary(BinaryOp::mul, term, Expr::variable(names[var(rng)]));
        sum = Expr::binary(BinaryOp::add, sum, term);
    }
    if (time_dependent) {
        const Expr drive = Expr::binary(BinaryOp::mul, Expr::constant(coeff(rng)),
                                        Expr::binary(BinaryOp::mul, Expr::variable("q1"),
                                                     Expr::unary(expr::UnaryOp::sin, Expr::variable("t"))));
        sum = Expr::binary(BinaryOp::add, sum, drive);
    }
    return expr::simplify(sum);
}

ScalarField random_observable(std::size_t n, std::mt19937_64& rng, int max_degree, bool time_dependent)
{
    return ScalarField::from_expr(random_polynomial(n, rng, max_degree, time_dependent), n);
}

Matrix random_spd(std::size_t n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    const auto k = static_cast<Eigen::Index>(n);
    Matrix A(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j) A(i, j) = u(rng);
    Matrix g = A.transpose() * A + 0.5 * Matrix::Identity(k, k);
    return 0.5 * (g + g.transpose());
}

namespace {

class Accumulator {
public:
    Accumulator(std::string identity, double threshold) : result_{std::move(identity), 0.0, threshold, true} {}

    void add(double residual)
    {
        if (!(residual <= result_.max_residual)) result_.max_residual = residual;  // NaN propagates
    }

    IdentityResult finish()
    {
        result_.pass = result_.max_residual <= result_.threshold;
        return result_;
    }

private:
    IdentityResult result_;
};

Point random_point(std::size_t n, std::mt19937_64& rng, double box)
{
    std::uniform_real_distribution<double> u(-box, box);
    Point x(n);
    Vector& c = x.coords();
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = u(rng);
    return x;
}

void append(VerifyReport& into, const VerifyReport& from)
{
    into.results.insert(into.results.end(), from.results.begin(), from.results.end());
}

VerifyReport poisson_suite(const PoissonTensor& J, std::size_t n, const VerifyOptions& opts, std::mt19937_64& rng)
{
    Accumulator jacobi("jacobi", opts.threshold);
    Accumulator antisym("poisson_antisymmetry", opts.threshold);
    for (std::size_t i = 0; i < opts.points; ++i) {
        const Point x = random_point(n, rng, opts.box);
        jacobi.add(jacobi_residual(J, x));
        antisym.add(antisymmetry_residual(J, x.coords()));
    }
    VerifyReport report;
    report.results.push_back(jacobi.finish());
    report.results.push_back(antisym.finish());
    return report;
}

}  // namespace

VerifyReport verify_bracket(const FourBracket& B, std::size_t n, const VerifyOptions& opts)
{
    static constexpr std::array<const char*, 5> names{"bracket_antisymmetry_12", "bracket_antisymmetry_34",
                                                      "bracket_pair_exchange", "bracket_cyclic",
                                                      "bracket_leibniz"};
    std::mt19937_64 rng(opts.seed);
    std::vector<Accumulator> acc;
    for (const char* name : names) acc.emplace_back(name, opts.threshold);
    std::uniform_real_distribution<double> time(0.0, opts.t_max);
    for (std::size_t i = 0; i < opts.points; ++i) {
        const std::array<ScalarField, 4> fs{random_observable(n, rng), random_observable(n, rng),
                                            random_observable(n, rng), random_observable(n, rng)};
        const ScalarField h = random_observable(n, rng);
        const Point x = random_point(n, rng, opts.box);
        const auto r = symmetry_residuals(B, std::span<const ScalarField, 4>(fs), h, x, time(rng));
        for (std::size_t k = 0; k < r.size(); ++k) acc[k].add(r[k]);
    }
    VerifyReport report;
    for (auto& a : acc) report.results.push_back(a.finish());
    return report;
}

VerifyReport verify_system(const SystemSpec& spec, const VerifyOptions& opts)
{
    const VectorField V = spec.field();
    const std::size_t n = spec.n;
    const double tol = opts.threshold;
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> time(0.0, opts.t_max);
    VerifyReport report;

    switch (spec.formalism) {
    case Formalism::poisson:
        append(report, poisson_suite(canonical_poisson(n, 1), n, opts, rng));
        break;

    case Formalism::contact: {
        const ContactForm alpha = ContactForm::canonical(n);
        Accumulator reeb_alpha("reeb_contraction_alpha", tol);
        Accumulator reeb_dalpha("reeb_contraction_dalpha", tol);
        Accumulator energy("contact_energy_law", tol);
        Accumulator entropy("contact_entropy_rate", tol);
        for (std::size_t i = 0; i < opts.points; ++i) {
            const Point x = random_point(n, rng, opts.box);
            const double t = time(rng);
            const Vector R = reeb_field(alpha, x);
            reeb_alpha.add(std::abs(alpha.coefficients(x.coords()).dot(R) - 1.0));
            reeb_dalpha.add((alpha.differential(x.coords()) * R).cwiseAbs().maxCoeff());
            energy.add(std::abs(chain_rule_energy_rate(V, x, t) - energy_rate(V, x, t)));
            entropy.add(std::abs(V(x, t)[static_cast<Eigen::Index>(z_index(n))] - entropy_rate(V, x, t)));
        }
        for (auto* a : {&reeb_alpha, &reeb_dalpha, &energy, &entropy}) report.results.push_back(a->finish());
        break;
    }

    case Formalism::metriplectic: {
        const PoissonTensor J = canonical_poisson(n, 1);
        append(report, poisson_suite(J, n, opts, rng));
        const ScalarField S = spec.entropy ? *spec.entropy : ScalarField::coordinate(n, z_index(n));
        const MetricField g = spec.metric ? *spec.metric : MetricField::identity(n);
        const FourBracket B = make_bracket(spec.bracket, g);

        Accumulator casimir("casimir", tol);
        casimir.add(casimir_residual(J, S, opts.seed));
        report.results.push_back(casimir.finish());

        VerifyOptions bracket_opts = opts;
        bracket_opts.seed = opts.seed + 1;
        append(report, verify_bracket(B, n, bracket_opts));

        Accumulator degeneracy("energy_degeneracy", tol);        // (H,H;S,H)
        Accumulator conservation("energy_conservation", tol);    // grad H . V - H_t
        Accumulator production("entropy_production", tol);       // (S,H;S,H) vs closed form and grad S . V
        Accumulator nonnegative("entropy_nonnegative", tol);     // max(0, -(S,H;S,H))
        const ScalarField& H = spec.hamiltonian;
        for (std::size_t i = 0; i < opts.points; ++i) {
            const Point x = random_point(n, rng, opts.box);
            const double t = time(rng);
            const Vector dH = H.gradient(x, t);
            const Vector dS = S.gradient(x, t);
            const Vector& c = x.coords();
            degeneracy.add(std::abs(B(c, dH, dH, dS, dH)));
            conservation.add(std::abs(chain_rule_energy_rate(V, x, t) - H.partial_t(x, t)));
            const double sdot = B(c, dS, dH, dS, dH);
            production.add(std::max(std::abs(sdot - entropy_rate(V, x, t)), std::abs(dS.dot(V(x, t)) - sdot)));
            nonnegative.add(std::max(0.0, -sdot));
        }
        for (auto* a : {&degeneracy, &conservation, &production, &nonnegative}) report.results.push_back(a->finish());
        break;
    }
    }
    return report;
}

}  // namespace jetflow
