#include "jetflow/fields.hpp"

#include <cmath>
#include <iostream>
#include <random>
#include <string>

namespace jetflow {

std::string_view to_string(Formalism f)
{
    switch (f) {
    case Formalism::poisson: return "poisson";
    case Formalism::contact: return "contact";
    case Formalism::metriplectic: return "metriplectic";
    }
    return "unknown";
}

std::optional<Formalism> parse_formalism(std::string_view name)
{
    if (name == "poisson") return Formalism::poisson;
    if (name == "contact") return Formalism::contact;
    if (name == "metriplectic") return Formalism::metriplectic;
    return std::nullopt;
}

VectorField::VectorField(std::size_t n, Formalism formalism, Rhs rhs, Generator generator)
    : n_(n), formalism_(formalism), rhs_(std::move(rhs)), generator_(std::move(generator))
{
    if (n_ == 0) throw DimensionError("vector field needs n >= 1");
}

VectorField VectorField::zero(std::size_t n, Formalism formalism)
{
    const auto dim = static_cast<Eigen::Index>(2 * n + 1);
    return VectorField(n, formalism, [dim](const Point&, double, Vector& out) { out = Vector::Zero(dim); });
}

Vector VectorField::operator()(const Point& x, double t) const
{
    if (x.n() != n_) throw DimensionError("point dimension does not match vector field");
    Vector out;
    rhs_(x, t, out);
    return out;
}

namespace {

void require_match(const ScalarField& H, std::size_t n, const char* what)
{
    if (H.n() != n) throw DimensionError(std::string(what) + ": Hamiltonian lives on a different jet space");
}

const ScalarField& hamiltonian_of(const VectorField& V)
{
    if (!V.generator().hamiltonian) throw MissingGeneratorError("vector field carries no Hamiltonian");
    return *V.generator().hamiltonian;
}

}  // namespace

VectorField poisson_hamiltonian_field(const PoissonTensor& J, const ScalarField& H)
{
    if (J.dim() != H.dim())
        throw DimensionError("Poisson tensor dim " + std::to_string(J.dim()) + " does not match Hamiltonian dim " +
                             std::to_string(H.dim()));
    Generator gen;
    gen.hamiltonian = H;
    gen.poisson = J;
    return VectorField(
        H.n(), Formalism::poisson,
        [J, H](const Point& x, double t, Vector& out) {
            Vector dH;
            H.gradient(x.coords(), t, dH);
            out = J.apply(x.coords(), dH);
        },
        std::move(gen));
}

VectorField contact_hamiltonian_field(const ScalarField& H, std::size_t n)
{
    require_match(H, n, "contact_hamiltonian_field");
    Generator gen;
    gen.hamiltonian = H;
    const auto k = static_cast<Eigen::Index>(n);
    return VectorField(
        n, Formalism::contact,
        [H, k](const Point& x, double t, Vector& out) {
            const Vector& c = x.coords();
            Vector dH;
            H.gradient(c, t, dH);
            const double Hz = dH[2 * k];
            const auto p = c.segment(k, k);
            const auto Hq = dH.head(k);
            const Vector Hp = dH.segment(k, k);
            out.resize(2 * k + 1);
            out.head(k) = Hp;
            out.segment(k, k) = -Hq - p * Hz;
            out[2 * k] = -H.value(c, t) + p.dot(Hp);
        },
        std::move(gen));
}

double casimir_residual(const PoissonTensor& J, const ScalarField& S, unsigned long long seed)
{
    if (J.dim() != S.dim()) throw DimensionError("entropy and Poisson tensor dimensions differ");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> point(-2.0, 2.0);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    const auto dim = static_cast<Eigen::Index>(J.dim());
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        Vector x(dim);
        for (Eigen::Index k = 0; k < dim; ++k) x[k] = point(rng);
        const double t = point(rng);
        Vector dS;
        S.gradient(x, t, dS);
        const Vector v = J.apply(x, dS);
        for (int j = 0; j < 20; ++j) {
            Vector df(dim);
            for (Eigen::Index k = 0; k < dim; ++k) df[k] = coeff(rng);
            worst = std::max(worst, std::abs(df.dot(v)));
        }
    }
    return worst;
}

VectorField metriplectic_field(const PoissonTensor& J, const FourBracket& B, const ScalarField& H,
                               const ScalarField& S, CasimirPolicy policy)
{
    if (H.n() != S.n()) throw DimensionError("Hamiltonian and entropy live on different jet spaces");
    if (J.dim() != H.dim()) throw DimensionError("Poisson tensor dimension does not match the Hamiltonian");
    if (policy != CasimirPolicy::ignore) {
        const double r = casimir_residual(J, S);
        if (r > 1e-10) {
            const std::string msg = "entropy is not a Casimir of the Poisson tensor (max |{f,S}| = " +
                                    std::to_string(r) + ")";
            if (policy == CasimirPolicy::error) throw CasimirError(msg);
            std::cerr << "warning: " << msg << '\n';
        }
    }
    Generator gen;
    gen.hamiltonian = H;
    gen.entropy = S;
    gen.poisson = J;
    gen.bracket = B;
    const auto dim = static_cast<Eigen::Index>(H.dim());
    return VectorField(
        H.n(), Formalism::metriplectic,
        [J, B, H, S, dim](const Point& x, double t, Vector& out) {
            const Vector& c = x.coords();
            Vector dH;
            Vector dS;
            H.gradient(c, t, dH);
            S.gradient(c, t, dS);
            out = J.apply(c, dH);
            for (Eigen::Index i = 0; i < dim; ++i) out[i] += B(c, Vector::Unit(dim, i), dH, dS, dH);
        },
        std::move(gen));
}

VectorField jet_metriplectic_field(const MetricField& metric, const ScalarField& H, std::size_t n)
{
    require_match(H, n, "jet_metriplectic_field");
    if (metric.n() != n) throw DimensionError("metric dimension does not match n");
    Generator gen;
    gen.hamiltonian = H;
    gen.entropy = ScalarField::coordinate(n, z_index(n));
    gen.poisson = canonical_poisson(n, 1);
    gen.bracket = jet_bundle_bracket(metric);
    gen.metric = metric;
    const auto k = static_cast<Eigen::Index>(n);
    return VectorField(
        n, Formalism::metriplectic,
        [metric, H, k](const Point& x, double t, Vector& out) {
            const Vector& c = x.coords();
            Vector dH;
            H.gradient(c, t, dH);
            const double Hz = dH[2 * k];
            const auto Hq = dH.head(k);
            const Vector Hp = dH.segment(k, k);
            out.resize(2 * k + 1);
            out.head(k) = Hp;
            if (metric.is_identity()) {
                out.segment(k, k) = -Hq - Hp * Hz;
                out[2 * k] = Hp.dot(Hp);
            } else {
                const Vector sharp = metric.inverse(x.q()) * Hp;  // g^{kj} H_{p_j}
                out.segment(k, k) = -Hq - sharp * Hz;
                out[2 * k] = Hp.dot(sharp);
            }
        },
        std::move(gen));
}

Vector hamiltonian_part(const VectorField& V, const Point& x, double t)
{
    const auto& gen = V.generator();
    if (!gen.poisson) throw MissingGeneratorError("vector field carries no Poisson tensor");
    return gen.poisson->apply(x.coords(), hamiltonian_of(V).gradient(x, t));
}

Vector dissipative_part(const VectorField& V, const Point& x, double t)
{
    return V(x, t) - hamiltonian_part(V, x, t);
}

double energy_rate(const VectorField& V, const Point& x, double t)
{
    const ScalarField& H = hamiltonian_of(V);
    const double Ht = H.partial_t(x, t);
    switch (V.formalism()) {
    case Formalism::poisson:
    case Formalism::metriplectic:
        return Ht;
    case Formalism::contact: {
        const double Hz = H.gradient(x, t)[static_cast<Eigen::Index>(z_index(V.n()))];
        return -H(x, t) * Hz + Ht;
    }
    }
    return Ht;
}

double chain_rule_energy_rate(const VectorField& V, const Point& x, double t)
{
    const ScalarField& H = hamiltonian_of(V);
    return H.gradient(x, t).dot(V(x, t)) + H.partial_t(x, t);
}

double entropy_rate(const VectorField& V, const Point& x, double t)
{
    const auto& gen = V.generator();
    const auto k = static_cast<Eigen::Index>(V.n());
    switch (V.formalism()) {
    case Formalism::poisson:
        throw MissingGeneratorError("poisson vector fields carry no entropy");
    case Formalism::contact: {
        const ScalarField& H = hamiltonian_of(V);
        const Vector dH = H.gradient(x, t);
        return -H(x, t) + x.coords().segment(k, k).dot(dH.segment(k, k));
    }
    case Formalism::metriplectic: {
        const ScalarField& H = hamiltonian_of(V);
        const Vector dH = H.gradient(x, t);
        if (gen.metric) {
            const Vector Hp = dH.segment(k, k);
            if (gen.metric->is_identity()) return Hp.dot(Hp);
            return Hp.dot(gen.metric->inverse(x.q()) * Hp);
        }
        if (!gen.entropy || !gen.bracket) throw MissingGeneratorError("metriplectic field lacks entropy or bracket");
        const Vector dS = gen.entropy->gradient(x, t);
        return (*gen.bracket)(x.coords(), dS, dH, dS, dH);
    }
    }
    return 0.0;
}

}  // namespace jetflow
