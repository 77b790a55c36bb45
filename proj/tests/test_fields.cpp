#include "support.hpp"

#include "jetflow/fields.hpp"
#include "jetflow/verify.hpp"

#include <doctest.h>

#include <random>

using namespace jetflow;
using jetflow::test::uniform;

namespace {

Point random_point(std::mt19937_64& rng, std::size_t n, double box = 1.0)
{
    Vector v(static_cast<Eigen::Index>(2 * n + 1));
    for (auto& x : v) x = uniform(rng, -box, box);
    return Point::from_flat(v);
}

const Point kOrigin1({0.0}, {1.0}, 0.0);

}  // namespace

TEST_CASE("Poisson-Hamiltonian field")
{
    const auto J = canonical_poisson(1, 0);
    const auto J1 = canonical_poisson(1, 1);
    const auto H = ScalarField::parse("p1^2/2 + q1^2/2", 1);

    const auto V = poisson_hamiltonian_field(J1, H);
    CHECK(V.formalism() == Formalism::poisson);
    CHECK(V(kOrigin1, 0.0) == Vector{{1.0, 0.0, 0.0}});

    std::mt19937_64 rng(2);
    for (int i = 0; i < 20; ++i) {
        const auto f = random_observable(1, rng, 4, true);
        CHECK(poisson_hamiltonian_field(J1, f)(random_point(rng, 1), uniform(rng, 0, 5))[2] == 0.0);
    }
    CHECK(poisson_hamiltonian_field(J1, ScalarField::parse("z", 1))(random_point(rng, 1), 0.0) == Vector::Zero(3));

    // a two-dimensional tensor cannot act on the three-dimensional jet space
    CHECK_THROWS_AS((void)poisson_hamiltonian_field(J, H), DimensionError);
}

TEST_CASE("contact Hamiltonian field")
{
    const auto V = contact_hamiltonian_field(ScalarField::parse("p1^2/2 + q1^2/2", 1), 1);
    CHECK(V(kOrigin1, 0.0) == Vector{{1.0, 0.0, 0.5}});

    const auto K = contact_hamiltonian_field(ScalarField::parse("p1^2/2 + z", 1), 1);
    CHECK(K(kOrigin1, 0.0) == Vector{{1.0, -1.0, 0.5}});

    // H_z = 0: z' is the Lagrangian p H_p - H
    std::mt19937_64 rng(3);
    const auto H = ScalarField::parse("p1^4/4 + p1*q1 + cos(q1)", 1);
    const auto W = contact_hamiltonian_field(H, 1);
    for (int i = 0; i < 20; ++i) {
        const Point x = random_point(rng, 1, 2.0);
        const double q = x.q()[0], p = x.p()[0];
        const double L = p * (p * p * p + q) - (p * p * p * p / 4 + p * q + std::cos(q));
        CHECK(W(x, 0.0)[2] == doctest::Approx(L).epsilon(1e-14));
    }
}

TEST_CASE("contact field in two degrees of freedom")
{
    // H = |p|^2/2 + q1 q2 + 0.3 z: q' = p, p' = -(q2, q1) - 0.3 p, z' = |p|^2/2 - q1 q2 - 0.3 z
    const auto V = contact_hamiltonian_field(ScalarField::parse("p1^2/2 + p2^2/2 + q1*q2 + 0.3*z", 2), 2);
    const Point x({0.5, -1.0}, {2.0, 0.25}, 0.7);
    const Vector r = V(x, 0.0);
    const double zdot = (4.0 + 0.0625) / 2 + 0.5 - 0.3 * 0.7;
    const Vector expected{{2.0, 0.25, 1.0 - 0.6, -0.5 - 0.075, zdot}};
    CHECK((r - expected).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("metriplectic field examples")
{
    const auto J = canonical_poisson(1, 1);
    const auto B = jet_bundle_bracket(MetricField::identity(1));
    const auto z = ScalarField::coordinate(1, 2);

    const auto V = metriplectic_field(J, B, ScalarField::parse("p1^2/2 + q1^2/2", 1), z);
    CHECK(V.formalism() == Formalism::metriplectic);
    CHECK(V(kOrigin1, 0.0) == Vector{{1.0, 0.0, 1.0}});

    const auto W = metriplectic_field(J, B, ScalarField::parse("p1^2/2 + 0.5*z", 1), z);
    CHECK(W(kOrigin1, 0.0) == Vector{{1.0, -0.5, 1.0}});

    std::mt19937_64 rng(4);
    const auto U = metriplectic_field(J, B, ScalarField::parse("q1^3 + z*q1 + sin(t)", 1), z);
    for (int i = 0; i < 20; ++i) {
        const Point x = random_point(rng, 1, 2.0);
        CHECK(dissipative_part(U, x, 0.4) == Vector::Zero(3));
    }
}

TEST_CASE("Casimir validation policy")
{
    const auto J = canonical_poisson(1, 1);
    const auto B = jet_bundle_bracket(MetricField::identity(1));
    const auto H = ScalarField::parse("p1^2/2", 1);
    const auto not_casimir = ScalarField::parse("q1 + z", 1);
    CHECK(casimir_residual(J, ScalarField::coordinate(1, 2)) == 0.0);
    CHECK(casimir_residual(J, not_casimir) > 1e-3);
    CHECK_THROWS_AS((void)metriplectic_field(J, B, H, not_casimir, CasimirPolicy::error), CasimirError);
    CHECK_NOTHROW((void)metriplectic_field(J, B, H, not_casimir, CasimirPolicy::ignore));
}

TEST_CASE("jet metriplectic field equals the bracket composition")
{
    std::mt19937_64 rng(5);
    for (std::size_t n = 1; n <= 3; ++n) {
        const MetricField g = n == 1 ? MetricField::identity(1) : MetricField::constant(random_spd(n, rng));
        const auto J = canonical_poisson(n, 1);
        const auto B = jet_bundle_bracket(g);
        const auto S = ScalarField::coordinate(n, 2 * n);
        for (int k = 0; k < 10; ++k) {
            const auto H = random_observable(n, rng, 4, true);
            const auto A = jet_metriplectic_field(g, H, n);
            const auto C = metriplectic_field(J, B, H, S, CasimirPolicy::ignore);
            for (int i = 0; i < 10; ++i) {
                const Point x = random_point(rng, n);
                const double t = uniform(rng, 0, 10);
                const Vector a = A(x, t), c = C(x, t);
                CHECK((a - c).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, c.cwiseAbs().maxCoeff()));
            }
        }
    }
}

TEST_CASE("jet metriplectic field with a scaled metric")
{
    // g_11 = 2: z' = g^11 p^2 = 1/2 and the damping uses g^11 as well
    Matrix G(1, 1);
    G << 2.0;
    const auto V = jet_metriplectic_field(MetricField::constant(G), ScalarField::parse("p1^2/2 + z", 1), 1);
    const Vector r = V(kOrigin1, 0.0);
    CHECK(r[0] == 1.0);
    CHECK(r[1] == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(r[2] == doctest::Approx(0.5).epsilon(1e-15));

    const auto W = jet_metriplectic_field(MetricField::identity(1), ScalarField::parse("q1^2 + z", 1), 1);
    const Vector w = W(Point({0.3}, {0.8}, 0.0), 0.0);
    CHECK(w[0] == 0.0);
    CHECK(w[2] == 0.0);
}

TEST_CASE("energy rate examples")
{
    const auto K = contact_hamiltonian_field(ScalarField::parse("p1^2/2 + z", 1), 1);
    CHECK(energy_rate(K, kOrigin1, 0.0) == -0.5);

    const auto C = contact_hamiltonian_field(ScalarField::parse("p1^2/2 + q1^4", 1), 1);
    CHECK(energy_rate(C, Point({0.7}, {0.2}, 1.0), 0.0) == 0.0);

    const auto M = jet_metriplectic_field(MetricField::identity(1), ScalarField::parse("p1^2/2 + q1^4 + 0.2*z", 1), 1);
    CHECK(energy_rate(M, Point({0.7}, {0.2}, 1.0), 0.0) == 0.0);

    const VectorField bare(1, Formalism::contact, [](const Point&, double, Vector& out) { out.setZero(3); });
    CHECK_THROWS_AS((void)energy_rate(bare, kOrigin1, 0.0), MissingGeneratorError);
}

TEST_CASE("energy rate matches the chain rule in every formalism")
{
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(trial % 2);
        const auto H = random_observable(n, rng, 4, true);
        const std::vector<VectorField> fields{
            poisson_hamiltonian_field(canonical_poisson(n, 1), H),
            contact_hamiltonian_field(H, n),
            jet_metriplectic_field(MetricField::identity(n), H, n),
        };
        for (const auto& V : fields)
            for (int i = 0; i < 100; ++i) {
                const Point x = random_point(rng, n);
                const double t = uniform(rng, 0, 10);
                const double chain = chain_rule_energy_rate(V, x, t);
                CHECK(std::abs(energy_rate(V, x, t) - chain) <= 1e-9 * std::max(1.0, std::abs(chain)));
            }
    }
}

TEST_CASE("entropy rate")
{
    const auto M = jet_metriplectic_field(MetricField::identity(1), ScalarField::parse("p1^2/2 + q1^4/4 + 0.3*z", 1), 1);
    CHECK(entropy_rate(M, Point({0.4}, {2.0}, 0.0), 0.0) == 4.0);

    const auto C = contact_hamiltonian_field(ScalarField::parse("p1^2/2 + q1^4/4", 1), 1);
    CHECK(entropy_rate(C, Point({1.0}, {2.0}, 0.0), 0.0) == 2.0 - 0.25);

    const auto P = poisson_hamiltonian_field(canonical_poisson(1, 1), ScalarField::parse("p1^2/2", 1));
    CHECK_THROWS_AS((void)entropy_rate(P, kOrigin1, 0.0), MissingGeneratorError);

    // never negative, also for driven Hamiltonians and general metrics
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(trial % 3);
        const MetricField g = MetricField::constant(random_spd(n, rng));
        const auto V = jet_metriplectic_field(g, random_observable(n, rng, 4, true), n);
        for (int i = 0; i < 100; ++i) {
            const Point x = random_point(rng, n, 2.0);
            CHECK(entropy_rate(V, x, uniform(rng, 0, 10)) >= -1e-12);
        }
    }
}

TEST_CASE("(H, H; S, H) vanishes for random Hamiltonians")
{
    std::mt19937_64 rng(8);
    const auto B = jet_bundle_bracket(MetricField::identity(1));
    const auto S = ScalarField::coordinate(1, 2);
    for (int k = 0; k < 10; ++k) {
        const auto H = random_observable(1, rng, 4, true);
        for (int i = 0; i < 10; ++i) CHECK(std::abs(B.apply(H, H, S, H, random_point(rng, 1), uniform(rng, 0, 5))) <= 1e-10);
    }
}

TEST_CASE("kinetic coincidence of the two z equations")
{
    // H = p^2/2: metriplectic z' = p^2 and contact z' = p^2/2 at every point
    const auto H = ScalarField::parse("p1^2/2", 1);
    const auto C = contact_hamiltonian_field(H, 1);
    const auto M = jet_metriplectic_field(MetricField::identity(1), H, 1);
    std::mt19937_64 rng(9);
    for (int i = 0; i < 100; ++i) {
        const Point x = random_point(rng, 1, 3.0);
        CHECK(M(x, 0.0)[2] == 2 * C(x, 0.0)[2]);
    }

    // with + z the contact equation picks up -z, so the factor 2 holds on z = 0
    // and the p equations agree everywhere
    const auto Hz = ScalarField::parse("p1^2/2 + z", 1);
    const auto Cz = contact_hamiltonian_field(Hz, 1);
    const auto Mz = jet_metriplectic_field(MetricField::identity(1), Hz, 1);
    for (int i = 0; i < 100; ++i) {
        Point x = random_point(rng, 1, 3.0);
        const Vector c = Cz(x, 0.0), m = Mz(x, 0.0);
        CHECK(c[1] == m[1]);
        CHECK(c[0] == m[0]);
        CHECK(c[2] == doctest::Approx(m[2] / 2 - x.z()).epsilon(1e-14));
        x.z() = 0.0;
        CHECK(Mz(x, 0.0)[2] == 2 * Cz(x, 0.0)[2]);
    }
}
