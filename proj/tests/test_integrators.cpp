#include "jetflow/integrators.hpp"
#include "jetflow/systems.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace jetflow;

namespace {

IntegratorOptions dp45(double t1, double sample_dt = 0.0, double tol = 1e-10)
{
    IntegratorOptions o;
    o.method = Method::dp45;
    o.abs_tol = o.rel_tol = tol;
    o.t1 = t1;
    o.sample_dt = sample_dt;
    return o;
}

IntegratorOptions rk4(double t1, double step)
{
    IntegratorOptions o;
    o.method = Method::rk4;
    o.step = step;
    o.t1 = t1;
    return o;
}

double harmonic_error(double step)
{
    const auto spec = harmonic();
    const auto traj = integrate(spec.field(), Point({1.0}, {0.0}, 0.0), rk4(1.0, step));
    const Point& x = traj.states.back();
    return std::hypot(x.q()[0] - std::cos(1.0), x.p()[0] + std::sin(1.0));
}

}  // namespace

TEST_CASE("options validation")
{
    IntegratorOptions o;
    CHECK_NOTHROW(o.validate());
    o.t1 = o.t0;
    CHECK_THROWS_AS(o.validate(), std::invalid_argument);
    o = IntegratorOptions{};
    o.abs_tol = 0.0;
    CHECK_THROWS_AS(o.validate(), std::invalid_argument);
    o = IntegratorOptions{};
    o.step = -1.0;
    CHECK_THROWS_AS(o.validate(), std::invalid_argument);
    CHECK(parse_method("rk4") == Method::rk4);
    CHECK(parse_method("dp45") == Method::dp45);
    CHECK_FALSE(parse_method("euler").has_value());
}

TEST_CASE("harmonic oscillator returns after one period")
{
    const auto traj = integrate(harmonic().field(), Point({1.0}, {0.0}, 0.0), dp45(2 * std::numbers::pi));
    const Point& x = traj.states.back();
    CHECK(traj.times.back() == 2 * std::numbers::pi);
    CHECK(std::abs(x.q()[0] - 1.0) <= 1e-8);
    CHECK(std::abs(x.p()[0]) <= 1e-8);
    CHECK(x.z() == 0.0);
}

TEST_CASE("zero field keeps the state")
{
    const Point x0({0.3, -2.0}, {1.5, 0.25}, 7.0);
    for (Method m : {Method::rk4, Method::dp45}) {
        auto o = m == Method::rk4 ? rk4(3.0, 0.1) : dp45(3.0, 0.5);
        const auto traj = integrate(VectorField::zero(2), x0, o);
        for (const auto& x : traj.states) CHECK(x == x0);
    }
}

TEST_CASE("samples on a uniform grid")
{
    const auto traj = integrate(harmonic().field(), Point({1.0}, {0.0}, 0.0), dp45(1.05, 0.1));
    REQUIRE(traj.size() == 12);
    for (std::size_t k = 0; k + 1 < traj.size(); ++k) CHECK(traj.times[k] == 0.1 * static_cast<double>(k));
    CHECK(traj.times.back() == 1.05);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double t = traj.times[k];
        CHECK(std::abs(traj.states[k].q()[0] - std::cos(t)) <= 1e-8);
    }

    CHECK_THROWS_AS((void)integrate(harmonic().field(), Point({1.0}, {0.0}, 0.0),
                                    [] {
                                        auto o = rk4(1.0, 0.1);
                                        o.sample_dt = 0.15;
                                        return o;
                                    }()),
                    std::invalid_argument);
}

TEST_CASE("contact Duffing obeys the exponential decay law")
{
    const auto P = DuffingParams::decay_demo();
    const auto spec = duffing_contact(P);
    const auto traj = integrate(spec.field(), spec.initial, dp45(20.0, 0.05));
    const double H0 = traj.hamiltonian.front();
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k)
        worst = std::max(worst, std::abs(traj.hamiltonian[k] - H0 * std::exp(-P.delta * traj.times[k])) / std::abs(H0));
    CHECK(worst <= 1e-6);

    const auto report = check_energy_conservation(traj, 1e-6);
    CHECK(report.mode == EnergyCheckMode::exponential_decay);
    CHECK(report.decay_rate == P.delta);
    CHECK(report.pass);
    CHECK(report.max_deviation == doctest::Approx(worst).epsilon(1e-6));

    for (double r : traj.energy_residual) CHECK(r <= 1e-8);
}

TEST_CASE("RK4 converges at fourth order")
{
    const double e1 = harmonic_error(0.1);
    const double e2 = harmonic_error(0.05);
    const double e3 = harmonic_error(0.025);
    CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(2.0 / 16.0));
    CHECK(e2 / e3 == doctest::Approx(16.0).epsilon(2.0 / 16.0));
}

TEST_CASE("dp45 endpoint error shrinks with the tolerance")
{
    auto error = [](double tol) {
        const auto traj = integrate(harmonic().field(), Point({1.0}, {0.0}, 0.0), dp45(10.0, 0.0, tol));
        const Point& x = traj.states.back();
        return std::hypot(x.q()[0] - std::cos(10.0), x.p()[0] + std::sin(10.0));
    };
    const double loose = error(1e-6);
    const double tight = error(1e-9);
    CHECK(tight < loose / 100);
}

TEST_CASE("integration is deterministic")
{
    const auto spec = duffing_contact(DuffingParams::driven_demo());
    const auto a = integrate(spec.field(), spec.initial, dp45(30.0, 0.1));
    const auto b = integrate(spec.field(), spec.initial, dp45(30.0, 0.1));
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a.times[k] == b.times[k]);
        CHECK(a.states[k] == b.states[k]);
        CHECK(a.hamiltonian[k] == b.hamiltonian[k]);
    }
    CHECK(a.accepted_steps == b.accepted_steps);
    CHECK(a.rhs_evaluations == b.rhs_evaluations);
}

TEST_CASE("monitors match values recomputed from the states")
{
    for (const auto& spec : {duffing_contact(DuffingParams::driven_demo()), duffing_metriplectic(DuffingParams::driven_demo())}) {
        const auto V = spec.field();
        const auto traj = integrate(V, spec.initial, dp45(10.0, 0.1));
        REQUIRE(traj.field.has_value());
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const Point& x = traj.states[k];
            const double t = traj.times[k];
            CHECK(traj.hamiltonian[k] == spec.hamiltonian(x, t));
            CHECK(traj.entropy[k] == x.z());
            CHECK(traj.energy_rate[k] == energy_rate(V, x, t));
            CHECK(traj.entropy_rate[k] == entropy_rate(V, x, t));
        }
    }
}

TEST_CASE("poisson fields have no entropy rate")
{
    const auto traj = integrate(harmonic().field(), Point({1.0}, {0.0}, 0.0), rk4(1.0, 0.1));
    for (double v : traj.entropy_rate) CHECK(std::isnan(v));
    for (double v : traj.energy_rate) CHECK(v == 0.0);
}

TEST_CASE("step underflow raises a stiffness error")
{
    // q' = -1e16 q is stable for explicit steps only below ~3e-16
    const VectorField V(1, Formalism::poisson, [](const Point& x, double, Vector& out) {
        out.setZero(3);
        out[0] = -1e16 * x.q()[0];
    });
    try {
        (void)integrate(V, Point({1.0}, {0.0}, 0.0), dp45(1.0));
        FAIL("expected a stiffness error");
    } catch (const StiffnessError& e) {
        CHECK(e.step() < 1e-14);
        CHECK(e.time() < 1.0);
    }
}

TEST_CASE("an undefined right-hand side stops the adaptive integrator")
{
    const VectorField V(1, Formalism::poisson, [](const Point&, double t, Vector& out) {
        out.setZero(3);
        out[0] = t > 0.5 ? std::nan("") : 1.0;
    });
    try {
        (void)integrate(V, Point({0.0}, {0.0}, 0.0), dp45(1.0));
        FAIL("expected a divergence error");
    } catch (const DivergenceError& e) {
        CHECK(e.last_time() == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(e.last_state().q()[0] == doctest::Approx(e.last_time()).epsilon(1e-12));
    }
}

TEST_CASE("blow-up raises a divergence error with the last good state")
{
    // q' = q^2 leaves every bound before t = 1
    const VectorField V(1, Formalism::poisson, [](const Point& x, double, Vector& out) {
        out.setZero(3);
        out[0] = x.q()[0] * x.q()[0];
    });
    try {
        (void)integrate(V, Point({1.0}, {0.0}, 0.0), rk4(2.0, 0.25));
        FAIL("expected a divergence error");
    } catch (const DivergenceError& e) {
        CHECK(e.last_state().finite());
        CHECK(e.last_time() < 2.0);
    }
}

TEST_CASE("entropy monotonicity checks")
{
    const auto M = duffing_metriplectic(DuffingParams::driven_demo());
    const auto tm = integrate(M.field(), M.initial, dp45(50.0, 0.05));
    CHECK(check_monotone_entropy(tm, 1e-8).pass());

    // conservative contact oscillator: z' = p^2/2 - q^2/2 changes sign
    DuffingParams P;
    const auto C = duffing_contact(P);
    const auto tc = integrate(C.field(), C.initial, dp45(10.0, 0.05));
    const auto rc = check_monotone_entropy(tc, 1e-8);
    CHECK_FALSE(rc.pass());
    CHECK(rc.max_violation > 1e-3);

    const auto tz = integrate(VectorField::zero(1), Point({1.0}, {0.0}, 0.0), dp45(1.0, 0.1));
    CHECK(check_monotone_entropy(tz, 0.0).pass());
}

TEST_CASE("energy checks")
{
    const auto M = duffing_metriplectic(DuffingParams::decay_demo());
    const auto tm = integrate(M.field(), M.initial, dp45(100.0, 0.1));
    const auto rm = check_energy_conservation(tm, 1e-7 * std::abs(tm.hamiltonian.front()));
    CHECK(rm.mode == EnergyCheckMode::conservation);
    CHECK(rm.pass);

    const auto D = duffing_metriplectic(DuffingParams::driven_demo());
    const auto td = integrate(D.field(), D.initial, dp45(100.0, 0.01));
    const auto rd = check_energy_conservation(td, 1e-5);
    CHECK(rd.mode == EnergyCheckMode::rate_balance);
    CHECK(rd.pass);

    // H = z generates the zero flow on the jet Poisson tensor
    const auto Z = poisson_hamiltonian_field(canonical_poisson(1, 1), ScalarField::parse("z", 1));
    const auto tz = integrate(Z, Point({1.0}, {0.0}, 0.5), dp45(5.0, 0.5));
    const auto rz = check_energy_conservation(tz, 0.0);
    CHECK(rz.max_deviation == 0.0);
    CHECK(rz.pass);

    const auto t0 = integrate(VectorField::zero(1), Point({1.0}, {0.0}, 0.0), dp45(1.0, 0.1));
    CHECK_THROWS_AS((void)check_energy_conservation(t0, 1e-6), MissingGeneratorError);
}

TEST_CASE("lockstep integration shares the step sequence")
{
    const auto P = DuffingParams::driven_demo();
    const std::vector<VectorField> fields{duffing_contact(P).field(), duffing_metriplectic(P).field()};
    const std::vector<Point> x0{Point({1.0}, {0.0}, 0.0), Point({1.0}, {0.0}, 0.0)};
    const auto trajs = integrate_lockstep(fields, x0, dp45(20.0, 0.1));
    REQUIRE(trajs.size() == 2);
    CHECK(trajs[0].times == trajs[1].times);
    CHECK(trajs[0].accepted_steps == trajs[1].accepted_steps);
    CHECK(trajs[0].field->formalism() == Formalism::contact);
    CHECK(trajs[1].field->formalism() == Formalism::metriplectic);
}

TEST_CASE("stencils")
{
    const double h = 0.01;
    std::vector<double> v;
    for (int k = 0; k <= 200; ++k) v.push_back(std::sin(h * k));
    const auto d1 = stencil_first_derivative(v, h);
    const auto d2 = stencil_second_derivative(v, h);
    REQUIRE(d1.size() == v.size());
    for (std::size_t k : {std::size_t{0}, std::size_t{1}, v.size() - 2, v.size() - 1}) {
        CHECK(std::isnan(d1[k]));
        CHECK(std::isnan(d2[k]));
    }
    for (std::size_t k = 2; k + 2 < v.size(); ++k) {
        const double t = h * static_cast<double>(k);
        CHECK(std::abs(d1[k] - std::cos(t)) <= 1e-9);
        CHECK(std::abs(d2[k] + std::sin(t)) <= 1e-7);
    }

    CHECK(uniform_spacing({0.0, 0.5, 1.0, 1.5}) == 0.5);
    CHECK_FALSE(uniform_spacing({0.0, 0.5, 1.2}).has_value());
}
