#include "jetflow/systems.hpp"

#include <cmath>

namespace jetflow {

const char* const kDuffingHamiltonian =
    "p1^2/2 + alpha*q1^2/2 + beta*q1^4/4 - gamma*q1*sin(omega*t + phi) + delta*z";

DuffingParams DuffingParams::decay_demo()
{
    return {.delta = 0.2, .alpha = 1.0, .beta = 1.0, .gamma = 0.0, .omega = 1.0, .phi = 0.0};
}

DuffingParams DuffingParams::driven_demo()
{
    return {.delta = 0.3, .alpha = -1.0, .beta = 1.0, .gamma = 0.5, .omega = 1.2, .phi = 0.0};
}

DuffingParams DuffingParams::from_bindings(const expr::Bindings& b)
{
    DuffingParams P;
    for (const auto& [name, value] : b) {
        if (name == "delta") P.delta = value;
        else if (name == "alpha") P.alpha = value;
        else if (name == "beta") P.beta = value;
        else if (name == "gamma") P.gamma = value;
        else if (name == "omega") P.omega = value;
        else if (name == "phi") P.phi = value;
        else throw std::invalid_argument("unknown Duffing parameter '" + name + "'");
    }
    return P;
}

expr::Bindings DuffingParams::bindings() const
{
    return {{"alpha", alpha}, {"beta", beta}, {"delta", delta}, {"gamma", gamma}, {"omega", omega}, {"phi", phi}};
}

void DuffingParams::validate() const
{
    for (const auto& [name, value] : bindings())
        if (!std::isfinite(value)) throw std::invalid_argument("Duffing parameter " + name + " is not finite");
}

ScalarField duffing_hamiltonian(const DuffingParams& P)
{
    P.validate();
    return ScalarField::parse(kDuffingHamiltonian, 1, P.bindings());
}

std::string_view to_string(BracketKind k)
{
    switch (k) {
    case BracketKind::kulkarni_nomizu: return "kulkarni-nomizu";
    case BracketKind::raw_product: return "raw-product";
    }
    return "unknown";
}

std::optional<BracketKind> parse_bracket_kind(std::string_view name)
{
    if (name == "kulkarni-nomizu") return BracketKind::kulkarni_nomizu;
    if (name == "raw-product") return BracketKind::raw_product;
    return std::nullopt;
}

FourBracket make_bracket(BracketKind kind, const MetricField& metric)
{
    if (kind == BracketKind::raw_product)
        return raw_product(SymmetricBivector::fiber_metric(metric), SymmetricBivector::entropy_direction(metric.n()));
    return jet_bundle_bracket(metric);
}

void SystemSpec::validate() const
{
    if (hamiltonian.n() != n) throw DimensionError(name + ": Hamiltonian dimension does not match n");
    if (initial.n() != n) throw DimensionError(name + ": initial state dimension does not match n");
    if (entropy && entropy->n() != n) throw DimensionError(name + ": entropy dimension does not match n");
    if (metric && metric->n() != n) throw DimensionError(name + ": metric dimension does not match n");
    if (formalism != Formalism::metriplectic && (entropy || metric || bracket != BracketKind::kulkarni_nomizu))
        throw std::invalid_argument(name + ": entropy and metric apply to metriplectic systems only");
}

VectorField SystemSpec::field() const
{
    validate();
    switch (formalism) {
    case Formalism::poisson:
        return poisson_hamiltonian_field(canonical_poisson(n, 1), hamiltonian);
    case Formalism::contact:
        return contact_hamiltonian_field(hamiltonian, n);
    case Formalism::metriplectic: {
        const MetricField g = metric ? *metric : MetricField::identity(n);
        if (!entropy && bracket == BracketKind::kulkarni_nomizu) return jet_metriplectic_field(g, hamiltonian, n);
        const ScalarField S = entropy ? *entropy : ScalarField::coordinate(n, z_index(n));
        return metriplectic_field(canonical_poisson(n, 1), make_bracket(bracket, g), hamiltonian, S,
                                  CasimirPolicy::warn);
    }
    }
    throw std::logic_error("unknown formalism");
}

SystemSpec duffing_contact(const DuffingParams& P)
{
    return {.name = "duffing-contact",
            .formalism = Formalism::contact,
            .n = 1,
            .hamiltonian = duffing_hamiltonian(P),
            .entropy = std::nullopt,
            .metric = std::nullopt,
            .initial = Point({1.0}, {0.0}, 0.0)};
}

SystemSpec duffing_metriplectic(const DuffingParams& P)
{
    return {.name = "duffing-metriplectic",
            .formalism = Formalism::metriplectic,
            .n = 1,
            .hamiltonian = duffing_hamiltonian(P),
            .entropy = std::nullopt,
            .metric = MetricField::identity(1),
            .initial = Point({1.0}, {0.0}, 0.0)};
}

SystemSpec harmonic()
{
    return {.name = "harmonic",
            .formalism = Formalism::poisson,
            .n = 1,
            .hamiltonian = ScalarField::parse("(p1^2 + q1^2)/2", 1),
            .entropy = std::nullopt,
            .metric = std::nullopt,
            .initial = Point({1.0}, {0.0}, 0.0)};
}

ScalarField natural_hamiltonian(const expr::Expr& V, double z_coeff, std::size_t n, const expr::Bindings& parameters)
{
    using expr::BinaryOp;
    using expr::Expr;
    for (const auto& name : expr::free_variables(V)) {
        bool is_q = name.size() > 1 && name[0] == 'q';
        if (is_q) {
            const auto idx = std::stoul(name.substr(1));
            is_q = idx >= 1 && idx <= n;
        }
        if (!is_q) throw InvalidPotentialError("potential may depend on q1..q" + std::to_string(n) +
                                               " only, found '" + name + "'");
    }
    Expr H = V;
    for (std::size_t i = n; i-- > 0;) {
        const Expr kinetic = Expr::binary(
            BinaryOp::div,
            Expr::binary(BinaryOp::pow, Expr::variable("p" + std::to_string(i + 1)), Expr::constant(2.0)),
            Expr::constant(2.0));
        H = Expr::binary(BinaryOp::add, kinetic, H);
    }
    if (z_coeff != 0.0)
        H = Expr::binary(BinaryOp::add, H,
                         Expr::binary(BinaryOp::mul, Expr::constant(z_coeff), Expr::variable("z")));
    return ScalarField::from_expr(expr::simplify(H), n, parameters);
}

ScalarField natural_hamiltonian(std::string_view V, double z_coeff, std::size_t n, const expr::Bindings& parameters)
{
    std::vector<std::string> names;
    for (const auto& [name, value] : parameters) names.push_back(name);
    return natural_hamiltonian(expr::parse(V, expr::Alphabet::jet(n, std::move(names))), z_coeff, n, parameters);
}

SystemSpec natural(const ScalarField& H, Formalism formalism)
{
    SystemSpec spec{.name = "natural",
                    .formalism = formalism,
                    .n = H.n(),
                    .hamiltonian = H,
                    .entropy = std::nullopt,
                    .metric = std::nullopt,
                    .initial = Point(H.n())};
    if (formalism == Formalism::metriplectic) spec.metric = MetricField::identity(H.n());
    spec.initial.q()[0] = 1.0;
    return spec;
}

double legendre_lagrangian(const ScalarField& H, const Point& x, double t)
{
    const Vector Hp = H.fiber_derivative(x, t);
    double L = -H(x, t);
    const auto p = x.p();
    for (std::size_t i = 0; i < p.size(); ++i) L += p[i] * Hp[static_cast<Eigen::Index>(i)];
    return L;
}

const std::vector<std::string>& preset_names()
{
    static const std::vector<std::string> names{"duffing-contact", "duffing-metriplectic", "harmonic", "natural"};
    return names;
}

}  // namespace jetflow
