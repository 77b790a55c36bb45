#pragma once

// Ready-made systems: the Duffing oscillator in contact and metriplectic form,
// the harmonic oscillator and natural Hamiltonians p^2/2 + V(q) (+ c z).

#include "jetflow/fields.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace jetflow {

/// Coefficients of q'' + delta q' + alpha q + beta q^3 = gamma sin(omega t + phi).
struct DuffingParams {
    double delta = 0.0;
    double alpha = 1.0;
    double beta = 0.0;
    double gamma = 0.0;
    double omega = 1.0;
    double phi = 0.0;

    /// delta = 0.2, alpha = 1, beta = 1, gamma = 0.
    static DuffingParams decay_demo();
    /// delta = 0.3, alpha = -1, beta = 1, gamma = 0.5, omega = 1.2, phi = 0.
    static DuffingParams driven_demo();
    /// Reads the six names from `b`; missing names keep their defaults,
    /// unknown names throw std::invalid_argument.
    static DuffingParams from_bindings(const expr::Bindings& b);

    [[nodiscard]] expr::Bindings bindings() const;
    /// Throws std::invalid_argument on a non-finite entry.
    void validate() const;
    /// False for negative damping (allowed, but anti-dissipative).
    [[nodiscard]] bool physical() const { return delta >= 0.0; }

    friend bool operator==(const DuffingParams&, const DuffingParams&) = default;
};

/// H = p^2/2 + alpha q^2/2 + beta q^4/4 - gamma q sin(omega t + phi) + delta z.
ScalarField duffing_hamiltonian(const DuffingParams& P);

/// The Hamiltonian source string used by duffing_hamiltonian.
extern const char* const kDuffingHamiltonian;

/// How the metriplectic 4-bracket is assembled from the fiber metric and the z direction.
enum class BracketKind { kulkarni_nomizu, raw_product };

std::string_view to_string(BracketKind k);
std::optional<BracketKind> parse_bracket_kind(std::string_view name);
FourBracket make_bracket(BracketKind kind, const MetricField& metric);

struct SystemSpec {
    std::string name;
    Formalism formalism = Formalism::contact;
    std::size_t n = 1;
    ScalarField hamiltonian;
    /// Metriplectic only; nullopt means S = z.
    std::optional<ScalarField> entropy;
    /// Metriplectic only; fiber metric of the jet-bundle bracket.
    std::optional<MetricField> metric;
    BracketKind bracket = BracketKind::kulkarni_nomizu;
    Point initial;

    /// Throws DimensionError or std::invalid_argument when components disagree.
    void validate() const;
    /// Builds the vector field for this system.
    [[nodiscard]] VectorField field() const;
};

SystemSpec duffing_contact(const DuffingParams& P);
SystemSpec duffing_metriplectic(const DuffingParams& P);
/// H = (p^2 + q^2)/2 on the canonical Poisson tensor with z as a Casimir.
SystemSpec harmonic();

class InvalidPotentialError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// H = sum p_i^2/2 + V(q) + z_coeff z. V may reference q1..qn and parameters only.
ScalarField natural_hamiltonian(const expr::Expr& V, double z_coeff, std::size_t n,
                                const expr::Bindings& parameters = {});
/// Parses V against the jet alphabet and the given parameter names first.
ScalarField natural_hamiltonian(std::string_view V, double z_coeff, std::size_t n,
                                const expr::Bindings& parameters = {});

SystemSpec natural(const ScalarField& H, Formalism formalism);

/// L = sum p_i dH/dp_i - H.
double legendre_lagrangian(const ScalarField& H, const Point& x, double t);

/// Preset names understood by the CLI.
const std::vector<std::string>& preset_names();

}  // namespace jetflow
