#pragma once

// Flow generators on the jet space: Poisson-Hamiltonian, contact Hamiltonian
// and metriplectic vector fields, plus closed-form energy and entropy rates.

#include "jetflow/structures.hpp"

#include <functional>
#include <optional>
#include <string_view>

namespace jetflow {

enum class Formalism { poisson, contact, metriplectic };

std::string_view to_string(Formalism f);
std::optional<Formalism> parse_formalism(std::string_view name);

/// Data a vector field was generated from; monitors read it.
struct Generator {
    std::optional<ScalarField> hamiltonian;
    std::optional<ScalarField> entropy;
    std::optional<PoissonTensor> poisson;
    std::optional<FourBracket> bracket;
    /// Set for jet-bundle brackets with S = z; enables the closed-form entropy rate.
    std::optional<MetricField> metric;
};

class MissingGeneratorError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Right-hand side of an ODE on R^(2n+1), tagged with its formalism.
class VectorField {
public:
    using Rhs = std::function<void(const Point& x, double t, Vector& out)>;

    VectorField(std::size_t n, Formalism formalism, Rhs rhs, Generator generator = {});

    /// The zero field.
    static VectorField zero(std::size_t n, Formalism formalism = Formalism::poisson);

    [[nodiscard]] std::size_t n() const { return n_; }
    [[nodiscard]] std::size_t dim() const { return 2 * n_ + 1; }
    [[nodiscard]] Formalism formalism() const { return formalism_; }
    [[nodiscard]] const Generator& generator() const { return generator_; }

    [[nodiscard]] Vector operator()(const Point& x, double t) const;
    void evaluate(const Point& x, double t, Vector& out) const { rhs_(x, t, out); }

private:
    std::size_t n_;
    Formalism formalism_;
    Rhs rhs_;
    Generator generator_;
};

/// z'^i = J^{ij} dH/dz^j.
VectorField poisson_hamiltonian_field(const PoissonTensor& J, const ScalarField& H);

/// q' = H_p, p' = -H_q - p H_z, z' = -H + p.H_p.
VectorField contact_hamiltonian_field(const ScalarField& H, std::size_t n);

enum class CasimirPolicy { ignore, warn, error };

class CasimirError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Largest |{f, S}| over 20 random covectors at 20 random points in [-2, 2]^dim.
double casimir_residual(const PoissonTensor& J, const ScalarField& S, unsigned long long seed = 0x5eed);

/// z'^i = {z^i, H} + (z^i, H; S, H).
/// S is validated as a Casimir of J (threshold 1e-10); `policy` decides what a
/// failure does.
VectorField metriplectic_field(const PoissonTensor& J, const FourBracket& B, const ScalarField& H,
                               const ScalarField& S, CasimirPolicy policy = CasimirPolicy::warn);

/// Jet-bundle metriplectic flow with S = z:
///   q' = H_p,  p' = -H_q - g^{-1} H_p H_z,  z' = |H_p|_g^2.
VectorField jet_metriplectic_field(const MetricField& metric, const ScalarField& H, std::size_t n);

/// Hamiltonian part J dH of a field carrying a Poisson tensor.
Vector hamiltonian_part(const VectorField& V, const Point& x, double t);
/// rhs minus the Hamiltonian part.
Vector dissipative_part(const VectorField& V, const Point& x, double t);

/// Closed-form dH/dt: poisson and metriplectic give H_t; contact gives -H H_z + H_t.
double energy_rate(const VectorField& V, const Point& x, double t);
/// grad H . rhs + H_t, the chain-rule value energy_rate must match.
double chain_rule_energy_rate(const VectorField& V, const Point& x, double t);

/// Metriplectic: |H_p|_g^2 (or (S,H;S,H) for general brackets). Contact: -H + p.H_p.
/// Throws MissingGeneratorError for poisson fields.
double entropy_rate(const VectorField& V, const Point& x, double t);

}  // namespace jetflow
