#pragma once

// Sampling-based checks of bracket axioms and thermodynamic identities.

#include "jetflow/systems.hpp"

#include <random>
#include <string>
#include <vector>

namespace jetflow {

struct IdentityResult {
    std::string identity;
    double max_residual = 0.0;
    double threshold = 0.0;
    bool pass = true;
};

struct VerifyReport {
    std::vector<IdentityResult> results;
    [[nodiscard]] bool pass() const;
    [[nodiscard]] const IdentityResult* find(std::string_view identity) const;
};

struct VerifyOptions {
    unsigned long long seed = 1;
    std::size_t points = 100;
    double threshold = 1e-10;
    /// Sample box [-box, box] for every coordinate.
    double box = 1.0;
    double t_max = 10.0;
};

/// Random polynomial of total degree <= max_degree in q, p, z with
/// coefficients in [-1, 1]; `time_dependent` adds c q1 sin(t).
expr::Expr random_polynomial(std::size_t n, std::mt19937_64& rng, int max_degree = 4, bool time_dependent = false);
ScalarField random_observable(std::size_t n, std::mt19937_64& rng, int max_degree = 4, bool time_dependent = false);

/// Constant SPD matrix A^T A + I/2 with A entries uniform in [-1/2, 1/2].
Matrix random_spd(std::size_t n, std::mt19937_64& rng);

/// Five axiom residuals of B over `opts.points` random points, each with a
/// fresh quadruple of random observables plus a Leibniz factor.
VerifyReport verify_bracket(const FourBracket& B, std::size_t n, const VerifyOptions& opts);

/// Formalism-dependent suite:
///   poisson      -> jacobi, poisson_antisymmetry
///   contact      -> reeb contractions, energy law, entropy rate
///   metriplectic -> jacobi, poisson_antisymmetry, casimir, bracket axioms,
///                   energy_conservation, entropy_production, entropy_nonnegative
VerifyReport verify_system(const SystemSpec& spec, const VerifyOptions& opts);

}  // namespace jetflow
