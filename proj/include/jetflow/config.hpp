#pragma once

// Declarative run configuration (YAML) for the jetflow command-line tool.

#include "jetflow/integrators.hpp"
#include "jetflow/systems.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace jetflow::cli {

/// Configuration problem with the location it was found at.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& source, int line, const std::string& field, const std::string& message);
    /// 1-based; 0 when unknown.
    [[nodiscard]] int line() const noexcept { return line_; }
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    int line_;
    std::string field_;
};

struct SystemConfig {
    /// duffing-contact, duffing-metriplectic, harmonic, natural; empty for a custom system.
    std::string preset;
    /// Required for custom systems; optional override for harmonic and natural.
    std::optional<Formalism> formalism;
    std::size_t n = 1;
    std::string hamiltonian;  // custom
    std::string potential;    // natural: V(q)
    double z_coeff = 0.0;     // natural
    std::string entropy;      // custom metriplectic; empty means z
    /// nullopt means the identity metric.
    std::optional<Matrix> metric;
    BracketKind bracket = BracketKind::kulkarni_nomizu;
};

struct OutputConfig {
    /// Empty writes the trajectory to stdout.
    std::string path;
    std::string format = "csv";
    /// Write every stride-th sample.
    std::size_t stride = 1;
};

struct CheckConfig {
    /// Entropy decrease tolerated between samples; nullopt means 10 x the integrator tolerance.
    std::optional<double> entropy_slack;
    double energy_tol = 1e-6;
    /// compare: allowed (q, p) distance between the two realizations.
    double divergence_tol = 1e-8;
};

struct SweepConfig {
    std::string param;
    std::vector<double> values;
};

struct RunConfig {
    SystemConfig system;
    expr::Bindings params;
    /// Flat (q, p, z); nullopt uses the system default.
    std::optional<std::vector<double>> initial;
    IntegratorOptions integrator;
    OutputConfig output;
    CheckConfig checks;
    std::optional<SweepConfig> sweep;

    /// Line of each parsed field (dotted path), for later diagnostics.
    std::map<std::string, int, std::less<>> lines;

    [[nodiscard]] double entropy_slack() const;
    [[nodiscard]] int line_of(std::string_view field) const;
};

/// Parses YAML text. `source` names the document in diagnostics.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// YAML that parse_config maps back to an identical RunConfig.
std::string to_yaml(const RunConfig& config);

/// Builds the system; expression errors become ConfigErrors naming the field.
SystemSpec build_system(const RunConfig& config, const std::string& source = "<config>");
/// Initial point from the config or the system default.
Point initial_point(const RunConfig& config, const SystemSpec& spec);

}  // namespace jetflow::cli
