#pragma once

// Subcommands of the jetflow tool: simulate, verify, compare.

#include "jetflow/config.hpp"
#include "jetflow/output.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace jetflow::cli {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int error = 1;
inline constexpr int violation = 2;
}  // namespace exit_code

struct CommandOptions {
    std::optional<std::string> format;  // csv | json, overrides output.format
    std::optional<std::string> output;  // overrides output.path
    /// simulate: entropy slack; compare: divergence tolerance; verify: residual threshold.
    std::optional<double> slack;
    unsigned long long seed = 1;
    std::size_t points = 100;
    bool sweep = false;
    std::size_t jobs = 0;  // 0 = hardware concurrency
};

struct SimulationSummary {
    std::string system;
    Formalism formalism = Formalism::poisson;
    std::size_t samples = 0;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
    std::size_t rhs_evaluations = 0;
    double final_energy_drift = 0.0;    // |H(t1) - H(t0)|
    double max_energy_residual = 0.0;   // max |H - H_pred|
    std::optional<EnergyReport> energy;
    std::string energy_note;            // why the energy check was skipped
    EntropyReport entropy;
    double min_entropy_increment = 0.0;
    /// Entropy decrease counts as a violation for metriplectic systems only.
    bool entropy_enforced = false;

    [[nodiscard]] bool violation() const;
};

struct SimulationResult {
    Trajectory trajectory;
    SimulationSummary summary;
};

SimulationResult run_simulation(const RunConfig& config, const std::string& source, double entropy_slack);
void print_summary(std::ostream& out, const SimulationSummary& s);

struct ComparisonResult {
    Trajectory contact;
    Trajectory metriplectic;
    Table table;
    /// Lockstep integration: max (q, p) distance between the realizations.
    double max_divergence = 0.0;
    /// Same, with each realization integrated on its own step sequence.
    double independent_divergence = 0.0;
    /// H independent of q and t: metriplectic z' / contact z' compared with 2.
    bool kinetic = false;
    std::size_t ratio_samples = 0;
    double max_ratio_error = 0.0;
    double max_ratio_error_z0 = 0.0;  // restricted to samples with |z| <= 1e-12
    std::size_t ratio_samples_z0 = 0;
};

ComparisonResult run_comparison(const RunConfig& config, const std::string& source);

int cmd_simulate(const std::string& config_path, const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_verify(const std::string& config_path, const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_compare(const std::string& config_path, const CommandOptions& opts, std::ostream& out, std::ostream& err);

/// `base` with "_<param>-<value>" inserted before the extension.
std::string sweep_path(const std::string& base, const std::string& param, double value);

}  // namespace jetflow::cli
