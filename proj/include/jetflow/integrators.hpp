#pragma once

// Explicit time stepping of VectorFields with per-sample invariant monitors.

#include "jetflow/fields.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace jetflow {

enum class Method { rk4, dp45 };

std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view name);

struct IntegratorOptions {
    Method method = Method::dp45;
    /// Fixed step for rk4 (shortened so that it divides [t0, t1]); initial step for dp45, 0 = automatic.
    double step = 1e-2;
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double t0 = 0.0;
    double t1 = 1.0;
    /// Uniform output spacing. dp45 uses its dense output; rk4 requires a multiple of the step.
    /// 0 records every (stride-th) step.
    double sample_dt = 0.0;
    std::size_t sample_stride = 1;
    std::size_t max_steps = 50'000'000;

    /// Throws std::invalid_argument on t1 <= t0, non-positive tolerances or step.
    void validate() const;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Point> states;
    // monitors, one entry per sample; NaN where the field has no such quantity
    std::vector<double> hamiltonian;
    std::vector<double> entropy;
    std::vector<double> energy_rate;
    std::vector<double> entropy_rate;
    /// |H(t) - H_pred(t)|, with H_pred integrated from the closed-form energy rate.
    std::vector<double> energy_residual;

    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
    std::size_t rhs_evaluations = 0;

    std::optional<VectorField> field;

    [[nodiscard]] std::size_t size() const { return times.size(); }
};

/// Step size fell below 1e-14 |t1 - t0|.
class StiffnessError : public std::runtime_error {
public:
    StiffnessError(const std::string& what, double time, double step)
        : std::runtime_error(what), time_(time), step_(step)
    {
    }
    [[nodiscard]] double time() const noexcept { return time_; }
    [[nodiscard]] double step() const noexcept { return step_; }

private:
    double time_;
    double step_;
};

/// The state became non-finite; carries the last good state.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, Point last_state, double last_time)
        : std::runtime_error(what), state_(std::move(last_state)), time_(last_time)
    {
    }
    [[nodiscard]] const Point& last_state() const noexcept { return state_; }
    [[nodiscard]] double last_time() const noexcept { return time_; }

private:
    Point state_;
    double time_;
};

/// Classic RK4 or Dormand-Prince 5(4) with PI step control (safety 0.9,
/// step factor clamped to [0.2, 5]) and its 4th-order continuous extension
/// for uniform sampling.
Trajectory integrate(const VectorField& V, const Point& x0, const IntegratorOptions& opts);

/// Integrates several fields as one product system, so every field sees the
/// same step sequence and sample times. Comparisons between the results then
/// measure differences of the fields rather than of the step-size histories.
std::vector<Trajectory> integrate_lockstep(std::span<const VectorField> fields, std::span<const Point> x0,
                                           const IntegratorOptions& opts);

struct EntropyReport {
    /// Index k of every pair (k, k+1) with z(t_{k+1}) < z(t_k) - slack.
    std::vector<std::size_t> violations;
    /// Largest decrease z(t_k) - z(t_{k+1}) observed (0 if z never decreases).
    double max_violation = 0.0;
    double slack = 0.0;
    [[nodiscard]] bool pass() const { return violations.empty(); }
};

EntropyReport check_monotone_entropy(const Trajectory& traj, double slack);

enum class EnergyCheckMode {
    /// max |H(t_k) - H(t_0)| (absolute)
    conservation,
    /// max |H(t_k) - H0 exp(-c (t_k - t0))| / |H0| for contact fields with constant H_z = c
    exponential_decay,
    /// max |stencil dH/dt - closed-form energy rate| at interior samples (absolute)
    rate_balance,
};

std::string_view to_string(EnergyCheckMode m);

struct EnergyReport {
    EnergyCheckMode mode = EnergyCheckMode::conservation;
    double max_deviation = 0.0;
    double tolerance = 0.0;
    double decay_rate = 0.0;  // c, exponential_decay only
    bool pass = true;
};

/// Chooses the mode from the field metadata: time-dependent H or contact with
/// non-constant H_z -> rate_balance; contact with constant H_z != 0 ->
/// exponential_decay; otherwise conservation.
EnergyReport check_energy_conservation(const Trajectory& traj, double tol);

/// Sample spacing if `times` is uniform (relative 1e-9), otherwise nullopt.
std::optional<double> uniform_spacing(const std::vector<double>& times);

/// 5-point central differences; the two samples at each end are NaN.
std::vector<double> stencil_first_derivative(const std::vector<double>& values, double spacing);
std::vector<double> stencil_second_derivative(const std::vector<double>& values, double spacing);

}  // namespace jetflow
