#include "jetflow/integrators.hpp"

#include "jetflow/expr.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>

namespace jetflow {

std::string_view to_string(Method m)
{
    switch (m) {
    case Method::rk4: return "rk4";
    case Method::dp45: return "dp45";
    }
    return "unknown";
}

std::optional<Method> parse_method(std::string_view name)
{
    if (name == "rk4") return Method::rk4;
    if (name == "dp45") return Method::dp45;
    return std::nullopt;
}

void IntegratorOptions::validate() const
{
    auto fail = [](const std::string& msg) { throw std::invalid_argument("integrator options: " + msg); };
    if (!std::isfinite(t0) || !std::isfinite(t1)) fail("t0 and t1 must be finite");
    if (!(t1 > t0)) fail("t1 must be greater than t0");
    if (method == Method::rk4 && !(step > 0.0)) fail("rk4 needs step > 0");
    if (method == Method::dp45) {
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) fail("tolerances must be positive");
        if (step < 0.0 || !std::isfinite(step)) fail("initial step must be >= 0");
    }
    if (sample_dt < 0.0 || !std::isfinite(sample_dt)) fail("sample_dt must be >= 0");
    if (sample_stride == 0) fail("sample_stride must be >= 1");
    if (max_steps == 0) fail("max_steps must be >= 1");
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Evaluates one or more fields side by side on a flat vector. The states are
// stacked first; after them come the closed-form energy rates of every field
// that has a Hamiltonian, so the predicted H integrates alongside.
class System {
public:
    explicit System(std::span<const VectorField> fields) : fields_(fields)
    {
        Eigen::Index offset = 0;
        for (const auto& V : fields_) {
            offsets_.push_back(offset);
            offset += static_cast<Eigen::Index>(V.dim());
            points_.emplace_back(V.n());
        }
        state_dim_ = offset;
        for (const auto& V : fields_) {
            energy_slots_.push_back(V.generator().hamiltonian ? offset : -1);
            if (V.generator().hamiltonian) ++offset;
        }
        size_ = offset;
    }

    [[nodiscard]] std::size_t count() const { return fields_.size(); }
    [[nodiscard]] Eigen::Index state_dim() const { return state_dim_; }
    [[nodiscard]] Eigen::Index size() const { return size_; }
    [[nodiscard]] Eigen::Index offset(std::size_t i) const { return offsets_[i]; }
    [[nodiscard]] Eigen::Index energy_slot(std::size_t i) const { return energy_slots_[i]; }
    [[nodiscard]] const VectorField& field(std::size_t i) const { return fields_[i]; }
    [[nodiscard]] std::size_t evaluations() const { return evaluations_; }

    // Returns false on a domain error or non-finite output.
    bool operator()(double t, const Vector& y, Vector& out)
    {
        ++evaluations_;
        out.resize(size_);
        try {
            for (std::size_t i = 0; i < fields_.size(); ++i) {
                const auto d = static_cast<Eigen::Index>(fields_[i].dim());
                Point& x = points_[i];
                x.coords() = y.segment(offsets_[i], d);
                fields_[i].evaluate(x, t, f_);
                out.segment(offsets_[i], d) = f_;
                if (energy_slots_[i] >= 0) out[energy_slots_[i]] = energy_rate(fields_[i], x, t);
            }
        } catch (const expr::DomainError&) {
            return false;
        }
        return out.allFinite();
    }

private:
    std::span<const VectorField> fields_;
    std::vector<Eigen::Index> offsets_;
    std::vector<Eigen::Index> energy_slots_;
    std::vector<Point> points_;
    Eigen::Index state_dim_ = 0;
    Eigen::Index size_ = 0;
    Vector f_;
    std::size_t evaluations_ = 0;
};

class FieldRecorder {
public:
    FieldRecorder(const VectorField& V, Trajectory& traj, Eigen::Index offset, Eigen::Index energy_slot)
        : V_(V),
          traj_(traj),
          offset_(offset),
          dim_(static_cast<Eigen::Index>(V.dim())),
          energy_slot_(energy_slot),
          H_(V.generator().hamiltonian),
          S_(V.generator().entropy)
    {
    }

    void record(double t, const Vector& y)
    {
        Point x = Point::from_flat(Vector(y.segment(offset_, dim_)));
        traj_.times.push_back(t);
        double h = kNaN;
        double er = kNaN;
        double residual = kNaN;
        if (H_) {
            h = (*H_)(x, t);
            er = energy_rate(V_, x, t);
            if (energy_slot_ >= 0) residual = std::abs(h - y[energy_slot_]);
        }
        const double s = S_ ? (*S_)(x, t) : x.z();
        double sr = kNaN;
        if (V_.formalism() != Formalism::poisson && H_) sr = entropy_rate(V_, x, t);
        traj_.hamiltonian.push_back(h);
        traj_.entropy.push_back(s);
        traj_.energy_rate.push_back(er);
        traj_.entropy_rate.push_back(sr);
        traj_.energy_residual.push_back(residual);
        traj_.states.push_back(std::move(x));
    }

private:
    const VectorField& V_;
    Trajectory& traj_;
    Eigen::Index offset_;
    Eigen::Index dim_;
    Eigen::Index energy_slot_;
    const std::optional<ScalarField>& H_;
    const std::optional<ScalarField>& S_;
};

class Recorder {
public:
    Recorder(const System& sys, std::vector<Trajectory>& trajs)
    {
        for (std::size_t i = 0; i < sys.count(); ++i)
            parts_.emplace_back(sys.field(i), trajs[i], sys.offset(i), sys.energy_slot(i));
    }

    void record(double t, const Vector& y)
    {
        for (auto& part : parts_) part.record(t, y);
    }

private:
    std::vector<FieldRecorder> parts_;
};

struct StepCounts {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
};

// Reports the first field's block; lockstep callers see the time in the message.
[[noreturn]] void diverged(const System& sys, const Vector& last, double t)
{
    std::ostringstream msg;
    msg << "state became non-finite after t = " << t;
    const auto dim = static_cast<Eigen::Index>(sys.field(0).dim());
    throw DivergenceError(msg.str(), Point::from_flat(Vector(last.head(dim))), t);
}

// Uniform output grid t0 + k dt, plus t1 if it is not on the grid.
std::vector<double> sample_grid(double t0, double t1, double dt)
{
    std::vector<double> grid;
    const double span = t1 - t0;
    const auto count = static_cast<std::size_t>(std::floor(span / dt + 1e-9));
    grid.reserve(count + 2);
    for (std::size_t k = 0; k <= count; ++k) grid.push_back(t0 + static_cast<double>(k) * dt);
    if (grid.back() < t1 - 1e-9 * span) grid.push_back(t1);
    else grid.back() = std::min(grid.back(), t1);
    return grid;
}

void integrate_rk4(System& sys, Recorder& rec, const Vector& y0, const IntegratorOptions& o, StepCounts& counts)
{
    const double span = o.t1 - o.t0;
    const auto steps = static_cast<std::size_t>(std::ceil(span / o.step - 1e-9));
    const double h = span / static_cast<double>(steps);
    std::size_t stride = o.sample_stride;
    if (o.sample_dt > 0.0) {
        const double ratio = o.sample_dt / h;
        const double rounded = std::round(ratio);
        if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * ratio)
            throw std::invalid_argument("rk4: sample_dt must be a multiple of the effective step " +
                                        std::to_string(h));
        stride = static_cast<std::size_t>(rounded);
    }
    if (steps > o.max_steps) throw std::invalid_argument("rk4: step count exceeds max_steps");

    const Eigen::Index m = sys.size();
    Vector y = y0;
    Vector k1(m), k2(m), k3(m), k4(m), tmp(m);
    rec.record(o.t0, y);
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = o.t0 + static_cast<double>(i) * h;
        bool ok = sys(t, y, k1);
        tmp = y + 0.5 * h * k1;
        ok = ok && sys(t + 0.5 * h, tmp, k2);
        tmp = y + 0.5 * h * k2;
        ok = ok && sys(t + 0.5 * h, tmp, k3);
        tmp = y + h * k3;
        ok = ok && sys(t + h, tmp, k4);
        if (!ok) diverged(sys, y, t);
        tmp = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!tmp.allFinite()) diverged(sys, y, t);
        y = tmp;
        ++counts.accepted;
        const bool last = i + 1 == steps;
        if ((i + 1) % stride == 0 || last) rec.record(last ? o.t1 : o.t0 + static_cast<double>(i + 1) * h, y);
    }
}

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 5.0;
constexpr double kBeta = 0.04;                  // PI gain on the previous error
constexpr double kAlpha = 0.2 - 0.75 * kBeta;  // exponent on the current error

// RMS of v / (atol + rtol max(|a|, |b|)) over the first `dim` components.
double scaled_norm(const Vector& v, const Vector& a, const Vector& b, Eigen::Index dim, double atol, double rtol)
{
    double sum = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
        const double sk = atol + rtol * std::max(std::abs(a[i]), std::abs(b[i]));
        const double r = v[i] / sk;
        sum += r * r;
    }
    return std::sqrt(sum / static_cast<double>(dim));
}

double initial_step(System& sys, double t0, const Vector& y0, const Vector& f0, const IntegratorOptions& o)
{
    const Eigen::Index dim = sys.state_dim();
    const double span = o.t1 - o.t0;
    const double dy = scaled_norm(y0, y0, y0, dim, o.abs_tol, o.rel_tol);
    const double df = scaled_norm(f0, y0, y0, dim, o.abs_tol, o.rel_tol);
    double h0 = (dy < 1e-10 || df < 1e-10) ? 1e-6 : 0.01 * dy / df;
    h0 = std::min(h0, span);
    Vector y1 = y0 + h0 * f0;
    Vector f1;
    if (!sys(t0 + h0, y1, f1)) return std::min(1e-6, span);
    const double ddf = scaled_norm(f1 - f0, y0, y0, dim, o.abs_tol, o.rel_tol) / h0;
    const double m = std::max(df, ddf);
    const double h1 = m <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / m, 0.2);
    return std::min({100.0 * h0, h1, span});
}

void integrate_dp45(System& sys, Recorder& rec, const Vector& y0, const IntegratorOptions& o, StepCounts& counts)
{
    const Eigen::Index m = sys.size();
    const Eigen::Index dim = sys.state_dim();
    const double span = o.t1 - o.t0;
    const double h_min = 1e-14 * span;

    std::vector<double> grid;
    std::size_t next_sample = 0;
    if (o.sample_dt > 0.0) {
        grid = sample_grid(o.t0, o.t1, o.sample_dt);
        rec.record(o.t0, y0);
        next_sample = 1;
    } else {
        rec.record(o.t0, y0);
    }

    Vector y = y0;
    Vector k1(m), k2(m), k3(m), k4(m), k5(m), k6(m), k7(m), tmp(m), y_new(m), err(m);
    Vector r1(m), r2(m), r3(m), r4(m);
    if (!sys(o.t0, y, k1)) diverged(sys, y, o.t0);

    double t = o.t0;
    double h = o.step > 0.0 ? std::min(o.step, span) : initial_step(sys, o.t0, y, k1, o);
    double err_old = 1e-4;
    bool last_rejected = false;
    std::size_t accepted_since_sample = 0;

    while (t < o.t1) {
        if (counts.accepted + counts.rejected >= o.max_steps)
            throw std::runtime_error("dp45: exceeded max_steps at t = " + std::to_string(t));
        bool final_step = false;
        if (t + h >= o.t1 || o.t1 - (t + h) < 1e-12 * span) {
            h = o.t1 - t;
            final_step = true;
        }
        if (h < h_min) {
            std::ostringstream msg;
            msg << "step size " << h << " underflowed below " << h_min << " at t = " << t << " (stiff problem?)";
            throw StiffnessError(msg.str(), t, h);
        }

        bool ok = true;
        tmp = y + h * (a21 * k1);
        ok = ok && sys(t + c2 * h, tmp, k2);
        tmp = y + h * (a31 * k1 + a32 * k2);
        ok = ok && sys(t + c3 * h, tmp, k3);
        tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        ok = ok && sys(t + c4 * h, tmp, k4);
        tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        ok = ok && sys(t + c5 * h, tmp, k5);
        tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        ok = ok && sys(t + h, tmp, k6);
        y_new = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        ok = ok && y_new.allFinite() && sys(t + h, y_new, k7);

        double e = std::numeric_limits<double>::infinity();
        if (ok) {
            err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            e = scaled_norm(err, y, y_new, dim, o.abs_tol, o.rel_tol);
        }
        if (!std::isfinite(e)) {
            // non-finite stage: retreat hard and retry
            ++counts.rejected;
            last_rejected = true;
            h *= kMinFactor;
            if (h < h_min) diverged(sys, y, t);
            continue;
        }

        if (e <= 1.0) {
            const double t_new = final_step ? o.t1 : t + h;
            if (!grid.empty()) {
                r1 = y;
                r2 = y_new - y;
                r3 = h * k1 - r2;
                r4 = r2 - h * k7 - r3;
                tmp = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
                while (next_sample < grid.size() && grid[next_sample] <= t_new) {
                    const double ts = grid[next_sample];
                    if (ts == t_new) {
                        rec.record(ts, y_new);
                    } else {
                        const double th = (ts - t) / h;
                        const double th1 = 1.0 - th;
                        Vector ys = r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * tmp)));
                        rec.record(ts, ys);
                    }
                    ++next_sample;
                }
            }
            y = y_new;
            k1 = k7;  // first-same-as-last
            t = t_new;
            ++counts.accepted;
            if (grid.empty()) {
                ++accepted_since_sample;
                if (accepted_since_sample == o.sample_stride || final_step) {
                    rec.record(t, y);
                    accepted_since_sample = 0;
                }
            }
            double factor = kSafety * std::pow(e, -kAlpha) * std::pow(err_old, kBeta);
            if (e == 0.0) factor = kMaxFactor;
            factor = std::clamp(factor, kMinFactor, kMaxFactor);
            if (last_rejected) factor = std::min(factor, 1.0);
            err_old = std::max(e, 1e-4);
            last_rejected = false;
            h *= factor;
        } else {
            ++counts.rejected;
            last_rejected = true;
            h *= std::max(kMinFactor, kSafety * std::pow(e, -kAlpha));
        }
    }
}

}  // namespace

std::vector<Trajectory> integrate_lockstep(std::span<const VectorField> fields, std::span<const Point> x0,
                                           const IntegratorOptions& opts)
{
    opts.validate();
    if (fields.empty()) throw std::invalid_argument("integrate: no vector fields given");
    if (fields.size() != x0.size()) throw std::invalid_argument("integrate: one initial point per field required");
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (x0[i].n() != fields[i].n())
            throw DimensionError("initial point does not match the vector field dimension");
        if (!x0[i].finite()) throw std::invalid_argument("initial point is not finite");
    }

    System sys(fields);
    Vector y0(sys.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
        y0.segment(sys.offset(i), static_cast<Eigen::Index>(fields[i].dim())) = x0[i].coords();
        if (sys.energy_slot(i) >= 0) y0[sys.energy_slot(i)] = (*fields[i].generator().hamiltonian)(x0[i], opts.t0);
    }

    std::vector<Trajectory> trajs(fields.size());
    Recorder rec(sys, trajs);
    StepCounts counts;
    if (opts.method == Method::rk4) integrate_rk4(sys, rec, y0, opts, counts);
    else integrate_dp45(sys, rec, y0, opts, counts);
    for (std::size_t i = 0; i < fields.size(); ++i) {
        trajs[i].field = fields[i];
        trajs[i].accepted_steps = counts.accepted;
        trajs[i].rejected_steps = counts.rejected;
        trajs[i].rhs_evaluations = sys.evaluations();
    }
    return trajs;
}

Trajectory integrate(const VectorField& V, const Point& x0, const IntegratorOptions& opts)
{
    auto trajs = integrate_lockstep(std::span<const VectorField>(&V, 1), std::span<const Point>(&x0, 1), opts);
    return std::move(trajs.front());
}

EntropyReport check_monotone_entropy(const Trajectory& traj, double slack)
{
    EntropyReport report;
    report.slack = slack;
    for (std::size_t k = 0; k + 1 < traj.states.size(); ++k) {
        const double drop = traj.states[k].z() - traj.states[k + 1].z();
        report.max_violation = std::max(report.max_violation, drop);
        if (drop > slack) report.violations.push_back(k);
    }
    return report;
}

std::string_view to_string(EnergyCheckMode m)
{
    switch (m) {
    case EnergyCheckMode::conservation: return "conservation";
    case EnergyCheckMode::exponential_decay: return "exponential_decay";
    case EnergyCheckMode::rate_balance: return "rate_balance";
    }
    return "unknown";
}

EnergyReport check_energy_conservation(const Trajectory& traj, double tol)
{
    if (!traj.field) throw MissingGeneratorError("trajectory carries no field metadata");
    const VectorField& V = *traj.field;
    const auto& H = V.generator().hamiltonian;
    if (!H) throw MissingGeneratorError("trajectory field carries no Hamiltonian");

    EnergyReport report;
    report.tolerance = tol;
    if (traj.size() == 0) return report;

    const std::size_t zi = z_index(V.n());
    std::optional<double> hz;
    if (V.formalism() == Formalism::contact) hz = H->constant_partial(zi);

    const bool balance = H->time_dependent() || (V.formalism() == Formalism::contact && !hz);
    const double H0 = traj.hamiltonian.front();
    double worst = 0.0;
    if (balance) {
        report.mode = EnergyCheckMode::rate_balance;
        const auto spacing = uniform_spacing(traj.times);
        if (!spacing || traj.size() < 5)
            throw std::invalid_argument("rate balance needs at least 5 uniformly spaced samples");
        const auto dHdt = stencil_first_derivative(traj.hamiltonian, *spacing);
        for (std::size_t k = 2; k + 2 < traj.size(); ++k)
            worst = std::max(worst, std::abs(dHdt[k] - traj.energy_rate[k]));
    } else if (hz && *hz != 0.0) {
        report.mode = EnergyCheckMode::exponential_decay;
        report.decay_rate = *hz;
        const double scale = H0 != 0.0 ? std::abs(H0) : 1.0;
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const double predicted = H0 * std::exp(-*hz * (traj.times[k] - traj.times.front()));
            worst = std::max(worst, std::abs(traj.hamiltonian[k] - predicted) / scale);
        }
    } else {
        report.mode = EnergyCheckMode::conservation;
        for (double h : traj.hamiltonian) worst = std::max(worst, std::abs(h - H0));
    }
    report.max_deviation = worst;
    report.pass = worst <= tol;
    return report;
}

std::optional<double> uniform_spacing(const std::vector<double>& times)
{
    if (times.size() < 2) return std::nullopt;
    const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    for (std::size_t k = 1; k < times.size(); ++k)
        if (std::abs(times[k] - times[k - 1] - dt) > 1e-9 * dt) return std::nullopt;
    return dt;
}

std::vector<double> stencil_first_derivative(const std::vector<double>& f, double h)
{
    std::vector<double> out(f.size(), kNaN);
    for (std::size_t i = 2; i + 2 < f.size(); ++i)
        out[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h);
    return out;
}

std::vector<double> stencil_second_derivative(const std::vector<double>& f, double h)
{
    std::vector<double> out(f.size(), kNaN);
    for (std::size_t i = 2; i + 2 < f.size(); ++i)
        out[i] = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) / (12.0 * h * h);
    return out;
}

}  // namespace jetflow
