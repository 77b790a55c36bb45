#include "jetflow/commands.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

namespace jetflow::cli {

bool SimulationSummary::violation() const
{
    if (energy && !energy->pass) return true;
    return entropy_enforced && !entropy.pass();
}

namespace {

// Human-readable numbers for summaries and file names.
std::string brief(double v)
{
    if (!std::isfinite(v)) return format_double(v);
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 6);
    return {buf, res.ptr};
}

std::string shortest(double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

bool is_duffing(const RunConfig& c) { return c.system.preset.rfind("duffing", 0) == 0; }

std::string describe(const SystemSpec& spec)
{
    return spec.name + " (" + std::string(to_string(spec.formalism)) + ", n=" + std::to_string(spec.n) + ")";
}

std::vector<std::pair<std::string, std::string>> table_meta(const RunConfig& c, const std::string& system,
                                                            const std::string& kind)
{
    std::vector<std::pair<std::string, std::string>> meta{{"kind", kind}, {"system", system}};
    for (const auto& [name, value] : c.params) meta.emplace_back("param." + name, shortest(value));
    return meta;
}

}  // namespace

SimulationResult run_simulation(const RunConfig& config, const std::string& source, double entropy_slack)
{
    const SystemSpec spec = build_system(config, source);
    const VectorField V = spec.field();
    const Point x0 = initial_point(config, spec);

    SimulationResult result;
    result.trajectory = integrate(V, x0, config.integrator);
    const Trajectory& traj = result.trajectory;

    SimulationSummary& s = result.summary;
    s.system = describe(spec);
    s.formalism = spec.formalism;
    s.samples = traj.size();
    s.accepted_steps = traj.accepted_steps;
    s.rejected_steps = traj.rejected_steps;
    s.rhs_evaluations = traj.rhs_evaluations;
    s.final_energy_drift = std::abs(traj.hamiltonian.back() - traj.hamiltonian.front());
    for (double r : traj.energy_residual)
        if (std::isfinite(r)) s.max_energy_residual = std::max(s.max_energy_residual, r);
    try {
        s.energy = check_energy_conservation(traj, config.checks.energy_tol);
    } catch (const std::invalid_argument& e) {
        s.energy_note = e.what();
    }
    s.entropy = check_monotone_entropy(traj, entropy_slack);
    s.entropy_enforced = spec.formalism == Formalism::metriplectic;
    s.min_entropy_increment = traj.size() > 1 ? std::numeric_limits<double>::infinity() : 0.0;
    for (std::size_t k = 0; k + 1 < traj.size(); ++k)
        s.min_entropy_increment = std::min(s.min_entropy_increment, traj.states[k + 1].z() - traj.states[k].z());
    return result;
}

void print_summary(std::ostream& out, const SimulationSummary& s)
{
    out << "system: " << s.system << '\n';
    out << "steps: " << s.accepted_steps << " accepted, " << s.rejected_steps << " rejected, " << s.rhs_evaluations
        << " rhs evaluations; " << s.samples << " samples\n";
    out << "final H drift |H(t1) - H(t0)|: " << brief(s.final_energy_drift) << '\n';
    out << "max |H - H_pred| (energy-rate prediction): " << brief(s.max_energy_residual) << '\n';
    if (s.energy) {
        out << "energy check (" << to_string(s.energy->mode) << "): max deviation "
            << brief(s.energy->max_deviation) << ", tol " << brief(s.energy->tolerance);
        if (s.energy->mode == EnergyCheckMode::exponential_decay)
            out << ", rate " << brief(s.energy->decay_rate) << " (relative error)";
        out << (s.energy->pass ? " ok" : " FAILED") << '\n';
    } else {
        out << "energy check: skipped (" << s.energy_note << ")\n";
    }
    out << "min entropy increment: " << brief(s.min_entropy_increment) << '\n';
    out << "entropy check (slack " << brief(s.entropy.slack) << "): " << s.entropy.violations.size()
        << " decreasing sample pairs, max decrease " << brief(s.entropy.max_violation);
    if (!s.entropy_enforced) out << " (not enforced for " << to_string(s.formalism) << " systems)";
    else out << (s.entropy.pass() ? " ok" : " FAILED");
    out << '\n';
}

namespace {

struct Realizations {
    VectorField contact;
    VectorField metriplectic;
    Point initial;
    ScalarField hamiltonian;
    std::size_t n;
};

Realizations realize(const RunConfig& config, const std::string& source)
{
    if (is_duffing(config)) {
        const auto P = DuffingParams::from_bindings(config.params);
        const SystemSpec c = duffing_contact(P);
        const SystemSpec m = duffing_metriplectic(P);
        return {c.field(), m.field(), initial_point(config, c), c.hamiltonian, 1};
    }
    SystemSpec spec = build_system(config, source);
    SystemSpec c = spec;
    c.formalism = Formalism::contact;
    c.entropy.reset();
    c.metric.reset();
    c.bracket = BracketKind::kulkarni_nomizu;
    SystemSpec m = spec;
    m.formalism = Formalism::metriplectic;
    if (!m.metric) m.metric = MetricField::identity(spec.n);
    return {c.field(), m.field(), initial_point(config, spec), spec.hamiltonian, spec.n};
}

double qp_distance(const Point& a, const Point& b)
{
    const auto k = static_cast<Eigen::Index>(2 * a.n());
    return (a.coords().head(k) - b.coords().head(k)).norm();
}

bool kinetic_hamiltonian(const ScalarField& H, std::size_t n)
{
    const auto e = H.expression();
    if (!e) return false;
    for (const auto& name : expr::free_variables(*e))
        if (name[0] == 'q' || name == "t") return false;
    return H.constant_partial(z_index(n)).has_value();
}

}  // namespace

ComparisonResult run_comparison(const RunConfig& config, const std::string& source)
{
    const Realizations r = realize(config, source);
    const std::array<VectorField, 2> fields{r.contact, r.metriplectic};
    const std::array<Point, 2> starts{r.initial, r.initial};
    auto trajs = integrate_lockstep(fields, starts, config.integrator);

    ComparisonResult out;
    out.contact = std::move(trajs[0]);
    out.metriplectic = std::move(trajs[1]);
    out.kinetic = kinetic_hamiltonian(r.hamiltonian, r.n);

    const std::size_t n = r.n;
    const auto zi = static_cast<Eigen::Index>(z_index(n));
    auto& table = out.table;
    table.columns = {"t"};
    for (std::size_t i = 1; i <= n; ++i) table.columns.push_back("q" + std::to_string(i));
    for (std::size_t i = 1; i <= n; ++i) table.columns.push_back("p" + std::to_string(i));
    for (const char* c : {"qp_distance", "z_contact", "z_metriplectic", "H_contact", "H_metriplectic", "zdot_contact",
                          "zdot_metriplectic"})
        table.columns.emplace_back(c);

    for (std::size_t k = 0; k < out.contact.size(); ++k) {
        const double t = out.contact.times[k];
        const Point& xc = out.contact.states[k];
        const Point& xm = out.metriplectic.states[k];
        const double d = qp_distance(xc, xm);
        out.max_divergence = std::max(out.max_divergence, d);
        const double zc = r.contact(xc, t)[zi];
        const double zm = r.metriplectic(xm, t)[zi];

        std::vector<double> row{t};
        const Vector& c = xc.coords();
        row.insert(row.end(), c.data(), c.data() + 2 * static_cast<Eigen::Index>(n));
        for (double v : {d, xc.z(), xm.z(), out.contact.hamiltonian[k], out.metriplectic.hamiltonian[k], zc, zm})
            row.push_back(v);
        table.rows.push_back(std::move(row));

        const bool moving = xc.coords().segment(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)).norm() > 0;
        if (out.kinetic && moving && zc != 0.0) {
            const double err = std::abs(zm / zc - 2.0);
            ++out.ratio_samples;
            out.max_ratio_error = std::max(out.max_ratio_error, err);
            if (std::abs(xc.z()) <= 1e-12) {
                ++out.ratio_samples_z0;
                out.max_ratio_error_z0 = std::max(out.max_ratio_error_z0, err);
            }
        }
    }

    const Trajectory a = integrate(r.contact, r.initial, config.integrator);
    const Trajectory b = integrate(r.metriplectic, r.initial, config.integrator);
    if (a.size() == b.size())
        for (std::size_t k = 0; k < a.size(); ++k)
            out.independent_divergence = std::max(out.independent_divergence, qp_distance(a.states[k], b.states[k]));
    else
        out.independent_divergence = std::numeric_limits<double>::quiet_NaN();  // sample times differ
    return out;
}

std::string sweep_path(const std::string& base, const std::string& param, double value)
{
    const std::filesystem::path p(base);
    std::string name = p.stem().string() + "_" + param + "-" + shortest(value) + p.extension().string();
    return (p.parent_path() / name).string();
}

namespace {

template <class Fn>
int guarded(std::ostream& err, Fn&& fn)
{
    try {
        return fn();
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
    } catch (const StiffnessError& e) {
        err << "error: integration failed: " << e.what() << '\n';
    } catch (const DivergenceError& e) {
        err << "error: integration diverged: " << e.what() << '\n';
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
    }
    return exit_code::error;
}

int simulate_one(const RunConfig& config, const std::string& source, const CommandOptions& opts, std::ostream& out,
                 std::ostream& err)
{
    const double slack = opts.slack ? *opts.slack : config.entropy_slack();
    const auto result = run_simulation(config, source, slack);
    const std::string format = opts.format.value_or(config.output.format);
    const std::string path = opts.output.value_or(config.output.path);
    write_table(path, format, trajectory_table(result.trajectory, config.output.stride),
                table_meta(config, result.summary.system, "trajectory"));
    // keep stdout clean when it carries the trajectory
    std::ostream& summary = path.empty() ? err : out;
    print_summary(summary, result.summary);
    if (!path.empty()) summary << "wrote " << path << '\n';
    return result.summary.violation() ? exit_code::violation : exit_code::ok;
}

int simulate_sweep(const RunConfig& config, const std::string& source, const CommandOptions& opts, std::ostream& out)
{
    if (!config.sweep) throw ConfigError(source, 0, "sweep", "--sweep needs a sweep section");
    const auto& sweep = *config.sweep;
    std::string base = opts.output.value_or(config.output.path);
    const std::string format = opts.format.value_or(config.output.format);
    if (base.empty()) base = (config.system.preset.empty() ? "custom" : config.system.preset) + "." + format;

    const std::size_t jobs = opts.jobs ? opts.jobs : std::max(1u, std::thread::hardware_concurrency());
    struct Outcome {
        int code = exit_code::error;
        std::string log;
    };
    std::vector<Outcome> outcomes(sweep.values.size());
    for (std::size_t start = 0; start < sweep.values.size(); start += jobs) {
        std::vector<std::future<Outcome>> batch;
        for (std::size_t i = start; i < std::min(sweep.values.size(), start + jobs); ++i) {
            batch.push_back(std::async(std::launch::async, [&, i] {
                RunConfig run = config;
                run.sweep.reset();
                run.params[sweep.param] = sweep.values[i];
                CommandOptions o = opts;
                o.output = sweep_path(base, sweep.param, sweep.values[i]);
                o.format = format;
                std::ostringstream log;
                log << "== " << sweep.param << " = " << brief(sweep.values[i]) << '\n';
                const int code = guarded(log, [&] { return simulate_one(run, source, o, log, log); });
                return Outcome{code, log.str()};
            }));
        }
        for (std::size_t j = 0; j < batch.size(); ++j) outcomes[start + j] = batch[j].get();
    }
    int code = exit_code::ok;
    for (const auto& o : outcomes) {
        out << o.log;
        code = std::max(code, o.code);
    }
    return code;
}

}  // namespace

int cmd_simulate(const std::string& config_path, const CommandOptions& opts, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        const RunConfig config = load_config(config_path);
        if (opts.sweep) return simulate_sweep(config, config_path, opts, out);
        return simulate_one(config, config_path, opts, out, err);
    });
}

int cmd_verify(const std::string& config_path, const CommandOptions& opts, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        const RunConfig config = load_config(config_path);
        const SystemSpec spec = build_system(config, config_path);
        VerifyOptions vo;
        vo.seed = opts.seed;
        vo.points = opts.points;
        if (opts.slack) vo.threshold = *opts.slack;
        const VerifyReport report = verify_system(spec, vo);
        const std::string json = report_json(report, describe(spec), opts.seed);
        const std::string path = opts.output.value_or("");
        if (path.empty()) {
            out << json;
        } else {
            std::ofstream file(path);
            if (!file) throw std::runtime_error("cannot write '" + path + "'");
            file << json;
        }
        std::ostream& log = path.empty() ? err : out;
        for (const auto& r : report.results)
            log << (r.pass ? "pass " : "FAIL ") << r.identity << ": max residual " << brief(r.max_residual)
                << " (threshold " << brief(r.threshold) << ")\n";
        return report.pass() ? exit_code::ok : exit_code::violation;
    });
}

int cmd_compare(const std::string& config_path, const CommandOptions& opts, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        const RunConfig config = load_config(config_path);
        const ComparisonResult r = run_comparison(config, config_path);
        const double tol = opts.slack.value_or(config.checks.divergence_tol);
        const std::string format = opts.format.value_or(config.output.format);
        const std::string path = opts.output.value_or(config.output.path);
        write_table(path, format, r.table, table_meta(config, config.system.preset, "comparison"));

        std::ostream& log = path.empty() ? err : out;
        const bool ok = r.max_divergence <= tol;
        log << "samples: " << r.contact.size() << ", lockstep steps " << r.contact.accepted_steps << " accepted, "
            << r.contact.rejected_steps << " rejected\n";
        log << "max (q,p) divergence contact vs metriplectic: " << brief(r.max_divergence) << " (tol "
            << brief(tol) << ")" << (ok ? " ok" : " FAILED") << '\n';
        log << "max (q,p) divergence with independent step sequences: " << brief(r.independent_divergence)
            << '\n';
        if (r.kinetic) {
            log << "kinetic factor-2 check: max |zdot_metriplectic/zdot_contact - 2| = "
                << brief(r.max_ratio_error) << " over " << r.ratio_samples << " samples with p != 0";
            if (r.ratio_samples_z0)
                log << "; on z = 0 samples: " << brief(r.max_ratio_error_z0) << " over " << r.ratio_samples_z0;
            log << '\n';
        }
        if (!path.empty()) log << "wrote " << path << '\n';
        return ok ? exit_code::ok : exit_code::violation;
    });
}

}  // namespace jetflow::cli
