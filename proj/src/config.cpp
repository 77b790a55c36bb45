#include "jetflow/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace jetflow::cli {

namespace {

std::string location(const std::string& source, int line, const std::string& field, const std::string& message)
{
    std::string out = source;
    if (line > 0) out += ":" + std::to_string(line);
    out += ": ";
    if (!field.empty()) out += "field '" + field + "': ";
    return out + message;
}

}  // namespace

ConfigError::ConfigError(const std::string& source, int line, const std::string& field, const std::string& message)
    : std::runtime_error(location(source, line, field, message)), line_(line), field_(field)
{
}

double RunConfig::entropy_slack() const
{
    if (checks.entropy_slack) return *checks.entropy_slack;
    const double tol = integrator.method == Method::dp45 ? std::max(integrator.abs_tol, integrator.rel_tol) : 1e-9;
    return 10.0 * tol;
}

int RunConfig::line_of(std::string_view field) const
{
    const auto it = lines.find(field);
    return it == lines.end() ? 0 : it->second;
}

namespace {

class Reader {
public:
    Reader(std::string source, RunConfig& config) : source_(std::move(source)), config_(config) {}

    [[noreturn]] void fail(const YAML::Node& node, const std::string& field, const std::string& message) const
    {
        throw ConfigError(source_, line(node), field, message);
    }

    static int line(const YAML::Node& node)
    {
        const auto mark = node.Mark();
        return mark.line >= 0 ? mark.line + 1 : 0;
    }

    void remember(const YAML::Node& node, const std::string& field) { config_.lines[field] = line(node); }

    void require_map(const YAML::Node& node, const std::string& field, std::initializer_list<std::string_view> keys)
    {
        if (!node.IsMap()) fail(node, field, "expected a mapping");
        for (const auto& kv : node) {
            const auto key = kv.first.as<std::string>();
            if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
                std::string allowed;
                for (auto k : keys) allowed += (allowed.empty() ? "" : ", ") + std::string(k);
                fail(kv.first, join(field, key), "unknown key (expected one of: " + allowed + ")");
            }
        }
    }

    static std::string join(const std::string& parent, const std::string& key)
    {
        return parent.empty() ? key : parent + "." + key;
    }

    double real(const YAML::Node& node, const std::string& field)
    {
        remember(node, field);
        if (!node.IsScalar()) fail(node, field, "expected a number");
        const auto& text = node.Scalar();
        double v = 0.0;
        const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
            if (text == ".nan" || text == ".inf" || text == "-.inf") fail(node, field, "value must be finite");
            fail(node, field, "expected a number, got '" + text + "'");
        }
        if (!std::isfinite(v)) fail(node, field, "value must be finite");
        return v;
    }

    std::size_t count(const YAML::Node& node, const std::string& field)
    {
        const double v = real(node, field);
        if (v < 1.0 || std::floor(v) != v || v > 1e12) fail(node, field, "expected a positive integer");
        return static_cast<std::size_t>(v);
    }

    std::string text(const YAML::Node& node, const std::string& field)
    {
        remember(node, field);
        if (!node.IsScalar()) fail(node, field, "expected a string");
        return node.Scalar();
    }

    std::vector<double> reals(const YAML::Node& node, const std::string& field)
    {
        remember(node, field);
        if (node.IsScalar()) return {real(node, field)};
        if (!node.IsSequence()) fail(node, field, "expected a list of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < node.size(); ++i) out.push_back(real(node[i], field + "[" + std::to_string(i) + "]"));
        return out;
    }

    void system(const YAML::Node& node)
    {
        require_map(node, "system",
                    {"preset", "formalism", "n", "hamiltonian", "potential", "z_coeff", "entropy", "metric", "bracket"});
        remember(node, "system");
        auto& s = config_.system;
        if (node["preset"]) {
            s.preset = text(node["preset"], "system.preset");
            const auto& names = preset_names();
            if (std::find(names.begin(), names.end(), s.preset) == names.end())
                fail(node["preset"], "system.preset", "unknown preset '" + s.preset + "'");
        }
        if (node["formalism"]) {
            const auto name = text(node["formalism"], "system.formalism");
            s.formalism = parse_formalism(name);
            if (!s.formalism)
                fail(node["formalism"], "system.formalism",
                     "unknown formalism '" + name + "' (expected poisson, contact or metriplectic)");
        }
        if (node["n"]) s.n = count(node["n"], "system.n");
        if (node["hamiltonian"]) s.hamiltonian = text(node["hamiltonian"], "system.hamiltonian");
        if (node["potential"]) s.potential = text(node["potential"], "system.potential");
        if (node["z_coeff"]) s.z_coeff = real(node["z_coeff"], "system.z_coeff");
        if (node["entropy"]) s.entropy = text(node["entropy"], "system.entropy");
        if (node["bracket"]) {
            const auto name = text(node["bracket"], "system.bracket");
            const auto kind = parse_bracket_kind(name);
            if (!kind) fail(node["bracket"], "system.bracket", "unknown bracket '" + name + "'");
            s.bracket = *kind;
        }
        if (node["metric"]) metric(node["metric"]);

        if (s.preset.empty()) {
            if (s.hamiltonian.empty()) fail(node, "system.hamiltonian", "custom systems need a hamiltonian");
            if (!s.formalism) fail(node, "system.formalism", "custom systems need a formalism");
        } else if (s.preset == "natural") {
            if (s.potential.empty()) s.potential = "0";
        } else if (!s.hamiltonian.empty() || !s.potential.empty()) {
            fail(node, "system.hamiltonian", "preset '" + s.preset + "' defines its own Hamiltonian");
        }
        if (s.preset.rfind("duffing", 0) == 0) {
            if (s.formalism) fail(node["formalism"], "system.formalism", "Duffing presets fix their formalism");
            if (s.n != 1) fail(node["n"], "system.n", "Duffing presets have n = 1");
        }
        if (s.preset == "harmonic" && s.n != 1) fail(node["n"], "system.n", "the harmonic preset has n = 1");
    }

    void metric(const YAML::Node& node)
    {
        const std::string field = "system.metric";
        remember(node, field);
        if (node.IsScalar()) {
            if (node.Scalar() != "identity") fail(node, field, "expected \"identity\" or a square matrix");
            config_.system.metric.reset();
            return;
        }
        if (!node.IsSequence() || node.size() == 0) fail(node, field, "expected \"identity\" or a square matrix");
        const auto k = static_cast<Eigen::Index>(node.size());
        Matrix g(k, k);
        for (Eigen::Index i = 0; i < k; ++i) {
            const auto row = reals(node[static_cast<std::size_t>(i)], field + "[" + std::to_string(i) + "]");
            if (static_cast<Eigen::Index>(row.size()) != k) fail(node, field, "metric rows must have length " + std::to_string(k));
            for (Eigen::Index j = 0; j < k; ++j) g(i, j) = row[static_cast<std::size_t>(j)];
        }
        config_.system.metric = g;
    }

    void params(const YAML::Node& node)
    {
        remember(node, "params");
        if (!node.IsMap()) fail(node, "params", "expected a mapping of name: value");
        const auto reserved = expr::Alphabet::jet(config_.system.n).variables;
        for (const auto& kv : node) {
            const auto name = kv.first.as<std::string>();
            const std::string field = "params." + name;
            const bool ident = !name.empty() && (std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_') &&
                               std::all_of(name.begin(), name.end(), [](char c) {
                                   return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
                               });
            if (!ident) fail(kv.first, field, "parameter names must be identifiers");
            if (std::find(reserved.begin(), reserved.end(), name) != reserved.end() ||
                name == "sin" || name == "cos" || name == "exp" || name == "sqrt")
                fail(kv.first, field, "'" + name + "' is reserved");
            config_.params[name] = real(kv.second, field);
        }
    }

    void initial(const YAML::Node& node)
    {
        require_map(node, "initial", {"q", "p", "z"});
        remember(node, "initial");
        const std::size_t n = config_.system.n;
        std::vector<double> q(n, 0.0);
        std::vector<double> p(n, 0.0);
        double z = 0.0;
        auto block = [&](const char* key, std::vector<double>& out) {
            if (!node[key]) return;
            const auto v = reals(node[key], std::string("initial.") + key);
            if (v.size() != n) fail(node[key], std::string("initial.") + key, "expected " + std::to_string(n) + " values");
            out = v;
        };
        block("q", q);
        block("p", p);
        if (node["z"]) z = real(node["z"], "initial.z");
        std::vector<double> flat = q;
        flat.insert(flat.end(), p.begin(), p.end());
        flat.push_back(z);
        config_.initial = std::move(flat);
    }

    void integrator(const YAML::Node& node)
    {
        require_map(node, "integrator", {"method", "step", "abs_tol", "rel_tol", "t0", "t1", "sample_dt", "max_steps"});
        remember(node, "integrator");
        auto& o = config_.integrator;
        if (node["method"]) {
            const auto name = text(node["method"], "integrator.method");
            const auto m = parse_method(name);
            if (!m) fail(node["method"], "integrator.method", "unknown method '" + name + "' (expected rk4 or dp45)");
            o.method = *m;
        }
        if (node["step"]) o.step = real(node["step"], "integrator.step");
        if (node["abs_tol"]) o.abs_tol = real(node["abs_tol"], "integrator.abs_tol");
        if (node["rel_tol"]) o.rel_tol = real(node["rel_tol"], "integrator.rel_tol");
        if (node["t0"]) o.t0 = real(node["t0"], "integrator.t0");
        if (node["t1"]) o.t1 = real(node["t1"], "integrator.t1");
        if (node["sample_dt"]) o.sample_dt = real(node["sample_dt"], "integrator.sample_dt");
        if (node["max_steps"]) o.max_steps = count(node["max_steps"], "integrator.max_steps");
        try {
            o.validate();
        } catch (const std::invalid_argument& e) {
            fail(node, "integrator", e.what());
        }
    }

    void output(const YAML::Node& node)
    {
        require_map(node, "output", {"path", "format", "stride"});
        auto& out = config_.output;
        if (node["path"]) out.path = text(node["path"], "output.path");
        if (node["format"]) {
            out.format = text(node["format"], "output.format");
            if (out.format != "csv" && out.format != "json")
                fail(node["format"], "output.format", "expected csv or json");
        }
        if (node["stride"]) out.stride = count(node["stride"], "output.stride");
    }

    void checks(const YAML::Node& node)
    {
        require_map(node, "checks", {"entropy_slack", "energy_tol", "divergence_tol"});
        auto& c = config_.checks;
        auto nonneg = [&](const char* key) {
            const std::string field = std::string("checks.") + key;
            const double v = real(node[key], field);
            if (v < 0.0) fail(node[key], field, "must be >= 0");
            return v;
        };
        if (node["entropy_slack"]) c.entropy_slack = nonneg("entropy_slack");
        if (node["energy_tol"]) c.energy_tol = nonneg("energy_tol");
        if (node["divergence_tol"]) c.divergence_tol = nonneg("divergence_tol");
    }

    void sweep(const YAML::Node& node)
    {
        require_map(node, "sweep", {"param", "values"});
        if (!node["param"] || !node["values"]) fail(node, "sweep", "needs param and values");
        SweepConfig s;
        s.param = text(node["param"], "sweep.param");
        s.values = reals(node["values"], "sweep.values");
        if (s.values.empty()) fail(node["values"], "sweep.values", "needs at least one value");
        config_.sweep = std::move(s);
    }

private:
    std::string source_;
    RunConfig& config_;
};

std::string number(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

void emit_reals(YAML::Emitter& out, const std::vector<double>& values)
{
    out << YAML::Flow << YAML::BeginSeq;
    for (double v : values) out << number(v);
    out << YAML::EndSeq;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(source, e.mark.line + 1, "", e.msg);
    }
    RunConfig config;
    Reader reader(source, config);
    if (!root.IsMap()) throw ConfigError(source, 0, "", "top level must be a mapping");
    reader.require_map(root, "", {"system", "params", "initial", "integrator", "output", "checks", "sweep"});
    if (!root["system"]) throw ConfigError(source, 0, "system", "missing");
    reader.system(root["system"]);
    if (root["params"]) reader.params(root["params"]);
    if (root["initial"]) reader.initial(root["initial"]);
    if (root["integrator"]) reader.integrator(root["integrator"]);
    if (root["output"]) reader.output(root["output"]);
    if (root["checks"]) reader.checks(root["checks"]);
    if (root["sweep"]) reader.sweep(root["sweep"]);
    if (config.system.preset.rfind("duffing", 0) == 0) {
        try {
            (void)DuffingParams::from_bindings(config.params);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(source, config.line_of("params"), "params", e.what());
        }
    }
    if (config.sweep && config.params.find(config.sweep->param) == config.params.end() &&
        config.system.preset.rfind("duffing", 0) != 0)
        throw ConfigError(source, config.line_of("sweep.param"), "sweep.param",
                          "'" + config.sweep->param + "' is not a declared parameter");
    return config;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, "", "cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

std::string to_yaml(const RunConfig& c)
{
    YAML::Emitter out;
    out << YAML::BeginMap;

    out << YAML::Key << "system" << YAML::Value << YAML::BeginMap;
    const auto& s = c.system;
    if (!s.preset.empty()) out << YAML::Key << "preset" << YAML::Value << s.preset;
    if (s.formalism) out << YAML::Key << "formalism" << YAML::Value << std::string(to_string(*s.formalism));
    out << YAML::Key << "n" << YAML::Value << s.n;
    if (!s.hamiltonian.empty()) out << YAML::Key << "hamiltonian" << YAML::Value << YAML::DoubleQuoted << s.hamiltonian;
    if (!s.potential.empty()) out << YAML::Key << "potential" << YAML::Value << YAML::DoubleQuoted << s.potential;
    if (s.z_coeff != 0.0) out << YAML::Key << "z_coeff" << YAML::Value << number(s.z_coeff);
    if (!s.entropy.empty()) out << YAML::Key << "entropy" << YAML::Value << YAML::DoubleQuoted << s.entropy;
    out << YAML::Key << "metric" << YAML::Value;
    if (!s.metric) {
        out << "identity";
    } else {
        out << YAML::BeginSeq;
        for (Eigen::Index i = 0; i < s.metric->rows(); ++i) {
            std::vector<double> row(static_cast<std::size_t>(s.metric->cols()));
            for (Eigen::Index j = 0; j < s.metric->cols(); ++j) row[static_cast<std::size_t>(j)] = (*s.metric)(i, j);
            emit_reals(out, row);
        }
        out << YAML::EndSeq;
    }
    out << YAML::Key << "bracket" << YAML::Value << std::string(to_string(s.bracket));
    out << YAML::EndMap;

    if (!c.params.empty()) {
        out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
        for (const auto& [name, value] : c.params) out << YAML::Key << name << YAML::Value << number(value);
        out << YAML::EndMap;
    }

    if (c.initial) {
        const std::size_t n = (c.initial->size() - 1) / 2;
        out << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "q" << YAML::Value;
        emit_reals(out, {c.initial->begin(), c.initial->begin() + static_cast<std::ptrdiff_t>(n)});
        out << YAML::Key << "p" << YAML::Value;
        emit_reals(out, {c.initial->begin() + static_cast<std::ptrdiff_t>(n),
                         c.initial->begin() + static_cast<std::ptrdiff_t>(2 * n)});
        out << YAML::Key << "z" << YAML::Value << number(c.initial->back());
        out << YAML::EndMap;
    }

    const auto& o = c.integrator;
    out << YAML::Key << "integrator" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "method" << YAML::Value << std::string(to_string(o.method));
    out << YAML::Key << "step" << YAML::Value << number(o.step);
    out << YAML::Key << "abs_tol" << YAML::Value << number(o.abs_tol);
    out << YAML::Key << "rel_tol" << YAML::Value << number(o.rel_tol);
    out << YAML::Key << "t0" << YAML::Value << number(o.t0);
    out << YAML::Key << "t1" << YAML::Value << number(o.t1);
    out << YAML::Key << "sample_dt" << YAML::Value << number(o.sample_dt);
    out << YAML::Key << "max_steps" << YAML::Value << o.max_steps;
    out << YAML::EndMap;

    out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    if (!c.output.path.empty()) out << YAML::Key << "path" << YAML::Value << YAML::DoubleQuoted << c.output.path;
    out << YAML::Key << "format" << YAML::Value << c.output.format;
    out << YAML::Key << "stride" << YAML::Value << c.output.stride;
    out << YAML::EndMap;

    out << YAML::Key << "checks" << YAML::Value << YAML::BeginMap;
    if (c.checks.entropy_slack) out << YAML::Key << "entropy_slack" << YAML::Value << number(*c.checks.entropy_slack);
    out << YAML::Key << "energy_tol" << YAML::Value << number(c.checks.energy_tol);
    out << YAML::Key << "divergence_tol" << YAML::Value << number(c.checks.divergence_tol);
    out << YAML::EndMap;

    if (c.sweep) {
        out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "param" << YAML::Value << c.sweep->param;
        out << YAML::Key << "values" << YAML::Value;
        emit_reals(out, c.sweep->values);
        out << YAML::EndMap;
    }

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

namespace {

ScalarField parse_field(const RunConfig& c, const std::string& text, const char* field, const std::string& source)
{
    try {
        return ScalarField::parse(text, c.system.n, c.params);
    } catch (const expr::ParseError& e) {
        throw ConfigError(source, c.line_of(field), field, e.what());
    } catch (const expr::UnboundNameError& e) {
        throw ConfigError(source, c.line_of(field), field, e.what());
    }
}

}  // namespace

SystemSpec build_system(const RunConfig& c, const std::string& source)
{
    const auto& s = c.system;
    try {
        SystemSpec spec = [&] {
            if (s.preset == "duffing-contact") return duffing_contact(DuffingParams::from_bindings(c.params));
            if (s.preset == "duffing-metriplectic") return duffing_metriplectic(DuffingParams::from_bindings(c.params));
            if (s.preset == "harmonic") {
                SystemSpec h = harmonic();
                if (s.formalism) {
                    h.formalism = *s.formalism;
                    if (h.formalism == Formalism::metriplectic) h.metric = MetricField::identity(1);
                }
                return h;
            }
            if (s.preset == "natural") {
                ScalarField H = [&] {
                    try {
                        return natural_hamiltonian(s.potential, s.z_coeff, s.n, c.params);
                    } catch (const expr::ParseError& e) {
                        throw ConfigError(source, c.line_of("system.potential"), "system.potential", e.what());
                    } catch (const InvalidPotentialError& e) {
                        throw ConfigError(source, c.line_of("system.potential"), "system.potential", e.what());
                    }
                }();
                return natural(H, s.formalism.value_or(Formalism::contact));
            }
            SystemSpec custom{.name = "custom",
                              .formalism = *s.formalism,
                              .n = s.n,
                              .hamiltonian = parse_field(c, s.hamiltonian, "system.hamiltonian", source),
                              .entropy = std::nullopt,
                              .metric = std::nullopt,
                              .initial = Point(s.n)};
            return custom;
        }();
        if (spec.formalism == Formalism::metriplectic) {
            if (s.metric) spec.metric = MetricField::constant(*s.metric);
            spec.bracket = s.bracket;
            if (!s.entropy.empty() && s.entropy != "z")
                spec.entropy = parse_field(c, s.entropy, "system.entropy", source);
        } else if (s.metric || !s.entropy.empty() || s.bracket != BracketKind::kulkarni_nomizu) {
            throw ConfigError(source, c.line_of("system"), "system",
                              "metric, entropy and bracket apply to metriplectic systems only");
        }
        spec.validate();
        return spec;
    } catch (const ConfigError&) {
        throw;
    } catch (const NonSpdMetricError& e) {
        throw ConfigError(source, c.line_of("system.metric"), "system.metric", e.what());
    } catch (const DimensionError& e) {
        throw ConfigError(source, c.line_of("system"), "system", e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(source, c.line_of("params"), "params", e.what());
    }
}

Point initial_point(const RunConfig& c, const SystemSpec& spec)
{
    if (!c.initial) return spec.initial;
    if (c.initial->size() != spec.initial.dim())
        throw ConfigError("<config>", c.line_of("initial"), "initial", "state dimension does not match the system");
    return Point::from_flat(std::span<const double>(*c.initial));
}

}  // namespace jetflow::cli
