#include "jetflow/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    using namespace jetflow::cli;

    CLI::App app{"Contact, Poisson and metriplectic flows on the one-jet bundle"};
    app.require_subcommand(1);

    CommandOptions opts;
    std::string config;
    std::optional<double> slack;
    std::string format;
    std::string output;
    std::size_t jobs = 0;

    auto common = [&](CLI::App* cmd) {
        cmd->add_option("config", config, "YAML run configuration")->required()->check(CLI::ExistingFile);
        cmd->add_option("-o,--output", output, "output path (overrides the config; '-' for stdout)");
        cmd->add_option("--slack", slack, "tolerance above which an invariant violation fails the run");
    };

    auto* simulate = app.add_subcommand("simulate", "integrate a system and write its trajectory");
    common(simulate);
    simulate->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    simulate->add_flag("--sweep", opts.sweep, "run every value of the config's sweep section in parallel");
    simulate->add_option("--jobs", jobs, "parallel workers for --sweep (default: hardware threads)");

    auto* verify = app.add_subcommand("verify", "check bracket axioms and thermodynamic identities");
    common(verify);
    verify->add_option("--seed", opts.seed, "seed for the random sample points and observables");
    verify->add_option("--points", opts.points, "number of random sample points")->check(CLI::PositiveNumber);

    auto* compare = app.add_subcommand("compare", "integrate contact and metriplectic realizations side by side");
    common(compare);
    compare->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_code::ok : exit_code::error;
    }

    opts.slack = slack;
    opts.jobs = jobs;
    if (!format.empty()) opts.format = format;
    if (output == "-") opts.output = std::string();
    else if (!output.empty()) opts.output = output;

    if (*simulate) return cmd_simulate(config, opts, std::cout, std::cerr);
    if (*verify) return cmd_verify(config, opts, std::cout, std::cerr);
    return cmd_compare(config, opts, std::cout, std::cerr);
}
