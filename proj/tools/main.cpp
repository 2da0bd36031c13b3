#include <cstdint>
#include <exception>
#include <iostream>

#include "CLI11.hpp"

#include "hlflock/commands.hpp"
#include "hlflock/errors.hpp"

namespace {

void add_common(CLI::App* sub, hlflock::CliOptions& opt) {
    sub->add_option("-c,--config", opt.config_path, "run configuration (JSON)")->required();
    sub->add_option("-s,--seed", opt.seed, "override the config seed");
    sub->add_option("-o,--out", opt.out, "output directory (created if missing); default is stdout");
    sub->add_option("-f,--format", opt.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hierarchical-leadership flock simulator and bound checker"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "0.1.0");

    hlflock::CliOptions opt;

    CLI::App* run = app.add_subcommand("run", "simulate one trajectory and emit it");
    add_common(run, opt);
    run->add_flag("--absolute", opt.absolute, "emit the absolute frame instead of the leader-relative one");
    run->add_option("--horizon", opt.horizon, "override the config horizon");

    CLI::App* verify = app.add_subcommand("verify", "evaluate the flocking guarantees for a configuration (JSON report)");
    add_common(verify, opt);

    CLI::App* ensemble = app.add_subcommand("ensemble", "run replicas and report Monte Carlo statistics");
    add_common(ensemble, opt);
    ensemble->add_option("-r,--replicas", opt.replicas, "override the config replica count");
    ensemble->add_option("--horizon", opt.horizon, "override the config horizon");
    ensemble->add_option("-t,--threads", opt.threads, "worker threads (0 = all cores)");
    ensemble->add_option("--traces", opt.traces, "also write this many replica trajectories into the output directory");

    CLI::App* sweep = app.add_subcommand("sweep", "run the ensemble across the config's parameter grid");
    add_common(sweep, opt);
    sweep->add_option("-r,--replicas", opt.replicas, "override the config replica count");
    sweep->add_option("--horizon", opt.horizon, "override the config horizon");
    sweep->add_option("-t,--threads", opt.threads, "worker threads (0 = all cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // bad invocation is a configuration error
    }

    try {
        if (run->parsed()) return hlflock::cmd_run(opt);
        if (verify->parsed()) return hlflock::cmd_verify(opt);
        if (ensemble->parsed()) return hlflock::cmd_ensemble(opt);
        return hlflock::cmd_sweep(opt);
    } catch (const hlflock::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const hlflock::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const hlflock::InvariantError& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
