#include "hlflock/commands.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <variant>

#include "json.hpp"

#include "hlflock/config.hpp"
#include "hlflock/dynamics.hpp"
#include "hlflock/ensemble.hpp"
#include "hlflock/errors.hpp"
#include "hlflock/io.hpp"
#include "hlflock/simulate.hpp"

namespace hlflock {

namespace {

using ordered_json = nlohmann::ordered_json;

SimConfig load_with_overrides(const CliOptions& opt) {
    SimConfig cfg = load_config(opt.config_path);
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.replicas) cfg.replicas = *opt.replicas;
    if (opt.horizon) {
        if (*opt.horizon < 0) throw ConfigError("horizon must be non-negative");
        cfg.horizon = *opt.horizon;
    }
    return cfg;
}

/// Output sink resolution: --out wins, then the config's out_dir, then
/// stdout. The sink is a directory (created on demand); each command picks
/// fixed file names inside it.
std::optional<std::filesystem::path> sink_dir(const CliOptions& opt, const SimConfig& cfg) {
    const std::optional<std::string>& dir = opt.out ? opt.out : cfg.out_dir;
    if (!dir) return std::nullopt;
    std::error_code ec;
    std::filesystem::create_directories(*dir, ec);
    if (ec) throw IoError("cannot create output directory " + *dir + ": " + ec.message());
    return std::filesystem::path(*dir);
}

void write_into(const std::filesystem::path& dir, const std::string& name, const std::string& payload) {
    const std::string path = (dir / name).string();
    write_file(path, payload);
    std::cerr << "wrote " << path << "\n";
}

void emit(const CliOptions& opt, const SimConfig& cfg, const std::string& name, const std::string& payload) {
    if (const auto dir = sink_dir(opt, cfg))
        write_into(*dir, name, payload);
    else
        std::cout << payload;
}

Trajectory to_relative_trajectory(const Trajectory& traj) {
    Trajectory rel;
    rel.h = traj.h;
    rel.frame = Frame::Relative;
    rel.weights = traj.weights;
    rel.states.reserve(traj.states.size());
    for (const FlockState& s : traj.states) rel.states.push_back(to_relative(s));
    return rel;
}

/// Rebuilds the interaction model at one sweep grid point. Axes that cannot
/// apply to the kind were rejected at config load.
InteractionModel model_at(const InteractionModel& base, double alpha, double p) {
    switch (base.kind()) {
        case InteractionKind::DeterministicCS: return base;
        case InteractionKind::PowerLaw: return InteractionModel::power_law(alpha);
        case InteractionKind::BernoulliFailure: return InteractionModel::bernoulli_failure(p, alpha);
        case InteractionKind::ScaledRandom:
            return InteractionModel::scaled_random(p, alpha, base.scale_distribution());
        case InteractionKind::RandomEnvironment: return InteractionModel::random_environment(p, alpha);
    }
    return base;
}

}  // namespace

int cmd_run(const CliOptions& opt) {
    const SimConfig cfg = load_with_overrides(opt);
    const RngStream rng(cfg.seed, 0);
    const FlockState init = cfg.initial_state(rng);
    const Trajectory traj = simulate(init, cfg.hierarchy, cfg.model, cfg.h, rng, cfg.horizon);
    const Trajectory rel = to_relative_trajectory(traj);
    const Trajectory& out = opt.absolute ? traj : rel;

    emit(opt, cfg, opt.format == "json" ? "trajectory.json" : "trajectory.csv",
         opt.format == "json" ? trajectory_to_json(out) : trajectory_to_csv(out));

    RunSummary summary;
    summary.k = cfg.k;
    summary.h = cfg.h;
    summary.horizon = cfg.horizon;
    summary.seed = cfg.seed;
    summary.frame = out.frame;
    summary.leader_x0 = init.x[0];
    summary.leader_v0 = init.v[0];
    summary.eps_v = cfg.detect.eps_v;
    summary.window = cfg.detect.window;
    if (cfg.horizon + 1 >= cfg.detect.window)
        summary.flocking = detect_flocking(rel.states, cfg.detect.eps_v, cfg.detect.window, cfg.h);
    const Certificate cert = cfg.model.certificate();
    summary.params = derive_bound_params(rel.states.front(), cfg.hierarchy, cfg.h, cert.p, cert.alpha);

    // The summary accompanies the trajectory file; in stdout mode the
    // trajectory itself is the whole payload.
    if (const auto dir = sink_dir(opt, cfg)) write_into(*dir, "summary.json", run_summary_to_json(summary));

    if (summary.flocking) {
        const FlockingVerdict& fv = *summary.flocking;
        std::cerr << "flocking: " << (fv.flocking() ? "detected" : "not detected");
        if (fv.first_quiet_step >= 0) std::cerr << " (velocities quiet from step " << fv.first_quiet_step << ")";
        std::cerr << "\n";
    }
    return 0;
}

int cmd_verify(const CliOptions& opt) {
    const SimConfig cfg = load_with_overrides(opt);
    const RngStream rng(cfg.seed, 0);
    const FlockState rel = to_relative(cfg.initial_state(rng));
    const Certificate cert = cfg.model.certificate();

    VerifyReport report;
    report.params = derive_bound_params(rel, cfg.hierarchy, cfg.h, cert.p, cert.alpha);
    report.verdict = check_flocking_guarantee(report.params);
    report.conditions = critical_condition_table(report.params);
    report.small_velocity_threshold = cert.p / (2.0 * static_cast<double>(cfg.k - 1));
    report.small_velocity_ok = check_small_velocity_condition(report.params.v0, cert.p, cfg.k);

    if (cert.alpha < 1.0 && report.params.v0 > 0.0) {
        // Default almost-sure envelope candidate: delta_t = t^(-2).
        report.series = rate_series_convergence(
            [](std::int64_t t) { return 1.0 / (static_cast<double>(t) * static_cast<double>(t)); }, report.params);
        report.series.note += " (candidate envelope delta_t = t^-2)";
    } else {
        report.series.converged = false;
        report.series.note = cert.alpha < 1.0 ? "initial relative velocities vanish; decay is immediate"
                                              : "rate series applies only below the critical decay";
    }

    emit(opt, cfg, "verify.json", verify_report_to_json(report));
    return 0;
}

int cmd_ensemble(const CliOptions& opt) {
    const SimConfig cfg = load_with_overrides(opt);
    const Certificate cert = cfg.model.certificate();

    EnsembleSpec spec;
    spec.replicas = cfg.replicas;
    spec.horizon = cfg.horizon;
    spec.threads = opt.threads;
    spec.detect = cfg.detect;
    spec.track_flocking = cfg.horizon + 1 >= cfg.detect.window;
    spec.track_speed_bounds = cert.alpha < 1.0;
    if (cfg.horizon >= 1)
        for (int i = 1; i < cfg.k; ++i) spec.products.push_back({i, 0, cfg.horizon - 1});

    const EnsembleReport report = run_ensemble(cfg, spec);

    if (opt.format == "json") {
        emit(opt, cfg, "ensemble.json", report_to_json(report));
    } else {
        // Per-step series table; the full structure lives in the JSON form.
        std::string csv = "t,sup_v_mean,sup_v_se";
        for (int i = 1; i <= cfg.k; ++i)
            csv += ",speed_" + std::to_string(i) + "_mean,speed_" + std::to_string(i) + "_se";
        csv += "\n";
        for (std::int64_t t = 0; t <= report.horizon; ++t) {
            const auto ti = static_cast<std::size_t>(t);
            csv += std::to_string(t);
            csv += ',';
            csv += format_double(report.sup_v.mean[ti]);
            csv += ',';
            csv += format_double(report.sup_v.se[ti]);
            for (int i = 0; i < cfg.k; ++i) {
                csv += ',';
                csv += format_double(report.speeds[static_cast<std::size_t>(i)].mean[ti]);
                csv += ',';
                csv += format_double(report.speeds[static_cast<std::size_t>(i)].se[ti]);
            }
            csv += '\n';
        }
        emit(opt, cfg, "ensemble.csv", csv);
    }

    if (spec.track_flocking)
        std::cerr << "flocking fraction: " << report.flocking_fraction << " over " << report.replicas
                  << " replicas\n";
    else
        std::cerr << "flocking detection skipped: window " << cfg.detect.window
                  << " exceeds the trajectory length " << (cfg.horizon + 1) << "\n";

    if (opt.traces > 0) {
        const auto dir = sink_dir(opt, cfg);
        if (!dir) throw ConfigError("--traces needs --out or config.out_dir to place the trace files");
        for (int r = 0; r < opt.traces; ++r) {
            const RngStream rng(cfg.seed, static_cast<std::uint64_t>(r));
            const FlockState init = cfg.initial_state(rng);
            const Trajectory traj = simulate(init, cfg.hierarchy, cfg.model, cfg.h, rng, cfg.horizon);
            write_into(*dir, "trace" + std::to_string(r) + ".csv", trajectory_to_csv(to_relative_trajectory(traj)));
        }
    }
    return 0;
}

int cmd_sweep(const CliOptions& opt) {
    const SimConfig cfg = load_with_overrides(opt);
    if (!cfg.sweep) throw ConfigError("config has no sweep grid");
    const Certificate base_cert = cfg.model.certificate();

    std::vector<double> alphas = cfg.sweep->alpha.empty() ? std::vector<double>{base_cert.alpha} : cfg.sweep->alpha;
    std::vector<double> ps = cfg.sweep->p.empty() ? std::vector<double>{base_cert.p} : cfg.sweep->p;
    const bool sweeping_speed = !cfg.sweep->speed.empty();
    std::vector<double> speeds;
    if (sweeping_speed)
        speeds = cfg.sweep->speed;
    else if (const auto* s = std::get_if<SampledInitial>(&cfg.initial))
        speeds = {s->speed};
    else
        speeds = {std::numeric_limits<double>::quiet_NaN()};  // explicit initial: column left blank

    struct Row {
        double alpha, p, speed;
        GuaranteeVerdict verdict;
        double flocking_fraction, final_mean_sup_v, sum_mean_sup_v;
    };
    std::vector<Row> rows;

    for (double a : alphas) {
        for (double p : ps) {
            for (double sp : speeds) {
                SimConfig point = cfg;
                point.model = model_at(cfg.model, a, p);
                if (sweeping_speed) std::get<SampledInitial>(point.initial).speed = sp;

                EnsembleSpec spec;
                spec.replicas = point.replicas;
                spec.horizon = point.horizon;
                spec.threads = opt.threads;
                spec.detect = point.detect;
                spec.track_flocking = point.horizon + 1 >= point.detect.window;
                const EnsembleReport rep = run_ensemble(point, spec);

                // Guarantee classification from the replica-0 initial state.
                const Certificate cert = point.model.certificate();
                const FlockState rel0 = to_relative(point.initial_state(RngStream(point.seed, 0)));
                const BoundParams bp = derive_bound_params(rel0, point.hierarchy, point.h, cert.p, cert.alpha);

                rows.push_back({cert.alpha, cert.p, sp, check_flocking_guarantee(bp), rep.flocking_fraction,
                                rep.sup_v.mean.back(), rep.sum_mean_sup_v});
            }
        }
    }

    if (opt.format == "json") {
        ordered_json arr = ordered_json::array();
        for (const Row& r : rows) {
            ordered_json j;
            j["alpha"] = r.alpha;
            j["p"] = r.p;
            j["speed"] = std::isnan(r.speed) ? ordered_json(nullptr) : ordered_json(r.speed);
            j["verdict"] = verdict_name(r.verdict);
            j["flocking_fraction"] = r.flocking_fraction;
            j["final_mean_sup_v"] = r.final_mean_sup_v;
            j["sum_mean_sup_v"] = r.sum_mean_sup_v;
            arr.push_back(std::move(j));
        }
        emit(opt, cfg, "sweep.json", arr.dump(2) + "\n");
    } else {
        std::string csv = "alpha,p,speed,verdict,flocking_fraction,final_mean_sup_v,sum_mean_sup_v\n";
        for (const Row& r : rows) {
            csv += format_double(r.alpha);
            csv += ',';
            csv += format_double(r.p);
            csv += ',';
            if (!std::isnan(r.speed)) csv += format_double(r.speed);
            csv += ',';
            csv += verdict_name(r.verdict);
            csv += ',';
            csv += format_double(r.flocking_fraction);
            csv += ',';
            csv += format_double(r.final_mean_sup_v);
            csv += ',';
            csv += format_double(r.sum_mean_sup_v);
            csv += '\n';
        }
        emit(opt, cfg, "sweep.csv", csv);
    }
    return 0;
}

}  // namespace hlflock
