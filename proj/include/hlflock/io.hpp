#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "hlflock/analysis.hpp"
#include "hlflock/simulate.hpp"

namespace hlflock {

/// Shortest round-trippable decimal for a double (printf %.17g trimmed is
/// not used; fixed %.17g keeps output byte-stable across platforms).
std::string format_double(double v);

/// Trajectory as CSV: header "t,x_1.1,x_1.2,x_1.3,v_1.1,...,sup_v,sup_x",
/// one row per step. Bird indices are 1-based in the header.
std::string trajectory_to_csv(const Trajectory& traj);

std::string trajectory_to_json(const Trajectory& traj);

/// Verdict document for the verify command: guarantee classification,
/// derived parameters, the critical condition table, and the small
/// velocity sufficient condition.
struct VerifyReport {
    BoundParams params;
    GuaranteeVerdict verdict;
    std::vector<ConditionRow> conditions;
    bool small_velocity_ok = false;
    double small_velocity_threshold = 0.0;
    SeriesDiagnosis series;  // subcritical rate series, when applicable
};

std::string verify_report_to_json(const VerifyReport& report);

/// Companion document written next to a run's trajectory: the leader's
/// initial absolute state (enough to reconstruct the absolute frame from
/// relative output), the flocking verdict of the realized path (absent when
/// the detection window exceeds the trajectory), and the derived bound
/// parameters.
struct RunSummary {
    int k = 0;
    double h = 0.0;
    std::int64_t horizon = 0;
    std::uint64_t seed = 0;
    Frame frame = Frame::Relative;  // frame of the emitted trajectory
    Vec3 leader_x0;
    Vec3 leader_v0;
    double eps_v = 0.0;
    std::int64_t window = 0;
    std::optional<FlockingVerdict> flocking;
    BoundParams params;
};

std::string run_summary_to_json(const RunSummary& summary);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace hlflock
