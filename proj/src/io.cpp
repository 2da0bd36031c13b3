#include "hlflock/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "hlflock/dynamics.hpp"
#include "hlflock/errors.hpp"

namespace hlflock {

namespace {

using ordered_json = nlohmann::ordered_json;

/// Non-finite doubles have no JSON literal; encode them as strings so the
/// degenerate cases stay visible instead of collapsing to null.
ordered_json json_num(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return nullptr;
    return v > 0 ? "inf" : "-inf";
}

ordered_json vec_array(const std::vector<Vec3>& vs) {
    ordered_json arr = ordered_json::array();
    for (const Vec3& v : vs) arr.push_back(ordered_json::array({v.x, v.y, v.z}));
    return arr;
}

const char* frame_name(Frame f) { return f == Frame::Absolute ? "absolute" : "relative"; }

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trajectory_to_csv(const Trajectory& traj) {
    std::string out;
    if (traj.states.empty()) throw std::invalid_argument("empty trajectory");
    const int k = traj.states.front().bird_count();
    out.reserve(traj.states.size() * static_cast<std::size_t>(6 * k + 3) * 20);

    out += "t";
    for (int i = 1; i <= k; ++i) {
        const std::string b = std::to_string(i);
        for (int c = 1; c <= 3; ++c) out += ",x_" + b + "." + std::to_string(c);
        for (int c = 1; c <= 3; ++c) out += ",v_" + b + "." + std::to_string(c);
    }
    out += ",sup_v,sup_x\n";

    for (const FlockState& s : traj.states) {
        out += std::to_string(s.t);
        for (int i = 0; i < k; ++i) {
            const Vec3& x = s.x[static_cast<std::size_t>(i)];
            const Vec3& v = s.v[static_cast<std::size_t>(i)];
            for (double c : {x.x, x.y, x.z, v.x, v.y, v.z}) {
                out += ',';
                out += format_double(c);
            }
        }
        out += ',';
        out += format_double(sup_norm(s.v));
        out += ',';
        out += format_double(sup_norm(s.x));
        out += '\n';
    }
    return out;
}

std::string trajectory_to_json(const Trajectory& traj) {
    if (traj.states.empty()) throw std::invalid_argument("empty trajectory");
    ordered_json j;
    j["h"] = traj.h;
    j["frame"] = frame_name(traj.frame);
    j["k"] = traj.states.front().bird_count();
    ordered_json t = ordered_json::array();
    ordered_json x = ordered_json::array();
    ordered_json v = ordered_json::array();
    ordered_json sup_v = ordered_json::array();
    ordered_json sup_x = ordered_json::array();
    for (const FlockState& s : traj.states) {
        t.push_back(s.t);
        x.push_back(vec_array(s.x));
        v.push_back(vec_array(s.v));
        sup_v.push_back(sup_norm(s.v));
        sup_x.push_back(sup_norm(s.x));
    }
    j["t"] = std::move(t);
    j["x"] = std::move(x);
    j["v"] = std::move(v);
    j["sup_v"] = std::move(sup_v);
    j["sup_x"] = std::move(sup_x);
    return j.dump(2) + "\n";
}

namespace {

ordered_json params_json(const BoundParams& bp) {
    ordered_json params;
    params["k"] = bp.k;
    params["h"] = bp.h;
    params["p"] = bp.p;
    params["alpha"] = bp.alpha;
    params["x0"] = bp.x0;
    params["v0"] = bp.v0;
    params["A0"] = bp.A0;
    params["B0"] = bp.B0;
    params["kappa"] = bp.kappa ? ordered_json(*bp.kappa) : ordered_json(nullptr);
    ordered_json w0 = ordered_json::array(), gamma = ordered_json::array(), delta = ordered_json::array();
    for (int i = 1; i < bp.k; ++i) {
        w0.push_back(json_num(bp.w0[static_cast<std::size_t>(i)]));
        gamma.push_back(json_num(bp.gamma[static_cast<std::size_t>(i)]));
        delta.push_back(json_num(bp.delta[static_cast<std::size_t>(i)]));
    }
    params["w0"] = std::move(w0);  // follower order: birds 2..k
    params["gamma"] = std::move(gamma);
    params["delta"] = std::move(delta);
    return params;
}

}  // namespace

std::string verify_report_to_json(const VerifyReport& report) {
    ordered_json j;
    j["params"] = params_json(report.params);

    ordered_json thm;
    thm["verdict"] = verdict_name(report.verdict);
    ordered_json rows = ordered_json::array();
    for (const ConditionRow& row : report.conditions) {
        ordered_json r;
        r["bird"] = row.bird + 1;
        r["gamma"] = json_num(row.gamma);
        r["threshold"] = row.threshold;
        r["satisfied"] = row.satisfied;
        r["degenerate"] = row.degenerate;
        rows.push_back(std::move(r));
    }
    thm["conditions"] = std::move(rows);
    j["theorem1"] = std::move(thm);

    ordered_json cor;
    cor["satisfied"] = report.small_velocity_ok;
    cor["v0"] = report.params.v0;
    cor["threshold"] = report.small_velocity_threshold;
    j["corollary2"] = std::move(cor);

    ordered_json series;
    series["converged"] = report.series.converged;
    series["partial_sum"] = json_num(report.series.partial_sum);
    series["terms_evaluated"] = report.series.terms_evaluated;
    series["note"] = report.series.note;
    j["rate_series"] = std::move(series);

    return j.dump(2) + "\n";
}

std::string run_summary_to_json(const RunSummary& summary) {
    ordered_json j;
    j["k"] = summary.k;
    j["h"] = summary.h;
    j["horizon"] = summary.horizon;
    j["seed"] = summary.seed;
    j["frame"] = frame_name(summary.frame);

    ordered_json leader;
    leader["x"] = ordered_json::array({summary.leader_x0.x, summary.leader_x0.y, summary.leader_x0.z});
    leader["v"] = ordered_json::array({summary.leader_v0.x, summary.leader_v0.y, summary.leader_v0.z});
    j["leader"] = std::move(leader);

    ordered_json detect;
    detect["eps_v"] = summary.eps_v;
    detect["window"] = summary.window;
    j["detect"] = std::move(detect);

    if (summary.flocking) {
        ordered_json f;
        f["detected"] = summary.flocking->flocking();
        f["velocities_vanish"] = summary.flocking->velocities_vanish;
        f["positions_converge"] = summary.flocking->positions_converge;
        f["first_quiet_step"] = summary.flocking->first_quiet_step;
        f["limit_positions"] = vec_array(summary.flocking->limit_positions);
        j["flocking"] = std::move(f);
    } else {
        j["flocking"] = nullptr;  // window longer than the trajectory
    }

    j["params"] = params_json(summary.params);
    return j.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw IoError("failed writing " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    if (f.bad()) throw IoError("failed reading " + path);
    return ss.str();
}

}  // namespace hlflock
