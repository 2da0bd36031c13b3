#include "hlflock/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "hlflock/dynamics.hpp"

namespace hlflock {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

BoundParams derive_bound_params(const FlockState& initial, const Hierarchy& hier, double h, double p, double alpha) {
    validate_state(initial);
    if (initial.frame != Frame::Relative)
        throw std::invalid_argument("bound parameters are defined in the relative frame");
    const int k = initial.bird_count();
    if (hier.bird_count() != k) throw std::invalid_argument("hierarchy size does not match the flock");
    if (auto v = validate_hierarchy(hier); !v.ok) throw std::invalid_argument("invalid hierarchy: " + v.reason);
    if (!(h > 0.0) || h > max_timestep(k))
        throw std::invalid_argument("time step must lie in (0, 1/(k-1)], got " + std::to_string(h));
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("certificate p must lie in (0, 1]");
    if (!(alpha >= 0.0)) throw std::invalid_argument("certificate alpha must be non-negative");

    BoundParams bp;
    bp.k = k;
    bp.h = h;
    bp.p = p;
    bp.alpha = alpha;
    bp.x0 = sup_norm(initial.x);
    bp.v0 = sup_norm(initial.v);
    bp.A0 = 1.0 + 2.0 * bp.x0;
    bp.B0 = 2.0 * h * bp.v0;
    if (alpha < 1.0 && bp.v0 > 0.0) bp.kappa = h * p / ((1.0 - alpha) * bp.B0);

    bp.w0.assign(static_cast<std::size_t>(k), kInf);
    bp.gamma.assign(static_cast<std::size_t>(k), kNaN);
    bp.delta.assign(static_cast<std::size_t>(k), kNaN);
    for (int i = 1; i < k; ++i) {
        double wmin = kInf;
        double g = 0.0;
        for (int j : hier.leaders_of(i)) {
            const double gap = (initial.v[i] - initial.v[j]).norm();
            wmin = std::min(wmin, gap);
            g += gap > 0.0 ? p / gap : kInf;
        }
        bp.w0[i] = wmin;
        bp.gamma[i] = g;
        bp.delta[i] = i == 1 ? g : std::min(bp.delta[i - 1], g) - 1.0;
    }
    return bp;
}

BoundResult contraction_bound_subcritical(const BoundParams& bp, std::int64_t tau, std::int64_t t) {
    if (!(bp.alpha < 1.0)) throw std::invalid_argument("subcritical bound needs alpha < 1");
    if (tau < 0 || tau > t) throw std::invalid_argument("window must satisfy 0 <= tau <= t");
    if (bp.v0 == 0.0)
        return {BoundResult::Status::Inapplicable, 1.0, "initial relative velocities vanish; nothing to bound"};
    const double e = 1.0 - bp.alpha;
    const double kappa = *bp.kappa;
    const double head = std::pow(bp.A0 + bp.B0 * static_cast<double>(t), e);
    const double tail = std::pow(bp.A0 + bp.B0 * static_cast<double>(tau), e);
    return {BoundResult::Status::Ok, std::exp(-kappa * (head - tail)), ""};
}

BoundResult contraction_bound_critical(const BoundParams& bp, int bird, std::int64_t tau, std::int64_t t) {
    if (bp.alpha != 1.0) throw std::invalid_argument("critical bound needs alpha = 1");
    if (bird < 1 || bird >= bp.k) throw std::invalid_argument("bird must be a follower");
    if (tau < 0 || tau > t) throw std::invalid_argument("window must satisfy 0 <= tau <= t");
    const double w0 = bp.w0[static_cast<std::size_t>(bird)];
    if (w0 == 0.0) {
        return {BoundResult::Status::Degenerate, t > tau ? 0.0 : 1.0,
                "a leader shares bird " + std::to_string(bird + 1) +
                    "'s initial velocity; no finite-exponent bound exists"};
    }
    const double gamma = bp.gamma[static_cast<std::size_t>(bird)];
    const double base = (bp.A0 + bp.h * w0 * static_cast<double>(tau)) /
                        (bp.A0 + bp.h * w0 * static_cast<double>(t + 1));
    return {BoundResult::Status::Ok, std::pow(base, gamma), ""};
}

BoundResult follower_speed_bound_subcritical(const BoundParams& bp, double v1_initial_speed, std::int64_t t) {
    if (!(bp.alpha < 1.0)) throw std::invalid_argument("subcritical bound needs alpha < 1");
    if (t < 1) throw std::invalid_argument("speed envelope starts at t = 1");
    if (!(v1_initial_speed >= 0.0)) throw std::invalid_argument("negative speed");
    if (bp.v0 == 0.0)
        return {BoundResult::Status::Inapplicable, 0.0, "initial relative velocities vanish; nothing to bound"};
    const double e = 1.0 - bp.alpha;
    const double kappa = *bp.kappa;
    const double value = v1_initial_speed * std::exp(kappa * std::pow(bp.A0, e)) *
                         std::exp(-kappa * std::pow(bp.A0 + bp.B0 * static_cast<double>(t - 1), e));
    return {BoundResult::Status::Ok, value, ""};
}

const char* verdict_name(GuaranteeVerdict v) {
    switch (v) {
        case GuaranteeVerdict::GuaranteedSubcritical: return "guaranteed_subcritical";
        case GuaranteeVerdict::GuaranteedCritical: return "guaranteed_critical";
        case GuaranteeVerdict::NotGuaranteed: return "not_guaranteed";
    }
    return "?";
}

std::vector<ConditionRow> critical_condition_table(const BoundParams& bp) {
    std::vector<ConditionRow> rows;
    rows.reserve(static_cast<std::size_t>(bp.k - 1));
    for (int i = 1; i < bp.k; ++i) {
        ConditionRow row;
        row.bird = i;
        row.gamma = bp.gamma[static_cast<std::size_t>(i)];
        // First follower needs gamma > k - 1; bird l (1-based) below it needs
        // gamma > k - l + 2.
        row.threshold = i == 1 ? static_cast<double>(bp.k - 1) : static_cast<double>(bp.k - i + 1);
        row.degenerate = std::isinf(row.gamma);
        row.satisfied = row.gamma > row.threshold;
        rows.push_back(row);
    }
    return rows;
}

GuaranteeVerdict check_flocking_guarantee(const BoundParams& bp) {
    if (bp.alpha < 1.0) return GuaranteeVerdict::GuaranteedSubcritical;
    if (bp.alpha > 1.0) return GuaranteeVerdict::NotGuaranteed;
    for (const ConditionRow& row : critical_condition_table(bp))
        if (!row.satisfied) return GuaranteeVerdict::NotGuaranteed;
    return GuaranteeVerdict::GuaranteedCritical;
}

bool check_small_velocity_condition(double v0, double p, int k) {
    if (k < 2) throw std::invalid_argument("flock needs at least 2 birds");
    return v0 < p / (2.0 * static_cast<double>(k - 1));
}

double rate_series_term(std::int64_t t, double delta_t, const BoundParams& bp) {
    if (t < 1) throw std::invalid_argument("series starts at t = 1");
    if (!(bp.alpha < 1.0)) throw std::invalid_argument("rate series needs alpha < 1");
    if (!(bp.v0 > 0.0)) throw std::invalid_argument("rate series needs v0 > 0");
    if (!(delta_t > 0.0)) throw std::invalid_argument("delta_t must be positive");
    const double e = 1.0 - bp.alpha;
    const double c = bp.p / (std::pow(2.0 * bp.v0, bp.alpha) * e);
    const double td = static_cast<double>(t);
    return std::pow(td, static_cast<double>(bp.k - 2)) / delta_t * std::exp(-c * std::pow(bp.h * td, e));
}

SeriesDiagnosis rate_series_convergence(const std::function<double(std::int64_t)>& delta_of_t, const BoundParams& bp,
                                        double rel_eps, std::int64_t block, std::int64_t max_terms) {
    if (block < 1 || max_terms < block) throw std::invalid_argument("need max_terms >= block >= 1");
    SeriesDiagnosis d;
    std::int64_t t = 1;
    while (t <= max_terms) {
        double block_sum = 0.0;
        for (std::int64_t n = 0; n < block && t <= max_terms; ++n, ++t) {
            const double delta_t = delta_of_t(t);
            if (!(delta_t > 0.0)) {
                d.note = "delta(" + std::to_string(t) + ") = " + std::to_string(delta_t) +
                         " is not positive; the rate constant is undefined";
                d.terms_evaluated = t - 1;
                return d;
            }
            const double term = rate_series_term(t, delta_t, bp);
            if (!std::isfinite(term)) {
                d.note = "term at t = " + std::to_string(t) + " is not finite";
                d.terms_evaluated = t - 1;
                return d;
            }
            block_sum += term;
        }
        d.partial_sum += block_sum;
        d.terms_evaluated = t - 1;
        // Block contribution negligible against the running sum: converged.
        if (block_sum <= rel_eps * d.partial_sum) {
            d.converged = true;
            d.note = "tail block below relative tolerance";
            return d;
        }
    }
    d.note = "no convergence within " + std::to_string(max_terms) + " terms";
    return d;
}

FlockingVerdict detect_flocking(const std::vector<FlockState>& trajectory, double eps_v, int window, double h) {
    if (window < 1) throw std::invalid_argument("window must be at least 1");
    if (static_cast<std::int64_t>(trajectory.size()) < window)
        throw std::invalid_argument("trajectory shorter than the detection window");
    if (!(eps_v > 0.0)) throw std::invalid_argument("eps_v must be positive");

    FlockingVerdict verdict;
    const FlockState& last = trajectory.back();
    verdict.limit_positions = last.x;

    const std::size_t n = trajectory.size();
    const std::size_t first_in_window = n - static_cast<std::size_t>(window);

    verdict.velocities_vanish = true;
    double drift = 0.0;
    for (std::size_t s = first_in_window; s < n; ++s) {
        const FlockState& st = trajectory[s];
        if (sup_norm(st.v) >= eps_v) verdict.velocities_vanish = false;
        double stray = 0.0;
        for (std::size_t i = 0; i < st.x.size(); ++i) stray = std::max(stray, distance(st.x[i], last.x[i]));
        drift = std::max(drift, stray);
    }
    verdict.positions_converge = drift <= eps_v * static_cast<double>(window) * h;

    // Walk back from the end while the velocity stays quiet.
    std::int64_t quiet = -1;
    for (std::size_t s = n; s-- > 0;) {
        if (sup_norm(trajectory[s].v) < eps_v)
            quiet = trajectory[s].t;
        else
            break;
    }
    verdict.first_quiet_step = quiet;
    return verdict;
}

std::vector<Vec3> two_bird_closed_form(const std::vector<double>& follower_weights, double h, const Vec3& v_init) {
    if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("time step must lie in (0, 1] for two birds");
    std::vector<Vec3> v;
    v.reserve(follower_weights.size() + 1);
    v.push_back(v_init);
    double prod = 1.0;
    for (double a : follower_weights) {
        if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("weight outside [0, 1]");
        prod *= 1.0 - h * a;
        v.push_back(prod * v_init);
    }
    return v;
}

}  // namespace hlflock
