#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hlflock/hierarchy.hpp"
#include "hlflock/state.hpp"
#include "hlflock/vec3.hpp"

namespace hlflock {

/// Constants derived from a Relative-frame initial state that feed every
/// theoretical bound. Per-bird arrays are indexed by 0-based bird id; the
/// leader (bird 0) has no entries and carries NaN / +inf placeholders.
struct BoundParams {
    int k = 0;
    double h = 0.0;
    double p = 0.0;
    double alpha = 0.0;

    double x0 = 0.0;  // sup-norm of initial relative positions
    double v0 = 0.0;  // sup-norm of initial relative velocities
    double A0 = 1.0;  // 1 + 2 x0
    double B0 = 0.0;  // 2 h v0

    /// h p / ((1 - alpha) B0); empty when alpha >= 1 or v0 = 0.
    std::optional<double> kappa;

    /// Smallest initial velocity gap to a leader, per bird.
    std::vector<double> w0;
    /// Sum over leaders of p / |v_i[0] - v_j[0]|, with 1/0 = +inf.
    std::vector<double> gamma;
    /// delta[1] = gamma[1]; delta[i] = min(delta[i-1], gamma[i]) - 1.
    std::vector<double> delta;
};

BoundParams derive_bound_params(const FlockState& initial, const Hierarchy& hier, double h, double p, double alpha);

/// Result of evaluating one of the contraction-product envelopes.
struct BoundResult {
    enum class Status {
        Ok,
        Inapplicable,  // B0 = 0: relative velocity already zero, nothing to bound
        Degenerate,    // some leader shares the bird's initial velocity (w0 = 0, gamma = inf)
    };
    Status status = Status::Ok;
    double value = 1.0;
    std::string note;

    bool ok() const { return status == Status::Ok; }
};

/// Envelope for E prod_{s=tau+1}^{t+1} (1 - h sum_j a_ij[s]) when alpha < 1:
///
///   exp[ -kappa ((A0 + B0 t)^(1-alpha) - (A0 + B0 tau)^(1-alpha)) ]
///
/// Requires tau <= t. Inapplicable when v0 = 0 (B0 = 0).
BoundResult contraction_bound_subcritical(const BoundParams& bp, std::int64_t tau, std::int64_t t);

/// Envelope for the same product at alpha = 1 for bird `bird`:
///
///   ((A0 + h w0 tau) / (A0 + h w0 (t+1)))^gamma
///
/// Requires tau <= t. When the bird's w0 is 0 (equivalently gamma = inf) no
/// finite-exponent bound exists: the result signals Degenerate and carries
/// the limiting value (0 for t > tau, else 1) for information only.
BoundResult contraction_bound_critical(const BoundParams& bp, int bird, std::int64_t tau, std::int64_t t);

/// Envelope for the expected relative speed of bird 1 (the first follower)
/// at time t >= 1 when alpha < 1:
///
///   |v_1[0]| exp[kappa A0^(1-alpha)] exp[-kappa (A0 + B0 (t-1))^(1-alpha)]
BoundResult follower_speed_bound_subcritical(const BoundParams& bp, double v1_initial_speed, std::int64_t t);

enum class GuaranteeVerdict {
    GuaranteedSubcritical,  // alpha < 1: flocking guaranteed outright
    GuaranteedCritical,     // alpha = 1 and every gamma clears its threshold
    NotGuaranteed,          // the guarantee is silent (it never asserts non-flocking)
};

const char* verdict_name(GuaranteeVerdict v);

/// Applies the flocking guarantee: subcritical iff alpha < 1; critical iff
/// alpha = 1 and, with birds labelled 1..k, gamma_2 > k - 1 and
/// gamma_l > k - l + 2 for l = 3..k (gamma = +inf clears every threshold).
GuaranteeVerdict check_flocking_guarantee(const BoundParams& bp);

/// Per-bird row of the critical-case condition table.
struct ConditionRow {
    int bird = 0;  // 0-based
    double gamma = 0.0;
    double threshold = 0.0;
    bool satisfied = false;
    bool degenerate = false;  // gamma = inf (a leader shares this bird's initial velocity)
};

std::vector<ConditionRow> critical_condition_table(const BoundParams& bp);

/// Small-initial-velocity sufficient condition at alpha = 1: v0 < p / (2(k-1)).
bool check_small_velocity_condition(double v0, double p, int k);

/// t-th summand of the decay-rate series for alpha < 1:
///
///   delta_t^(-1) t^(k-2) exp[ -(p / ((2 v0)^alpha (1 - alpha))) (h t)^(1-alpha) ]
double rate_series_term(std::int64_t t, double delta_t, const BoundParams& bp);

struct SeriesDiagnosis {
    bool converged = false;
    double partial_sum = 0.0;
    std::int64_t terms_evaluated = 0;
    std::string note;
};

/// Sums rate_series_term over t = 1, 2, ... in blocks of `block` terms and
/// reports convergence once a block's contribution drops below `rel_eps`
/// relative to the running partial sum, or diagnoses non-convergence when
/// `max_terms` is exhausted first.
SeriesDiagnosis rate_series_convergence(const std::function<double(std::int64_t)>& delta_of_t, const BoundParams& bp,
                                        double rel_eps = 1e-6, std::int64_t block = 10,
                                        std::int64_t max_terms = 1000000);

/// Verdict of trajectory-level flocking detection.
struct FlockingVerdict {
    bool velocities_vanish = false;
    bool positions_converge = false;
    std::vector<Vec3> limit_positions;  // final relative positions
    /// First step from which the velocity sup-norm stays below the tolerance
    /// through the end of the trajectory; -1 if it never settles.
    std::int64_t first_quiet_step = -1;

    bool flocking() const { return velocities_vanish && positions_converge; }
};

/// Inspects the last `window` states of a Relative-frame trajectory:
/// velocities vanish iff sup|v| stays below eps_v across the window, and
/// positions converge iff no state in the window strays more than
/// eps_v * window * h from the final one. Requires at least window states.
FlockingVerdict detect_flocking(const std::vector<FlockState>& trajectory, double eps_v, int window, double h);

/// Closed-form velocity of the single follower in a two-bird flock: from the
/// realized weights a[1..T] it returns v[t] = prod_{s<=t} (1 - h a[s]) v_init
/// for t = 0..T. Exactness oracle for the stepped dynamics.
std::vector<Vec3> two_bird_closed_form(const std::vector<double>& follower_weights, double h, const Vec3& v_init);

}  // namespace hlflock
