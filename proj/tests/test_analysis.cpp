#include "doctest.h"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "hlflock/analysis.hpp"
#include "hlflock/dynamics.hpp"
#include "hlflock/hierarchy.hpp"
#include "hlflock/simulate.hpp"
#include "hlflock/state.hpp"

using namespace hlflock;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Two birds, unit initial velocity gap, coincident start: A0 = 1, B0 = 2h v0.
FlockState two_bird_state(double vx, double x2 = 0.0) {
    return make_state(0, {{0, 0, 0}, {x2, 0, 0}}, {{0, 0, 0}, {vx, 0, 0}}, Frame::Relative);
}

}  // namespace

TEST_CASE("bound parameters from a two-bird state") {
    const BoundParams bp = derive_bound_params(two_bird_state(1.0), Hierarchy::chain(2), 0.5, 0.5, 0.5);
    CHECK(bp.k == 2);
    CHECK(bp.x0 == 0.0);
    CHECK(bp.v0 == 1.0);
    CHECK(bp.A0 == 1.0);
    CHECK(bp.B0 == 1.0);
    REQUIRE(bp.kappa.has_value());
    CHECK(*bp.kappa == 0.5);

    CHECK(bp.w0[0] == kInf);
    CHECK(std::isnan(bp.gamma[0]));
    CHECK(bp.w0[1] == 1.0);
    CHECK(bp.gamma[1] == 0.5);
    CHECK(bp.delta[1] == 0.5);
}

TEST_CASE("bound parameters for a three-bird vee") {
    // Velocity gaps chosen dyadic: |v2-v1| = 1/4, |v3-v1| = 1/4, |v3-v2| = 1/8.
    const FlockState s = make_state(
        0, {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}},
        {{0, 0, 0}, {0.25, 0, 0}, {0.21875, 0.12103072956898178, 0}}, Frame::Relative);
    const Hierarchy hier(3, {{}, {0}, {0, 1}});
    const BoundParams bp = derive_bound_params(s, hier, 0.25, 0.5, 1.0);

    CHECK(bp.gamma[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(bp.gamma[2] == doctest::Approx(6.0).epsilon(1e-12));  // 0.5/0.25 + 0.5/0.125
    CHECK(bp.w0[1] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(bp.w0[2] == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(bp.delta[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(bp.delta[2] == doctest::Approx(1.0).epsilon(1e-12));  // min(2, 6) - 1

    CHECK(bp.x0 == doctest::Approx(1.0));
    CHECK_FALSE(bp.kappa.has_value());  // alpha = 1
}

TEST_CASE("bound parameter preconditions") {
    const Hierarchy two = Hierarchy::chain(2);
    const FlockState abs = make_state(0, {{0, 0, 0}, {1, 0, 0}}, {{0, 0, 0}, {1, 0, 0}}, Frame::Absolute);
    CHECK_THROWS_AS(derive_bound_params(abs, two, 0.5, 0.5, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(derive_bound_params(two_bird_state(1.0), two, 0.0, 0.5, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(derive_bound_params(two_bird_state(1.0), two, 0.5, 0.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(derive_bound_params(two_bird_state(1.0), two, 0.5, 1.5, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(derive_bound_params(two_bird_state(1.0), two, 0.5, 0.5, -0.5), std::invalid_argument);
}

TEST_CASE("subcritical contraction envelope") {
    const BoundParams bp = derive_bound_params(two_bird_state(1.0), Hierarchy::chain(2), 0.5, 0.5, 0.5);

    SUBCASE("frozen value: kappa = 1/2, A0 = B0 = 1, window 0..4") {
        const BoundResult r = contraction_bound_subcritical(bp, 0, 4);
        REQUIRE(r.ok());
        // exp(-(sqrt(5) - 1)/2)
        CHECK(r.value == doctest::Approx(0.5390030827240446).epsilon(1e-15));
    }
    SUBCASE("identity at tau = t, strict decay in t, monotone in tau") {
        CHECK(contraction_bound_subcritical(bp, 3, 3).value == 1.0);
        const double d4 = contraction_bound_subcritical(bp, 0, 4).value;
        const double d64 = contraction_bound_subcritical(bp, 0, 64).value;
        const double tail = contraction_bound_subcritical(bp, 16, 64).value;
        CHECK(d64 < d4);
        CHECK(d4 < 1.0);
        CHECK(d64 < tail);  // dropping the head loosens the bound
        CHECK(tail < 1.0);
    }
    SUBCASE("still-flock start has nothing to bound") {
        const BoundParams flat = derive_bound_params(two_bird_state(0.0), Hierarchy::chain(2), 0.5, 0.5, 0.5);
        const BoundResult r = contraction_bound_subcritical(flat, 0, 4);
        CHECK(r.status == BoundResult::Status::Inapplicable);
        CHECK(r.value == 1.0);
    }
    SUBCASE("rejects bad windows and the critical exponent") {
        CHECK_THROWS_AS(contraction_bound_subcritical(bp, 5, 4), std::invalid_argument);
        CHECK_THROWS_AS(contraction_bound_subcritical(bp, -1, 4), std::invalid_argument);
        const BoundParams crit = derive_bound_params(two_bird_state(1.0), Hierarchy::chain(2), 0.5, 0.5, 1.0);
        CHECK_THROWS_AS(contraction_bound_subcritical(crit, 0, 4), std::invalid_argument);
    }
}

TEST_CASE("critical contraction envelope") {
    // gamma = p / w0 = 0.8 / 0.4 = 2; h w0 = 0.2.
    const BoundParams bp = derive_bound_params(two_bird_state(0.4), Hierarchy::chain(2), 0.5, 0.8, 1.0);

    SUBCASE("frozen value: ((1 + 0) / (1 + 0.2 * 20))^2 = 1/25") {
        const BoundResult r = contraction_bound_critical(bp, 1, 0, 19);
        REQUIRE(r.ok());
        CHECK(r.value == doctest::Approx(0.04).epsilon(1e-14));
    }
    SUBCASE("polynomial tail: quadrupling the window quarters the bound") {
        const double b1 = contraction_bound_critical(bp, 1, 0, 19).value;
        // For large t the bound behaves like (h w0 (t+1))^-gamma.
        const double b2 = contraction_bound_critical(bp, 1, 0, 39).value;
        CHECK(b2 < b1);
        CHECK(b2 > b1 / 4.1);
    }
    SUBCASE("a follower that starts at the leader velocity signals degeneracy") {
        const BoundParams flat = derive_bound_params(two_bird_state(0.0), Hierarchy::chain(2), 0.5, 0.8, 1.0);
        const BoundResult pointful = contraction_bound_critical(flat, 1, 0, 19);
        CHECK(pointful.status == BoundResult::Status::Degenerate);
        CHECK(pointful.value == 0.0);
        const BoundResult empty_window = contraction_bound_critical(flat, 1, 5, 5);
        CHECK(empty_window.status == BoundResult::Status::Degenerate);
        CHECK(empty_window.value == 1.0);
    }
    SUBCASE("rejects non-critical exponents and bad windows") {
        const BoundParams sub = derive_bound_params(two_bird_state(0.4), Hierarchy::chain(2), 0.5, 0.8, 0.5);
        CHECK_THROWS_AS(contraction_bound_critical(sub, 1, 0, 19), std::invalid_argument);
        CHECK_THROWS_AS(contraction_bound_critical(bp, 1, 20, 19), std::invalid_argument);
        CHECK_THROWS_AS(contraction_bound_critical(bp, 0, 0, 19), std::invalid_argument);  // leader has no bound
    }
}

TEST_CASE("follower speed envelope starts at the initial speed and decays") {
    const BoundParams bp = derive_bound_params(two_bird_state(0.4, 0.5), Hierarchy::chain(2), 0.2, 0.5, 0.5);
    CHECK(bp.A0 == 2.0);
    CHECK(bp.B0 == doctest::Approx(0.16).epsilon(1e-15));

    const BoundResult at1 = follower_speed_bound_subcritical(bp, 0.4, 1);
    REQUIRE(at1.ok());
    CHECK(at1.value == doctest::Approx(0.4).epsilon(1e-12));

    double prev = at1.value;
    for (std::int64_t t : {2, 5, 20, 100, 400, 2000}) {
        const double cur = follower_speed_bound_subcritical(bp, 0.4, t).value;
        CHECK(cur < prev);
        prev = cur;
    }
    CHECK(prev < 1e-8);  // 0.4 exp(1.25 sqrt(2)) exp(-1.25 sqrt(321.84))

    CHECK_THROWS_AS(follower_speed_bound_subcritical(bp, 0.4, 0), std::invalid_argument);
}

TEST_CASE("flocking guarantee verdicts") {
    const Hierarchy two = Hierarchy::chain(2);

    CHECK(check_flocking_guarantee(derive_bound_params(two_bird_state(1.0), two, 0.5, 0.5, 0.99)) ==
          GuaranteeVerdict::GuaranteedSubcritical);
    // k = 2 critical threshold is gamma_2 > 1.
    CHECK(check_flocking_guarantee(derive_bound_params(two_bird_state(0.4), two, 0.5, 0.8, 1.0)) ==
          GuaranteeVerdict::GuaranteedCritical);
    CHECK(check_flocking_guarantee(derive_bound_params(two_bird_state(1.0), two, 0.5, 0.8, 1.0)) ==
          GuaranteeVerdict::NotGuaranteed);
    CHECK(check_flocking_guarantee(derive_bound_params(two_bird_state(0.4), two, 0.5, 0.8, 1.5)) ==
          GuaranteeVerdict::NotGuaranteed);

    CHECK(verdict_name(GuaranteeVerdict::GuaranteedSubcritical) == std::string("guaranteed_subcritical"));
    CHECK(verdict_name(GuaranteeVerdict::GuaranteedCritical) == std::string("guaranteed_critical"));
    CHECK(verdict_name(GuaranteeVerdict::NotGuaranteed) == std::string("not_guaranteed"));
}

TEST_CASE("critical condition thresholds walk down the hierarchy") {
    // k = 4 chain: thresholds are 3 for the first follower, then 3, then 2.
    const double g = 0.8;
    const FlockState s = make_state(0, {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}},
                                    {{0, 0, 0}, {0.2, 0, 0}, {0.4, 0, 0}, {0.6, 0, 0}}, Frame::Relative);
    const BoundParams bp = derive_bound_params(s, Hierarchy::chain(4), 0.25, g, 1.0);
    const std::vector<ConditionRow> rows = critical_condition_table(bp);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].bird == 1);
    CHECK(rows[0].threshold == 3.0);
    CHECK(rows[1].threshold == 3.0);
    CHECK(rows[2].threshold == 2.0);
    CHECK(rows[0].gamma == doctest::Approx(4.0));  // 0.8 / 0.2
    CHECK(rows[0].satisfied);
    CHECK(rows[1].satisfied);  // 0.8 / 0.2 = 4 > 3 (chain gap)
    CHECK(rows[2].satisfied);
    for (const ConditionRow& r : rows) CHECK_FALSE(r.degenerate);
}

TEST_CASE("small initial velocity condition is strict") {
    CHECK(check_small_velocity_condition(0.19, 0.8, 3));
    CHECK_FALSE(check_small_velocity_condition(0.2, 0.8, 3));  // threshold itself fails
    CHECK_FALSE(check_small_velocity_condition(0.25, 0.8, 3));
    CHECK(check_small_velocity_condition(0.2, 0.5, 2));  // p/(2(k-1)) = 0.25
}

TEST_CASE("decay rate series") {
    const BoundParams bp = derive_bound_params(two_bird_state(1.0), Hierarchy::chain(2), 0.5, 0.5, 0.5);

    SUBCASE("frozen first term") {
        // delta = 1, t = 1: exp(-p/((2 v0)^alpha (1-alpha)) sqrt(h)) = exp(-1/2).
        CHECK(rate_series_term(1, 1.0, bp) == doctest::Approx(0.6065306597126334).epsilon(1e-15));
    }
    SUBCASE("vanishing envelope converges") {
        const SeriesDiagnosis d = rate_series_convergence([](std::int64_t t) { return 1.0 / (double(t) * double(t)); }, bp);
        CHECK(d.converged);
        CHECK(d.partial_sum > 0.0);
        CHECK(d.terms_evaluated < 1000000);
    }
    SUBCASE("an envelope that cancels the decay never converges") {
        const BoundParams bpc = bp;
        const auto cancel = [&bpc](std::int64_t t) {
            return static_cast<double>(t) * rate_series_term(t, 1.0, bpc);
        };
        const SeriesDiagnosis d = rate_series_convergence(cancel, bp, 1e-6, 10, 20000);
        CHECK_FALSE(d.converged);
        CHECK(d.terms_evaluated == 20000);
    }
    SUBCASE("non-positive envelope values are a diagnosis, not a crash") {
        const SeriesDiagnosis d =
            rate_series_convergence([](std::int64_t t) { return t < 5 ? 1.0 : 0.0; }, bp);
        CHECK_FALSE(d.converged);
        CHECK(d.terms_evaluated < 10);
        CHECK(d.note.find("positive") != std::string::npos);
    }
}

TEST_CASE("flocking detection on closed-form trajectories") {
    // Always-on unit weights at h = 1/2 halve the relative velocity each step,
    // so positions converge to x + v (geometric series).
    const FlockState init = make_state(0, {{0, 0, 0}, {1, 0, 0}}, {{0, 0, 0}, {1, 0, 0}}, Frame::Relative);
    const InteractionModel unit = InteractionModel::power_law(0.0);
    const Trajectory traj = simulate(init, Hierarchy::chain(2), unit, 0.5, RngStream(1), 60);

    const FlockingVerdict fv = detect_flocking(traj.states, 1e-6, 20, 0.5);
    CHECK(fv.velocities_vanish);
    CHECK(fv.positions_converge);
    CHECK(fv.flocking());
    // 2^-20 is the first power below 1e-6.
    CHECK(fv.first_quiet_step == 20);
    REQUIRE(fv.limit_positions.size() == 2);
    CHECK(fv.limit_positions[1].x == doctest::Approx(2.0).epsilon(1e-9));

    SUBCASE("a too-short window is rejected") {
        CHECK_THROWS_AS(detect_flocking(traj.states, 1e-6, 62, 0.5), std::invalid_argument);
        CHECK_THROWS_AS(detect_flocking(traj.states, 1e-6, 0, 0.5), std::invalid_argument);
    }

    SUBCASE("supercritical drift does not flock in this horizon") {
        const InteractionModel weak = InteractionModel::power_law(3.0);
        const FlockState far = make_state(0, {{0, 0, 0}, {10, 0, 0}}, {{0, 0, 0}, {1, 0, 0}}, Frame::Relative);
        const Trajectory t2 = simulate(far, Hierarchy::chain(2), weak, 0.5, RngStream(1), 500);
        const FlockingVerdict fv2 = detect_flocking(t2.states, 1e-6, 50, 0.5);
        CHECK_FALSE(fv2.velocities_vanish);
        CHECK_FALSE(fv2.flocking());
        CHECK(fv2.first_quiet_step == -1);
    }
}

TEST_CASE("two-bird product oracle") {
    const std::vector<double> weights = {1.0, 0.5, 0.0};
    const std::vector<Vec3> v = two_bird_closed_form(weights, 0.5, Vec3{1.0, 0.0, 0.0});
    REQUIRE(v.size() == 4);
    CHECK(v[0].x == 1.0);
    CHECK(v[1].x == 0.5);    // 1 - 0.5 * 1
    CHECK(v[2].x == 0.375);  // * (1 - 0.25)
    CHECK(v[3].x == 0.375);  // dropped link leaves the velocity alone

    CHECK_THROWS_AS(two_bird_closed_form({1.5}, 0.5, Vec3{1, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(two_bird_closed_form({0.5}, 0.0, Vec3{1, 0, 0}), std::invalid_argument);
}

TEST_CASE("stepper agrees with the two-bird oracle on shared weights") {
    const FlockState init = make_state(0, {{0, 0, 0}, {1, 0, 0}}, {{0, 0, 0}, {0.5, 0.25, 0.125}}, Frame::Relative);
    const InteractionModel m = InteractionModel::bernoulli_failure(0.5, 0.5);
    const Trajectory traj = simulate(init, Hierarchy::chain(2), m, 0.5, RngStream(77, 3), 200);

    std::vector<double> realized;
    for (const WeightMatrix& w : traj.weights) realized.push_back(w.values[1][0]);
    const std::vector<Vec3> oracle = two_bird_closed_form(realized, 0.5, init.v[1]);

    REQUIRE(oracle.size() == traj.states.size());
    for (std::size_t t = 0; t < oracle.size(); ++t) {
        const Vec3 diff = traj.states[t].v[1] - oracle[t];
        CHECK(diff.norm() <= 1e-12 * std::max(1e-300, oracle[t].norm()));
    }
}
