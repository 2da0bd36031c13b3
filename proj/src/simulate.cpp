#include "hlflock/simulate.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hlflock/errors.hpp"

namespace hlflock {

double Trajectory::contraction(int bird, std::int64_t s) const {
    if (weights.empty()) throw std::out_of_range("trajectory has no steps");
    const std::int64_t idx = s - weights.front().t;
    if (idx < 0 || idx >= static_cast<std::int64_t>(weights.size()))
        throw std::out_of_range("no weights tagged " + std::to_string(s));
    return 1.0 - h * weights[static_cast<std::size_t>(idx)].sum_for(bird);
}

Simulator::Simulator(FlockState initial, Hierarchy hier, InteractionModel model, double h, RngStream rng)
    : state_(std::move(initial)), hier_(std::move(hier)), model_(std::move(model)), h_(h), rng_(rng) {
    validate_state(state_);
    if (auto v = validate_hierarchy(hier_); !v.ok) throw std::invalid_argument("invalid hierarchy: " + v.reason);
    if (hier_.bird_count() != state_.bird_count())
        throw std::invalid_argument("hierarchy size does not match the flock");
    if (!(h_ > 0.0) || h_ > max_timestep(state_.bird_count()))
        throw std::invalid_argument("time step must lie in (0, 1/(k-1)], got " + std::to_string(h_));

    v_leader0_ = state_.v[0];
    t0_ = state_.t;
    if (state_.frame == Frame::Relative) {
        x0_ = sup_norm(state_.x);
        v0_ = sup_norm(state_.v);
    } else {
        const FlockState rel = to_relative(state_);
        x0_ = sup_norm(rel.x);
        v0_ = sup_norm(rel.v);
    }
    v_own_frame_sup_prev_ = sup_norm(state_.v);
    mono_tol_ = 1e-12 * std::max(1.0, v_own_frame_sup_prev_);
}

const WeightMatrix& Simulator::advance() {
    last_weights_ = sample_weights(model_, state_, hier_, rng_);
    FlockState next = step(state_, hier_, last_weights_, h_);
    check_invariants(state_, next);
    state_ = std::move(next);
    v_own_frame_sup_prev_ = sup_norm(state_.v);
    return last_weights_;
}

void Simulator::check_invariants(const FlockState& before, const FlockState& after) const {
    if (!(after.v[0] == v_leader0_))
        throw InvariantError("leader velocity changed at step " + std::to_string(after.t));

    // Convex velocity updates cannot grow the sup norm (any fixed frame).
    const double sup_after = sup_norm(after.v);
    if (sup_after > v_own_frame_sup_prev_ + mono_tol_)
        throw InvariantError("velocity sup-norm grew from " + std::to_string(v_own_frame_sup_prev_) + " to " +
                             std::to_string(sup_after) + " at step " + std::to_string(after.t));

    // Dispersion stays inside the linear envelope 2 x0 + 2 h v0 t (pairwise
    // distances are frame-invariant). Slop covers per-step rounding.
    const double elapsed = static_cast<double>(after.t - t0_);
    const double envelope = 2.0 * x0_ + 2.0 * h_ * v0_ * elapsed;
    const double tol = 1e-9 * std::max(1.0, envelope);
    if (max_pairwise_distance(after.x) > envelope + tol)
        throw InvariantError("flock dispersion escaped its envelope at step " + std::to_string(after.t));
    (void)before;
}

Trajectory simulate(const FlockState& initial, const Hierarchy& hier, const InteractionModel& model, double h,
                    const RngStream& rng, std::int64_t steps) {
    if (steps < 0) throw std::invalid_argument("negative step count");
    Simulator sim(initial, hier, model, h, rng);
    Trajectory traj;
    traj.h = h;
    traj.frame = initial.frame;
    traj.states.reserve(static_cast<std::size_t>(steps) + 1);
    traj.weights.reserve(static_cast<std::size_t>(steps));
    traj.states.push_back(sim.state());
    for (std::int64_t s = 0; s < steps; ++s) {
        traj.weights.push_back(sim.advance());
        traj.states.push_back(sim.state());
    }
    return traj;
}

FlockState sample_initial_state(int k, double box_side, double speed, const RngStream& rng) {
    if (k < 2) throw std::invalid_argument("flock needs at least 2 birds");
    if (!(box_side >= 0.0) || !(speed >= 0.0)) throw std::invalid_argument("negative sampling extent");

    FlockState s;
    s.t = 0;
    s.frame = Frame::Absolute;
    s.x.resize(static_cast<std::size_t>(k));
    s.v.resize(static_cast<std::size_t>(k));
    constexpr double two_pi = 6.283185307179586476925286766559;
    for (int i = 0; i < k; ++i) {
        s.x[i] = {(rng.uniform(0, i, 0) - 0.5) * box_side, (rng.uniform(0, i, 1) - 0.5) * box_side,
                  (rng.uniform(0, i, 2) - 0.5) * box_side};
        // Uniform in the ball: isotropic direction, radius ~ speed * u^(1/3).
        const double cos_theta = 1.0 - 2.0 * rng.uniform(0, i, 3);
        const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
        const double phi = two_pi * rng.uniform(0, i, 4);
        const double r = speed * std::cbrt(rng.uniform(0, i, 5));
        s.v[i] = {r * sin_theta * std::cos(phi), r * sin_theta * std::sin(phi), r * cos_theta};
    }
    validate_state(s);
    return s;
}

}  // namespace hlflock
