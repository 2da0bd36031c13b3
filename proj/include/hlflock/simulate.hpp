#pragma once

#include <cstdint>
#include <vector>

#include "hlflock/dynamics.hpp"
#include "hlflock/hierarchy.hpp"
#include "hlflock/interactions.hpp"
#include "hlflock/rng.hpp"
#include "hlflock/state.hpp"
#include "hlflock/weights.hpp"

namespace hlflock {

/// A realized run: states at t = 0..T plus the weight matrices that produced
/// them (weights[s-1] is tagged s and drove the update from s-1 to s).
struct Trajectory {
    double h = 0.0;
    Frame frame = Frame::Absolute;
    std::vector<FlockState> states;
    std::vector<WeightMatrix> weights;

    std::int64_t horizon() const { return static_cast<std::int64_t>(states.size()) - 1; }

    /// Realized contraction factor 1 - h sum_j a_ij[s] for bird i at step tag s.
    double contraction(int bird, std::int64_t s) const;
};

/// Single-trajectory integrator. Strictly sequential; every advance checks
/// the pathwise invariants (velocity sup-norm non-increasing, leader velocity
/// constant, position dispersion within the linear growth envelopes) and
/// throws InvariantError on violation; such a failure is always a bug.
class Simulator {
  public:
    Simulator(FlockState initial, Hierarchy hier, InteractionModel model, double h, RngStream rng);

    const FlockState& state() const { return state_; }
    const Hierarchy& hierarchy() const { return hier_; }
    double h() const { return h_; }

    /// Samples weights tagged state().t + 1 and steps once.
    /// Returns the realized weights.
    const WeightMatrix& advance();

    const WeightMatrix& last_weights() const { return last_weights_; }

    // Initial dispersion constants of the run (relative-frame sup-norms).
    double x0() const { return x0_; }
    double v0() const { return v0_; }

  private:
    void check_invariants(const FlockState& before, const FlockState& after) const;

    FlockState state_;
    Hierarchy hier_;
    InteractionModel model_;
    double h_;
    RngStream rng_;
    WeightMatrix last_weights_;

    Vec3 v_leader0_;  // bird 0's velocity at t=0 (constancy check)
    std::int64_t t0_ = 0;
    double x0_ = 0.0;
    double v0_ = 0.0;
    double v_own_frame_sup_prev_ = 0.0;
    double mono_tol_ = 0.0;
};

/// Runs `steps` steps from the initial state and records the full history.
Trajectory simulate(const FlockState& initial, const Hierarchy& hier, const InteractionModel& model, double h,
                    const RngStream& rng, std::int64_t steps);

/// Draws an Absolute-frame initial state: positions uniform in the cube
/// [-box_side/2, box_side/2]^3, velocities uniform in the ball of radius
/// `speed`. Consumes the step-0 slots of the stream, so initial conditions
/// are exactly as reproducible as the weight draws.
FlockState sample_initial_state(int k, double box_side, double speed, const RngStream& rng);

}  // namespace hlflock
