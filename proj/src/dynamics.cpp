#include "hlflock/dynamics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "hlflock/errors.hpp"

namespace hlflock {

double sup_norm(std::span<const Vec3> vectors) {
    if (vectors.empty()) throw std::invalid_argument("sup_norm of an empty array");
    double m = 0.0;
    for (const Vec3& y : vectors) {
        if (!y.is_finite()) throw std::invalid_argument("sup_norm of a non-finite vector");
        m = std::max(m, y.norm());
    }
    return m;
}

double max_pairwise_distance(std::span<const Vec3> vectors) {
    if (vectors.empty()) throw std::invalid_argument("max_pairwise_distance of an empty array");
    double m = 0.0;
    for (std::size_t i = 0; i < vectors.size(); ++i)
        for (std::size_t j = i + 1; j < vectors.size(); ++j) m = std::max(m, distance(vectors[i], vectors[j]));
    return m;
}

FlockState step(const FlockState& state, const Hierarchy& hier, const WeightMatrix& weights, double h) {
    validate_state(state);
    if (hier.bird_count() != state.bird_count())
        throw std::invalid_argument("hierarchy size does not match the flock");
    validate_weights(weights, hier);
    if (weights.t != state.t + 1)
        throw std::invalid_argument("weights tagged " + std::to_string(weights.t) + " cannot drive the step to " +
                                    std::to_string(state.t + 1));
    const int k = state.bird_count();
    if (!(h > 0.0) || h > max_timestep(k))
        throw std::invalid_argument("time step must lie in (0, 1/(k-1)], got " + std::to_string(h));

    FlockState next;
    next.t = state.t + 1;
    next.frame = state.frame;
    next.x.resize(static_cast<std::size_t>(k));
    next.v.resize(static_cast<std::size_t>(k));

    // fl(1/(k-1)) * (k-1) may exceed 1 by a few ulps; that much slop is fine.
    const double slop = 16.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(k);
    for (int i = 0; i < k; ++i) {
        next.x[i] = state.x[i] + h * state.v[i];
        const double own = 1.0 - h * weights.sum_for(i);
        if (own < -slop || own > 1.0 + slop)
            throw InvariantError("convexity coefficient " + std::to_string(own) + " for bird " + std::to_string(i + 1));
        Vec3 v = own * state.v[i];
        auto ls = hier.leaders_of(i);
        for (std::size_t n = 0; n < ls.size(); ++n) v += (h * weights.values[i][n]) * state.v[ls[n]];
        next.v[i] = v;
    }
    return next;
}

FlockState to_relative(const FlockState& state) {
    validate_state(state);
    if (state.frame == Frame::Relative) throw std::invalid_argument("state is already in the relative frame");
    FlockState rel;
    rel.t = state.t;
    rel.frame = Frame::Relative;
    const std::size_t k = state.x.size();
    rel.x.resize(k);
    rel.v.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        rel.x[i] = state.x[i] - state.x[0];
        rel.v[i] = state.v[i] - state.v[0];
    }
    // Subtraction leaves exact zeros for bird 0, so the frame invariant holds.
    return rel;
}

}  // namespace hlflock
