#pragma once

#include <span>

#include "hlflock/hierarchy.hpp"
#include "hlflock/state.hpp"
#include "hlflock/weights.hpp"

namespace hlflock {

/// Max over birds of the per-bird Euclidean norm: the flock's dispersion
/// measure. Requires a non-empty array of finite vectors.
double sup_norm(std::span<const Vec3> vectors);

/// Largest pairwise distance max_{i,j} |y_i - y_j|.
double max_pairwise_distance(std::span<const Vec3> vectors);

/// Advances the flock one step:
///
///   x'_i = x_i + h v_i                (old velocities)
///   v'_i = (1 - h sum_j a_ij) v_i + h sum_j a_ij v_j
///
/// with the sums over bird i's leaders. Bird 0 has no leaders, so its
/// velocity never changes. The frame is preserved; the weights' step tag
/// must equal state.t + 1 and h must satisfy 0 < h <= 1/(k-1) so that the
/// velocity update stays a convex combination. Throws std::invalid_argument
/// on precondition violations and InvariantError if a convexity coefficient
/// leaves [0, 1] beyond rounding slop.
FlockState step(const FlockState& state, const Hierarchy& hier, const WeightMatrix& weights, double h);

/// Rebases an Absolute-frame state on bird 0: positions relative to bird 0's
/// current position, velocities relative to bird 0's velocity (constant in
/// time, so equal to its initial one). Pairwise differences are unchanged.
/// Rejects states already in the Relative frame.
FlockState to_relative(const FlockState& state);

/// Upper bound for h at flock size k (convex-combination guarantee).
inline double max_timestep(int k) { return 1.0 / static_cast<double>(k - 1); }

}  // namespace hlflock
