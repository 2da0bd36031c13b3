#pragma once

#include <cstdint>
#include <vector>

#include "hlflock/vec3.hpp"

namespace hlflock {

/// Coordinate frame of a flock state. In the Relative frame bird 0 is the
/// origin: its position and velocity are exactly zero and stay zero.
enum class Frame { Absolute, Relative };

/// Snapshot of a k-bird flock at one time step. Immutable by convention:
/// the stepping functions return fresh states instead of mutating.
struct FlockState {
    std::int64_t t = 0;
    std::vector<Vec3> x;
    std::vector<Vec3> v;
    Frame frame = Frame::Absolute;

    int bird_count() const { return static_cast<int>(x.size()); }
};

/// Builds a state after checking the structural invariants: k >= 2, matching
/// array lengths, finite components, and (for the Relative frame) bird 0
/// pinned at the origin. Throws std::invalid_argument on violation.
FlockState make_state(std::int64_t t, std::vector<Vec3> x, std::vector<Vec3> v, Frame frame);

/// Re-runs the make_state checks on an existing state.
void validate_state(const FlockState& state);

}  // namespace hlflock
