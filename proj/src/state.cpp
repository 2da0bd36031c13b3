#include "hlflock/state.hpp"

#include <stdexcept>
#include <string>

namespace hlflock {

void validate_state(const FlockState& state) {
    const auto k = state.x.size();
    if (k < 2) throw std::invalid_argument("flock needs at least 2 birds, got " + std::to_string(k));
    if (state.v.size() != k)
        throw std::invalid_argument("position/velocity length mismatch: " + std::to_string(k) + " vs " +
                                    std::to_string(state.v.size()));
    for (std::size_t i = 0; i < k; ++i) {
        if (!state.x[i].is_finite() || !state.v[i].is_finite())
            throw std::invalid_argument("non-finite component at bird " + std::to_string(i));
    }
    if (state.frame == Frame::Relative) {
        if (!(state.x[0] == Vec3{}) || !(state.v[0] == Vec3{}))
            throw std::invalid_argument("relative frame requires bird 0 pinned at the origin");
    }
}

FlockState make_state(std::int64_t t, std::vector<Vec3> x, std::vector<Vec3> v, Frame frame) {
    FlockState s{t, std::move(x), std::move(v), frame};
    validate_state(s);
    return s;
}

}  // namespace hlflock
