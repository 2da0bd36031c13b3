#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hlflock/hierarchy.hpp"

namespace hlflock {

/// One realized set of interaction coefficients for a single step. Entry
/// values[i][n] is the weight bird i puts on its n-th leader (aligned with
/// Hierarchy::leaders_of(i)); entries exist only on the hierarchy's support.
/// The step tag records which velocity update these weights drive: weights
/// tagged t update the state from t-1 to t.
struct WeightMatrix {
    std::int64_t t = 0;
    std::vector<std::vector<double>> values;

    double sum_for(int bird) const {
        double s = 0.0;
        for (double a : values[bird]) s += a;
        return s;
    }
};

/// Checks shape against the hierarchy and that every entry lies in [0, 1].
/// Throws std::invalid_argument on violation.
void validate_weights(const WeightMatrix& weights, const Hierarchy& hier);

}  // namespace hlflock
