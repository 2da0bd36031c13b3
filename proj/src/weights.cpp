#include "hlflock/weights.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hlflock {

void validate_weights(const WeightMatrix& weights, const Hierarchy& hier) {
    const int k = hier.bird_count();
    if (static_cast<int>(weights.values.size()) != k)
        throw std::invalid_argument("weight matrix has " + std::to_string(weights.values.size()) + " rows for " +
                                    std::to_string(k) + " birds");
    for (int i = 0; i < k; ++i) {
        const auto& row = weights.values[i];
        if (row.size() != hier.leaders_of(i).size())
            throw std::invalid_argument("weight row " + std::to_string(i + 1) + " does not match the leader set");
        for (double a : row) {
            if (!(a >= 0.0 && a <= 1.0) || !std::isfinite(a))
                throw std::invalid_argument("weight outside [0, 1] at bird " + std::to_string(i + 1) + ": " +
                                            std::to_string(a));
        }
    }
}

}  // namespace hlflock
