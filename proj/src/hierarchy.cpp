#include "hlflock/hierarchy.hpp"

#include <algorithm>
#include <stdexcept>

namespace hlflock {

Hierarchy::Hierarchy(int k, std::vector<std::vector<int>> leaders) : k_(k), leaders_(std::move(leaders)) {
    if (k < 0) throw std::invalid_argument("negative flock size");
    if (static_cast<int>(leaders_.size()) != k)
        throw std::invalid_argument("leader table has " + std::to_string(leaders_.size()) + " rows for " +
                                    std::to_string(k) + " birds");
}

Hierarchy Hierarchy::chain(int k) {
    std::vector<std::vector<int>> leaders(static_cast<std::size_t>(std::max(k, 0)));
    for (int i = 1; i < k; ++i) leaders[i] = {i - 1};
    return Hierarchy(k, std::move(leaders));
}

Hierarchy Hierarchy::star(int k) {
    std::vector<std::vector<int>> leaders(static_cast<std::size_t>(std::max(k, 0)));
    for (int i = 1; i < k; ++i) leaders[i] = {0};
    return Hierarchy(k, std::move(leaders));
}

HierarchyVerdict validate_hierarchy(const Hierarchy& hier) {
    const int k = hier.bird_count();
    if (k < 2) return {false, -1, "flock needs at least 2 birds"};
    if (!hier.leaders_of(0).empty()) return {false, 0, "bird 1 must have no leaders"};
    for (int i = 1; i < k; ++i) {
        auto ls = hier.leaders_of(i);
        // Reasons use the 1-based labels that configs and reports show.
        const std::string who = "bird " + std::to_string(i + 1);
        if (ls.empty()) return {false, i, who + " has an empty leader set"};
        std::vector<int> seen;
        for (int j : ls) {
            if (j < 0 || j >= i) return {false, i, who + " lists an out-of-range leader " + std::to_string(j + 1)};
            if (std::find(seen.begin(), seen.end(), j) != seen.end())
                return {false, i, who + " lists leader " + std::to_string(j + 1) + " twice"};
            seen.push_back(j);
        }
    }
    return {};
}

}  // namespace hlflock
