#pragma once

#include <span>
#include <string>
#include <vector>

namespace hlflock {

/// Leader structure of a hierarchical flock: bird i > 0 watches a set of
/// lower-indexed birds, bird 0 watches nobody. Bird indices are 0-based in
/// the API; serialized formats use the conventional 1-based labels.
///
/// The constructor only normalizes shape; semantic validity (non-empty
/// leader sets pointing strictly downward) is checked by validate_hierarchy
/// so that invalid structures can be inspected and rejected with a verdict.
class Hierarchy {
  public:
    /// leaders[i] lists the leaders of bird i; leaders.size() must equal k.
    Hierarchy(int k, std::vector<std::vector<int>> leaders);

    /// Chain preset: bird i watches bird i-1.
    static Hierarchy chain(int k);
    /// Star preset: every bird watches bird 0.
    static Hierarchy star(int k);

    int bird_count() const { return k_; }
    std::span<const int> leaders_of(int i) const { return leaders_[i]; }
    const std::vector<std::vector<int>>& leaders() const { return leaders_; }

    bool operator==(const Hierarchy& other) const = default;

  private:
    int k_;
    std::vector<std::vector<int>> leaders_;
};

/// Outcome of checking the hierarchical-leadership conditions.
struct HierarchyVerdict {
    bool ok = true;
    int violating_bird = -1;  // 0-based; -1 when ok or when the flock itself is malformed
    std::string reason;
};

/// Accepts iff every bird i > 0 has a non-empty leader set whose members are
/// all strictly below i (and in range, without duplicates), bird 0 has none,
/// and k >= 2. On rejection the verdict names the violating bird.
HierarchyVerdict validate_hierarchy(const Hierarchy& hier);

}  // namespace hlflock
