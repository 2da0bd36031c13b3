#pragma once

#include <cstdint>

namespace hlflock {

/// Counter-based random stream. Every variate is a pure function of
/// (master seed, replica, step tag, bird, slot), so draws are reproducible
/// and independent of evaluation order: replicas can run on any schedule and
/// adding replicas never perturbs existing ones.
///
/// Mixing is a published splitmix64 chain: h = seed, then for each
/// coordinate c in (replica, t, bird, slot): h = splitmix64(h ^ c).
class RngStream {
  public:
    explicit RngStream(std::uint64_t master_seed, std::uint64_t replica = 0)
        : seed_(master_seed), replica_(replica) {}

    /// Same master seed, different replica coordinate.
    RngStream replica(std::uint64_t r) const { return RngStream(seed_, r); }

    std::uint64_t master_seed() const { return seed_; }
    std::uint64_t replica_id() const { return replica_; }

    /// Uniform variate on [0, 1) for stream coordinates (t, bird, slot).
    /// For interaction sampling, slot is the leader's bird index; step tag
    /// t = 0 is reserved for initial-condition sampling.
    double uniform(std::int64_t t, std::int64_t bird, std::int64_t slot) const {
        return to_unit(word(t, bird, slot));
    }

    static std::uint64_t splitmix64(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

  private:
    std::uint64_t word(std::int64_t t, std::int64_t bird, std::int64_t slot) const {
        std::uint64_t h = seed_;
        h = splitmix64(h ^ replica_);
        h = splitmix64(h ^ static_cast<std::uint64_t>(t));
        h = splitmix64(h ^ static_cast<std::uint64_t>(bird));
        h = splitmix64(h ^ static_cast<std::uint64_t>(slot));
        return h;
    }

    static double to_unit(std::uint64_t w) {
        // 53 high bits -> [0, 1)
        return static_cast<double>(w >> 11) * 0x1.0p-53;
    }

    std::uint64_t seed_;
    std::uint64_t replica_;
};

}  // namespace hlflock
