#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hlflock/hierarchy.hpp"
#include "hlflock/interactions.hpp"
#include "hlflock/rng.hpp"
#include "hlflock/state.hpp"

namespace hlflock {

/// Flocking-detection thresholds (plumbing, configurable).
struct DetectOptions {
    double eps_v = 1e-6;
    int window = 50;
};

/// Explicit Absolute-frame initial conditions.
struct ExplicitInitial {
    std::vector<Vec3> positions;
    std::vector<Vec3> velocities;
};

/// Seeded random initial conditions: positions uniform in a cube, velocities
/// uniform in a ball.
struct SampledInitial {
    double box_side = 1.0;
    double speed = 0.1;
};

using InitialConditions = std::variant<ExplicitInitial, SampledInitial>;

/// Grid for the sweep command; empty axes mean "not swept".
struct SweepGrid {
    std::vector<double> alpha;
    std::vector<double> p;
    std::vector<double> speed;  // requires sampled initial conditions
};

/// One fully-specified run. load_config builds this from a JSON document,
/// validating every constraint (fail-closed: unknown keys are errors).
struct SimConfig {
    int k = 2;
    double h = 0.5;
    std::int64_t horizon = 100;
    std::uint64_t seed = 0;
    Hierarchy hierarchy = Hierarchy::chain(2);
    std::string hierarchy_preset;  // "chain", "star", or "" for explicit
    InteractionModel model = InteractionModel::power_law(0.0);
    InitialConditions initial = SampledInitial{};
    DetectOptions detect;

    // Ensemble defaults; overridable from the command line.
    std::uint64_t replicas = 100;
    std::optional<SweepGrid> sweep;

    std::optional<std::string> out_dir;

    /// Materializes the Absolute-frame initial state (sampling through the
    /// replica's step-0 stream slots when the config asks for random draws).
    FlockState initial_state(const RngStream& rng) const;
};

/// Parses and validates a config document; throws ConfigError naming the
/// violated constraint or the unknown key.
SimConfig load_config(const std::string& path);
SimConfig parse_config_json(const std::string& text);

/// Canonical JSON serialization; parse -> serialize is idempotent.
std::string config_to_json(const SimConfig& cfg);

}  // namespace hlflock
