#include "doctest.h"

#include <string>
#include <variant>

#include "hlflock/config.hpp"
#include "hlflock/dynamics.hpp"
#include "hlflock/errors.hpp"

using namespace hlflock;

namespace {

const char* kFull = R"({
  "k": 3,
  "h": 0.25,
  "horizon": 50,
  "seed": 9,
  "hierarchy": {"leaders": [[], [1], [1, 2]]},
  "interaction": {"kind": "scaled_random", "p": 0.5, "alpha": 1.0,
                  "scale": {"type": "uniform", "lo": 0.25, "hi": 1.0}},
  "initial": {"positions": [[0,0,0],[1,0,0],[0,1,0]],
              "velocities": [[0.1,0,0],[0.2,0,0],[0,0.2,0]]},
  "detect": {"eps_v": 1e-7, "window": 25},
  "replicas": 64,
  "sweep": {"alpha": [0.5, 1.0], "p": [0.25, 0.75]},
  "out_dir": "results"
})";

}  // namespace

TEST_CASE("full config round trip") {
    const SimConfig cfg = parse_config_json(kFull);
    CHECK(cfg.k == 3);
    CHECK(cfg.h == 0.25);
    CHECK(cfg.horizon == 50);
    CHECK(cfg.seed == 9);
    CHECK(cfg.hierarchy_preset.empty());
    REQUIRE(cfg.hierarchy.leaders_of(2).size() == 2);
    CHECK(cfg.hierarchy.leaders_of(2)[0] == 0);  // labels are 1-based in the file
    CHECK(cfg.hierarchy.leaders_of(2)[1] == 1);
    CHECK(cfg.model.kind() == InteractionKind::ScaledRandom);
    CHECK(cfg.model.scale_distribution().lo == 0.25);
    CHECK(cfg.detect.eps_v == 1e-7);
    CHECK(cfg.detect.window == 25);
    CHECK(cfg.replicas == 64);
    REQUIRE(cfg.sweep.has_value());
    CHECK(cfg.sweep->alpha.size() == 2);
    CHECK(cfg.sweep->speed.empty());
    REQUIRE(cfg.out_dir.has_value());
    CHECK(*cfg.out_dir == "results");

    const ExplicitInitial& init = std::get<ExplicitInitial>(cfg.initial);
    CHECK(init.positions[1].x == 1.0);
    CHECK(init.velocities[2].y == 0.2);

    // Serialization is canonical: one more lap changes nothing.
    const std::string once = config_to_json(cfg);
    const std::string twice = config_to_json(parse_config_json(once));
    CHECK(once == twice);
}

TEST_CASE("defaults fill the optional blocks") {
    const SimConfig cfg = parse_config_json(R"({"k": 2, "h": 0.5, "horizon": 10, "seed": 1,
        "interaction": {"kind": "power_law", "alpha": 0.5}})");
    CHECK(cfg.hierarchy_preset == "chain");
    CHECK(cfg.hierarchy == Hierarchy::chain(2));
    CHECK(std::holds_alternative<SampledInitial>(cfg.initial));
    CHECK(std::get<SampledInitial>(cfg.initial).box_side == 1.0);
    CHECK(std::get<SampledInitial>(cfg.initial).speed == 0.1);
    CHECK(cfg.detect.eps_v == 1e-6);
    CHECK(cfg.detect.window == 50);
    CHECK(cfg.replicas == 100);
    CHECK_FALSE(cfg.sweep.has_value());
    CHECK_FALSE(cfg.out_dir.has_value());
}

TEST_CASE("unknown keys are rejected at every level") {
    CHECK_THROWS_WITH_AS(parse_config_json(R"({"k": 2, "h": 0.5, "horizon": 1, "seed": 0,
        "interaction": {"kind": "power_law", "alpha": 0.5}, "extra": 1})"),
                         doctest::Contains("extra"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_json(R"({"k": 2, "h": 0.5, "horizon": 1, "seed": 0,
        "interaction": {"kind": "power_law", "alpha": 0.5, "p": 0.5}})"),
                         doctest::Contains("p"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_json(R"({"k": 2, "h": 0.5, "horizon": 1, "seed": 0,
        "interaction": {"kind": "power_law", "alpha": 0.5},
        "initial": {"box_side": 1.0, "speed": 0.1, "positions": [[0,0,0],[1,0,0]]}})"),
                         doctest::Contains("box_side"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_json(R"({"k": 2, "h": 0.5, "horizon": 1, "seed": 0,
        "interaction": {"kind": "power_law", "alpha": 0.5}, "detect": {"eps": 1e-6}})"),
                         doctest::Contains("eps"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_json(R"({"k": 2, "h": 0.5, "horizon": 1, "seed": 0,
        "interaction": {"kind": "scaled_random", "p": 0.5, "alpha": 0.5,
                        "scale": {"type": "constant", "value": 0.9, "lo": 0.1}}})"),
                         doctest::Contains("lo"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_json(R"({"k": 2, "h": 0.5, "horizon": 1, "seed": 0,
        "interaction": {"kind": "power_law", "alpha": 0.5}, "sweep": {"beta": [1]}})"),
                         doctest::Contains("beta"), ConfigError);
}

TEST_CASE("constraint violations name the offending field") {
    // Mandatory keys.
    CHECK_THROWS_AS(parse_config_json(R"({"h": 0.5, "horizon": 1, "seed": 0,
        "interaction": {"kind": "power_law", "alpha": 0.5}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"k": 2, "h": 0.5, "horizon": 1, "seed": 0})"), ConfigError);

    // Range checks.
    CHECK_THROWS_AS(parse_config_json(R"({"k": 1, "h": 0.5, "horizon": 1, "seed": 0,
        "interaction": {"kind": "power_law", "alpha": 0.5}})"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_json(R"({"k": 3, "h": 0.75, "horizon": 1, "seed": 0,
        "interaction": {"kind": "power_law", "alpha": 0.5}})"),
                         doctest::Contains("1/(k-1)"), ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"k": 2, "h": 0.5, "horizon": -1, "seed": 0,
        "interaction": {"kind": "power_law", "alpha": 0.5}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"k": 2, "h": 0.5, "horizon": 1, "seed": -4,
        "interaction": {"kind": "power_law", "alpha": 0.5}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"k": 2, "h": 0.5, "horizon": 1, "seed": 0, "replicas": 0,
        "interaction": {"kind": "power_law", "alpha": 0.5}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"k": 2, "h": 0.5, "horizon": 1, "seed": 0,
        "interaction": {"kind": "power_law", "alpha": 0.5}, "detect": {"window": 0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"k": 2, "h": 0.5, "horizon": 1, "seed": 0,
        "interaction": {"kind": "power_law", "alpha": 0.5}, "detect": {"eps_v": 0.0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"k": 2, "h": 0.5, "horizon": 1, "seed": 0,
        "interaction": {"kind": "bernoulli_failure", "p": 1.25, "alpha": 0.5}})"), ConfigError);

    // Not JSON at all.
    CHECK_THROWS_AS(parse_config_json("not json"), ConfigError);
}

TEST_CASE("hierarchy parsing") {
    const SimConfig star = parse_config_json(R"({"k": 4, "h": 0.25, "horizon": 1, "seed": 0,
        "hierarchy": "star", "interaction": {"kind": "power_law", "alpha": 0.5}})");
    CHECK(star.hierarchy == Hierarchy::star(4));
    CHECK(star.hierarchy_preset == "star");

    CHECK_THROWS_AS(parse_config_json(R"({"k": 4, "h": 0.25, "horizon": 1, "seed": 0,
        "hierarchy": "ring", "interaction": {"kind": "power_law", "alpha": 0.5}})"), ConfigError);

    // A bird naming itself as leader: 1-based label 2 for bird 2.
    CHECK_THROWS_AS(parse_config_json(R"({"k": 2, "h": 0.5, "horizon": 1, "seed": 0,
        "hierarchy": {"leaders": [[], [2]]}, "interaction": {"kind": "power_law", "alpha": 0.5}})"), ConfigError);
    // Wrong row count.
    CHECK_THROWS_AS(parse_config_json(R"({"k": 3, "h": 0.5, "horizon": 1, "seed": 0,
        "hierarchy": {"leaders": [[], [1]]}, "interaction": {"kind": "power_law", "alpha": 0.5}})"), ConfigError);
    // The overall leader must lead.
    CHECK_THROWS_AS(parse_config_json(R"({"k": 2, "h": 0.5, "horizon": 1, "seed": 0,
        "hierarchy": {"leaders": [[1], [1]]}, "interaction": {"kind": "power_law", "alpha": 0.5}})"), ConfigError);
}

TEST_CASE("every interaction kind parses") {
    const char* kinds[] = {
        R"({"kind": "deterministic_cs", "K": 0.5, "sigma": 1.0, "beta": 0.5})",
        R"({"kind": "power_law", "alpha": 1.0})",
        R"({"kind": "bernoulli_failure", "p": 0.5, "alpha": 1.0})",
        R"({"kind": "scaled_random", "p": 0.5, "alpha": 1.0})",
        R"({"kind": "scaled_random", "p": 0.5, "alpha": 1.0, "scale": {"type": "bernoulli", "prob": 0.75}})",
        R"({"kind": "scaled_random", "p": 0.5, "alpha": 1.0, "scale": {"type": "constant", "value": 0.5}})",
        R"({"kind": "random_environment", "p": 0.5, "alpha": 1.0})",
    };
    for (const char* kind : kinds) {
        CAPTURE(kind);
        const std::string doc = std::string(R"({"k": 2, "h": 0.5, "horizon": 1, "seed": 0, "interaction": )") +
                                kind + "}";
        CHECK_NOTHROW(parse_config_json(doc));
    }

    CHECK_THROWS_AS(parse_config_json(R"({"k": 2, "h": 0.5, "horizon": 1, "seed": 0,
        "interaction": {"kind": "telepathy", "alpha": 1.0}})"), ConfigError);
}

TEST_CASE("explicit initial conditions must match the flock") {
    CHECK_THROWS_AS(parse_config_json(R"({"k": 3, "h": 0.25, "horizon": 1, "seed": 0,
        "interaction": {"kind": "power_law", "alpha": 0.5},
        "initial": {"positions": [[0,0,0],[1,0,0]], "velocities": [[0,0,0],[0,0,0]]}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"k": 2, "h": 0.5, "horizon": 1, "seed": 0,
        "interaction": {"kind": "power_law", "alpha": 0.5},
        "initial": {"positions": [[0,0,0],[1,0]], "velocities": [[0,0,0],[0,0,0]]}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"k": 2, "h": 0.5, "horizon": 1, "seed": 0,
        "interaction": {"kind": "power_law", "alpha": 0.5},
        "initial": {"positions": [[0,0,0],[1,0,0]]}})"), ConfigError);
}

TEST_CASE("sweep axes are validated against the model and initial conditions") {
    // alpha is derived for the deterministic kernel, not a free axis.
    CHECK_THROWS_AS(parse_config_json(R"({"k": 2, "h": 0.5, "horizon": 1, "seed": 0,
        "interaction": {"kind": "deterministic_cs", "K": 0.5, "sigma": 1.0, "beta": 0.5},
        "sweep": {"alpha": [0.5]}})"), ConfigError);
    // The power law has no success probability.
    CHECK_THROWS_AS(parse_config_json(R"({"k": 2, "h": 0.5, "horizon": 1, "seed": 0,
        "interaction": {"kind": "power_law", "alpha": 0.5}, "sweep": {"p": [0.5]}})"), ConfigError);
    // Speed sweeps need sampled initial conditions.
    CHECK_THROWS_AS(parse_config_json(R"({"k": 2, "h": 0.5, "horizon": 1, "seed": 0,
        "interaction": {"kind": "bernoulli_failure", "p": 0.5, "alpha": 0.5},
        "initial": {"positions": [[0,0,0],[1,0,0]], "velocities": [[0,0,0],[0,0,0]]},
        "sweep": {"speed": [0.1, 0.2]}})"), ConfigError);
    // An empty grid sweeps nothing.
    CHECK_THROWS_AS(parse_config_json(R"({"k": 2, "h": 0.5, "horizon": 1, "seed": 0,
        "interaction": {"kind": "bernoulli_failure", "p": 0.5, "alpha": 0.5}, "sweep": {}})"), ConfigError);
    // Axis values obey the same ranges as the scalar fields.
    CHECK_THROWS_AS(parse_config_json(R"({"k": 2, "h": 0.5, "horizon": 1, "seed": 0,
        "interaction": {"kind": "bernoulli_failure", "p": 0.5, "alpha": 0.5}, "sweep": {"p": [0.0]}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"k": 2, "h": 0.5, "horizon": 1, "seed": 0,
        "interaction": {"kind": "bernoulli_failure", "p": 0.5, "alpha": 0.5}, "sweep": {"alpha": [-1.0]}})"), ConfigError);

    CHECK_NOTHROW(parse_config_json(R"({"k": 2, "h": 0.5, "horizon": 1, "seed": 0,
        "interaction": {"kind": "bernoulli_failure", "p": 0.5, "alpha": 0.5},
        "sweep": {"speed": [0.1, 0.2]}})"));
}

TEST_CASE("initial state materialization") {
    const SimConfig explicit_cfg = parse_config_json(kFull);
    const FlockState s = explicit_cfg.initial_state(RngStream(9, 0));
    CHECK(s.frame == Frame::Absolute);
    CHECK(s.x[1].x == 1.0);
    CHECK(s.v[2].y == 0.2);
    // Explicit conditions ignore the stream entirely.
    const FlockState s2 = explicit_cfg.initial_state(RngStream(9, 55));
    CHECK(s2.x[1].x == s.x[1].x);

    const SimConfig sampled = parse_config_json(R"({"k": 2, "h": 0.5, "horizon": 1, "seed": 3,
        "interaction": {"kind": "power_law", "alpha": 0.5},
        "initial": {"box_side": 2.0, "speed": 0.5}})");
    const FlockState a = sampled.initial_state(RngStream(3, 0));
    const FlockState b = sampled.initial_state(RngStream(3, 0));
    const FlockState c = sampled.initial_state(RngStream(3, 1));
    CHECK(a.x[1].x == b.x[1].x);
    CHECK(a.x[1].x != c.x[1].x);
}

TEST_CASE("config files travel through the filesystem") {
    CHECK_THROWS_AS(load_config("/nonexistent/path/config.json"), IoError);
}
