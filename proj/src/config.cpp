#include "hlflock/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "hlflock/dynamics.hpp"
#include "hlflock/errors.hpp"
#include "hlflock/io.hpp"
#include "hlflock/simulate.hpp"

namespace hlflock {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

/// Fail closed: any key outside the schema is an error, never a silent skip.
void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) known = true;
        if (!known) throw ConfigError("unknown key \"" + item.key() + "\" in " + where);
    }
}

double get_double(const json& obj, const char* key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(where + " is missing \"" + std::string(key) + "\"");
    if (!it->is_number()) throw ConfigError(where + "." + key + " must be a number");
    return it->get<double>();
}

double get_double_or(const json& obj, const char* key, double fallback, const std::string& where) {
    return obj.contains(key) ? get_double(obj, key, where) : fallback;
}

std::int64_t get_int(const json& obj, const char* key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(where + " is missing \"" + std::string(key) + "\"");
    if (!it->is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
    return it->get<std::int64_t>();
}

std::uint64_t get_uint(const json& obj, const char* key, std::uint64_t fallback, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!(it->is_number_unsigned() || (it->is_number_integer() && it->get<std::int64_t>() >= 0)))
        throw ConfigError(where + "." + key + " must be a non-negative integer");
    return it->get<std::uint64_t>();
}

Vec3 parse_vec3(const json& arr, const std::string& where) {
    if (!arr.is_array() || arr.size() != 3) throw ConfigError(where + " must be an array of 3 numbers");
    for (const auto& c : arr)
        if (!c.is_number()) throw ConfigError(where + " must be an array of 3 numbers");
    return {arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>()};
}

std::vector<Vec3> parse_vec3_list(const json& arr, int k, const std::string& where) {
    if (!arr.is_array() || static_cast<int>(arr.size()) != k)
        throw ConfigError(where + " must list one entry per bird (" + std::to_string(k) + ")");
    std::vector<Vec3> out;
    out.reserve(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i)
        out.push_back(parse_vec3(arr[i], where + "[" + std::to_string(i + 1) + "]"));
    return out;
}

Hierarchy parse_hierarchy(const json& j, int k, std::string& preset_out) {
    if (j.is_string()) {
        const std::string name = j.get<std::string>();
        preset_out = name;
        if (name == "chain") return Hierarchy::chain(k);
        if (name == "star") return Hierarchy::star(k);
        throw ConfigError("unknown hierarchy preset \"" + name + "\" (chain, star)");
    }
    if (!j.is_object()) throw ConfigError("hierarchy must be a preset name or an object with \"leaders\"");
    check_keys(j, {"leaders"}, "hierarchy");
    const auto it = j.find("leaders");
    if (it == j.end() || !it->is_array() || static_cast<int>(it->size()) != k)
        throw ConfigError("hierarchy.leaders must list one leader set per bird (" + std::to_string(k) + ")");
    std::vector<std::vector<int>> leaders(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        const auto& row = (*it)[static_cast<std::size_t>(i)];
        if (!row.is_array()) throw ConfigError("hierarchy.leaders rows must be arrays of bird labels");
        for (const auto& entry : row) {
            if (!entry.is_number_integer()) throw ConfigError("hierarchy.leaders entries must be integer bird labels");
            // 1-based labels in files, 0-based in the API.
            leaders[static_cast<std::size_t>(i)].push_back(entry.get<int>() - 1);
        }
    }
    preset_out.clear();
    Hierarchy hier(k, std::move(leaders));
    if (auto v = validate_hierarchy(hier); !v.ok) throw ConfigError("invalid hierarchy: " + v.reason);
    return hier;
}

ScaleDistribution parse_scale(const json& j) {
    if (!j.is_object()) throw ConfigError("interaction.scale must be an object");
    ScaleDistribution d;
    const std::string type = j.contains("type") ? j.at("type").get<std::string>() : "default";
    if (type == "default") {
        check_keys(j, {"type"}, "interaction.scale");
        d.type = ScaleDistribution::Type::Default;
    } else if (type == "uniform") {
        check_keys(j, {"type", "lo", "hi"}, "interaction.scale");
        d.type = ScaleDistribution::Type::Uniform;
        d.lo = get_double(j, "lo", "interaction.scale");
        d.hi = get_double(j, "hi", "interaction.scale");
    } else if (type == "constant") {
        check_keys(j, {"type", "value"}, "interaction.scale");
        d.type = ScaleDistribution::Type::Constant;
        d.value = get_double(j, "value", "interaction.scale");
    } else if (type == "bernoulli") {
        check_keys(j, {"type", "prob"}, "interaction.scale");
        d.type = ScaleDistribution::Type::Bernoulli;
        d.prob = get_double(j, "prob", "interaction.scale");
    } else {
        throw ConfigError("unknown scale type \"" + type + "\" (default, uniform, constant, bernoulli)");
    }
    return d;
}

InteractionModel parse_interaction(const json& j) {
    if (!j.is_object()) throw ConfigError("interaction must be an object");
    const auto it = j.find("kind");
    if (it == j.end() || !it->is_string()) throw ConfigError("interaction needs a string \"kind\"");
    const std::string kind = it->get<std::string>();
    const std::string where = "interaction";
    if (kind == "deterministic_cs") {
        check_keys(j, {"kind", "K", "sigma", "beta"}, where);
        return InteractionModel::deterministic_cs(get_double(j, "K", where), get_double(j, "sigma", where),
                                                  get_double(j, "beta", where));
    }
    if (kind == "power_law") {
        check_keys(j, {"kind", "alpha"}, where);
        return InteractionModel::power_law(get_double(j, "alpha", where));
    }
    if (kind == "bernoulli_failure") {
        check_keys(j, {"kind", "p", "alpha"}, where);
        return InteractionModel::bernoulli_failure(get_double(j, "p", where), get_double(j, "alpha", where));
    }
    if (kind == "scaled_random") {
        check_keys(j, {"kind", "p", "alpha", "scale"}, where);
        ScaleDistribution dist;
        if (j.contains("scale")) dist = parse_scale(j.at("scale"));
        return InteractionModel::scaled_random(get_double(j, "p", where), get_double(j, "alpha", where), dist);
    }
    if (kind == "random_environment") {
        check_keys(j, {"kind", "p", "alpha"}, where);
        return InteractionModel::random_environment(get_double(j, "p", where), get_double(j, "alpha", where));
    }
    throw ConfigError("unknown interaction kind \"" + kind +
                      "\" (deterministic_cs, power_law, bernoulli_failure, scaled_random, random_environment)");
}

InitialConditions parse_initial(const json& j, int k) {
    if (!j.is_object()) throw ConfigError("initial must be an object");
    if (j.contains("positions") || j.contains("velocities")) {
        check_keys(j, {"positions", "velocities"}, "initial");
        if (!j.contains("positions") || !j.contains("velocities"))
            throw ConfigError("explicit initial conditions need both positions and velocities");
        ExplicitInitial init;
        init.positions = parse_vec3_list(j.at("positions"), k, "initial.positions");
        init.velocities = parse_vec3_list(j.at("velocities"), k, "initial.velocities");
        return init;
    }
    check_keys(j, {"box_side", "speed"}, "initial");
    SampledInitial init;
    init.box_side = get_double_or(j, "box_side", init.box_side, "initial");
    init.speed = get_double_or(j, "speed", init.speed, "initial");
    if (!(init.box_side >= 0.0)) throw ConfigError("initial.box_side must be non-negative");
    if (!(init.speed >= 0.0)) throw ConfigError("initial.speed must be non-negative");
    return init;
}

std::vector<double> parse_axis(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw ConfigError(where + " must be a non-empty array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number()) throw ConfigError(where + " must be a non-empty array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

ordered_json axis_to_json(const std::vector<double>& axis) {
    ordered_json arr = ordered_json::array();
    for (double v : axis) arr.push_back(v);
    return arr;
}

bool kind_has_p(InteractionKind kind) {
    return kind == InteractionKind::BernoulliFailure || kind == InteractionKind::ScaledRandom ||
           kind == InteractionKind::RandomEnvironment;
}

}  // namespace

SimConfig parse_config_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be an object");

    try {
        check_keys(j, {"k", "h", "horizon", "seed", "hierarchy", "interaction", "initial", "detect", "replicas",
                       "sweep", "out_dir"},
                   "config");

        SimConfig cfg;
        cfg.k = static_cast<int>(get_int(j, "k", "config"));
        if (cfg.k < 2) throw ConfigError("config.k must be at least 2");
        cfg.h = get_double(j, "h", "config");
        if (!(cfg.h > 0.0) || cfg.h > max_timestep(cfg.k))
            throw ConfigError("config.h must lie in (0, 1/(k-1)] = (0, " + std::to_string(max_timestep(cfg.k)) +
                              "] for k = " + std::to_string(cfg.k));
        cfg.horizon = get_int(j, "horizon", "config");
        if (cfg.horizon < 0) throw ConfigError("config.horizon must be non-negative");
        cfg.seed = get_uint(j, "seed", 0, "config");

        if (j.contains("hierarchy"))
            cfg.hierarchy = parse_hierarchy(j.at("hierarchy"), cfg.k, cfg.hierarchy_preset);
        else {
            cfg.hierarchy = Hierarchy::chain(cfg.k);
            cfg.hierarchy_preset = "chain";
        }

        if (!j.contains("interaction")) throw ConfigError("config is missing \"interaction\"");
        cfg.model = parse_interaction(j.at("interaction"));

        if (j.contains("initial"))
            cfg.initial = parse_initial(j.at("initial"), cfg.k);
        else
            cfg.initial = SampledInitial{};

        if (j.contains("detect")) {
            const json& d = j.at("detect");
            check_keys(d, {"eps_v", "window"}, "detect");
            cfg.detect.eps_v = get_double_or(d, "eps_v", cfg.detect.eps_v, "detect");
            cfg.detect.window = static_cast<int>(d.contains("window") ? get_int(d, "window", "detect") : cfg.detect.window);
            if (!(cfg.detect.eps_v > 0.0)) throw ConfigError("detect.eps_v must be positive");
            if (cfg.detect.window < 1) throw ConfigError("detect.window must be at least 1");
        }

        cfg.replicas = get_uint(j, "replicas", cfg.replicas, "config");
        if (cfg.replicas < 1) throw ConfigError("config.replicas must be at least 1");

        if (j.contains("sweep")) {
            const json& s = j.at("sweep");
            check_keys(s, {"alpha", "p", "speed"}, "sweep");
            SweepGrid grid;
            if (s.contains("alpha")) grid.alpha = parse_axis(s.at("alpha"), "sweep.alpha");
            if (s.contains("p")) grid.p = parse_axis(s.at("p"), "sweep.p");
            if (s.contains("speed")) grid.speed = parse_axis(s.at("speed"), "sweep.speed");
            if (grid.alpha.empty() && grid.p.empty() && grid.speed.empty())
                throw ConfigError("sweep must name at least one axis (alpha, p, speed)");
            const InteractionKind kind = cfg.model.kind();
            if (!grid.alpha.empty() && kind == InteractionKind::DeterministicCS)
                throw ConfigError("sweep.alpha cannot apply to deterministic_cs (its decay is set by beta)");
            if (!grid.p.empty() && !kind_has_p(kind))
                throw ConfigError(std::string("sweep.p cannot apply to ") + kind_name(kind));
            if (!grid.speed.empty() && !std::holds_alternative<SampledInitial>(cfg.initial))
                throw ConfigError("sweep.speed needs sampled initial conditions");
            for (double a : grid.alpha)
                if (!(a >= 0.0)) throw ConfigError("sweep.alpha values must be non-negative");
            for (double p : grid.p)
                if (!(p > 0.0 && p <= 1.0)) throw ConfigError("sweep.p values must lie in (0, 1]");
            for (double sp : grid.speed)
                if (!(sp >= 0.0)) throw ConfigError("sweep.speed values must be non-negative");
            cfg.sweep = std::move(grid);
        }

        if (j.contains("out_dir")) {
            if (!j.at("out_dir").is_string()) throw ConfigError("config.out_dir must be a string");
            cfg.out_dir = j.at("out_dir").get<std::string>();
        }
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config value: ") + e.what());
    }
}

SimConfig load_config(const std::string& path) { return parse_config_json(read_file(path)); }

FlockState SimConfig::initial_state(const RngStream& rng) const {
    if (const auto* e = std::get_if<ExplicitInitial>(&initial))
        return make_state(0, e->positions, e->velocities, Frame::Absolute);
    const auto& s = std::get<SampledInitial>(initial);
    return sample_initial_state(k, s.box_side, s.speed, rng);
}

std::string config_to_json(const SimConfig& cfg) {
    ordered_json j;
    j["k"] = cfg.k;
    j["h"] = cfg.h;
    j["horizon"] = cfg.horizon;
    j["seed"] = cfg.seed;

    if (!cfg.hierarchy_preset.empty()) {
        j["hierarchy"] = cfg.hierarchy_preset;
    } else {
        ordered_json rows = ordered_json::array();
        for (const auto& ls : cfg.hierarchy.leaders()) {
            ordered_json row = ordered_json::array();
            for (int l : ls) row.push_back(l + 1);
            rows.push_back(std::move(row));
        }
        j["hierarchy"] = ordered_json{{"leaders", std::move(rows)}};
    }

    ordered_json m;
    m["kind"] = kind_name(cfg.model.kind());
    switch (cfg.model.kind()) {
        case InteractionKind::DeterministicCS:
            m["K"] = cfg.model.K();
            m["sigma"] = cfg.model.sigma();
            m["beta"] = cfg.model.beta();
            break;
        case InteractionKind::PowerLaw: m["alpha"] = cfg.model.alpha(); break;
        case InteractionKind::BernoulliFailure:
        case InteractionKind::RandomEnvironment:
            m["p"] = cfg.model.p();
            m["alpha"] = cfg.model.alpha();
            break;
        case InteractionKind::ScaledRandom: {
            m["p"] = cfg.model.p();
            m["alpha"] = cfg.model.alpha();
            ordered_json sc;
            const ScaleDistribution& d = cfg.model.scale_distribution();
            switch (d.type) {
                case ScaleDistribution::Type::Default: sc["type"] = "default"; break;
                case ScaleDistribution::Type::Uniform:
                    sc["type"] = "uniform";
                    sc["lo"] = d.lo;
                    sc["hi"] = d.hi;
                    break;
                case ScaleDistribution::Type::Constant:
                    sc["type"] = "constant";
                    sc["value"] = d.value;
                    break;
                case ScaleDistribution::Type::Bernoulli:
                    sc["type"] = "bernoulli";
                    sc["prob"] = d.prob;
                    break;
            }
            m["scale"] = std::move(sc);
            break;
        }
    }
    j["interaction"] = std::move(m);

    if (const auto* e = std::get_if<ExplicitInitial>(&cfg.initial)) {
        ordered_json pos = ordered_json::array();
        ordered_json vel = ordered_json::array();
        for (const Vec3& x : e->positions) pos.push_back(ordered_json::array({x.x, x.y, x.z}));
        for (const Vec3& v : e->velocities) vel.push_back(ordered_json::array({v.x, v.y, v.z}));
        j["initial"] = ordered_json{{"positions", std::move(pos)}, {"velocities", std::move(vel)}};
    } else {
        const auto& s = std::get<SampledInitial>(cfg.initial);
        j["initial"] = ordered_json{{"box_side", s.box_side}, {"speed", s.speed}};
    }

    j["detect"] = ordered_json{{"eps_v", cfg.detect.eps_v}, {"window", cfg.detect.window}};
    j["replicas"] = cfg.replicas;

    if (cfg.sweep) {
        ordered_json s;
        if (!cfg.sweep->alpha.empty()) s["alpha"] = axis_to_json(cfg.sweep->alpha);
        if (!cfg.sweep->p.empty()) s["p"] = axis_to_json(cfg.sweep->p);
        if (!cfg.sweep->speed.empty()) s["speed"] = axis_to_json(cfg.sweep->speed);
        j["sweep"] = std::move(s);
    }
    if (cfg.out_dir) j["out_dir"] = *cfg.out_dir;
    return j.dump(2) + "\n";
}

}  // namespace hlflock
