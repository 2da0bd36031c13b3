#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <string>

#include "hlflock/analysis.hpp"
#include "hlflock/config.hpp"
#include "hlflock/dynamics.hpp"
#include "hlflock/ensemble.hpp"
#include "hlflock/errors.hpp"
#include "hlflock/hierarchy.hpp"
#include "hlflock/interactions.hpp"
#include "hlflock/io.hpp"
#include "hlflock/rng.hpp"
#include "hlflock/simulate.hpp"
#include "hlflock/state.hpp"
#include "hlflock/weights.hpp"

namespace py = pybind11;
using namespace hlflock;

namespace {

Frame parse_frame(const std::string& name) {
    if (name == "absolute") return Frame::Absolute;
    if (name == "relative") return Frame::Relative;
    throw std::invalid_argument("frame must be \"absolute\" or \"relative\"");
}

const char* frame_str(Frame f) { return f == Frame::Absolute ? "absolute" : "relative"; }

const char* status_str(BoundResult::Status s) {
    switch (s) {
        case BoundResult::Status::Ok: return "ok";
        case BoundResult::Status::Inapplicable: return "inapplicable";
        case BoundResult::Status::Degenerate: return "degenerate";
    }
    return "?";
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "hierarchical-leadership flock simulator core";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
    py::register_exception<InvariantError>(m, "InvariantError", PyExc_RuntimeError);

    py::class_<Vec3>(m, "Vec3")
        .def(py::init<double, double, double>(), py::arg("x"), py::arg("y"), py::arg("z"))
        .def(py::init([](const py::sequence& s) {
            if (s.size() != 3) throw std::invalid_argument("Vec3 needs 3 components");
            return Vec3{s[0].cast<double>(), s[1].cast<double>(), s[2].cast<double>()};
        }))
        .def_readonly("x", &Vec3::x)
        .def_readonly("y", &Vec3::y)
        .def_readonly("z", &Vec3::z)
        .def("norm", &Vec3::norm)
        .def("__iter__",
             [](const Vec3& v) { return py::iter(py::make_tuple(v.x, v.y, v.z)); })
        .def("__repr__", [](const Vec3& v) {
            return "Vec3(" + std::to_string(v.x) + ", " + std::to_string(v.y) + ", " + std::to_string(v.z) + ")";
        });
    py::implicitly_convertible<py::sequence, Vec3>();

    py::class_<FlockState>(m, "FlockState")
        .def_readonly("t", &FlockState::t)
        .def_property_readonly("frame", [](const FlockState& s) { return frame_str(s.frame); })
        .def_readonly("x", &FlockState::x)
        .def_readonly("v", &FlockState::v)
        .def("bird_count", &FlockState::bird_count);

    m.def(
        "make_state",
        [](std::int64_t t, std::vector<Vec3> x, std::vector<Vec3> v, const std::string& frame) {
            return make_state(t, std::move(x), std::move(v), parse_frame(frame));
        },
        py::arg("t"), py::arg("x"), py::arg("v"), py::arg("frame") = "absolute");
    m.def("to_relative", &to_relative, py::arg("state"));
    m.def(
        "sup_norm", [](const std::vector<Vec3>& ys) { return sup_norm(ys); }, py::arg("vectors"));
    m.def(
        "max_pairwise_distance", [](const std::vector<Vec3>& ys) { return max_pairwise_distance(ys); },
        py::arg("vectors"));
    m.def("max_timestep", &max_timestep, py::arg("k"));

    py::class_<Hierarchy>(m, "Hierarchy")
        .def(py::init<int, std::vector<std::vector<int>>>(), py::arg("k"), py::arg("leaders"))
        .def_static("chain", &Hierarchy::chain, py::arg("k"))
        .def_static("star", &Hierarchy::star, py::arg("k"))
        .def("bird_count", &Hierarchy::bird_count)
        .def("leaders_of",
             [](const Hierarchy& h, int i) { return std::vector<int>(h.leaders_of(i).begin(), h.leaders_of(i).end()); })
        .def("leaders", &Hierarchy::leaders);

    m.def("validate_hierarchy", [](const Hierarchy& h) {
        const HierarchyVerdict v = validate_hierarchy(h);
        return py::make_tuple(v.ok, v.violating_bird, v.reason);
    });

    py::class_<WeightMatrix>(m, "WeightMatrix")
        .def_readonly("t", &WeightMatrix::t)
        .def_readonly("values", &WeightMatrix::values)
        .def("sum_for", &WeightMatrix::sum_for, py::arg("bird"));

    py::class_<RngStream>(m, "RngStream")
        .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("seed"), py::arg("replica") = 0)
        .def("uniform", &RngStream::uniform, py::arg("t"), py::arg("bird"), py::arg("slot"));

    py::class_<ScaleDistribution>(m, "ScaleDistribution")
        .def_static("uniform",
                    [](double lo, double hi) {
                        ScaleDistribution d;
                        d.type = ScaleDistribution::Type::Uniform;
                        d.lo = lo;
                        d.hi = hi;
                        return d;
                    })
        .def_static("constant",
                    [](double value) {
                        ScaleDistribution d;
                        d.type = ScaleDistribution::Type::Constant;
                        d.value = value;
                        return d;
                    })
        .def_static("bernoulli", [](double prob) {
            ScaleDistribution d;
            d.type = ScaleDistribution::Type::Bernoulli;
            d.prob = prob;
            return d;
        });

    py::class_<InteractionModel>(m, "InteractionModel")
        .def_static("deterministic_cs", &InteractionModel::deterministic_cs, py::arg("K"), py::arg("sigma"),
                    py::arg("beta"))
        .def_static("power_law", &InteractionModel::power_law, py::arg("alpha"))
        .def_static("bernoulli_failure", &InteractionModel::bernoulli_failure, py::arg("p"), py::arg("alpha"))
        .def_static("scaled_random", &InteractionModel::scaled_random, py::arg("p"), py::arg("alpha"),
                    py::arg("scale") = ScaleDistribution{})
        .def_static("random_environment", &InteractionModel::random_environment, py::arg("p"), py::arg("alpha"))
        .def_property_readonly("kind", [](const InteractionModel& mm) { return kind_name(mm.kind()); })
        .def_property_readonly("certificate",
                               [](const InteractionModel& mm) {
                                   return py::make_tuple(mm.certificate().p, mm.certificate().alpha);
                               })
        .def("is_deterministic", &InteractionModel::is_deterministic)
        .def("realize", &InteractionModel::realize, py::arg("dist"), py::arg("u"))
        .def("conditional_mean", &InteractionModel::conditional_mean, py::arg("dist"));

    m.def("power_bound", &power_bound, py::arg("dist"), py::arg("p"), py::arg("alpha"));
    m.def("cs_weight", &cs_weight, py::arg("dist"), py::arg("K"), py::arg("sigma"), py::arg("beta"));

    m.def(
        "sample_weights",
        [](const InteractionModel& model, const FlockState& state, const Hierarchy& hier, std::uint64_t seed,
           std::uint64_t replica) { return sample_weights(model, state, hier, RngStream(seed, replica)); },
        py::arg("model"), py::arg("state"), py::arg("hierarchy"), py::arg("seed"), py::arg("replica") = 0);
    m.def("step", &step, py::arg("state"), py::arg("hierarchy"), py::arg("weights"), py::arg("h"));

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("h", &Trajectory::h)
        .def_property_readonly("frame", [](const Trajectory& tr) { return frame_str(tr.frame); })
        .def_readonly("states", &Trajectory::states)
        .def_readonly("weights", &Trajectory::weights)
        .def("horizon", &Trajectory::horizon)
        .def("contraction", &Trajectory::contraction, py::arg("bird"), py::arg("s"));

    m.def(
        "simulate",
        [](const FlockState& initial, const Hierarchy& hier, const InteractionModel& model, double h,
           std::uint64_t seed, std::uint64_t replica, std::int64_t steps) {
            return simulate(initial, hier, model, h, RngStream(seed, replica), steps);
        },
        py::arg("initial"), py::arg("hierarchy"), py::arg("model"), py::arg("h"), py::arg("seed"),
        py::arg("replica"), py::arg("steps"));
    m.def(
        "sample_initial_state",
        [](int k, double box_side, double speed, std::uint64_t seed, std::uint64_t replica) {
            return sample_initial_state(k, box_side, speed, RngStream(seed, replica));
        },
        py::arg("k"), py::arg("box_side"), py::arg("speed"), py::arg("seed"), py::arg("replica") = 0);

    py::class_<BoundParams>(m, "BoundParams")
        .def_readonly("k", &BoundParams::k)
        .def_readonly("h", &BoundParams::h)
        .def_readonly("p", &BoundParams::p)
        .def_readonly("alpha", &BoundParams::alpha)
        .def_readonly("x0", &BoundParams::x0)
        .def_readonly("v0", &BoundParams::v0)
        .def_readonly("A0", &BoundParams::A0)
        .def_readonly("B0", &BoundParams::B0)
        .def_readonly("kappa", &BoundParams::kappa)
        .def_readonly("w0", &BoundParams::w0)
        .def_readonly("gamma", &BoundParams::gamma)
        .def_readonly("delta", &BoundParams::delta);

    py::class_<BoundResult>(m, "BoundResult")
        .def_property_readonly("status", [](const BoundResult& r) { return status_str(r.status); })
        .def_readonly("value", &BoundResult::value)
        .def_readonly("note", &BoundResult::note)
        .def("ok", &BoundResult::ok);

    m.def("derive_bound_params", &derive_bound_params, py::arg("initial"), py::arg("hierarchy"), py::arg("h"),
          py::arg("p"), py::arg("alpha"));
    m.def("contraction_bound_subcritical", &contraction_bound_subcritical, py::arg("params"), py::arg("tau"),
          py::arg("t"));
    m.def("contraction_bound_critical", &contraction_bound_critical, py::arg("params"), py::arg("bird"),
          py::arg("tau"), py::arg("t"));
    m.def("follower_speed_bound_subcritical", &follower_speed_bound_subcritical, py::arg("params"),
          py::arg("v1_initial_speed"), py::arg("t"));
    m.def(
        "check_flocking_guarantee",
        [](const BoundParams& bp) { return std::string(verdict_name(check_flocking_guarantee(bp))); },
        py::arg("params"));
    m.def("critical_condition_table", &critical_condition_table, py::arg("params"));
    m.def("check_small_velocity_condition", &check_small_velocity_condition, py::arg("v0"), py::arg("p"),
          py::arg("k"));
    m.def("rate_series_term", &rate_series_term, py::arg("t"), py::arg("delta_t"), py::arg("params"));
    m.def("rate_series_convergence", &rate_series_convergence, py::arg("delta_of_t"), py::arg("params"),
          py::arg("rel_eps") = 1e-6, py::arg("block") = 10, py::arg("max_terms") = 1000000);
    m.def("two_bird_closed_form", &two_bird_closed_form, py::arg("follower_weights"), py::arg("h"),
          py::arg("v_init"));

    py::class_<ConditionRow>(m, "ConditionRow")
        .def_readonly("bird", &ConditionRow::bird)
        .def_readonly("gamma", &ConditionRow::gamma)
        .def_readonly("threshold", &ConditionRow::threshold)
        .def_readonly("satisfied", &ConditionRow::satisfied)
        .def_readonly("degenerate", &ConditionRow::degenerate);

    py::class_<SeriesDiagnosis>(m, "SeriesDiagnosis")
        .def_readonly("converged", &SeriesDiagnosis::converged)
        .def_readonly("partial_sum", &SeriesDiagnosis::partial_sum)
        .def_readonly("terms_evaluated", &SeriesDiagnosis::terms_evaluated)
        .def_readonly("note", &SeriesDiagnosis::note);

    py::class_<FlockingVerdict>(m, "FlockingVerdict")
        .def_readonly("velocities_vanish", &FlockingVerdict::velocities_vanish)
        .def_readonly("positions_converge", &FlockingVerdict::positions_converge)
        .def_readonly("limit_positions", &FlockingVerdict::limit_positions)
        .def_readonly("first_quiet_step", &FlockingVerdict::first_quiet_step)
        .def("flocking", &FlockingVerdict::flocking);

    m.def("detect_flocking", &detect_flocking, py::arg("trajectory"), py::arg("eps_v"), py::arg("window"),
          py::arg("h"));

    py::class_<SimConfig>(m, "SimConfig")
        .def_readonly("k", &SimConfig::k)
        .def_readonly("h", &SimConfig::h)
        .def_readonly("horizon", &SimConfig::horizon)
        .def_readwrite("seed", &SimConfig::seed)
        .def_readwrite("replicas", &SimConfig::replicas)
        .def_readonly("hierarchy", &SimConfig::hierarchy)
        .def_readonly("model", &SimConfig::model)
        .def_readonly("detect", &SimConfig::detect)
        .def(
            "initial_state",
            [](const SimConfig& cfg, std::uint64_t replica) { return cfg.initial_state(RngStream(cfg.seed, replica)); },
            py::arg("replica") = 0);

    m.def("parse_config_json", &parse_config_json, py::arg("text"));
    m.def("load_config", &load_config, py::arg("path"));
    m.def("config_to_json", &config_to_json, py::arg("config"));

    py::class_<ProductQuery>(m, "ProductQuery")
        .def(py::init([](int bird, std::int64_t tau, std::int64_t t) {
                 ProductQuery q;
                 q.bird = bird;
                 q.tau = tau;
                 q.t = t;
                 return q;
             }),
             py::arg("bird"), py::arg("tau"), py::arg("t"))
        .def_readwrite("bird", &ProductQuery::bird)
        .def_readwrite("tau", &ProductQuery::tau)
        .def_readwrite("t", &ProductQuery::t);

    py::class_<Estimate>(m, "Estimate")
        .def_readonly("mean", &Estimate::mean)
        .def_readonly("se", &Estimate::se)
        .def_readonly("n", &Estimate::n)
        .def_readonly("low_confidence", &Estimate::low_confidence);

    py::class_<ProductEstimate>(m, "ProductEstimate")
        .def_readonly("query", &ProductEstimate::query)
        .def_readonly("value", &ProductEstimate::value)
        .def_readonly("bound", &ProductEstimate::bound)
        .def_readonly("within_bound", &ProductEstimate::within_bound);

    py::class_<SeriesStat>(m, "SeriesStat")
        .def_readonly("mean", &SeriesStat::mean)
        .def_readonly("se", &SeriesStat::se);

    py::class_<BoundComparison>(m, "BoundComparison")
        .def_readonly("bird", &BoundComparison::bird)
        .def_readonly("t", &BoundComparison::t)
        .def_readonly("mean", &BoundComparison::mean)
        .def_readonly("se", &BoundComparison::se)
        .def_readonly("bound", &BoundComparison::bound)
        .def_property_readonly("passes", [](const BoundComparison& b) { return b.pass; });

    py::class_<DetectOptions>(m, "DetectOptions")
        .def(py::init<>())
        .def_readwrite("eps_v", &DetectOptions::eps_v)
        .def_readwrite("window", &DetectOptions::window);

    py::class_<EnsembleSpec>(m, "EnsembleSpec")
        .def(py::init<>())
        .def_readwrite("replicas", &EnsembleSpec::replicas)
        .def_readwrite("horizon", &EnsembleSpec::horizon)
        .def_readwrite("threads", &EnsembleSpec::threads)
        .def_readwrite("products", &EnsembleSpec::products)
        .def_readwrite("track_speed_bounds", &EnsembleSpec::track_speed_bounds)
        .def_readwrite("track_flocking", &EnsembleSpec::track_flocking)
        .def_readwrite("detect", &EnsembleSpec::detect)
        .def_readwrite("quantile_levels", &EnsembleSpec::quantile_levels);

    py::class_<EnsembleReport>(m, "EnsembleReport")
        .def_readonly("replicas", &EnsembleReport::replicas)
        .def_readonly("horizon", &EnsembleReport::horizon)
        .def_readonly("sup_v", &EnsembleReport::sup_v)
        .def_readonly("speeds", &EnsembleReport::speeds)
        .def_readonly("sum_mean_sup_v", &EnsembleReport::sum_mean_sup_v)
        .def_readonly("products", &EnsembleReport::products)
        .def_readonly("speed_bounds", &EnsembleReport::speed_bounds)
        .def_readonly("flocking_fraction", &EnsembleReport::flocking_fraction)
        .def_readonly("quantile_steps", &EnsembleReport::quantile_steps)
        .def_readonly("quantile_levels", &EnsembleReport::quantile_levels)
        .def_readonly("quantiles", &EnsembleReport::quantiles);

    m.def("run_ensemble", &run_ensemble, py::arg("config"), py::arg("spec"),
          py::call_guard<py::gil_scoped_release>());
    m.def("estimate_product_expectation", &estimate_product_expectation, py::arg("config"), py::arg("query"),
          py::arg("replicas"), py::arg("threads") = 0, py::call_guard<py::gil_scoped_release>());
    m.def("report_to_json", &report_to_json, py::arg("report"));
    m.def("trajectory_to_csv", &trajectory_to_csv, py::arg("trajectory"));
    m.def("trajectory_to_json", &trajectory_to_json, py::arg("trajectory"));
}
