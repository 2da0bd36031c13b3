#include "hlflock/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "hlflock/dynamics.hpp"
#include "hlflock/errors.hpp"
#include "hlflock/simulate.hpp"

namespace hlflock {

namespace {

using ordered_json = nlohmann::ordered_json;

enum : int { kOk = 0, kInapplicable = 1, kDegenerate = 2 };

/// Everything the fold needs from one replica, in plain arrays.
struct ReplicaRecord {
    std::vector<double> sup_v;            // T+1
    std::vector<double> speeds;           // k*(T+1), bird-major
    std::vector<double> products;         // one per query
    std::vector<double> product_bounds;   // per-replica envelope values
    std::vector<int> product_status;      // kOk / kInapplicable / kDegenerate
    std::vector<double> speed_bounds;     // T entries (t = 1..T) when tracked
    std::vector<double> quantile_samples;
    bool flocking = false;
};

/// Runs indices 0..count-1 on a small pool, but folds records strictly in
/// index order chunk by chunk, so the aggregate never depends on the thread
/// count or scheduling.
template <typename Record, typename Work, typename Fold>
void chunked_ordered_fold(std::uint64_t count, int threads, const Work& work, const Fold& fold) {
    const unsigned hw = std::thread::hardware_concurrency();
    std::uint64_t n = threads > 0 ? static_cast<std::uint64_t>(threads) : (hw ? hw : 1);
    n = std::max<std::uint64_t>(1, std::min(n, count));
    const std::uint64_t chunk = std::max<std::uint64_t>(64, n * 4);

    for (std::uint64_t begin = 0; begin < count; begin += chunk) {
        const std::uint64_t end = std::min(count, begin + chunk);
        std::vector<Record> slots(static_cast<std::size_t>(end - begin));
        if (n == 1) {
            for (std::uint64_t i = begin; i < end; ++i) slots[static_cast<std::size_t>(i - begin)] = work(i);
        } else {
            std::atomic<std::uint64_t> next{begin};
            std::atomic<bool> abort{false};
            std::exception_ptr err;
            std::mutex err_mu;
            auto body = [&] {
                while (!abort.load(std::memory_order_relaxed)) {
                    const std::uint64_t i = next.fetch_add(1);
                    if (i >= end) return;
                    try {
                        slots[static_cast<std::size_t>(i - begin)] = work(i);
                    } catch (...) {
                        std::scoped_lock lock(err_mu);
                        if (!err) err = std::current_exception();
                        abort.store(true, std::memory_order_relaxed);
                        return;
                    }
                }
            };
            std::vector<std::thread> pool;
            pool.reserve(static_cast<std::size_t>(n));
            for (std::uint64_t w = 0; w < n; ++w) pool.emplace_back(body);
            for (auto& th : pool) th.join();
            if (err) std::rethrow_exception(err);
        }
        for (auto& r : slots) fold(r);
    }
}

std::vector<std::int64_t> pick_quantile_steps(std::int64_t horizon) {
    std::vector<std::int64_t> steps;
    const std::int64_t stride = std::max<std::int64_t>(1, (horizon + 31) / 32);
    for (std::int64_t t = 0; t <= horizon; t += stride) steps.push_back(t);
    if (steps.back() != horizon) steps.push_back(horizon);
    return steps;
}

/// Envelope for the expected contraction product of one replica. Falls back
/// to the trivial envelope 1 (the product always lies in [0, 1]) when no
/// sharper bound applies, so the comparison stays sound for every replica.
std::pair<double, int> product_envelope(const BoundParams& bp, int bird, std::int64_t tau, std::int64_t t) {
    if (tau == t + 1) return {1.0, kOk};  // empty product is exactly 1
    if (bp.alpha < 1.0) {
        const BoundResult r = contraction_bound_subcritical(bp, tau, t);
        return r.ok() ? std::pair{r.value, kOk} : std::pair{1.0, kInapplicable};
    }
    if (bp.alpha == 1.0) {
        const BoundResult r = contraction_bound_critical(bp, bird, tau, t);
        if (r.ok()) return {r.value, kOk};
        return {1.0, r.status == BoundResult::Status::Degenerate ? kDegenerate : kInapplicable};
    }
    return {1.0, kInapplicable};
}

double ordered_mean(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

Estimate two_pass_estimate(const std::vector<double>& xs) {
    Estimate e;
    e.n = xs.size();
    e.low_confidence = e.n < 100;
    if (xs.empty()) return e;
    e.mean = ordered_mean(xs);
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - e.mean) * (x - e.mean);
        e.se = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
    }
    return e;
}

/// se from running sums; clamps the cancellation residue at zero.
double se_from_sums(double sum, double sumsq, std::uint64_t n) {
    if (n < 2) return 0.0;
    const double nd = static_cast<double>(n);
    const double var = std::max(0.0, (sumsq - sum * sum / nd) / (nd - 1.0));
    return std::sqrt(var / nd);
}

double interpolated_quantile(std::vector<double> xs, double level) {
    std::sort(xs.begin(), xs.end());
    const double pos = level * static_cast<double>(xs.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, xs.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return xs[lo] * (1.0 - frac) + xs[hi] * frac;
}

ordered_json estimate_json(const Estimate& e) {
    ordered_json j;
    j["mean"] = e.mean;
    j["se"] = e.se;
    j["n"] = e.n;
    j["low_confidence"] = e.low_confidence;
    return j;
}

ordered_json series_json(const SeriesStat& s) {
    ordered_json j;
    j["mean"] = s.mean;
    j["se"] = s.se;
    return j;
}

const char* status_label(BoundResult::Status s) {
    switch (s) {
        case BoundResult::Status::Ok: return "ok";
        case BoundResult::Status::Inapplicable: return "inapplicable";
        case BoundResult::Status::Degenerate: return "degenerate";
    }
    return "?";
}

}  // namespace

EnsembleReport run_ensemble(const SimConfig& cfg, const EnsembleSpec& spec) {
    const std::int64_t T = spec.horizon;
    const int k = cfg.k;
    if (spec.replicas < 1) throw ConfigError("ensemble needs at least one replica");
    if (T < 0) throw ConfigError("negative horizon");
    if (spec.track_flocking && T + 1 < spec.detect.window)
        throw ConfigError("detection window " + std::to_string(spec.detect.window) +
                          " exceeds the trajectory length " + std::to_string(T + 1));
    for (const ProductQuery& q : spec.products) {
        if (q.bird < 1 || q.bird >= k) throw ConfigError("product query bird must be a follower");
        if (q.t < 0 || q.tau < 0 || q.tau > q.t + 1)
            throw ConfigError("product query needs 0 <= tau <= t+1");
        if (q.t > T - 1 && q.tau != q.t + 1)
            throw ConfigError("product query reaches step " + std::to_string(q.t + 1) + " beyond the horizon " +
                              std::to_string(T));
    }
    for (double lv : spec.quantile_levels)
        if (!(lv >= 0.0 && lv <= 1.0)) throw ConfigError("quantile levels must lie in [0, 1]");

    const Certificate cert = cfg.model.certificate();
    const bool speed_rows = spec.track_speed_bounds && cert.alpha < 1.0 && T >= 1;
    const bool need_params = speed_rows || !spec.products.empty();
    const std::vector<std::int64_t> qsteps = pick_quantile_steps(T);
    const std::size_t nq = spec.products.size();
    const std::uint64_t R = spec.replicas;

    auto work = [&](std::uint64_t replica) {
        RngStream rng(cfg.seed, replica);
        const FlockState init = cfg.initial_state(rng);
        const Trajectory traj = simulate(init, cfg.hierarchy, cfg.model, cfg.h, rng, T);

        std::vector<FlockState> rel;
        rel.reserve(traj.states.size());
        for (const FlockState& s : traj.states) rel.push_back(to_relative(s));

        ReplicaRecord rec;
        rec.sup_v.resize(static_cast<std::size_t>(T) + 1);
        rec.speeds.resize(static_cast<std::size_t>(k) * (static_cast<std::size_t>(T) + 1));
        for (std::int64_t t = 0; t <= T; ++t) {
            const FlockState& s = rel[static_cast<std::size_t>(t)];
            rec.sup_v[static_cast<std::size_t>(t)] = sup_norm(s.v);
            for (int i = 0; i < k; ++i)
                rec.speeds[static_cast<std::size_t>(i) * (static_cast<std::size_t>(T) + 1) +
                           static_cast<std::size_t>(t)] = s.v[static_cast<std::size_t>(i)].norm();
        }

        BoundParams bp;
        if (need_params) bp = derive_bound_params(rel.front(), cfg.hierarchy, cfg.h, cert.p, cert.alpha);

        rec.products.reserve(nq);
        rec.product_bounds.reserve(nq);
        rec.product_status.reserve(nq);
        for (const ProductQuery& q : spec.products) {
            double prod = 1.0;
            for (std::int64_t s = q.tau + 1; s <= q.t + 1; ++s) prod *= traj.contraction(q.bird, s);
            rec.products.push_back(prod);
            const auto [bound, status] = product_envelope(bp, q.bird, q.tau, q.t);
            rec.product_bounds.push_back(bound);
            rec.product_status.push_back(status);
        }

        if (speed_rows) {
            rec.speed_bounds.resize(static_cast<std::size_t>(T));
            const double v1_speed = rel.front().v[1].norm();
            for (std::int64_t t = 1; t <= T; ++t) {
                const BoundResult r = follower_speed_bound_subcritical(bp, v1_speed, t);
                // v0 = 0 keeps every relative speed at zero, so 0 is exact.
                rec.speed_bounds[static_cast<std::size_t>(t - 1)] = r.ok() ? r.value : 0.0;
            }
        }

        rec.quantile_samples.reserve(qsteps.size());
        for (std::int64_t t : qsteps) rec.quantile_samples.push_back(rec.sup_v[static_cast<std::size_t>(t)]);

        rec.flocking = spec.track_flocking &&
                       detect_flocking(rel, spec.detect.eps_v, spec.detect.window, cfg.h).flocking();
        return rec;
    };

    // Ordered accumulators.
    std::vector<double> supv_sum(static_cast<std::size_t>(T) + 1, 0.0), supv_sq(static_cast<std::size_t>(T) + 1, 0.0);
    std::vector<double> spd_sum(static_cast<std::size_t>(k) * (static_cast<std::size_t>(T) + 1), 0.0);
    std::vector<double> spd_sq(spd_sum.size(), 0.0);
    std::vector<std::vector<double>> prod_vals(nq), prod_bounds(nq);
    std::vector<std::uint64_t> prod_inapplicable(nq, 0), prod_degenerate(nq, 0);
    std::vector<double> sb_speed_sum, sb_bound_sum, sb_diff_sum, sb_diff_sq;
    if (speed_rows) {
        sb_speed_sum.assign(static_cast<std::size_t>(T), 0.0);
        sb_bound_sum.assign(static_cast<std::size_t>(T), 0.0);
        sb_diff_sum.assign(static_cast<std::size_t>(T), 0.0);
        sb_diff_sq.assign(static_cast<std::size_t>(T), 0.0);
    }
    std::vector<std::vector<double>> quantile_vals(qsteps.size());
    for (auto& v : prod_vals) v.reserve(R);
    for (auto& v : prod_bounds) v.reserve(R);
    for (auto& v : quantile_vals) v.reserve(R);
    std::uint64_t flock_count = 0;

    auto fold = [&](ReplicaRecord& rec) {
        for (std::size_t i = 0; i < rec.sup_v.size(); ++i) {
            supv_sum[i] += rec.sup_v[i];
            supv_sq[i] += rec.sup_v[i] * rec.sup_v[i];
        }
        for (std::size_t i = 0; i < rec.speeds.size(); ++i) {
            spd_sum[i] += rec.speeds[i];
            spd_sq[i] += rec.speeds[i] * rec.speeds[i];
        }
        for (std::size_t q = 0; q < nq; ++q) {
            prod_vals[q].push_back(rec.products[q]);
            prod_bounds[q].push_back(rec.product_bounds[q]);
            if (rec.product_status[q] == kInapplicable) ++prod_inapplicable[q];
            if (rec.product_status[q] == kDegenerate) ++prod_degenerate[q];
        }
        if (speed_rows) {
            const std::size_t off = (static_cast<std::size_t>(T) + 1);  // bird 1 series starts here
            for (std::size_t t = 0; t < rec.speed_bounds.size(); ++t) {
                const double speed = rec.speeds[off + t + 1];
                const double d = speed - rec.speed_bounds[t];
                sb_speed_sum[t] += speed;
                sb_bound_sum[t] += rec.speed_bounds[t];
                sb_diff_sum[t] += d;
                sb_diff_sq[t] += d * d;
            }
        }
        for (std::size_t s = 0; s < quantile_vals.size(); ++s) quantile_vals[s].push_back(rec.quantile_samples[s]);
        if (rec.flocking) ++flock_count;
    };

    chunked_ordered_fold<ReplicaRecord>(R, spec.threads, work, fold);

    EnsembleReport rep;
    rep.replicas = R;
    rep.horizon = T;
    const double Rd = static_cast<double>(R);

    rep.sup_v.mean.resize(supv_sum.size());
    rep.sup_v.se.resize(supv_sum.size());
    for (std::size_t i = 0; i < supv_sum.size(); ++i) {
        rep.sup_v.mean[i] = supv_sum[i] / Rd;
        rep.sup_v.se[i] = se_from_sums(supv_sum[i], supv_sq[i], R);
    }
    rep.sum_mean_sup_v = 0.0;
    for (double m : rep.sup_v.mean) rep.sum_mean_sup_v += m;
    rep.sum_mean_sup_v *= cfg.h;

    rep.speeds.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        SeriesStat& st = rep.speeds[static_cast<std::size_t>(i)];
        st.mean.resize(static_cast<std::size_t>(T) + 1);
        st.se.resize(static_cast<std::size_t>(T) + 1);
        for (std::int64_t t = 0; t <= T; ++t) {
            const std::size_t idx =
                static_cast<std::size_t>(i) * (static_cast<std::size_t>(T) + 1) + static_cast<std::size_t>(t);
            st.mean[static_cast<std::size_t>(t)] = spd_sum[idx] / Rd;
            st.se[static_cast<std::size_t>(t)] = se_from_sums(spd_sum[idx], spd_sq[idx], R);
        }
    }

    rep.products.reserve(nq);
    for (std::size_t q = 0; q < nq; ++q) {
        ProductEstimate pe;
        pe.query = spec.products[q];
        pe.value = two_pass_estimate(prod_vals[q]);

        pe.bound.value = ordered_mean(prod_bounds[q]);
        if (prod_degenerate[q] > 0) {
            pe.bound.status = BoundResult::Status::Degenerate;
            pe.bound.note = std::to_string(prod_degenerate[q]) + " of " + std::to_string(R) +
                            " replicas have no finite-exponent envelope; theirs is the trivial 1";
        } else if (prod_inapplicable[q] > 0) {
            pe.bound.status = BoundResult::Status::Inapplicable;
            pe.bound.note = std::to_string(prod_inapplicable[q]) + " of " + std::to_string(R) +
                            " replicas admit only the trivial envelope 1";
        }

        // Soundness per replica is E[prod | initial] <= envelope(initial), so
        // the statistical test compares the mean margin against its own se.
        double dmean = 0.0;
        for (std::size_t r = 0; r < prod_vals[q].size(); ++r) dmean += prod_vals[q][r] - prod_bounds[q][r];
        dmean /= Rd;
        double dss = 0.0;
        for (std::size_t r = 0; r < prod_vals[q].size(); ++r) {
            const double c = prod_vals[q][r] - prod_bounds[q][r] - dmean;
            dss += c * c;
        }
        const double dse = R > 1 ? std::sqrt(dss / (Rd - 1.0) / Rd) : 0.0;
        pe.within_bound = dmean <= 3.0 * dse;
        rep.products.push_back(std::move(pe));
    }

    if (speed_rows) {
        rep.speed_bounds.reserve(static_cast<std::size_t>(T));
        for (std::int64_t t = 1; t <= T; ++t) {
            const std::size_t i = static_cast<std::size_t>(t - 1);
            BoundComparison row;
            row.bird = 1;
            row.t = t;
            row.mean = sb_speed_sum[i] / Rd;
            row.se = se_from_sums(sb_diff_sum[i], sb_diff_sq[i], R);
            row.bound = sb_bound_sum[i] / Rd;
            row.pass = sb_diff_sum[i] / Rd <= 3.0 * row.se;
            rep.speed_bounds.push_back(row);
        }
    }

    rep.flocking_fraction = spec.track_flocking
                                ? static_cast<double>(flock_count) / Rd
                                : std::numeric_limits<double>::quiet_NaN();

    rep.quantile_steps = qsteps;
    rep.quantile_levels = spec.quantile_levels;
    rep.quantiles.resize(qsteps.size());
    for (std::size_t s = 0; s < qsteps.size(); ++s) {
        rep.quantiles[s].reserve(spec.quantile_levels.size());
        for (double lv : spec.quantile_levels) rep.quantiles[s].push_back(interpolated_quantile(quantile_vals[s], lv));
    }
    return rep;
}

Estimate estimate_product_expectation(const SimConfig& cfg, const ProductQuery& query, std::uint64_t replicas,
                                      int threads) {
    if (replicas < 1) throw ConfigError("ensemble needs at least one replica");
    if (query.bird < 1 || query.bird >= cfg.k) throw ConfigError("product query bird must be a follower");
    if (query.t < 0 || query.tau < 0 || query.tau > query.t + 1) throw ConfigError("product query needs 0 <= tau <= t+1");
    if (query.tau == query.t + 1) return {1.0, 0.0, replicas, replicas < 100};

    auto work = [&](std::uint64_t replica) {
        RngStream rng(cfg.seed, replica);
        Simulator sim(cfg.initial_state(rng), cfg.hierarchy, cfg.model, cfg.h, rng);
        double prod = 1.0;
        for (std::int64_t s = 1; s <= query.t + 1; ++s) {
            const WeightMatrix& w = sim.advance();
            if (s >= query.tau + 1) prod *= 1.0 - cfg.h * w.sum_for(query.bird);
        }
        return prod;
    };

    std::vector<double> vals;
    vals.reserve(replicas);
    chunked_ordered_fold<double>(replicas, threads, work, [&](double v) { vals.push_back(v); });
    return two_pass_estimate(vals);
}

std::string report_to_json(const EnsembleReport& rep) {
    ordered_json j;
    j["replicas"] = rep.replicas;
    j["horizon"] = rep.horizon;
    j["sup_v"] = series_json(rep.sup_v);
    ordered_json speeds = ordered_json::array();
    for (std::size_t i = 0; i < rep.speeds.size(); ++i) {
        ordered_json s = series_json(rep.speeds[i]);
        ordered_json row;
        row["bird"] = i + 1;
        row["mean"] = std::move(s["mean"]);
        row["se"] = std::move(s["se"]);
        speeds.push_back(std::move(row));
    }
    j["speeds"] = std::move(speeds);
    j["sum_mean_sup_v"] = rep.sum_mean_sup_v;

    ordered_json products = ordered_json::array();
    for (const ProductEstimate& pe : rep.products) {
        ordered_json row;
        row["bird"] = pe.query.bird + 1;
        row["tau"] = pe.query.tau;
        row["t"] = pe.query.t;
        row["estimate"] = estimate_json(pe.value);
        ordered_json b;
        b["status"] = status_label(pe.bound.status);
        b["value"] = pe.bound.value;
        b["note"] = pe.bound.note;
        row["bound"] = std::move(b);
        row["within_bound"] = pe.within_bound;
        products.push_back(std::move(row));
    }
    j["products"] = std::move(products);

    ordered_json sb = ordered_json::array();
    for (const BoundComparison& row : rep.speed_bounds) {
        ordered_json r;
        r["bird"] = row.bird + 1;
        r["t"] = row.t;
        r["mean"] = row.mean;
        r["se"] = row.se;
        r["bound"] = row.bound;
        r["pass"] = row.pass;
        sb.push_back(std::move(r));
    }
    j["speed_bounds"] = std::move(sb);

    j["flocking_fraction"] = rep.flocking_fraction;
    ordered_json q;
    q["steps"] = rep.quantile_steps;
    q["levels"] = rep.quantile_levels;
    q["values"] = rep.quantiles;
    j["quantiles"] = std::move(q);
    return j.dump(2) + "\n";
}

}  // namespace hlflock
