#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hlflock/analysis.hpp"
#include "hlflock/config.hpp"

namespace hlflock {

/// E[prod_{sigma=tau+1}^{t+1} (1 - h a_{bird,lead}[sigma])] estimated over
/// replicas. tau == t+1 denotes the empty product (mean 1, se 0).
struct ProductQuery {
    int bird = 1;
    std::int64_t tau = 0;
    std::int64_t t = 0;
};

/// Monte Carlo mean with its standard error (sample sd / sqrt(R)).
struct Estimate {
    double mean = 0.0;
    double se = 0.0;
    std::uint64_t n = 0;
    bool low_confidence = false;  // fewer than 100 replicas
};

struct ProductEstimate {
    ProductQuery query;
    Estimate value;
    BoundResult bound;  // matching contraction bound, when applicable
    bool within_bound = false;  // mean <= bound + 3 se
};

/// Time series of per-step Monte Carlo means.
struct SeriesStat {
    std::vector<double> mean;
    std::vector<double> se;
};

/// Envelope check: MC mean of a follower speed against its decay bound,
/// sampled at selected steps. Passing means mean <= bound + 3 se.
struct BoundComparison {
    int bird = 1;
    std::int64_t t = 0;
    double mean = 0.0;
    double se = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct EnsembleSpec {
    std::uint64_t replicas = 100;
    std::int64_t horizon = 100;
    int threads = 0;  // 0 = hardware concurrency
    std::vector<ProductQuery> products;
    bool track_speed_bounds = false;  // per-step envelope rows for bird 1
    bool track_flocking = true;       // run per-replica flocking detection
    DetectOptions detect;
    std::vector<double> quantile_levels = {0.05, 0.5, 0.95};
};

struct EnsembleReport {
    std::uint64_t replicas = 0;
    std::int64_t horizon = 0;

    SeriesStat sup_v;                      // relative-frame sup norm per step
    std::vector<SeriesStat> speeds;        // per bird, relative frame
    double sum_mean_sup_v = 0.0;           // h * sum of mean sup_v (drift scale)

    std::vector<ProductEstimate> products;
    std::vector<BoundComparison> speed_bounds;

    double flocking_fraction = 0.0;        // replicas detected as flocking; NaN if not tracked

    // Quantiles of sup_v at decimated steps (<= 33 points).
    std::vector<std::int64_t> quantile_steps;
    std::vector<double> quantile_levels;
    std::vector<std::vector<double>> quantiles;  // [step][level]
};

/// Runs R replicas of cfg (seeds derived from cfg.seed by replica index),
/// folding per-replica statistics in replica order so the report is
/// byte-identical for any thread count.
EnsembleReport run_ensemble(const SimConfig& cfg, const EnsembleSpec& spec);

/// Single product estimate without a full report.
Estimate estimate_product_expectation(const SimConfig& cfg, const ProductQuery& query,
                                      std::uint64_t replicas, int threads = 0);

std::string report_to_json(const EnsembleReport& report);

}  // namespace hlflock
