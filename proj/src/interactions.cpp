#include "hlflock/interactions.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hlflock/errors.hpp"

namespace hlflock {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

}  // namespace

double power_bound(double dist, double p, double alpha) {
    if (!(dist >= 0.0)) throw std::invalid_argument("negative distance");
    return p * std::pow(1.0 + dist, -alpha);
}

double cs_weight(double dist, double K, double sigma, double beta) {
    if (!(dist >= 0.0)) throw std::invalid_argument("negative distance");
    return K * std::pow(sigma * sigma + dist * dist, -beta);
}

const char* kind_name(InteractionKind kind) {
    switch (kind) {
        case InteractionKind::DeterministicCS: return "deterministic_cs";
        case InteractionKind::PowerLaw: return "power_law";
        case InteractionKind::BernoulliFailure: return "bernoulli_failure";
        case InteractionKind::ScaledRandom: return "scaled_random";
        case InteractionKind::RandomEnvironment: return "random_environment";
    }
    return "?";
}

double ScaleDistribution::mean(double p) const {
    switch (type) {
        case Type::Default: return (std::max(2.0 * p - 1.0, 0.0) + 1.0) / 2.0;
        case Type::Uniform: return (lo + hi) / 2.0;
        case Type::Constant: return value;
        case Type::Bernoulli: return prob;
    }
    return 0.0;
}

double ScaleDistribution::sample(double u, double p) const {
    switch (type) {
        case Type::Default: {
            const double a = std::max(2.0 * p - 1.0, 0.0);
            return a + u * (1.0 - a);
        }
        case Type::Uniform: return lo + u * (hi - lo);
        case Type::Constant: return value;
        case Type::Bernoulli: return u < prob ? 1.0 : 0.0;
    }
    return 0.0;
}

InteractionModel InteractionModel::deterministic_cs(double K, double sigma, double beta) {
    require(K > 0.0, "deterministic_cs: K must be positive");
    require(sigma > 0.0, "deterministic_cs: sigma must be positive");
    require(beta >= 0.0, "deterministic_cs: beta must be non-negative");
    const double peak = K * std::pow(sigma, -2.0 * beta);
    require(peak <= 1.0, "deterministic_cs: peak weight K/sigma^(2 beta) = " + std::to_string(peak) +
                             " exceeds 1; shrink K or grow sigma");
    InteractionModel m;
    m.kind_ = InteractionKind::DeterministicCS;
    m.K_ = K;
    m.sigma_ = sigma;
    m.beta_ = beta;
    // K/(sigma^2+d^2)^beta >= min(K, K/sigma^(2 beta)) (1+d)^(-2 beta):
    // the ratio (1+d)^2/(sigma^2+d^2) is minimized at d=0 or d=inf.
    m.certificate_ = {std::min(K, peak), 2.0 * beta};
    return m;
}

InteractionModel InteractionModel::power_law(double alpha) {
    require(alpha >= 0.0, "power_law: alpha must be non-negative");
    InteractionModel m;
    m.kind_ = InteractionKind::PowerLaw;
    m.alpha_ = alpha;
    m.certificate_ = {1.0, alpha};
    return m;
}

InteractionModel InteractionModel::bernoulli_failure(double p, double alpha) {
    require(p > 0.0 && p <= 1.0, "bernoulli_failure: p must lie in (0, 1]");
    require(alpha >= 0.0, "bernoulli_failure: alpha must be non-negative");
    InteractionModel m;
    m.kind_ = InteractionKind::BernoulliFailure;
    m.p_ = p;
    m.alpha_ = alpha;
    m.certificate_ = {p, alpha};
    return m;
}

InteractionModel InteractionModel::scaled_random(double p, double alpha, ScaleDistribution dist) {
    require(p > 0.0 && p <= 1.0, "scaled_random: p must lie in (0, 1]");
    require(alpha >= 0.0, "scaled_random: alpha must be non-negative");
    switch (dist.type) {
        case ScaleDistribution::Type::Default: break;
        case ScaleDistribution::Type::Uniform:
            require(0.0 <= dist.lo && dist.lo <= dist.hi && dist.hi <= 1.0,
                    "scaled_random: uniform support must satisfy 0 <= lo <= hi <= 1");
            break;
        case ScaleDistribution::Type::Constant:
            require(0.0 <= dist.value && dist.value <= 1.0, "scaled_random: constant scale must lie in [0, 1]");
            break;
        case ScaleDistribution::Type::Bernoulli:
            require(0.0 <= dist.prob && dist.prob <= 1.0, "scaled_random: bernoulli prob must lie in [0, 1]");
            break;
    }
    require(dist.mean(p) >= p - 1e-12, "scaled_random: scale mean " + std::to_string(dist.mean(p)) +
                                           " falls below p = " + std::to_string(p) +
                                           "; the certificate would be unsound");
    InteractionModel m;
    m.kind_ = InteractionKind::ScaledRandom;
    m.p_ = p;
    m.alpha_ = alpha;
    m.dist_ = dist;
    m.certificate_ = {p, alpha};
    return m;
}

InteractionModel InteractionModel::random_environment(double p, double alpha) {
    require(p > 0.0 && p <= 1.0, "random_environment: p must lie in (0, 1]");
    require(alpha >= 0.0, "random_environment: alpha must be non-negative");
    InteractionModel m;
    m.kind_ = InteractionKind::RandomEnvironment;
    m.p_ = p;
    m.alpha_ = alpha;
    m.certificate_ = {p, alpha};
    return m;
}

double InteractionModel::realize(double dist, double u) const {
    const double decay = std::pow(1.0 + dist, -alpha_);
    switch (kind_) {
        case InteractionKind::DeterministicCS: return cs_weight(dist, K_, sigma_, beta_);
        case InteractionKind::PowerLaw: return decay;
        case InteractionKind::BernoulliFailure: return u < p_ ? decay : 0.0;
        case InteractionKind::ScaledRandom: return dist_.sample(u, p_) * decay;
        case InteractionKind::RandomEnvironment: return u < decay ? p_ : 0.0;
    }
    return 0.0;
}

double InteractionModel::conditional_mean(double dist) const {
    switch (kind_) {
        case InteractionKind::DeterministicCS: return cs_weight(dist, K_, sigma_, beta_);
        case InteractionKind::PowerLaw: return std::pow(1.0 + dist, -alpha_);
        case InteractionKind::BernoulliFailure: return p_ * std::pow(1.0 + dist, -alpha_);
        case InteractionKind::ScaledRandom: return dist_.mean(p_) * std::pow(1.0 + dist, -alpha_);
        case InteractionKind::RandomEnvironment: return p_ * std::pow(1.0 + dist, -alpha_);
    }
    return 0.0;
}

WeightMatrix sample_weights(const InteractionModel& model, const FlockState& state, const Hierarchy& hier,
                            const RngStream& rng) {
    const int k = state.bird_count();
    if (hier.bird_count() != k) throw std::invalid_argument("hierarchy size does not match the flock");
    WeightMatrix w;
    w.t = state.t + 1;
    w.values.resize(static_cast<std::size_t>(k));
    for (int i = 1; i < k; ++i) {
        auto ls = hier.leaders_of(i);
        w.values[i].reserve(ls.size());
        for (int j : ls) {
            const double d = distance(state.x[i], state.x[j]);
            const double u = model.is_deterministic() ? 0.0 : rng.uniform(w.t, i, j);
            const double a = model.realize(d, u);
            if (!(a >= 0.0 && a <= 1.0))
                throw InvariantError("realized weight " + std::to_string(a) + " outside [0, 1]");
            w.values[i].push_back(a);
        }
    }
    return w;
}

}  // namespace hlflock
