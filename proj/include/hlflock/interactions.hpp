#pragma once

#include <optional>
#include <string>

#include "hlflock/hierarchy.hpp"
#include "hlflock/rng.hpp"
#include "hlflock/state.hpp"
#include "hlflock/weights.hpp"

namespace hlflock {

/// Lower-bound certificate for the conditional expectation of a realized
/// weight at pair distance d:  E(a | history) >= p / (1 + d)^alpha.
struct Certificate {
    double p = 0.0;      // in (0, 1]
    double alpha = 0.0;  // >= 0
};

/// The certified conditional-expectation floor p (1 + d)^(-alpha).
double power_bound(double dist, double p, double alpha);

/// Classic distance-decay weight K / (sigma^2 + d^2)^beta.
double cs_weight(double dist, double K, double sigma, double beta);

enum class InteractionKind {
    DeterministicCS,    // K / (sigma^2 + d^2)^beta, no randomness
    PowerLaw,           // (1 + d)^(-alpha), no randomness
    BernoulliFailure,   // X * (1 + d)^(-alpha), X ~ Bernoulli(p)
    ScaledRandom,       // X * (1 + d)^(-alpha), X in [0,1] with mean >= p
    RandomEnvironment,  // value p with probability (1 + d)^(-alpha), else 0
};

const char* kind_name(InteractionKind kind);

/// Distribution of the [0, 1]-valued scale factor used by ScaledRandom.
/// Validated at model construction: support inside [0, 1], mean >= p.
struct ScaleDistribution {
    enum class Type { Default, Uniform, Constant, Bernoulli };
    Type type = Type::Default;
    double lo = 0.0;     // Uniform
    double hi = 1.0;     // Uniform
    double value = 1.0;  // Constant
    double prob = 1.0;   // Bernoulli(prob) on {0, 1}

    /// Effective distribution mean (Default resolves against p at the model).
    double mean(double p) const;
    /// Inverse-CDF draw from one uniform variate.
    double sample(double u, double p) const;
};

/// A pluggable weight kernel: produces one realized weight per hierarchy
/// edge per step, every realization in [0, 1], together with the (p, alpha)
/// certificate its conditional mean is guaranteed to dominate.
///
/// Construct through the named factories; they validate parameter ranges and
/// reject kernels whose peak weight would exceed 1.
class InteractionModel {
  public:
    /// Rejects K / sigma^(2 beta) > 1 (peak weight at distance zero).
    /// The certificate (min(K, K/sigma^(2 beta)), 2 beta) is implied by the
    /// kernel shape and recorded so bound evaluation works uniformly.
    static InteractionModel deterministic_cs(double K, double sigma, double beta);
    static InteractionModel power_law(double alpha);
    static InteractionModel bernoulli_failure(double p, double alpha);
    static InteractionModel scaled_random(double p, double alpha, ScaleDistribution dist = {});
    static InteractionModel random_environment(double p, double alpha);

    InteractionKind kind() const { return kind_; }
    const Certificate& certificate() const { return certificate_; }

    // Kind-specific parameters (meaningful only for the matching kind).
    double K() const { return K_; }
    double sigma() const { return sigma_; }
    double beta() const { return beta_; }
    double p() const { return p_; }
    double alpha() const { return alpha_; }
    const ScaleDistribution& scale_distribution() const { return dist_; }

    bool is_deterministic() const {
        return kind_ == InteractionKind::DeterministicCS || kind_ == InteractionKind::PowerLaw;
    }

    /// Realized weight for one edge at distance d, consuming the uniform
    /// variate u (ignored by deterministic kinds).
    double realize(double dist, double u) const;

    /// Conditional mean of the realized weight at distance d.
    double conditional_mean(double dist) const;

  private:
    InteractionModel() = default;

    InteractionKind kind_ = InteractionKind::PowerLaw;
    Certificate certificate_;
    double K_ = 0.0, sigma_ = 0.0, beta_ = 0.0;
    double p_ = 0.0, alpha_ = 0.0;
    ScaleDistribution dist_;
};

/// Draws the weight matrix for the step out of `state` (tagged state.t + 1).
/// Distances come from the state's pairwise differences, so the kernel is
/// frame-agnostic; variates are indexed by (replica, t + 1, bird, leader).
WeightMatrix sample_weights(const InteractionModel& model, const FlockState& state, const Hierarchy& hier,
                            const RngStream& rng);

}  // namespace hlflock
