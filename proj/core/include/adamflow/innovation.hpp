#ifndef ADAMFLOW_INNOVATION_HPP
#define ADAMFLOW_INNOVATION_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "adamflow/rng.hpp"
#include "adamflow/vec.hpp"

namespace adamflow {

// Smoothing/regularization constants shared by the optimizer, the history
// transform, and the limiting field. Requires 0 <= alpha < 1, 0 < beta < 1,
// eps > 0 and the coupling condition alpha^2 < beta.
struct DampingParams {
    double alpha;
    double beta;
    double eps;

    DampingParams(double alpha_, double beta_, double eps_);

    // sqrt(d) * (1-alpha) / (sqrt(1-beta) * sqrt(1 - alpha^2/beta)):
    // a uniform bound on the update direction and on the limiting field.
    double speed_bound(int dim) const;
};

// History length after which geometric tails are negligible:
// 20 * ceil(1 / (1 - sqrt(beta))), capped at 1e5. The beta-side tail weight
// beta^{K/2} is then below 1e-8 relative for any beta < 1 admitted here.
int default_truncation(const DampingParams& p);

// A stochastic gradient oracle X(U, theta).
//
// Contract: sample() must consume randomness in a way that does not depend
// on theta, so that two calls with the same CounterRng position and
// different theta values see the same underlying draw U. All coupled
// constructions (frozen-theta re-evaluation, shared-noise regularity
// probes) rely on this.
class InnovationModel {
public:
    virtual ~InnovationModel() = default;

    virtual int dim() const = 0;
    virtual void sample(std::span<const double> theta, CounterRng& rng,
                        std::span<double> out) const = 0;

    // E[X(U, theta)] when available in closed form.
    virtual bool has_mean() const { return false; }
    virtual void mean(std::span<const double> theta, std::span<double> out) const;

    // True when X(U, theta) does not depend on U at all.
    virtual bool deterministic() const { return false; }
};

// A differentiable objective with analytic gradient; the deterministic and
// Gaussian-perturbed models below draw their drift from one of these.
class Objective {
public:
    virtual ~Objective() = default;
    virtual int dim() const = 0;
    virtual double value(std::span<const double> theta) const = 0;
    virtual void gradient(std::span<const double> theta, std::span<double> out) const = 0;
};

// R(theta) = 0.5 * sum_j scale_j * (theta_j - center_j)^2.
class QuadraticObjective : public Objective {
public:
    explicit QuadraticObjective(Vec scale, Vec center = {});
    int dim() const override { return static_cast<int>(scale_.size()); }
    double value(std::span<const double> theta) const override;
    void gradient(std::span<const double> theta, std::span<double> out) const override;

private:
    Vec scale_;
    Vec center_;
};

// X(U, theta) = -grad R(theta), no noise.
std::unique_ptr<InnovationModel> make_deterministic_gradient(std::shared_ptr<const Objective> obj);

// X(U, theta) = -grad R(theta) + sigma * Z, Z standard normal.
std::unique_ptr<InnovationModel> make_gaussian_gradient(std::shared_ptr<const Objective> obj,
                                                        double sigma);

// X = a with probability p, else b; independent of theta.
std::unique_ptr<InnovationModel> make_two_point(Vec a, Vec b, double p);

// Geometric decay weights w(lag) evaluated against a finite recent history:
// w(lag) = (1-alpha)/eps * (alpha^lag + beta^{lag/2} / sqrt(1 - alpha^2/beta)).
// These dominate the history-transform sensitivity at each lag, so the
// weighted norm below controls how much an old entry can move the update.
struct WeightVector {
    DampingParams params;
    int truncation;  // number of lags materialized

    WeightVector(const DampingParams& p, int truncation_);
    double weight(int lag) const;      // lag in [0, truncation)
    double total_mass() const;         // closed-form sum over all lags
    double tail_mass(int from_lag) const;
};

// sum_lag w(lag) * |x_lag| with history entries newest first (x_0 is the most
// recent draw); |.| is the Euclidean norm of a d-dimensional entry. The
// history is a flat row-major array of length len * dim with len <= truncation.
double weighted_history_norm(const WeightVector& w, std::span<const double> history, int dim);

// Monte Carlo probe of local moment regularity: per-theta p-th moments
// E[|X(U,theta)|^p] and coupled-increment ratios
// E[|X(U,theta)-X(U,vartheta)|^p] / |theta-vartheta|^p on probe pairs.
struct MomentRegularityReport {
    struct MomentProbe {
        Vec theta;
        double estimate = 0.0;
        double std_error = 0.0;
    };
    struct IncrementProbe {
        Vec theta_a, theta_b;
        double estimate = 0.0;  // ratio; 0 with skipped=true for coincident pairs
        double std_error = 0.0;
        bool skipped = false;
    };
    double p = 0.0;
    std::vector<MomentProbe> moments;
    std::vector<IncrementProbe> increments;
};
MomentRegularityReport estimate_regularity(const InnovationModel& model, double p,
                                      const std::vector<std::pair<Vec, Vec>>& probe_pairs,
                                      std::uint64_t n_samples, std::uint64_t seed);

}  // namespace adamflow

#endif
