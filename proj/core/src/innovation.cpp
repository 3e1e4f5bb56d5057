#include "adamflow/innovation.hpp"

#include <cmath>
#include <string>

#include "adamflow/errors.hpp"
#include "adamflow/stats.hpp"

namespace adamflow {

DampingParams::DampingParams(double alpha_, double beta_, double eps_)
    : alpha(alpha_), beta(beta_), eps(eps_) {
    if (!(alpha >= 0.0) || !(alpha < 1.0))
        throw ValidationError("damping: alpha must lie in [0, 1), got " + std::to_string(alpha));
    if (!(beta > 0.0) || !(beta < 1.0))
        throw ValidationError("damping: beta must lie in (0, 1), got " + std::to_string(beta));
    if (!(eps > 0.0) || !std::isfinite(eps))
        throw ValidationError("damping: eps must be positive, got " + std::to_string(eps));
    if (!(alpha * alpha < beta))
        throw ValidationError("damping: requires alpha^2 < beta, got alpha^2=" +
                              std::to_string(alpha * alpha) + ", beta=" + std::to_string(beta));
}

double DampingParams::speed_bound(int dim) const {
    return std::sqrt(static_cast<double>(dim)) * (1.0 - alpha) /
           (std::sqrt(1.0 - beta) * std::sqrt(1.0 - alpha * alpha / beta));
}

int default_truncation(const DampingParams& p) {
    const double k = 20.0 * std::ceil(1.0 / (1.0 - std::sqrt(p.beta)));
    return static_cast<int>(std::min(k, 1e5));
}

void InnovationModel::mean(std::span<const double>, std::span<double>) const {
    throw ValidationError("innovation: model has no closed-form mean");
}

QuadraticObjective::QuadraticObjective(Vec scale, Vec center)
    : scale_(std::move(scale)), center_(std::move(center)) {
    if (scale_.empty()) throw ValidationError("quadratic objective: empty scale");
    if (center_.empty()) center_.assign(scale_.size(), 0.0);
    check_dim(center_.size(), scale_.size(), "quadratic objective center");
}

double QuadraticObjective::value(std::span<const double> theta) const {
    check_dim(theta.size(), scale_.size(), "quadratic objective");
    double r = 0.0;
    for (std::size_t j = 0; j < scale_.size(); ++j) {
        const double d = theta[j] - center_[j];
        r += 0.5 * scale_[j] * d * d;
    }
    return r;
}

void QuadraticObjective::gradient(std::span<const double> theta, std::span<double> out) const {
    check_dim(theta.size(), scale_.size(), "quadratic objective");
    for (std::size_t j = 0; j < scale_.size(); ++j) out[j] = scale_[j] * (theta[j] - center_[j]);
}

namespace {

class DeterministicGradientModel final : public InnovationModel {
public:
    explicit DeterministicGradientModel(std::shared_ptr<const Objective> obj)
        : obj_(std::move(obj)) {
        if (!obj_) throw ValidationError("innovation: null objective");
    }
    int dim() const override { return obj_->dim(); }
    void sample(std::span<const double> theta, CounterRng&, std::span<double> out) const override {
        obj_->gradient(theta, out);
        for (auto& x : out) x = -x;
    }
    bool has_mean() const override { return true; }
    void mean(std::span<const double> theta, std::span<double> out) const override {
        obj_->gradient(theta, out);
        for (auto& x : out) x = -x;
    }
    bool deterministic() const override { return true; }

private:
    std::shared_ptr<const Objective> obj_;
};

class GaussianGradientModel final : public InnovationModel {
public:
    GaussianGradientModel(std::shared_ptr<const Objective> obj, double sigma)
        : obj_(std::move(obj)), sigma_(sigma) {
        if (!obj_) throw ValidationError("innovation: null objective");
        if (!(sigma >= 0.0) || !std::isfinite(sigma))
            throw ValidationError("innovation: sigma must be non-negative");
    }
    int dim() const override { return obj_->dim(); }
    void sample(std::span<const double> theta, CounterRng& rng,
                std::span<double> out) const override {
        obj_->gradient(theta, out);
        for (auto& x : out) x = -x + sigma_ * rng.next_gaussian();
    }
    bool has_mean() const override { return true; }
    void mean(std::span<const double> theta, std::span<double> out) const override {
        obj_->gradient(theta, out);
        for (auto& x : out) x = -x;
    }
    bool deterministic() const override { return sigma_ == 0.0; }

private:
    std::shared_ptr<const Objective> obj_;
    double sigma_;
};

class TwoPointModel final : public InnovationModel {
public:
    TwoPointModel(Vec a, Vec b, double p) : a_(std::move(a)), b_(std::move(b)), p_(p) {
        if (a_.empty()) throw ValidationError("two-point model: empty support");
        check_dim(b_.size(), a_.size(), "two-point model");
        if (!(p >= 0.0) || !(p <= 1.0))
            throw ValidationError("two-point model: probability must lie in [0, 1]");
    }
    int dim() const override { return static_cast<int>(a_.size()); }
    void sample(std::span<const double>, CounterRng& rng, std::span<double> out) const override {
        const Vec& v = (rng.next_uniform() < p_) ? a_ : b_;
        for (std::size_t j = 0; j < v.size(); ++j) out[j] = v[j];
    }
    bool has_mean() const override { return true; }
    void mean(std::span<const double>, std::span<double> out) const override {
        for (std::size_t j = 0; j < a_.size(); ++j) out[j] = p_ * a_[j] + (1.0 - p_) * b_[j];
    }

private:
    Vec a_, b_;
    double p_;
};

}  // namespace

std::unique_ptr<InnovationModel> make_deterministic_gradient(std::shared_ptr<const Objective> obj) {
    return std::make_unique<DeterministicGradientModel>(std::move(obj));
}

std::unique_ptr<InnovationModel> make_gaussian_gradient(std::shared_ptr<const Objective> obj,
                                                        double sigma) {
    return std::make_unique<GaussianGradientModel>(std::move(obj), sigma);
}

std::unique_ptr<InnovationModel> make_two_point(Vec a, Vec b, double p) {
    return std::make_unique<TwoPointModel>(std::move(a), std::move(b), p);
}

WeightVector::WeightVector(const DampingParams& p, int truncation_)
    : params(p), truncation(truncation_) {
    if (truncation < 1) throw ValidationError("weights: truncation must be at least 1");
}

double WeightVector::weight(int lag) const {
    if (lag < 0 || lag >= truncation)
        throw OutOfRangeError("weights: lag " + std::to_string(lag) + " outside [0, " +
                              std::to_string(truncation) + ")");
    const double cross = 1.0 / std::sqrt(1.0 - params.alpha * params.alpha / params.beta);
    return (1.0 - params.alpha) / params.eps *
           (std::pow(params.alpha, lag) + cross * std::pow(params.beta, 0.5 * lag));
}

double WeightVector::total_mass() const { return tail_mass(0); }

double WeightVector::tail_mass(int from_lag) const {
    if (from_lag < 0) throw OutOfRangeError("weights: negative lag");
    const double a = params.alpha, b = params.beta, e = params.eps;
    const double cross = 1.0 / std::sqrt(1.0 - a * a / b);
    const double sb = std::sqrt(b);
    // Geometric tails: sum_{l>=L} a^l = a^L/(1-a), same for sqrt(beta).
    const double alpha_tail = (a == 0.0 && from_lag > 0) ? 0.0 : std::pow(a, from_lag) / (1.0 - a);
    return (1.0 - a) / e * (alpha_tail + cross * std::pow(sb, from_lag) / (1.0 - sb));
}

double weighted_history_norm(const WeightVector& w, std::span<const double> history, int dim) {
    if (dim < 1) throw ValidationError("history norm: dimension must be positive");
    if (history.size() % static_cast<std::size_t>(dim) != 0)
        throw ValidationError("history norm: history size not a multiple of dim");
    const auto len = history.size() / static_cast<std::size_t>(dim);
    if (len > static_cast<std::size_t>(w.truncation))
        throw ValidationError("history norm: history longer than weight truncation");
    double s = 0.0;
    for (std::size_t lag = 0; lag < len; ++lag) {
        const auto entry = history.subspan(lag * dim, dim);
        s += w.weight(static_cast<int>(lag)) * norm2(entry);
    }
    return s;
}

MomentRegularityReport estimate_regularity(const InnovationModel& model, double p,
                                           const std::vector<std::pair<Vec, Vec>>& probe_pairs,
                                           std::uint64_t n_samples, std::uint64_t seed) {
    if (!(p > 0.0)) throw ValidationError("regularity probe: p must be positive");
    if (n_samples < 2) throw ValidationError("regularity probe: need at least two samples");
    const int d = model.dim();
    MomentRegularityReport rep;
    rep.p = p;
    const RngStream stream(seed, "innovation/regularity");

    Vec xa(d), xb(d), diff(d);
    std::uint64_t probe_id = 0;
    for (const auto& [ta, tb] : probe_pairs) {
        check_dim(ta.size(), static_cast<std::size_t>(d), "regularity probe theta");
        check_dim(tb.size(), static_cast<std::size_t>(d), "regularity probe theta");
        MeanVar ma, mb, minc;
        const double gap = dist2(ta, tb);
        const RngStream sub = stream.child(probe_id++);
        for (std::uint64_t i = 0; i < n_samples; ++i) {
            // One coupled draw: same U for theta_a and theta_b.
            auto rng_a = sub.at(i);
            auto rng_b = sub.at(i);
            model.sample(ta, rng_a, xa);
            model.sample(tb, rng_b, xb);
            ma.add(std::pow(norm2(xa), p));
            mb.add(std::pow(norm2(xb), p));
            if (gap > 0.0) {
                for (int j = 0; j < d; ++j) diff[j] = xa[j] - xb[j];
                minc.add(std::pow(norm2(diff), p) / std::pow(gap, p));
            }
        }
        rep.moments.push_back({ta, ma.mean(), ma.std_error()});
        rep.moments.push_back({tb, mb.mean(), mb.std_error()});
        MomentRegularityReport::IncrementProbe ip;
        ip.theta_a = ta;
        ip.theta_b = tb;
        if (gap > 0.0) {
            ip.estimate = minc.mean();
            ip.std_error = minc.std_error();
        } else {
            ip.skipped = true;
        }
        rep.increments.push_back(std::move(ip));
    }
    return rep;
}

}  // namespace adamflow
