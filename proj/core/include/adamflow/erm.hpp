#ifndef ADAMFLOW_ERM_HPP
#define ADAMFLOW_ERM_HPP

#include <cstdint>
#include <functional>
#include <istream>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "adamflow/field.hpp"
#include "adamflow/innovation.hpp"
#include "adamflow/vec.hpp"

namespace adamflow {

// Regression training data: rows (y_i, z_i) with pairwise distinct inputs.
struct Dataset {
    int input_dim = 0;
    Vec inputs;   // row-major, size() x input_dim
    Vec targets;  // size()

    std::size_t size() const { return targets.size(); }
    std::span<const double> input(std::size_t i) const {
        return {inputs.data() + i * static_cast<std::size_t>(input_dim),
                static_cast<std::size_t>(input_dim)};
    }
};

// Validates shapes and pairwise-distinct inputs.
Dataset make_dataset(Vec inputs, int input_dim, Vec targets);

// Header row y_1..y_m,z; every data row must parse as numbers.
Dataset load_dataset_csv(std::istream& in);
void write_dataset_csv(const Dataset& data, std::ostream& out);

// Random dataset with inputs uniform on [-1,1]^m (distinctness holds almost
// surely and is validated) and targets uniform on [-1,1].
Dataset synthetic_dataset(std::size_t n, int input_dim, std::uint64_t seed);

// A parametric regressor theta -> (y -> prediction), smooth in theta.
class PredictionModel {
public:
    virtual ~PredictionModel() = default;
    virtual int input_dim() const = 0;
    virtual int param_dim() const = 0;
    virtual double predict(std::span<const double> theta, std::span<const double> y) const = 0;
    // Gradient of predict w.r.t. theta at fixed input.
    virtual void param_gradient(std::span<const double> theta, std::span<const double> y,
                                std::span<double> out) const = 0;
};

// prediction = <theta[0..m), y> + theta[m]; param_dim = m + 1.
class AffineModel : public PredictionModel {
public:
    explicit AffineModel(int input_dim);
    int input_dim() const override { return m_; }
    int param_dim() const override { return m_ + 1; }
    double predict(std::span<const double> theta, std::span<const double> y) const override;
    void param_gradient(std::span<const double> theta, std::span<const double> y,
                        std::span<double> out) const override;

private:
    int m_;
};

// prediction = theta[last] + sum_w a_w * tanh(<u_w, y> + b_w), parameters
// laid out per hidden unit as [u (m), b, a]; param_dim = width*(m+2) + 1.
class ShallowTanhModel : public PredictionModel {
public:
    ShallowTanhModel(int input_dim, int width);
    int input_dim() const override { return m_; }
    int param_dim() const override { return width_ * (m_ + 2) + 1; }
    int width() const { return width_; }
    double predict(std::span<const double> theta, std::span<const double> y) const override;
    void param_gradient(std::span<const double> theta, std::span<const double> y,
                        std::span<double> out) const override;

private:
    int m_;
    int width_;
};

// R(theta) = (1/2N) sum_i (prediction_i - z_i)^2 and its exact gradient.
double empirical_risk(const PredictionModel& model, const Dataset& data,
                      std::span<const double> theta);
Vec risk_gradient(const PredictionModel& model, const Dataset& data,
                  std::span<const double> theta);

// Objective adapter so the risk plugs into field/flow/innovation factories.
class ErmObjective : public Objective {
public:
    ErmObjective(std::shared_ptr<const PredictionModel> model, Dataset data);
    int dim() const override;
    double value(std::span<const double> theta) const override;
    void gradient(std::span<const double> theta, std::span<double> out) const override;
    const Dataset& data() const { return data_; }
    const PredictionModel& model() const { return *model_; }

private:
    std::shared_ptr<const PredictionModel> model_;
    Dataset data_;
};

// Minibatch gradient estimator: M indices i.i.d. uniform with replacement,
// X = -(1/M) sum_k residual_{I_k} * param_gradient(y_{I_k}). Mean is exactly
// -grad R; at an interpolating theta every draw is the zero vector.
std::unique_ptr<InnovationModel> make_minibatch_innovation(
    std::shared_ptr<const PredictionModel> model, Dataset data, int batch_size);

// Smallest real threshold such that batch sizes strictly above it keep the
// second-moment average of minibatch noise compatible with beta:
// log(2*sqrt(beta) - 1) / log(1 - 1/N). Requires beta in (1/4, 1), N >= 2;
// beta <= 1/4 makes the numerator's argument nonpositive.
double min_batch_threshold(double beta, std::uint64_t n_data);

// Scalar showcase with a state-dependent asymmetric noise:
// X = -R'(theta) + noise, noise = +a(theta) w.p. p and -a(theta)*p/(1-p)
// otherwise (mean zero), a(theta) = a0 * (1 + lambda * theta^2). Rare large
// positive spikes (p < 1/2) inflate the second-moment average asymmetrically,
// so the mean update direction vanishes away from the gradient zero.
std::unique_ptr<InnovationModel> make_asymmetric_two_point(
    std::shared_ptr<const Objective> objective, double a0, double lambda, double p);

struct NoiseConditionOptions {
    double c1 = 1.0, p1 = 3.0;  // third-moment side: E|X_i|^3 <= c1 * |grad R|^p1
    double c2 = 1.0, p2 = 2.0;  // small-ball side: P(|X_i|^2 < c2 |grad_i R|^p2) <= q
    double q = 0.5;
    std::uint64_t n_samples = 10000;
    std::uint64_t seed = 0;
};

// Monte Carlo probe of the two noise conditions at each supplied theta.
// Verdicts use the one-sided rule estimate - 3*SE <= bound. A probe with
// grad R = 0 and all-zero estimates is flagged indeterminate (0/0 ratio).
struct NoiseConditionReport {
    struct Probe {
        Vec theta;
        Vec grad;                 // analytic gradient at the probe
        Vec third_moment;         // per coordinate E|X_i|^3 estimate
        Vec third_moment_se;
        double third_moment_bound = 0.0;  // c1 * |grad R|^p1
        Vec small_prob;           // per coordinate P(|X_i|^2 < c2 |grad_i|^p2)
        Vec small_prob_se;
        double ratio_max = 0.0;   // max_i estimate / bound; NaN when 0/0
        bool moment_ok = false;
        bool prob_ok = false;
        bool indeterminate = false;
    };
    NoiseConditionOptions options;
    std::vector<Probe> probes;
};
NoiseConditionReport check_noise_conditions(const InnovationModel& model, const Objective& risk,
                                            const std::vector<Vec>& probe_thetas,
                                            const NoiseConditionOptions& options);

// Empirical gradient-dominance certificate over the probed points:
// mu_hat = 0.5 * min over probes with R > 0 of |grad R|^2 / R. Regional and
// empirical only; defined = false when every probe has R = 0.
struct PlReport {
    double mu_hat = 0.0;
    Vec argmin_theta;
    bool defined = false;
    std::size_t n_used = 0;
};
PlReport pl_constant(const Objective& risk, const std::vector<Vec>& probes);

// Inner product of an estimated mean update direction with the analytic
// gradient, with propagated standard error.
struct LyapunovReport {
    enum class Verdict { kNegative, kZeroPair, kInconclusive };
    double product = 0.0;
    double std_error = 0.0;
    Verdict verdict = Verdict::kInconclusive;
};
LyapunovReport lyapunov_product(const FieldEstimate& field, std::span<const double> grad);

}  // namespace adamflow

#endif
