#include "adamflow/erm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "adamflow/csv.hpp"
#include "adamflow/errors.hpp"
#include "adamflow/rng.hpp"
#include "adamflow/stats.hpp"

namespace adamflow {

Dataset make_dataset(Vec inputs, int input_dim, Vec targets) {
    if (input_dim < 1) throw ValidationError("input_dim must be positive");
    if (targets.empty()) throw ValidationError("dataset is empty");
    check_dim(inputs.size(), targets.size() * static_cast<std::size_t>(input_dim), "inputs");
    Dataset d;
    d.input_dim = input_dim;
    d.inputs = std::move(inputs);
    d.targets = std::move(targets);
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto yi = d.input(i);
        for (std::size_t k = i + 1; k < d.size(); ++k) {
            const auto yk = d.input(k);
            if (std::equal(yi.begin(), yi.end(), yk.begin()))
                throw ValidationError("inputs must be pairwise distinct (rows " +
                                      std::to_string(i) + ", " + std::to_string(k) + ")");
        }
    }
    return d;
}

Dataset load_dataset_csv(std::istream& in) {
    const CsvTable table = read_numeric_csv(in);
    if (table.columns.size() < 2 || table.columns.back() != "z")
        throw ValidationError("dataset header must be y_1..y_m,z");
    const int m = static_cast<int>(table.columns.size()) - 1;
    for (int j = 0; j < m; ++j)
        if (table.columns[j] != "y_" + std::to_string(j + 1))
            throw ValidationError("dataset header must be y_1..y_m,z");
    Vec inputs, targets;
    inputs.reserve(table.rows.size() * m);
    targets.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        inputs.insert(inputs.end(), row.begin(), row.begin() + m);
        targets.push_back(row.back());
    }
    return make_dataset(std::move(inputs), m, std::move(targets));
}

void write_dataset_csv(const Dataset& data, std::ostream& out) {
    CsvWriter w(out);
    std::vector<std::string> names;
    for (int j = 0; j < data.input_dim; ++j) names.push_back("y_" + std::to_string(j + 1));
    names.push_back("z");
    w.header(names);
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (double c : data.input(i)) w.col(c);
        w.col(data.targets[i]);
        w.end_row();
    }
}

Dataset synthetic_dataset(std::size_t n, int input_dim, std::uint64_t seed) {
    if (n == 0) throw ValidationError("dataset is empty");
    const RngStream stream(seed, "dataset");
    Vec inputs(n * static_cast<std::size_t>(input_dim)), targets(n);
    for (std::size_t i = 0; i < n; ++i) {
        CounterRng rng = stream.at(i);
        for (int j = 0; j < input_dim; ++j)
            inputs[i * input_dim + j] = 2.0 * rng.next_uniform() - 1.0;
        targets[i] = 2.0 * rng.next_uniform() - 1.0;
    }
    return make_dataset(std::move(inputs), input_dim, std::move(targets));
}

AffineModel::AffineModel(int input_dim) : m_(input_dim) {
    if (input_dim < 1) throw ValidationError("input_dim must be positive");
}

double AffineModel::predict(std::span<const double> theta, std::span<const double> y) const {
    check_dim(theta.size(), static_cast<std::size_t>(m_) + 1, "theta");
    check_dim(y.size(), static_cast<std::size_t>(m_), "input");
    double s = theta[m_];
    for (int j = 0; j < m_; ++j) s += theta[j] * y[j];
    return s;
}

void AffineModel::param_gradient(std::span<const double> theta, std::span<const double> y,
                                 std::span<double> out) const {
    check_dim(theta.size(), static_cast<std::size_t>(m_) + 1, "theta");
    check_dim(out.size(), static_cast<std::size_t>(m_) + 1, "gradient");
    for (int j = 0; j < m_; ++j) out[j] = y[j];
    out[m_] = 1.0;
}

ShallowTanhModel::ShallowTanhModel(int input_dim, int width) : m_(input_dim), width_(width) {
    if (input_dim < 1) throw ValidationError("input_dim must be positive");
    if (width < 1) throw ValidationError("width must be positive");
}

double ShallowTanhModel::predict(std::span<const double> theta,
                                 std::span<const double> y) const {
    check_dim(theta.size(), static_cast<std::size_t>(param_dim()), "theta");
    check_dim(y.size(), static_cast<std::size_t>(m_), "input");
    double s = theta[static_cast<std::size_t>(width_) * (m_ + 2)];
    for (int w = 0; w < width_; ++w) {
        const double* unit = theta.data() + static_cast<std::size_t>(w) * (m_ + 2);
        double pre = unit[m_];
        for (int j = 0; j < m_; ++j) pre += unit[j] * y[j];
        s += unit[m_ + 1] * std::tanh(pre);
    }
    return s;
}

void ShallowTanhModel::param_gradient(std::span<const double> theta, std::span<const double> y,
                                      std::span<double> out) const {
    check_dim(theta.size(), static_cast<std::size_t>(param_dim()), "theta");
    check_dim(out.size(), static_cast<std::size_t>(param_dim()), "gradient");
    for (int w = 0; w < width_; ++w) {
        const double* unit = theta.data() + static_cast<std::size_t>(w) * (m_ + 2);
        double* g = out.data() + static_cast<std::size_t>(w) * (m_ + 2);
        double pre = unit[m_];
        for (int j = 0; j < m_; ++j) pre += unit[j] * y[j];
        const double th = std::tanh(pre);
        const double sech2 = 1.0 - th * th;
        const double a = unit[m_ + 1];
        for (int j = 0; j < m_; ++j) g[j] = a * sech2 * y[j];
        g[m_] = a * sech2;
        g[m_ + 1] = th;
    }
    out[static_cast<std::size_t>(width_) * (m_ + 2)] = 1.0;
}

double empirical_risk(const PredictionModel& model, const Dataset& data,
                      std::span<const double> theta) {
    check_dim(static_cast<std::size_t>(data.input_dim),
              static_cast<std::size_t>(model.input_dim()), "dataset input dim");
    double s = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double r = model.predict(theta, data.input(i)) - data.targets[i];
        s += r * r;
    }
    return s / (2.0 * static_cast<double>(data.size()));
}

Vec risk_gradient(const PredictionModel& model, const Dataset& data,
                  std::span<const double> theta) {
    check_dim(static_cast<std::size_t>(data.input_dim),
              static_cast<std::size_t>(model.input_dim()), "dataset input dim");
    const int d = model.param_dim();
    Vec out(d, 0.0), g(d);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double r = model.predict(theta, data.input(i)) - data.targets[i];
        model.param_gradient(theta, data.input(i), g);
        for (int j = 0; j < d; ++j) out[j] += r * g[j];
    }
    const double inv = 1.0 / static_cast<double>(data.size());
    for (double& c : out) c *= inv;
    return out;
}

ErmObjective::ErmObjective(std::shared_ptr<const PredictionModel> model, Dataset data)
    : model_(std::move(model)), data_(std::move(data)) {
    check_dim(static_cast<std::size_t>(data_.input_dim),
              static_cast<std::size_t>(model_->input_dim()), "dataset input dim");
}

int ErmObjective::dim() const { return model_->param_dim(); }

double ErmObjective::value(std::span<const double> theta) const {
    return empirical_risk(*model_, data_, theta);
}

void ErmObjective::gradient(std::span<const double> theta, std::span<double> out) const {
    const Vec g = risk_gradient(*model_, data_, theta);
    std::copy(g.begin(), g.end(), out.begin());
}

namespace {

class MinibatchModel final : public InnovationModel {
public:
    MinibatchModel(std::shared_ptr<const PredictionModel> model, Dataset data, int batch_size)
        : model_(std::move(model)), data_(std::move(data)), batch_(batch_size) {
        if (batch_ < 1) throw ValidationError("batch size must be positive");
        if (data_.size() == 0) throw ValidationError("dataset is empty");
        check_dim(static_cast<std::size_t>(data_.input_dim),
                  static_cast<std::size_t>(model_->input_dim()), "dataset input dim");
    }

    int dim() const override { return model_->param_dim(); }

    void sample(std::span<const double> theta, CounterRng& rng,
                std::span<double> out) const override {
        // Index draws happen first and depend only on the dataset size, so
        // randomness consumption is theta-independent per the base contract.
        static thread_local std::vector<std::uint64_t> idx;
        idx.resize(batch_);
        for (int k = 0; k < batch_; ++k) idx[k] = rng.next_below(data_.size());
        static thread_local Vec grad;
        grad.resize(out.size());
        std::fill(out.begin(), out.end(), 0.0);
        const double inv = -1.0 / static_cast<double>(batch_);
        for (int k = 0; k < batch_; ++k) {
            const auto y = data_.input(static_cast<std::size_t>(idx[k]));
            const double r = model_->predict(theta, y) - data_.targets[idx[k]];
            model_->param_gradient(theta, y, grad);
            for (std::size_t j = 0; j < out.size(); ++j) out[j] += inv * r * grad[j];
        }
    }

    bool has_mean() const override { return true; }
    void mean(std::span<const double> theta, std::span<double> out) const override {
        const Vec g = risk_gradient(*model_, data_, theta);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = -g[j];
    }

private:
    std::shared_ptr<const PredictionModel> model_;
    Dataset data_;
    int batch_;
};

class AsymmetricTwoPointModel final : public InnovationModel {
public:
    AsymmetricTwoPointModel(std::shared_ptr<const Objective> obj, double a0, double lambda,
                            double p)
        : obj_(std::move(obj)), a0_(a0), lambda_(lambda), p_(p) {
        if (obj_->dim() != 1) throw ValidationError("asymmetric showcase is scalar only");
        if (!(a0 > 0.0)) throw ValidationError("a0 must be positive");
        if (!(lambda >= 0.0)) throw ValidationError("lambda must be nonnegative");
        if (!(p > 0.0 && p < 1.0)) throw ValidationError("p must lie in (0,1)");
    }

    int dim() const override { return 1; }

    void sample(std::span<const double> theta, CounterRng& rng,
                std::span<double> out) const override {
        const double u = rng.next_uniform();
        double g;
        obj_->gradient(theta, {&g, 1});
        const double a = a0_ * (1.0 + lambda_ * theta[0] * theta[0]);
        const double noise = u < p_ ? a : -a * p_ / (1.0 - p_);
        out[0] = -g + noise;
    }

    bool has_mean() const override { return true; }
    void mean(std::span<const double> theta, std::span<double> out) const override {
        double g;
        obj_->gradient(theta, {&g, 1});
        out[0] = -g;
    }

private:
    std::shared_ptr<const Objective> obj_;
    double a0_, lambda_, p_;
};

}  // namespace

std::unique_ptr<InnovationModel> make_minibatch_innovation(
    std::shared_ptr<const PredictionModel> model, Dataset data, int batch_size) {
    return std::make_unique<MinibatchModel>(std::move(model), std::move(data), batch_size);
}

std::unique_ptr<InnovationModel> make_asymmetric_two_point(
    std::shared_ptr<const Objective> objective, double a0, double lambda, double p) {
    return std::make_unique<AsymmetricTwoPointModel>(std::move(objective), a0, lambda, p);
}

double min_batch_threshold(double beta, std::uint64_t n_data) {
    if (!(beta > 0.25 && beta < 1.0))
        throw DomainError("beta must lie in (1/4, 1) for the batch threshold");
    if (n_data < 2) throw ValidationError("need at least two data points");
    const double num = std::log(2.0 * std::sqrt(beta) - 1.0);
    const double den = std::log(1.0 - 1.0 / static_cast<double>(n_data));
    return num / den;
}

NoiseConditionReport check_noise_conditions(const InnovationModel& model, const Objective& risk,
                                            const std::vector<Vec>& probe_thetas,
                                            const NoiseConditionOptions& options) {
    const int d = model.dim();
    check_dim(static_cast<std::size_t>(risk.dim()), static_cast<std::size_t>(d), "risk");
    if (options.n_samples < 2) throw ValidationError("need at least two samples");
    NoiseConditionReport report;
    report.options = options;
    const RngStream root(options.seed, "noise/probe");
    Vec x(d);
    for (std::size_t pi = 0; pi < probe_thetas.size(); ++pi) {
        const Vec& theta = probe_thetas[pi];
        check_dim(theta.size(), static_cast<std::size_t>(d), "probe theta");
        NoiseConditionReport::Probe probe;
        probe.theta = theta;
        probe.grad.resize(d);
        risk.gradient(theta, probe.grad);
        const double gnorm = norm2(probe.grad);
        probe.third_moment_bound = options.c1 * std::pow(gnorm, options.p1);

        Vec thresh(d);
        for (int j = 0; j < d; ++j)
            thresh[j] = options.c2 * std::pow(std::abs(probe.grad[j]), options.p2);

        std::vector<MeanVar> mom(d), prob(d);
        const RngStream sub = root.child(pi);
        for (std::uint64_t s = 0; s < options.n_samples; ++s) {
            CounterRng rng = sub.at(s);
            model.sample(theta, rng, x);
            for (int j = 0; j < d; ++j) {
                const double ax = std::abs(x[j]);
                mom[j].add(ax * ax * ax);
                prob[j].add(x[j] * x[j] < thresh[j] ? 1.0 : 0.0);
            }
        }
        probe.third_moment.resize(d);
        probe.third_moment_se.resize(d);
        probe.small_prob.resize(d);
        probe.small_prob_se.resize(d);
        probe.moment_ok = true;
        probe.prob_ok = true;
        double max_mom = 0.0;
        for (int j = 0; j < d; ++j) {
            probe.third_moment[j] = mom[j].mean();
            probe.third_moment_se[j] = mom[j].std_error();
            probe.small_prob[j] = prob[j].mean();
            probe.small_prob_se[j] = prob[j].std_error();
            max_mom = std::max(max_mom, probe.third_moment[j]);
            if (probe.third_moment[j] - 3.0 * probe.third_moment_se[j] >
                probe.third_moment_bound)
                probe.moment_ok = false;
            if (probe.small_prob[j] - 3.0 * probe.small_prob_se[j] > options.q)
                probe.prob_ok = false;
        }
        if (probe.third_moment_bound > 0.0) {
            probe.ratio_max = max_mom / probe.third_moment_bound;
        } else if (max_mom == 0.0) {
            probe.ratio_max = std::numeric_limits<double>::quiet_NaN();
            probe.indeterminate = true;
        } else {
            probe.ratio_max = std::numeric_limits<double>::infinity();
        }
        report.probes.push_back(std::move(probe));
    }
    return report;
}

PlReport pl_constant(const Objective& risk, const std::vector<Vec>& probes) {
    if (probes.empty()) throw ValidationError("need at least one probe");
    PlReport report;
    double best = std::numeric_limits<double>::infinity();
    Vec g(risk.dim());
    for (const Vec& theta : probes) {
        check_dim(theta.size(), static_cast<std::size_t>(risk.dim()), "probe theta");
        const double r = risk.value(theta);
        if (!(r > 0.0)) continue;
        risk.gradient(theta, g);
        const double ratio = dot(g, g) / r;
        if (!std::isfinite(ratio)) continue;
        ++report.n_used;
        if (ratio < best) {
            best = ratio;
            report.argmin_theta = theta;
        }
    }
    if (report.n_used > 0) {
        report.defined = true;
        report.mu_hat = 0.5 * best;
    }
    return report;
}

LyapunovReport lyapunov_product(const FieldEstimate& field, std::span<const double> grad) {
    check_dim(field.value.size(), grad.size(), "gradient");
    LyapunovReport r;
    double var = 0.0;
    for (std::size_t j = 0; j < grad.size(); ++j) {
        r.product += field.value[j] * grad[j];
        const double c = grad[j] * field.std_error[j];
        var += c * c;
    }
    r.std_error = std::sqrt(var);
    if (r.product + 3.0 * r.std_error < 0.0) {
        r.verdict = LyapunovReport::Verdict::kNegative;
    } else if (norm2(grad) == 0.0 &&
               norm2(field.value) <= 3.0 * norm2(field.std_error) + 1e-15) {
        r.verdict = LyapunovReport::Verdict::kZeroPair;
    } else {
        r.verdict = LyapunovReport::Verdict::kInconclusive;
    }
    return r;
}

}  // namespace adamflow
