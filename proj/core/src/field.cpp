#include "adamflow/field.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <string>

#include "adamflow/csv.hpp"
#include "adamflow/errors.hpp"
#include "adamflow/stats.hpp"

namespace adamflow {

Vec history_transform(const DampingParams& p, std::span<const double> history, int dim) {
    if (dim < 1) throw ValidationError("history transform: dimension must be positive");
    if (history.empty() || history.size() % static_cast<std::size_t>(dim) != 0)
        throw ValidationError("history transform: history size not a positive multiple of dim");
    const std::size_t len = history.size() / static_cast<std::size_t>(dim);
    Vec num(dim, 0.0), den(dim, 0.0);
    double wa = 1.0, wb = 1.0;
    for (std::size_t k = 0; k < len; ++k) {
        for (int j = 0; j < dim; ++j) {
            const double x = history[k * dim + j];
            num[j] += wa * x;
            den[j] += wb * x * x;
        }
        wa *= p.alpha;
        wb *= p.beta;
    }
    Vec out(dim);
    for (int j = 0; j < dim; ++j)
        out[j] = (1.0 - p.alpha) * num[j] / (std::sqrt((1.0 - p.beta) * den[j]) + p.eps);
    return out;
}

FieldEstimate estimate_field(const InnovationModel& model, std::span<const double> theta,
                             const DampingParams& p, std::uint64_t n_samples, int truncation,
                             std::uint64_t seed, int n_threads) {
    const int d = model.dim();
    check_dim(theta.size(), static_cast<std::size_t>(d), "field estimate theta");
    if (n_samples < 1) throw ValidationError("field estimate: need at least one replicate");
    const int K = truncation > 0 ? truncation : default_truncation(p);
    if (n_threads < 1) n_threads = 1;

    const RngStream stream(seed, "montecarlo/field");
    std::vector<double> values(n_samples * static_cast<std::size_t>(d));
    std::vector<double> max_norm_per_thread(static_cast<std::size_t>(n_threads), 0.0);

    auto worker = [&](int w, std::uint64_t lo, std::uint64_t hi) {
        Vec x(d), num(d), den(d);
        double local_max = 0.0;
        for (std::uint64_t r = lo; r < hi; ++r) {
            std::fill(num.begin(), num.end(), 0.0);
            std::fill(den.begin(), den.end(), 0.0);
            const RngStream rs = stream.child(r);
            double wa = 1.0, wb = 1.0;
            for (int k = 0; k < K; ++k) {
                auto rng = rs.at(static_cast<std::uint64_t>(k));
                model.sample(theta, rng, x);
                for (int j = 0; j < d; ++j) {
                    num[j] += wa * x[j];
                    den[j] += wb * x[j] * x[j];
                }
                wa *= p.alpha;
                wb *= p.beta;
                local_max = std::max(local_max, norm2(x));
            }
            for (int j = 0; j < d; ++j)
                values[r * d + j] = (1.0 - p.alpha) * num[j] /
                                    (std::sqrt((1.0 - p.beta) * den[j]) + p.eps);
        }
        max_norm_per_thread[static_cast<std::size_t>(w)] =
            std::max(max_norm_per_thread[static_cast<std::size_t>(w)], local_max);
    };

    if (n_threads == 1 || n_samples < 2 * static_cast<std::uint64_t>(n_threads)) {
        worker(0, 0, n_samples);
    } else {
        std::vector<std::future<void>> futs;
        const std::uint64_t chunk = (n_samples + n_threads - 1) / n_threads;
        for (int w = 0; w < n_threads; ++w) {
            const std::uint64_t lo = std::min<std::uint64_t>(w * chunk, n_samples);
            const std::uint64_t hi = std::min<std::uint64_t>(lo + chunk, n_samples);
            if (lo < hi)
                futs.push_back(std::async(std::launch::async, worker, w, lo, hi));
        }
        for (auto& f : futs) f.get();
    }

    FieldEstimate est;
    est.n_samples = n_samples;
    est.truncation = K;
    est.value.resize(d);
    est.std_error.resize(d);
    // Mean via deterministic pairwise sums over the replicate-ordered array;
    // SE via a sequential pass. Both independent of the thread split.
    std::vector<double> col(n_samples);
    for (int j = 0; j < d; ++j) {
        for (std::uint64_t r = 0; r < n_samples; ++r) col[r] = values[r * d + j];
        est.value[j] = pairwise_sum(col) / static_cast<double>(n_samples);
        MeanVar mv;
        for (std::uint64_t r = 0; r < n_samples; ++r) mv.add(col[r]);
        est.std_error[j] = mv.std_error();
    }
    const double max_norm = *std::max_element(max_norm_per_thread.begin(),
                                              max_norm_per_thread.end());
    // The transform is 1-Lipschitz in the weighted history norm, so dropping
    // all lags >= K moves it by at most (tail mass) * sup |X|.
    est.tail_bound = WeightVector(p, K).tail_mass(K) * max_norm;
    return est;
}

Vec closed_form_field(std::span<const double> grad_r, const DampingParams& p) {
    if (grad_r.empty()) throw ValidationError("closed-form field: empty gradient");
    Vec out(grad_r.size());
    for (std::size_t j = 0; j < grad_r.size(); ++j)
        out[j] = -grad_r[j] / (std::fabs(grad_r[j]) + p.eps);
    return out;
}

namespace {

FieldEstimate eval_at(const InnovationModel& model, const DampingParams& p, const Vec& theta,
                      const FieldZeroOptions& opts, int eval_idx) {
    const std::uint64_t s = RngStream(opts.seed, "rootfind").child(
        static_cast<std::uint64_t>(eval_idx)).key();
    return estimate_field(model, theta, p, opts.n_samples, opts.truncation, s);
}

}  // namespace

FieldZero find_field_zero_1d(const InnovationModel& model, const DampingParams& p, double lo,
                             double hi, const FieldZeroOptions& opts) {
    if (model.dim() != 1) throw ValidationError("field zero 1d: model must be scalar");
    if (!(lo < hi)) throw ValidationError("field zero 1d: bracket must satisfy lo < hi");
    int evals = 0;
    auto fl = eval_at(model, p, {lo}, opts, evals++);
    auto fh = eval_at(model, p, {hi}, opts, evals++);
    if ((fl.value[0] > 0.0) == (fh.value[0] > 0.0))
        throw ValidationError("field zero 1d: no sign change on bracket [" + std::to_string(lo) +
                              ", " + std::to_string(hi) + "]");
    const bool rising = fh.value[0] > 0.0;
    double mid = 0.5 * (lo + hi);
    while (evals < opts.max_evals) {
        mid = 0.5 * (lo + hi);
        auto fm = eval_at(model, p, {mid}, opts, evals++);
        if (std::fabs(fm.value[0]) <= opts.tol + fm.std_error[0]) {
            FieldZero z;
            z.theta = {mid};
            z.estimate = std::move(fm);
            z.evals = evals;
            return z;
        }
        if ((fm.value[0] > 0.0) == rising)
            hi = mid;
        else
            lo = mid;
    }
    throw ConvergenceError("field zero 1d: budget exhausted, last iterate theta=" +
                           std::to_string(mid));
}

FieldZero find_field_zero(const InnovationModel& model, const DampingParams& p,
                          std::span<const double> start, const FieldZeroOptions& opts) {
    const int d = model.dim();
    check_dim(start.size(), static_cast<std::size_t>(d), "field zero start");
    const double eta = 0.5 * p.eps;
    Vec theta(start.begin(), start.end());
    Vec avg(d, 0.0);
    const int iters = std::max(2, opts.max_evals);
    const int tail_start = iters / 2;
    int averaged = 0;
    for (int it = 0; it < iters; ++it) {
        auto f = eval_at(model, p, theta, opts, it);
        for (int j = 0; j < d; ++j) theta[j] += eta * f.value[j];
        if (!all_finite(theta))
            throw NonFiniteError("field zero: non-finite iterate at iteration " +
                                 std::to_string(it));
        if (it >= tail_start) {
            ++averaged;
            for (int j = 0; j < d; ++j) avg[j] += (theta[j] - avg[j]) / averaged;
        }
    }
    auto f = eval_at(model, p, avg, opts, iters);
    if (norm2(f.value) <= opts.tol + norm2(f.std_error)) {
        FieldZero z;
        z.theta = std::move(avg);
        z.estimate = std::move(f);
        z.evals = iters + 1;
        return z;
    }
    throw ConvergenceError("field zero: budget exhausted, |f_hat|=" +
                           std::to_string(norm2(f.value)) + " at averaged iterate");
}

void write_field_scan_csv(const std::vector<Vec>& points, const std::vector<FieldEstimate>& fields,
                          std::ostream& out) {
    if (points.size() != fields.size())
        throw ValidationError("field scan csv: points/fields length mismatch");
    if (points.empty()) throw ValidationError("field scan csv: empty scan");
    const std::size_t d = points.front().size();
    CsvWriter w(out);
    std::vector<std::string> names;
    for (std::size_t j = 0; j < d; ++j) names.push_back("theta_" + std::to_string(j));
    for (std::size_t j = 0; j < d; ++j) names.push_back("f_" + std::to_string(j));
    for (std::size_t j = 0; j < d; ++j) names.push_back("se_" + std::to_string(j));
    w.header(names);
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) w.col(points[i][j]);
        for (std::size_t j = 0; j < d; ++j) w.col(fields[i].value[j]);
        for (std::size_t j = 0; j < d; ++j) w.col(fields[i].std_error[j]);
        w.end_row();
    }
}

}  // namespace adamflow
