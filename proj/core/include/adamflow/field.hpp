#ifndef ADAMFLOW_FIELD_HPP
#define ADAMFLOW_FIELD_HPP

#include <cstdint>
#include <ostream>

#include "adamflow/innovation.hpp"
#include "adamflow/vec.hpp"

namespace adamflow {

// Normalized momentum direction of a finite innovation history
// (newest entry first, row-major, len = history.size()/dim):
//   out_j = (1-alpha) sum_k alpha^k x_k^j
//           / ( sqrt((1-beta) sum_k beta^k (x_k^j)^2) + eps ).
// Componentwise; this is the discounted analogue of one optimizer update
// direction, and it is 1-Lipschitz w.r.t. the weighted history norm.
Vec history_transform(const DampingParams& p, std::span<const double> history, int dim);

struct FieldEstimate {
    Vec value;
    Vec std_error;       // componentwise standard error of the mean
    std::uint64_t n_samples = 0;
    int truncation = 0;  // history length per replicate
    double tail_bound = 0.0;  // analytic bound on the truncated-tail bias
};

// Monte Carlo estimate of the mean update direction at frozen theta:
// each replicate draws `truncation` i.i.d. innovations X(U, theta) and
// applies history_transform; the estimate averages replicates.
//
// Draws are keyed by (seed, replicate, lag), so the result is a fixed
// deterministic function of theta for a fixed seed, replicates can run on
// any number of threads without changing the output, and re-evaluation at a
// different theta sees the same underlying U draws (common random numbers).
// truncation <= 0 selects default_truncation(p).
FieldEstimate estimate_field(const InnovationModel& model, std::span<const double> theta,
                             const DampingParams& p, std::uint64_t n_samples, int truncation,
                             std::uint64_t seed, int n_threads = 1);

// Noise-free limit: f_j = -g_j / (|g_j| + eps) for g = grad R(theta).
Vec closed_form_field(std::span<const double> grad_r, const DampingParams& p);

struct FieldZeroOptions {
    double tol = 1e-3;               // accept when |f_hat| <= tol + SE
    std::uint64_t n_samples = 1000;  // per field evaluation
    int truncation = 0;              // 0 = default
    std::uint64_t seed = 0;
    int max_evals = 60;              // 1-d: bisection evaluations; n-d: iterations
};

struct FieldZero {
    Vec theta;
    FieldEstimate estimate;  // at the returned point
    int evals = 0;
};

// Scalar root of the estimated field on [lo, hi]. Requires a sign change of
// the estimate between the endpoints; bisects on the sign of the estimate.
// Throws ValidationError without a sign change, ConvergenceError when the
// budget is exhausted before |f_hat| <= tol + SE.
FieldZero find_field_zero_1d(const InnovationModel& model, const DampingParams& p, double lo,
                             double hi, const FieldZeroOptions& opts);

// Multi-dimensional root via the damped fixed-point iteration
// theta <- theta + (eps/2) f_hat(theta), returning the average of the last
// half of the iterates (Polyak). Acceptance test |f_hat| <= tol + |SE|.
FieldZero find_field_zero(const InnovationModel& model, const DampingParams& p,
                          std::span<const double> start, const FieldZeroOptions& opts);

// Columns: theta_0..theta_{d-1}, f_0..f_{d-1}, se_0..se_{d-1}.
void write_field_scan_csv(const std::vector<Vec>& points, const std::vector<FieldEstimate>& fields,
                          std::ostream& out);

}  // namespace adamflow

#endif
