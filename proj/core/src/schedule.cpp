#include "adamflow/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "adamflow/errors.hpp"

namespace adamflow {
namespace {

// Above this horizon the time grid is checkpointed instead of materialized.
constexpr std::uint64_t kDenseTimeCap = std::uint64_t(1) << 22;
constexpr std::uint64_t kCheckpointStride = std::uint64_t(1) << 20;

}  // namespace

StepSchedule StepSchedule::power(double c, double exponent, std::uint64_t horizon) {
    if (!(c > 0.0) || !std::isfinite(c))
        throw ValidationError("schedule: power scale must be positive and finite, got " +
                              std::to_string(c));
    if (!(exponent > 0.0) || !(exponent <= 1.0))
        throw ValidationError("schedule: power exponent must lie in (0, 1], got " +
                              std::to_string(exponent));
    if (horizon == 0) throw ValidationError("schedule: horizon must be at least 1");
    StepSchedule s;
    s.kind_ = ScheduleKind::kPower;
    s.c_ = c;
    s.exponent_ = exponent;
    s.horizon_ = horizon;
    s.build_times();
    return s;
}

StepSchedule StepSchedule::explicit_list(std::vector<double> values) {
    if (values.empty()) throw ValidationError("schedule: explicit list must be non-empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0) || !std::isfinite(values[i]))
            throw ValidationError("schedule: value at n=" + std::to_string(i + 1) +
                                  " must be positive and finite, got " +
                                  std::to_string(values[i]));
        if (i > 0 && values[i] > values[i - 1])
            throw ValidationError("schedule: values must be non-increasing, violated at n=" +
                                  std::to_string(i + 1));
    }
    StepSchedule s;
    s.kind_ = ScheduleKind::kExplicit;
    s.horizon_ = values.size();
    s.values_ = std::move(values);
    s.build_times();
    return s;
}

void StepSchedule::build_times() {
    if (horizon_ <= kDenseTimeCap) {
        times_.resize(horizon_ + 1);
        times_[0] = 0.0;
        double t = 0.0;
        for (std::uint64_t n = 1; n <= horizon_; ++n) {
            t += gamma(n);
            times_[n] = t;
        }
        total_ = t;
    } else {
        checkpoints_.reserve(horizon_ / kCheckpointStride + 2);
        checkpoints_.push_back(0.0);
        double t = 0.0;
        for (std::uint64_t n = 1; n <= horizon_; ++n) {
            t += gamma(n);
            if (n % kCheckpointStride == 0) checkpoints_.push_back(t);
        }
        total_ = t;
    }
}

double StepSchedule::gamma(std::uint64_t n) const {
    if (n < 1 || n > horizon_)
        throw OutOfRangeError("schedule: gamma index " + std::to_string(n) +
                              " outside [1, " + std::to_string(horizon_) + "]");
    if (kind_ == ScheduleKind::kExplicit) return values_[n - 1];
    // Common exponents avoid pow(); gamma() sits on the per-step hot path.
    const double x = static_cast<double>(n);
    if (exponent_ == 1.0) return c_ / x;
    if (exponent_ == 0.5) return c_ / std::sqrt(x);
    return c_ * std::pow(x, -exponent_);
}

double StepSchedule::time(std::uint64_t n) const {
    if (n > horizon_)
        throw OutOfRangeError("schedule: time index " + std::to_string(n) + " beyond horizon " +
                              std::to_string(horizon_));
    if (!times_.empty()) return times_[n];
    if (n == horizon_) return total_;
    const std::uint64_t base = n / kCheckpointStride;
    double t = checkpoints_[base];
    for (std::uint64_t k = base * kCheckpointStride + 1; k <= n; ++k) t += gamma(k);
    return t;
}

double StepSchedule::staircase(double t) const {
    if (!(t > 0.0) || !(t <= total_))
        throw OutOfRangeError("schedule: staircase time " + std::to_string(t) +
                              " outside (0, " + std::to_string(total_) + "]");
    if (!times_.empty()) {
        // Smallest n with t_n >= t; then t lies in (t_{n-1}, t_n].
        const auto it = std::lower_bound(times_.begin(), times_.end(), t);
        const auto n = static_cast<std::uint64_t>(it - times_.begin());
        return gamma(std::max<std::uint64_t>(n, 1));
    }
    // Sparse: binary search the checkpoint grid, then walk one segment.
    std::size_t lo = 0, hi = checkpoints_.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi + 1) / 2;
        if (checkpoints_[mid] < t)
            lo = mid;
        else
            hi = mid - 1;
    }
    double acc = checkpoints_[lo];
    for (std::uint64_t n = static_cast<std::uint64_t>(lo) * kCheckpointStride + 1; n <= horizon_;
         ++n) {
        acc += gamma(n);
        if (acc >= t) return gamma(n);
    }
    return gamma(horizon_);  // t == total_ up to the final rounding
}

StepSchedule::Cursor StepSchedule::cursor_at(std::uint64_t n) const {
    if (n > horizon_)
        throw OutOfRangeError("schedule: cursor index " + std::to_string(n) + " beyond horizon " +
                              std::to_string(horizon_));
    Cursor c;
    c.s_ = this;
    c.n_ = n;
    c.t_ = time(n);
    c.gamma_ = (n >= 1) ? gamma(n) : 0.0;
    return c;
}

bool StepSchedule::Cursor::advance() {
    if (n_ >= s_->horizon_) return false;
    ++n_;
    gamma_ = s_->gamma(n_);
    t_ += gamma_;
    return true;
}

StepRegularityReport check_step_regularity(const StepSchedule& s, double eps1, std::uint64_t window) {
    if (!(eps1 > 0.0) || !std::isfinite(eps1))
        throw ValidationError("regularity: eps1 must be positive and finite");
    if (window < 2 || window > s.horizon())
        throw InsufficientDataError("regularity: window must lie in [2, horizon]");

    const std::uint64_t lo = std::max<std::uint64_t>(1, window / 2);
    const std::uint64_t hi = window;
    StepRegularityReport rep;
    rep.min_ratio = std::numeric_limits<double>::infinity();
    rep.quarter_mins.assign(4, std::numeric_limits<double>::infinity());
    const std::uint64_t span = hi - lo + 1;
    for (std::uint64_t n = lo; n <= hi; ++n) {
        const double g = s.gamma(n);
        const double jump_real = std::ceil(eps1 / g);
        std::uint64_t look;
        if (jump_real >= static_cast<double>(s.horizon())) {
            look = s.horizon();
            rep.truncated = true;
        } else {
            look = n + static_cast<std::uint64_t>(jump_real);
            if (look > s.horizon()) {
                look = s.horizon();
                rep.truncated = true;
            }
        }
        const double ratio = s.gamma(look) / g;
        rep.min_ratio = std::min(rep.min_ratio, ratio);
        const std::size_t q = std::min<std::size_t>(3, ((n - lo) * 4) / span);
        rep.quarter_mins[q] = std::min(rep.quarter_mins[q], ratio);
    }
    // Heuristic for "the liminf stays away from zero": the most recent
    // quarter must not have sunk below half of the earliest quarter.
    bool quarters_ok = true;
    if (std::isfinite(rep.quarter_mins.front()) && std::isfinite(rep.quarter_mins.back()))
        quarters_ok = rep.quarter_mins.back() >= 0.5 * rep.quarter_mins.front();
    rep.satisfied_estimate = rep.min_ratio > 0.0 && quarters_ok;
    return rep;
}

PartitionPlan build_rho_partition(const StepSchedule& s, double rho, std::uint64_t start_index) {
    if (start_index >= s.horizon())
        throw ValidationError("partition: start index must be below the horizon");
    if (!(rho > 0.0) || !std::isfinite(rho)) throw ValidationError("partition: rho must be positive");
    const double floor_rho = std::pow(s.gamma(start_index + 1), 2.0 / 3.0);
    if (rho < floor_rho)
        throw ValidationError("partition: rho=" + std::to_string(rho) +
                              " below gamma_{start+1}^{2/3}=" + std::to_string(floor_rho) +
                              "; blocks could be empty");

    PartitionPlan plan;
    plan.rho = rho;
    plan.start_index = start_index;
    plan.indices.push_back(start_index);

    auto cur = s.cursor_at(start_index);
    while (cur.n() < s.horizon()) {
        const double budget = rho * std::cbrt(s.gamma(cur.n() + 1));
        const double t_block = cur.t();
        std::uint64_t m = cur.n();
        auto probe = cur;
        while (probe.n() < s.horizon()) {
            probe.advance();
            if (probe.t() - t_block <= budget) {
                m = probe.n();
            } else {
                probe = s.cursor_at(m);  // rewind to the last fitting index
                break;
            }
        }
        if (m == cur.n())
            throw ValidationError("partition: no index fits the budget at n=" +
                                  std::to_string(cur.n()) + "; increase rho");
        plan.indices.push_back(m);
        cur = probe;
    }
    return plan;
}

}  // namespace adamflow
