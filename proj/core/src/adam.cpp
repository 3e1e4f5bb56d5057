#include "adamflow/adam.hpp"

#include <algorithm>
#include <cmath>

#include "adamflow/csv.hpp"
#include "adamflow/errors.hpp"

namespace adamflow {

AdamState make_adam_start(Vec theta0) {
    if (theta0.empty()) throw ValidationError("adam: empty start point");
    if (!all_finite(theta0)) throw ValidationError("adam: non-finite start point");
    AdamState s;
    s.n = 0;
    s.m.assign(theta0.size(), 0.0);
    s.v.assign(theta0.size(), 0.0);
    s.theta = std::move(theta0);
    return s;
}

void adam_step_inplace(AdamState& s, std::span<const double> x, double gamma,
                       const DampingParams& p, AdamVariant variant) {
    const std::size_t d = s.theta.size();
    check_dim(x.size(), d, "adam innovation");
    const std::uint64_t n = s.n + 1;
    const double bias_v = 1.0 - std::pow(p.beta, static_cast<double>(n));
    const double bias_m = (variant == AdamVariant::kBiasCorrected)
                              ? 1.0 - std::pow(p.alpha, static_cast<double>(n))
                              : 1.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double xj = x[j];
        s.m[j] = p.alpha * s.m[j] + (1.0 - p.alpha) * xj;
        s.v[j] = p.beta * s.v[j] + (1.0 - p.beta) * xj * xj;
        const double sigma = 1.0 / (std::sqrt(s.v[j] / bias_v) + p.eps);
        s.theta[j] += gamma * sigma * s.m[j] / bias_m;
        if (!std::isfinite(s.theta[j]))
            throw NonFiniteError("adam: non-finite theta at step n=" + std::to_string(n) +
                                 ", component " + std::to_string(j));
    }
    s.n = n;
}

AdamState adam_step(const AdamState& s, std::span<const double> x, double gamma,
                    const DampingParams& p, AdamVariant variant) {
    AdamState next = s;
    adam_step_inplace(next, x, gamma, p, variant);
    return next;
}

std::span<const double> AdamTrajectory::theta_row(std::size_t i) const {
    return std::span<const double>(thetas).subspan(i * dim, dim);
}

std::size_t AdamTrajectory::row_of(std::uint64_t n) const {
    const auto it = std::lower_bound(steps.begin(), steps.end(), n);
    if (it == steps.end() || *it != n)
        throw OutOfRangeError("trajectory: step " + std::to_string(n) + " was not recorded");
    return static_cast<std::size_t>(it - steps.begin());
}

AdamTrajectory run_adam(const InnovationModel& model, const StepSchedule& schedule,
                        const DampingParams& p, std::span<const double> theta_start,
                        const AdamRunOptions& opts) {
    const int d = model.dim();
    check_dim(theta_start.size(), static_cast<std::size_t>(d), "adam start point");
    if (opts.n_steps > schedule.horizon())
        throw ValidationError("adam: n_steps exceeds schedule horizon");
    if (opts.record_stride == 0) throw ValidationError("adam: record stride must be positive");

    AdamTrajectory traj;
    traj.dim = d;
    traj.variant = opts.variant;
    traj.alpha = p.alpha;
    traj.beta = p.beta;
    traj.eps = p.eps;
    traj.seed = opts.seed;
    traj.stride = opts.record_stride;

    AdamState state = make_adam_start(Vec(theta_start.begin(), theta_start.end()));
    const RngStream stream(opts.seed, opts.stream_name);

    auto record = [&](const AdamState& s, double t) {
        traj.steps.push_back(s.n);
        traj.times.push_back(t);
        traj.thetas.insert(traj.thetas.end(), s.theta.begin(), s.theta.end());
        if (opts.record_moments) {
            traj.ms.insert(traj.ms.end(), s.m.begin(), s.m.end());
            traj.vs.insert(traj.vs.end(), s.v.begin(), s.v.end());
        }
    };

    auto cur = schedule.cursor_at(0);
    record(state, cur.t());

    Vec x(d), prev(state.theta);
    for (std::uint64_t n = 1; n <= opts.n_steps; ++n) {
        cur.advance();
        auto rng = stream.at(n);
        model.sample(state.theta, rng, x);
        prev = state.theta;
        adam_step_inplace(state, x, cur.gamma(), p, opts.variant);

        const double ratio = dist2(state.theta, prev) / cur.gamma();
        const double adj =
            (opts.variant == AdamVariant::kBiasCorrected)
                ? ratio * (1.0 - std::pow(p.alpha, static_cast<double>(n)))
                : ratio;
        traj.max_speed_ratio = std::max(traj.max_speed_ratio, ratio);
        traj.max_speed_ratio_adjusted = std::max(traj.max_speed_ratio_adjusted, adj);

        if (n % opts.record_stride == 0 || n == opts.n_steps) record(state, cur.t());
    }
    traj.final_state = std::move(state);
    return traj;
}

VelocityReport velocity_check(const AdamTrajectory& traj) {
    const DampingParams p(traj.alpha, traj.beta, traj.eps);
    VelocityReport rep;
    rep.max_ratio = traj.max_speed_ratio_adjusted;
    rep.bound = p.speed_bound(traj.dim);
    // The bound is exact in real arithmetic; allow rounding headroom only.
    rep.ok = rep.max_ratio <= rep.bound * (1.0 + 1e-9);
    return rep;
}

void write_trajectory_csv(const AdamTrajectory& traj, std::ostream& out, bool include_moments) {
    if (include_moments && traj.ms.empty())
        throw ValidationError("trajectory csv: moments were not recorded");
    CsvWriter w(out);
    std::vector<std::string> names = {"n", "t"};
    for (int j = 0; j < traj.dim; ++j) names.push_back("theta_" + std::to_string(j));
    if (include_moments) {
        for (int j = 0; j < traj.dim; ++j) names.push_back("m_" + std::to_string(j));
        for (int j = 0; j < traj.dim; ++j) names.push_back("v_" + std::to_string(j));
    }
    w.header(names);
    for (std::size_t i = 0; i < traj.steps.size(); ++i) {
        w.col(traj.steps[i]).col(traj.times[i]);
        for (int j = 0; j < traj.dim; ++j) w.col(traj.thetas[i * traj.dim + j]);
        if (include_moments) {
            for (int j = 0; j < traj.dim; ++j) w.col(traj.ms[i * traj.dim + j]);
            for (int j = 0; j < traj.dim; ++j) w.col(traj.vs[i * traj.dim + j]);
        }
        w.end_row();
    }
}

}  // namespace adamflow
