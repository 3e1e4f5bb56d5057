#include "adamflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "adamflow/csv.hpp"
#include "adamflow/errors.hpp"
#include "adamflow/stats.hpp"

namespace adamflow {

FieldFn FieldFn::from_function(int dim, Fn fn) {
    if (dim < 1) throw ValidationError("field fn: dimension must be positive");
    if (!fn) throw ValidationError("field fn: empty function");
    return FieldFn(dim, std::move(fn));
}

FieldFn FieldFn::from_objective(std::shared_ptr<const Objective> obj, const DampingParams& p) {
    if (!obj) throw ValidationError("field fn: null objective");
    const int d = obj->dim();
    return FieldFn(d, [obj, p, d](std::span<const double> theta, std::span<double> out) {
        Vec g(d);
        obj->gradient(theta, g);
        const Vec f = closed_form_field(g, p);
        std::copy(f.begin(), f.end(), out.begin());
    });
}

FieldFn FieldFn::from_monte_carlo(std::shared_ptr<const InnovationModel> model,
                                  const DampingParams& p, std::uint64_t n_samples, int truncation,
                                  std::uint64_t seed, int n_threads) {
    if (!model) throw ValidationError("field fn: null model");
    const int d = model->dim();
    return FieldFn(d, [model, p, n_samples, truncation, seed, n_threads](
                          std::span<const double> theta, std::span<double> out) {
        const FieldEstimate est =
            estimate_field(*model, theta, p, n_samples, truncation, seed, n_threads);
        std::copy(est.value.begin(), est.value.end(), out.begin());
    });
}

void FlowPath::at(double t, std::span<double> out) const {
    if (times.size() < 1) throw ValidationError("flow path: empty");
    const double end = t_end();
    // Tolerate rounding just past the ends from repeated time additions.
    if (t < -1e-12 * std::max(1.0, end) || t > end * (1.0 + 1e-12) + 1e-300)
        throw OutOfRangeError("flow path: time " + std::to_string(t) + " outside [0, " +
                              std::to_string(end) + "]");
    t = std::clamp(t, 0.0, end);
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    std::size_t i = static_cast<std::size_t>(it - times.begin());
    if (i == 0) {
        std::copy(points.begin(), points.begin() + dim, out.begin());
        return;
    }
    if (i >= times.size()) i = times.size() - 1;
    const double t0 = times[i - 1], t1 = times[i];
    const double w = (t1 > t0) ? (t - t0) / (t1 - t0) : 0.0;
    for (int j = 0; j < dim; ++j) {
        const double a = points[(i - 1) * dim + j];
        const double b = points[i * dim + j];
        out[j] = a + w * (b - a);
    }
}

Vec FlowPath::at(double t) const {
    Vec out(dim);
    at(t, out);
    return out;
}

namespace {

// Classical fourth-order step with preallocated stage buffers.
struct Rk4 {
    explicit Rk4(int dim) : k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim) {}
    Vec k1, k2, k3, k4, tmp;

    void step(const FieldFn& f, Vec& y, double h) {
        const int d = static_cast<int>(y.size());
        f.eval(y, k1);
        for (int j = 0; j < d; ++j) tmp[j] = y[j] + 0.5 * h * k1[j];
        f.eval(tmp, k2);
        for (int j = 0; j < d; ++j) tmp[j] = y[j] + 0.5 * h * k2[j];
        f.eval(tmp, k3);
        for (int j = 0; j < d; ++j) tmp[j] = y[j] + h * k3[j];
        f.eval(tmp, k4);
        for (int j = 0; j < d; ++j)
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
};

}  // namespace

FlowPath integrate_flow(const FieldFn& field, std::span<const double> theta0, double t_end,
                        double h) {
    const int d = field.dim();
    check_dim(theta0.size(), static_cast<std::size_t>(d), "flow start point");
    if (!(t_end >= 0.0) || !std::isfinite(t_end))
        throw ValidationError("flow: t_end must be non-negative and finite");
    if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("flow: step h must be positive");

    FlowPath path;
    path.dim = d;
    path.h = h;
    Vec y(theta0.begin(), theta0.end());
    path.times.push_back(0.0);
    path.points.insert(path.points.end(), y.begin(), y.end());
    if (t_end == 0.0) return path;

    const auto n_full = static_cast<std::uint64_t>(std::floor(t_end / h + 1e-12));
    Rk4 rk(d);
    double t = 0.0;
    for (std::uint64_t i = 0; i < n_full; ++i) {
        rk.step(field, y, h);
        t = static_cast<double>(i + 1) * h;
        if (!all_finite(y))
            throw NonFiniteError("flow: non-finite state at t=" + std::to_string(t));
        path.times.push_back(t);
        path.points.insert(path.points.end(), y.begin(), y.end());
    }
    if (t < t_end) {
        const double rem = t_end - t;
        if (rem > 1e-15 * t_end) {
            rk.step(field, y, rem);
            if (!all_finite(y))
                throw NonFiniteError("flow: non-finite state at t=" + std::to_string(t_end));
            path.times.push_back(t_end);
            path.points.insert(path.points.end(), y.begin(), y.end());
        } else {
            path.times.back() = t_end;
        }
    }
    return path;
}

namespace {

double default_h(double gamma_anchor) { return std::min(1e-3, gamma_anchor / 10.0); }

}  // namespace

DeviationReport flow_deviation(const AdamTrajectory& traj, const FieldFn& field, std::uint64_t N,
                               double T, double R, double h) {
    if (traj.stride != 1)
        throw ValidationError("deviation: trajectory must be recorded with stride 1");
    if (!(T > 0.0)) throw ValidationError("deviation: window T must be positive");
    if (field.dim() != traj.dim) throw ValidationError("deviation: field/trajectory dim mismatch");
    const std::size_t row_n = traj.row_of(N);

    DeviationReport rep;
    rep.anchor = N;
    rep.t_anchor = traj.times[row_n];
    rep.window = T;
    rep.radius_gate = R;

    const auto anchor = traj.theta_row(row_n);
    if (norm2(anchor) > R) {
        rep.gated_out = true;
        rep.sup_dev = std::numeric_limits<double>::quiet_NaN();
        return rep;
    }
    if (traj.times.back() < rep.t_anchor + T * (1.0 - 1e-12))
        throw ValidationError("deviation: window [t_N, t_N+T] exceeds the recorded trajectory");

    double h_eff = h;
    if (h_eff <= 0.0) {
        const double gamma_n = (row_n > 0) ? traj.times[row_n] - traj.times[row_n - 1]
                                           : traj.times[1] - traj.times[0];
        h_eff = default_h(gamma_n);
    }
    rep.h = h_eff;

    const FlowPath path = integrate_flow(field, anchor, T, h_eff);
    Vec psi(traj.dim);
    double sup = 0.0;
    for (std::size_t i = row_n; i < traj.steps.size(); ++i) {
        const double dt = traj.times[i] - rep.t_anchor;
        if (dt > T * (1.0 + 1e-12)) break;
        path.at(std::min(dt, T), psi);
        sup = std::max(sup, dist2(traj.theta_row(i), psi));
    }
    rep.sup_dev = sup;
    return rep;
}

DeviationReport flow_deviation_streaming(const InnovationModel& model,
                                         const StepSchedule& schedule, const DampingParams& p,
                                         std::span<const double> theta_start, AdamVariant variant,
                                         std::uint64_t seed, const std::string& stream_name,
                                         const FieldFn& field, std::uint64_t N, double T, double R,
                                         double h) {
    const int d = model.dim();
    check_dim(theta_start.size(), static_cast<std::size_t>(d), "deviation start point");
    if (!(T > 0.0)) throw ValidationError("deviation: window T must be positive");
    if (N >= schedule.horizon())
        throw ValidationError("deviation: anchor must lie below the schedule horizon");

    AdamState state = make_adam_start(Vec(theta_start.begin(), theta_start.end()));
    const RngStream stream(seed, stream_name);
    auto cur = schedule.cursor_at(0);
    Vec x(d);

    auto advance = [&] {
        cur.advance();
        auto rng = stream.at(cur.n());
        model.sample(state.theta, rng, x);
        adam_step_inplace(state, x, cur.gamma(), p, variant);
    };

    while (state.n < N) advance();

    DeviationReport rep;
    rep.anchor = N;
    rep.t_anchor = cur.t();
    rep.window = T;
    rep.radius_gate = R;
    if (norm2(state.theta) > R) {
        rep.gated_out = true;
        rep.sup_dev = std::numeric_limits<double>::quiet_NaN();
        return rep;
    }

    double h_eff = h;
    if (h_eff <= 0.0) h_eff = default_h(schedule.gamma(std::max<std::uint64_t>(N, 1)));
    rep.h = h_eff;
    const FlowPath path = integrate_flow(field, state.theta, T, h_eff);

    Vec psi(d);
    double sup = 0.0;
    while (cur.n() < schedule.horizon()) {
        advance();
        const double dt = cur.t() - rep.t_anchor;
        if (dt > T * (1.0 + 1e-12)) {
            rep.sup_dev = sup;
            return rep;
        }
        path.at(std::min(dt, T), psi);
        sup = std::max(sup, dist2(state.theta, psi));
    }
    throw ValidationError("deviation: window [t_N, t_N+T] exceeds the schedule horizon");
}

std::vector<DeviationReport> deviation_profile(const AdamTrajectory& traj, const FieldFn& field,
                                               const std::vector<std::uint64_t>& anchors, double T,
                                               double R, double h) {
    if (anchors.empty()) throw ValidationError("deviation profile: no anchors");
    if (!std::is_sorted(anchors.begin(), anchors.end()))
        throw ValidationError("deviation profile: anchors must be ascending");
    std::vector<DeviationReport> reports;
    reports.reserve(anchors.size());
    for (const auto N : anchors) reports.push_back(flow_deviation(traj, field, N, T, R, h));
    return reports;
}

double deviation_trend(const std::vector<DeviationReport>& reports) {
    std::vector<double> ns, devs;
    for (const auto& r : reports) {
        if (r.gated_out) continue;
        ns.push_back(static_cast<double>(r.anchor));
        devs.push_back(r.sup_dev);
    }
    if (ns.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    return spearman(ns, devs);
}

void write_deviation_csv(const std::vector<DeviationReport>& reports, std::ostream& out) {
    CsvWriter w(out);
    w.header({"N", "t_N", "T", "sup_dev", "gated_out"});
    for (const auto& r : reports) {
        w.col(r.anchor).col(r.t_anchor).col(r.window).col(r.sup_dev).col(r.gated_out);
        w.end_row();
    }
}

}  // namespace adamflow
