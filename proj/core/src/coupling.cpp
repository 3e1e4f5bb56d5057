#include "adamflow/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "adamflow/adam.hpp"
#include "adamflow/csv.hpp"
#include "adamflow/errors.hpp"
#include "adamflow/field.hpp"
#include "adamflow/stats.hpp"

namespace adamflow {

namespace {

double block_norm_diff(std::span<const double> a_hi, std::span<const double> a_lo,
                       std::span<const double> b_hi, std::span<const double> b_lo) {
    double s = 0.0;
    for (std::size_t j = 0; j < a_hi.size(); ++j) {
        const double d = (a_hi[j] - a_lo[j]) - (b_hi[j] - b_lo[j]);
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace

std::size_t IntermediateRun::row_of(std::uint64_t n) const {
    if (n < start_n || n - start_n >= rows())
        throw OutOfRangeError("step " + std::to_string(n) + " outside the recorded span");
    return static_cast<std::size_t>(n - start_n);
}

std::span<const double> IntermediateRun::row(const Vec& path, std::size_t i) const {
    return {path.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
}

IntermediateRun run_intermediates(const InnovationModel& model, const StepSchedule& schedule,
                                  const DampingParams& p, const PartitionPlan& partition,
                                  std::span<const double> theta0, std::uint64_t seed,
                                  int truncation) {
    const int d = model.dim();
    check_dim(theta0.size(), static_cast<std::size_t>(d), "theta0");
    if (partition.indices.size() < 2) throw ValidationError("partition has no blocks");
    if (partition.indices.back() > schedule.horizon())
        throw ValidationError("partition extends past the schedule horizon");
    const int K = truncation > 0 ? truncation : default_truncation(p);

    const RngStream main_stream(seed, "innovation/main");
    const RngStream shadow_stream(seed, "innovation/shadow");

    const std::uint64_t start = partition.indices.front();
    const std::uint64_t end = partition.indices.back();
    const std::size_t len = static_cast<std::size_t>(end - start) + 1;

    IntermediateRun run;
    run.dim = d;
    run.alpha = p.alpha;
    run.beta = p.beta;
    run.eps = p.eps;
    run.partition = partition;
    run.start_n = start;
    run.truncation = K;
    run.times.reserve(len);
    run.theta.reserve(len * d);
    run.path_g.reserve(len * d);
    run.path_f.reserve(len * d);
    run.path_s.reserve(len * d);

    // Warm-up: plain updates from step 1 to the partition start.
    AdamState st = make_adam_start(Vec(theta0.begin(), theta0.end()));
    auto cur = schedule.cursor_at(0);
    Vec x(d), xf(d);
    while (st.n < start) {
        cur.advance();
        CounterRng rng = main_stream.at(cur.n());
        model.sample(st.theta, rng, x);
        adam_step_inplace(st, x, cur.gamma(), p, AdamVariant::kPlain);
    }

    // All four paths share the anchor value theta_{start}; increments are
    // what the decomposition consumes.
    Vec pg = st.theta, pf = st.theta, ps = st.theta;
    auto record = [&](double t) {
        run.times.push_back(t);
        run.theta.insert(run.theta.end(), st.theta.begin(), st.theta.end());
        run.path_g.insert(run.path_g.end(), pg.begin(), pg.end());
        run.path_f.insert(run.path_f.end(), pf.begin(), pf.end());
        run.path_s.insert(run.path_s.end(), ps.begin(), ps.end());
    };
    record(cur.t());

    Vec mf(d), vf(d), ms(d), vs(d), thf(d);
    for (std::size_t b = 0; b < partition.block_count(); ++b) {
        const std::uint64_t n_lo = partition.block_lo(b);
        const std::uint64_t n_hi = partition.block_hi(b);
        thf.assign(st.theta.begin(), st.theta.end());

        // Rebuild the frozen-theta moment averages from the last L absolute
        // indices; both start from zero, mirroring m_0 = v_0 = 0. The frozen
        // path re-reads the main stream, the shadow path reads the shadow
        // stream at the same indices.
        std::fill(mf.begin(), mf.end(), 0.0);
        std::fill(vf.begin(), vf.end(), 0.0);
        std::fill(ms.begin(), ms.end(), 0.0);
        std::fill(vs.begin(), vs.end(), 0.0);
        const std::uint64_t L = std::min<std::uint64_t>(K, n_lo);
        for (std::uint64_t idx = n_lo - L + 1; L > 0 && idx <= n_lo; ++idx) {
            CounterRng rm = main_stream.at(idx);
            model.sample(thf, rm, x);
            CounterRng rs = shadow_stream.at(idx);
            model.sample(thf, rs, xf);
            for (int j = 0; j < d; ++j) {
                mf[j] = p.alpha * mf[j] + (1.0 - p.alpha) * x[j];
                vf[j] = p.beta * vf[j] + (1.0 - p.beta) * x[j] * x[j];
                ms[j] = p.alpha * ms[j] + (1.0 - p.alpha) * xf[j];
                vs[j] = p.beta * vs[j] + (1.0 - p.beta) * xf[j] * xf[j];
            }
        }

        // In-block: one shared draw index per step, evaluated both at the
        // moving theta (optimizer) and at the frozen theta (both frozen
        // paths, which only differ through their pre-block history).
        for (std::uint64_t n = n_lo + 1; n <= n_hi; ++n) {
            cur.advance();
            const double g = cur.gamma();
            {
                CounterRng rng = main_stream.at(n);
                model.sample(st.theta, rng, x);
            }
            {
                CounterRng rng = main_stream.at(n);
                model.sample(thf, rng, xf);
            }
            adam_step_inplace(st, x, g, p, AdamVariant::kPlain);
            for (int j = 0; j < d; ++j) {
                pg[j] += g * st.m[j] / (std::sqrt(st.v[j]) + p.eps);
                mf[j] = p.alpha * mf[j] + (1.0 - p.alpha) * xf[j];
                vf[j] = p.beta * vf[j] + (1.0 - p.beta) * xf[j] * xf[j];
                pf[j] += g * mf[j] / (std::sqrt(vf[j]) + p.eps);
                ms[j] = p.alpha * ms[j] + (1.0 - p.alpha) * xf[j];
                vs[j] = p.beta * vs[j] + (1.0 - p.beta) * xf[j] * xf[j];
                ps[j] += g * ms[j] / (std::sqrt(vs[j]) + p.eps);
            }
            if (!all_finite(pf) || !all_finite(ps))
                throw NonFiniteError("frozen path diverged at step " + std::to_string(n));
            record(cur.t());
        }
    }
    return run;
}

BlockErrors error_decomposition(const IntermediateRun& run, std::size_t block,
                                const FieldFn* field, double flow_h) {
    if (block >= run.partition.block_count())
        throw OutOfRangeError("block " + std::to_string(block) + " out of range");
    const std::uint64_t n_lo = run.partition.block_lo(block);
    const std::uint64_t n_hi = run.partition.block_hi(block);
    const std::size_t i_lo = run.row_of(n_lo);
    const std::size_t i_hi = run.row_of(n_hi);
    const int d = run.dim;

    BlockErrors e;
    e.block = block;
    e.n_lo = n_lo;
    e.n_hi = n_hi;
    e.dt = run.times[i_hi] - run.times[i_lo];

    auto lo = [&](const Vec& path) { return run.row(path, i_lo); };
    auto hi = [&](const Vec& path) { return run.row(path, i_hi); };
    e.e1 = block_norm_diff(hi(run.theta), lo(run.theta), hi(run.path_g), lo(run.path_g));
    e.e2 = block_norm_diff(hi(run.path_g), lo(run.path_g), hi(run.path_f), lo(run.path_f));
    e.e3 = block_norm_diff(hi(run.path_f), lo(run.path_f), hi(run.path_s), lo(run.path_s));

    if (field == nullptr) {
        e.e4 = e.e5 = std::numeric_limits<double>::quiet_NaN();
        return e;
    }
    check_dim(static_cast<std::size_t>(field->dim()), static_cast<std::size_t>(d), "field");
    e.field_available = true;

    const auto theta_lo = lo(run.theta);
    Vec f(d);
    field->eval(theta_lo, f);
    double s4 = 0.0;
    for (int j = 0; j < d; ++j) {
        const double diff =
            (run.path_s[i_hi * d + j] - run.path_s[i_lo * d + j]) - e.dt * f[j];
        s4 += diff * diff;
    }
    e.e4 = std::sqrt(s4);

    const double h = flow_h > 0.0 ? flow_h : std::min(1e-3, e.dt / 16.0);
    const FlowPath psi = integrate_flow(*field, theta_lo, e.dt, h);
    const Vec endpoint = psi.at(e.dt);
    double s5 = 0.0;
    for (int j = 0; j < d; ++j) {
        const double diff = e.dt * f[j] - (endpoint[j] - theta_lo[j]);
        s5 += diff * diff;
    }
    e.e5 = std::sqrt(s5);
    return e;
}

SeriesReport error_series(const StepSchedule& schedule, const PartitionPlan& partition) {
    if (partition.indices.size() < 2) throw ValidationError("partition has no blocks");
    SeriesReport r;
    const std::size_t count = partition.block_count();
    r.s2.reserve(count);
    r.s3.reserve(count);
    r.s4.reserve(count);
    auto cur = schedule.cursor_at(partition.indices.front());
    for (std::size_t b = 0; b < count; ++b) {
        const std::uint64_t n_hi = partition.block_hi(b);
        const double t_lo = cur.t();
        double first_gamma = 0.0;
        double sum_sq = 0.0;
        while (cur.n() < n_hi) {
            cur.advance();
            if (first_gamma == 0.0) first_gamma = cur.gamma();
            sum_sq += cur.gamma() * cur.gamma();
        }
        const double dt = cur.t() - t_lo;
        r.s2.push_back(dt * dt);
        r.s3.push_back(first_gamma);
        r.s4.push_back(std::sqrt(sum_sq));
        r.total2 += dt * dt;
        r.total3 += first_gamma;
        r.total4 += std::sqrt(sum_sq);
    }
    return r;
}

void write_block_errors_csv(const std::vector<BlockErrors>& blocks, const SeriesReport& series,
                            std::ostream& out) {
    check_dim(series.s2.size(), blocks.size(), "series");
    CsvWriter w(out);
    w.header({"j", "n_lo", "n_hi", "e1", "e2", "e3", "e4", "e5", "s2", "s3", "s4"});
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const BlockErrors& b = blocks[i];
        w.col(static_cast<std::uint64_t>(b.block));
        w.col(b.n_lo);
        w.col(b.n_hi);
        w.col(b.e1);
        w.col(b.e2);
        w.col(b.e3);
        w.col(b.e4);
        w.col(b.e5);
        w.col(series.s2[i]);
        w.col(series.s3[i]);
        w.col(series.s4[i]);
        w.end_row();
    }
}

BlockMeanCheck block_mean_check(const InnovationModel& model, const StepSchedule& schedule,
                                const DampingParams& p, std::uint64_t n_lo, std::uint64_t n_hi,
                                std::span<const double> theta_frozen, std::uint64_t n_replicates,
                                int truncation, std::uint64_t seed,
                                std::uint64_t field_samples) {
    const int d = model.dim();
    check_dim(theta_frozen.size(), static_cast<std::size_t>(d), "theta_frozen");
    if (n_lo >= n_hi || n_hi > schedule.horizon())
        throw ValidationError("need n_lo < n_hi <= horizon");
    if (n_replicates < 2) throw ValidationError("need at least two replicates");
    const int K = truncation > 0 ? truncation : default_truncation(p);
    const std::uint64_t L = std::min<std::uint64_t>(K, n_lo);

    std::vector<double> gam;
    gam.reserve(static_cast<std::size_t>(n_hi - n_lo));
    auto cur = schedule.cursor_at(n_lo);
    const double t_lo = cur.t();
    while (cur.n() < n_hi) {
        cur.advance();
        gam.push_back(cur.gamma());
    }
    const double dt = cur.t() - t_lo;

    const RngStream rep_main(seed, "blockmean/main");
    const RngStream rep_shadow(seed, "blockmean/shadow");
    std::vector<MeanVar> acc(d);
    Vec x(d), m(d), v(d), inc(d);
    for (std::uint64_t r = 0; r < n_replicates; ++r) {
        const RngStream ms = rep_main.child(r);
        const RngStream ss = rep_shadow.child(r);
        std::fill(m.begin(), m.end(), 0.0);
        std::fill(v.begin(), v.end(), 0.0);
        std::fill(inc.begin(), inc.end(), 0.0);
        for (std::uint64_t idx = n_lo - L + 1; L > 0 && idx <= n_lo; ++idx) {
            CounterRng rng = ss.at(idx);
            model.sample(theta_frozen, rng, x);
            for (int j = 0; j < d; ++j) {
                m[j] = p.alpha * m[j] + (1.0 - p.alpha) * x[j];
                v[j] = p.beta * v[j] + (1.0 - p.beta) * x[j] * x[j];
            }
        }
        for (std::uint64_t n = n_lo + 1; n <= n_hi; ++n) {
            CounterRng rng = ms.at(n);
            model.sample(theta_frozen, rng, x);
            const double g = gam[static_cast<std::size_t>(n - n_lo - 1)];
            for (int j = 0; j < d; ++j) {
                m[j] = p.alpha * m[j] + (1.0 - p.alpha) * x[j];
                v[j] = p.beta * v[j] + (1.0 - p.beta) * x[j] * x[j];
                inc[j] += g * m[j] / (std::sqrt(v[j]) + p.eps);
            }
        }
        for (int j = 0; j < d; ++j) acc[j].add(inc[j]);
    }

    const std::uint64_t field_seed = RngStream(seed, "blockmean/field").key();
    const FieldEstimate fe = estimate_field(model, theta_frozen, p, field_samples, K, field_seed);

    BlockMeanCheck out;
    out.n_replicates = n_replicates;
    out.increment_mean.resize(d);
    out.increment_se.resize(d);
    out.target.resize(d);
    out.target_se.resize(d);
    for (int j = 0; j < d; ++j) {
        out.increment_mean[j] = acc[j].mean();
        out.increment_se[j] = acc[j].std_error();
        out.target[j] = dt * fe.value[j];
        out.target_se[j] = dt * fe.std_error[j];
        const double diff = std::abs(out.increment_mean[j] - out.target[j]);
        const double sd = std::sqrt(out.increment_se[j] * out.increment_se[j] +
                                    out.target_se[j] * out.target_se[j]);
        double sig = 0.0;
        if (diff > 0.0) sig = sd > 0.0 ? diff / sd : std::numeric_limits<double>::infinity();
        out.max_sigmas = std::max(out.max_sigmas, sig);
    }
    return out;
}

GrowthReport growth_bound_report(const InnovationModel& model, const StepSchedule& schedule,
                                 const DampingParams& p, std::span<const double> theta0,
                                 const std::vector<std::uint64_t>& anchors, double radius,
                                 double p_exp, int truncation, std::uint64_t n_seeds,
                                 std::uint64_t seed) {
    const int d = model.dim();
    check_dim(theta0.size(), static_cast<std::size_t>(d), "theta0");
    if (anchors.empty()) throw ValidationError("no anchors");
    if (!std::is_sorted(anchors.begin(), anchors.end()))
        throw ValidationError("anchors must be ascending");
    if (anchors.back() > schedule.horizon())
        throw ValidationError("anchor past the schedule horizon");
    if (radius <= 0.0) throw ValidationError("radius must be positive");
    if (n_seeds < 2) throw ValidationError("need at least two seeds");
    const int K = truncation > 0 ? truncation : default_truncation(p);
    const WeightVector w(p, K);

    std::vector<MeanVar> acc(anchors.size());
    std::vector<std::uint64_t> gated(anchors.size(), 0);
    const RngStream root(seed, "growth");
    Vec x(d), ring(static_cast<std::size_t>(K) * d, 0.0), history;
    for (std::uint64_t s = 0; s < n_seeds; ++s) {
        const RngStream stream = root.child(s);
        AdamState st = make_adam_start(Vec(theta0.begin(), theta0.end()));
        auto cur = schedule.cursor_at(0);
        std::size_t next_anchor = 0;
        // Anchor 0, if requested, sees the empty (all-zero) history.
        while (next_anchor < anchors.size()) {
            if (st.n == anchors[next_anchor]) {
                double n2 = 0.0;
                for (double c : st.theta) n2 += c * c;
                if (std::sqrt(n2) > radius) {
                    ++gated[next_anchor];
                } else {
                    const std::uint64_t len = std::min<std::uint64_t>(K, st.n);
                    history.clear();
                    for (std::uint64_t lag = 0; lag < len; ++lag) {
                        const std::size_t slot =
                            static_cast<std::size_t>((st.n - lag - 1) % K);
                        history.insert(history.end(), ring.begin() + slot * d,
                                       ring.begin() + (slot + 1) * d);
                    }
                    const double norm = weighted_history_norm(w, history, d);
                    acc[next_anchor].add(std::pow(norm, p_exp));
                }
                ++next_anchor;
                continue;
            }
            cur.advance();
            CounterRng rng = stream.at(cur.n());
            model.sample(st.theta, rng, x);
            std::copy(x.begin(), x.end(),
                      ring.begin() + static_cast<std::size_t>((cur.n() - 1) % K) * d);
            adam_step_inplace(st, x, cur.gamma(), p, AdamVariant::kPlain);
        }
    }

    GrowthReport out;
    out.anchors.resize(anchors.size());
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        out.anchors[i].n = anchors[i];
        out.anchors[i].gated_out = gated[i];
        if (acc[i].count() == 0) {
            out.anchors[i].estimate = std::numeric_limits<double>::quiet_NaN();
            out.anchors[i].std_error = std::numeric_limits<double>::quiet_NaN();
        } else {
            out.anchors[i].estimate = acc[i].mean();
            out.anchors[i].std_error = acc[i].std_error();
        }
    }
    return out;
}

}  // namespace adamflow
