#include "adamflow/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <nlohmann/json.hpp>

#include "adamflow/adam.hpp"
#include "adamflow/coupling.hpp"
#include "adamflow/csv.hpp"
#include "adamflow/erm.hpp"
#include "adamflow/errors.hpp"
#include "adamflow/field.hpp"
#include "adamflow/flow.hpp"
#include "adamflow/innovation.hpp"
#include "adamflow/patterns.hpp"
#include "adamflow/rng.hpp"
#include "adamflow/schedule.hpp"
#include "adamflow/stats.hpp"

#ifndef ADAMFLOW_VERSION
#define ADAMFLOW_VERSION "0.0.0"
#endif

namespace adamflow {
namespace {

using json = nlohmann::ordered_json;

std::string sub(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in.good()) throw Error("cannot read config file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("(root)", std::string("not valid JSON: ") + e.what());
    }
}

const json& need(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path.empty() ? "(root)" : path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(sub(path, key), "missing required field");
    return *it;
}

double as_num(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    return j.get<double>();
}

std::uint64_t as_u64(const json& j, const std::string& path) {
    if (!j.is_number_integer() || (j.is_number_integer() && j.get<std::int64_t>() < 0 &&
                                   !j.is_number_unsigned()))
        throw ConfigError(path, "expected a nonnegative integer");
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    const std::int64_t v = j.get<std::int64_t>();
    if (v < 0) throw ConfigError(path, "expected a nonnegative integer");
    return static_cast<std::uint64_t>(v);
}

std::string as_str(const json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(path, "expected a string");
    return j.get<std::string>();
}

double need_num(const json& j, const std::string& key, const std::string& path) {
    return as_num(need(j, key, path), sub(path, key));
}

std::uint64_t need_u64(const json& j, const std::string& key, const std::string& path) {
    return as_u64(need(j, key, path), sub(path, key));
}

std::string need_str(const json& j, const std::string& key, const std::string& path) {
    return as_str(need(j, key, path), sub(path, key));
}

double opt_num(const json& j, const std::string& key, const std::string& path, double dflt) {
    if (!j.is_object() || !j.contains(key)) return dflt;
    return as_num(j.at(key), sub(path, key));
}

std::uint64_t opt_u64(const json& j, const std::string& key, const std::string& path,
                      std::uint64_t dflt) {
    if (!j.is_object() || !j.contains(key)) return dflt;
    return as_u64(j.at(key), sub(path, key));
}

std::string opt_str(const json& j, const std::string& key, const std::string& path,
                    const std::string& dflt) {
    if (!j.is_object() || !j.contains(key)) return dflt;
    return as_str(j.at(key), sub(path, key));
}

Vec need_vec(const json& j, const std::string& key, const std::string& path) {
    const json& a = need(j, key, path);
    const std::string p = sub(path, key);
    if (!a.is_array() || a.empty()) throw ConfigError(p, "expected a non-empty array");
    Vec out;
    out.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out.push_back(as_num(a[i], p + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<std::uint64_t> need_u64_vec(const json& j, const std::string& key,
                                        const std::string& path) {
    const json& a = need(j, key, path);
    const std::string p = sub(path, key);
    if (!a.is_array() || a.empty()) throw ConfigError(p, "expected a non-empty array");
    std::vector<std::uint64_t> out;
    out.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out.push_back(as_u64(a[i], p + "[" + std::to_string(i) + "]"));
    return out;
}

// Value-level validation failures inside library constructors are config
// errors from the caller's point of view.
template <class Fn>
auto checked(const std::string& path, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ValidationError& e) {
        throw ConfigError(path, e.what());
    } catch (const DomainError& e) {
        throw ConfigError(path, e.what());
    }
}

StepSchedule build_schedule(const json& j, const std::string& path) {
    const std::string kind = need_str(j, "kind", path);
    if (kind == "power") {
        const double c = need_num(j, "c", path);
        const double e = need_num(j, "exponent", path);
        const std::uint64_t horizon = need_u64(j, "horizon", path);
        return checked(path, [&] { return StepSchedule::power(c, e, horizon); });
    }
    if (kind == "explicit") {
        Vec values = need_vec(j, "values", path);
        return checked(path, [&] { return StepSchedule::explicit_list(std::move(values)); });
    }
    throw ConfigError(sub(path, "kind"), "unknown schedule kind '" + kind + "'");
}

DampingParams build_damping(const json& j, const std::string& path) {
    const double a = need_num(j, "alpha", path);
    const double b = need_num(j, "beta", path);
    const double e = need_num(j, "eps", path);
    return checked(path, [&] { return DampingParams(a, b, e); });
}

Dataset build_dataset(const json& j, const std::string& path) {
    if (j.contains("synthetic")) {
        const json& s = j.at("synthetic");
        const std::string p = sub(path, "synthetic");
        const std::uint64_t n = need_u64(s, "n", p);
        const std::uint64_t m = need_u64(s, "input_dim", p);
        const std::uint64_t seed = opt_u64(s, "seed", p, 0);
        return checked(p, [&] {
            return synthetic_dataset(static_cast<std::size_t>(n), static_cast<int>(m), seed);
        });
    }
    if (j.contains("csv")) {
        const std::string file = as_str(j.at("csv"), sub(path, "csv"));
        std::ifstream in(file);
        if (!in.good()) throw ConfigError(sub(path, "csv"), "cannot read dataset: " + file);
        return checked(sub(path, "csv"), [&] { return load_dataset_csv(in); });
    }
    throw ConfigError(path, "dataset needs either 'synthetic' or 'csv'");
}

std::shared_ptr<const PredictionModel> build_predictor(const json& j, const std::string& path,
                                                       int input_dim) {
    const std::string kind = need_str(j, "kind", path);
    if (kind == "affine")
        return checked(path, [&]() -> std::shared_ptr<const PredictionModel> {
            return std::make_shared<AffineModel>(input_dim);
        });
    if (kind == "shallow_tanh") {
        const std::uint64_t width = need_u64(j, "width", path);
        return checked(path, [&]() -> std::shared_ptr<const PredictionModel> {
            return std::make_shared<ShallowTanhModel>(input_dim, static_cast<int>(width));
        });
    }
    throw ConfigError(sub(path, "kind"), "unknown predictor kind '" + kind + "'");
}

struct BuiltModel {
    std::shared_ptr<const InnovationModel> innovation;
    std::shared_ptr<const Objective> objective;  // null when no risk exists
    bool deterministic = false;
    int dim = 0;
};

BuiltModel build_model(const json& j, const std::string& path) {
    BuiltModel out;
    const std::string kind = need_str(j, "kind", path);
    if (kind == "quadratic_gradient") {
        Vec scale = need_vec(j, "scale", path);
        Vec center;
        if (j.contains("center")) center = need_vec(j, "center", path);
        const double sigma = opt_num(j, "sigma", path, 0.0);
        auto obj = checked(path, [&] {
            return std::make_shared<QuadraticObjective>(std::move(scale), std::move(center));
        });
        out.objective = obj;
        out.dim = obj->dim();
        if (sigma == 0.0) {
            out.innovation = checked(path, [&] { return make_deterministic_gradient(obj); });
            out.deterministic = true;
        } else {
            out.innovation =
                checked(path, [&] { return make_gaussian_gradient(obj, sigma); });
        }
        return out;
    }
    if (kind == "two_point") {
        Vec a = need_vec(j, "a", path);
        Vec b = need_vec(j, "b", path);
        const double p = need_num(j, "p", path);
        out.dim = static_cast<int>(a.size());
        out.innovation =
            checked(path, [&] { return make_two_point(std::move(a), std::move(b), p); });
        return out;
    }
    if (kind == "asymmetric_two_point") {
        const double scale = need_num(j, "scale", path);
        const double a0 = need_num(j, "a0", path);
        const double lambda = opt_num(j, "lambda", path, 0.0);
        const double p = need_num(j, "p", path);
        auto obj = checked(path, [&] {
            return std::make_shared<QuadraticObjective>(Vec{scale});
        });
        out.objective = obj;
        out.dim = 1;
        out.innovation =
            checked(path, [&] { return make_asymmetric_two_point(obj, a0, lambda, p); });
        return out;
    }
    if (kind == "minibatch") {
        Dataset data = build_dataset(need(j, "data", path), sub(path, "data"));
        auto predictor =
            build_predictor(need(j, "model", path), sub(path, "model"), data.input_dim);
        const std::uint64_t batch = need_u64(j, "batch", path);
        out.objective = checked(path, [&] {
            return std::make_shared<ErmObjective>(predictor, data);
        });
        out.dim = predictor->param_dim();
        out.innovation = checked(path, [&] {
            return make_minibatch_innovation(predictor, std::move(data),
                                             static_cast<int>(batch));
        });
        return out;
    }
    throw ConfigError(sub(path, "kind"), "unknown model kind '" + kind + "'");
}

AdamVariant build_variant(const json& j, const std::string& path) {
    const std::string v = opt_str(j, "variant", path, "plain");
    if (v == "plain") return AdamVariant::kPlain;
    if (v == "bias_corrected") return AdamVariant::kBiasCorrected;
    throw ConfigError(sub(path, "variant"), "expected 'plain' or 'bias_corrected'");
}

std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out.good()) throw Error("cannot write " + (dir / name).string());
    return out;
}

json json_num(double v) { return std::isfinite(v) ? json(v) : json(); }

// Shared context handed to each kind's runner.
struct RunContext {
    json config;
    std::uint64_t seed = 0;
    std::filesystem::path out_dir;
    int threads = 1;
    bool validate_only = false;

    std::vector<std::pair<std::string, bool>> checks;
    json metrics = json::object();

    void check(const std::string& name, bool pass) { checks.emplace_back(name, pass); }
};

FieldFn build_field_for(const BuiltModel& model, const DampingParams& p,
                        std::uint64_t field_samples, int truncation, std::uint64_t seed,
                        int threads) {
    if (model.deterministic && model.objective)
        return FieldFn::from_objective(model.objective, p);
    return FieldFn::from_monte_carlo(model.innovation, p, field_samples, truncation,
                                     RngStream(seed, "field").key(), threads);
}

// ---- apt_profile ---------------------------------------------------------

void run_apt_profile(RunContext& ctx) {
    const json& cfg = ctx.config;
    const StepSchedule schedule = build_schedule(need(cfg, "schedule", ""), "schedule");
    const DampingParams damping = build_damping(need(cfg, "damping", ""), "damping");
    const BuiltModel model = build_model(need(cfg, "model", ""), "model");
    const Vec theta0 = need_vec(cfg, "theta0", "");
    if (static_cast<int>(theta0.size()) != model.dim)
        throw ConfigError("theta0", "length must match the model dimension");
    const AdamVariant variant = build_variant(cfg, "");
    const std::vector<std::uint64_t> anchors = need_u64_vec(cfg, "anchors", "");
    if (!std::is_sorted(anchors.begin(), anchors.end()))
        throw ConfigError("anchors", "must be ascending");
    const double window = need_num(cfg, "window", "");
    const double radius = need_num(cfg, "radius", "");
    if (!(window > 0.0)) throw ConfigError("window", "must be positive");
    if (!(radius > 0.0)) throw ConfigError("radius", "must be positive");
    const double flow_h = opt_num(cfg, "flow_h", "", 0.0);
    const std::uint64_t field_samples = opt_u64(cfg, "field_samples", "", 20000);
    const int truncation = static_cast<int>(opt_u64(cfg, "truncation", "", 0));
    if (anchors.back() >= schedule.horizon())
        throw ConfigError("anchors", "anchor must leave room inside the horizon");
    if (ctx.validate_only) return;

    const FieldFn field =
        build_field_for(model, damping, field_samples, truncation, ctx.seed, ctx.threads);
    std::vector<DeviationReport> reports;
    reports.reserve(anchors.size());
    for (const std::uint64_t anchor : anchors)
        reports.push_back(flow_deviation_streaming(*model.innovation, schedule, damping, theta0,
                                                   variant, ctx.seed, "innovation/main", field,
                                                   anchor, window, radius, flow_h));
    auto csv = open_output(ctx.out_dir, "deviation.csv");
    write_deviation_csv(reports, csv);

    const double trend = deviation_trend(reports);
    ctx.check("deviation_trend_negative", std::isfinite(trend) && trend < 0.0);
    std::size_t gated = 0;
    for (const auto& r : reports) gated += r.gated_out ? 1 : 0;
    ctx.metrics["trend"] = json_num(trend);
    ctx.metrics["anchors"] = anchors;
    json devs = json::array();
    for (const auto& r : reports) devs.push_back(json_num(r.sup_dev));
    ctx.metrics["sup_dev"] = devs;
    ctx.metrics["gated_out"] = gated;
}

// ---- f_zero_vs_grad_zero -------------------------------------------------

void run_f_zero_vs_grad_zero(RunContext& ctx) {
    const json& cfg = ctx.config;
    const DampingParams damping = build_damping(need(cfg, "damping", ""), "damping");
    const BuiltModel model = build_model(need(cfg, "model", ""), "model");
    if (model.dim != 1) throw ConfigError("model", "this experiment is one-dimensional");
    if (!model.objective) throw ConfigError("model", "needs a model with an objective");
    const double lo = need_num(cfg, "lo", "");
    const double hi = need_num(cfg, "hi", "");
    if (!(lo < hi)) throw ConfigError("lo", "need lo < hi");
    FieldZeroOptions zopts;
    zopts.tol = opt_num(cfg, "tol", "", 1e-3);
    zopts.n_samples = opt_u64(cfg, "n_samples", "", 20000);
    zopts.truncation = static_cast<int>(opt_u64(cfg, "truncation", "", 0));
    zopts.seed = RngStream(ctx.seed, "fzero").key();
    zopts.max_evals = static_cast<int>(opt_u64(cfg, "max_evals", "", 60));
    const std::uint64_t scan_points = opt_u64(cfg, "scan_points", "", 41);
    if (scan_points < 2) throw ConfigError("scan_points", "need at least two points");
    if (ctx.validate_only) return;

    // Field scan across [lo, hi] for plotting and for the grid oracle.
    std::vector<Vec> points;
    std::vector<FieldEstimate> fields;
    const RngStream scan_stream(ctx.seed, "scan");
    for (std::uint64_t i = 0; i < scan_points; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(scan_points - 1);
        const Vec theta{lo + t * (hi - lo)};
        fields.push_back(estimate_field(*model.innovation, theta, damping, zopts.n_samples,
                                        zopts.truncation, scan_stream.key(), ctx.threads));
        points.push_back(theta);
    }
    auto csv = open_output(ctx.out_dir, "field_scan.csv");
    write_field_scan_csv(points, fields, csv);

    bool f_zero_found = true;
    double f_zero = std::numeric_limits<double>::quiet_NaN();
    double f_se = std::numeric_limits<double>::quiet_NaN();
    try {
        const FieldZero z = find_field_zero_1d(*model.innovation, damping, lo, hi, zopts);
        f_zero = z.theta[0];
        f_se = z.estimate.std_error[0];
    } catch (const Error&) {
        f_zero_found = false;
    }
    ctx.check("f_zero_found", f_zero_found);

    // Gradient zero by bisection on the analytic gradient.
    bool g_zero_found = true;
    double g_zero = std::numeric_limits<double>::quiet_NaN();
    {
        double a = lo, b = hi, ga, gb;
        model.objective->gradient({&a, 1}, {&ga, 1});
        model.objective->gradient({&b, 1}, {&gb, 1});
        if (ga == 0.0) {
            g_zero = a;
        } else if (gb == 0.0) {
            g_zero = b;
        } else if ((ga < 0.0) == (gb < 0.0)) {
            g_zero_found = false;
        } else {
            for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
                const double mid = 0.5 * (a + b);
                double gm;
                model.objective->gradient({&mid, 1}, {&gm, 1});
                if (gm == 0.0) {
                    a = b = mid;
                } else if ((gm < 0.0) == (ga < 0.0)) {
                    a = mid;
                    ga = gm;
                } else {
                    b = mid;
                }
            }
            g_zero = 0.5 * (a + b);
        }
    }
    ctx.check("grad_zero_found", g_zero_found);

    ctx.metrics["f_zero"] = json_num(f_zero);
    ctx.metrics["f_zero_se"] = json_num(f_se);
    ctx.metrics["grad_zero"] = json_num(g_zero);
    ctx.metrics["separation"] = json_num(std::abs(f_zero - g_zero));
}

// ---- erm_convergence -----------------------------------------------------

void run_erm_convergence(RunContext& ctx) {
    const json& cfg = ctx.config;
    Dataset data = build_dataset(need(cfg, "data", ""), "data");
    auto predictor = build_predictor(need(cfg, "model", ""), "model", data.input_dim);
    const std::uint64_t batch = need_u64(cfg, "batch", "");
    const DampingParams damping = build_damping(need(cfg, "damping", ""), "damping");
    const StepSchedule schedule = build_schedule(need(cfg, "schedule", ""), "schedule");
    const std::uint64_t n_steps = need_u64(cfg, "n_steps", "");
    if (n_steps == 0 || n_steps > schedule.horizon())
        throw ConfigError("n_steps", "must lie in [1, schedule horizon]");
    const std::uint64_t n_seeds = opt_u64(cfg, "n_seeds", "", 10);
    if (n_seeds == 0) throw ConfigError("n_seeds", "must be positive");
    const double init_radius = opt_num(cfg, "init_radius", "", 0.1);
    const double risk_threshold = opt_num(cfg, "risk_threshold", "", 1e-6);
    const std::uint64_t min_successes =
        opt_u64(cfg, "min_successes", "", (8 * n_seeds + 9) / 10);
    const std::uint64_t record_stride =
        opt_u64(cfg, "record_stride", "", std::max<std::uint64_t>(1, n_steps / 200));
    const AdamVariant variant = build_variant(cfg, "");
    if (ctx.validate_only) return;

    const ErmObjective risk(predictor, data);
    const double threshold = min_batch_threshold(damping.beta, data.size());
    ctx.check("batch_above_threshold", static_cast<double>(batch) > threshold);

    const auto innovation = make_minibatch_innovation(predictor, data, static_cast<int>(batch));
    const int d = predictor->param_dim();
    const RngStream init_stream(ctx.seed, "init");
    const RngStream run_stream(ctx.seed, "erm");

    auto csv = open_output(ctx.out_dir, "risk_curves.csv");
    CsvWriter w(csv);
    w.header({"seed", "n", "t", "risk"});

    std::uint64_t successes = 0;
    json finals = json::array();
    for (std::uint64_t s = 0; s < n_seeds; ++s) {
        Vec theta0(d);
        CounterRng init_rng = init_stream.at(s);
        for (int j = 0; j < d; ++j)
            theta0[j] = init_radius * (2.0 * init_rng.next_uniform() - 1.0);

        AdamRunOptions opts;
        opts.n_steps = n_steps;
        opts.variant = variant;
        opts.record_stride = record_stride;
        opts.seed = run_stream.child(s).key();
        const AdamTrajectory traj = run_adam(*innovation, schedule, damping, theta0, opts);
        for (std::size_t i = 0; i < traj.steps.size(); ++i) {
            w.col(s);
            w.col(traj.steps[i]);
            w.col(traj.times[i]);
            w.col(risk.value(traj.theta_row(i)));
            w.end_row();
        }
        const double final_risk = risk.value(traj.final_state.theta);
        finals.push_back(json_num(final_risk));
        if (final_risk < risk_threshold) ++successes;
    }
    ctx.check("enough_seeds_converged", successes >= min_successes);
    ctx.metrics["final_risks"] = finals;
    ctx.metrics["successes"] = successes;
    ctx.metrics["min_successes"] = min_successes;
    ctx.metrics["batch_threshold"] = json_num(threshold);
}

// ---- error_decomposition -------------------------------------------------

void run_error_decomposition(RunContext& ctx) {
    const json& cfg = ctx.config;
    const StepSchedule schedule = build_schedule(need(cfg, "schedule", ""), "schedule");
    const DampingParams damping = build_damping(need(cfg, "damping", ""), "damping");
    const BuiltModel model = build_model(need(cfg, "model", ""), "model");
    const Vec theta0 = need_vec(cfg, "theta0", "");
    if (static_cast<int>(theta0.size()) != model.dim)
        throw ConfigError("theta0", "length must match the model dimension");
    const double rho = need_num(cfg, "rho", "");
    const std::uint64_t start_index = opt_u64(cfg, "start_index", "", 0);
    const int truncation = static_cast<int>(opt_u64(cfg, "truncation", "", 0));
    const double flow_h = opt_num(cfg, "flow_h", "", 0.0);
    const std::uint64_t field_samples = opt_u64(cfg, "field_samples", "", 20000);
    const PartitionPlan partition = checked("rho", [&] {
        return build_rho_partition(schedule, rho, start_index);
    });
    if (ctx.validate_only) return;

    const IntermediateRun run = run_intermediates(*model.innovation, schedule, damping,
                                                  partition, theta0, ctx.seed, truncation);
    const FieldFn field =
        build_field_for(model, damping, field_samples, truncation, ctx.seed, ctx.threads);
    std::vector<BlockErrors> blocks;
    blocks.reserve(partition.block_count());
    for (std::size_t b = 0; b < partition.block_count(); ++b)
        blocks.push_back(error_decomposition(run, b, &field, flow_h));
    const SeriesReport series = error_series(schedule, partition);
    auto csv = open_output(ctx.out_dir, "blocks.csv");
    write_block_errors_csv(blocks, series, csv);

    bool finite = true;
    bool e3_zero = true;
    for (const auto& b : blocks) {
        finite = finite && std::isfinite(b.e1) && std::isfinite(b.e2) && std::isfinite(b.e3) &&
                 std::isfinite(b.e4) && std::isfinite(b.e5);
        e3_zero = e3_zero && b.e3 == 0.0;
    }
    ctx.check("errors_finite", finite);
    if (model.innovation->deterministic()) ctx.check("e3_zero_deterministic", e3_zero);
    ctx.metrics["block_count"] = partition.block_count();
    ctx.metrics["series_totals"] = {json_num(series.total2), json_num(series.total3),
                                    json_num(series.total4)};
}

// ---- combinatoric_sweep --------------------------------------------------

void run_combinatoric_sweep(RunContext& ctx) {
    const json& cfg = ctx.config;
    const std::vector<std::uint64_t> n_list = need_u64_vec(cfg, "n_list", "");
    const std::vector<std::uint64_t> m_list = need_u64_vec(cfg, "m_list", "");
    std::vector<int> grid{-2, -1, 0, 1, 2};
    if (cfg.contains("grid")) {
        grid.clear();
        const json& g = cfg.at("grid");
        if (!g.is_array() || g.empty()) throw ConfigError("grid", "expected a non-empty array");
        for (std::size_t i = 0; i < g.size(); ++i) {
            const std::string p = "grid[" + std::to_string(i) + "]";
            if (!g[i].is_number_integer()) throw ConfigError(p, "expected an integer");
            grid.push_back(g[i].get<int>());
        }
    }
    for (std::size_t i = 0; i < n_list.size(); ++i)
        if (n_list[i] == 0) throw ConfigError("n_list[" + std::to_string(i) + "]", "must be >= 1");
    for (std::size_t i = 0; i < m_list.size(); ++i)
        if (m_list[i] == 0) throw ConfigError("m_list[" + std::to_string(i) + "]", "must be >= 1");
    if (ctx.validate_only) return;

    auto csv = open_output(ctx.out_dir, "patterns.csv");
    CsvWriter w(csv);
    w.header({"n", "m", "pattern", "prob_num", "prob_den", "bound", "pass"});
    bool all = true;
    std::uint64_t rows = 0;
    for (const std::uint64_t n : n_list) {
        for (const std::uint64_t m : m_list) {
            const CombinatoricReport report = combinatoric_bound_check(n, m, grid);
            for (const auto& row : report.rows) {
                std::string id;
                for (std::size_t i = 0; i < row.z.size(); ++i) {
                    if (i) id += '_';
                    id += std::to_string(row.z[i]);
                }
                w.col(n);
                w.col(m);
                w.col(id);
                w.col(BigInt(numerator(row.prob)).str());
                w.col(BigInt(denominator(row.prob)).str());
                w.col(report.bound);
                w.col(row.pass);
                w.end_row();
                ++rows;
            }
            ctx.check("bound_n" + std::to_string(n) + "_m" + std::to_string(m), report.pass);
            all = all && report.pass;
        }
    }
    ctx.metrics["patterns_checked"] = rows;
    ctx.metrics["all_pass"] = all;
    ctx.metrics["grid_certificate_only"] = true;
}

// ---- noise_condition_probe -------------------------------------------------

void run_noise_condition_probe(RunContext& ctx) {
    const json& cfg = ctx.config;
    const BuiltModel model = build_model(need(cfg, "model", ""), "model");
    if (!model.objective) throw ConfigError("model", "needs a model with an objective");
    const json& probes_json = need(cfg, "probes", "");
    if (!probes_json.is_array() || probes_json.empty())
        throw ConfigError("probes", "expected a non-empty array of theta vectors");
    std::vector<Vec> probes;
    for (std::size_t i = 0; i < probes_json.size(); ++i) {
        const std::string p = "probes[" + std::to_string(i) + "]";
        const json& row = probes_json[i];
        if (!row.is_array() || row.size() != static_cast<std::size_t>(model.dim))
            throw ConfigError(p, "expected an array of model dimension");
        Vec theta;
        for (std::size_t k = 0; k < row.size(); ++k)
            theta.push_back(as_num(row[k], p + "[" + std::to_string(k) + "]"));
        probes.push_back(std::move(theta));
    }
    NoiseConditionOptions nopts;
    nopts.c1 = opt_num(cfg, "c1", "", 1.0);
    nopts.p1 = opt_num(cfg, "p1", "", 3.0);
    nopts.c2 = opt_num(cfg, "c2", "", 1.0);
    nopts.p2 = opt_num(cfg, "p2", "", 2.0);
    nopts.q = opt_num(cfg, "q", "", 0.5);
    nopts.n_samples = opt_u64(cfg, "n_samples", "", 10000);
    nopts.seed = RngStream(ctx.seed, "noise").key();
    if (ctx.validate_only) return;

    const NoiseConditionReport report =
        check_noise_conditions(*model.innovation, *model.objective, probes, nopts);
    auto csv = open_output(ctx.out_dir, "noise_report.csv");
    CsvWriter w(csv);
    w.header({"probe", "coord", "grad", "third_moment", "third_moment_se", "third_moment_bound",
              "small_prob", "small_prob_se", "moment_ok", "prob_ok", "indeterminate"});
    bool moments = true, probs = true;
    std::size_t indeterminate = 0;
    for (std::size_t i = 0; i < report.probes.size(); ++i) {
        const auto& probe = report.probes[i];
        for (int j = 0; j < model.dim; ++j) {
            w.col(static_cast<std::uint64_t>(i));
            w.col(j);
            w.col(probe.grad[j]);
            w.col(probe.third_moment[j]);
            w.col(probe.third_moment_se[j]);
            w.col(probe.third_moment_bound);
            w.col(probe.small_prob[j]);
            w.col(probe.small_prob_se[j]);
            w.col(probe.moment_ok);
            w.col(probe.prob_ok);
            w.col(probe.indeterminate);
            w.end_row();
        }
        if (probe.indeterminate) {
            ++indeterminate;
            continue;
        }
        moments = moments && probe.moment_ok;
        probs = probs && probe.prob_ok;
    }
    ctx.check("third_moment_ok", moments);
    ctx.check("small_ball_ok", probs);
    ctx.metrics["indeterminate_probes"] = indeterminate;
    ctx.metrics["probes"] = report.probes.size();
}

// ---- dispatch --------------------------------------------------------------

using KindRunner = void (*)(RunContext&);

const std::vector<std::pair<std::string, KindRunner>>& kind_table() {
    static const std::vector<std::pair<std::string, KindRunner>> table{
        {"apt_profile", &run_apt_profile},
        {"f_zero_vs_grad_zero", &run_f_zero_vs_grad_zero},
        {"erm_convergence", &run_erm_convergence},
        {"error_decomposition", &run_error_decomposition},
        {"combinatoric_sweep", &run_combinatoric_sweep},
        {"noise_condition_probe", &run_noise_condition_probe},
    };
    return table;
}

KindRunner find_runner(const std::string& kind) {
    for (const auto& [name, fn] : kind_table())
        if (name == kind) return fn;
    throw ConfigError("kind", "unknown experiment kind '" + kind + "'");
}

struct ResolvedConfig {
    json config;
    std::string kind;
    std::uint64_t seed = 0;
    std::string out_dir;
    KindRunner runner = nullptr;
};

ResolvedConfig resolve(const std::string& config_path, const ExperimentOptions& opts,
                       bool need_out_dir) {
    ResolvedConfig r;
    r.config = load_json_file(config_path);
    const std::uint64_t version = need_u64(r.config, "spec_version", "");
    if (version != 1) throw ConfigError("spec_version", "unsupported version");
    r.kind = need_str(r.config, "kind", "");
    r.runner = find_runner(r.kind);

    if (opts.has_seed) {
        r.seed = opts.seed;
    } else if (const char* env = std::getenv("ROOT_SEED")) {
        try {
            r.seed = std::stoull(env);
        } catch (const std::exception&) {
            throw ConfigError("ROOT_SEED", "environment override is not an integer");
        }
    } else {
        r.seed = opt_u64(r.config, "seed", "", 0);
    }

    if (!opts.out_dir.empty()) {
        r.out_dir = opts.out_dir;
    } else if (const char* env = std::getenv("OUT_DIR")) {
        r.out_dir = env;
    } else {
        r.out_dir = opt_str(r.config, "out_dir", "", "");
    }
    if (need_out_dir && r.out_dir.empty())
        throw ConfigError("out_dir", "no output directory (config, OUT_DIR, or --out)");
    return r;
}

}  // namespace

ExperimentResult run_experiment(const std::string& config_path, const ExperimentOptions& opts) {
    ExperimentResult result;
    try {
        const ResolvedConfig resolved = resolve(config_path, opts, true);
        RunContext ctx;
        ctx.config = resolved.config;
        ctx.seed = resolved.seed;
        ctx.out_dir = resolved.out_dir;
        ctx.threads = std::max(1, opts.threads);

        std::filesystem::create_directories(ctx.out_dir);
        const auto t0 = std::chrono::steady_clock::now();
        resolved.runner(ctx);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        json summary;
        summary["kind"] = resolved.kind;
        summary["seed"] = ctx.seed;
        json checks = json::array();
        for (const auto& [name, pass] : ctx.checks) checks.push_back({{"name", name}, {"pass", pass}});
        summary["checks"] = checks;
        summary["metrics"] = ctx.metrics;
        bool all = true;
        for (const auto& [name, pass] : ctx.checks) all = all && pass;
        summary["all_passed"] = all;
        {
            auto out = open_output(ctx.out_dir, "summary.json");
            out << summary.dump(2) << "\n";
        }
        {
            auto out = open_output(ctx.out_dir, "summary.txt");
            for (const auto& [name, pass] : ctx.checks)
                out << (pass ? "PASS " : "FAIL ") << name << "\n";
            if (ctx.checks.empty()) out << "no checks\n";
            out << (all ? "ALL PASSED" : "FAILURES PRESENT") << "\n";
        }
        {
            json manifest;
            manifest["spec_version"] = 1;
            manifest["kind"] = resolved.kind;
            manifest["code_version"] = ADAMFLOW_VERSION;
            manifest["root_seed"] = ctx.seed;
            manifest["threads"] = ctx.threads;
            manifest["out_dir"] = ctx.out_dir.string();
            manifest["wall_time_seconds"] = wall;
            manifest["config"] = resolved.config;
            auto out = open_output(ctx.out_dir, "manifest.json");
            out << manifest.dump(2) << "\n";
        }

        result.exit_code = 0;
        result.message = all ? "ok" : "completed with failed checks";
        result.out_dir = ctx.out_dir.string();
        result.checks = ctx.checks;
    } catch (const ConfigError& e) {
        result.exit_code = 2;
        result.message = e.what();
    } catch (const std::exception& e) {
        result.exit_code = 1;
        result.message = e.what();
    }
    return result;
}

void validate_config(const std::string& config_path) {
    const ResolvedConfig resolved = resolve(config_path, ExperimentOptions{}, false);
    RunContext ctx;
    ctx.config = resolved.config;
    ctx.seed = resolved.seed;
    ctx.validate_only = true;
    resolved.runner(ctx);
}

std::vector<std::string> list_experiment_kinds() {
    std::vector<std::string> out;
    for (const auto& [name, fn] : kind_table()) out.push_back(name);
    return out;
}

}  // namespace adamflow
