#ifndef ADAMFLOW_FLOW_HPP
#define ADAMFLOW_FLOW_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "adamflow/adam.hpp"
#include "adamflow/field.hpp"
#include "adamflow/innovation.hpp"
#include "adamflow/schedule.hpp"
#include "adamflow/vec.hpp"

namespace adamflow {

// A deterministic autonomous field theta' = F(theta). Monte Carlo backed
// fields freeze their seed, so repeated evaluation at the same theta gives
// the same value and the integrated trajectory is well defined.
class FieldFn {
public:
    using Fn = std::function<void(std::span<const double>, std::span<double>)>;

    static FieldFn from_function(int dim, Fn fn);
    // Noise-free limit field of an objective: -grad R normalized componentwise.
    static FieldFn from_objective(std::shared_ptr<const Objective> obj, const DampingParams& p);
    // Frozen-seed Monte Carlo field estimate as a fixed function of theta.
    static FieldFn from_monte_carlo(std::shared_ptr<const InnovationModel> model,
                                    const DampingParams& p, std::uint64_t n_samples,
                                    int truncation, std::uint64_t seed, int n_threads = 1);

    int dim() const { return dim_; }
    void eval(std::span<const double> theta, std::span<double> out) const { fn_(theta, out); }

private:
    FieldFn(int dim, Fn fn) : dim_(dim), fn_(std::move(fn)) {}
    int dim_;
    Fn fn_;
};

// Fixed-step RK4 solution nodes with linear interpolation between them.
struct FlowPath {
    int dim = 0;
    double h = 0.0;
    Vec times;   // 0 = t_0 < t_1 < ... = t_end
    Vec points;  // row-major nodes

    double t_end() const { return times.empty() ? 0.0 : times.back(); }
    void at(double t, std::span<double> out) const;  // t in [0, t_end]
    Vec at(double t) const;
};

// Classical RK4 with fixed step h; the final step is shortened to land
// exactly on t_end. Throws NonFiniteError (with the time) if the state
// leaves the finite range.
FlowPath integrate_flow(const FieldFn& field, std::span<const double> theta0, double t_end,
                        double h);

// Sup-distance between the discrete trajectory and the flow started at the
// anchor state theta_N, over the time window [t_N, t_N + T]:
//   sup { |theta_n - Psi_{t_n - t_N}(theta_N)| : 0 <= t_n - t_N <= T }.
// Anchors with |theta_N| > radius_gate are gated out (sup_dev = NaN).
struct DeviationReport {
    std::uint64_t anchor = 0;  // N
    double t_anchor = 0.0;     // t_N
    double window = 0.0;       // T
    double radius_gate = 0.0;  // R
    double h = 0.0;            // flow step actually used
    double sup_dev = 0.0;
    bool gated_out = false;
};

// Trajectory-backed variant; requires record_stride == 1 and a recorded
// window [t_N, t_N + T]. h <= 0 selects min(1e-3, gamma_N / 10).
DeviationReport flow_deviation(const AdamTrajectory& traj, const FieldFn& field, std::uint64_t N,
                               double T, double R, double h = 0.0);

// Single-pass variant for windows too long to record: runs the optimizer
// itself, captures the anchor, and streams the comparison. Requires the
// window [t_N, t_N + T] to fit inside the schedule horizon.
DeviationReport flow_deviation_streaming(const InnovationModel& model,
                                         const StepSchedule& schedule, const DampingParams& p,
                                         std::span<const double> theta_start, AdamVariant variant,
                                         std::uint64_t seed, const std::string& stream_name,
                                         const FieldFn& field, std::uint64_t N, double T, double R,
                                         double h = 0.0);

// Deviation at each anchor (ascending) with a shared window and gate.
std::vector<DeviationReport> deviation_profile(const AdamTrajectory& traj, const FieldFn& field,
                                               const std::vector<std::uint64_t>& anchors, double T,
                                               double R, double h = 0.0);

// Spearman correlation of sup_dev against anchor over non-gated rows;
// NaN when fewer than two usable rows.
double deviation_trend(const std::vector<DeviationReport>& reports);

// Columns: N, t_N, T, sup_dev, gated_out.
void write_deviation_csv(const std::vector<DeviationReport>& reports, std::ostream& out);

}  // namespace adamflow

#endif
