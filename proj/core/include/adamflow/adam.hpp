#ifndef ADAMFLOW_ADAM_HPP
#define ADAMFLOW_ADAM_HPP

#include <cstdint>
#include <ostream>
#include <string>

#include "adamflow/innovation.hpp"
#include "adamflow/schedule.hpp"
#include "adamflow/vec.hpp"

namespace adamflow {

// kPlain:          theta_n = theta_{n-1} + gamma_n * sigma_n * m_n with
//                  sigma_n^{(j)} = 1 / (sqrt(v_n^{(j)} / (1 - beta^n)) + eps).
// kBiasCorrected:  additionally divides the update by (1 - alpha^n).
enum class AdamVariant { kPlain, kBiasCorrected };

struct AdamState {
    std::uint64_t n = 0;
    Vec theta;
    Vec m;  // first-moment average,  m_0 = 0
    Vec v;  // second-moment average, v_0 = 0
};

AdamState make_adam_start(Vec theta0);

// One update with innovation x at step state.n + 1. Throws NonFiniteError
// when the update produces NaN/inf.
void adam_step_inplace(AdamState& s, std::span<const double> x, double gamma,
                       const DampingParams& p, AdamVariant variant);
AdamState adam_step(const AdamState& s, std::span<const double> x, double gamma,
                    const DampingParams& p, AdamVariant variant);

struct AdamRunOptions {
    std::uint64_t n_steps = 0;            // <= schedule horizon
    AdamVariant variant = AdamVariant::kPlain;
    std::uint64_t record_stride = 1;      // keep every k-th state
    bool record_moments = false;          // also keep m, v rows
    std::uint64_t seed = 0;
    std::string stream_name = "innovation/main";  // draws keyed by step index
};

// Recorded path plus online sup-statistics. The speed statistics are
// accumulated every step during the run, so thinning the stored rows never
// changes them.
struct AdamTrajectory {
    int dim = 0;
    AdamVariant variant = AdamVariant::kPlain;
    double alpha = 0.0, beta = 0.0, eps = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t stride = 1;

    std::vector<std::uint64_t> steps;  // recorded n values, ascending, starts at 0
    Vec times;                         // t_n for each recorded n
    Vec thetas;                        // row-major, steps.size() x dim
    Vec ms, vs;                        // row-major when recorded, else empty

    double max_speed_ratio = 0.0;           // sup_n |theta_n - theta_{n-1}| / gamma_n
    double max_speed_ratio_adjusted = 0.0;  // sup_n of the ratio * (1 - alpha^n)
    AdamState final_state;

    std::span<const double> theta_row(std::size_t i) const;
    // Recorded row for step n, or throws OutOfRangeError.
    std::size_t row_of(std::uint64_t n) const;
};

AdamTrajectory run_adam(const InnovationModel& model, const StepSchedule& schedule,
                        const DampingParams& p, std::span<const double> theta_start,
                        const AdamRunOptions& opts);

// The update-length invariant |theta_n - theta_{n-1}| <= gamma_n * bound,
// with the bias-corrected variant's extra (1 - alpha^n)^{-1} normalized out.
struct VelocityReport {
    double max_ratio = 0.0;  // normalized sup ratio
    double bound = 0.0;      // DampingParams::speed_bound(dim)
    bool ok = false;
};
VelocityReport velocity_check(const AdamTrajectory& traj);

// Columns: n, t, theta_0..theta_{d-1} [, m_0.., v_0.. with moments recorded].
void write_trajectory_csv(const AdamTrajectory& traj, std::ostream& out, bool include_moments);

}  // namespace adamflow

#endif
