#ifndef ADAMFLOW_COUPLING_HPP
#define ADAMFLOW_COUPLING_HPP

#include <cstdint>
#include <ostream>

#include "adamflow/flow.hpp"
#include "adamflow/innovation.hpp"
#include "adamflow/schedule.hpp"
#include "adamflow/vec.hpp"

namespace adamflow {

// Four coupled paths advanced simultaneously over a block partition, all
// driven by the same main-stream draws U_n (counter-based, keyed by the
// absolute step index, so one draw can be re-evaluated at several thetas):
//
//   theta   optimizer iterates, innovations X(U_n, theta_{n-1});
//   path_g  cumulative gamma_n * m_n / (sqrt(v_n) + eps): the optimizer's
//           own moment averages without the second-moment bias correction;
//   path_f  like path_g but with every innovation in the history re-drawn
//           at the theta frozen at the current block start (main stream);
//   path_s  like path_f but with the pre-block part of the history taken
//           from an independent shadow stream keyed by absolute index.
//
// Histories are zero before step 1 (the optimizer starts from m = v = 0,
// and the frozen/shadow histories mirror that convention), and the frozen
// paths rebuild their moment averages at every block start from the most
// recent `truncation` indices; older lags carry geometrically small weight.
// All paths are anchored at theta_{start} so only increments are meaningful.
struct IntermediateRun {
    int dim = 0;
    double alpha = 0.0, beta = 0.0, eps = 0.0;
    PartitionPlan partition;
    std::uint64_t start_n = 0;
    int truncation = 0;

    Vec times;   // t_n for n = start_n .. partition end
    Vec theta;   // row-major (len x dim), row i is step start_n + i
    Vec path_g;
    Vec path_f;
    Vec path_s;

    std::size_t rows() const { return times.size(); }
    std::size_t row_of(std::uint64_t n) const;  // n in [start_n, partition end]
    std::span<const double> row(const Vec& path, std::size_t i) const;
};

IntermediateRun run_intermediates(const InnovationModel& model, const StepSchedule& schedule,
                                  const DampingParams& p, const PartitionPlan& partition,
                                  std::span<const double> theta0, std::uint64_t seed,
                                  int truncation = 0);

// Euclidean norms of per-block increment mismatches, block j in
// [0, partition.block_count()):
//   e1 = |d(theta) - d(path_g)|   second-moment bias correction
//   e2 = |d(path_g) - d(path_f)|  freezing theta at the block start
//   e3 = |d(path_f) - d(path_s)|  swapping the pre-block history stream
//   e4 = |d(path_s) - dt * F|     realized vs mean update direction
//   e5 = |dt * F - (flow increment)|  Euler-vs-flow gap over the block
// where d(.) is the increment over block j, dt its time length, and F the
// supplied field at the block-start theta. Without a field, e4/e5 are NaN.
struct BlockErrors {
    std::size_t block = 0;
    std::uint64_t n_lo = 0, n_hi = 0;
    double dt = 0.0;
    double e1 = 0.0, e2 = 0.0, e3 = 0.0, e4 = 0.0, e5 = 0.0;
    bool field_available = false;
};
BlockErrors error_decomposition(const IntermediateRun& run, std::size_t block,
                                const FieldFn* field = nullptr, double flow_h = 0.0);

// Schedule-only per-block series and their totals:
//   s2_j = (t_{n_j} - t_{n_{j-1}})^2, s3_j = gamma_{n_{j-1}+1},
//   s4_j = sqrt(sum_{k in block j} gamma_k^2).
struct SeriesReport {
    std::vector<double> s2, s3, s4;
    double total2 = 0.0, total3 = 0.0, total4 = 0.0;
};
SeriesReport error_series(const StepSchedule& schedule, const PartitionPlan& partition);

// Columns: j, n_lo, n_hi, E1..E5, s2, s3, s4.
void write_block_errors_csv(const std::vector<BlockErrors>& blocks, const SeriesReport& series,
                            std::ostream& out);

// Monte Carlo check of the frozen-theta block-mean identity: the expected
// shadow-path increment over a block equals (block time length) * f(theta).
// Runs n_replicates independent realizations of the block increment at the
// frozen theta against an independent field estimate.
struct BlockMeanCheck {
    Vec increment_mean, increment_se;
    Vec target, target_se;     // dt * f_hat and its propagated SE
    double max_sigmas = 0.0;   // max over components of |diff| / combined SE
    std::uint64_t n_replicates = 0;
};
BlockMeanCheck block_mean_check(const InnovationModel& model, const StepSchedule& schedule,
                                const DampingParams& p, std::uint64_t n_lo, std::uint64_t n_hi,
                                std::span<const double> theta_frozen, std::uint64_t n_replicates,
                                int truncation, std::uint64_t seed,
                                std::uint64_t field_samples = 20000);

// Gated weighted-history-norm statistic at anchor steps:
// mean over seeds of 1{|theta_N| <= R} * (weighted history norm)^p, where the
// history is the realized last-`truncation` innovations at step N. Stays
// bounded in N for well-behaved models; blow-up flags moment trouble.
struct GrowthReport {
    struct Anchor {
        std::uint64_t n = 0;
        double estimate = 0.0;
        double std_error = 0.0;
        std::uint64_t gated_out = 0;  // seeds excluded by the radius gate
    };
    std::vector<Anchor> anchors;
};
GrowthReport growth_bound_report(const InnovationModel& model, const StepSchedule& schedule,
                                 const DampingParams& p, std::span<const double> theta0,
                                 const std::vector<std::uint64_t>& anchors, double radius,
                                 double p_exp, int truncation, std::uint64_t n_seeds,
                                 std::uint64_t seed);

}  // namespace adamflow

#endif
