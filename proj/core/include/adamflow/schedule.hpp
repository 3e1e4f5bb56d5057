#ifndef ADAMFLOW_SCHEDULE_HPP
#define ADAMFLOW_SCHEDULE_HPP

#include <cstdint>
#include <vector>

namespace adamflow {

enum class ScheduleKind { kPower, kExplicit };

// Deterministic step-size sequence gamma_1 >= gamma_2 >= ... > 0 together
// with its cumulative time grid t_0 = 0, t_n = t_{n-1} + gamma_n.
//
// t_n is defined as the floating-point cumulative sum taken in index order,
// so sequential iteration (Cursor) and random access (time()) agree bitwise.
// For horizons too large to materialize the full grid, sparse checkpoints
// are kept and random access re-accumulates from the nearest one, which
// reproduces the exact same additions.
class StepSchedule {
public:
    // gamma_n = c * n^{-exponent}; requires c > 0, exponent in (0, 1].
    static StepSchedule power(double c, double exponent, std::uint64_t horizon);
    // Explicit positive non-increasing values, gamma_n = values[n-1].
    static StepSchedule explicit_list(std::vector<double> values);

    ScheduleKind kind() const { return kind_; }
    std::uint64_t horizon() const { return horizon_; }
    double power_c() const { return c_; }
    double power_exponent() const { return exponent_; }

    double gamma(std::uint64_t n) const;  // n in [1, horizon]
    double time(std::uint64_t n) const;   // n in [0, horizon]
    double total_time() const { return time(horizon_); }

    // Piecewise-constant interpolation: the value gamma_n on (t_{n-1}, t_n].
    // Requires 0 < t <= total_time().
    double staircase(double t) const;

    // Sequential (n, gamma_n, t_n) iteration; O(1) per step at any horizon.
    class Cursor {
    public:
        std::uint64_t n() const { return n_; }
        double gamma() const { return gamma_; }  // valid for n >= 1
        double t() const { return t_; }
        bool advance();  // to n+1; false once n == horizon

    private:
        friend class StepSchedule;
        const StepSchedule* s_ = nullptr;
        std::uint64_t n_ = 0;
        double gamma_ = 0.0;
        double t_ = 0.0;
    };
    Cursor cursor_at(std::uint64_t n) const;  // n in [0, horizon]

private:
    StepSchedule() = default;
    void build_times();

    ScheduleKind kind_ = ScheduleKind::kPower;
    double c_ = 0.0;
    double exponent_ = 0.0;
    std::uint64_t horizon_ = 0;
    std::vector<double> values_;       // explicit kind only
    std::vector<double> times_;        // dense prefix, when small enough
    std::vector<double> checkpoints_;  // t at multiples of kCheckpointStride
    double total_ = 0.0;
};

// Finite-horizon probe of the step-size regularity ratio
//   r(n) = gamma_{n + ceil(eps1 / gamma_n)} / gamma_n
// over n in [window/2, window]. A schedule family suitable for long-run
// tracking keeps liminf_n r(n) > 0 for every eps1; this reports the windowed
// minimum plus per-quarter minima as a trend heuristic.
struct StepRegularityReport {
    double min_ratio = 0.0;
    bool satisfied_estimate = false;
    bool truncated = false;  // some lookahead indices were clamped at horizon
    std::vector<double> quarter_mins;
};
StepRegularityReport check_step_regularity(const StepSchedule& s, double eps1, std::uint64_t window);

// Block boundaries n_0 < n_1 < ... where each block (n_{l-1}, n_l] packs as
// many indices as fit within a time budget rho * gamma_{n_{l-1}+1}^{1/3}.
struct PartitionPlan {
    double rho = 0.0;
    std::uint64_t start_index = 0;
    std::vector<std::uint64_t> indices;  // includes start_index as indices[0]

    std::size_t block_count() const { return indices.empty() ? 0 : indices.size() - 1; }
    std::uint64_t block_lo(std::size_t j) const { return indices[j]; }      // j in [0, count)
    std::uint64_t block_hi(std::size_t j) const { return indices[j + 1]; }
};

// Greedy-maximal packing until the horizon is exhausted. Every emitted block
// satisfies the budget, and all but possibly the last (which may end exactly
// at the horizon) are maximal: adding one more index would exceed the budget.
// Requires rho >= gamma_{start+1}^{2/3} so every block can hold at least one
// index.
PartitionPlan build_rho_partition(const StepSchedule& s, double rho, std::uint64_t start_index);

}  // namespace adamflow

#endif
