#ifndef ADAMFLOW_STATS_HPP
#define ADAMFLOW_STATS_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace adamflow {

// Streaming mean/variance (Welford). Numerically stable for long runs.
class MeanVar {
public:
    void add(double x);
    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    // Unbiased sample variance; 0 for fewer than two points.
    double variance() const;
    // Standard error of the mean.
    double std_error() const;

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

// Pairwise-tree sum: deterministic result independent of how the values were
// produced (e.g. by how many worker threads), and low rounding error.
double pairwise_sum(std::span<const double> x);

// Median of a copy of x (average of middle two for even length).
double median(std::span<const double> x);

// Spearman rank correlation with average ranks on ties.
// Requires at least two points; returns 0 when either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

// Least-squares slope of y against x.
double ls_slope(std::span<const double> x, std::span<const double> y);

}  // namespace adamflow

#endif
