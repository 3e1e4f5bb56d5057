#ifndef ADAMFLOW_VEC_HPP
#define ADAMFLOW_VEC_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "adamflow/errors.hpp"

namespace adamflow {

using Vec = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) {
    return std::sqrt(dot(a, a));
}

inline double norm_inf(std::span<const double> a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::fabs(x));
    return m;
}

inline double dist2(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline bool all_finite(std::span<const double> a) {
    for (double x : a)
        if (!std::isfinite(x)) return false;
    return true;
}

inline void check_dim(std::size_t got, std::size_t want, const char* what) {
    if (got != want)
        throw ValidationError(std::string(what) + ": dimension " + std::to_string(got) +
                              ", expected " + std::to_string(want));
}

}  // namespace adamflow

#endif
