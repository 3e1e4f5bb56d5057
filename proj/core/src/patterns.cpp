#include "adamflow/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "adamflow/csv.hpp"
#include "adamflow/errors.hpp"
#include "adamflow/innovation.hpp"
#include "adamflow/rng.hpp"
#include "adamflow/stats.hpp"

namespace adamflow {

Rationalized rationalize(double x, std::int64_t max_den) {
    if (!std::isfinite(x)) throw ValidationError("cannot rationalize a non-finite value");
    if (max_den < 1) throw ValidationError("max_den must be positive");
    if (std::abs(x) > 9e15) throw ValidationError("magnitude too large to rationalize");
    const bool neg = x < 0.0;
    double r = std::abs(x);
    // Continued-fraction convergents h/k; stop at the last denominator
    // within bounds, comparing against the best admissible semiconvergent.
    std::int64_t h_prev = 1, h_pprev = 0, k_prev = 0, k_pprev = 1;
    double frac = r;
    for (int it = 0; it < 64; ++it) {
        const double af = std::floor(frac);
        const std::int64_t a = static_cast<std::int64_t>(af);
        const std::int64_t h = a * h_prev + h_pprev;
        const std::int64_t k = a * k_prev + k_pprev;
        if (k > max_den) {
            // Largest semiconvergent coefficient still within the cap.
            const std::int64_t cut = (max_den - k_pprev) / std::max<std::int64_t>(k_prev, 1);
            const std::int64_t hs = cut * h_prev + h_pprev;
            const std::int64_t ks = cut * k_prev + k_pprev;
            double best_num = static_cast<double>(h_prev), best_den = static_cast<double>(k_prev);
            if (ks >= 1 && std::abs(static_cast<double>(hs) / ks - r) <
                               std::abs(best_num / best_den - r)) {
                h_prev = hs;
                k_prev = ks;
            }
            break;
        }
        h_pprev = h_prev;
        h_prev = h;
        k_pprev = k_prev;
        k_prev = k;
        const double rem = frac - af;
        if (rem < 1e-18) break;
        frac = 1.0 / rem;
    }
    Rationalized out;
    out.num = neg ? -h_prev : h_prev;
    out.den = k_prev == 0 ? 1 : k_prev;
    out.exact = static_cast<double>(out.num) / static_cast<double>(out.den) == x;
    return out;
}

BigRational PatternProblem::sum() const {
    BigRational s = 0;
    for (const auto& c : z) s += c;
    return s;
}

BigRational PatternProblem::max_abs() const {
    BigRational s = 0;
    for (const auto& c : z) s = std::max(s, static_cast<BigRational>(abs(c)));
    return s;
}

PatternProblem make_pattern_problem(std::uint64_t n, std::uint64_t m,
                                    const std::vector<BigRational>& z) {
    if (n == 0 || m == 0) throw ValidationError("need n >= 1 and m >= 1");
    check_dim(z.size(), n, "pattern");
    PatternProblem p;
    p.n = n;
    p.m = m;
    p.z = z;
    return p;
}

PatternProblem make_pattern_problem(std::uint64_t n, std::uint64_t m, const Vec& z,
                                    std::int64_t max_den) {
    std::vector<BigRational> zq;
    zq.reserve(z.size());
    for (double c : z) {
        const Rationalized r = rationalize(c, max_den);
        zq.emplace_back(BigInt(r.num), BigInt(r.den));
    }
    return make_pattern_problem(n, m, zq);
}

BigInt binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    BigInt out = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        out *= n - k + i;
        out /= i;  // exact: every prefix is itself a binomial coefficient
    }
    return out;
}

BigInt pattern_capacity(std::uint64_t n, std::uint64_t m) {
    return binomial(m + n - 1, n - 1);
}

namespace {

void require_capacity(std::uint64_t n, std::uint64_t m) {
    const BigInt cap = pattern_capacity(n, m);
    if (cap > kCapacityLimit)
        throw CapacityError("count-vector space size " + cap.str() + " exceeds " +
                            std::to_string(kCapacityLimit));
}

// Visits every count vector c (composition of m into n parts) together with
// its multinomial weight m!/(prod c_i!), built incrementally with exact
// integer steps.
template <class Leaf>
void for_each_composition(std::uint64_t n, std::uint64_t m, Leaf&& leaf) {
    std::vector<std::uint64_t> c(n, 0);
    auto rec = [&](auto&& self, std::uint64_t i, std::uint64_t r, const BigInt& coef) -> void {
        if (i == n - 1) {
            c[i] = r;
            leaf(static_cast<const std::vector<std::uint64_t>&>(c), coef);
            return;
        }
        BigInt cur = coef;
        for (std::uint64_t k = 0;; ++k) {
            if (k > 0) {
                cur *= r - k + 1;
                cur /= k;  // exact; see binomial()
            }
            c[i] = k;
            self(self, i + 1, r - k, cur);
            if (k == r) break;
        }
    };
    rec(rec, 0, m, BigInt(1));
}

// Common-denominator integer form of the pattern, so the dot product
// <c, z> is zero iff the integer dot is.
std::vector<BigInt> scaled_pattern(const PatternProblem& p, BigInt& denom_out) {
    BigInt lcm_den = 1;
    for (const auto& zi : p.z)
        lcm_den = boost::multiprecision::lcm(lcm_den, BigInt(denominator(zi)));
    std::vector<BigInt> out;
    out.reserve(p.z.size());
    for (const auto& zi : p.z)
        out.push_back(BigInt(numerator(zi)) * (lcm_den / BigInt(denominator(zi))));
    denom_out = lcm_den;
    return out;
}

}  // namespace

BigRational zero_sum_probability(const PatternProblem& problem) {
    require_capacity(problem.n, problem.m);
    BigInt denom;
    const std::vector<BigInt> zi = scaled_pattern(problem, denom);
    BigInt hits = 0;
    for_each_composition(problem.n, problem.m,
                         [&](const std::vector<std::uint64_t>& c, const BigInt& coef) {
                             BigInt dot = 0;
                             for (std::size_t i = 0; i < c.size(); ++i)
                                 if (c[i] != 0) dot += BigInt(c[i]) * zi[i];
                             if (dot == 0) hits += coef;
                         });
    const BigInt total = boost::multiprecision::pow(BigInt(problem.n),
                                                    static_cast<unsigned>(problem.m));
    return BigRational(hits, total);
}

CombinatoricReport combinatoric_bound_check(std::uint64_t n, std::uint64_t m,
                                            const std::vector<int>& grid) {
    if (n == 0 || m == 0) throw ValidationError("need n >= 1 and m >= 1");
    if (grid.empty() || std::all_of(grid.begin(), grid.end(), [](int v) { return v == 0; }))
        throw ValidationError("grid needs a nonzero entry");
    require_capacity(n, m);

    // Family: grid^n minus zero, canonicalized by dividing out the gcd of
    // the absolute entries (positive scaling never changes the zero set).
    std::set<std::vector<int>> family;
    std::vector<std::size_t> odo(n, 0);
    const std::size_t g = grid.size();
    while (true) {
        std::vector<int> z(n);
        int common = 0;
        for (std::uint64_t i = 0; i < n; ++i) {
            z[i] = grid[odo[i]];
            common = std::gcd(common, std::abs(z[i]));
        }
        if (common > 0) {
            if (common > 1)
                for (int& v : z) v /= common;
            family.insert(std::move(z));
        }
        std::size_t pos = 0;
        while (pos < n && ++odo[pos] == g) odo[pos++] = 0;
        if (pos == n) break;
    }
    if (family.size() * static_cast<std::uint64_t>(
                            pattern_capacity(n, m).convert_to<std::uint64_t>()) >
        20 * kCapacityLimit)
        throw CapacityError("pattern family times count-vector space too large");

    CombinatoricReport report;
    report.n = n;
    report.m = m;
    const BigInt nm = boost::multiprecision::pow(BigInt(n), static_cast<unsigned>(m));
    const BigInt nm1 = boost::multiprecision::pow(BigInt(n - 1), static_cast<unsigned>(m));
    report.bound_exact = BigRational(nm1 + nm, 2 * nm);
    report.bound = 0.5 * std::pow(1.0 - 1.0 / static_cast<double>(n),
                                  static_cast<double>(m)) +
                   0.5;
    report.max_prob = 0;
    report.pass = true;
    for (const std::vector<int>& z : family) {
        std::vector<BigRational> zq(z.begin(), z.end());
        const BigRational prob = zero_sum_probability(make_pattern_problem(n, m, zq));
        CombinatoricReport::PatternRow row;
        row.z = z;
        row.prob = prob;
        row.pass = prob <= report.bound_exact;
        if (!row.pass) report.pass = false;
        if (prob > report.max_prob) {
            report.max_prob = prob;
            report.argmax = report.rows.size();
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

SmallQReport small_q_margin(const PatternProblem& problem, const std::vector<double>& q_grid) {
    require_capacity(problem.n, problem.m);
    for (double q : q_grid)
        if (!(q >= 0.0) || !std::isfinite(q))
            throw ValidationError("q grid must be nonnegative and finite");
    BigInt denom;
    const std::vector<BigInt> zi = scaled_pattern(problem, denom);

    // Aggregate multinomial mass by |<c, z>| (exact).
    std::map<BigRational, BigInt> mass;
    for_each_composition(problem.n, problem.m,
                         [&](const std::vector<std::uint64_t>& c, const BigInt& coef) {
                             BigInt dot = 0;
                             for (std::size_t i = 0; i < c.size(); ++i)
                                 if (c[i] != 0) dot += BigInt(c[i]) * zi[i];
                             mass[BigRational(abs(dot), denom)] += coef;
                         });
    const BigInt total = boost::multiprecision::pow(BigInt(problem.n),
                                                    static_cast<unsigned>(problem.m));

    SmallQReport report;
    report.n = problem.n;
    report.m = problem.m;
    report.q_grid = q_grid;
    const BigRational big_m = problem.m;
    for (double q : q_grid) {
        const BigRational cutoff = big_m * BigRational(q);  // double converts exactly
        BigInt hits = 0;
        for (const auto& [absdot, w] : mass) {
            if (absdot > cutoff) break;
            hits += w;
        }
        report.probs.emplace_back(hits, total);
    }
    report.prob_at_zero = mass.count(BigRational(0)) != 0
                              ? BigRational(mass.at(BigRational(0)), total)
                              : BigRational(0);
    for (const auto& [absdot, w] : mass) {
        if (absdot > 0) {
            report.q0 = absdot / big_m;
            report.has_q0 = true;
            break;
        }
    }
    return report;
}

ReciprocalMomentReport reciprocal_moment_bound_check(double beta, double delta, double q,
                                                     const TwoPointSpec& spec, int truncation,
                                                     std::uint64_t n_samples,
                                                     std::uint64_t seed) {
    if (!(beta > 0.0 && beta < 1.0)) throw ValidationError("beta must lie in (0,1)");
    if (!(delta > 0.0)) throw ValidationError("delta must be positive");
    if (!(q >= 0.0 && q < 1.0)) throw ValidationError("q must lie in [0,1)");
    if (q >= std::sqrt(beta))
        throw DomainError("q must stay below sqrt(beta) for the reciprocal-moment bound");
    if (!(spec.prob_small >= 0.0 && spec.prob_small <= 1.0))
        throw ValidationError("prob_small must be a probability");
    if (spec.z_small * spec.z_small < delta && spec.prob_small > q)
        throw ValidationError("two-point spec violates P(Z^2 < delta) <= q");
    if (spec.z_large * spec.z_large < delta && spec.prob_small < 1.0)
        throw ValidationError("z_large^2 must be at least delta");
    if (n_samples < 2) throw ValidationError("need at least two samples");

    const int K = truncation > 0 ? truncation : default_truncation(DampingParams(0.0, beta, 1.0));
    const double zs2 = spec.z_small * spec.z_small;
    const double zl2 = spec.z_large * spec.z_large;
    const RngStream stream(seed, "recip");
    MeanVar acc;
    for (std::uint64_t s = 0; s < n_samples; ++s) {
        CounterRng rng = stream.at(s);
        double v = 0.0, w = 1.0 - beta;
        for (int k = 0; k < K; ++k) {
            const double u = rng.next_uniform();
            v += w * (u < spec.prob_small ? zs2 : zl2);
            w *= beta;
        }
        acc.add(1.0 / std::sqrt(v));
    }

    ReciprocalMomentReport report;
    report.estimate = acc.mean();
    report.std_error = acc.std_error();
    report.bound = std::sqrt(beta / (1.0 - beta)) * (1.0 - q) / (std::sqrt(beta) - q) /
                   std::sqrt(delta);
    report.truncation = K;
    report.n_samples = n_samples;
    report.pass = report.estimate - 3.0 * report.std_error <= report.bound;
    return report;
}

void write_combinatoric_csv(const CombinatoricReport& report, std::ostream& out) {
    CsvWriter w(out);
    w.header({"n", "m", "pattern", "prob_num", "prob_den", "bound", "pass"});
    for (const auto& row : report.rows) {
        std::string id;
        for (std::size_t i = 0; i < row.z.size(); ++i) {
            if (i) id += '_';
            id += std::to_string(row.z[i]);
        }
        w.col(report.n);
        w.col(report.m);
        w.col(id);
        w.col(BigInt(numerator(row.prob)).str());
        w.col(BigInt(denominator(row.prob)).str());
        w.col(report.bound);
        w.col(row.pass);
        w.end_row();
    }
}

}  // namespace adamflow
