#ifndef ADAMFLOW_PATTERNS_HPP
#define ADAMFLOW_PATTERNS_HPP

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <ostream>
#include <vector>

#include "adamflow/vec.hpp"

namespace adamflow {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

// Best rational approximation with bounded denominator (continued
// fractions); exact is true when num/den reproduces x bit-for-bit.
struct Rationalized {
    std::int64_t num = 0;
    std::int64_t den = 1;
    bool exact = true;
};
Rationalized rationalize(double x, std::int64_t max_den = 1000000);

// M i.i.d. uniform indices over {1..N} score a pattern z by sum_k z_{I_k}.
// All probability statements about that score reduce to the count vector
// C = (how often each index was drawn), which has the multinomial law
// P(C = c) = M!/(prod_i c_i!) * N^{-M} over compositions of M into N parts.
struct PatternProblem {
    std::uint64_t n = 0;  // alphabet size
    std::uint64_t m = 0;  // number of draws
    std::vector<BigRational> z;

    BigRational sum() const;
    BigRational max_abs() const;
};
PatternProblem make_pattern_problem(std::uint64_t n, std::uint64_t m,
                                    const std::vector<BigRational>& z);
// Doubles are rationalized with denominators <= max_den.
PatternProblem make_pattern_problem(std::uint64_t n, std::uint64_t m, const Vec& z,
                                    std::int64_t max_den = 1000000);

BigInt binomial(std::uint64_t n, std::uint64_t k);

// Number of count vectors, C(M+N-1, N-1); enumeration refuses to run past
// kCapacityLimit (CapacityError).
inline constexpr std::uint64_t kCapacityLimit = 1000000;
BigInt pattern_capacity(std::uint64_t n, std::uint64_t m);

// Exact P(sum_k z_{I_k} = 0) by enumerating count vectors; the zero test on
// <c, z> is exact rational arithmetic.
BigRational zero_sum_probability(const PatternProblem& problem);

// Exact zero-hit bound sweep over a finite family of integer patterns:
// every z with entries from `grid`, z != 0, deduplicated up to positive
// scaling (division by the gcd of the absolute entries). Verifies
//   P(sum z_{I_k} = 0) <= (1/2)(1 - 1/N)^M + 1/2
// for every member. The certificate covers the enumerated family only,
// never the continuum of real patterns.
struct CombinatoricReport {
    struct PatternRow {
        std::vector<int> z;
        BigRational prob;
        bool pass = false;
    };
    std::uint64_t n = 0, m = 0;
    BigRational bound_exact;  // ((N-1)^M + N^M) / (2 N^M)
    double bound = 0.0;
    std::vector<PatternRow> rows;
    BigRational max_prob;
    std::size_t argmax = 0;
    bool pass = false;
    bool grid_certificate_only = true;
};
CombinatoricReport combinatoric_bound_check(std::uint64_t n, std::uint64_t m,
                                            const std::vector<int>& grid = {-2, -1, 0, 1, 2});

// Exact P(|sum_k x_{I_k}| <= M q) for each q on a grid, plus the smallest
// positive attainable |<c, x>|/M: probabilities at any q below that margin
// equal the q = 0 value.
struct SmallQReport {
    std::uint64_t n = 0, m = 0;
    std::vector<double> q_grid;
    std::vector<BigRational> probs;
    BigRational prob_at_zero;
    BigRational q0;  // meaningful only when has_q0
    bool has_q0 = false;
};
SmallQReport small_q_margin(const PatternProblem& problem, const std::vector<double>& q_grid);

// Two-point magnitude law: Z = z_small w.p. prob_small, else z_large.
struct TwoPointSpec {
    double z_small = 0.0;
    double z_large = 1.0;
    double prob_small = 0.0;
};

// Monte Carlo check of the reciprocal-moment bound for the discounted
// second-moment average v_K = (1-beta) sum_{k<K} beta^k Z_k^2 of an i.i.d.
// magnitude sequence with P(Z^2 < delta) <= q:
//   E[v_K^{-1/2}] <= sqrt(beta/(1-beta)) * (1-q)/(sqrt(beta)-q) / sqrt(delta).
// Requires q < sqrt(beta); pass iff estimate - 3 SE <= bound.
struct ReciprocalMomentReport {
    double estimate = 0.0;
    double std_error = 0.0;
    double bound = 0.0;
    int truncation = 0;
    std::uint64_t n_samples = 0;
    bool pass = false;
};
ReciprocalMomentReport reciprocal_moment_bound_check(double beta, double delta, double q,
                                                     const TwoPointSpec& spec, int truncation,
                                                     std::uint64_t n_samples,
                                                     std::uint64_t seed);

// Columns: n, m, pattern (entries joined by '_'), prob_num, prob_den,
// bound, pass.
void write_combinatoric_csv(const CombinatoricReport& report, std::ostream& out);

}  // namespace adamflow

#endif
