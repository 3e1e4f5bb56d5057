#ifndef ADAMFLOW_RNG_HPP
#define ADAMFLOW_RNG_HPP

#include <cstdint>
#include <string_view>

namespace adamflow {

// Counter-based generator: every 64-bit word is a pure function of
// (stream key, draw index, word position), so a draw at absolute index k is
// reproducible in isolation and two evaluations at the same index see the
// same underlying randomness. That is what lets coupled re-evaluations
// (same U, different theta) and absolute-index shadow streams work.
class CounterRng {
public:
    CounterRng(std::uint64_t key, std::uint64_t index);

    std::uint64_t next_u64();
    // Uniform on [0, 1), 53-bit resolution.
    double next_uniform();
    // Standard normal via Box-Muller; pairs of uniforms, spare cached.
    double next_gaussian();
    // Uniform on {0, ..., n-1} without modulo bias.
    std::uint64_t next_below(std::uint64_t n);

private:
    std::uint64_t base_;
    std::uint64_t word_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// A named stream derived from (root seed, name). Distinct names give
// statistically independent streams; adding a stream never perturbs others.
class RngStream {
public:
    RngStream(std::uint64_t root_seed, std::string_view name);

    // Generator for draw #index of this stream.
    CounterRng at(std::uint64_t index) const { return CounterRng(key_, index); }
    std::uint64_t key() const { return key_; }

    // Child stream, e.g. per-worker or per-replicate substreams.
    RngStream child(std::string_view name) const;
    RngStream child(std::uint64_t index) const;

private:
    explicit RngStream(std::uint64_t key) : key_(key) {}
    std::uint64_t key_;
};

}  // namespace adamflow

#endif
