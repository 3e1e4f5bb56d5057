#include "adamflow/rng.hpp"

#include <cmath>

namespace adamflow {
namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// splitmix64 finalizer (Stafford mix13): full-avalanche 64-bit permutation.
std::uint64_t mix64(std::uint64_t x) {
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_name(std::uint64_t h, std::string_view name) {
    // FNV-1a over the name, folded into the running key.
    std::uint64_t f = 0xcbf29ce484222325ULL;
    for (unsigned char c : name) {
        f ^= c;
        f *= 0x100000001b3ULL;
    }
    return mix64(h ^ f);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t key, std::uint64_t index)
    : base_(mix64(key ^ mix64(index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL))) {}

std::uint64_t CounterRng::next_u64() {
    return mix64(base_ + (word_++) * kGolden);
}

double CounterRng::next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::next_gaussian() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // Box-Muller; u1 nudged away from 0 so the log is finite.
    double u1 = next_uniform();
    const double u2 = next_uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

std::uint64_t CounterRng::next_below(std::uint64_t n) {
    if (n == 0) return 0;
    // Rejection sampling over the largest multiple of n below 2^64.
    const std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % n);
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

RngStream::RngStream(std::uint64_t root_seed, std::string_view name)
    : key_(hash_name(mix64(root_seed), name)) {}

RngStream RngStream::child(std::string_view name) const {
    return RngStream(hash_name(key_, name));
}

RngStream RngStream::child(std::uint64_t index) const {
    return RngStream(mix64(key_ ^ mix64(index + 0x6a09e667f3bcc909ULL)));
}

}  // namespace adamflow
