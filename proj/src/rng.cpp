#include "pmf/rng.hpp"

#include <cstring>

#include "pmf/detmath.hpp"

namespace pmf {

namespace {

constexpr std::uint64_t kM0 = 0xD2E7470EE14C6C93ull;
constexpr std::uint64_t kM1 = 0xCA5A826395121157ull;
constexpr std::uint64_t kW0 = 0x9E3779B97F4A7C15ull;
constexpr std::uint64_t kW1 = 0xBB67AE8584CAA73Bull;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
    unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(p >> 64);
    lo = static_cast<std::uint64_t>(p);
}

}  // namespace

std::array<std::uint64_t, 4> philox4x64(const std::array<std::uint64_t, 4>& ctr, const Key& key) {
    auto c = ctr;
    std::uint64_t k0 = key.lo, k1 = key.hi;
    for (int r = 0; r < 10; ++r) {
        std::uint64_t hi0, lo0, hi1, lo1;
        mulhilo(kM0, c[0], hi0, lo0);
        mulhilo(kM1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
        k0 += kW0;
        k1 += kW1;
    }
    return c;
}

Key split_key(const Key& parent, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    auto out = philox4x64({a, b, c, 1}, parent);
    return Key{out[0], out[1]};
}

Key seed_key(std::uint64_t seed) { return split_key(Key{0x706d662d726f6f74ull, 0x2d6b65792d763100ull}, seed); }

std::uint64_t double_bits(double v) {
    if (v == 0) v = 0;
    std::uint64_t u;
    std::memcpy(&u, &v, sizeof u);
    return u;
}

std::uint64_t RngStream::next_u64() {
    std::uint64_t block = counter_ >> 2;
    if (block != cachedBlock_) {
        cache_ = philox4x64({block, 0, 0, 0}, key_);
        cachedBlock_ = block;
    }
    return cache_[counter_++ & 3];
}

double RngStream::uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

double RngStream::exponential() { return -detmath::log(uniform()); }

std::uint64_t RngStream::below(std::uint64_t n) {
    if (n <= 1) return 0;
    std::uint64_t limit = ~0ull - (~0ull % n);
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

std::uint64_t RngStream::poisson(double mean) {
    if (!(mean > 0)) return 0;
    std::uint64_t total = 0;
    while (mean > 500.0) {
        total += poisson(500.0);
        mean -= 500.0;
    }
    double p = detmath::exp(-mean);
    double f = p;
    double u = uniform();
    std::uint64_t k = 0;
    while (u > f && k < 100000) {
        ++k;
        p *= mean / static_cast<double>(k);
        f += p;
        if (p == 0 && f < u) break;
    }
    return total + k;
}

}  // namespace pmf
