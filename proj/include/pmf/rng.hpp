#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

namespace pmf {

struct Key {
    std::uint64_t hi = 0, lo = 0;
    auto operator<=>(const Key&) const = default;
};

std::array<std::uint64_t, 4> philox4x64(const std::array<std::uint64_t, 4>& ctr, const Key& key);

// Child key derivation; the fourth counter word separates splits from draws.
Key split_key(const Key& parent, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);
Key seed_key(std::uint64_t seed);
std::uint64_t double_bits(double v);

struct DrawRecord {
    Key key;
    std::uint64_t count = 0;
};

class RngStream {
public:
    RngStream() = default;
    explicit RngStream(Key k, std::uint64_t counter = 0) : key_(k), counter_(counter) {}

    const Key& key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

    std::uint64_t next_u64();
    // Uniform on the open interval (0, 1).
    double uniform();
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    double exponential();
    std::uint64_t poisson(double mean);
    std::uint64_t below(std::uint64_t n);

    RngStream split(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
        return RngStream(split_key(key_, a, b, c));
    }

private:
    Key key_;
    std::uint64_t counter_ = 0;
    std::uint64_t cachedBlock_ = ~0ull;
    std::array<std::uint64_t, 4> cache_{};
};

}  // namespace pmf
