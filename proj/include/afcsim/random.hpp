#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace afcsim {

/// Seed for the stream `name` (optionally sub-indexed) under a master seed.
/// Distinct names give statistically independent streams, so adding draws to
/// one module never shifts another module's sequence.
std::uint64_t derive_seed(std::uint64_t master, std::string_view name, std::uint64_t index = 0);

class RandomStream {
public:
    RandomStream() = default;
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
    RandomStream(std::uint64_t master, std::string_view name, std::uint64_t index = 0)
        : engine_(derive_seed(master, name, index)) {}

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    bool bernoulli(double p) { return uniform() < p; }
    double exponential(double mean) { return std::exponential_distribution<double>(1.0 / mean)(engine_); }
    std::uint64_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        return std::poisson_distribution<std::uint64_t>(mean)(engine_);
    }
    int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_{};
};

}  // namespace afcsim
