// Seedable random stream with text serialization for checkpoints.
#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

#include "hyperfc/core/error.hpp"

namespace hyperfc {

/// SplitMix64 finalizer; derives independent child seeds from (seed, stream).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Thin wrapper over mt19937_64. Distributions are constructed per draw so the
/// engine state alone captures the full stream position.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }

    /// Inclusive integer range.
    int uniform_int(int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(engine_);
    }

    double normal(double mean = 0.0, double sd = 1.0) {
        if (sd == 0.0) return mean;
        return std::normal_distribution<double>(mean, sd)(engine_);
    }

    std::uint64_t next_u64() { return engine_(); }

    std::mt19937_64& engine() { return engine_; }

    std::string serialize() const {
        std::ostringstream os;
        os << engine_;
        return os.str();
    }

    static Rng deserialize(const std::string& text) {
        Rng rng;
        std::istringstream is(text);
        is >> rng.engine_;
        if (is.fail()) throw IoError("corrupt RNG state");
        return rng;
    }

    friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace hyperfc
