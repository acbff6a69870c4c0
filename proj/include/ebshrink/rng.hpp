#pragma once

// Seedable random streams shared by every Monte Carlo path.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. Distributions are implemented here (not via <random>
// distribution classes, whose algorithms are implementation-defined), so a
// seed reproduces the same numbers with any conforming standard library.
//
// Seeding rule: the engine is seeded with mix64(seed ^ mix64(stream)), so the
// signal, noise and matrix draws that share one user seed are decorrelated.
// Parallel trials use trial_seed(base, i) = base ^ i.

#include <cstdint>
#include <random>

namespace ebshrink {

enum class Stream : std::uint64_t {
    Signal = 1,
    Noise = 2,
    Matrix = 3,
    MeasurementNoise = 4,
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

constexpr std::uint64_t trial_seed(std::uint64_t base, std::uint64_t trial) noexcept {
    return base ^ trial;
}

class Rng {
public:
    Rng(std::uint64_t seed, Stream stream);

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();

    /// Uniform on (0, 1).
    double uniform_open();

    /// Standard normal via the Box-Muller transform; values are produced in
    /// pairs and the second one is cached.
    double normal();

    /// Uniform integer in [0, bound) by rejection; bound must be positive.
    std::uint64_t below(std::uint64_t bound);

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace ebshrink
