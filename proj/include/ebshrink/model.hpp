#pragma once

// Sparse signals, noisy observations and squared-error loss.
//
// Everything here assumes unit noise variance; observations with a known
// noise level sigma are handled by rescaling (see amp.hpp).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ebshrink {

/// Half the nonzeros equal +value, the rest -value.
struct HalfPlusMinus {
    double value = 3.0;
};

/// Every nonzero equals value.
struct AllConstant {
    double value = 3.0;
};

struct GaussianNonzeros {
    double variance = 1.0;
};

/// Zero-mean Laplace with the given variance (scale sqrt(variance / 2)).
struct LaplaceNonzeros {
    double variance = 2.0;
};

/// Equiprobable +1 / -1.
struct RademacherNonzeros {};

struct UniformNonzeros {
    double lo = -1.0;
    double hi = 1.0;
};

using SignalFamily = std::variant<HalfPlusMinus, AllConstant, GaussianNonzeros, LaplaceNonzeros,
                                  RademacherNonzeros, UniformNonzeros>;

/// Throws ParameterError for a non-positive variance or lo >= hi.
void validate(const SignalFamily& family);

/// Compact textual form, e.g. "halfpm:3", "laplace:2", "uniform:-1:1".
std::string to_string(const SignalFamily& family);

/// Inverse of to_string. Throws ParameterError on unknown names or bad
/// parameters.
SignalFamily parse_family(std::string_view text);

/// Upper bound Lambda on (1/n) sum theta_i^4 for signals of this family,
/// including a unit allowance for sampling fluctuation.
double fourth_moment_bound(const SignalFamily& family);

struct SignalSpec {
    std::size_t n = 0;
    double eta = 0.0;
    SignalFamily family = HalfPlusMinus{};
    std::uint64_t seed = 0;
};

struct Signal {
    std::vector<double> values;
    double eta = 0.0;
    SignalFamily family = HalfPlusMinus{};

    std::size_t size() const noexcept { return values.size(); }
    std::span<const double> view() const noexcept { return values; }
};

struct Observation {
    std::vector<double> y;

    std::size_t size() const noexcept { return y.size(); }
    std::span<const double> view() const noexcept { return y; }
};

/// Per-trial record of one estimator's normalized loss and SURE.
struct RiskReport {
    std::string estimator;
    double loss = 0.0;
    double sure = 0.0;
    double parameter = 0.0;
};

/// round(eta * n) with halves rounded up.
std::size_t nonzero_count(std::size_t n, double eta);

/// Draws a signal with exactly nonzero_count(n, eta) nonzeros on a support
/// chosen uniformly without replacement. Pure function of the spec.
Signal generate_signal(const SignalSpec& spec);

/// y = theta + w, w i.i.d. N(0, 1) drawn from the noise stream of seed.
Observation observe(const Signal& signal, std::uint64_t seed);

/// ||estimate - theta||^2 (not normalized).
double squared_loss(std::span<const double> theta, std::span<const double> estimate);

inline double squared_loss(const Signal& theta, std::span<const double> estimate) {
    return squared_loss(theta.view(), estimate);
}

double sum_of_squares(std::span<const double> v) noexcept;

double mean(std::span<const double> v) noexcept;

}  // namespace ebshrink
