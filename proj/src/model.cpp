#include "ebshrink/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "ebshrink/errors.hpp"
#include "ebshrink/rng.hpp"

namespace ebshrink {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string format_number(double x) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, end);
}

double parse_number(std::string_view text) {
    double value = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    if (!text.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw ParameterError("not a number: '" + std::string(text) + "'");
    }
    return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        parts.push_back(text.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

double draw_nonzero(const SignalFamily& family, Rng& rng, std::size_t index_in_support,
                    std::size_t k) {
    return std::visit(
        overloaded{
            [&](const HalfPlusMinus& f) {
                // First ceil(k/2) chosen positions get +value.
                return index_in_support < (k + 1) / 2 ? f.value : -f.value;
            },
            [&](const AllConstant& f) { return f.value; },
            [&](const GaussianNonzeros& f) {
                double x = 0.0;
                do {
                    x = std::sqrt(f.variance) * rng.normal();
                } while (x == 0.0);
                return x;
            },
            [&](const LaplaceNonzeros& f) {
                const double scale = std::sqrt(f.variance / 2.0);
                const double u = rng.uniform_open() - 0.5;
                double x = -scale * std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u));
                return x == 0.0 ? scale : x;
            },
            [&](const RademacherNonzeros&) { return rng.uniform() < 0.5 ? 1.0 : -1.0; },
            [&](const UniformNonzeros& f) {
                double x = 0.0;
                do {
                    x = f.lo + (f.hi - f.lo) * rng.uniform();
                } while (x == 0.0);
                return x;
            },
        },
        family);
}

}  // namespace

void validate(const SignalFamily& family) {
    std::visit(overloaded{
                   [](const HalfPlusMinus& f) {
                       if (!std::isfinite(f.value) || f.value == 0.0)
                           throw ParameterError("halfpm value must be finite and nonzero");
                   },
                   [](const AllConstant& f) {
                       if (!std::isfinite(f.value) || f.value == 0.0)
                           throw ParameterError("const value must be finite and nonzero");
                   },
                   [](const GaussianNonzeros& f) {
                       if (!(f.variance > 0.0) || !std::isfinite(f.variance))
                           throw ParameterError("gaussian variance must be positive");
                   },
                   [](const LaplaceNonzeros& f) {
                       if (!(f.variance > 0.0) || !std::isfinite(f.variance))
                           throw ParameterError("laplace variance must be positive");
                   },
                   [](const RademacherNonzeros&) {},
                   [](const UniformNonzeros& f) {
                       if (!(f.lo < f.hi) || !std::isfinite(f.lo) || !std::isfinite(f.hi))
                           throw ParameterError("uniform bounds must satisfy lo < hi");
                   },
               },
               family);
}

std::string to_string(const SignalFamily& family) {
    return std::visit(
        overloaded{
            [](const HalfPlusMinus& f) { return "halfpm:" + format_number(f.value); },
            [](const AllConstant& f) { return "const:" + format_number(f.value); },
            [](const GaussianNonzeros& f) { return "gauss:" + format_number(f.variance); },
            [](const LaplaceNonzeros& f) { return "laplace:" + format_number(f.variance); },
            [](const RademacherNonzeros&) { return std::string("rademacher"); },
            [](const UniformNonzeros& f) {
                return "uniform:" + format_number(f.lo) + ":" + format_number(f.hi);
            },
        },
        family);
}

SignalFamily parse_family(std::string_view text) {
    const auto parts = split(text, ':');
    const auto name = parts.front();
    auto expect_args = [&](std::size_t count) {
        if (parts.size() != count + 1) {
            throw ParameterError("signal family '" + std::string(name) + "' takes " +
                                 std::to_string(count) + " parameter(s)");
        }
    };
    SignalFamily family;
    if (name == "halfpm") {
        expect_args(1);
        family = HalfPlusMinus{parse_number(parts[1])};
    } else if (name == "const") {
        expect_args(1);
        family = AllConstant{parse_number(parts[1])};
    } else if (name == "gauss") {
        expect_args(1);
        family = GaussianNonzeros{parse_number(parts[1])};
    } else if (name == "laplace") {
        expect_args(1);
        family = LaplaceNonzeros{parse_number(parts[1])};
    } else if (name == "rademacher") {
        expect_args(0);
        family = RademacherNonzeros{};
    } else if (name == "uniform") {
        expect_args(2);
        family = UniformNonzeros{parse_number(parts[1]), parse_number(parts[2])};
    } else {
        throw ParameterError("unknown signal family '" + std::string(name) +
                             "' (expected halfpm, const, gauss, laplace, rademacher, uniform)");
    }
    validate(family);
    return family;
}

double fourth_moment_bound(const SignalFamily& family) {
    const double bound = std::visit(
        overloaded{
            [](const HalfPlusMinus& f) { return std::pow(f.value, 4); },
            [](const AllConstant& f) { return std::pow(f.value, 4); },
            [](const GaussianNonzeros& f) { return 3.0 * f.variance * f.variance; },
            [](const LaplaceNonzeros& f) { return 6.0 * f.variance * f.variance; },
            [](const RademacherNonzeros&) { return 1.0; },
            [](const UniformNonzeros& f) { return std::pow(f.hi, 4) + std::pow(f.lo, 4); },
        },
        family);
    return bound + 1.0;
}

std::size_t nonzero_count(std::size_t n, double eta) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw ParameterError("eta must lie in [0, 1]");
    const auto k = static_cast<std::size_t>(std::floor(eta * static_cast<double>(n) + 0.5));
    return std::min(k, n);
}

Signal generate_signal(const SignalSpec& spec) {
    if (spec.n == 0) throw ParameterError("signal length must be positive");
    validate(spec.family);
    const std::size_t k = nonzero_count(spec.n, spec.eta);

    Rng rng(spec.seed, Stream::Signal);

    // Partial Fisher-Yates: the first k entries of `positions` form the support.
    std::vector<std::size_t> positions(spec.n);
    std::iota(positions.begin(), positions.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(spec.n - i));
        std::swap(positions[i], positions[j]);
    }

    Signal signal;
    signal.values.assign(spec.n, 0.0);
    signal.eta = spec.eta;
    signal.family = spec.family;
    for (std::size_t i = 0; i < k; ++i) {
        signal.values[positions[i]] = draw_nonzero(spec.family, rng, i, k);
    }
    return signal;
}

Observation observe(const Signal& signal, std::uint64_t seed) {
    Rng rng(seed, Stream::Noise);
    Observation obs;
    obs.y.resize(signal.size());
    for (std::size_t i = 0; i < signal.size(); ++i) {
        obs.y[i] = signal.values[i] + rng.normal();
    }
    return obs;
}

double squared_loss(std::span<const double> theta, std::span<const double> estimate) {
    if (theta.size() != estimate.size()) {
        throw DimensionError("squared_loss: length " + std::to_string(estimate.size()) +
                             " estimate against length " + std::to_string(theta.size()) +
                             " signal");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double diff = estimate[i] - theta[i];
        total += diff * diff;
    }
    return total;
}

double sum_of_squares(std::span<const double> v) noexcept {
    double total = 0.0;
    for (double x : v) total += x * x;
    return total;
}

double mean(std::span<const double> v) noexcept {
    if (v.empty()) return 0.0;
    double total = 0.0;
    for (double x : v) total += x;
    return total / static_cast<double>(v.size());
}

}  // namespace ebshrink
