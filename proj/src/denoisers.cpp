#include "ebshrink/denoisers.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ebshrink/errors.hpp"
#include "ebshrink/model.hpp"

namespace ebshrink {

double softplus(double x) noexcept {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double logistic(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double EbStatistics::exponent(double y) const noexcept {
    const double centered = y - mu_hat;
    return -0.5 * y * y + centered * centered / (2.0 * d_y);
}

void validate(const SoftThresholdParams& params) {
    if (!(params.lambda >= 0.0) || !std::isfinite(params.lambda)) {
        throw ParameterError("soft-threshold lambda must be finite and >= 0");
    }
}

void validate(const EbParams& params) {
    if (!(params.epsilon > 0.0 && params.epsilon <= 1.0)) {
        throw ParameterError("eBayes epsilon must lie in (0, 1], got " +
                             std::to_string(params.epsilon));
    }
}

double soft_threshold(double y, double lambda) noexcept {
    if (y > lambda) return y - lambda;
    if (y < -lambda) return y + lambda;
    return 0.0;
}

std::vector<double> soft_threshold(std::span<const double> y, double lambda) {
    validate(SoftThresholdParams{lambda});
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = soft_threshold(y[i], lambda);
    return out;
}

EbStatistics eb_statistics(std::span<const double> y, const EbParams& params) {
    validate(params);
    if (y.empty()) throw DimensionError("eb_statistics: empty observation");

    const double eps = params.epsilon;
    const double n = static_cast<double>(y.size());
    const double first = mean(y);
    const double second = sum_of_squares(y) / n;

    EbStatistics s;
    s.epsilon = eps;
    s.zero_location = params.zero_location;
    if (params.zero_location) {
        s.mu_hat = 0.0;
        s.xi2_hat = std::max(second - 1.0, 0.0) / eps;
    } else {
        s.mu_hat = first / eps;
        s.xi2_hat = std::max(second - first * first / eps - 1.0, 0.0) / eps;
    }
    s.d_y = 1.0 + s.xi2_hat;
    s.a_y = s.xi2_hat / s.d_y;
    s.c_y = (1.0 - eps) / eps * std::sqrt(s.d_y);
    s.log_c = eps == 1.0 ? -std::numeric_limits<double>::infinity()
                         : std::log1p(-eps) - std::log(eps) + 0.5 * std::log(s.d_y);

    s.b.resize(y.size());
    s.inv_b.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double log_term = s.log_c + s.exponent(y[i]);
        s.b[i] = std::exp(softplus(log_term));
        s.inv_b[i] = logistic(-log_term);
    }
    return s;
}

std::vector<double> ebayes(std::span<const double> y, const EbStatistics& stats) {
    if (stats.inv_b.size() != y.size()) {
        throw DimensionError("ebayes: statistics computed for a different length");
    }
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double numerator = stats.mu_hat + stats.a_y * (y[i] - stats.mu_hat);
        out[i] = numerator * stats.inv_b[i];
    }
    return out;
}

std::vector<double> ebayes(std::span<const double> y, const EbParams& params) {
    return ebayes(y, eb_statistics(y, params));
}

std::vector<double> lindley_positive_part(std::span<const double> y) {
    if (y.size() < 4) {
        throw DimensionError("lindley_positive_part needs n >= 4, got n = " +
                             std::to_string(y.size()));
    }
    const double center = mean(y);
    double spread = 0.0;
    for (double v : y) spread += (v - center) * (v - center);
    const double n = static_cast<double>(y.size());
    const double factor = spread > 0.0 ? std::max(1.0 - (n - 3.0) / spread, 0.0) : 0.0;

    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = center + factor * (y[i] - center);
    return out;
}

}  // namespace ebshrink
