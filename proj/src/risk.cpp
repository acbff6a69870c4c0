#include "ebshrink/risk.hpp"

#include <cmath>
#include <string>

#include "ebshrink/errors.hpp"
#include "ebshrink/model.hpp"

namespace ebshrink {

double sure_generic(std::span<const double> y, std::span<const double> estimate,
                    double divergence) {
    if (y.size() != estimate.size()) {
        throw DimensionError("sure_generic: estimate length " + std::to_string(estimate.size()) +
                             " != observation length " + std::to_string(y.size()));
    }
    return -static_cast<double>(y.size()) + squared_loss(y, estimate) + 2.0 * divergence;
}

double divergence_fd(const Denoiser& denoiser, std::span<const double> y, double h) {
    if (!(h > 0.0)) throw ParameterError("divergence_fd: step must be positive");
    std::vector<double> probe(y.begin(), y.end());
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        probe[i] = y[i] + h;
        const double up = denoiser(probe).at(i);
        probe[i] = y[i] - h;
        const double down = denoiser(probe).at(i);
        probe[i] = y[i];
        total += (up - down) / (2.0 * h);
    }
    return total;
}

double sure_soft_threshold(std::span<const double> y, double lambda) {
    validate(SoftThresholdParams{lambda});
    const double n = static_cast<double>(y.size());
    double residual = 0.0;
    std::size_t active = 0;
    for (double v : y) {
        const double r = v - soft_threshold(v, lambda);
        residual += r * r;
        if (v * v > lambda * lambda) ++active;
    }
    return -1.0 + residual / n + 2.0 * static_cast<double>(active) / n;
}

double sure_ebayes_zero_location(std::span<const double> y, double epsilon,
                                 bool include_small_terms) {
    const EbStatistics s = eb_statistics(y, EbParams{epsilon, true});
    const double n = static_cast<double>(y.size());
    const double a = s.a_y;
    const double c = s.c_y;
    const double d = s.d_y;
    const double eps = epsilon;

    double sum_quadratic = 0.0;  // y^2 (1 + 2 c e) / b^2
    double sum_linear = 0.0;     // (y^2 - 1) / b
    double sum_y2_b = 0.0;       // y^2 / b
    double sum_y4_e = 0.0;       // y^4 e / b^2
    double sum_y2_e = 0.0;       // y^2 e / b^2
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double y2 = y[i] * y[i];
        const double e = std::exp(-0.5 * a * y2);
        const double inv_b = s.inv_b[i];
        const double inv_b2 = inv_b * inv_b;
        sum_quadratic += y2 * (1.0 + 2.0 * c * e) * inv_b2;
        sum_linear += (y2 - 1.0) * inv_b;
        sum_y2_b += y2 * inv_b;
        sum_y4_e += y2 * y2 * e * inv_b2;
        sum_y2_e += y2 * e * inv_b2;
    }

    const double second = sum_of_squares(y) / n;
    double sure = (second - 1.0) + a * a / n * sum_quadratic - 2.0 * a / n * sum_linear;
    if (include_small_terms) {
        const double n2 = n * n;
        const double indicator = second > 1.0 ? 1.0 : 0.0;
        sure += 4.0 / (d * d * eps * n2) * sum_y2_b * indicator;
        sure += 2.0 * (1.0 - eps) * a / (std::pow(d, 1.5) * eps * eps * n2) * sum_y4_e;
        sure -= 2.0 * (1.0 - eps) * a / (std::sqrt(d) * eps * eps * n2) * sum_y2_e;
    }
    return sure;
}

double ebayes_divergence(std::span<const double> y, const EbParams& params) {
    const EbStatistics s = eb_statistics(y, params);
    const double n = static_cast<double>(y.size());
    const double eps = params.epsilon;
    const double first = mean(y);
    const double second = sum_of_squares(y) / n;

    // The clamp in xi2_hat is inactive iff this is positive.
    const double spread = params.zero_location ? second - 1.0 : second - first * first / eps - 1.0;
    const bool scale_active = spread > 0.0;
    const double d_mu = params.zero_location ? 0.0 : 1.0 / (n * eps);

    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double yi = y[i];
        const double centered = yi - s.mu_hat;

        double d_spread = 2.0 * yi / n;
        if (!params.zero_location) d_spread -= 2.0 * first / (n * eps);
        const double d_d = scale_active ? d_spread / eps : 0.0;
        const double d_a = d_d / (s.d_y * s.d_y);

        const double numerator = s.mu_hat + s.a_y * centered;
        const double d_numerator = d_mu + d_a * centered + s.a_y * (1.0 - d_mu);

        const double d_exponent = -yi + centered * (1.0 - d_mu) / s.d_y -
                                  centered * centered * d_d / (2.0 * s.d_y * s.d_y);
        const double d_log_c = d_d / (2.0 * s.d_y);
        const double weight = logistic(s.log_c + s.exponent(yi));  // c e^E / b

        total += s.inv_b[i] * (d_numerator - numerator * weight * (d_log_c + d_exponent));
    }
    return total;
}

double sure_ebayes_general(std::span<const double> y, double epsilon) {
    const EbParams params{epsilon, false};
    const auto estimate = ebayes(y, params);
    const double divergence = ebayes_divergence(y, params);
    return sure_generic(y, estimate, divergence) / static_cast<double>(y.size());
}

double sure_ebayes(std::span<const double> y, const EbParams& params, bool include_small_terms) {
    return params.zero_location ? sure_ebayes_zero_location(y, params.epsilon, include_small_terms)
                                : sure_ebayes_general(y, params.epsilon);
}

}  // namespace ebshrink
