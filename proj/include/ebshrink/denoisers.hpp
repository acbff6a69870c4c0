#pragma once

// Soft-thresholding, the Bernoulli-Gaussian empirical Bayes estimator and
// the positive-part Lindley estimator, all for unit-variance noise.

#include <span>
#include <vector>

namespace ebshrink {

struct SoftThresholdParams {
    double lambda = 0.0;
};

/// epsilon is the prior mixture weight in (0, 1]. zero_location pins the
/// prior location estimate to 0.
struct EbParams {
    double epsilon = 1.0;
    bool zero_location = false;
};

/// Data-dependent quantities of the eBayes estimator.
///
///   mu_hat  = mean(y) / eps                  (0 with zero_location)
///   xi2_hat = (1/eps)(mean(y^2) - mean(y)^2/eps - 1)_+
///             (1/eps)(mean(y^2) - 1)_+       with zero_location
///   d_y = 1 + xi2_hat,  a_y = xi2_hat / d_y,  c_y = ((1-eps)/eps) sqrt(d_y)
///   b_i = 1 + c_y exp(-y_i^2/2 + (y_i - mu_hat)^2 / (2 d_y))
///
/// With mu_hat = 0 the exponent is -a_y y_i^2 / 2. The estimate is
/// (mu_hat + a_y (y_i - mu_hat)) / b_i. b_i is evaluated in log space, and
/// inv_b keeps 1/b_i accurate when b_i overflows.
struct EbStatistics {
    double epsilon = 1.0;
    bool zero_location = false;
    double mu_hat = 0.0;
    double xi2_hat = 0.0;
    double a_y = 0.0;
    double d_y = 1.0;
    double c_y = 0.0;
    double log_c = 0.0;  // log(c_y); -inf when epsilon == 1
    std::vector<double> b;
    std::vector<double> inv_b;

    /// -y^2/2 + (y - mu_hat)^2 / (2 d_y)
    double exponent(double y) const noexcept;
};

void validate(const SoftThresholdParams& params);
void validate(const EbParams& params);

double soft_threshold(double y, double lambda) noexcept;

std::vector<double> soft_threshold(std::span<const double> y, double lambda);

inline std::vector<double> soft_threshold(std::span<const double> y,
                                          const SoftThresholdParams& params) {
    return soft_threshold(y, params.lambda);
}

EbStatistics eb_statistics(std::span<const double> y, const EbParams& params);

std::vector<double> ebayes(std::span<const double> y, const EbParams& params);

/// Estimate from precomputed statistics (same y they were computed on).
std::vector<double> ebayes(std::span<const double> y, const EbStatistics& stats);

/// mean(y) + (1 - (n-3)/||y - mean(y)||^2)_+ (y - mean(y)); requires n >= 4.
std::vector<double> lindley_positive_part(std::span<const double> y);

/// log(1 + exp(x)) without overflow.
double softplus(double x) noexcept;

/// 1 / (1 + exp(-x)) without overflow.
double logistic(double x) noexcept;

}  // namespace ebshrink
