#pragma once

// Stein unbiased risk estimates.
//
// sure_generic is the unnormalized form -n + ||y - est||^2 + 2 div. Every
// estimator-specific SURE below is normalized by n.

#include <functional>
#include <span>
#include <vector>

#include "ebshrink/denoisers.hpp"

namespace ebshrink {

using Denoiser = std::function<std::vector<double>(std::span<const double>)>;

double sure_generic(std::span<const double> y, std::span<const double> estimate,
                    double divergence);

/// Central-difference trace of the Jacobian. The full estimator is
/// re-evaluated for each of the 2n perturbations, so data-dependent global
/// statistics are differentiated through.
double divergence_fd(const Denoiser& denoiser, std::span<const double> y, double h);

double sure_soft_threshold(std::span<const double> y, double lambda);

/// Closed-form SURE of the zero-location eBayes estimator. The last three
/// terms are O(1/n) and may be dropped with include_small_terms = false.
double sure_ebayes_zero_location(std::span<const double> y, double epsilon,
                                 bool include_small_terms = true);

/// Exact sum_i d(theta_i)/d(y_i) of the eBayes estimator, including the
/// dependence of mu_hat and xi2_hat on y.
double ebayes_divergence(std::span<const double> y, const EbParams& params);

/// SURE of the general (estimated location) eBayes estimator.
double sure_ebayes_general(std::span<const double> y, double epsilon);

/// Dispatches on params.zero_location.
double sure_ebayes(std::span<const double> y, const EbParams& params,
                   bool include_small_terms = true);

}  // namespace ebshrink
