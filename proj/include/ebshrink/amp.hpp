#pragma once

// Approximate message passing for y = A theta + w with a soft-threshold,
// eBayes or hybrid denoiser tuned every iteration by minimizing ||z_t||^2/m
// over a parameter grid.
//
// The unit-noise denoisers are adapted to effective noise level tau by
// rescaling: f_tau(u) = tau * f_1(u / tau).

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ebshrink/denoisers.hpp"
#include "ebshrink/model.hpp"
#include "ebshrink/selection.hpp"

namespace ebshrink {

struct MeasurementModel {
    Eigen::MatrixXd A;  // m x n, entries i.i.d. N(0, 1/m)
    std::size_t m = 0;
    std::size_t n = 0;
    double delta = 0.0;  // m / n after rounding m
    double sigma = 0.0;
    Eigen::VectorXd y;
    std::optional<Eigen::VectorXd> theta_true;
};

/// m = round(delta n); y = A theta + sigma w. Deterministic per seed.
MeasurementModel generate_measurement(std::size_t n, double delta, double sigma,
                                      const Signal& signal, std::uint64_t seed);

enum class DenoiserKind { SoftThreshold, EmpiricalBayes };
enum class AmpFamily { SoftThreshold, EmpiricalBayes, Hybrid };

std::string_view to_string(DenoiserKind kind) noexcept;
std::string_view to_string(AmpFamily family) noexcept;

struct AmpState {
    Eigen::VectorXd theta;
    Eigen::VectorXd z;
    double tau_hat = 0.0;  // ||z|| / sqrt(m)
    int t = 0;
    double chosen_param = 0.0;
    DenoiserKind chosen_denoiser = DenoiserKind::SoftThreshold;
};

/// theta_0 = 0, z_0 = y.
AmpState amp_init(const MeasurementModel& model);

struct DenoiserOutput {
    std::vector<double> estimate;
    double mean_derivative = 0.0;  // <f'(u)>
};

/// Applies the denoiser at noise level tau. For eBayes the derivative holds
/// the global statistics fixed. tau == 0 degenerates to the identity.
DenoiserOutput scaled_denoise(DenoiserKind kind, std::span<const double> u, double tau,
                              double param, bool zero_location = false);

/// Sum over i of d(theta_i)/d(y_i) for the unit-noise eBayes estimator with
/// mu_hat, xi2_hat, a_y, c_y, d_y held fixed.
double ebayes_frozen_divergence(std::span<const double> y, const EbParams& params);

/// One AMP iteration with a fixed parameter. Throws NumericalDivergence on
/// non-finite iterates.
AmpState amp_step(const MeasurementModel& model, const AmpState& state, DenoiserKind kind,
                  double param, bool zero_location = false);

struct AmpOptions {
    int iterations = 20;
    bool zero_location = false;
    /// Reuse the parameters found at iteration freeze_after for every later
    /// iteration, and after hybrid_freeze_after iterations keep the most
    /// recent hybrid winner.
    bool freeze = false;
    int freeze_after = 1;
    int hybrid_freeze_after = 10;
};

struct TrajectoryPoint {
    int t = 0;
    double mse = 0.0;  // NaN without a ground-truth signal
    double tau_hat = 0.0;
    double chosen_param = 0.0;  // NaN at t = 0
    DenoiserKind denoiser = DenoiserKind::SoftThreshold;
    double se_prediction = 0.0;
};

/// delta * (min(z_st_norm2, z_eb_norm2) / m - sigma^2)_+
double se_prediction(double z_st_norm2, double z_eb_norm2, std::size_t m, double delta,
                     double sigma);

/// Runs options.iterations grid-tuned iterations and returns t = 0..T.
std::vector<TrajectoryPoint> amp_run(const MeasurementModel& model, AmpFamily family,
                                     const Grids& grids, const AmpOptions& options = {});

}  // namespace ebshrink
