#include "ebshrink/amp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "ebshrink/denoisers.hpp"
#include "ebshrink/errors.hpp"
#include "ebshrink/rng.hpp"

namespace ebshrink {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::span<const double> as_span(const Eigen::VectorXd& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

double mse_of(const MeasurementModel& model, const Eigen::VectorXd& theta) {
    if (!model.theta_true) return kNaN;
    return (theta - *model.theta_true).squaredNorm() / static_cast<double>(model.n);
}

struct Candidate {
    Eigen::VectorXd theta;
    Eigen::VectorXd z;
    double z_norm2 = 0.0;
    double param = 0.0;
    DenoiserKind kind = DenoiserKind::SoftThreshold;
};

// Evaluates every parameter against the shared effective observation u and
// keeps the one with the smallest residual; ties go to the earliest entry.
Candidate best_candidate(const MeasurementModel& model, const AmpState& state,
                         const Eigen::VectorXd& u, DenoiserKind kind,
                         std::span<const double> params, bool zero_location) {
    const auto count = static_cast<Eigen::Index>(params.size());
    Eigen::MatrixXd thetas(static_cast<Eigen::Index>(model.n), count);
    Eigen::VectorXd derivatives(count);
    for (Eigen::Index k = 0; k < count; ++k) {
        auto out = scaled_denoise(kind, as_span(u), state.tau_hat, params[k], zero_location);
        thetas.col(k) = Eigen::Map<const Eigen::VectorXd>(out.estimate.data(), u.size());
        derivatives[k] = out.mean_derivative;
    }

    Eigen::MatrixXd residuals = -(model.A * thetas);
    residuals.colwise() += model.y;
    residuals.noalias() += (state.z / model.delta) * derivatives.transpose();
    const Eigen::RowVectorXd norms = residuals.colwise().squaredNorm();

    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < count; ++k) {
        if (norms[k] < norms[best]) best = k;
    }
    return Candidate{thetas.col(best), residuals.col(best), norms[best], params[best], kind};
}

void require_finite(const Eigen::VectorXd& theta, const Eigen::VectorXd& z, int t) {
    if (!theta.allFinite() || !z.allFinite()) {
        throw NumericalDivergence("AMP produced non-finite iterates", t);
    }
}

}  // namespace

std::string_view to_string(DenoiserKind kind) noexcept {
    return kind == DenoiserKind::SoftThreshold ? "st" : "eb";
}

std::string_view to_string(AmpFamily family) noexcept {
    switch (family) {
        case AmpFamily::SoftThreshold: return "st";
        case AmpFamily::EmpiricalBayes: return "eb";
        case AmpFamily::Hybrid: return "hybrid";
    }
    return "?";
}

MeasurementModel generate_measurement(std::size_t n, double delta, double sigma,
                                      const Signal& signal, std::uint64_t seed) {
    if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ParameterError("sigma must be >= 0");
    if (signal.size() != n) {
        throw DimensionError("signal length " + std::to_string(signal.size()) + " != n = " +
                             std::to_string(n));
    }
    const auto m = static_cast<std::size_t>(std::floor(delta * static_cast<double>(n) + 0.5));
    if (m < 1 || m >= n) throw ParameterError("round(delta n) must lie in [1, n)");

    MeasurementModel model;
    model.m = m;
    model.n = n;
    model.delta = static_cast<double>(m) / static_cast<double>(n);
    model.sigma = sigma;

    const auto rows = static_cast<Eigen::Index>(m);
    const auto cols = static_cast<Eigen::Index>(n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    Rng matrix_rng(seed, Stream::Matrix);
    model.A.resize(rows, cols);
    double* entries = model.A.data();
    for (Eigen::Index i = 0; i < rows * cols; ++i) entries[i] = scale * matrix_rng.normal();

    const Eigen::Map<const Eigen::VectorXd> theta(signal.values.data(), cols);
    model.y = model.A * theta;
    if (sigma > 0.0) {
        Rng noise_rng(seed, Stream::MeasurementNoise);
        for (Eigen::Index i = 0; i < rows; ++i) model.y[i] += sigma * noise_rng.normal();
    }
    model.theta_true = theta;
    return model;
}

AmpState amp_init(const MeasurementModel& model) {
    AmpState state;
    state.theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.n));
    state.z = model.y;
    state.tau_hat = model.y.norm() / std::sqrt(static_cast<double>(model.m));
    state.t = 0;
    state.chosen_param = kNaN;
    return state;
}

double ebayes_frozen_divergence(std::span<const double> y, const EbParams& params) {
    const EbStatistics s = eb_statistics(y, params);
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double numerator = s.mu_hat + s.a_y * (y[i] - s.mu_hat);
        const double d_exponent = -y[i] + (y[i] - s.mu_hat) / s.d_y;
        const double weight = logistic(s.log_c + s.exponent(y[i]));
        total += s.inv_b[i] * (s.a_y - numerator * weight * d_exponent);
    }
    return total;
}

DenoiserOutput scaled_denoise(DenoiserKind kind, std::span<const double> u, double tau,
                              double param, bool zero_location) {
    const double n = static_cast<double>(u.size());
    DenoiserOutput out;
    if (tau == 0.0) {
        out.estimate.assign(u.begin(), u.end());
        out.mean_derivative = 1.0;
        return out;
    }

    if (kind == DenoiserKind::SoftThreshold) {
        const double threshold = param * tau;
        out.estimate = soft_threshold(u, threshold);
        std::size_t active = 0;
        for (double v : u) active += std::abs(v) > threshold ? 1 : 0;
        out.mean_derivative = static_cast<double>(active) / n;
        return out;
    }

    std::vector<double> scaled(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) scaled[i] = u[i] / tau;
    const EbParams params{param, zero_location};
    out.estimate = ebayes(scaled, params);
    for (double& v : out.estimate) v *= tau;
    out.mean_derivative = ebayes_frozen_divergence(scaled, params) / n;
    return out;
}

AmpState amp_step(const MeasurementModel& model, const AmpState& state, DenoiserKind kind,
                  double param, bool zero_location) {
    const Eigen::VectorXd u = model.A.transpose() * state.z + state.theta;
    require_finite(u, state.z, state.t + 1);
    auto out = scaled_denoise(kind, as_span(u), state.tau_hat, param, zero_location);

    AmpState next;
    next.theta = Eigen::Map<const Eigen::VectorXd>(out.estimate.data(), u.size());
    next.z = model.y - model.A * next.theta + state.z * (out.mean_derivative / model.delta);
    next.t = state.t + 1;
    require_finite(next.theta, next.z, next.t);
    next.tau_hat = next.z.norm() / std::sqrt(static_cast<double>(model.m));
    next.chosen_param = param;
    next.chosen_denoiser = kind;
    return next;
}

double se_prediction(double z_st_norm2, double z_eb_norm2, std::size_t m, double delta,
                     double sigma) {
    const double tau2 = std::min(z_st_norm2, z_eb_norm2) / static_cast<double>(m);
    return delta * std::max(tau2 - sigma * sigma, 0.0);
}

std::vector<TrajectoryPoint> amp_run(const MeasurementModel& model, AmpFamily family,
                                     const Grids& grids, const AmpOptions& options) {
    if (options.iterations < 0) throw ParameterError("AMP iteration count must be >= 0");

    AmpState state = amp_init(model);
    std::vector<TrajectoryPoint> trajectory;
    trajectory.reserve(static_cast<std::size_t>(options.iterations) + 1);
    const double y_norm2 = model.y.squaredNorm();
    trajectory.push_back(TrajectoryPoint{0, mse_of(model, state.theta), state.tau_hat, kNaN,
                                         DenoiserKind::SoftThreshold,
                                         se_prediction(y_norm2, y_norm2, model.m, model.delta,
                                                       model.sigma)});

    // Last tuned parameter per denoiser, indexed by DenoiserKind.
    std::array<double, 2> tuned{kNaN, kNaN};
    std::optional<DenoiserKind> frozen_family;

    for (int t = 1; t <= options.iterations; ++t) {
        const Eigen::VectorXd u = model.A.transpose() * state.z + state.theta;
        require_finite(u, state.z, t);
        const bool search = !options.freeze || t <= options.freeze_after;

        std::vector<DenoiserKind> kinds;
        if (family == AmpFamily::SoftThreshold) {
            kinds = {DenoiserKind::SoftThreshold};
        } else if (family == AmpFamily::EmpiricalBayes) {
            kinds = {DenoiserKind::EmpiricalBayes};
        } else if (frozen_family) {
            kinds = {*frozen_family};
        } else {
            kinds = {DenoiserKind::SoftThreshold, DenoiserKind::EmpiricalBayes};
        }

        std::optional<Candidate> winner;
        double min_norm2 = std::numeric_limits<double>::infinity();
        for (DenoiserKind kind : kinds) {
            const auto slot = static_cast<std::size_t>(kind);
            std::span<const double> params = kind == DenoiserKind::SoftThreshold
                                                 ? grids.thresholds.values()
                                                 : grids.sparsities.values();
            if (!search) params = std::span<const double>(&tuned[slot], 1);

            Candidate candidate =
                best_candidate(model, state, u, kind, params, options.zero_location);
            tuned[slot] = candidate.param;
            min_norm2 = std::min(min_norm2, candidate.z_norm2);
            // eBayes is evaluated second and wins ties.
            if (!winner || candidate.z_norm2 <= winner->z_norm2) winner = std::move(candidate);
        }

        require_finite(winner->theta, winner->z, t);
        if (family == AmpFamily::Hybrid && options.freeze && !frozen_family &&
            t >= options.hybrid_freeze_after) {
            frozen_family = winner->kind;
        }

        state.theta = std::move(winner->theta);
        state.z = std::move(winner->z);
        state.tau_hat = std::sqrt(winner->z_norm2 / static_cast<double>(model.m));
        state.t = t;
        state.chosen_param = winner->param;
        state.chosen_denoiser = winner->kind;

        trajectory.push_back(TrajectoryPoint{
            t, mse_of(model, state.theta), state.tau_hat, state.chosen_param,
            state.chosen_denoiser,
            se_prediction(min_norm2, min_norm2, model.m, model.delta, model.sigma)});
    }
    return trajectory;
}

}  // namespace ebshrink
