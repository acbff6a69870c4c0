#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "ebshrink/amp.hpp"
#include "ebshrink/errors.hpp"
#include "ebshrink/model.hpp"
#include "ebshrink/risk.hpp"
#include "ebshrink/selection.hpp"
#include "oracles.hpp"

using namespace ebshrink;

namespace {

MeasurementModel fig11_model(std::size_t n, std::uint64_t seed) {
    const Signal theta = generate_signal({n, 0.1, RademacherNonzeros{}, seed});
    return generate_measurement(n, 0.5, 0.0, theta, seed);
}

std::span<const double> as_span(const Eigen::VectorXd& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

TEST_CASE("noiseless measurements are exact") {
    const Signal theta = generate_signal({300, 0.2, HalfPlusMinus{3.0}, 1});
    const MeasurementModel model = generate_measurement(300, 0.5, 0.0, theta, 2);
    CHECK(model.m == 150);
    CHECK(model.delta == doctest::Approx(0.5));
    const Eigen::Map<const Eigen::VectorXd> t(theta.values.data(), 300);
    CHECK((model.y - model.A * t).norm() == 0.0);
}

TEST_CASE("measurement parameters") {
    const Signal theta = generate_signal({100, 0.1, HalfPlusMinus{3.0}, 1});
    CHECK_THROWS_AS(generate_measurement(100, 0.0, 0.0, theta, 1), ParameterError);
    CHECK_THROWS_AS(generate_measurement(100, 1.0, 0.0, theta, 1), ParameterError);
    CHECK_THROWS_AS(generate_measurement(100, 0.5, -1.0, theta, 1), ParameterError);
    CHECK_THROWS_AS(generate_measurement(50, 0.5, 0.0, theta, 1), DimensionError);
    const MeasurementModel odd = generate_measurement(100, 0.333, 0.0, theta, 1);
    CHECK(odd.m == 33);
    CHECK(odd.delta == doctest::Approx(0.33));
}

TEST_CASE("matrix columns concentrate at unit norm and noise has unit power") {
    const Signal zero = generate_signal({5100, 0.0, HalfPlusMinus{3.0}, 1});
    const MeasurementModel model = generate_measurement(5100, 5000.0 / 5100.0, 1.0, zero, 9);
    REQUIRE(model.m == 5000);
    CHECK(std::abs(model.A.colwise().squaredNorm().mean() - 1.0) <= 0.05);
    CHECK(std::abs(model.y.squaredNorm() / 5000.0 - 1.0) <= 0.1);
}

TEST_CASE("initial state") {
    const MeasurementModel model = fig11_model(400, 3);
    const AmpState s = amp_init(model);
    CHECK(s.theta.isZero());
    CHECK(s.z == model.y);
    CHECK(s.t == 0);
    CHECK(s.tau_hat == doctest::Approx(model.y.norm() / std::sqrt(200.0)));
}

TEST_CASE("identity denoiser gives the plain Onsager term") {
    const MeasurementModel model = fig11_model(400, 4);
    const AmpState s0 = amp_init(model);
    const AmpState s1 = amp_step(model, s0, DenoiserKind::SoftThreshold, 0.0);
    const Eigen::VectorXd u = model.A.transpose() * s0.z + s0.theta;
    CHECK((s1.theta - u).norm() == 0.0);
    const Eigen::VectorXd expected = model.y - model.A * u + s0.z / model.delta;
    CHECK((s1.z - expected).norm() <= 1e-12 * expected.norm());
    CHECK(s1.t == 1);
    CHECK(s1.tau_hat == doctest::Approx(s1.z.norm() / std::sqrt(200.0)));
}

TEST_CASE("soft-threshold Onsager derivative matches finite differences") {
    const MeasurementModel model = fig11_model(1000, 5);
    const AmpState s0 = amp_init(model);
    const Eigen::VectorXd u = model.A.transpose() * s0.z;
    const double tau = s0.tau_hat;
    for (double lambda : {0.5, 1.1, 2.0}) {
        const auto out = scaled_denoise(DenoiserKind::SoftThreshold, as_span(u), tau, lambda);
        const Denoiser f = [&](std::span<const double> v) {
            return scaled_denoise(DenoiserKind::SoftThreshold, v, tau, lambda).estimate;
        };
        CHECK(std::abs(out.mean_derivative - divergence_fd(f, as_span(u), 1e-5) / 1000.0) <= 1e-3);
    }
}

TEST_CASE("denoiser scaling") {
    const auto u = oracle::gaussian_vector(500, 0.3, 4.0, 8);
    for (double tau : {0.1, 1.0, 3.7}) {
        std::vector<double> unit(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) unit[i] = u[i] / tau;
        const auto st = scaled_denoise(DenoiserKind::SoftThreshold, u, tau, 1.3).estimate;
        const auto st1 = soft_threshold(unit, 1.3);
        for (bool zero_location : {true, false}) {
            const auto eb = scaled_denoise(DenoiserKind::EmpiricalBayes, u, tau, 0.2, zero_location).estimate;
            const auto eb1 = ebayes(unit, EbParams{0.2, zero_location});
            for (std::size_t i = 0; i < u.size(); ++i) {
                CHECK(eb[i] == doctest::Approx(tau * eb1[i]).epsilon(1e-13));
            }
        }
        for (std::size_t i = 0; i < u.size(); ++i) {
            CHECK(st[i] == doctest::Approx(tau * st1[i]).epsilon(1e-13));
        }
    }
    const auto identity = scaled_denoise(DenoiserKind::EmpiricalBayes, u, 0.0, 0.2);
    CHECK(identity.estimate == u);
    CHECK(identity.mean_derivative == 1.0);
}

TEST_CASE("frozen eBayes derivative is the per-coordinate slope") {
    const auto y = oracle::gaussian_vector(300, 0.5, 2.0, 2);
    for (bool zero_location : {true, false}) {
        const EbParams params{0.3, zero_location};
        const EbStatistics s = eb_statistics(y, params);
        const auto coordinate = [&](double v) {
            const double num = s.mu_hat + s.a_y * (v - s.mu_hat);
            const double e = -v * v / 2.0 + (v - s.mu_hat) * (v - s.mu_hat) / (2.0 * s.d_y);
            return num / (1.0 + s.c_y * std::exp(e));
        };
        double fd = 0.0;
        const double h = 1e-6;
        for (double v : y) fd += (coordinate(v + h) - coordinate(v - h)) / (2.0 * h);
        CHECK(ebayes_frozen_divergence(y, params) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("residual power falls over the early iterations") {
    const Grids grids = default_grids(2000);
    AmpOptions options;
    options.iterations = 5;
    int decreasing = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto traj = amp_run(fig11_model(2000, 100 + seed), AmpFamily::SoftThreshold, grids, options);
        bool ok = true;
        for (std::size_t t = 1; t < traj.size(); ++t) ok = ok && traj[t].tau_hat < traj[t - 1].tau_hat;
        decreasing += ok ? 1 : 0;
    }
    CHECK(decreasing >= 19);
}

TEST_CASE("zero iterations") {
    const MeasurementModel model = fig11_model(400, 6);
    AmpOptions options;
    options.iterations = 0;
    const auto traj = amp_run(model, AmpFamily::Hybrid, default_grids(400), options);
    REQUIRE(traj.size() == 1);
    CHECK(traj[0].mse == doctest::Approx(model.theta_true->squaredNorm() / 400.0));
    CHECK(std::isnan(traj[0].chosen_param));
}

TEST_CASE("frozen parameters") {
    const MeasurementModel model = fig11_model(600, 7);
    AmpOptions options;
    options.iterations = 8;
    options.freeze = true;
    for (AmpFamily family : {AmpFamily::SoftThreshold, AmpFamily::EmpiricalBayes}) {
        const auto traj = amp_run(model, family, default_grids(600), options);
        for (std::size_t t = 2; t < traj.size(); ++t) CHECK(traj[t].chosen_param == traj[1].chosen_param);
    }
}

TEST_CASE("hybrid family freeze") {
    const MeasurementModel model = fig11_model(600, 8);
    AmpOptions options;
    options.iterations = 15;
    options.freeze = true;
    options.freeze_after = 15;
    options.hybrid_freeze_after = 3;
    const auto traj = amp_run(model, AmpFamily::Hybrid, default_grids(600), options);
    for (std::size_t t = 4; t < traj.size(); ++t) CHECK(traj[t].denoiser == traj[3].denoiser);
}

TEST_CASE("runs are deterministic") {
    const auto a = amp_run(fig11_model(500, 9), AmpFamily::Hybrid, default_grids(500), {8});
    const auto b = amp_run(fig11_model(500, 9), AmpFamily::Hybrid, default_grids(500), {8});
    REQUIRE(a.size() == b.size());
    for (std::size_t t = 0; t < a.size(); ++t) {
        CHECK(a[t].mse == b[t].mse);
        CHECK(a[t].tau_hat == b[t].tau_hat);
        CHECK(std::memcmp(&a[t].chosen_param, &b[t].chosen_param, sizeof(double)) == 0);
        CHECK(a[t].denoiser == b[t].denoiser);
    }
}

TEST_CASE("non-finite iterates raise with the iteration index") {
    MeasurementModel model = fig11_model(200, 10);
    model.y[3] = std::numeric_limits<double>::quiet_NaN();
    const AmpState s0 = amp_init(model);
    try {
        (void)amp_step(model, s0, DenoiserKind::SoftThreshold, 1.0);
        FAIL("expected divergence");
    } catch (const NumericalDivergence& e) {
        CHECK(e.iteration() == 1);
    }
}

TEST_CASE("state-evolution prediction") {
    CHECK(se_prediction(100.0, 100.0, 100, 0.5, 1.0) == 0.0);
    CHECK(se_prediction(50.0, 40.0, 100, 0.5, 1.0) == 0.0);
    CHECK(se_prediction(300.0, 200.0, 100, 0.5, 0.0) == doctest::Approx(1.0));
    CHECK(se_prediction(300.0, 500.0, 100, 0.4, 1.0) == doctest::Approx(0.8));
}
