#include "ebshrink/selection.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ebshrink/denoisers.hpp"
#include "ebshrink/errors.hpp"
#include "ebshrink/risk.hpp"

namespace ebshrink {

namespace {

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

template <class Objective>
Tuned grid_argmin(const Grid& grid, Objective&& objective) {
    Tuned best{grid[0], objective(grid[0])};
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double value = objective(grid[i]);
        if (value < best.sure) best = Tuned{grid[i], value};
    }
    return best;
}

}  // namespace

Grid::Grid(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw ParameterError("grid must be nonempty");
    if (!(values_.front() > 0.0)) throw ParameterError("grid values must be positive");
    for (std::size_t i = 1; i < values_.size(); ++i) {
        if (!(values_[i] > values_[i - 1])) {
            throw ParameterError("grid must be strictly increasing");
        }
    }
}

Grids default_grids(std::size_t n) {
    if (n < 2) throw ParameterError("default_grids needs n >= 2");
    const auto count = static_cast<std::size_t>(
        std::ceil(10.0 * std::sqrt(2.0 * std::log(static_cast<double>(n)))));
    std::vector<double> thresholds(count);
    for (std::size_t i = 0; i < count; ++i) thresholds[i] = static_cast<double>(i + 1) / 10.0;

    std::vector<double> sparsities(50);
    for (std::size_t i = 0; i < sparsities.size(); ++i) {
        sparsities[i] = static_cast<double>(i + 1) / 50.0;
    }
    return Grids{Grid(std::move(thresholds)), Grid(std::move(sparsities))};
}

double minimax_objective(double lambda, double epsilon) {
    const double l2 = 1.0 + lambda * lambda;
    return epsilon * l2 +
           (1.0 - epsilon) * (2.0 * l2 * normal_cdf(-lambda) - 2.0 * lambda * normal_pdf(lambda));
}

double minimax_lambda(double epsilon) {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) {
        throw ParameterError("minimax_lambda: epsilon must lie in (0, 1], got " +
                             std::to_string(epsilon));
    }
    constexpr double upper = 10.0;
    constexpr double coarse_step = 0.1;
    constexpr double tolerance = 1e-6;

    // Coarse scan brackets the minimum, golden-section refines it.
    double best = 0.0;
    double best_value = minimax_objective(0.0, epsilon);
    for (int i = 1; i <= 100; ++i) {
        const double lambda = i * coarse_step;
        const double value = minimax_objective(lambda, epsilon);
        if (value < best_value) {
            best = lambda;
            best_value = value;
        }
    }

    double lo = std::max(0.0, best - coarse_step);
    double hi = std::min(upper, best + coarse_step);
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - ratio * (hi - lo);
    double x2 = lo + ratio * (hi - lo);
    double f1 = minimax_objective(x1, epsilon);
    double f2 = minimax_objective(x2, epsilon);
    while (hi - lo > tolerance) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = minimax_objective(x1, epsilon);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = minimax_objective(x2, epsilon);
        }
    }
    const double refined = 0.5 * (lo + hi);

    // The minimum may sit on the boundary (epsilon = 1 gives 1 + l^2).
    if (minimax_objective(0.0, epsilon) <= minimax_objective(refined, epsilon)) return 0.0;
    return refined;
}

Tuned tune_st(std::span<const double> y, const Grid& grid) {
    return grid_argmin(grid, [&](double lambda) { return sure_soft_threshold(y, lambda); });
}

Tuned tune_eb(std::span<const double> y, const Grid& grid, bool zero_location,
              bool include_small_terms) {
    return grid_argmin(grid, [&](double epsilon) {
        return sure_ebayes(y, EbParams{epsilon, zero_location}, include_small_terms);
    });
}

HybridChoice hybrid(std::span<const double> y, double lambda, double epsilon, bool zero_location) {
    const EbParams params{epsilon, zero_location};
    HybridChoice choice;
    choice.sure_st = sure_soft_threshold(y, lambda);
    choice.sure_eb = sure_ebayes(y, params, true);
    choice.gamma = hybrid_gamma(choice.sure_eb, choice.sure_st);
    choice.estimate = choice.gamma == 1 ? ebayes(y, params) : soft_threshold(y, lambda);
    return choice;
}

}  // namespace ebshrink
