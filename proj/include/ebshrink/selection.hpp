#pragma once

// Parameter selection: the minimax soft threshold, SURE grid search for
// lambda and epsilon, and the SURE-comparison hybrid estimator.

#include <cstddef>
#include <span>
#include <vector>

namespace ebshrink {

/// Strictly increasing, nonempty, positive parameter grid.
class Grid {
public:
    explicit Grid(std::vector<double> values);

    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_.at(i); }

private:
    std::vector<double> values_;
};

struct Grids {
    Grid thresholds;  // S
    Grid sparsities;  // D
};

/// S = {0.1 i : i = 1..ceil(10 sqrt(2 ln n))}, D = {0.02 i : i = 1..50}.
Grids default_grids(std::size_t n);

/// Worst-case soft-thresholding risk per coordinate over eps-sparse signals:
/// eps (1 + l^2) + (1 - eps) [2 (1 + l^2) Phi(-l) - 2 l phi(l)].
double minimax_objective(double lambda, double epsilon);

/// argmin of minimax_objective over lambda in [0, 10], to within 1e-6.
double minimax_lambda(double epsilon);

struct Tuned {
    double parameter = 0.0;
    double sure = 0.0;
};

/// Grid point minimizing the normalized soft-threshold SURE; ties go to the
/// smallest lambda.
Tuned tune_st(std::span<const double> y, const Grid& grid);

/// Grid point minimizing the normalized eBayes SURE; ties go to the smallest
/// epsilon.
Tuned tune_eb(std::span<const double> y, const Grid& grid, bool zero_location,
              bool include_small_terms = true);

struct HybridChoice {
    int gamma = 1;  // 1: eBayes, 0: soft-thresholding
    std::vector<double> estimate;
    double sure_eb = 0.0;
    double sure_st = 0.0;
};

/// 1 iff sure_eb <= sure_st.
constexpr int hybrid_gamma(double sure_eb, double sure_st) noexcept {
    return sure_eb <= sure_st ? 1 : 0;
}

HybridChoice hybrid(std::span<const double> y, double lambda, double epsilon, bool zero_location);

}  // namespace ebshrink
