#pragma once

// Monte Carlo harness: loss sweeps over the sparsity level, AMP trajectories,
// and the statistical verification suites (SURE unbiasedness, n^{-1/2}
// concentration, hybrid regret).
//
// Seeding: trial i draws its noise from trial_seed(base_seed, i). The signal
// for sweep point j is drawn from trial_seed(base_seed, j) unless
// redraw_signal is set, in which case trial i uses trial_seed(base_seed, i).
// Results are aggregated in trial order, so any thread count gives identical
// output.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ebshrink/amp.hpp"
#include "ebshrink/model.hpp"

namespace ebshrink {

/// Runs fn(i) for i in [0, count) on up to `threads` workers. The first
/// exception thrown by any call is rethrown after all workers stop.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

enum class Estimator { SoftThreshold, EmpiricalBayes, Hybrid };
enum class Tuning { KnownEta, SureGrid };

std::string_view to_string(Estimator estimator) noexcept;
std::string_view to_string(Tuning tuning) noexcept;

struct SweepConfig {
    std::size_t n = 1000;
    std::vector<double> etas;
    SignalFamily family = HalfPlusMinus{3.0};
    std::size_t trials = 1000;
    std::vector<Estimator> estimators{Estimator::SoftThreshold, Estimator::EmpiricalBayes,
                                      Estimator::Hybrid};
    Tuning tuning = Tuning::KnownEta;
    std::uint64_t base_seed = 0;
    bool redraw_signal = false;
    bool zero_location = false;
    unsigned threads = 1;
    std::optional<std::filesystem::path> output;
};

void validate(const SweepConfig& config);

/// eta = 0 has no valid prior weight; known-eta tuning uses at least this.
inline constexpr double kMinKnownEpsilon = 0.02;

struct SweepRow {
    double eta = 0.0;
    Estimator estimator = Estimator::SoftThreshold;
    double mean_loss = 0.0;  // mean of ||theta_hat - theta||^2 / n
    double std_loss = 0.0;   // sample standard deviation across trials
    std::size_t trials = 0;
};

std::vector<SweepRow> sweep_eta(const SweepConfig& config);

/// Header: eta,estimator,mean_loss,std_loss,trials
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// Named sweep scenarios fig1..fig8. Throws ParameterError for unknown names.
SweepConfig sweep_preset(const std::string& name);
std::vector<std::string> sweep_preset_names();

struct AmpScenario {
    std::string name;
    double delta = 0.5;
    double eta = 0.1;
    double sigma = 0.0;
    SignalFamily family = RademacherNonzeros{};
};

/// The four compressed-sensing scenarios fig9..fig12.
const std::vector<AmpScenario>& amp_presets();
const AmpScenario& amp_preset(const std::string& name);

struct AmpExperimentConfig {
    AmpScenario scenario;
    std::size_t n = 2000;
    std::uint64_t seed = 0;
    AmpOptions options;
    std::vector<AmpFamily> families{AmpFamily::SoftThreshold, AmpFamily::EmpiricalBayes,
                                    AmpFamily::Hybrid};
};

struct AmpRow {
    int t = 0;
    AmpFamily family = AmpFamily::SoftThreshold;
    double mse = 0.0;
    double tau_hat2 = 0.0;
    double chosen_param = 0.0;
    double se_prediction = 0.0;
};

/// One measurement model per (scenario, n, seed), every family run on it.
std::vector<AmpRow> amp_experiment(const AmpExperimentConfig& config);

/// Header: t,family,mse,tau_hat2,chosen_param,se_prediction
void write_amp_csv(std::ostream& out, const std::vector<AmpRow>& rows);

/// Writes via `writer` to path, throwing IoError naming the path on failure.
void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer);

// ---------------------------------------------------------------------------
// Verification suites

struct CheckRecord {
    std::string name;
    double statistic = 0.0;
    /// Upper bound. Band checks also set lower.
    double threshold = 0.0;
    std::optional<double> lower;
    /// "<=", "<" or "in" (lower <= statistic <= threshold).
    std::string comparison = "<=";
    bool pass = false;
    std::vector<std::pair<std::string, double>> details;
};

struct SuiteReport {
    std::string suite;
    std::vector<CheckRecord> checks;

    bool passed() const noexcept;
};

/// One JSON object per check, then a summary object.
void write_report_jsonl(std::ostream& out, const SuiteReport& report);

struct UnbiasednessConfig {
    std::size_t n = 1000;
    double eta = 0.2;
    std::vector<SignalFamily> families{HalfPlusMinus{3.0}, AllConstant{3.0}};
    std::size_t trials = 2000;
    double lambda = 1.0;
    double epsilon = 0.2;
    std::uint64_t base_seed = 0;
    unsigned threads = 1;
};

/// Per (family, estimator): |mean(SURE - loss/n)| <= 3 SE over the trials,
/// for soft-thresholding and both eBayes variants.
SuiteReport unbiasedness_suite(const UnbiasednessConfig& config);

struct ConcentrationConfig {
    std::vector<std::size_t> sizes{250, 1000, 4000};
    double eta = 0.2;
    SignalFamily family = HalfPlusMinus{3.0};
    std::size_t trials = 500;
    double lambda = 1.0;
    double epsilon = 0.2;
    double ratio_lo = 1.5;
    double ratio_hi = 2.5;
    std::uint64_t base_seed = 0;
    unsigned threads = 1;
};

/// Successive ratios of the across-trial standard deviation of loss/n and
/// SURE for soft-thresholding and zero-location eBayes must fall in
/// [ratio_lo, ratio_hi] (sizes growing by 4x predict 2).
SuiteReport concentration_suite(const ConcentrationConfig& config);

struct RegretConfig {
    std::size_t n = 1000;
    std::vector<double> etas{0.1, 0.3, 0.5};
    std::vector<SignalFamily> families{HalfPlusMinus{3.0}, AllConstant{3.0}};
    std::size_t trials = 1000;
    double margin = 0.02;
    double max_rate = 0.01;
    double mean_excess_constant = 5.0;  // threshold is constant / sqrt(n)
    bool zero_location = false;
    std::uint64_t base_seed = 0;
    unsigned threads = 1;
};

/// Known-eta hybrid versus the better of its two components, per trial.
SuiteReport hybrid_regret_suite(const RegretConfig& config);

}  // namespace ebshrink
