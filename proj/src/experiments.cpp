#include "ebshrink/experiments.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "ebshrink/denoisers.hpp"
#include "ebshrink/errors.hpp"
#include "ebshrink/risk.hpp"
#include "ebshrink/rng.hpp"
#include "ebshrink/selection.hpp"

namespace ebshrink {

namespace {

struct Moments {
    double mean = 0.0;
    double stddev = 0.0;  // sample (n - 1) standard deviation
};

Moments moments(const std::vector<double>& values) {
    Moments m;
    if (values.empty()) return m;
    double total = 0.0;
    for (double v : values) total += v;
    m.mean = total / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - m.mean) * (v - m.mean);
        m.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return m;
}

std::string csv_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string eta_label(double eta) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", eta);
    return buf;
}

std::vector<double> default_etas() {
    std::vector<double> etas;
    for (int i = 1; i <= 10; ++i) etas.push_back(0.05 * i);
    return etas;
}

// Losses of ST, eBayes and the hybrid on one observation.
struct TrialLosses {
    double st = 0.0;
    double eb = 0.0;
    double hybrid = 0.0;
    int gamma = 1;
};

TrialLosses evaluate_trial(const Signal& signal, std::span<const double> y, double eta,
                           Tuning tuning, bool zero_location, const Grids* grids) {
    double lambda = 0.0;
    double epsilon = 1.0;
    double sure_st = 0.0;
    double sure_eb = 0.0;
    if (tuning == Tuning::KnownEta) {
        epsilon = std::max(eta, kMinKnownEpsilon);
        lambda = minimax_lambda(epsilon);
        sure_st = sure_soft_threshold(y, lambda);
        sure_eb = sure_ebayes(y, EbParams{epsilon, zero_location}, true);
    } else {
        const Tuned st = tune_st(y, grids->thresholds);
        const Tuned eb = tune_eb(y, grids->sparsities, zero_location, true);
        lambda = st.parameter;
        sure_st = st.sure;
        epsilon = eb.parameter;
        sure_eb = eb.sure;
    }
    const double n = static_cast<double>(y.size());
    TrialLosses losses;
    losses.st = squared_loss(signal, soft_threshold(y, lambda)) / n;
    losses.eb = squared_loss(signal, ebayes(y, EbParams{epsilon, zero_location})) / n;
    losses.gamma = hybrid_gamma(sure_eb, sure_st);
    losses.hybrid = losses.gamma == 1 ? losses.eb : losses.st;
    return losses;
}

Signal make_signal(std::size_t n, double eta, const SignalFamily& family, std::uint64_t seed) {
    return generate_signal(SignalSpec{n, eta, family, seed});
}

CheckRecord at_most(std::string name, double statistic, double threshold) {
    CheckRecord r;
    r.name = std::move(name);
    r.statistic = statistic;
    r.threshold = threshold;
    r.comparison = "<=";
    r.pass = statistic <= threshold;
    return r;
}

CheckRecord below(std::string name, double statistic, double threshold) {
    CheckRecord r = at_most(std::move(name), statistic, threshold);
    r.comparison = "<";
    r.pass = statistic < threshold;
    return r;
}

CheckRecord within(std::string name, double statistic, double lo, double hi) {
    CheckRecord r;
    r.name = std::move(name);
    r.statistic = statistic;
    r.lower = lo;
    r.threshold = hi;
    r.comparison = "in";
    r.pass = statistic >= lo && statistic <= hi;
    return r;
}

}  // namespace

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& fn) {
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(std::max(threads, 1u), std::max<std::size_t>(count, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        while (!failed.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed = true;
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    pool.clear();
    if (error) std::rethrow_exception(error);
}

std::string_view to_string(Estimator estimator) noexcept {
    switch (estimator) {
        case Estimator::SoftThreshold: return "st";
        case Estimator::EmpiricalBayes: return "eb";
        case Estimator::Hybrid: return "hybrid";
    }
    return "?";
}

std::string_view to_string(Tuning tuning) noexcept {
    return tuning == Tuning::KnownEta ? "known-eta" : "sure-grid";
}

void validate(const SweepConfig& config) {
    if (config.n < 2) throw ParameterError("sweep needs n >= 2");
    if (config.trials < 1) throw ParameterError("sweep needs at least one trial");
    if (config.etas.empty()) throw ParameterError("sweep eta grid is empty");
    for (double eta : config.etas) {
        if (!(eta >= 0.0 && eta <= 1.0)) throw ParameterError("sweep eta values must lie in [0, 1]");
    }
    if (config.estimators.empty()) throw ParameterError("sweep estimator set is empty");
    validate(config.family);
}

std::vector<SweepRow> sweep_eta(const SweepConfig& config) {
    validate(config);
    const Grids grids = default_grids(config.n);
    std::vector<SweepRow> rows;

    for (std::size_t j = 0; j < config.etas.size(); ++j) {
        const double eta = config.etas[j];
        const Signal fixed = make_signal(config.n, eta, config.family,
                                         trial_seed(config.base_seed, j));
        std::vector<TrialLosses> results(config.trials);
        parallel_for(config.trials, config.threads, [&](std::size_t i) {
            const std::uint64_t seed = trial_seed(config.base_seed, i);
            const Signal redrawn = config.redraw_signal
                                       ? make_signal(config.n, eta, config.family, seed)
                                       : Signal{};
            const Signal& signal = config.redraw_signal ? redrawn : fixed;
            const Observation obs = observe(signal, seed);
            results[i] = evaluate_trial(signal, obs.y, eta, config.tuning, config.zero_location,
                                        &grids);
        });

        for (Estimator estimator : config.estimators) {
            std::vector<double> losses(config.trials);
            for (std::size_t i = 0; i < config.trials; ++i) {
                losses[i] = estimator == Estimator::SoftThreshold ? results[i].st
                            : estimator == Estimator::EmpiricalBayes ? results[i].eb
                                                                      : results[i].hybrid;
            }
            const Moments m = moments(losses);
            rows.push_back(SweepRow{eta, estimator, m.mean, m.stddev, config.trials});
        }
    }
    if (config.output) {
        write_file(*config.output, [&](std::ostream& out) { write_sweep_csv(out, rows); });
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "eta,estimator,mean_loss,std_loss,trials\n";
    for (const auto& row : rows) {
        out << csv_number(row.eta) << ',' << to_string(row.estimator) << ','
            << csv_number(row.mean_loss) << ',' << csv_number(row.std_loss) << ',' << row.trials
            << '\n';
    }
}

std::vector<std::string> sweep_preset_names() {
    return {"fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8"};
}

SweepConfig sweep_preset(const std::string& name) {
    SweepConfig config;
    config.n = 1000;
    config.trials = 1000;
    config.etas = default_etas();
    if (name == "fig1" || name == "fig3") {
        config.family = HalfPlusMinus{3.0};
        config.tuning = Tuning::KnownEta;
    } else if (name == "fig2" || name == "fig4") {
        config.family = AllConstant{3.0};
        config.tuning = Tuning::KnownEta;
    } else if (name == "fig5") {
        config.family = GaussianNonzeros{1.0};
        config.tuning = Tuning::SureGrid;
    } else if (name == "fig6") {
        config.family = LaplaceNonzeros{2.0};
        config.tuning = Tuning::SureGrid;
    } else if (name == "fig7") {
        config.family = RademacherNonzeros{};
        config.tuning = Tuning::SureGrid;
    } else if (name == "fig8") {
        config.family = UniformNonzeros{-1.0, 1.0};
        config.tuning = Tuning::SureGrid;
    } else {
        throw ParameterError("unknown sweep preset '" + name + "'");
    }
    return config;
}

const std::vector<AmpScenario>& amp_presets() {
    static const std::vector<AmpScenario> presets{
        {"fig9", 0.65, 0.13, 1.0, GaussianNonzeros{5.0}},
        {"fig10", 0.65, 0.13, 1.0, UniformNonzeros{-5.0, 5.0}},
        {"fig11", 0.5, 0.1, 0.0, RademacherNonzeros{}},
        {"fig12", 0.5, 0.05, 0.05, RademacherNonzeros{}},
    };
    return presets;
}

const AmpScenario& amp_preset(const std::string& name) {
    for (const auto& preset : amp_presets()) {
        if (preset.name == name) return preset;
    }
    throw ParameterError("unknown AMP preset '" + name + "'");
}

std::vector<AmpRow> amp_experiment(const AmpExperimentConfig& config) {
    const auto& sc = config.scenario;
    const Signal signal = make_signal(config.n, sc.eta, sc.family, config.seed);
    const MeasurementModel model =
        generate_measurement(config.n, sc.delta, sc.sigma, signal, config.seed);
    const Grids grids = default_grids(config.n);

    std::vector<AmpRow> rows;
    for (AmpFamily family : config.families) {
        for (const auto& point : amp_run(model, family, grids, config.options)) {
            rows.push_back(AmpRow{point.t, family, point.mse, point.tau_hat * point.tau_hat,
                                  point.chosen_param, point.se_prediction});
        }
    }
    return rows;
}

void write_amp_csv(std::ostream& out, const std::vector<AmpRow>& rows) {
    out << "t,family,mse,tau_hat2,chosen_param,se_prediction\n";
    for (const auto& row : rows) {
        out << row.t << ',' << to_string(row.family) << ',' << csv_number(row.mse) << ','
            << csv_number(row.tau_hat2) << ',' << csv_number(row.chosen_param) << ','
            << csv_number(row.se_prediction) << '\n';
    }
}

void write_file(const std::filesystem::path& path,
                const std::function<void(std::ostream&)>& writer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    writer(out);
    out.flush();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

bool SuiteReport::passed() const noexcept {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

void write_report_jsonl(std::ostream& out, const SuiteReport& report) {
    for (const auto& check : report.checks) {
        nlohmann::ordered_json line;
        line["suite"] = report.suite;
        line["check"] = check.name;
        line["statistic"] = check.statistic;
        line["comparison"] = check.comparison;
        if (check.lower) line["lower"] = *check.lower;
        line["threshold"] = check.threshold;
        line["pass"] = check.pass;
        for (const auto& [key, value] : check.details) line["details"][key] = value;
        out << line.dump() << '\n';
    }
    nlohmann::ordered_json summary;
    summary["suite"] = report.suite;
    summary["summary"] = true;
    summary["checks"] = report.checks.size();
    summary["pass"] = report.passed();
    out << summary.dump() << '\n';
}

SuiteReport unbiasedness_suite(const UnbiasednessConfig& config) {
    if (config.trials < 2) throw ParameterError("unbiasedness suite needs at least two trials");
    SuiteReport report{"unbiasedness", {}};
    const double n = static_cast<double>(config.n);

    for (const auto& family : config.families) {
        const Signal signal = make_signal(config.n, config.eta, family, config.base_seed);
        // Per trial: SURE - loss/n for st, eb zero-location, eb general.
        std::vector<std::array<double, 3>> gaps(config.trials);
        parallel_for(config.trials, config.threads, [&](std::size_t i) {
            const Observation obs = observe(signal, trial_seed(config.base_seed, i));
            const auto& y = obs.y;
            const EbParams zero{config.epsilon, true};
            const EbParams general{config.epsilon, false};
            gaps[i][0] = sure_soft_threshold(y, config.lambda) -
                         squared_loss(signal, soft_threshold(y, config.lambda)) / n;
            gaps[i][1] = sure_ebayes_zero_location(y, config.epsilon, true) -
                         squared_loss(signal, ebayes(y, zero)) / n;
            gaps[i][2] = sure_ebayes_general(y, config.epsilon) -
                         squared_loss(signal, ebayes(y, general)) / n;
        });

        const char* names[] = {"st", "eb_zero_location", "eb_general"};
        for (std::size_t e = 0; e < 3; ++e) {
            std::vector<double> column(config.trials);
            for (std::size_t i = 0; i < config.trials; ++i) column[i] = gaps[i][e];
            const Moments m = moments(column);
            const double se = m.stddev / std::sqrt(static_cast<double>(config.trials));
            auto check = at_most(std::string(names[e]) + "/" + to_string(family),
                                 std::abs(m.mean), 3.0 * se);
            check.details = {{"mean_gap", m.mean}, {"standard_error", se},
                             {"trials", static_cast<double>(config.trials)}};
            report.checks.push_back(std::move(check));
        }
    }
    return report;
}

SuiteReport concentration_suite(const ConcentrationConfig& config) {
    if (config.sizes.size() < 2) throw ParameterError("concentration suite needs two sizes");
    if (config.trials < 2) throw ParameterError("concentration suite needs at least two trials");
    SuiteReport report{"concentration", {}};

    // stds[size][quantity]: st loss, st sure, eb loss, eb sure
    const char* quantities[] = {"st_loss", "st_sure", "eb_loss", "eb_sure"};
    std::vector<std::array<double, 4>> stds(config.sizes.size());
    for (std::size_t s = 0; s < config.sizes.size(); ++s) {
        const std::size_t size = config.sizes[s];
        const double n = static_cast<double>(size);
        const Signal signal = make_signal(size, config.eta, config.family, config.base_seed);
        std::vector<std::array<double, 4>> values(config.trials);
        parallel_for(config.trials, config.threads, [&](std::size_t i) {
            const Observation obs = observe(signal, trial_seed(config.base_seed, i));
            const auto& y = obs.y;
            values[i][0] = squared_loss(signal, soft_threshold(y, config.lambda)) / n;
            values[i][1] = sure_soft_threshold(y, config.lambda);
            values[i][2] = squared_loss(signal, ebayes(y, EbParams{config.epsilon, true})) / n;
            values[i][3] = sure_ebayes_zero_location(y, config.epsilon, true);
        });
        for (std::size_t q = 0; q < 4; ++q) {
            std::vector<double> column(config.trials);
            for (std::size_t i = 0; i < config.trials; ++i) column[i] = values[i][q];
            stds[s][q] = moments(column).stddev;
        }
    }

    for (std::size_t q = 0; q < 4; ++q) {
        for (std::size_t s = 0; s + 1 < config.sizes.size(); ++s) {
            const double ratio = stds[s][q] / stds[s + 1][q];
            auto check = within(std::string(quantities[q]) + "/n" +
                                    std::to_string(config.sizes[s]) + "_vs_n" +
                                    std::to_string(config.sizes[s + 1]),
                                ratio, config.ratio_lo, config.ratio_hi);
            check.details = {{"std_small_n", stds[s][q]},
                             {"std_large_n", stds[s + 1][q]},
                             {"expected_ratio", std::sqrt(static_cast<double>(config.sizes[s + 1]) /
                                                          static_cast<double>(config.sizes[s]))}};
            report.checks.push_back(std::move(check));
        }
    }
    return report;
}

SuiteReport hybrid_regret_suite(const RegretConfig& config) {
    if (config.trials < 1) throw ParameterError("regret suite needs at least one trial");
    SuiteReport report{"hybrid_regret", {}};
    const double n = static_cast<double>(config.n);

    for (const auto& family : config.families) {
        for (std::size_t j = 0; j < config.etas.size(); ++j) {
            const double eta = config.etas[j];
            const Signal signal = make_signal(config.n, eta, family,
                                              trial_seed(config.base_seed, j));
            const double epsilon = std::max(eta, kMinKnownEpsilon);
            const double lambda = minimax_lambda(epsilon);

            struct Outcome {
                double excess = 0.0;
                double identity_gap = 0.0;
            };
            std::vector<Outcome> outcomes(config.trials);
            parallel_for(config.trials, config.threads, [&](std::size_t i) {
                const Observation obs = observe(signal, trial_seed(config.base_seed, i));
                const auto& y = obs.y;
                const HybridChoice choice = hybrid(y, lambda, epsilon, config.zero_location);
                const double loss_h = squared_loss(signal, choice.estimate) / n;
                const double loss_st = squared_loss(signal, soft_threshold(y, lambda)) / n;
                const double loss_eb =
                    squared_loss(signal, ebayes(y, EbParams{epsilon, config.zero_location})) / n;
                const double chosen = choice.gamma == 1 ? loss_eb : loss_st;
                outcomes[i] = Outcome{loss_h - std::min(loss_st, loss_eb),
                                      std::abs(loss_h - chosen)};
            });

            std::size_t exceed = 0;
            double total_excess = 0.0;
            double identity_gap = 0.0;
            for (const auto& o : outcomes) {
                if (o.excess > config.margin) ++exceed;
                total_excess += o.excess;
                identity_gap = std::max(identity_gap, o.identity_gap);
            }
            const double trials = static_cast<double>(config.trials);
            const std::string tag = to_string(family) + "/eta" + eta_label(eta);

            auto rate = below("excess_rate/" + tag, static_cast<double>(exceed) / trials,
                              config.max_rate);
            rate.details = {{"margin", config.margin}, {"exceed_count", static_cast<double>(exceed)}};
            report.checks.push_back(std::move(rate));
            report.checks.push_back(at_most("mean_excess/" + tag, total_excess / trials,
                                            config.mean_excess_constant / std::sqrt(n)));
            report.checks.push_back(at_most("chosen_identity/" + tag, identity_gap, 0.0));
        }
    }
    return report;
}

}  // namespace ebshrink
