#include "ebshrink/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "ebshrink/denoisers.hpp"
#include "ebshrink/errors.hpp"
#include "ebshrink/experiments.hpp"
#include "ebshrink/risk.hpp"
#include "ebshrink/selection.hpp"

namespace ebshrink::cli {

namespace {

using ConfigMap = std::map<std::string, std::string>;

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::string strip_comment(const std::string& line) {
    return trim(std::string_view(line).substr(0, line.find('#')));
}

std::string number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

template <class T>
T parse_value(const std::string& text, const std::string& key) {
    if constexpr (std::is_same_v<T, std::string>) {
        return text;
    } else if constexpr (std::is_same_v<T, bool>) {
        if (text == "true" || text == "1" || text == "yes") return true;
        if (text == "false" || text == "0" || text == "no") return false;
        throw ParseError("config key '" + key + "': expected a boolean, got '" + text + "'");
    } else {
        T value{};
        const char* first = text.data();
        const char* last = text.data() + text.size();
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc{} || ptr != last) {
            throw ParseError("config key '" + key + "': cannot parse '" + text + "'");
        }
        return value;
    }
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
    std::vector<double> values;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        item = trim(item);
        if (!item.empty()) values.push_back(parse_value<double>(item, key));
    }
    return values;
}

// Config values fill in every option the command line left unset.
class Settings {
public:
    Settings(const CLI::App& app, ConfigMap config) : app_(app), config_(std::move(config)) {}

    template <class T>
    void apply(const std::string& key, T& target) {
        used_.insert(key);
        if (app_.count("--" + key) > 0) return;
        if (auto it = config_.find(key); it != config_.end()) {
            target = parse_value<T>(it->second, key);
        }
    }

    template <class T>
    void apply(const std::string& key, std::optional<T>& target) {
        used_.insert(key);
        if (app_.count("--" + key) > 0) return;
        if (auto it = config_.find(key); it != config_.end()) {
            target = parse_value<T>(it->second, key);
        }
    }

    void apply_list(const std::string& key, std::string& target) { apply(key, target); }

    void reject_unknown() const {
        for (const auto& [key, value] : config_) {
            if (!used_.contains(key)) throw ParseError("unknown config key '" + key + "'");
        }
    }

private:
    const CLI::App& app_;
    ConfigMap config_;
    std::set<std::string> used_;
};

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    std::string out;
};

void add_common(CLI::App& sub, CommonOptions& common) {
    sub.add_option("--config", common.config_path, "key=value configuration file");
    sub.add_option("--seed", common.seed, "base seed for every random draw");
    sub.add_option("--threads", common.threads, "worker threads")->check(CLI::PositiveNumber);
    sub.add_option("--out", common.out, "output path (default: $" + std::string(kOutputDirEnv) +
                                            "/<name> or stdout)");
}

// Resolves the destination and writes; "" and "-" mean the provided stream.
void emit(const std::string& out_path, const std::string& default_name, std::ostream& out,
          const std::function<void(std::ostream&)>& writer) {
    std::filesystem::path path = out_path;
    if (out_path.empty()) {
        if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') {
            path = std::filesystem::path(dir) / default_name;
        }
    }
    if (path.empty() || path == "-") {
        writer(out);
    } else {
        write_file(path, writer);
    }
}

std::string join(const std::vector<std::string>& items) {
    std::string s;
    for (const auto& item : items) s += (s.empty() ? "" : ", ") + item;
    return s;
}

int cmd_denoise(const std::string& input, const std::string& estimator,
                const std::optional<double>& lambda, const std::optional<double>& epsilon,
                bool zero_location, bool with_sure, const std::string& out_path,
                std::ostream& out, std::ostream& err) {
    if ((estimator == "st" || estimator == "hybrid") && !lambda) {
        err << "error: --lambda is required for estimator '" << estimator << "'\n";
        return kUsage;
    }
    if ((estimator == "eb" || estimator == "hybrid") && !epsilon) {
        err << "error: --epsilon is required for estimator '" << estimator << "'\n";
        return kUsage;
    }
    const std::vector<double> y = read_vector_file(input);
    if (y.empty()) throw ParseError("'" + input + "' contains no values");

    std::vector<double> estimate;
    double sure = 0.0;
    if (estimator == "st") {
        estimate = soft_threshold(y, *lambda);
        sure = sure_soft_threshold(y, *lambda);
    } else if (estimator == "eb") {
        const EbParams params{*epsilon, zero_location};
        estimate = ebayes(y, params);
        sure = sure_ebayes(y, params, true);
    } else {
        HybridChoice choice = hybrid(y, *lambda, *epsilon, zero_location);
        estimate = std::move(choice.estimate);
        sure = std::min(choice.sure_eb, choice.sure_st);
        err << "# gamma=" << choice.gamma << " sure_eb=" << number(choice.sure_eb)
            << " sure_st=" << number(choice.sure_st) << '\n';
    }

    auto writer = [&](std::ostream& o) {
        for (double v : estimate) o << number(v) << '\n';
        if (with_sure) o << "# sure=" << number(sure) << '\n';
    };
    if (out_path.empty() || out_path == "-") {
        writer(out);
    } else {
        write_file(out_path, writer);
    }
    return kSuccess;
}

}  // namespace

std::vector<double> read_vector_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = strip_comment(line);
        if (text.empty()) continue;
        double value = 0.0;
        const char* first = text.data();
        const char* last = text.data() + text.size();
        if (*first == '+') ++first;
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": not a finite number: '" +
                             text + "'");
        }
        values.push_back(value);
    }
    if (in.bad()) throw IoError("failed reading '" + path + "'");
    return values;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    ConfigMap config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = strip_comment(line);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected key=value");
        }
        std::string key = trim(text.substr(0, eq));
        if (key.empty()) throw ParseError(path + ":" + std::to_string(line_no) + ": empty key");
        config[key] = trim(text.substr(eq + 1));
    }
    return config;
}

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sparse denoising with soft-thresholding, empirical Bayes shrinkage and SURE", "ebshrink"};
    app.require_subcommand(1);

    // denoise
    auto* denoise = app.add_subcommand("denoise", "denoise a vector file");
    std::string input;
    std::string estimator;
    std::optional<double> lambda;
    std::optional<double> epsilon;
    bool zero_location = false;
    bool with_sure = false;
    std::string denoise_out;
    denoise->add_option("--input", input, "vector file, one number per line")->required();
    denoise->add_option("--estimator", estimator)
        ->required()
        ->check(CLI::IsMember({"st", "eb", "hybrid"}));
    denoise->add_option("--lambda", lambda, "soft threshold");
    denoise->add_option("--epsilon", epsilon, "eBayes mixture weight in (0, 1]");
    denoise->add_flag("--zero-location", zero_location, "pin the eBayes location to 0");
    denoise->add_flag("--sure", with_sure, "append the normalized SURE as a comment line");
    denoise->add_option("--out", denoise_out, "output path (default stdout)");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "average loss versus sparsity level");
    CommonOptions sweep_common;
    add_common(*sweep, sweep_common);
    std::string sweep_preset_name;
    std::optional<std::size_t> sweep_n;
    std::optional<std::size_t> sweep_trials;
    std::string etas;
    std::string family;
    std::string tuning;
    bool redraw = false;
    bool sweep_zero_location = false;
    sweep->add_option("--preset", sweep_preset_name, "fig1..fig8");
    sweep->add_option("--n", sweep_n);
    sweep->add_option("--trials", sweep_trials);
    sweep->add_option("--etas", etas, "comma-separated sparsity levels");
    sweep->add_option("--family", family, "e.g. halfpm:3, const:3, gauss:1, laplace:2");
    sweep->add_option("--tuning", tuning)->check(CLI::IsMember({"known-eta", "sure-grid"}));
    sweep->add_flag("--redraw-signal", redraw, "draw a fresh signal for every trial");
    sweep->add_flag("--zero-location", sweep_zero_location);

    // amp
    auto* amp = app.add_subcommand("amp", "AMP trajectories for a compressed-sensing preset");
    CommonOptions amp_common;
    add_common(*amp, amp_common);
    std::string amp_preset_name;
    std::size_t amp_n = 2000;
    int iterations = 20;
    bool freeze = false;
    bool amp_zero_location = false;
    amp->add_option("--preset", amp_preset_name, "fig9..fig12");
    amp->add_option("--n", amp_n)->check(CLI::PositiveNumber);
    amp->add_option("--iterations", iterations)->check(CLI::NonNegativeNumber);
    amp->add_flag("--freeze", freeze, "tune parameters once and keep them");
    amp->add_flag("--zero-location", amp_zero_location);

    // verify
    auto* verify = app.add_subcommand("verify", "statistical verification suites");
    CommonOptions verify_common;
    add_common(*verify, verify_common);
    std::string suite;
    std::optional<std::size_t> verify_trials;
    verify->add_option("--suite", suite, "unbiasedness, concentration, regret or all");
    verify->add_option("--trials", verify_trials, "override the trial count of every suite");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        const auto subs = app.get_subcommands();
        out << (subs.empty() ? app.help() : subs.front()->help());
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kUsage;
    }

    try {
        if (denoise->parsed()) {
            return cmd_denoise(input, estimator, lambda, epsilon, zero_location, with_sure,
                               denoise_out, out, err);
        }

        if (sweep->parsed()) {
            ConfigMap cfg = sweep_common.config_path.empty()
                                ? ConfigMap{}
                                : read_config_file(sweep_common.config_path);
            Settings settings(*sweep, cfg);
            settings.apply("preset", sweep_preset_name);
            SweepConfig config;
            if (!sweep_preset_name.empty()) {
                try {
                    config = sweep_preset(sweep_preset_name);
                } catch (const ParameterError&) {
                    err << "error: unknown sweep preset '" << sweep_preset_name
                        << "'; valid presets: " << join(sweep_preset_names()) << '\n';
                    return kUsage;
                }
            } else {
                config.etas = {0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5};
            }
            settings.apply("n", sweep_n);
            settings.apply("trials", sweep_trials);
            settings.apply("etas", etas);
            settings.apply("family", family);
            settings.apply("tuning", tuning);
            settings.apply("redraw-signal", redraw);
            settings.apply("zero-location", sweep_zero_location);
            settings.apply("seed", sweep_common.seed);
            settings.apply("threads", sweep_common.threads);
            settings.apply("out", sweep_common.out);
            settings.reject_unknown();

            if (sweep_n) config.n = *sweep_n;
            if (sweep_trials) config.trials = *sweep_trials;
            if (!etas.empty()) config.etas = parse_list(etas, "etas");
            if (!family.empty()) config.family = parse_family(family);
            if (!tuning.empty()) {
                config.tuning = tuning == "sure-grid" ? Tuning::SureGrid : Tuning::KnownEta;
            }
            config.redraw_signal = redraw;
            config.zero_location = sweep_zero_location;
            config.base_seed = sweep_common.seed.value_or(0);
            config.threads = sweep_common.threads;

            const auto rows = sweep_eta(config);
            const std::string name =
                "sweep" + (sweep_preset_name.empty() ? "" : "-" + sweep_preset_name) + ".csv";
            emit(sweep_common.out, name, out, [&](std::ostream& o) { write_sweep_csv(o, rows); });
            return kSuccess;
        }

        if (amp->parsed()) {
            ConfigMap cfg = amp_common.config_path.empty()
                                ? ConfigMap{}
                                : read_config_file(amp_common.config_path);
            Settings settings(*amp, cfg);
            settings.apply("preset", amp_preset_name);
            settings.apply("n", amp_n);
            settings.apply("iterations", iterations);
            settings.apply("freeze", freeze);
            settings.apply("zero-location", amp_zero_location);
            settings.apply("seed", amp_common.seed);
            settings.apply("threads", amp_common.threads);
            settings.apply("out", amp_common.out);
            settings.reject_unknown();

            std::vector<std::string> names;
            for (const auto& p : amp_presets()) names.push_back(p.name);
            if (amp_preset_name.empty()) {
                err << "error: --preset is required; valid presets: " << join(names) << '\n';
                return kUsage;
            }
            AmpExperimentConfig config;
            try {
                config.scenario = amp_preset(amp_preset_name);
            } catch (const ParameterError&) {
                err << "error: unknown AMP preset '" << amp_preset_name
                    << "'; valid presets: " << join(names) << '\n';
                return kUsage;
            }
            config.n = amp_n;
            config.seed = amp_common.seed.value_or(0);
            config.options.iterations = iterations;
            config.options.freeze = freeze;
            config.options.zero_location = amp_zero_location;

            const auto rows = amp_experiment(config);
            emit(amp_common.out, "amp-" + amp_preset_name + ".csv", out,
                 [&](std::ostream& o) { write_amp_csv(o, rows); });
            return kSuccess;
        }

        if (verify->parsed()) {
            ConfigMap cfg = verify_common.config_path.empty()
                                ? ConfigMap{}
                                : read_config_file(verify_common.config_path);
            Settings settings(*verify, cfg);
            settings.apply("suite", suite);
            settings.apply("trials", verify_trials);
            settings.apply("seed", verify_common.seed);
            settings.apply("threads", verify_common.threads);
            settings.apply("out", verify_common.out);
            settings.reject_unknown();

            if (!verify_common.seed) {
                err << "error: verify requires --seed (or seed= in the config file)\n";
                return kUsage;
            }
            if (suite.empty()) suite = "all";
            const std::vector<std::string> suites{"unbiasedness", "concentration", "regret", "all"};
            if (std::find(suites.begin(), suites.end(), suite) == suites.end()) {
                err << "error: unknown suite '" << suite << "'; valid suites: " << join(suites)
                    << '\n';
                return kUsage;
            }
            const std::uint64_t seed = *verify_common.seed;
            const unsigned threads = verify_common.threads;

            std::vector<SuiteReport> reports;
            if (suite == "unbiasedness" || suite == "all") {
                UnbiasednessConfig c;
                c.base_seed = seed;
                c.threads = threads;
                if (verify_trials) c.trials = *verify_trials;
                reports.push_back(unbiasedness_suite(c));
            }
            if (suite == "concentration" || suite == "all") {
                ConcentrationConfig c;
                c.base_seed = seed;
                c.threads = threads;
                if (verify_trials) c.trials = *verify_trials;
                reports.push_back(concentration_suite(c));
            }
            if (suite == "regret" || suite == "all") {
                RegretConfig c;
                c.base_seed = seed;
                c.threads = threads;
                if (verify_trials) c.trials = *verify_trials;
                reports.push_back(hybrid_regret_suite(c));
            }

            emit(verify_common.out, "verify-" + suite + ".jsonl", out, [&](std::ostream& o) {
                for (const auto& r : reports) write_report_jsonl(o, r);
            });
            const bool ok = std::all_of(reports.begin(), reports.end(),
                                        [](const auto& r) { return r.passed(); });
            return ok ? kSuccess : kSuiteFailure;
        }
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIo;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kParse;
    } catch (const ParameterError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const DimensionError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const NumericalDivergence& e) {
        err << "error: " << e.what() << '\n';
        return kSuiteFailure;
    }
    return kUsage;
}

}  // namespace ebshrink::cli
