#pragma once

#include "seqcomp/descriptors.hpp"
#include "seqcomp/distances.hpp"
#include "seqcomp/metrics.hpp"
#include "seqcomp/regress.hpp"
#include "seqcomp/synth.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace seqcomp {

/// Settings for every command, read from key=value text. Keys are listed in README.md.
struct ExperimentConfig {
    std::filesystem::path manifest;
    std::filesystem::path out = ".";
    std::vector<int> sets;  // empty: every set of the task
    FcdOptions fcd;
    DistanceOptions distance;
    RatingScale scale = RatingScale::five;
    Statistic statistic = Statistic::tau_b;
    std::uint64_t seed = 1;
    double rating_train_fraction = 0.6;
    double track_train_fraction = 0.7;
    double holdout_fraction = 0.6;
    int folds = 5;
    int eta_count = 50;
    double eta_ratio = 1e-4;
    std::optional<double> nu;  // fixed nu; otherwise tuned on `nu_set`
    std::vector<double> nu_grid = default_nu_grid();
    int nu_set = 0;  // 0: 6 for similarity, 3 for year
    int max_iterations = 2000;
    double tune_tolerance = 1e-4;  // multinomial KKT residual per row while tuning; the final fit uses 1e-5
    ScaleMode scale_mode = ScaleMode::std_dev;
    int bootstrap = 1000;
    double level = 0.95;
    std::vector<int> window_days{0};
    OutlierOptions outliers;
    bool impute = true;
    double clamp_lo = 1957.0;
    double clamp_hi = 2010.0;
    LoadOptions load;
    SynthParams synth;
    std::vector<std::pair<std::string, std::string>> echo;  // key=value pairs as given
};

/// Parses key=value lines ('#' starts a comment). Unknown keys and malformed values are errors.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Applies one key=value setting.
void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value,
                      const std::filesystem::path& base = {});

}  // namespace seqcomp
