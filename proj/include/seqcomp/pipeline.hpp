#pragma once

#include "seqcomp/config.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace seqcomp {

struct StatisticReport {
    Statistic statistic = Statistic::tau_b;
    std::optional<BootstrapResult> result;  // empty when undefined on the test sample
    std::string note;
};

struct SimilaritySetResult {
    int set = 0;
    std::vector<std::string> columns;
    MultinomialModel model;
    TuneTrace trace;
    std::vector<StatisticReport> statistics;  // tau_b, rho_s, ba
    Matrix confusion;                         // rows = annotated, columns = predicted
    Vector magnitudes;                        // aligned with columns
    std::vector<int> predicted;
    std::vector<int> observed;

    const StatisticReport& statistic(Statistic s) const;
};

struct SimilarityReport {
    RatingScale scale = RatingScale::five;
    int classes = 5;
    std::size_t train_pairs = 0;
    std::size_t test_pairs = 0;
    double nu = 0.0;
    std::optional<NuSelection> nu_selection;
    std::vector<SimilaritySetResult> sets;
    DistanceTable distances;  // all rated pairs, union of the columns used
    DescriptorCatalog catalog;
    std::vector<std::string> notes;

    const SimilaritySetResult& set(int id) const;
};

/// Splits ratings, computes distances, tunes and fits one model per configured set (default
/// 1..6) and evaluates on the held-out ratings.
SimilarityReport run_similarity(const Dataset& ds, const ExperimentConfig& config, int jobs = 1);

struct YearSetResult {
    int set = 0;
    int window_days = 0;
    std::vector<std::string> columns;
    LinearModel model;
    TuneTrace trace;
    BootstrapResult mae;
    BootstrapResult rmse;
    Vector magnitudes;
    Vector predicted;
    Vector observed;
};

struct YearBaseline {
    int window_days = 0;
    double prediction = 0.0;
    BootstrapResult mae;
    BootstrapResult rmse;
};

struct YearReport {
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
    double nu = 0.0;
    std::optional<NuSelection> nu_selection;
    OutlierReport outliers;
    std::vector<YearSetResult> results;
    std::vector<YearBaseline> baselines;
    DescriptorCatalog catalog;
    std::vector<std::string> notes;

    const YearSetResult& result(int set, int window_days = 0) const;
    const YearBaseline& baseline(int window_days = 0) const;
};

/// Dedup split, outlier imputation on training rows, standardisation, CV-tuned elastic-net
/// regression per set (1: FMDs, 2: FCDs, 3: both) and window size.
YearReport run_year(const Dataset& ds, const ExperimentConfig& config, int jobs = 1);

/// Files written by the commands; each returns the paths it created.
std::vector<std::filesystem::path> write_descriptor_outputs(const DescriptorCatalog& catalog, const Dataset& ds,
                                                            const ExperimentConfig& config,
                                                            const std::filesystem::path& dir);
std::vector<std::filesystem::path> write_similarity_outputs(const SimilarityReport& report,
                                                            const ExperimentConfig& config,
                                                            const std::filesystem::path& dir);
std::vector<std::filesystem::path> write_year_outputs(const YearReport& report, const ExperimentConfig& config,
                                                      const std::filesystem::path& dir);

}  // namespace seqcomp
