#pragma once

#include "seqcomp/common.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace seqcomp {

struct TrackRecord {
    std::string track_id;
    std::string artist;
    std::string title;
    double chart_entry_date = 0.0;  // fractional years
};

struct FrameRate {
    double hz = 0.0;
    bool variable = false;

    static FrameRate constant(double rate) { return {rate, false}; }
    static FrameRate variable_rate() { return {0.0, true}; }
    bool operator==(const FrameRate&) const = default;
};

/// T x h feature time series of one track.
struct FeatureSequence {
    std::string track_id;
    std::string feature_name;
    Matrix frames;
    FrameRate rate;

    Index length() const { return frames.rows(); }
    Index dims() const { return frames.cols(); }
};

struct PairRating {
    std::string track_i;
    std::string track_j;
    int score = 0;
};

/// Tracks, per-(track, feature) sequences and pairwise ratings. Tracks are kept sorted by id;
/// feature names keep their declaration order.
struct Dataset {
    std::vector<TrackRecord> tracks;
    std::vector<std::string> feature_names;
    std::map<std::pair<std::string, std::string>, FeatureSequence> features;
    std::vector<PairRating> ratings;

    bool has_track(std::string_view id) const;
    const TrackRecord& track(std::string_view id) const;
    const FeatureSequence& feature(const std::string& track_id, const std::string& name) const;

    /// Dimensionality declared for a feature (taken from the first track carrying it).
    Index feature_dims(const std::string& name) const;
    bool feature_is_variable_rate(const std::string& name) const;

    /// Sorts tracks and checks every invariant: unique ids, rectangular feature coverage,
    /// consistent dimensionality, finite values, resolvable ratings.
    void validate(double date_lo = 1957.0, double date_hi = 2011.0, int max_score = 5);

    /// Dataset restricted to the given track ids; ratings are kept only when both ends survive.
    Dataset subset(const std::vector<std::string>& ids) const;
};

struct LoadOptions {
    double date_lo = 1957.0;
    double date_hi = 2011.0;
    int max_score = 5;
};

struct LoadReport {
    std::vector<std::pair<std::string, std::size_t>> rows;  // file -> data rows read
};

/// Reads a key=value manifest (tracks=, features=, ratings=) and the files it references.
/// Relative paths resolve against the manifest's directory.
Dataset load_dataset(const std::filesystem::path& manifest, const LoadOptions& options = {},
                     LoadReport* report = nullptr);

/// ISO-8601 calendar date (YYYY-MM-DD) to fractional years: year + (day_of_year - 1) / 365.25.
double parse_iso_date(std::string_view text);
std::string format_iso_date(double fractional_year);

/// Lower-cased, whitespace-trimmed key used for artist/title matching.
std::string normalise_key(std::string_view text);

/// Partitions tracks so that no normalised artist or title string occurs in both subsets.
/// Tracks linked through a shared artist or title form an atomic group.
std::pair<Dataset, Dataset> dedup_split(const Dataset& ds, double train_fraction, std::uint64_t seed);

/// Same partition as dedup_split, returned as sorted track-id lists.
std::pair<std::vector<std::string>, std::vector<std::string>> dedup_split_ids(const Dataset& ds,
                                                                              double train_fraction,
                                                                              std::uint64_t seed);

/// Seeded partition of ratings into (train, test) with round(fraction * n) training rows.
std::pair<std::vector<PairRating>, std::vector<PairRating>> split_ratings(
    const std::vector<PairRating>& ratings, double train_fraction, std::uint64_t seed);

struct OutlierOptions {
    int k = 5;
    double sigmas = 10.0;
    double upper_percentile = 0.99;
    double lower_percentile = 0.01;
    bool upper_only = false;
    int max_passes = 20;
};

struct OutlierReport {
    std::size_t flagged = 0;
    int passes = 0;
};

/// Replaces cells lying more than `sigmas` standard deviations beyond the upper (or below the
/// lower) percentile of their column with the column mean over the k nearest rows. Each cell is
/// judged against statistics of the remaining cells of its column.
Matrix impute_outliers(const Matrix& descriptors, const OutlierOptions& options = {},
                       OutlierReport* report = nullptr);

/// Outlier mask for one pass of the rule above (true = flagged).
Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> flag_outliers(const Matrix& descriptors,
                                                                  const OutlierOptions& options);

}  // namespace seqcomp
