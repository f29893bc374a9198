#pragma once

#include "seqcomp/data_model.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace seqcomp {

/// Parameters of the synthetic corpus. Every track carries 25 features (21 scalar, 4 of
/// dimension 12), each an AR(1) process plus a sinusoid, normalised so that the process variance
/// does not depend on the AR coefficient. Two hidden per-track latents drive the corpus: one sets
/// the AR coefficients (temporal structure), the other the feature means and scales (moments).
/// Both drift linearly with the chart-entry year.
struct SynthParams {
    int tracks = 100;
    int frames = 400;
    double frame_rate = 40.0;
    /// Scales AR coefficients and sinusoid weight; 0 gives i.i.d. Gaussian frames.
    double correlation = 1.0;
    /// Weight of the year in both latents; 0 removes any year signal.
    double year_drift = 1.0;
    /// Per-track spread of each latent around its year trend.
    double latent_noise = 0.6;
    /// Per-feature jitter of the latent seen by an individual feature.
    double feature_noise = 0.5;
    double year_lo = 1957.0;
    double year_hi = 2010.0;
    int artists = 0;  // 0: tracks / 4
    double duplicate_titles = 0.05;
    int ratings = 0;
    /// Probability of moving a rating one step up or down.
    double rating_noise = 0.1;
    int variable_rate_features = 0;  // the last n scalar features get the `variable` rate
    std::uint64_t seed = 1;
};

/// Hidden quantities behind a generated corpus, in track order.
struct SynthTruth {
    std::vector<std::string> track_ids;
    std::vector<double> years;
    std::vector<double> temporal;  // latent driving AR coefficients
    std::vector<double> moment;    // latent driving means and scales
    std::vector<double> rating_distance;  // hidden distance behind each rating
};

/// Feature names in declaration order: 21 scalar features, then chroma and the three MFCC sets.
const std::vector<std::string>& synth_feature_names();
bool synth_feature_is_vector(const std::string& name);

/// Builds the corpus in memory. Values are rounded to 9 significant digits, so a corpus written
/// by write_corpus loads back to the identical dataset.
Dataset generate_corpus(const SynthParams& params, SynthTruth* truth = nullptr, int jobs = 1);

/// Writes manifest.txt, tracks.csv, features.csv, ratings.csv and seq/<track>/<feature>.csv.
void write_corpus(const Dataset& ds, const std::filesystem::path& dir);

}  // namespace seqcomp
