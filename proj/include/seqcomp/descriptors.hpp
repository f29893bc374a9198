#pragma once

#include "seqcomp/data_model.hpp"
#include "seqcomp/ppm.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace seqcomp {

/// Named descriptor of one track. FCD values hold one rate per lambda; FMD values hold the
/// per-dimension means followed by the per-dimension standard deviations.
struct DescriptorVector {
    std::string track_id;
    std::string name;
    Vector values;
    bool missing = false;
};

struct PcaResult {
    Matrix scores;     // T x h, descending variance
    Matrix loadings;   // h x h, columns are unit principal axes
    Vector variances;  // population variance of each score column
    bool degenerate = false;
};

/// Column-centred principal components of one track's frames. Each loading vector is signed so
/// that its largest-magnitude entry is positive.
PcaResult track_pca(const Eigen::Ref<const Matrix>& frames);

enum class Binning { track, corpus };

struct FcdOptions {
    std::vector<int> lambdas{3, 4, 5};
    std::vector<int> factors{1, 2, 4, 8};
    RateOptions rate;
    Binning binning = Binning::track;
    /// Components whose variance is below this fraction of the leading variance are skipped.
    double variance_ratio_floor = 1e-12;
};

std::string fcd_name(const std::string& feature, int factor);
std::string fmd_name(const std::string& feature);

/// Downsampling factors applied to a feature: variable-rate features only get factor 1.
std::vector<int> factors_for(const Dataset& ds, const std::string& feature, const FcdOptions& options);

/// Bin edges pooled over a set of tracks, keyed by (feature, component, factor, lambda).
struct CorpusEdges {
    std::map<std::tuple<std::string, int, int, int>, BinEdges> edges;
};

CorpusEdges corpus_edges(const Dataset& ds, const std::vector<std::string>& track_ids, const FcdOptions& options);

struct FcdDiagnostics {
    std::map<std::string, int> retained_components;  // feature -> PCA components averaged
    std::vector<std::string> issues;
};

/// One DescriptorVector per (feature, factor). Too-short sequences yield vectors marked missing.
std::vector<DescriptorVector> compute_fcd(const std::string& track_id, const Dataset& ds,
                                          const FcdOptions& options = {}, const CorpusEdges* corpus = nullptr,
                                          FcdDiagnostics* diagnostics = nullptr);

/// Per-feature mean and population standard deviation at the original frame rate.
std::vector<DescriptorVector> compute_fmd(const std::string& track_id, const Dataset& ds);

/// Every track's descriptors in a fixed layout: all FCDs (feature-major, factor-minor), then FMDs.
struct DescriptorCatalog {
    std::vector<std::string> track_ids;
    std::vector<std::string> names;
    std::vector<std::vector<std::string>> component_labels;  // aligned with names
    std::map<std::string, std::vector<DescriptorVector>> by_track;  // aligned with names
    std::map<std::string, std::vector<std::string>> issues;

    std::size_t index_of(const std::string& name) const;
    const DescriptorVector& get(const std::string& track_id, const std::string& name) const;
    /// True when the track has every named descriptor present.
    bool complete(const std::string& track_id, const std::vector<std::string>& names) const;

    /// Rows = tracks, columns = flattened components of `names`; column labels returned in `columns`.
    Matrix matrix(const std::vector<std::string>& tracks, const std::vector<std::string>& names,
                  std::vector<std::string>* columns = nullptr) const;
    std::vector<std::string> fcd_names() const;
    std::vector<std::string> fmd_names() const;
};

/// Computes descriptors for every track on `jobs` threads. A failing track is recorded in
/// `issues` and carries no descriptors.
DescriptorCatalog compute_descriptors(const Dataset& ds, const FcdOptions& options = {}, int jobs = 1);

/// Long format: track_id,name,component,value with 9 significant digits; missing vectors omitted.
void write_descriptors_csv(const DescriptorCatalog& catalog, std::ostream& out);

}  // namespace seqcomp
