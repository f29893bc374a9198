#pragma once

#include "seqcomp/descriptors.hpp"

#include <cmath>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace seqcomp {

template <typename A, typename B>
typename A::Scalar euclidean(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    if (a.size() != b.size()) throw ValidationError("euclidean: length mismatch");
    return (a.derived().reshaped() - b.derived().reshaped()).norm();
}

/// Closed-form KL divergence between diagonal Gaussians N(mu1, var1) and N(mu2, var2), in nats:
///   0.5 * sum_d [ var2/var1 + (mu1 - mu2)^2 / var1 - 1 - ln(var2/var1) ].
/// Variances are floored at `variance_floor` first.
template <typename M1, typename V1, typename M2, typename V2>
typename M1::Scalar kld_diag(const Eigen::MatrixBase<M1>& mu1, const Eigen::MatrixBase<V1>& var1,
                             const Eigen::MatrixBase<M2>& mu2, const Eigen::MatrixBase<V2>& var2,
                             typename M1::Scalar variance_floor = 1e-9) {
    const auto h = mu1.size();
    if (var1.size() != h || mu2.size() != h || var2.size() != h) throw ValidationError("kld_diag: dimension mismatch");
    const auto v1 = var1.derived().reshaped().array().max(variance_floor);
    const auto v2 = var2.derived().reshaped().array().max(variance_floor);
    const auto diff = mu1.derived().reshaped().array() - mu2.derived().reshaped().array();
    const auto ratio = (v2 / v1).eval();
    return typename M1::Scalar(0.5) * (ratio + diff.square() / v1 - 1 - ratio.log()).sum();
}

enum class KldLog { plain, plus1 };

struct DistanceOptions {
    KldLog kld_log = KldLog::plus1;
    bool symmetrise = false;
    int embed_dim = 12;
    double variance_floor = 1e-9;
};

/// log-transformed KLD between two FMD vectors laid out as (means, standard deviations), taken in
/// the direction fmd_i -> fmd_j unless `symmetrise` averages both directions.
double kld_distance(const DescriptorVector& fmd_i, const DescriptorVector& fmd_j, const DistanceOptions& options = {});

/// Square root of the normalised mean squared error made when predicting each frame of `b` by the
/// successor of its nearest neighbour among the `embed_dim`-frame delay embeddings of `a`.
double cross_prediction_error(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b, int embed_dim = 12);

/// Column names of a distance set (1: FCD Euclidean, 2: cross-prediction, 3: FMD Euclidean,
/// 4: FMD KLD, 5: sets 3+4, 6: sets 1+3+4).
std::vector<std::string> distance_columns(const Dataset& ds, int set, const FcdOptions& fcd = {});

struct DistanceTable {
    std::vector<std::string> names;
    std::vector<std::pair<std::string, std::string>> pairs;
    Matrix values;  // pairs x names
};

DistanceTable distance_table(const Dataset& ds, const DescriptorCatalog& catalog,
                             const std::vector<std::pair<std::string, std::string>>& pairs, int set,
                             const DistanceOptions& options = {}, const FcdOptions& fcd = {}, int jobs = 1);

/// Same, for an explicit list of columns named as in distance_columns.
DistanceTable distance_table(const Dataset& ds, const DescriptorCatalog& catalog,
                             const std::vector<std::pair<std::string, std::string>>& pairs,
                             const std::vector<std::string>& columns, const DistanceOptions& options = {},
                             int jobs = 1);

void write_distances_csv(const DistanceTable& table, std::ostream& out);

}  // namespace seqcomp
