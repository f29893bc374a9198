#include "seqcomp/distances.hpp"

#include "seqcomp/csv.hpp"
#include "seqcomp/parallel.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

namespace seqcomp {

double kld_distance(const DescriptorVector& fmd_i, const DescriptorVector& fmd_j, const DistanceOptions& options) {
    if (fmd_i.values.size() != fmd_j.values.size() || fmd_i.values.size() % 2 != 0)
        throw ValidationError("kld_distance: FMD layouts differ");
    const Index h = fmd_i.values.size() / 2;
    const Vector mu_i = fmd_i.values.head(h), mu_j = fmd_j.values.head(h);
    const Vector var_i = fmd_i.values.tail(h).array().square(), var_j = fmd_j.values.tail(h).array().square();
    double kld = kld_diag(mu_i, var_i, mu_j, var_j, options.variance_floor);
    if (options.symmetrise) kld = 0.5 * (kld + kld_diag(mu_j, var_j, mu_i, var_i, options.variance_floor));
    return options.kld_log == KldLog::plus1 ? std::log1p(kld) : std::log(kld);
}

double cross_prediction_error(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b, int embed_dim) {
    if (embed_dim < 1) throw ValidationError("cross_prediction_error: embedding dimension must be positive");
    if (a.cols() != b.cols()) throw ValidationError("cross_prediction_error: dimensionality mismatch");
    if (a.rows() < embed_dim + 2 || b.rows() < embed_dim + 2)
        throw ValidationError("cross_prediction_error: sequences shorter than embedding dimension + 2");

    const Index d = embed_dim;
    const Index h = b.cols();
    const Index na = a.rows() - d;  // windows of a that have a successor
    const Index nb = b.rows() - d;
    const Matrix targets = b.bottomRows(nb);

    // window distance to a's window ending at frame s - 1, summed from the latest frame back
    auto exact = [&](Index t, Index s) {
        double dist = 0.0;
        for (Index lag = 1; lag <= d; ++lag) dist += (a.row(s - lag) - b.row(t - lag)).squaredNorm();
        return dist;
    };

    Matrix predicted(nb, h);
    constexpr Index block = 128;
    Matrix frames, windows;
    for (Index start = 0; start < nb; start += block) {
        const Index rows = std::min(block, nb - start);
        // frame-to-frame squared distances (a frames down, b frames across); a window distance
        // is a sum along a diagonal
        frames.setZero(na + d - 1, rows + d - 1);
        for (Index c = 0; c < h; ++c) {
            const auto ac = a.col(c).head(na + d - 1).array();
            for (Index i = 0; i < frames.cols(); ++i) frames.col(i).array() += (ac - b(start + i, c)).square();
        }
        windows = frames.block(d - 1, d - 1, na, rows);
        for (Index lag = d - 2; lag >= 0; --lag) windows += frames.block(lag, lag, na, rows);

        for (Index r = 0; r < rows; ++r) {
            const auto col = windows.col(r);
            const double best_approx = col.minCoeff();
            // every term is non-negative, so the rounding error is relative to the value itself
            const double slack = 1e-12 * best_approx + 1e-300;
            Index best = -1;
            double best_exact = std::numeric_limits<double>::infinity();
            for (Index j = 0; j < na; ++j) {
                if (col(j) > best_approx + slack) continue;
                const double e = exact(start + r + d, j + d);
                if (e < best_exact) {
                    best_exact = e;
                    best = j;
                }
            }
            predicted.row(start + r) = a.row(best + d);
        }
    }

    const Eigen::RowVectorXd mse = (predicted - targets).colwise().squaredNorm() / double(nb);
    const Eigen::RowVectorXd mean = targets.colwise().mean();
    const Eigen::RowVectorXd var = (targets.rowwise() - mean).colwise().squaredNorm() / double(nb);
    const double nmse = (mse.array() / var.array().max(1e-12)).mean();
    return std::sqrt(nmse);
}

std::vector<std::string> distance_columns(const Dataset& ds, int set, const FcdOptions& fcd) {
    std::vector<std::string> out;
    auto add_fcd = [&] {
        for (const auto& f : ds.feature_names)
            for (int factor : factors_for(ds, f, fcd)) out.push_back(fcd_name(f, factor));
    };
    auto add_prefixed = [&](const std::string& prefix) {
        for (const auto& f : ds.feature_names) out.push_back(prefix + f);
    };
    switch (set) {
        case 1: add_fcd(); break;
        case 2: add_prefixed("xpred:"); break;
        case 3: add_prefixed("fmd:"); break;
        case 4: add_prefixed("kld:"); break;
        case 5:
            add_prefixed("fmd:");
            add_prefixed("kld:");
            break;
        case 6:
            add_fcd();
            add_prefixed("fmd:");
            add_prefixed("kld:");
            break;
        default: throw ValidationError("unknown distance set " + std::to_string(set));
    }
    return out;
}

DistanceTable distance_table(const Dataset& ds, const DescriptorCatalog& catalog,
                             const std::vector<std::pair<std::string, std::string>>& pairs, int set,
                             const DistanceOptions& options, const FcdOptions& fcd, int jobs) {
    return distance_table(ds, catalog, pairs, distance_columns(ds, set, fcd), options, jobs);
}

DistanceTable distance_table(const Dataset& ds, const DescriptorCatalog& catalog,
                             const std::vector<std::pair<std::string, std::string>>& pairs,
                             const std::vector<std::string>& columns, const DistanceOptions& options, int jobs) {
    DistanceTable table;
    table.names = columns;
    table.pairs = pairs;
    table.values.resize(Index(pairs.size()), Index(table.names.size()));

    parallel_for(pairs.size(), jobs, [&](std::size_t p) {
        const auto& [ti, tj] = pairs[p];
        for (std::size_t c = 0; c < table.names.size(); ++c) {
            const auto& name = table.names[c];
            double value = 0.0;
            if (name.rfind("xpred:", 0) == 0) {
                const auto feature = name.substr(6);
                value = cross_prediction_error(ds.feature(ti, feature).frames, ds.feature(tj, feature).frames,
                                               options.embed_dim);
            } else if (name.rfind("kld:", 0) == 0) {
                const auto desc = fmd_name(name.substr(4));
                value = kld_distance(catalog.get(ti, desc), catalog.get(tj, desc), options);
            } else {
                value = euclidean(catalog.get(ti, name).values, catalog.get(tj, name).values);
            }
            table.values(Index(p), Index(c)) = value;
        }
    });
    return table;
}

void write_distances_csv(const DistanceTable& table, std::ostream& out) {
    out << "track_i,track_j,name,value\n";
    for (std::size_t p = 0; p < table.pairs.size(); ++p)
        for (std::size_t c = 0; c < table.names.size(); ++c)
            out << csv::quote(table.pairs[p].first) << ',' << csv::quote(table.pairs[p].second) << ','
                << csv::quote(table.names[c]) << ',' << csv::format9(table.values(Index(p), Index(c))) << '\n';
}

}  // namespace seqcomp
