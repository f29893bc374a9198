#include "seqcomp/descriptors.hpp"

#include "seqcomp/csv.hpp"
#include "seqcomp/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace seqcomp {

PcaResult track_pca(const Eigen::Ref<const Matrix>& frames) {
    const Index length = frames.rows();
    const Index dims = frames.cols();
    if (dims < 1) throw ValidationError("track_pca: no columns");
    if (length <= dims) throw ValidationError("track_pca: need more frames than dimensions");
    if (!frames.allFinite()) throw ValidationError("track_pca: non-finite input");

    const Matrix centred = frames.rowwise() - frames.colwise().mean();
    PcaResult out;
    const double scale = std::max(1.0, frames.cwiseAbs().maxCoeff());
    if (centred.cwiseAbs().maxCoeff() <= 1e-12 * scale) {
        out.scores = Matrix::Zero(length, dims);
        out.loadings = Matrix::Identity(dims, dims);
        out.variances = Vector::Zero(dims);
        out.degenerate = true;
        return out;
    }

    const Matrix cov = (centred.transpose() * centred) / double(length);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
    if (solver.info() != Eigen::Success) throw ValidationError("track_pca: eigen-decomposition failed");

    out.loadings = solver.eigenvectors().rowwise().reverse();
    for (Index k = 0; k < dims; ++k) {
        Index arg = 0;
        out.loadings.col(k).cwiseAbs().maxCoeff(&arg);
        if (out.loadings(arg, k) < 0.0) out.loadings.col(k) *= -1.0;
    }
    out.scores = centred * out.loadings;
    out.variances = out.scores.colwise().squaredNorm().transpose() / double(length);
    return out;
}

std::string fcd_name(const std::string& feature, int factor) { return "fcd:" + feature + ":" + std::to_string(factor); }

std::string fmd_name(const std::string& feature) { return "fmd:" + feature; }

std::vector<int> factors_for(const Dataset& ds, const std::string& feature, const FcdOptions& options) {
    if (ds.feature_is_variable_rate(feature)) return {1};
    return options.factors;
}

namespace {

int max_lambda(const FcdOptions& options) {
    if (options.lambdas.empty()) throw ValidationError("FCD: empty lambda set");
    return *std::max_element(options.lambdas.begin(), options.lambdas.end());
}

// component score sequences used for compression: the raw column for scalar features, the
// retained principal components otherwise
std::vector<Vector> fcd_components(const FeatureSequence& seq, const FcdOptions& options) {
    if (seq.dims() == 1) return {seq.frames.col(0)};
    const auto pca = track_pca(seq.frames);
    std::vector<Vector> comps;
    for (Index k = 0; k < seq.dims(); ++k) {
        if (k == 0 || pca.variances(k) >= options.variance_ratio_floor * pca.variances(0))
            comps.emplace_back(pca.scores.col(k));
    }
    return comps;
}

}  // namespace

CorpusEdges corpus_edges(const Dataset& ds, const std::vector<std::string>& track_ids, const FcdOptions& options) {
    std::map<std::tuple<std::string, int, int>, std::vector<double>> pools;
    for (const auto& id : track_ids) {
        for (const auto& feature : ds.feature_names) {
            const auto& seq = ds.feature(id, feature);
            const auto comps = fcd_components(seq, options);
            for (int factor : factors_for(ds, feature, options)) {
                if (seq.length() / factor < max_lambda(options)) continue;
                for (std::size_t k = 0; k < comps.size(); ++k) {
                    const Vector pooled = downsample(comps[k], factor, options.rate.downsampling);
                    auto& pool = pools[{feature, int(k), factor}];
                    pool.insert(pool.end(), pooled.data(), pooled.data() + pooled.size());
                }
            }
        }
    }
    CorpusEdges out;
    for (const auto& [key, values] : pools) {
        const Eigen::Map<const Vector> view(values.data(), Index(values.size()));
        for (int lambda : options.lambdas) {
            out.edges[{std::get<0>(key), std::get<1>(key), std::get<2>(key), lambda}] =
                equal_frequency_edges(view, lambda);
        }
    }
    return out;
}

std::vector<DescriptorVector> compute_fcd(const std::string& track_id, const Dataset& ds, const FcdOptions& options,
                                          const CorpusEdges* corpus, FcdDiagnostics* diagnostics) {
    if (options.binning == Binning::corpus && corpus == nullptr)
        throw ValidationError("compute_fcd: corpus binning requested without corpus edges");
    const int lambda_max = max_lambda(options);
    std::vector<DescriptorVector> out;
    for (const auto& feature : ds.feature_names) {
        const auto& seq = ds.feature(track_id, feature);
        const auto factors = factors_for(ds, feature, options);
        std::vector<Vector> comps;
        try {
            comps = fcd_components(seq, options);
        } catch (const ValidationError& e) {
            if (diagnostics) diagnostics->issues.push_back(track_id + "/" + feature + ": " + e.what());
            for (int factor : factors)
                out.push_back({track_id, fcd_name(feature, factor), Vector(), true});
            continue;
        }
        if (diagnostics) diagnostics->retained_components[feature] = int(comps.size());

        for (int factor : factors) {
            DescriptorVector dv{track_id, fcd_name(feature, factor), Vector::Zero(Index(options.lambdas.size())), false};
            const Index pooled_len = seq.length() / factor;
            if (pooled_len < lambda_max) {
                dv.missing = true;
                dv.values.resize(0);
                if (diagnostics)
                    diagnostics->issues.push_back(track_id + "/" + feature + ": sequence too short for factor " +
                                                  std::to_string(factor));
                out.push_back(std::move(dv));
                continue;
            }
            for (std::size_t k = 0; k < comps.size(); ++k) {
                const Vector pooled = downsample(comps[k], factor, options.rate.downsampling);
                for (std::size_t l = 0; l < options.lambdas.size(); ++l) {
                    const int lambda = options.lambdas[l];
                    const BinEdges edges = corpus ? corpus->edges.at({feature, int(k), factor, lambda})
                                                  : equal_frequency_edges(pooled, lambda);
                    dv.values(Index(l)) += codelength(quantise(pooled, edges), options.rate).codelength_bits;
                }
            }
            // mean codelength over components, per symbol of the pooled sequence
            dv.values /= double(comps.size()) * double(pooled_len);
            out.push_back(std::move(dv));
        }
    }
    return out;
}

std::vector<DescriptorVector> compute_fmd(const std::string& track_id, const Dataset& ds) {
    std::vector<DescriptorVector> out;
    for (const auto& feature : ds.feature_names) {
        const auto& frames = ds.feature(track_id, feature).frames;
        const Index dims = frames.cols();
        DescriptorVector dv{track_id, fmd_name(feature), Vector(2 * dims), false};
        // sums over sorted terms, so a reordering of the frames leaves the moments bit-identical
        std::vector<double> terms(std::size_t(frames.rows()));
        auto sorted_sum = [&] {
            std::sort(terms.begin(), terms.end());
            return std::accumulate(terms.begin(), terms.end(), 0.0);
        };
        const double n = double(frames.rows());
        for (Index c = 0; c < dims; ++c) {
            for (Index r = 0; r < frames.rows(); ++r) terms[std::size_t(r)] = frames(r, c);
            const double mean = sorted_sum() / n;
            for (Index r = 0; r < frames.rows(); ++r) terms[std::size_t(r)] = (frames(r, c) - mean) * (frames(r, c) - mean);
            dv.values(c) = mean;
            dv.values(dims + c) = std::sqrt(sorted_sum() / n);
        }
        out.push_back(std::move(dv));
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Catalog

std::size_t DescriptorCatalog::index_of(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ValidationError("unknown descriptor '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
}

const DescriptorVector& DescriptorCatalog::get(const std::string& track_id, const std::string& name) const {
    const auto it = by_track.find(track_id);
    if (it == by_track.end() || it->second.empty())
        throw ValidationError("missing descriptor: no descriptors for track " + track_id);
    const auto& dv = it->second[index_of(name)];
    if (dv.missing) throw ValidationError("missing descriptor '" + name + "' for track " + track_id);
    return dv;
}

bool DescriptorCatalog::complete(const std::string& track_id, const std::vector<std::string>& wanted) const {
    const auto it = by_track.find(track_id);
    if (it == by_track.end() || it->second.empty()) return false;
    for (const auto& name : wanted)
        if (it->second[index_of(name)].missing) return false;
    return true;
}

Matrix DescriptorCatalog::matrix(const std::vector<std::string>& tracks, const std::vector<std::string>& wanted,
                                 std::vector<std::string>* columns) const {
    std::vector<std::size_t> idx;
    Index width = 0;
    for (const auto& name : wanted) {
        idx.push_back(index_of(name));
        width += Index(component_labels[idx.back()].size());
    }
    if (columns) {
        columns->clear();
        for (auto i : idx)
            for (const auto& label : component_labels[i]) columns->push_back(names[i] + ":" + label);
    }
    Matrix out(Index(tracks.size()), width);
    for (std::size_t r = 0; r < tracks.size(); ++r) {
        Index c = 0;
        for (std::size_t n = 0; n < wanted.size(); ++n) {
            const auto& dv = get(tracks[r], wanted[n]);
            out.row(Index(r)).segment(c, dv.values.size()) = dv.values.transpose();
            c += dv.values.size();
        }
    }
    return out;
}

std::vector<std::string> DescriptorCatalog::fcd_names() const {
    std::vector<std::string> out;
    for (const auto& n : names)
        if (n.rfind("fcd:", 0) == 0) out.push_back(n);
    return out;
}

std::vector<std::string> DescriptorCatalog::fmd_names() const {
    std::vector<std::string> out;
    for (const auto& n : names)
        if (n.rfind("fmd:", 0) == 0) out.push_back(n);
    return out;
}

DescriptorCatalog compute_descriptors(const Dataset& ds, const FcdOptions& options, int jobs) {
    DescriptorCatalog cat;
    for (const auto& t : ds.tracks) cat.track_ids.push_back(t.track_id);
    for (const auto& feature : ds.feature_names) {
        for (int factor : factors_for(ds, feature, options)) {
            cat.names.push_back(fcd_name(feature, factor));
            std::vector<std::string> labels;
            for (int lambda : options.lambdas) labels.push_back("l" + std::to_string(lambda));
            cat.component_labels.push_back(std::move(labels));
        }
    }
    for (const auto& feature : ds.feature_names) {
        cat.names.push_back(fmd_name(feature));
        const Index dims = ds.feature_dims(feature);
        std::vector<std::string> labels;
        for (Index d = 0; d < dims; ++d) labels.push_back("mean" + std::to_string(d));
        for (Index d = 0; d < dims; ++d) labels.push_back("std" + std::to_string(d));
        cat.component_labels.push_back(std::move(labels));
    }

    CorpusEdges corpus;
    if (options.binning == Binning::corpus) corpus = corpus_edges(ds, cat.track_ids, options);

    std::vector<std::vector<DescriptorVector>> results(cat.track_ids.size());
    std::vector<std::vector<std::string>> issues(cat.track_ids.size());
    parallel_for(cat.track_ids.size(), jobs, [&](std::size_t i) {
        const auto& id = cat.track_ids[i];
        try {
            FcdDiagnostics diag;
            auto fcd = compute_fcd(id, ds, options, options.binning == Binning::corpus ? &corpus : nullptr, &diag);
            auto fmd = compute_fmd(id, ds);
            fcd.insert(fcd.end(), std::make_move_iterator(fmd.begin()), std::make_move_iterator(fmd.end()));
            results[i] = std::move(fcd);
            issues[i] = std::move(diag.issues);
        } catch (const std::exception& e) {
            results[i].clear();
            issues[i] = {id + ": skipped: " + e.what()};
        }
    });
    for (std::size_t i = 0; i < cat.track_ids.size(); ++i) {
        cat.by_track[cat.track_ids[i]] = std::move(results[i]);
        if (!issues[i].empty()) cat.issues[cat.track_ids[i]] = std::move(issues[i]);
    }
    return cat;
}

void write_descriptors_csv(const DescriptorCatalog& catalog, std::ostream& out) {
    out << "track_id,name,component,value\n";
    for (const auto& id : catalog.track_ids) {
        const auto it = catalog.by_track.find(id);
        if (it == catalog.by_track.end()) continue;
        for (std::size_t n = 0; n < it->second.size(); ++n) {
            const auto& dv = it->second[n];
            if (dv.missing) continue;
            const auto& labels = catalog.component_labels[n];
            for (Index c = 0; c < dv.values.size(); ++c) {
                out << csv::quote(id) << ',' << csv::quote(dv.name) << ',' << labels[std::size_t(c)] << ','
                    << csv::format9(dv.values(c)) << '\n';
            }
        }
    }
}

}  // namespace seqcomp
