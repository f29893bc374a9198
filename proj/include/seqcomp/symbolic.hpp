#pragma once

#include "seqcomp/common.hpp"

#include <cstdint>
#include <vector>

namespace seqcomp {

/// Symbols in [0, alphabet).
struct SymbolSequence {
    std::vector<std::uint8_t> symbols;
    int alphabet = 0;

    std::size_t size() const { return symbols.size(); }
    bool operator==(const SymbolSequence&) const = default;
};

/// alphabet - 1 non-decreasing thresholds.
struct BinEdges {
    std::vector<double> edges;

    int alphabet() const { return static_cast<int>(edges.size()) + 1; }
};

enum class DownsampleMethod { mean, decimate };

/// Non-overlapping window pooling; a trailing partial window is dropped. Factor 1 is the identity.
/// `decimate` keeps the first sample of each window instead of the window mean.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> downsample(const Eigen::MatrixBase<Derived>& x, int factor,
                                                                      DownsampleMethod method = DownsampleMethod::mean) {
    using Scalar = typename Derived::Scalar;
    static_assert(Derived::ColsAtCompileTime == 1 || Derived::ColsAtCompileTime == Eigen::Dynamic,
                  "downsample expects a column vector");
    if (x.cols() != 1) throw ValidationError("downsample: expected a single column");
    if (factor < 1) throw ValidationError("downsample: factor must be positive");
    const Index length = x.rows();
    if (length < factor) throw ValidationError("downsample: sequence shorter than factor");
    if (factor == 1) return x;
    const Index out_len = length / factor;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(out_len);
    for (Index j = 0; j < out_len; ++j) {
        out(j) = method == DownsampleMethod::mean ? x.segment(j * factor, factor).mean() : x(j * factor);
    }
    return out;
}

/// Empirical quantiles at m / lambda, m = 1..lambda-1, taken as the order statistic ceil(p * T).
BinEdges equal_frequency_edges(const Eigen::Ref<const Vector>& x, int lambda);

/// symbol(t) = number of edges strictly below x(t); values on an edge fall in the lower bin.
SymbolSequence quantise(const Eigen::Ref<const Vector>& x, const BinEdges& edges);

}  // namespace seqcomp
