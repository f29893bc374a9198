#include "seqcomp/symbolic.hpp"

#include <algorithm>

namespace seqcomp {

BinEdges equal_frequency_edges(const Eigen::Ref<const Vector>& x, int lambda) {
    if (lambda < 2 || lambda > 255) throw ValidationError("equal_frequency_edges: lambda must lie in [2, 255]");
    const Index length = x.size();
    if (length < lambda) throw ValidationError("equal_frequency_edges: sequence shorter than lambda");
    std::vector<double> sorted(x.data(), x.data() + length);
    std::sort(sorted.begin(), sorted.end());
    BinEdges out;
    out.edges.reserve(static_cast<std::size_t>(lambda - 1));
    for (Index m = 1; m < lambda; ++m) {
        const Index rank = (m * length + lambda - 1) / lambda;  // ceil(m T / lambda), 1-based
        out.edges.push_back(sorted[static_cast<std::size_t>(rank - 1)]);
    }
    return out;
}

SymbolSequence quantise(const Eigen::Ref<const Vector>& x, const BinEdges& edges) {
    if (edges.edges.empty() || edges.edges.size() > 254)
        throw ValidationError("quantise: need between 1 and 254 edges");
    if (!std::is_sorted(edges.edges.begin(), edges.edges.end()))
        throw ValidationError("quantise: edges must be non-decreasing");
    SymbolSequence out;
    out.alphabet = edges.alphabet();
    out.symbols.resize(static_cast<std::size_t>(x.size()));
    for (Index t = 0; t < x.size(); ++t) {
        const auto below = std::lower_bound(edges.edges.begin(), edges.edges.end(), x(t)) - edges.edges.begin();
        out.symbols[static_cast<std::size_t>(t)] = static_cast<std::uint8_t>(below);
    }
    return out;
}

}  // namespace seqcomp
