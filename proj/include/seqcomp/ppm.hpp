#pragma once

#include "seqcomp/symbolic.hpp"

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace seqcomp {

struct CompressionResult {
    double codelength_bits = 0.0;
    std::size_t length = 0;

    /// Bits per symbol, C / T.
    double rate() const { return length == 0 ? 0.0 : codelength_bits / double(length); }
};

/**
 * Adaptive prediction-by-partial-match model, escape method C with exclusions.
 *
 * The next symbol is predicted from the longest context (up to `order` previous symbols) that
 * has been seen before. Within a context holding n occurrences of q distinct non-excluded symbols,
 * a seen symbol s gets c(s) / (n + q) and the escape gets q / (n + q); on escape the symbols of that
 * context are excluded and the next shorter context is consulted. When a context's non-excluded
 * symbols already cover every remaining symbol no escape is possible and s gets c(s) / n. Below
 * order 0 the remaining symbols are uniform. Counts of every context order are updated after each
 * symbol.
 */
class PpmModel {
public:
    PpmModel(int alphabet, int order);

    /// Ideal codelength -log2 P(symbol | history) in bits; then updates the model with the symbol.
    double encode(std::uint8_t symbol);

    /// Predictive distribution of the next symbol given the current history.
    std::vector<double> predictive() const;

    void update(std::uint8_t symbol);

    int alphabet() const { return alphabet_; }
    int order() const { return order_; }
    std::size_t position() const { return history_.size(); }

private:
    // counts of one context, alphabet_ entries, plus total and distinct totals
    struct Node {
        std::uint32_t total = 0;
        std::uint32_t distinct = 0;
    };

    std::uint32_t* counts(int order, std::uint64_t context);
    const std::uint32_t* counts(int order, std::uint64_t context) const;
    const Node* node(int order, std::uint64_t context) const;
    Node* node(int order, std::uint64_t context);
    std::uint64_t context_of(int order) const;
    std::uint64_t slot(int order, std::uint64_t context) const { return offsets_[std::size_t(order)] + context; }

    int alphabet_;
    int order_;
    std::vector<std::uint64_t> offsets_;  // first slot of each context order
    bool dense_ = true;
    std::vector<std::uint32_t> dense_counts_;
    std::vector<Node> dense_nodes_;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> sparse_counts_;
    std::unordered_map<std::uint64_t, Node> sparse_nodes_;
    std::vector<std::uint8_t> history_;
};

/// Summed ideal codelength of a sequence under an order-`order` PPM model started empty.
CompressionResult ppm_codelength(const SymbolSequence& s, int order = 5);

/// Ideal codelength of an LZ78 incremental parse: each phrase costs log2(phrases so far + 1)
/// bits for its prefix index plus log2(alphabet) bits for the new symbol.
CompressionResult lz78_codelength(const SymbolSequence& s);

enum class Compressor { ppm, lz78 };

struct RateOptions {
    int order = 5;
    Compressor compressor = Compressor::ppm;
    DownsampleMethod downsampling = DownsampleMethod::mean;
};

/// downsample -> equal-frequency edges on the downsampled sequence -> quantise -> codelength / T'.
double compression_rate(const Eigen::Ref<const Vector>& x, int lambda, int factor, const RateOptions& options = {});

/// Codelength of an already quantised sequence using the configured compressor.
CompressionResult codelength(const SymbolSequence& s, const RateOptions& options);

}  // namespace seqcomp
