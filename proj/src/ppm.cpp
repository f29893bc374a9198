#include "seqcomp/ppm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

namespace seqcomp {

namespace {

constexpr std::uint64_t kDenseLimit = 1u << 22;  // count cells held in a flat table

}  // namespace

PpmModel::PpmModel(int alphabet, int order) : alphabet_(alphabet), order_(order) {
    if (alphabet < 2 || alphabet > 255) throw ValidationError("PpmModel: alphabet must lie in [2, 255]");
    if (order < 0 || order > 32) throw ValidationError("PpmModel: order must lie in [0, 32]");
    offsets_.resize(static_cast<std::size_t>(order) + 2);
    std::uint64_t power = 1;
    offsets_[0] = 0;
    for (int o = 0; o <= order; ++o) {
        offsets_[std::size_t(o) + 1] = offsets_[std::size_t(o)] + power;
        if (o < order) {
            if (power > (std::uint64_t(1) << 56) / std::uint64_t(alphabet))
                throw ValidationError("PpmModel: alphabet^order too large for context indexing");
            power *= std::uint64_t(alphabet);
        }
    }
    const std::uint64_t slots = offsets_.back();
    dense_ = slots <= kDenseLimit / std::uint64_t(alphabet);
    if (dense_) {
        dense_counts_.assign(slots * std::uint64_t(alphabet), 0);
        dense_nodes_.assign(slots, Node{});
    }
}

std::uint64_t PpmModel::context_of(int order) const {
    std::uint64_t ctx = 0;
    const std::size_t t = history_.size();
    for (int i = 1; i <= order; ++i) ctx = ctx * std::uint64_t(alphabet_) + history_[t - std::size_t(i)];
    return ctx;
}

const PpmModel::Node* PpmModel::node(int order, std::uint64_t context) const {
    const auto key = slot(order, context);
    if (dense_) return &dense_nodes_[key];
    auto it = sparse_nodes_.find(key);
    return it == sparse_nodes_.end() ? nullptr : &it->second;
}

PpmModel::Node* PpmModel::node(int order, std::uint64_t context) {
    const auto key = slot(order, context);
    if (dense_) return &dense_nodes_[key];
    return &sparse_nodes_[key];
}

const std::uint32_t* PpmModel::counts(int order, std::uint64_t context) const {
    const auto key = slot(order, context);
    if (dense_) return dense_counts_.data() + key * std::uint64_t(alphabet_);
    auto it = sparse_counts_.find(key);
    return it == sparse_counts_.end() ? nullptr : it->second.data();
}

std::uint32_t* PpmModel::counts(int order, std::uint64_t context) {
    const auto key = slot(order, context);
    if (dense_) return dense_counts_.data() + key * std::uint64_t(alphabet_);
    auto& c = sparse_counts_[key];
    if (c.empty()) c.assign(std::size_t(alphabet_), 0);
    return c.data();
}

double PpmModel::encode(std::uint8_t symbol) {
    if (symbol >= alphabet_) throw ValidationError("ppm: symbol outside the alphabet");
    const int longest = static_cast<int>(std::min<std::size_t>(std::size_t(order_), history_.size()));
    std::array<std::uint8_t, 256> excluded{};
    int n_excluded = 0;
    double bits = 0.0;
    bool coded = false;
    for (int o = longest; o >= 0 && !coded; --o) {
        const auto ctx = context_of(o);
        const Node* nd = node(o, ctx);
        if (nd == nullptr || nd->total == 0) continue;
        const std::uint32_t* c = counts(o, ctx);
        std::uint64_t n = 0;
        int q = 0;
        for (int a = 0; a < alphabet_; ++a) {
            if (!excluded[std::size_t(a)] && c[a] > 0) {
                n += c[a];
                ++q;
            }
        }
        if (n == 0) continue;
        const int remaining = alphabet_ - n_excluded;
        if (!excluded[symbol] && c[symbol] > 0) {
            const double denom = q == remaining ? double(n) : double(n + std::uint64_t(q));
            bits -= std::log2(double(c[symbol]) / denom);
            coded = true;
        } else {
            bits -= std::log2(double(q) / double(n + std::uint64_t(q)));
            for (int a = 0; a < alphabet_; ++a) {
                if (!excluded[std::size_t(a)] && c[a] > 0) {
                    excluded[std::size_t(a)] = 1;
                    ++n_excluded;
                }
            }
        }
    }
    if (!coded) bits += std::log2(double(alphabet_ - n_excluded));
    update(symbol);
    return bits;
}

std::vector<double> PpmModel::predictive() const {
    const int longest = static_cast<int>(std::min<std::size_t>(std::size_t(order_), history_.size()));
    std::vector<double> probs(std::size_t(alphabet_), 0.0);
    std::vector<char> excluded(std::size_t(alphabet_), 0);
    int n_excluded = 0;
    double mass = 1.0;
    for (int o = longest; o >= 0 && mass > 0.0; --o) {
        const auto ctx = context_of(o);
        const Node* nd = node(o, ctx);
        if (nd == nullptr || nd->total == 0) continue;
        const std::uint32_t* c = counts(o, ctx);
        std::uint64_t n = 0;
        int q = 0;
        for (int a = 0; a < alphabet_; ++a) {
            if (!excluded[std::size_t(a)] && c[a] > 0) {
                n += c[a];
                ++q;
            }
        }
        if (n == 0) continue;
        const bool closed = q == alphabet_ - n_excluded;
        const double denom = closed ? double(n) : double(n + std::uint64_t(q));
        for (int a = 0; a < alphabet_; ++a) {
            if (!excluded[std::size_t(a)] && c[a] > 0) {
                probs[std::size_t(a)] += mass * double(c[a]) / denom;
                excluded[std::size_t(a)] = 1;
                ++n_excluded;
            }
        }
        mass = closed ? 0.0 : mass * double(q) / denom;
    }
    if (mass > 0.0) {
        const double share = mass / double(alphabet_ - n_excluded);
        for (int a = 0; a < alphabet_; ++a)
            if (!excluded[std::size_t(a)]) probs[std::size_t(a)] += share;
    }
    return probs;
}

void PpmModel::update(std::uint8_t symbol) {
    if (symbol >= alphabet_) throw ValidationError("ppm: symbol outside the alphabet");
    const int longest = static_cast<int>(std::min<std::size_t>(std::size_t(order_), history_.size()));
    for (int o = 0; o <= longest; ++o) {
        const auto ctx = context_of(o);
        counts(o, ctx)[symbol] += 1;
        node(o, ctx)->total += 1;
    }
    history_.push_back(symbol);
}

CompressionResult ppm_codelength(const SymbolSequence& s, int order) {
    if (s.symbols.empty()) throw ValidationError("ppm_codelength: empty sequence");
    PpmModel model(s.alphabet, order);
    CompressionResult out;
    for (auto symbol : s.symbols) out.codelength_bits += model.encode(symbol);
    out.length = s.size();
    return out;
}

CompressionResult lz78_codelength(const SymbolSequence& s) {
    if (s.symbols.empty()) throw ValidationError("lz78_codelength: empty sequence");
    if (s.alphabet < 2) throw ValidationError("lz78_codelength: alphabet must be at least 2");
    std::map<std::pair<std::size_t, std::uint8_t>, std::size_t> trie;
    std::size_t phrases = 0;
    std::size_t current = 0;  // 0 = root
    double bits = 0.0;
    const double symbol_bits = std::log2(double(s.alphabet));
    for (auto symbol : s.symbols) {
        if (symbol >= s.alphabet) throw ValidationError("lz78: symbol outside the alphabet");
        auto it = trie.find({current, symbol});
        if (it != trie.end()) {
            current = it->second;
            continue;
        }
        bits += std::log2(double(phrases + 1)) + symbol_bits;
        ++phrases;
        trie.emplace(std::make_pair(current, symbol), phrases);
        current = 0;
    }
    if (current != 0) bits += std::log2(double(phrases + 1));
    return {bits, s.size()};
}

CompressionResult codelength(const SymbolSequence& s, const RateOptions& options) {
    return options.compressor == Compressor::ppm ? ppm_codelength(s, options.order) : lz78_codelength(s);
}

double compression_rate(const Eigen::Ref<const Vector>& x, int lambda, int factor, const RateOptions& options) {
    const Vector pooled = downsample(x, factor, options.downsampling);
    const auto edges = equal_frequency_edges(pooled, lambda);
    return codelength(quantise(pooled, edges), options).rate();
}

}  // namespace seqcomp
