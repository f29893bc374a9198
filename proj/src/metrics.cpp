#include "seqcomp/metrics.hpp"

#include "seqcomp/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace seqcomp {

namespace {

void check_paired(const Eigen::Ref<const Vector>& q, const Eigen::Ref<const Vector>& o, const char* who) {
    if (q.size() != o.size()) throw ValidationError(std::string(who) + ": length mismatch");
    if (q.size() < 2) throw ValidationError(std::string(who) + ": need at least two pairs");
}

double tau_from_counts(double pairs, double tied_q, double tied_o, double numerator) {
    const double denom = (pairs - tied_q) * (pairs - tied_o);
    if (denom <= 0.0) throw UndefinedStatistic("kendall_tau_b: a sequence is entirely tied");
    return numerator / std::sqrt(denom);
}

// pairs among runs of equal values in an already sorted index range
template <typename Eq>
double tied_pairs(const std::vector<Index>& idx, Eq equal) {
    double total = 0.0;
    std::size_t run = 1;
    for (std::size_t i = 1; i <= idx.size(); ++i) {
        if (i < idx.size() && equal(idx[i - 1], idx[i])) {
            ++run;
        } else {
            total += 0.5 * double(run) * double(run - 1);
            run = 1;
        }
    }
    return total;
}

}  // namespace

double kendall_tau_b_naive(const Eigen::Ref<const Vector>& q, const Eigen::Ref<const Vector>& o) {
    check_paired(q, o, "kendall_tau_b");
    const Index m = q.size();
    double concordant = 0, discordant = 0, tied_q = 0, tied_o = 0;
    for (Index i = 0; i < m; ++i)
        for (Index j = i + 1; j < m; ++j) {
            const double dq = q(i) - q(j), d_o = o(i) - o(j);
            if (dq == 0) tied_q += 1;
            if (d_o == 0) tied_o += 1;
            if (dq == 0 || d_o == 0) continue;
            if ((dq > 0) == (d_o > 0))
                concordant += 1;
            else
                discordant += 1;
        }
    return tau_from_counts(0.5 * double(m) * double(m - 1), tied_q, tied_o, concordant - discordant);
}

double kendall_tau_b_fast(const Eigen::Ref<const Vector>& q, const Eigen::Ref<const Vector>& o) {
    check_paired(q, o, "kendall_tau_b");
    const Index m = q.size();
    std::vector<Index> idx(m);
    std::iota(idx.begin(), idx.end(), Index(0));
    std::sort(idx.begin(), idx.end(), [&](Index a, Index b) { return q(a) < q(b) || (q(a) == q(b) && o(a) < o(b)); });

    const double tied_q = tied_pairs(idx, [&](Index a, Index b) { return q(a) == q(b); });
    const double tied_both = tied_pairs(idx, [&](Index a, Index b) { return q(a) == q(b) && o(a) == o(b); });

    // bottom-up merge sort on o, counting exchanges (= discordant pairs)
    double swaps = 0;
    std::vector<Index> buffer(m);
    for (Index width = 1; width < m; width *= 2) {
        for (Index lo = 0; lo < m; lo += 2 * width) {
            const Index mid = std::min(lo + width, m), hi = std::min(lo + 2 * width, m);
            Index i = lo, j = mid, k = lo;
            while (i < mid && j < hi) {
                if (o(idx[j]) < o(idx[i])) {
                    swaps += double(mid - i);
                    buffer[k++] = idx[j++];
                } else {
                    buffer[k++] = idx[i++];
                }
            }
            while (i < mid) buffer[k++] = idx[i++];
            while (j < hi) buffer[k++] = idx[j++];
        }
        idx.swap(buffer);
    }
    const double tied_o = tied_pairs(idx, [&](Index a, Index b) { return o(a) == o(b); });
    const double pairs = 0.5 * double(m) * double(m - 1);
    const double numerator = pairs - tied_q - tied_o + tied_both - 2.0 * swaps;
    return tau_from_counts(pairs, tied_q, tied_o, numerator);
}

double kendall_tau_b(const Eigen::Ref<const Vector>& q, const Eigen::Ref<const Vector>& o) {
    return q.size() <= 5000 ? kendall_tau_b_naive(q, o) : kendall_tau_b_fast(q, o);
}

Vector midranks(const Eigen::Ref<const Vector>& x) {
    const Index m = x.size();
    std::vector<Index> idx(m);
    std::iota(idx.begin(), idx.end(), Index(0));
    std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return x(a) < x(b); });
    Vector ranks(m);
    for (Index start = 0; start < m;) {
        Index end = start + 1;
        while (end < m && x(idx[end]) == x(idx[start])) ++end;
        const double rank = 0.5 * double(start + 1 + end);
        for (Index k = start; k < end; ++k) ranks(idx[k]) = rank;
        start = end;
    }
    return ranks;
}

double pearson(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
    check_paired(a, b, "pearson");
    const Vector ca = a.array() - a.mean();
    const Vector cb = b.array() - b.mean();
    const double denom = std::sqrt(ca.squaredNorm() * cb.squaredNorm());
    if (denom == 0.0) throw UndefinedStatistic("pearson: zero variance");
    return ca.dot(cb) / denom;
}

double spearman_rho(const Eigen::Ref<const Vector>& q, const Eigen::Ref<const Vector>& o) {
    check_paired(q, o, "spearman_rho");
    try {
        return pearson(midranks(q), midranks(o));
    } catch (const UndefinedStatistic&) {
        throw UndefinedStatistic("spearman_rho: zero rank variance");
    }
}

Matrix confusion_matrix(const std::vector<int>& truth, const std::vector<int>& predicted, int classes) {
    if (truth.size() != predicted.size()) throw ValidationError("confusion_matrix: length mismatch");
    Matrix c = Matrix::Zero(classes, classes);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 1 || truth[i] > classes || predicted[i] < 1 || predicted[i] > classes)
            throw ValidationError("confusion_matrix: label out of range");
        c(truth[i] - 1, predicted[i] - 1) += 1;
    }
    return c;
}

double balanced_accuracy(const Eigen::Ref<const Matrix>& confusion) {
    if (confusion.rows() != confusion.cols() || confusion.rows() == 0)
        throw ValidationError("balanced_accuracy: confusion matrix must be square");
    double total = 0.0;
    for (Index k = 0; k < confusion.rows(); ++k) {
        const double row = confusion.row(k).sum();
        if (row <= 0.0) throw UndefinedStatistic("balanced_accuracy: class " + std::to_string(k + 1) + " has no samples");
        total += confusion(k, k) / row;
    }
    return total / double(confusion.rows());
}

ErrorSummary mae_rmse(const Eigen::Ref<const Vector>& pred, const Eigen::Ref<const Vector>& obs) {
    if (pred.size() != obs.size()) throw ValidationError("mae_rmse: length mismatch");
    if (pred.size() == 0) throw ValidationError("mae_rmse: empty sample");
    const Vector err = pred - obs;
    return {err.cwiseAbs().mean(), std::sqrt(err.squaredNorm() / double(err.size()))};
}

std::string statistic_name(Statistic s) {
    switch (s) {
        case Statistic::tau_b: return "tau_b";
        case Statistic::rho_s: return "rho_s";
        case Statistic::ba: return "ba";
        case Statistic::mae: return "mae";
        case Statistic::rmse: return "rmse";
        case Statistic::mse: return "mse";
    }
    return "?";
}

Statistic parse_statistic(const std::string& name) {
    for (auto s : {Statistic::tau_b, Statistic::rho_s, Statistic::ba, Statistic::mae, Statistic::rmse, Statistic::mse})
        if (statistic_name(s) == name) return s;
    throw ValidationError("unknown statistic '" + name + "'");
}

double evaluate(Statistic s, const Eigen::Ref<const Vector>& pred, const Eigen::Ref<const Vector>& obs, int classes) {
    switch (s) {
        case Statistic::tau_b: return kendall_tau_b(pred, obs);
        case Statistic::rho_s: return spearman_rho(pred, obs);
        case Statistic::ba: {
            if (classes < 2) throw ValidationError("balanced accuracy needs the class count");
            std::vector<int> p(pred.size()), t(obs.size());
            for (Index i = 0; i < pred.size(); ++i) {
                p[i] = int(std::lround(pred(i)));
                t[i] = int(std::lround(obs(i)));
            }
            return balanced_accuracy(confusion_matrix(t, p, classes));
        }
        case Statistic::mae: return mae_rmse(pred, obs).mae;
        case Statistic::rmse: return mae_rmse(pred, obs).rmse;
        case Statistic::mse: {
            const double r = mae_rmse(pred, obs).rmse;
            return r * r;
        }
    }
    throw ValidationError("unknown statistic");
}

namespace {

double percentile(const std::vector<double>& sorted, double p) {
    const double pos = p * double(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - double(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

BootstrapResult bootstrap(Statistic s, const Eigen::Ref<const Vector>& pred, const Eigen::Ref<const Vector>& obs,
                          int resamples, double level, std::uint64_t seed, int classes, int jobs) {
    if (resamples < 100) throw ValidationError("bootstrap: need at least 100 resamples");
    if (!(level > 0.0 && level < 1.0)) throw ValidationError("bootstrap: level must lie in (0, 1)");
    if (pred.size() != obs.size()) throw ValidationError("bootstrap: length mismatch");

    BootstrapResult out;
    out.statistic = s;
    out.value = evaluate(s, pred, obs, classes);
    out.level = level;
    out.resamples = resamples;
    out.seed = seed;

    const Index m = pred.size();
    const int redraw_cap = resamples / 2;
    std::vector<double> values(resamples);
    std::vector<int> redraws(resamples, 0);
    parallel_for(std::size_t(resamples), jobs, [&](std::size_t b) {
        std::mt19937_64 rng(derive_seed(seed, b));
        std::uniform_int_distribution<Index> pick(0, m - 1);
        Vector p(m), o(m);
        for (;;) {
            for (Index i = 0; i < m; ++i) {
                const Index k = pick(rng);
                p(i) = pred(k);
                o(i) = obs(k);
            }
            try {
                values[b] = evaluate(s, p, o, classes);
                return;
            } catch (const UndefinedStatistic&) {
                if (++redraws[b] > redraw_cap)
                    throw UndefinedStatistic("bootstrap: statistic undefined on most resamples");
            }
        }
    });
    out.redraws = std::accumulate(redraws.begin(), redraws.end(), 0);
    if (out.redraws > redraw_cap) throw UndefinedStatistic("bootstrap: statistic undefined on most resamples");

    const Eigen::Map<const Vector> v(values.data(), resamples);
    out.se = std::sqrt((v.array() - v.mean()).square().sum() / double(resamples - 1));
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    out.lo = percentile(sorted, 0.5 * (1.0 - level));
    out.hi = percentile(sorted, 1.0 - 0.5 * (1.0 - level));
    return out;
}

ScaledLabels merge_four_point(const ScaledLabels& in) {
    if (in.scale != RatingScale::five) throw ValidationError("merge_four_point: input is already on the four-point scale");
    ScaledLabels out{RatingScale::four, {}};
    out.labels.reserve(in.labels.size());
    for (int l : in.labels) {
        if (l < 1 || l > 5) throw ValidationError("merge_four_point: score " + std::to_string(l) + " is not five-point");
        out.labels.push_back(l <= 2 ? 1 : l - 1);
    }
    return out;
}

ScaledConfusion merge_four_point(const ScaledConfusion& in) {
    if (in.scale != RatingScale::five) throw ValidationError("merge_four_point: input is already on the four-point scale");
    if (in.counts.rows() != 5 || in.counts.cols() != 5) throw ValidationError("merge_four_point: expected a 5x5 matrix");
    // M maps five classes onto four; merged = M C M'
    Matrix m = Matrix::Zero(4, 5);
    m(0, 0) = m(0, 1) = 1;
    for (int k = 2; k < 5; ++k) m(k - 1, k) = 1;
    return {RatingScale::four, m * in.counts * m.transpose()};
}

std::string label_name(RatingScale scale, int label) {
    if (scale == RatingScale::four) return label == 1 ? "1;2" : std::to_string(label + 1);
    return std::to_string(label);
}

}  // namespace seqcomp
