#pragma once

#include "seqcomp/common.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace seqcomp {

/// O(M^2) pair enumeration of (M_c - M_d) / sqrt((M_p - M_q)(M_p - M_o)). Pairs tied in both
/// sequences count towards both M_q and M_o.
double kendall_tau_b_naive(const Eigen::Ref<const Vector>& q, const Eigen::Ref<const Vector>& o);

/// Knight's O(M log M) merge-sort algorithm for the same quantity.
double kendall_tau_b_fast(const Eigen::Ref<const Vector>& q, const Eigen::Ref<const Vector>& o);

/// Naive up to 5000 pairs, merge-sort above. Throws UndefinedStatistic if either side is all tied.
double kendall_tau_b(const Eigen::Ref<const Vector>& q, const Eigen::Ref<const Vector>& o);

/// Fractional ranks, 1-based, ties receiving their average rank.
Vector midranks(const Eigen::Ref<const Vector>& x);

double pearson(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

/// Pearson correlation of midranks. Throws UndefinedStatistic on zero rank variance.
double spearman_rho(const Eigen::Ref<const Vector>& q, const Eigen::Ref<const Vector>& o);

/// K x K counts, rows = true class. Labels are 1..K.
Matrix confusion_matrix(const std::vector<int>& truth, const std::vector<int>& predicted, int classes);

/// Mean over rows of diagonal / row sum. Throws UndefinedStatistic on an empty row.
double balanced_accuracy(const Eigen::Ref<const Matrix>& confusion);

struct ErrorSummary {
    double mae = 0.0;
    double rmse = 0.0;
};

ErrorSummary mae_rmse(const Eigen::Ref<const Vector>& pred, const Eigen::Ref<const Vector>& obs);

enum class Statistic { tau_b, rho_s, ba, mae, rmse, mse };

std::string statistic_name(Statistic s);
Statistic parse_statistic(const std::string& name);

/// Evaluates `s` on (predicted, observed). `classes` is needed only for balanced accuracy, where
/// values are integer labels 1..classes.
double evaluate(Statistic s, const Eigen::Ref<const Vector>& pred, const Eigen::Ref<const Vector>& obs,
                int classes = 0);

struct BootstrapResult {
    Statistic statistic = Statistic::tau_b;
    double value = 0.0;
    double se = 0.0;
    double level = 0.95;
    double lo = 0.0;
    double hi = 0.0;
    int resamples = 0;
    std::uint64_t seed = 0;
    int redraws = 0;
};

/// Percentile bootstrap over index pairs. Resample b draws from a generator seeded with
/// derive_seed(seed, b), so results do not depend on scheduling. Undefined resamples are redrawn
/// from the same generator; more than B/2 redraws is an error.
BootstrapResult bootstrap(Statistic s, const Eigen::Ref<const Vector>& pred, const Eigen::Ref<const Vector>& obs,
                          int resamples, double level, std::uint64_t seed, int classes = 0, int jobs = 1);

/// Labels on the five-point scale, or on the merged four-point scale where "1;2" is class 1 and
/// the old 3, 4, 5 become 2, 3, 4.
enum class RatingScale { five, four };

struct ScaledLabels {
    RatingScale scale = RatingScale::five;
    std::vector<int> labels;
};

struct ScaledConfusion {
    RatingScale scale = RatingScale::five;
    Matrix counts;
};

ScaledLabels merge_four_point(const ScaledLabels& in);
ScaledConfusion merge_four_point(const ScaledConfusion& in);

/// Display name of a label: "1;2" for the merged class, the original score otherwise.
std::string label_name(RatingScale scale, int label);

}  // namespace seqcomp
