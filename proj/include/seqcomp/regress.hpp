#pragma once

#include "seqcomp/common.hpp"
#include "seqcomp/metrics.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace seqcomp {

enum class ScaleMode { std_dev, variance };

/// Where a set of standardisation statistics came from. Only training-derived statistics may be
/// applied to held-out rows.
enum class Provenance { training, unknown };

struct Standardisation {
    Vector mean;
    Vector scale;
    std::vector<bool> constant;  // zero-variance columns, divided by 1
    ScaleMode mode = ScaleMode::std_dev;
    Provenance provenance = Provenance::unknown;
};

/// Column means and (population) standard deviations, or variances, of training rows.
Standardisation fit_standardisation(const Eigen::Ref<const Matrix>& train, ScaleMode mode = ScaleMode::std_dev);

/// (x - mean) / scale with training statistics; throws when `stats` is not training-derived.
Matrix apply_standardisation(const Eigen::Ref<const Matrix>& x, const Standardisation& stats);

/// Standardises `x` with `stats` when given, otherwise with statistics fitted on `x` itself.
std::pair<Matrix, Standardisation> standardise(const Eigen::Ref<const Matrix>& x,
                                               const std::optional<Standardisation>& stats = std::nullopt,
                                               ScaleMode mode = ScaleMode::std_dev);

struct SolverOptions {
    int max_iterations = 2000;
    double tolerance = -1.0;  // <= 0 selects the solver default
    /// Called with the objective value after every outer iteration.
    std::function<void(double)> on_iteration;
};

/// Softmax model P(S = k | d) = exp(beta_k . d + gamma_k) / sum_m exp(beta_m . d + gamma_m).
struct MultinomialModel {
    Matrix beta;   // K x P
    Vector gamma;  // K, centred to sum zero
    double eta = 0.0;
    double nu = 0.0;
    int iterations = 0;
    double residual = 0.0;
    std::optional<Standardisation> stats;
    std::vector<std::string> names;

    int classes() const { return static_cast<int>(gamma.size()); }
};

/// eta * (nu * |B|_1 + (1 - nu) / 2 * |B|_2^2) - loglik(B, gamma); labels in 1..K.
double multinomial_objective(const Eigen::Ref<const Matrix>& x, const std::vector<int>& labels, const Matrix& beta,
                             const Vector& gamma, double eta, double nu);

/// Largest stationarity violation of the multinomial objective, divided by the row count.
double multinomial_residual(const Eigen::Ref<const Matrix>& x, const std::vector<int>& labels, const Matrix& beta,
                            const Vector& gamma, double eta, double nu);

/**
 * Elastic-net penalised multinomial regression by class-wise proximal Newton steps: each class's
 * (beta_k, gamma_k) is refitted by cyclic coordinate descent on the weighted quadratic model of the
 * log-likelihood, then accepted through a backtracking line search so that the objective never
 * increases. Intercepts are unpenalised. Stops when the stationarity residual (per row) falls below
 * the tolerance (default 1e-5).
 */
MultinomialModel fit_multinomial_enr(const Eigen::Ref<const Matrix>& x, const std::vector<int>& labels, int classes,
                                     double eta, double nu, const SolverOptions& options = {},
                                     const MultinomialModel* warm_start = nullptr);

Vector class_probabilities(const MultinomialModel& model, const Eigen::Ref<const Vector>& row);

/// argmax_k P(S = k | row), ties resolved to the lowest class. Returns a label in 1..K.
int predict_rating(const MultinomialModel& model, const Eigen::Ref<const Vector>& row);

/// Smallest eta for which every coefficient of the multinomial fit is zero.
double multinomial_eta_max(const Eigen::Ref<const Matrix>& x, const std::vector<int>& labels, int classes, double nu);

struct LinearModel {
    Vector theta;
    double alpha = 0.0;
    double eta = 0.0;
    double nu = 0.0;
    int iterations = 0;
    double residual = 0.0;
    double clamp_lo = 1957.0;
    double clamp_hi = 2010.0;
    std::optional<Standardisation> stats;
    std::vector<std::string> names;

    /// Coefficients and intercept acting on unstandardised inputs.
    std::pair<Vector, double> raw_coefficients() const;
};

/// eta * (nu * |theta|_1 + (1 - nu) / 2 * |theta|_2^2) + SSR(theta, alpha).
double linear_objective(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y, const Vector& theta,
                        double alpha, double eta, double nu);

/// Largest coordinate-wise stationarity violation of the linear objective (absolute units).
double linear_residual(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y, const Vector& theta,
                       double alpha, double eta, double nu);

/**
 * Elastic-net penalised least squares by cyclic coordinate descent with soft thresholding on the
 * centred Gram matrix. Between sweeps the current support is polished by an exact solve with the
 * signs held fixed, truncated at the first sign change. Converged when the stationarity residual is
 * below tolerance * max(1, |2 X'y|_inf) (default tolerance 1e-8).
 */
LinearModel fit_linear_enr(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y, double eta, double nu,
                           const SolverOptions& options = {}, const LinearModel* warm_start = nullptr);

double linear_eta_max(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y, double nu);

/// theta . row + alpha (after the model's standardisation, if any), clamped to [clamp_lo, clamp_hi].
double predict_year(const LinearModel& model, const Eigen::Ref<const Vector>& row);

/// `count` log-spaced values from eta_max down to eta_max * ratio.
std::vector<double> eta_grid(double eta_max, int count = 50, double ratio = 1e-4);

/// Sum over classes of |beta_kj| (or |theta_j|), normalised to sum to one.
Vector normalised_magnitudes(const MultinomialModel& model);
Vector normalised_magnitudes(const LinearModel& model);

enum class FitKind { multinomial, linear };
enum class Protocol { holdout, kfold };

struct TuneOptions {
    std::vector<double> eta_grid;  // empty: derived from the data
    int eta_count = 50;
    double eta_ratio = 1e-4;
    Protocol protocol = Protocol::holdout;
    double holdout_fraction = 0.6;
    int folds = 5;
    Statistic statistic = Statistic::tau_b;  // holdout criterion (maximised); kfold minimises MSE
    int classes = 5;
    std::uint64_t seed = 1;
    SolverOptions solver;
};

struct TuneTrace {
    std::vector<double> etas;
    std::vector<double> scores;  // NaN where the statistic was undefined or the fit failed
    double nu = 0.0;
    double chosen_eta = 0.0;
    std::size_t chosen_index = 0;
    bool maximise = true;
    std::vector<std::string> notes;
};

/// Selects eta on training rows: inner holdout maximising `statistic` (multinomial) or k-fold
/// cross-validation minimising MSE (linear). `y` carries labels 1..K for the multinomial kind.
TuneTrace tune(FitKind kind, const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y, double nu,
               const TuneOptions& options);

struct NuSelection {
    double nu = 0.0;
    std::vector<TuneTrace> traces;
};

/// Runs `tune` for every candidate nu and keeps the one with the best selected score.
NuSelection tune_nu(FitKind kind, const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
                    const std::vector<double>& nu_grid, const TuneOptions& options);

const std::vector<double>& default_nu_grid();

struct WindowedRows {
    Matrix rows;
    Vector centres;
    std::vector<int> counts;
    std::vector<long> windows;  // window index relative to the origin
};

/// Averages rows whose dates fall in the same non-overlapping window of `window_days` days,
/// windows anchored at `origin` (fractional years). Empty windows are dropped.
WindowedRows window_group(const Eigen::Ref<const Matrix>& rows, const std::vector<double>& dates, int window_days,
                          double origin = 1957.0);

}  // namespace seqcomp
