#include "seqcomp/regress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

namespace seqcomp {

// ---------------------------------------------------------------------------------------------
// standardisation

Standardisation fit_standardisation(const Eigen::Ref<const Matrix>& train, ScaleMode mode) {
    if (train.rows() == 0) throw ValidationError("standardise: no training rows");
    Standardisation s;
    s.mode = mode;
    s.provenance = Provenance::training;
    s.mean.resize(train.cols());
    s.scale.resize(train.cols());
    s.constant.assign(train.cols(), false);
    for (Index j = 0; j < train.cols(); ++j) {
        const auto col = train.col(j);
        if ((col.array() == col(0)).all()) {
            s.mean(j) = col(0);
            s.scale(j) = 1.0;
            s.constant[j] = true;
            continue;
        }
        s.mean(j) = col.mean();
        const double var = (col.array() - s.mean(j)).square().mean();
        s.scale(j) = mode == ScaleMode::variance ? var : std::sqrt(var);
        if (!(s.scale(j) > 0.0)) {
            s.scale(j) = 1.0;
            s.constant[j] = true;
        }
    }
    return s;
}

namespace {

void require_training(const Standardisation& stats, Index cols) {
    if (stats.provenance != Provenance::training)
        throw ValidationError("standardisation statistics were not derived from training rows");
    if (stats.mean.size() != cols) throw ValidationError("standardisation: column count mismatch");
}

Vector standardise_row(const Eigen::Ref<const Vector>& row, const Standardisation& stats) {
    require_training(stats, row.size());
    return (row - stats.mean).cwiseQuotient(stats.scale);
}

}  // namespace

Matrix apply_standardisation(const Eigen::Ref<const Matrix>& x, const Standardisation& stats) {
    require_training(stats, x.cols());
    return (x.rowwise() - stats.mean.transpose()).array().rowwise() / stats.scale.transpose().array();
}

std::pair<Matrix, Standardisation> standardise(const Eigen::Ref<const Matrix>& x,
                                               const std::optional<Standardisation>& stats, ScaleMode mode) {
    Standardisation s = stats ? *stats : fit_standardisation(x, mode);
    return {apply_standardisation(x, s), std::move(s)};
}

// ---------------------------------------------------------------------------------------------
// shared pieces

namespace {

double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

double penalty(const Eigen::Ref<const Matrix>& coef, double eta, double nu) {
    return eta * (nu * coef.cwiseAbs().sum() + 0.5 * (1.0 - nu) * coef.squaredNorm());
}

// violation of 0 in grad + l1 * subgradient(|c|)
double kkt_violation(double grad, double coef, double l1) {
    if (coef > 0) return std::abs(grad + l1);
    if (coef < 0) return std::abs(grad - l1);
    return std::max(0.0, std::abs(grad) - l1);
}

void check_penalty(double eta, double nu) {
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw ValidationError("eta must be finite and non-negative");
    if (!(nu >= 0.0 && nu <= 1.0)) throw ValidationError("nu must lie in [0, 1]");
}

void check_labels(const std::vector<int>& labels, Index rows, int classes) {
    if (classes < 2) throw ValidationError("need at least two classes");
    if (Index(labels.size()) != rows) throw ValidationError("label count does not match row count");
    if (rows < classes) throw ValidationError("fewer rows than classes");
    for (int l : labels)
        if (l < 1 || l > classes) throw ValidationError("label " + std::to_string(l) + " outside 1.." + std::to_string(classes));
}

// row-wise log-sum-exp of the linear predictor
Vector log_sum_exp(const Matrix& eta) {
    const Vector mx = eta.rowwise().maxCoeff();
    return mx.array() + (eta.colwise() - mx).array().exp().rowwise().sum().log();
}

double negative_loglik(const Matrix& eta, const std::vector<int>& labels) {
    const Vector lse = log_sum_exp(eta);
    double total = 0.0;
    for (Index i = 0; i < eta.rows(); ++i) total += lse(i) - eta(i, labels[i] - 1);
    return total;
}

Matrix linear_predictor(const Eigen::Ref<const Matrix>& x, const Matrix& beta, const Vector& gamma) {
    return (x * beta.transpose()).rowwise() + gamma.transpose();
}

Matrix probabilities(const Matrix& eta) {
    const Vector lse = log_sum_exp(eta);
    return (eta.colwise() - lse).array().exp();
}

double multinomial_kkt(const Eigen::Ref<const Matrix>& x, const std::vector<int>& labels, const Matrix& eta_lin,
                       const Matrix& beta, double eta, double nu) {
    Matrix resid = probabilities(eta_lin);  // P - Y
    for (Index i = 0; i < resid.rows(); ++i) resid(i, labels[i] - 1) -= 1.0;
    const Matrix grad = resid.transpose() * x;  // K x P
    const double l1 = eta * nu, l2 = eta * (1.0 - nu);
    double worst = resid.colwise().sum().cwiseAbs().maxCoeff();
    for (Index k = 0; k < beta.rows(); ++k)
        for (Index j = 0; j < beta.cols(); ++j)
            worst = std::max(worst, kkt_violation(grad(k, j) + l2 * beta(k, j), beta(k, j), l1));
    return worst / double(x.rows());
}

}  // namespace

// ---------------------------------------------------------------------------------------------
// multinomial

double multinomial_objective(const Eigen::Ref<const Matrix>& x, const std::vector<int>& labels, const Matrix& beta,
                             const Vector& gamma, double eta, double nu) {
    return penalty(beta, eta, nu) + negative_loglik(linear_predictor(x, beta, gamma), labels);
}

double multinomial_residual(const Eigen::Ref<const Matrix>& x, const std::vector<int>& labels, const Matrix& beta,
                            const Vector& gamma, double eta, double nu) {
    return multinomial_kkt(x, labels, linear_predictor(x, beta, gamma), beta, eta, nu);
}

MultinomialModel fit_multinomial_enr(const Eigen::Ref<const Matrix>& x, const std::vector<int>& labels, int classes,
                                     double eta, double nu, const SolverOptions& options,
                                     const MultinomialModel* warm_start) {
    check_penalty(eta, nu);
    check_labels(labels, x.rows(), classes);
    if (!x.allFinite()) throw ValidationError("fit_multinomial_enr: non-finite design matrix");

    const Index n = x.rows(), p = x.cols();
    const int kc = classes;
    const double tol = options.tolerance > 0 ? options.tolerance : 1e-5;
    const double l1 = eta * nu, l2 = eta * (1.0 - nu);

    MultinomialModel m;
    m.eta = eta;
    m.nu = nu;
    if (warm_start && warm_start->beta.rows() == kc && warm_start->beta.cols() == p) {
        m.beta = warm_start->beta;
        m.gamma = warm_start->gamma;
    } else {
        m.beta = Matrix::Zero(kc, p);
        m.gamma.resize(kc);
        std::vector<double> counts(kc, 0.0);
        for (int l : labels) counts[l - 1] += 1.0;
        for (int k = 0; k < kc; ++k) m.gamma(k) = std::log(std::max(counts[k], 0.5) / double(n));
        m.gamma.array() -= m.gamma.mean();
    }

    Matrix lin = linear_predictor(x, m.beta, m.gamma);
    double objective = penalty(m.beta, eta, nu) + negative_loglik(lin, labels);
    const double inner_tol = 0.1 * tol * double(n);

    Vector w(n), r(n), xw2(p), beta_k(p), step(n);
    for (int it = 1; it <= options.max_iterations; ++it) {
        for (int k = 0; k < kc; ++k) {
            // quadratic model of -loglik in (beta_k, gamma_k) around the current point
            const Vector lse = log_sum_exp(lin);
            for (Index i = 0; i < n; ++i) {
                const double pk = std::exp(lin(i, k) - lse(i));
                w(i) = std::max(pk * (1.0 - pk), 1e-5);
                r(i) = ((labels[i] - 1 == k ? 1.0 : 0.0) - pk) / w(i);
            }
            const double wsum = w.sum();
            for (Index j = 0; j < p; ++j) xw2(j) = x.col(j).array().square().matrix().dot(w);

            beta_k = m.beta.row(k).transpose();
            double gamma_k = m.gamma(k);
            auto sweep = [&](bool active_only) {
                double change = 0.0;
                const double dg = r.dot(w) / wsum;
                gamma_k += dg;
                r.array() -= dg;
                change = std::max(change, wsum * std::abs(dg));
                for (Index j = 0; j < p; ++j) {
                    if (active_only && beta_k(j) == 0.0) continue;
                    const double denom = xw2(j) + l2;
                    const double u = (x.col(j).array() * w.array() * r.array()).sum() + xw2(j) * beta_k(j);
                    const double next = denom > 0.0 ? soft_threshold(u, l1) / denom : 0.0;
                    const double d = next - beta_k(j);
                    if (d == 0.0) continue;
                    r.noalias() -= d * x.col(j);
                    beta_k(j) = next;
                    change = std::max(change, xw2(j) * std::abs(d));
                }
                return change;
            };
            for (int outer = 0; outer < 200; ++outer) {
                if (sweep(false) <= inner_tol) break;
                for (int inner = 0; inner < 500; ++inner)
                    if (sweep(true) <= inner_tol) break;
            }

            const Vector d_beta = beta_k - m.beta.row(k).transpose();
            const double d_gamma = gamma_k - m.gamma(k);
            if (d_beta.cwiseAbs().maxCoeff() == 0.0 && d_gamma == 0.0) continue;
            step.noalias() = x * d_beta;
            step.array() += d_gamma;

            // backtracking: accept only steps that do not increase the objective
            const Vector col = lin.col(k);
            double t = 1.0;
            for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
                lin.col(k) = col + t * step;
                Matrix trial_beta = m.beta;
                trial_beta.row(k) += t * d_beta.transpose();
                const double trial = penalty(trial_beta, eta, nu) + negative_loglik(lin, labels);
                // near the optimum the decrease falls below rounding; allow a few ulps
                if (trial <= objective + 8.0 * std::numeric_limits<double>::epsilon() * std::abs(objective)) {
                    objective = trial;
                    m.beta = std::move(trial_beta);
                    m.gamma(k) += t * d_gamma;
                    t = -1.0;
                    break;
                }
            }
            if (t > 0.0) lin.col(k) = col;
        }
        // the parameterisation is invariant to a common intercept shift
        const double shift = m.gamma.mean();
        m.gamma.array() -= shift;
        lin.array() -= shift;

        if (options.on_iteration) options.on_iteration(objective);
        m.iterations = it;
        m.residual = multinomial_kkt(x, labels, lin, m.beta, eta, nu);
        if (m.residual <= tol) return m;
    }
    throw ConvergenceError("fit_multinomial_enr: no convergence after " + std::to_string(options.max_iterations) +
                               " iterations (residual " + std::to_string(m.residual) + ")",
                           m.residual);
}

Vector class_probabilities(const MultinomialModel& model, const Eigen::Ref<const Vector>& row) {
    if (row.size() != model.beta.cols()) throw ValidationError("predict_rating: row has the wrong dimension");
    const Vector z = model.stats ? standardise_row(row, *model.stats) : Vector(row);
    Vector e = model.beta * z + model.gamma;
    e.array() -= e.maxCoeff();
    e = e.array().exp();
    return e / e.sum();
}

int predict_rating(const MultinomialModel& model, const Eigen::Ref<const Vector>& row) {
    const Vector p = class_probabilities(model, row);
    Index best = 0;
    for (Index k = 1; k < p.size(); ++k)
        if (p(k) > p(best)) best = k;
    return int(best) + 1;
}

double multinomial_eta_max(const Eigen::Ref<const Matrix>& x, const std::vector<int>& labels, int classes, double nu) {
    check_labels(labels, x.rows(), classes);
    Vector freq = Vector::Zero(classes);
    for (int l : labels) freq(l - 1) += 1.0;
    freq /= double(labels.size());
    Matrix resid(x.rows(), classes);
    for (Index i = 0; i < x.rows(); ++i) {
        resid.row(i) = freq.transpose();
        resid(i, labels[i] - 1) -= 1.0;
    }
    const double g = (resid.transpose() * x).cwiseAbs().maxCoeff();
    return g / std::max(nu, 1e-3);
}

// ---------------------------------------------------------------------------------------------
// linear

std::pair<Vector, double> LinearModel::raw_coefficients() const {
    if (!stats) return {theta, alpha};
    const Vector raw = theta.cwiseQuotient(stats->scale);
    return {raw, alpha - raw.dot(stats->mean)};
}

double linear_objective(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y, const Vector& theta,
                        double alpha, double eta, double nu) {
    const Vector resid = (y - x * theta).array() - alpha;
    return penalty(theta, eta, nu) + resid.squaredNorm();
}

double linear_residual(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y, const Vector& theta,
                       double alpha, double eta, double nu) {
    const Vector resid = (y - x * theta).array() - alpha;
    const Vector grad = -2.0 * (x.transpose() * resid) + eta * (1.0 - nu) * theta;
    double worst = 2.0 * std::abs(resid.sum());
    for (Index j = 0; j < theta.size(); ++j) worst = std::max(worst, kkt_violation(grad(j), theta(j), eta * nu));
    return worst;
}

namespace {

// sufficient statistics of the centred least-squares problem, shared along an eta path
struct CentredGram {
    Vector xm;
    double ym = 0.0;
    Matrix gram;
    Vector xty;
    double yty = 0.0;
};

CentredGram centred_gram(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y) {
    if (x.rows() != y.size()) throw ValidationError("fit_linear_enr: row count mismatch");
    if (x.rows() < 2) throw ValidationError("fit_linear_enr: need at least two rows");
    if (!x.allFinite() || !y.allFinite()) throw ValidationError("fit_linear_enr: non-finite input");
    CentredGram g;
    g.xm = x.colwise().mean();
    g.ym = y.mean();
    const Matrix xc = x.rowwise() - g.xm.transpose();
    const Vector yc = y.array() - g.ym;
    g.gram.noalias() = xc.transpose() * xc;
    g.xty.noalias() = xc.transpose() * yc;
    g.yty = yc.squaredNorm();
    return g;
}

LinearModel fit_linear(const CentredGram& g, double eta, double nu, const SolverOptions& options,
                       const LinearModel* warm_start) {
    check_penalty(eta, nu);
    const Index p = g.gram.cols();
    const Matrix& gram = g.gram;
    const Vector& xty = g.xty;
    const double l1 = eta * nu, l2 = eta * (1.0 - nu);
    const double scale = std::max(1.0, 2.0 * (p > 0 ? xty.cwiseAbs().maxCoeff() : 0.0));
    const double threshold = (options.tolerance > 0 ? options.tolerance : 1e-8) * scale;

    LinearModel m;
    m.eta = eta;
    m.nu = nu;
    m.theta = (warm_start && warm_start->theta.size() == p) ? warm_start->theta : Vector::Zero(p);
    Vector q = gram * m.theta;

    auto objective_of = [&](const Vector& th, const Vector& gth) {
        return g.yty - 2.0 * th.dot(xty) + th.dot(gth) + penalty(th, eta, nu);
    };
    auto residual_of = [&]() {
        double worst = 0.0;
        for (Index j = 0; j < p; ++j)
            worst = std::max(worst, kkt_violation(-2.0 * (xty(j) - q(j)) + l2 * m.theta(j), m.theta(j), l1));
        return worst;
    };
    auto signs = [&] {
        std::vector<signed char> out(static_cast<std::size_t>(p));
        for (Index j = 0; j < p; ++j) out[std::size_t(j)] = m.theta(j) > 0 ? 1 : (m.theta(j) < 0 ? -1 : 0);
        return out;
    };

    double objective = objective_of(m.theta, q);
    m.residual = residual_of();
    std::vector<signed char> previous = signs();
    for (int it = 1; it <= options.max_iterations && m.residual > threshold; ++it) {
        for (Index j = 0; j < p; ++j) {
            const double denom = 2.0 * gram(j, j) + l2;
            const double rho = xty(j) - q(j) + gram(j, j) * m.theta(j);
            const double next = denom > 0.0 ? soft_threshold(2.0 * rho, l1) / denom : 0.0;
            const double d = next - m.theta(j);
            if (d == 0.0) continue;
            q.noalias() += d * gram.col(j);
            m.theta(j) = next;
        }
        q.noalias() = gram * m.theta;
        objective = objective_of(m.theta, q);

        // once a sweep leaves the support and signs alone, solve exactly on that support with the
        // signs held, truncated at the first sign change; a truncated step drops that coefficient
        // and the solve is repeated on the smaller support
        std::vector<signed char> current = signs();
        const bool settled = current == previous;
        previous = std::move(current);
        for (int drop = 0; settled && drop < 32; ++drop) {
            std::vector<Index> active;
            for (Index j = 0; j < p; ++j)
                if (m.theta(j) != 0.0) active.push_back(j);
            if (active.empty()) break;
            const Index a = Index(active.size());
            Matrix h(a, a);
            Vector rhs(a), cur(a), sgn(a);
            for (Index u = 0; u < a; ++u) {
                cur(u) = m.theta(active[u]);
                sgn(u) = cur(u) > 0 ? 1.0 : -1.0;
                rhs(u) = 2.0 * xty(active[u]) - l1 * sgn(u);
                for (Index v = 0; v < a; ++v) h(u, v) = 2.0 * gram(active[u], active[v]);
                h(u, u) += l2;
            }
            const Eigen::LDLT<Matrix> ldlt(h);
            const Vector target = ldlt.solve(rhs);
            if (ldlt.info() != Eigen::Success || !target.allFinite()) break;
            double t = 1.0;
            for (Index u = 0; u < a; ++u)
                if (target(u) * sgn(u) <= 0.0) t = std::min(t, cur(u) / (cur(u) - target(u)));
            Vector trial = m.theta;
            for (Index u = 0; u < a; ++u) {
                double v = cur(u) + t * (target(u) - cur(u));
                if (v * sgn(u) <= 0.0 || (t < 1.0 && cur(u) / (cur(u) - target(u)) == t)) v = 0.0;
                trial(active[u]) = v;
            }
            const Vector trial_q = gram * trial;
            const double trial_obj = objective_of(trial, trial_q);
            if (trial_obj > objective) break;
            m.theta = trial;
            q = trial_q;
            objective = trial_obj;
            previous = signs();
            if (t >= 1.0) break;
        }
        if (options.on_iteration) options.on_iteration(objective);
        m.iterations = it;
        m.residual = residual_of();
    }
    m.alpha = g.ym - g.xm.dot(m.theta);
    if (m.residual > threshold)
        throw ConvergenceError("fit_linear_enr: no convergence after " + std::to_string(options.max_iterations) +
                                   " iterations (residual " + std::to_string(m.residual) + ")",
                               m.residual);
    return m;
}

}  // namespace

LinearModel fit_linear_enr(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y, double eta, double nu,
                           const SolverOptions& options, const LinearModel* warm_start) {
    check_penalty(eta, nu);
    return fit_linear(centred_gram(x, y), eta, nu, options, warm_start);
}

double linear_eta_max(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y, double nu) {
    if (x.rows() != y.size()) throw ValidationError("linear_eta_max: row count mismatch");
    const Vector xm = x.colwise().mean();
    const Vector yc = y.array() - y.mean();
    const Vector g = 2.0 * ((x.rowwise() - xm.transpose()).transpose() * yc);
    return (g.size() ? g.cwiseAbs().maxCoeff() : 0.0) / std::max(nu, 1e-3);
}

double predict_year(const LinearModel& model, const Eigen::Ref<const Vector>& row) {
    if (row.size() != model.theta.size()) throw ValidationError("predict_year: row has the wrong dimension");
    const Vector z = model.stats ? standardise_row(row, *model.stats) : Vector(row);
    return std::clamp(model.theta.dot(z) + model.alpha, model.clamp_lo, model.clamp_hi);
}

std::vector<double> eta_grid(double eta_max, int count, double ratio) {
    if (count < 1) throw ValidationError("eta grid needs at least one value");
    if (!(eta_max > 0.0) || !std::isfinite(eta_max)) throw ValidationError("eta_max must be positive");
    if (!(ratio > 0.0 && ratio <= 1.0)) throw ValidationError("eta grid ratio must lie in (0, 1]");
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i)
        out[i] = count == 1 ? eta_max : eta_max * std::pow(ratio, double(i) / double(count - 1));
    return out;
}

namespace {

Vector normalise(Vector v) {
    const double total = v.sum();
    return total > 0.0 ? Vector(v / total) : Vector(Vector::Zero(v.size()));
}

}  // namespace

Vector normalised_magnitudes(const MultinomialModel& model) {
    return normalise(model.beta.cwiseAbs().colwise().sum().transpose());
}

Vector normalised_magnitudes(const LinearModel& model) { return normalise(model.theta.cwiseAbs()); }

// ---------------------------------------------------------------------------------------------
// tuning

const std::vector<double>& default_nu_grid() {
    static const std::vector<double> grid{0.05, 0.1, 0.2, 0.5, 0.8, 1.0};
    return grid;
}

namespace {

std::vector<int> to_labels(const Eigen::Ref<const Vector>& y) {
    std::vector<int> out(y.size());
    for (Index i = 0; i < y.size(); ++i) out[i] = int(std::lround(y(i)));
    return out;
}

Matrix take_rows(const Eigen::Ref<const Matrix>& x, const std::vector<Index>& rows) {
    Matrix out(Index(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(Index(i)) = x.row(rows[i]);
    return out;
}

Vector take(const Eigen::Ref<const Vector>& y, const std::vector<Index>& rows) {
    Vector out(Index(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out(Index(i)) = y(rows[i]);
    return out;
}

bool covers_classes(const std::vector<int>& labels, int classes) {
    std::vector<bool> seen(classes, false);
    for (int l : labels) seen[l - 1] = true;
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

struct Partition {
    std::vector<std::vector<Index>> train, valid;
};

// Holdout: one partition. K-fold: `folds` partitions. Reshuffled while a multinomial training side
// misses a class.
Partition make_partition(FitKind kind, const Eigen::Ref<const Vector>& y, const TuneOptions& o, TuneTrace& trace) {
    const Index n = y.size();
    for (int attempt = 0; attempt < 100; ++attempt) {
        std::vector<Index> perm(n);
        std::iota(perm.begin(), perm.end(), Index(0));
        std::mt19937_64 rng(derive_seed(o.seed, std::uint64_t(attempt)));
        std::shuffle(perm.begin(), perm.end(), rng);

        Partition part;
        if (o.protocol == Protocol::holdout) {
            const auto cut = Index(std::llround(o.holdout_fraction * double(n)));
            if (cut < 1 || cut >= n) throw ValidationError("tune: holdout leaves an empty side");
            part.train.emplace_back(perm.begin(), perm.begin() + cut);
            part.valid.emplace_back(perm.begin() + cut, perm.end());
        } else {
            if (o.folds < 2 || o.folds > n) throw ValidationError("tune: invalid fold count");
            part.train.resize(o.folds);
            part.valid.resize(o.folds);
            for (Index pos = 0; pos < n; ++pos)
                for (int f = 0; f < o.folds; ++f)
                    (pos % o.folds == f ? part.valid[f] : part.train[f]).push_back(perm[pos]);
        }
        for (auto& v : part.train) std::sort(v.begin(), v.end());
        for (auto& v : part.valid) std::sort(v.begin(), v.end());

        bool ok = true;
        if (kind == FitKind::multinomial)
            for (const auto& tr : part.train) ok = ok && covers_classes(to_labels(take(y, tr)), o.classes);
        if (ok) return part;
        trace.notes.push_back("inner split attempt " + std::to_string(attempt) +
                              " left a class out of training; resampled");
    }
    throw ValidationError("tune: could not draw a split containing every class");
}

}  // namespace

TuneTrace tune(FitKind kind, const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y, double nu,
               const TuneOptions& options) {
    if (x.rows() != y.size()) throw ValidationError("tune: row count mismatch");
    TuneTrace trace;
    trace.nu = nu;
    trace.maximise = kind == FitKind::multinomial;
    if (!options.eta_grid.empty()) {
        trace.etas = options.eta_grid;
    } else {
        const double emax = kind == FitKind::multinomial ? multinomial_eta_max(x, to_labels(y), options.classes, nu)
                                                         : linear_eta_max(x, y, nu);
        trace.etas = eta_grid(emax > 0.0 ? emax : 1.0, options.eta_count, options.eta_ratio);
    }
    if (trace.etas.empty()) throw ValidationError("tune: empty eta grid");

    const Partition part = make_partition(kind, y, options, trace);
    const std::size_t g = trace.etas.size();
    std::vector<double> sum(g, 0.0);
    std::vector<bool> failed(g, false);
    double total_rows = 0.0;
    std::optional<ConvergenceError> diverged;

    for (std::size_t f = 0; f < part.train.size(); ++f) {
        const Matrix xt = take_rows(x, part.train[f]), xv = take_rows(x, part.valid[f]);
        const Vector yt = take(y, part.train[f]), yv = take(y, part.valid[f]);
        total_rows += double(yv.size());
        std::optional<MultinomialModel> warm_m;
        std::optional<LinearModel> warm_l;
        std::optional<CentredGram> gram;
        if (kind == FitKind::linear) gram = centred_gram(xt, yt);
        for (std::size_t e = 0; e < g; ++e) {
            if (failed[e]) continue;
            const double eta = trace.etas[e];
            try {
                if (kind == FitKind::multinomial) {
                    warm_m = fit_multinomial_enr(xt, to_labels(yt), options.classes, eta, nu, options.solver,
                                                 warm_m ? &*warm_m : nullptr);
                    Vector pred(yv.size());
                    for (Index i = 0; i < yv.size(); ++i) pred(i) = predict_rating(*warm_m, xv.row(i).transpose());
                    sum[e] += evaluate(options.statistic, pred, yv, options.classes);
                } else {
                    warm_l = fit_linear(*gram, eta, nu, options.solver, warm_l ? &*warm_l : nullptr);
                    const Vector pred = (xv * warm_l->theta).array() + warm_l->alpha;
                    sum[e] += (pred - yv).squaredNorm();
                }
            } catch (const UndefinedStatistic& err) {
                failed[e] = true;
                trace.notes.push_back("eta " + std::to_string(eta) + ": " + err.what());
            } catch (const ConvergenceError& err) {
                failed[e] = true;
                diverged = err;
                trace.notes.push_back("eta " + std::to_string(eta) + ": " + err.what());
            }
        }
    }

    trace.scores.resize(g);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t e = 0; e < g; ++e) {
        if (failed[e])
            trace.scores[e] = nan;
        else if (kind == FitKind::multinomial)
            trace.scores[e] = sum[e] / double(part.train.size());
        else
            trace.scores[e] = sum[e] / total_rows;
    }
    bool found = false;
    for (std::size_t e = 0; e < g; ++e) {
        const double s = trace.scores[e];
        if (std::isnan(s)) continue;
        const double best = trace.scores[trace.chosen_index];
        if (!found || (trace.maximise ? s > best : s < best)) {
            trace.chosen_index = e;
            found = true;
        }
    }
    if (!found) {
        // a grid lost to the iteration cap is a convergence failure, not bad input
        if (diverged) throw ConvergenceError(std::string("tune: no eta converged; ") + diverged->what(), diverged->residual());
        throw ValidationError("tune: no eta produced a defined validation score");
    }
    trace.chosen_eta = trace.etas[trace.chosen_index];
    return trace;
}

NuSelection tune_nu(FitKind kind, const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
                    const std::vector<double>& nu_grid, const TuneOptions& options) {
    if (nu_grid.empty()) throw ValidationError("tune_nu: empty nu grid");
    NuSelection out;
    std::size_t best = 0;
    for (std::size_t i = 0; i < nu_grid.size(); ++i) {
        out.traces.push_back(tune(kind, x, y, nu_grid[i], options));
        const auto& t = out.traces.back();
        const double s = t.scores[t.chosen_index];
        const double b = out.traces[best].scores[out.traces[best].chosen_index];
        if (i > 0 && (t.maximise ? s > b : s < b)) best = i;
    }
    out.nu = nu_grid[best];
    return out;
}

// ---------------------------------------------------------------------------------------------
// windows

WindowedRows window_group(const Eigen::Ref<const Matrix>& rows, const std::vector<double>& dates, int window_days,
                          double origin) {
    if (window_days <= 0) throw ValidationError("window_group: window_days must be positive");
    if (Index(dates.size()) != rows.rows()) throw ValidationError("window_group: one date per row required");
    const double width = double(window_days) / 365.25;
    std::map<long, std::vector<Index>> members;
    for (std::size_t i = 0; i < dates.size(); ++i)
        members[long(std::floor((dates[i] - origin) / width))].push_back(Index(i));

    WindowedRows out;
    out.rows.resize(Index(members.size()), rows.cols());
    out.centres.resize(Index(members.size()));
    Index w = 0;
    for (const auto& [index, idx] : members) {
        Vector acc = Vector::Zero(rows.cols());
        for (Index i : idx) acc += rows.row(i).transpose();
        out.rows.row(w) = acc.transpose() / double(idx.size());
        out.centres(w) = origin + (double(index) + 0.5) * width;
        out.counts.push_back(int(idx.size()));
        out.windows.push_back(index);
        ++w;
    }
    return out;
}

}  // namespace seqcomp
