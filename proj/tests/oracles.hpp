#pragma once

// Independent reference implementations used by the unit tests and the acceptance suite.
// Deliberately written the slow, obvious way; none of them call into the library.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <vector>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// PPM-C with exclusions over std::map contexts, returning the summed codelength in bits.
inline double ppm_c_codelength(const std::vector<int>& s, int alphabet, int order) {
    std::map<std::vector<int>, std::map<int, long>> table;
    double bits = 0.0;
    for (std::size_t t = 0; t < s.size(); ++t) {
        const int sym = s[t];
        std::set<int> excluded;
        double p = 1.0;
        bool coded = false;
        const int top = static_cast<int>(std::min<std::size_t>(std::size_t(order), t));
        for (int k = top; k >= 0 && !coded; --k) {
            const std::vector<int> ctx(s.begin() + long(t) - k, s.begin() + long(t));
            auto it = table.find(ctx);
            if (it == table.end()) continue;
            long n = 0, q = 0, c = 0;
            for (const auto& [x, count] : it->second) {
                if (excluded.count(x)) continue;
                n += count;
                ++q;
                if (x == sym) c = count;
            }
            if (q == 0) continue;
            const long remaining = alphabet - long(excluded.size());
            if (c > 0) {
                p *= q == remaining ? double(c) / double(n) : double(c) / double(n + q);
                coded = true;
            } else {
                p *= double(q) / double(n + q);
                for (const auto& [x, count] : it->second) excluded.insert(x);
            }
        }
        if (!coded) p /= double(alphabet - long(excluded.size()));
        bits -= std::log2(p);
        for (int k = 0; k <= top; ++k) {
            const std::vector<int> ctx(s.begin() + long(t) - k, s.begin() + long(t));
            ++table[ctx][sym];
        }
    }
    return bits;
}

// Kendall tau-b by enumerating every pair.
inline double tau_b(const std::vector<double>& q, const std::vector<double>& o) {
    long c = 0, d = 0, tq = 0, to = 0, n0 = 0;
    for (std::size_t i = 0; i < q.size(); ++i)
        for (std::size_t j = i + 1; j < q.size(); ++j) {
            ++n0;
            const double a = q[i] - q[j], b = o[i] - o[j];
            if (a == 0) ++tq;
            if (b == 0) ++to;
            if (a * b > 0) ++c;
            if (a * b < 0) ++d;
        }
    return double(c - d) / std::sqrt(double(n0 - tq) * double(n0 - to));
}

// Average ranks by counting smaller and equal values.
inline std::vector<double> ranks(const std::vector<double>& x) {
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double less = 0, equal = 0;
        for (double v : x) {
            if (v < x[i]) ++less;
            if (v == x[i]) ++equal;
        }
        r[i] = less + (equal + 1.0) / 2.0;
    }
    return r;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = double(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    return pearson(ranks(a), ranks(b));
}

// KL divergence written with full covariance matrices, trace and determinants.
inline double kld_full(const Vector& mu1, const Vector& var1, const Vector& mu2, const Vector& var2) {
    const Matrix s1 = var1.asDiagonal(), s2 = var2.asDiagonal();
    const Matrix s1inv = s1.inverse();
    const Vector dm = mu1 - mu2;
    return 0.5 * ((s1inv * s2).trace() + dm.dot(s1inv * dm) - double(mu1.size()) -
                  std::log(s2.determinant() / s1.determinant()));
}

// Nearest-neighbour successor prediction of b from a's d-frame windows, by exhaustive search.
inline double cross_prediction(const Matrix& a, const Matrix& b, int d) {
    const long h = b.cols();
    std::vector<Vector> pred, target;
    for (long t = d; t < b.rows(); ++t) {
        double best = std::numeric_limits<double>::infinity();
        long arg = -1;
        for (long s = d; s < a.rows(); ++s) {
            double dist = 0;
            for (int lag = 1; lag <= d; ++lag) dist += (a.row(s - lag) - b.row(t - lag)).squaredNorm();
            if (dist < best) best = dist, arg = s;
        }
        pred.push_back(a.row(arg).transpose());
        target.push_back(b.row(t).transpose());
    }
    const double m = double(target.size());
    double nmse = 0;
    for (long c = 0; c < h; ++c) {
        double mean = 0, var = 0, err = 0;
        for (const auto& v : target) mean += v(c);
        mean /= m;
        for (std::size_t i = 0; i < target.size(); ++i) {
            var += (target[i](c) - mean) * (target[i](c) - mean);
            err += (pred[i](c) - target[i](c)) * (pred[i](c) - target[i](c));
        }
        nmse += (err / m) / std::max(var / m, 1e-12);
    }
    return std::sqrt(nmse / double(h));
}

// Ridge on centred data for the objective eta/2 |theta|^2 + SSR.
inline Vector ridge(const Matrix& x, const Vector& y, double eta) {
    const Matrix xc = x.rowwise() - x.colwise().mean();
    const Vector yc = y.array() - y.mean();
    const Matrix a = xc.transpose() * xc + 0.5 * eta * Matrix::Identity(x.cols(), x.cols());
    return a.ldlt().solve(xc.transpose() * yc);
}

struct Logistic {
    Vector delta;  // coefficients of the class-2 log-odds
    double intercept = 0.0;
};

// Binary logistic regression, -loglik + l1 |delta|_1 + l2/2 |delta|^2, by FISTA with an
// unpenalised intercept. y in {0, 1}.
inline Logistic logistic_fista(const Matrix& x, const Vector& y, double l1, double l2, int iterations = 200000) {
    const long n = x.rows(), p = x.cols();
    Matrix xa(n, p + 1);
    xa << x, Vector::Ones(n);
    const double sigma = Eigen::JacobiSVD<Matrix>(xa).singularValues()(0);
    const double lip = 0.25 * sigma * sigma + l2;
    const double step = 1.0 / lip;
    Vector w = Vector::Zero(p + 1), z = w, prev = w;
    double t = 1.0;
    for (int it = 0; it < iterations; ++it) {
        const Vector eta = xa * z;
        Vector g = xa.transpose() * ((1.0 / (1.0 + (-eta.array()).exp())).matrix() - y);
        g.head(p) += l2 * z.head(p);
        Vector next = z - step * g;
        for (long j = 0; j < p; ++j) {
            const double v = next(j);
            next(j) = v > step * l1 ? v - step * l1 : (v < -step * l1 ? v + step * l1 : 0.0);
        }
        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        z = next + ((t - 1.0) / tn) * (next - prev);
        prev = next;
        t = tn;
        if (it % 1000 == 999) t = 1.0;  // restart keeps the iteration monotone in practice
    }
    return {prev.head(p), prev(p)};
}

// Multinomial ridge (eta/2 |B|^2, unpenalised intercepts) by Newton's method on all parameters,
// with the first intercept pinned at 0 and the result centred afterwards.
inline std::pair<Matrix, Vector> multinomial_ridge_newton(const Matrix& x, const std::vector<int>& labels, int classes,
                                                          double eta) {
    const long n = x.rows(), p = x.cols(), k = classes;
    const long block = p + 1;
    Vector theta = Vector::Zero(k * block);
    Matrix xa(n, block);
    xa << x, Vector::Ones(n);
    for (int it = 0; it < 100; ++it) {
        Vector grad = Vector::Zero(k * block);
        Matrix hess = Matrix::Zero(k * block, k * block);
        for (long i = 0; i < n; ++i) {
            Vector lin(k);
            for (long c = 0; c < k; ++c) lin(c) = xa.row(i).dot(theta.segment(c * block, block));
            const double mx = lin.maxCoeff();
            Vector pr = (lin.array() - mx).exp();
            pr /= pr.sum();
            for (long c = 0; c < k; ++c) {
                const double yc = labels[std::size_t(i)] - 1 == c ? 1.0 : 0.0;
                grad.segment(c * block, block) += (pr(c) - yc) * xa.row(i).transpose();
                for (long e = 0; e < k; ++e) {
                    const double wce = pr(c) * ((c == e ? 1.0 : 0.0) - pr(e));
                    hess.block(c * block, e * block, block, block) += wce * xa.row(i).transpose() * xa.row(i);
                }
            }
        }
        for (long c = 0; c < k; ++c)
            for (long j = 0; j < p; ++j) {
                grad(c * block + j) += eta * theta(c * block + j);
                hess(c * block + j, c * block + j) += eta;
            }
        // pin the first intercept
        const long pin = p;
        grad(pin) = 0.0;
        hess.row(pin).setZero();
        hess.col(pin).setZero();
        hess(pin, pin) = 1.0;
        const Vector dx = hess.ldlt().solve(grad);
        theta -= dx;
        if (dx.cwiseAbs().maxCoeff() < 1e-14) break;
    }
    Matrix beta(k, p);
    Vector gamma(k);
    for (long c = 0; c < k; ++c) {
        beta.row(c) = theta.segment(c * block, p).transpose();
        gamma(c) = theta(c * block + p);
    }
    gamma.array() -= gamma.mean();
    return {beta, gamma};
}

}  // namespace oracle
