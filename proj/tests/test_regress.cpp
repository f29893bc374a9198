#include "oracles.hpp"

#include "seqcomp/regress.hpp"
#include "seqcomp/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <set>

using namespace seqcomp;

namespace {

Matrix gaussian(Index rows, Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Matrix x(rows, cols);
    for (Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
    return x;
}

// labels drawn from a softmax of a fixed linear score
std::vector<int> softmax_labels(const Matrix& x, const Matrix& beta, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<int> out;
    for (Index i = 0; i < x.rows(); ++i) {
        const Vector s = beta * x.row(i).transpose();
        Vector p = (s.array() - s.maxCoeff()).exp();
        p /= p.sum();
        std::discrete_distribution<int> d(p.data(), p.data() + p.size());
        out.push_back(d(rng) + 1);
    }
    return out;
}

bool non_increasing(const std::vector<double>& trace) {
    for (std::size_t i = 1; i < trace.size(); ++i)
        if (trace[i] > trace[i - 1] + 1e-12 * std::abs(trace[i - 1])) return false;
    return true;
}

}  // namespace

TEST_SUITE("regress") {
    TEST_CASE("standardisation of a simple column") {
        Matrix x(3, 2);
        x << 1, 7, 2, 7, 3, 7;
        const auto [z, stats] = standardise(x);
        CHECK(z.col(0).mean() == doctest::Approx(0.0));
        CHECK(std::sqrt(z.col(0).squaredNorm() / 3.0) == doctest::Approx(1.0));
        CHECK(z.col(1).cwiseAbs().maxCoeff() == 0.0);
        CHECK(stats.constant[1]);
        CHECK_FALSE(stats.constant[0]);
        CHECK(stats.provenance == Provenance::training);

        const auto var = fit_standardisation(x, ScaleMode::variance);
        CHECK(var.scale(0) == doctest::Approx(2.0 / 3.0));
    }

    TEST_CASE("held-out rows use training statistics") {
        const Matrix train = gaussian(30, 3, 1);
        const Matrix test = (gaussian(20, 3, 2).array() + 5.0).matrix();
        const auto stats = fit_standardisation(train);
        const Matrix z = apply_standardisation(test, stats);
        const Vector mean = train.colwise().mean();
        for (Index c = 0; c < 3; ++c) {
            const double sd = std::sqrt((train.col(c).array() - mean(c)).square().sum() / 30.0);
            for (Index r = 0; r < 20; ++r) CHECK(z(r, c) == doctest::Approx((test(r, c) - mean(c)) / sd));
        }
        const Matrix self = standardise(test).first;
        CHECK((z - self).cwiseAbs().maxCoeff() > 1.0);

        Standardisation forged = stats;
        forged.provenance = Provenance::unknown;
        CHECK_THROWS_AS(apply_standardisation(test, forged), ValidationError);
    }

    TEST_CASE("strong penalty leaves only the base-rate intercepts") {
        Matrix x(8, 1);
        x << -4, -3, -2, -1, 1, 2, 3, 4;
        const std::vector<int> y{1, 1, 1, 1, 1, 2, 2, 2};
        const auto m = fit_multinomial_enr(x, y, 2, 1e4, 0.5);
        CHECK(m.beta.cwiseAbs().maxCoeff() == 0.0);
        const double g1 = std::log(5.0 / 8.0), g2 = std::log(3.0 / 8.0);
        CHECK(m.gamma(0) == doctest::Approx(g1 - 0.5 * (g1 + g2)).epsilon(1e-5));
        CHECK(m.gamma(1) == doctest::Approx(g2 - 0.5 * (g1 + g2)).epsilon(1e-5));
        CHECK(multinomial_eta_max(x, y, 2, 0.5) < 1e4);
    }

    TEST_CASE("two classes reduce to penalised logistic regression") {
        const Matrix x = gaussian(50, 3, 3);
        Matrix truth(2, 3);
        truth << 0, 0, 0, 1.5, -1.0, 0.2;
        const auto y = softmax_labels(x, truth, 4);
        Vector y01(50);
        for (Index i = 0; i < 50; ++i) y01(i) = y[std::size_t(i)] == 2 ? 1.0 : 0.0;
        for (double eta : {0.5, 2.0, 8.0})
            for (double nu : {0.3, 1.0}) {
                SolverOptions opt;
                opt.tolerance = 1e-9;
                const auto m = fit_multinomial_enr(x, y, 2, eta, nu, opt);
                // beta_2 - beta_1 carries an l1 weight eta*nu and an l2 weight eta*(1-nu)/2
                const auto ref = oracle::logistic_fista(x, y01, eta * nu, 0.5 * eta * (1 - nu));
                const Vector delta = (m.beta.row(1) - m.beta.row(0)).transpose();
                CHECK((delta - ref.delta).cwiseAbs().maxCoeff() < 1e-4);
                CHECK(std::abs((m.gamma(1) - m.gamma(0)) - ref.intercept) < 1e-4);
                for (Index i = 0; i < 50; ++i) {
                    const double p_ref = 1.0 / (1.0 + std::exp(-(x.row(i).dot(ref.delta) + ref.intercept)));
                    CHECK(std::abs(class_probabilities(m, x.row(i).transpose())(1) - p_ref) < 1e-4);
                }
            }
    }

    TEST_CASE("pure ridge multinomial matches a Newton solve") {
        const Matrix x = gaussian(60, 4, 5);
        Matrix truth(3, 4);
        truth << 1, 0, -1, 0.5, -1, 1, 0, 0, 0, -1, 1, -0.5;
        const auto y = softmax_labels(x, truth, 6);
        SolverOptions opt;
        opt.tolerance = 1e-9;
        const double eta = 0.05;
        const auto m = fit_multinomial_enr(x, y, 3, eta, 0.0, opt);
        const auto [beta, gamma] = oracle::multinomial_ridge_newton(x, y, 3, eta);
        CHECK((m.beta - beta).cwiseAbs().maxCoeff() < 1e-5);
        CHECK((m.gamma - gamma).cwiseAbs().maxCoeff() < 1e-5);
    }

    TEST_CASE("multinomial objective never increases") {
        const Matrix x = gaussian(200, 10, 7);
        Matrix truth = gaussian(5, 10, 8);
        const auto y = softmax_labels(x, truth, 9);
        const double emax = multinomial_eta_max(x, y, 5, 0.5);
        for (double frac : {0.5, 0.05, 0.001}) {
            std::vector<double> trace;
            SolverOptions opt;
            opt.on_iteration = [&](double v) { trace.push_back(v); };
            const auto m = fit_multinomial_enr(x, y, 5, frac * emax, 0.5, opt);
            CHECK(!trace.empty());
            CHECK(non_increasing(trace));
            CHECK(trace.back() == doctest::Approx(multinomial_objective(x, y, m.beta, m.gamma, m.eta, m.nu)));
            CHECK(multinomial_residual(x, y, m.beta, m.gamma, m.eta, m.nu) <= 1e-5);
        }
    }

    TEST_CASE("eta_max is the edge of the all-zero solution") {
        const Matrix x = gaussian(80, 6, 10);
        const auto y = softmax_labels(x, gaussian(3, 6, 11), 12);
        const double emax = multinomial_eta_max(x, y, 3, 0.7);
        CHECK(fit_multinomial_enr(x, y, 3, emax * 1.001, 0.7).beta.cwiseAbs().maxCoeff() == 0.0);
        CHECK(fit_multinomial_enr(x, y, 3, emax * 0.9, 0.7).beta.cwiseAbs().maxCoeff() > 0.0);
    }

    TEST_CASE("warm start reaches the same solution") {
        const Matrix x = gaussian(100, 5, 13);
        const auto y = softmax_labels(x, gaussian(4, 5, 14), 15);
        SolverOptions opt;
        opt.tolerance = 1e-9;
        const auto cold = fit_multinomial_enr(x, y, 4, 1.0, 0.5, opt);
        const auto prev = fit_multinomial_enr(x, y, 4, 3.0, 0.5, opt);
        const auto warm = fit_multinomial_enr(x, y, 4, 1.0, 0.5, opt, &prev);
        CHECK((cold.beta - warm.beta).cwiseAbs().maxCoeff() < 1e-6);
    }

    TEST_CASE("iteration cap raises a convergence error") {
        const Matrix x = gaussian(100, 5, 16);
        const auto y = softmax_labels(x, gaussian(4, 5, 17), 18);
        SolverOptions opt;
        opt.max_iterations = 1;
        opt.tolerance = 1e-14;
        CHECK_THROWS_AS(fit_multinomial_enr(x, y, 4, 0.01, 0.5, opt), ConvergenceError);
        CHECK_THROWS_AS(fit_multinomial_enr(x, y, 4, -1.0, 0.5), ValidationError);
        CHECK_THROWS_AS(fit_multinomial_enr(x, y, 4, 1.0, 1.5), ValidationError);
    }

    TEST_CASE("rating prediction") {
        MultinomialModel m;
        m.beta = Matrix::Zero(5, 2);
        m.gamma = Vector::Zero(5);
        CHECK(predict_rating(m, Vector::Ones(2)) == 1);
        m.beta(2, 0) = 3.0;
        CHECK(predict_rating(m, Vector::Ones(2)) == 3);

        m.beta = gaussian(5, 2, 19);
        m.gamma = gaussian(5, 1, 20).col(0);
        const Matrix rows = gaussian(50, 2, 21);
        for (Index i = 0; i < rows.rows(); ++i) {
            Vector s = m.beta * rows.row(i).transpose() + m.gamma;
            Vector p = s.array().exp();
            p /= p.sum();
            Index arg;
            p.maxCoeff(&arg);
            CHECK(predict_rating(m, rows.row(i).transpose()) == int(arg) + 1);
            CHECK((class_probabilities(m, rows.row(i).transpose()) - p).cwiseAbs().maxCoeff() < 1e-12);
        }
    }

    TEST_CASE("pure ridge regression matches the closed form") {
        const Matrix x = gaussian(20, 4, 22);
        Vector y = x * Vector::LinSpaced(4, -1, 2) + 0.3 * gaussian(20, 1, 23).col(0);
        y.array() += 1980.0;
        for (double eta : {0.01, 0.1, 1.0, 10.0, 100.0}) {
            const auto m = fit_linear_enr(x, y, eta, 0.0);
            const Vector ref = oracle::ridge(x, y, eta);
            CHECK((m.theta - ref).cwiseAbs().maxCoeff() < 1e-8);
            CHECK(std::abs(m.alpha - (y.mean() - x.colwise().mean().dot(ref))) < 1e-8);
        }
    }

    TEST_CASE("single-column lasso has a closed form") {
        const Matrix x = gaussian(30, 1, 24);
        const Vector y = 2.0 * x.col(0) + gaussian(30, 1, 25).col(0);
        const Vector xc = x.col(0).array() - x.col(0).mean();
        const Vector yc = y.array() - y.mean();
        for (double eta : {0.5, 5.0, 50.0}) {
            const double z = 2 * xc.dot(yc);
            const double expect = std::copysign(std::max(std::abs(z) - eta, 0.0), z) / (2 * xc.squaredNorm());
            CHECK(fit_linear_enr(x, y, eta, 1.0).theta(0) == doctest::Approx(expect).epsilon(1e-9));
        }
    }

    TEST_CASE("linear shrinkage limits") {
        const Matrix x = gaussian(40, 3, 26);
        const Vector y = (x * Vector::Ones(3)).array() + 1990.0;
        const auto big = fit_linear_enr(x, y, 1e9, 0.5);
        CHECK(big.theta.cwiseAbs().maxCoeff() == 0.0);
        CHECK(big.alpha == doctest::Approx(y.mean()));
        CHECK(linear_eta_max(x, y, 0.5) < 1e9);

        Matrix t(50, 1);
        t.col(0) = Vector::LinSpaced(50, 0, 10);
        const Vector line = 1960.0 + 1.7 * t.col(0).array();
        CHECK(std::abs(fit_linear_enr(t, line, 1e-6, 0.5).theta(0) - 1.7) < 1e-3);
    }

    TEST_CASE("linear objective never increases and stationarity holds") {
        const Matrix x = gaussian(120, 30, 27);
        Vector coef = Vector::Zero(30);
        coef.head(5) << 3, -2, 1.5, 1, -0.5;
        const Vector y = x * coef + gaussian(120, 1, 28).col(0);
        for (double nu : {0.05, 0.5, 1.0}) {
            const double emax = linear_eta_max(x, y, nu);
            for (double frac : {0.3, 0.01, 0.0001}) {
                std::vector<double> trace;
                SolverOptions opt;
                opt.on_iteration = [&](double v) { trace.push_back(v); };
                const auto m = fit_linear_enr(x, y, frac * emax, nu, opt);
                CHECK(non_increasing(trace));
                CHECK(linear_residual(x, y, m.theta, m.alpha, m.eta, m.nu) <= 1e-6 * std::max(1.0, emax));
            }
        }
    }

    TEST_CASE("year prediction clamps to the chart range") {
        LinearModel m;
        m.theta = Vector::Ones(1);
        m.alpha = 0.0;
        CHECK(predict_year(m, Vector::Constant(1, 2050.3)) == 2010.0);
        CHECK(predict_year(m, Vector::Constant(1, 1983.2)) == 1983.2);
        CHECK(predict_year(m, Vector::Constant(1, 1900.0)) == 1957.0);
        m.theta.setZero();
        m.alpha = 2015.0;
        CHECK(predict_year(m, Vector::Constant(1, 3.0)) == 2010.0);
        m.alpha = 1990.5;
        CHECK(predict_year(m, Vector::Constant(1, 3.0)) == 1990.5);
    }

    TEST_CASE("eta grid and magnitudes") {
        const auto g = eta_grid(10.0);
        REQUIRE(g.size() == 50);
        CHECK(g.front() == doctest::Approx(10.0));
        CHECK(g.back() == doctest::Approx(1e-3));
        for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] / g[i - 1] == doctest::Approx(g[1] / g[0]));

        MultinomialModel m;
        m.beta = gaussian(4, 6, 29);
        m.beta(0, 2) = 0;
        m.gamma = Vector::Zero(4);
        const Vector mag = normalised_magnitudes(m);
        CHECK((mag.array() >= 0).all());
        CHECK(std::abs(mag.sum() - 1.0) < 1e-9);
        CHECK(mag(1) == doctest::Approx(m.beta.col(1).cwiseAbs().sum() / m.beta.cwiseAbs().sum()));
    }

    TEST_CASE("tuning with a single eta picks it") {
        const Matrix x = gaussian(100, 4, 30);
        const auto labels = softmax_labels(x, gaussian(3, 4, 31), 32);
        Vector y(100);
        for (Index i = 0; i < 100; ++i) y(i) = labels[std::size_t(i)];
        TuneOptions o;
        o.eta_grid = {0.7};
        o.classes = 3;
        const auto t = tune(FitKind::multinomial, x, y, 0.5, o);
        CHECK(t.chosen_eta == 0.7);
        CHECK(t.etas.size() == 1);
    }

    TEST_CASE("tuning is reproducible and close to the best eta on fresh data") {
        // 5 informative of 50 columns
        const Matrix x = gaussian(400, 50, 33), fresh = gaussian(2000, 50, 34);
        Vector coef = Vector::Zero(50);
        coef.head(5) << 2, -1.5, 1, 1, -1;
        auto respond = [&](const Matrix& m, std::uint64_t seed) {
            return Vector(m * coef + 2.0 * gaussian(m.rows(), 1, seed).col(0));
        };
        const Vector y = respond(x, 35), yf = respond(fresh, 36);

        TuneOptions o;
        o.protocol = Protocol::kfold;
        o.eta_count = 20;
        o.seed = 9;
        const auto t = tune(FitKind::linear, x, y, 0.5, o);
        const auto again = tune(FitKind::linear, x, y, 0.5, o);
        CHECK(t.scores.size() == 20);
        for (std::size_t i = 0; i < t.scores.size(); ++i) CHECK(std::memcmp(&t.scores[i], &again.scores[i], sizeof(double)) == 0);

        double best = INFINITY, chosen = NAN;
        for (double eta : t.etas) {
            const auto m = fit_linear_enr(x, y, eta, 0.5);
            const double mse = (fresh * m.theta + Vector::Constant(fresh.rows(), m.alpha) - yf).squaredNorm() / 2000.0;
            best = std::min(best, mse);
            if (eta == t.chosen_eta) chosen = mse;
        }
        CHECK(chosen * 0.9 <= best);

        // the same check for the multinomial holdout protocol, scored by tau_b
        Matrix beta = Matrix::Zero(3, 50);
        beta.block(0, 0, 3, 5) = gaussian(3, 5, 37);
        const auto lx = softmax_labels(x, beta, 38), lf = softmax_labels(fresh, beta, 39);
        Vector ly(400), obs(2000);
        for (Index i = 0; i < 400; ++i) ly(i) = lx[std::size_t(i)];
        for (Index i = 0; i < 2000; ++i) obs(i) = lf[std::size_t(i)];
        TuneOptions mo;
        mo.eta_count = 15;
        mo.classes = 3;
        const auto mt = tune(FitKind::multinomial, x, ly, 0.5, mo);
        double best_tau = -INFINITY, chosen_tau = NAN;
        for (double eta : mt.etas) {
            const auto m = fit_multinomial_enr(x, lx, 3, eta, 0.5);
            Vector pred(2000);
            for (Index i = 0; i < 2000; ++i) pred(i) = predict_rating(m, fresh.row(i).transpose());
            double tau = NAN;
            try {
                tau = kendall_tau_b(pred, obs);
            } catch (const UndefinedStatistic&) {
                continue;
            }
            best_tau = std::max(best_tau, tau);
            if (eta == mt.chosen_eta) chosen_tau = tau;
        }
        CHECK(chosen_tau >= 0.9 * best_tau);
    }

    TEST_CASE("nu selection keeps the best nu") {
        const Matrix x = gaussian(150, 8, 40);
        const Vector y = x.col(0) * 2.0 + gaussian(150, 1, 41).col(0);
        TuneOptions o;
        o.protocol = Protocol::kfold;
        o.eta_count = 8;
        const auto sel = tune_nu(FitKind::linear, x, y, {0.1, 0.5, 1.0}, o);
        REQUIRE(sel.traces.size() == 3);
        double best = INFINITY, nu = -1;
        for (const auto& t : sel.traces)
            if (t.scores[t.chosen_index] < best) best = t.scores[t.chosen_index], nu = t.nu;
        CHECK(sel.nu == nu);
    }

    TEST_CASE("window averaging") {
        Matrix one(1, 2);
        one << 3, 4;
        const auto w1 = window_group(one, {1990.3}, 30);
        CHECK(w1.rows == one);
        CHECK(w1.counts == std::vector<int>{1});

        Matrix two(2, 1);
        two << 2, 4;
        const double d = 1990.0 + 10.0 / 365.25;
        const auto w2 = window_group(two, {d, d + 1.0 / 365.25}, 15);
        REQUIRE(w2.rows.rows() == 1);
        CHECK(w2.rows(0, 0) == 3.0);
        const double width = 15.0 / 365.25;
        const long idx = long(std::floor((d - 1957.0) / width));
        CHECK(w2.centres(0) == doctest::Approx(1957.0 + (double(idx) + 0.5) * width));
    }

    TEST_CASE("window count matches a day-bucketing scan") {
        SynthParams p;
        p.tracks = 1000;
        p.frames = 20;
        const Dataset ds = generate_corpus(p);
        std::vector<double> dates;
        std::set<long> buckets;
        for (const auto& t : ds.tracks) {
            dates.push_back(t.chart_entry_date);
            // whole days since the origin, then 60-day buckets
            const double days = (t.chart_entry_date - 1957.0) * 365.25;
            buckets.insert(long(std::floor(days / 60.0)));
        }
        const auto w = window_group(Matrix::Zero(1000, 1), dates, 60);
        CHECK(w.rows.rows() == Index(buckets.size()));
        int total = 0;
        for (int c : w.counts) total += c;
        CHECK(total == 1000);
    }
}
