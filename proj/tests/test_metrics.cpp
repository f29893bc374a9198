#include "oracles.hpp"

#include "seqcomp/metrics.hpp"

#include <doctest.h>

#include <cstring>
#include <random>

using namespace seqcomp;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(Index(v.size()));
    Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

std::vector<int> labels(const Vector& v) { return {v.data(), v.data() + v.size()}; }

std::vector<double> stdvec(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector random_ties(Index n, int levels, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> u(1, levels);
    Vector v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

Matrix web_vs_controlled() {
    Matrix c(5, 5);
    c << 64, 34, 17, 10, 0,
         55, 44, 18, 14, 4,
         26, 41, 26, 25, 5,
         16, 30, 16, 24, 7,
         6, 9, 5, 8, 5;
    return c;
}

bool same_bits(const BootstrapResult& a, const BootstrapResult& b) {
    return std::memcmp(&a.value, &b.value, sizeof(double)) == 0 && std::memcmp(&a.se, &b.se, sizeof(double)) == 0 &&
           std::memcmp(&a.lo, &b.lo, sizeof(double)) == 0 && std::memcmp(&a.hi, &b.hi, sizeof(double)) == 0 &&
           a.redraws == b.redraws;
}

}  // namespace

TEST_SUITE("metrics") {
    TEST_CASE("tau_b on hand cases") {
        CHECK(kendall_tau_b(vec({1, 2, 3}), vec({1, 2, 3})) == 1.0);
        CHECK(kendall_tau_b(vec({1, 2, 3}), vec({3, 2, 1})) == -1.0);
        CHECK(kendall_tau_b(vec({1, 2, 2, 3}), vec({1, 2, 3, 3})) == doctest::Approx(0.8).epsilon(1e-15));
        CHECK(kendall_tau_b_fast(vec({1, 2, 2, 3}), vec({1, 2, 3, 3})) == doctest::Approx(0.8).epsilon(1e-15));
        CHECK(oracle::tau_b({1, 2, 2, 3}, {1, 2, 3, 3}) == doctest::Approx(0.8));
        CHECK_THROWS_AS(kendall_tau_b(vec({2, 2, 2}), vec({1, 2, 3})), UndefinedStatistic);
    }

    TEST_CASE("tau_b agrees with pair enumeration") {
        std::mt19937_64 rng(1);
        for (int k = 0; k < 200; ++k) {
            const Index n = 2 + Index(rng() % 300);
            const Vector q = random_ties(n, 1 + int(rng() % 6), rng), o = random_ties(n, 1 + int(rng() % 6), rng);
            double ref;
            try {
                kendall_tau_b_naive(q, o);
            } catch (const UndefinedStatistic&) {
                continue;
            }
            ref = oracle::tau_b(stdvec(q), stdvec(o));
            CHECK(std::abs(kendall_tau_b_naive(q, o) - ref) < 1e-12);
            CHECK(std::abs(kendall_tau_b_fast(q, o) - ref) < 1e-12);
        }
        // past the switch-over to the merge-sort path
        const Vector q = random_ties(6000, 5, rng), o = random_ties(6000, 5, rng);
        CHECK(std::abs(kendall_tau_b(q, o) - oracle::tau_b(stdvec(q), stdvec(o))) < 1e-12);
    }

    TEST_CASE("midranks and spearman") {
        CHECK(midranks(vec({10, 20, 20, 5})) == vec({2, 3.5, 3.5, 1}));
        CHECK(spearman_rho(vec({1, 2, 3}), vec({1, 2, 3})) == doctest::Approx(1.0));
        CHECK(spearman_rho(vec({1, 2, 3}), vec({6, 5, 4})) == doctest::Approx(-1.0));
        // ranks (1, 2.5, 2.5, 4) and (1, 3, 2, 4)
        const double hand = oracle::pearson({1, 2.5, 2.5, 4}, {1, 3, 2, 4});
        CHECK(spearman_rho(vec({1, 2, 2, 4}), vec({1, 3, 2, 4})) == doctest::Approx(hand).epsilon(1e-14));
        std::mt19937_64 rng(2);
        for (int k = 0; k < 100; ++k) {
            const Vector q = random_ties(50, 4, rng), o = random_ties(50, 7, rng);
            CHECK(std::abs(spearman_rho(q, o) - oracle::spearman(stdvec(q), stdvec(o))) < 1e-12);
        }
        CHECK_THROWS_AS(spearman_rho(vec({1, 1, 1}), vec({1, 2, 3})), UndefinedStatistic);
    }

    TEST_CASE("balanced accuracy on the rating-agreement table") {
        const Matrix c = web_vs_controlled();
        CHECK(std::abs(balanced_accuracy(c) - 0.292) <= 0.001);
        const auto merged = merge_four_point(ScaledConfusion{RatingScale::five, c});
        CHECK(merged.counts.rows() == 4);
        CHECK(merged.counts(0, 0) == 64 + 34 + 55 + 44);
        CHECK(merged.counts.sum() == c.sum());
        CHECK(std::abs(balanced_accuracy(merged.counts) - 0.345) <= 0.001);
        CHECK(balanced_accuracy(Matrix::Identity(5, 5)) == 1.0);
        Matrix empty_row = Matrix::Identity(3, 3);
        empty_row(1, 1) = 0;
        CHECK_THROWS_AS(balanced_accuracy(empty_row), UndefinedStatistic);
    }

    TEST_CASE("confusion rows are the true class") {
        const Matrix c = confusion_matrix({1, 1, 2, 3}, {1, 2, 2, 1}, 3);
        CHECK(c(0, 0) == 1);
        CHECK(c(0, 1) == 1);
        CHECK(c(1, 1) == 1);
        CHECK(c(2, 0) == 1);
        CHECK_THROWS_AS(confusion_matrix({1, 4}, {1, 1}, 3), ValidationError);
    }

    TEST_CASE("error summaries") {
        auto e = mae_rmse(vec({1, 2}), vec({1, 2}));
        CHECK(e.mae == 0.0);
        CHECK(e.rmse == 0.0);
        e = mae_rmse(vec({0, 0}), vec({3, -3}));
        CHECK(e.mae == 3.0);
        CHECK(e.rmse == 3.0);
        e = mae_rmse(vec({1, 2, 2, 5}), vec({0, 0, 0, 0}));
        CHECK(e.mae == 2.5);
        CHECK(e.rmse == doctest::Approx(std::sqrt(34.0 / 4.0)));
    }

    TEST_CASE("bootstrap of a constant error has zero spread") {
        const Vector obs = Vector::LinSpaced(40, 1960, 2000);
        const Vector pred = obs.array() + 2.0;
        const auto r = bootstrap(Statistic::mae, pred, obs, 500, 0.95, 3);
        CHECK(r.value == doctest::Approx(2.0));
        CHECK(r.se == doctest::Approx(0.0).epsilon(1e-12));
    }

    TEST_CASE("bootstrap is bit-identical across runs and thread counts") {
        std::mt19937_64 rng(4);
        const Vector q = random_ties(300, 5, rng);
        Vector o = q;
        for (auto& v : o) v = std::clamp(v + double(int(rng() % 3) - 1), 1.0, 5.0);
        const auto a = bootstrap(Statistic::tau_b, q, o, 2000, 0.95, 77);
        const auto b = bootstrap(Statistic::tau_b, q, o, 2000, 0.95, 77);
        const auto c = bootstrap(Statistic::tau_b, q, o, 2000, 0.95, 77, 0, 4);
        CHECK(same_bits(a, b));
        CHECK(same_bits(a, c));
        CHECK(a.lo <= a.value);
        CHECK(a.value <= a.hi);
        const auto ba = bootstrap(Statistic::ba, q, o, 200, 0.9, 5, 5);
        CHECK(ba.value == doctest::Approx(balanced_accuracy(confusion_matrix(labels(o), labels(q), 5))));
    }

    TEST_CASE("bootstrap SE tracks the sampling spread of tau_b") {
        // population: latent score plus noise, discretised into ratings
        auto draw = [](std::mt19937_64& rng, Vector& q, Vector& o) {
            std::normal_distribution<double> g;
            q.resize(500);
            o.resize(500);
            for (Index i = 0; i < 500; ++i) {
                const double z = g(rng);
                q(i) = std::clamp(std::round(z + 3.0), 1.0, 5.0);
                o(i) = std::clamp(std::round(0.6 * z + 0.8 * g(rng) + 3.0), 1.0, 5.0);
            }
        };
        std::mt19937_64 rng(6);
        std::vector<double> taus;
        Vector q, o;
        for (int k = 0; k < 50; ++k) {
            draw(rng, q, o);
            taus.push_back(kendall_tau_b(q, o));
        }
        double mean = 0, var = 0;
        for (double t : taus) mean += t;
        mean /= 50.0;
        for (double t : taus) var += (t - mean) * (t - mean);
        const double mc_se = std::sqrt(var / 49.0);
        draw(rng, q, o);
        const auto r = bootstrap(Statistic::tau_b, q, o, 1000, 0.95, 8);
        CHECK(std::abs(r.se - mc_se) <= 0.15 * mc_se);
    }

    TEST_CASE("four-point merge") {
        const auto m = merge_four_point(ScaledLabels{RatingScale::five, {1, 2, 3, 4, 5}});
        CHECK(m.scale == RatingScale::four);
        CHECK(m.labels == std::vector<int>{1, 1, 2, 3, 4});
        CHECK(label_name(RatingScale::four, 1) == "1;2");
        CHECK(label_name(RatingScale::four, 2) == "3");
        CHECK(label_name(RatingScale::five, 2) == "2");
        CHECK_THROWS_AS(merge_four_point(m), ValidationError);
        const auto c = merge_four_point(ScaledConfusion{RatingScale::five, web_vs_controlled()});
        CHECK_THROWS_AS(merge_four_point(c), ValidationError);
    }

    TEST_CASE("statistic names round trip") {
        for (auto s : {Statistic::tau_b, Statistic::rho_s, Statistic::ba, Statistic::mae, Statistic::rmse, Statistic::mse})
            CHECK(parse_statistic(statistic_name(s)) == s);
        CHECK_THROWS_AS(parse_statistic("accuracy"), ValidationError);
    }
}
