#include "seqcomp/symbolic.hpp"

#include <doctest.h>

#include <random>

using namespace seqcomp;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(Index(v.size()));
    Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

std::vector<int> bin_counts(const SymbolSequence& s) {
    std::vector<int> c(std::size_t(s.alphabet), 0);
    for (auto x : s.symbols) ++c[x];
    return c;
}

}  // namespace

TEST_SUITE("symbolic") {
    TEST_CASE("downsampling pools non-overlapping windows") {
        const Vector x = vec({1, 2, 3, 4});
        CHECK(downsample(x, 1) == x);
        CHECK(downsample(x, 2) == vec({1.5, 3.5}));
        CHECK(downsample(vec({1, 2, 3, 4, 5}), 2) == vec({1.5, 3.5}));
        CHECK(downsample(vec({1, 2, 3, 4, 5}), 2, DownsampleMethod::decimate) == vec({1, 3}));
        CHECK_THROWS_AS(downsample(vec({1, 2}), 3), ValidationError);
        CHECK_THROWS_AS(downsample(x, 0), ValidationError);
    }

    TEST_CASE("tertiles of 1..9") {
        const Vector x = vec({1, 2, 3, 4, 5, 6, 7, 8, 9});
        const auto e = equal_frequency_edges(x, 3);
        REQUIRE(e.edges.size() == 2);
        CHECK(e.edges[0] == 3);
        CHECK(e.edges[1] == 6);
        CHECK(bin_counts(quantise(x, e)) == std::vector<int>{3, 3, 3});
    }

    TEST_CASE("constant input collapses into the lowest bin") {
        const Vector x = vec({5, 5, 5, 5});
        const auto e = equal_frequency_edges(x, 3);
        CHECK(e.edges == std::vector<double>{5, 5});
        const auto s = quantise(x, e);
        CHECK(s.alphabet == 3);
        CHECK(s.symbols == std::vector<std::uint8_t>{0, 0, 0, 0});
    }

    TEST_CASE("uniform draws fill quartiles evenly") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u;
        Vector x(1000);
        for (auto& v : x) v = u(rng);
        const auto c = bin_counts(quantise(x, equal_frequency_edges(x, 4)));
        for (int n : c) CHECK(std::abs(n - 250) <= 1);
    }

    TEST_CASE("quantisation with explicit edges") {
        BinEdges e{{3, 6}};
        CHECK(quantise(vec({1, 4, 7}), e).symbols == std::vector<std::uint8_t>{0, 1, 2});
        CHECK(quantise(vec({3, 6}), e).symbols == std::vector<std::uint8_t>{0, 1});
    }

    TEST_CASE("quantisation matches a linear scan") {
        std::mt19937_64 rng(5);
        std::normal_distribution<double> g;
        for (int lambda : {2, 3, 4, 5, 7}) {
            Vector x(100);
            for (auto& v : x) v = std::round(4 * g(rng)) / 4;  // coarse grid forces ties
            const auto e = equal_frequency_edges(x, lambda);
            const auto s = quantise(x, e);
            for (Index t = 0; t < x.size(); ++t) {
                int sym = 0;
                for (int m = 0; m < lambda - 1; ++m)
                    if (x(t) > e.edges[std::size_t(m)]) sym = m + 1;
                CHECK(int(s.symbols[std::size_t(t)]) == sym);
            }
            // edge m is the ceil(m T / lambda)-th smallest value
            std::vector<double> sorted(x.begin(), x.end());
            std::sort(sorted.begin(), sorted.end());
            for (int m = 1; m < lambda; ++m) {
                const auto r = std::size_t((m * 100 + lambda - 1) / lambda);
                CHECK(e.edges[std::size_t(m - 1)] == sorted[r - 1]);
            }
        }
    }

    TEST_CASE("invalid alphabet sizes are rejected") {
        const Vector x = vec({1, 2, 3});
        CHECK_THROWS_AS(equal_frequency_edges(x, 1), ValidationError);
        CHECK_THROWS_AS(equal_frequency_edges(Vector(0), 3), ValidationError);
    }
}
