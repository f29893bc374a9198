#include "test_util.hpp"

#include "seqcomp/descriptors.hpp"
#include "seqcomp/synth.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace seqcomp;
namespace fs = std::filesystem;

namespace {

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = testutil::read_file(e.path());
    return out;
}

}  // namespace

TEST_SUITE("synth") {
    TEST_CASE("written corpus is laid out per track and reproducible") {
        SynthParams p;
        p.tracks = 10;
        p.frames = 50;
        p.seed = 7;
        p.ratings = 20;
        testutil::TempDir a("synth_a"), b("synth_b");
        write_corpus(generate_corpus(p), a.path());
        write_corpus(generate_corpus(p, nullptr, 4), b.path());
        std::size_t dirs = 0, files = 0;
        for (const auto& e : fs::directory_iterator(a / "seq")) {
            dirs += e.is_directory();
            for ([[maybe_unused]] const auto& f : fs::directory_iterator(e.path())) ++files;
        }
        CHECK(dirs == 10);
        CHECK(files == 250);
        CHECK(snapshot(a.path()) == snapshot(b.path()));

        p.seed = 8;
        testutil::TempDir c("synth_c");
        write_corpus(generate_corpus(p), c.path());
        CHECK(snapshot(a.path()) != snapshot(c.path()));
    }

    TEST_CASE("written corpus loads back identically") {
        SynthParams p;
        p.tracks = 6;
        p.frames = 40;
        p.ratings = 10;
        p.variable_rate_features = 1;
        const Dataset ds = generate_corpus(p);
        testutil::TempDir dir("roundtrip");
        write_corpus(ds, dir.path());
        const Dataset back = load_dataset(dir / "manifest.txt");
        CHECK(back.feature_names == ds.feature_names);
        REQUIRE(back.tracks.size() == ds.tracks.size());
        for (std::size_t i = 0; i < ds.tracks.size(); ++i) {
            CHECK(back.tracks[i].track_id == ds.tracks[i].track_id);
            CHECK(back.tracks[i].artist == ds.tracks[i].artist);
            CHECK(back.tracks[i].chart_entry_date == ds.tracks[i].chart_entry_date);
        }
        for (const auto& [key, seq] : ds.features) {
            const auto& other = back.features.at(key);
            CHECK((other.frames.array() == seq.frames.array()).all());
            CHECK(other.rate == seq.rate);
        }
        REQUIRE(back.ratings.size() == 10);
        for (std::size_t i = 0; i < 10; ++i) CHECK(back.ratings[i].score == ds.ratings[i].score);
    }

    TEST_CASE("ratings follow the hidden distance") {
        SynthParams p;
        p.tracks = 60;
        p.frames = 20;
        p.ratings = 600;
        p.rating_noise = 0.0;
        SynthTruth truth;
        const Dataset ds = generate_corpus(p, &truth);
        REQUIRE(truth.rating_distance.size() == 600);
        // closer pairs never receive a lower score without noise
        for (std::size_t i = 0; i < 600; ++i)
            for (std::size_t j = 0; j < 600; ++j)
                if (truth.rating_distance[i] < truth.rating_distance[j]) CHECK(ds.ratings[i].score >= ds.ratings[j].score);
        std::vector<int> counts(5, 0);
        for (const auto& r : ds.ratings) ++counts[std::size_t(r.score - 1)];
        for (int c : counts) CHECK(c == 120);
    }

    TEST_CASE("without temporal correlation sequences behave like shuffles") {
        SynthParams p;
        p.tracks = 4;
        p.frames = 3000;
        p.correlation = 0.0;
        const Dataset ds = generate_corpus(p);
        std::mt19937_64 rng(1);
        double gap = 0.0, rate = 0.0;
        int n = 0;
        for (const auto& t : ds.tracks)
            for (const auto& f : ds.feature_names) {
                if (synth_feature_is_vector(f)) continue;
                Vector x = ds.feature(t.track_id, f).frames.col(0);
                Vector y = x;
                std::shuffle(y.begin(), y.end(), rng);
                const double r = compression_rate(x, 4, 1);
                gap += std::abs(r - compression_rate(y, 4, 1));
                rate += r;
                ++n;
            }
        CHECK(gap / n < 0.03);
        // the reference is the compressor's rate on i.i.d. uniform symbols of the same length
        std::uniform_int_distribution<int> u(0, 3);
        SymbolSequence iid{{}, 4};
        for (int i = 0; i < 3000; ++i) iid.symbols.push_back(std::uint8_t(u(rng)));
        const double reference = ppm_codelength(iid, 5).rate();
        CHECK(std::abs(rate / n - reference) < 0.05);
        CHECK(std::abs(rate / n - 2.0) < 0.25);
    }

    TEST_CASE("feature catalogue") {
        const auto& names = synth_feature_names();
        CHECK(names.size() == 25);
        CHECK(std::count_if(names.begin(), names.end(), synth_feature_is_vector) == 4);
    }
}
