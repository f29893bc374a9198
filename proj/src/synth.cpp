#include "seqcomp/synth.hpp"

#include "seqcomp/csv.hpp"
#include "seqcomp/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

namespace seqcomp {

namespace fs = std::filesystem;

const std::vector<std::string>& synth_feature_names() {
    static const std::vector<std::string> names{
        "dynamics.rms",         "rhythm.tempo",        "rhythm.attack.time",  "rhythm.attack.slope",
        "timbre.zerocross",     "timbre.lowenergy",    "timbre.spectralflux", "spectral.centroid",
        "spectral.brightness",  "spectral.spread",     "spectral.skewness",   "spectral.kurtosis",
        "spectral.rolloff95",   "spectral.rolloff85",  "spectral.entropy",    "spectral.flatness",
        "spectral.roughness",   "spectral.irregularity", "tonal.keyclarity",  "tonal.mode",
        "tonal.hcdf",           "chroma",              "spectral.mfcc",       "spectral.dmfcc",
        "spectral.ddmfcc"};
    return names;
}

bool synth_feature_is_vector(const std::string& name) {
    return name == "chroma" || name == "spectral.mfcc" || name == "spectral.dmfcc" || name == "spectral.ddmfcc";
}

namespace {

constexpr int kVectorDims = 12;

double round9(double v) { return *csv::parse_double(csv::format9(v)); }

// Fixed per-feature constants, identical for every corpus.
struct FeatureShape {
    std::vector<double> base_mean;  // per dimension
    std::vector<double> base_scale;
    std::vector<double> mean_sign;  // direction in which the moment latent moves the mean
    double period = 40.0;           // sinusoid period in frames
    double drift_sign = 1.0;        // direction in which the temporal latent moves the AR coefficient
};

std::vector<FeatureShape> feature_shapes() {
    std::vector<FeatureShape> shapes;
    std::mt19937_64 rng(0x5eed5eedULL);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (const auto& name : synth_feature_names()) {
        const int dims = synth_feature_is_vector(name) ? kVectorDims : 1;
        FeatureShape s;
        for (int d = 0; d < dims; ++d) {
            s.base_mean.push_back(4.0 * unit(rng) - 2.0);
            s.base_scale.push_back((0.5 + unit(rng)) / (1.0 + 0.3 * d));
            s.mean_sign.push_back(unit(rng) < 0.5 ? -1.0 : 1.0);
        }
        s.period = 20.0 + 140.0 * unit(rng);
        s.drift_sign = unit(rng) < 0.3 ? -1.0 : 1.0;
        shapes.push_back(std::move(s));
    }
    return shapes;
}

std::string pad(int value, int width) {
    std::string s = std::to_string(value);
    return std::string(std::max(0, width - int(s.size())), '0') + s;
}

}  // namespace

Dataset generate_corpus(const SynthParams& p, SynthTruth* truth, int jobs) {
    if (p.tracks < 2) throw ValidationError("synth: need at least two tracks");
    if (p.frames < 16) throw ValidationError("synth: need at least 16 frames");
    if (!(p.frame_rate > 0.0)) throw ValidationError("synth: frame_rate must be positive");
    if (p.correlation < 0.0 || p.correlation > 1.0) throw ValidationError("synth: correlation must lie in [0, 1]");
    if (!(p.year_hi >= p.year_lo) || p.year_lo < 1957.0 || p.year_hi > 2010.0)
        throw ValidationError("synth: year range must lie within [1957, 2010]");
    if (p.ratings < 0) throw ValidationError("synth: negative rating count");
    if (p.duplicate_titles < 0.0 || p.duplicate_titles > 1.0)
        throw ValidationError("synth: duplicate_titles must lie in [0, 1]");
    if (p.variable_rate_features < 0 || p.variable_rate_features > 21)
        throw ValidationError("synth: variable_rate_features must lie in [0, 21]");
    const long long max_pairs = (long long)p.tracks * (p.tracks - 1) / 2;
    if (p.ratings > max_pairs) throw ValidationError("synth: more ratings requested than distinct pairs");

    const auto& names = synth_feature_names();
    const auto shapes = feature_shapes();
    const int n = p.tracks;
    const int width = std::max(4, int(std::to_string(n - 1).size()));
    const int artists = p.artists > 0 ? p.artists : std::max(1, n / 4);

    Dataset ds;
    ds.feature_names = names;
    SynthTruth local;

    // track-level draws come from one sequential stream so they do not depend on `jobs`
    std::mt19937_64 rng(derive_seed(p.seed, 0));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double span = p.year_hi - p.year_lo;
    const double mid = 0.5 * (p.year_lo + p.year_hi);
    for (int i = 0; i < n; ++i) {
        TrackRecord t;
        t.track_id = "t" + pad(i, width);
        t.artist = "artist " + pad(int(unit(rng) * artists), 4);
        t.title = "title " + pad(i, width);
        // whole days inside [year_lo, year_hi]
        const double raw = p.year_lo + unit(rng) * (span + 1.0);
        const double clipped = std::min(raw, p.year_hi + 364.0 / 365.25);
        t.chart_entry_date = parse_iso_date(format_iso_date(clipped));
        const double u = span > 0.0 ? (t.chart_entry_date - mid) / (0.5 * (span + 1.0)) : 0.0;
        local.track_ids.push_back(t.track_id);
        local.years.push_back(t.chart_entry_date);
        local.temporal.push_back(p.year_drift * u + p.latent_noise * gauss(rng));
        local.moment.push_back(p.year_drift * u + p.latent_noise * gauss(rng));
        ds.tracks.push_back(std::move(t));
    }
    // some tracks reuse the title of an earlier track (cover versions)
    for (int i = 1; i < n; ++i)
        if (unit(rng) < p.duplicate_titles) ds.tracks[i].title = ds.tracks[std::size_t(unit(rng) * i)].title;

    std::vector<std::vector<FeatureSequence>> per_track(n);
    parallel_for(std::size_t(n), jobs, [&](std::size_t i) {
        std::mt19937_64 trng(derive_seed(p.seed, i + 1));
        std::normal_distribution<double> g(0.0, 1.0);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        const double zt = local.temporal[i], zm = local.moment[i];
        for (std::size_t f = 0; f < names.size(); ++f) {
            const auto& shape = shapes[f];
            const int dims = int(shape.base_mean.size());
            const double seen_t = shape.drift_sign * zt + p.feature_noise * g(trng);
            const double seen_m = zm + p.feature_noise * g(trng);
            const double phi = p.correlation * (0.55 + 0.4 * std::tanh(0.9 * seen_t));
            const double w = 0.35 * p.correlation;
            const double scale_factor = std::exp(0.25 * seen_m);
            FeatureSequence seq;
            seq.track_id = ds.tracks[i].track_id;
            seq.feature_name = names[f];
            seq.rate = int(f) >= 21 - p.variable_rate_features && f < 21 ? FrameRate::variable_rate()
                                                                          : FrameRate::constant(p.frame_rate);
            seq.frames.resize(p.frames, dims);
            const double innovation = std::sqrt(1.0 - phi * phi);
            for (int d = 0; d < dims; ++d) {
                const double mean = shape.base_mean[d] + 0.8 * shape.mean_sign[d] * seen_m;
                const double sd = shape.base_scale[d] * scale_factor;
                const double phase = 2.0 * std::numbers::pi * u01(trng);
                const double period = shape.period * (1.0 + 0.1 * d);
                double a = g(trng);
                for (int t = 0; t < p.frames; ++t) {
                    if (t > 0) a = phi * a + innovation * g(trng);
                    const double s = std::numbers::sqrt2 * std::sin(2.0 * std::numbers::pi * t / period + phase);
                    seq.frames(t, d) = round9(mean + sd * (std::sqrt(1.0 - w * w) * a + w * s));
                }
            }
            per_track[i].push_back(std::move(seq));
        }
    });
    for (auto& seqs : per_track)
        for (auto& s : seqs) {
            auto key = std::make_pair(s.track_id, s.feature_name);
            ds.features.emplace(std::move(key), std::move(s));
        }

    if (p.ratings > 0) {
        std::set<std::pair<int, int>> used;
        std::vector<std::pair<int, int>> pairs;
        std::uniform_int_distribution<int> pick(0, n - 1);
        while (int(pairs.size()) < p.ratings) {
            int a = pick(rng), b = pick(rng);
            if (a == b || !used.emplace(std::min(a, b), std::max(a, b)).second) continue;
            pairs.emplace_back(a, b);
        }
        std::vector<double> dist;
        for (auto [a, b] : pairs)
            dist.push_back(std::abs(local.temporal[a] - local.temporal[b]) + std::abs(local.moment[a] - local.moment[b]));
        // equal-frequency classes, 5 = closest
        std::vector<double> sorted = dist;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t r = 0; r < pairs.size(); ++r) {
            const auto rank = std::size_t(std::lower_bound(sorted.begin(), sorted.end(), dist[r]) - sorted.begin());
            int score = 5 - int(5 * rank / sorted.size());
            const double noise = unit(rng);
            if (noise < 0.5 * p.rating_noise) score = std::min(5, score + 1);
            else if (noise < p.rating_noise) score = std::max(1, score - 1);
            ds.ratings.push_back({ds.tracks[pairs[r].first].track_id, ds.tracks[pairs[r].second].track_id, score});
        }
        local.rating_distance = std::move(dist);
    }

    ds.validate();
    if (truth) *truth = std::move(local);
    return ds;
}

namespace {

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    return out;
}

}  // namespace

void write_corpus(const Dataset& ds, const fs::path& dir) {
    fs::create_directories(dir / "seq");
    {
        auto out = open_out(dir / "manifest.txt");
        out << "# synthetic corpus\ntracks=tracks.csv\nfeatures=features.csv\n";
        if (!ds.ratings.empty()) out << "ratings=ratings.csv\n";
    }
    {
        auto out = open_out(dir / "tracks.csv");
        out << "track_id,artist,title,chart_entry_date\n";
        for (const auto& t : ds.tracks)
            out << csv::quote(t.track_id) << ',' << csv::quote(t.artist) << ',' << csv::quote(t.title) << ','
                << format_iso_date(t.chart_entry_date) << '\n';
    }
    {
        auto out = open_out(dir / "features.csv");
        out << "track_id,feature_name,path,frame_rate_hz,dims\n";
        for (const auto& t : ds.tracks) {
            fs::create_directories(dir / "seq" / t.track_id);
            for (const auto& name : ds.feature_names) {
                const auto& seq = ds.feature(t.track_id, name);
                const std::string rel = "seq/" + t.track_id + "/" + name + ".csv";
                out << csv::quote(t.track_id) << ',' << csv::quote(name) << ',' << csv::quote(rel) << ','
                    << (seq.rate.variable ? std::string("variable") : csv::format9(seq.rate.hz)) << ',' << seq.dims()
                    << '\n';
                auto s = open_out(dir / rel);
                std::string line;
                for (Index r = 0; r < seq.frames.rows(); ++r) {
                    line.clear();
                    for (Index c = 0; c < seq.frames.cols(); ++c) {
                        if (c) line += ',';
                        line += csv::format9(seq.frames(r, c));
                    }
                    line += '\n';
                    s << line;
                }
            }
        }
    }
    if (!ds.ratings.empty()) {
        auto out = open_out(dir / "ratings.csv");
        out << "track_i,track_j,score\n";
        for (const auto& r : ds.ratings)
            out << csv::quote(r.track_i) << ',' << csv::quote(r.track_j) << ',' << r.score << '\n';
    }
}

}  // namespace seqcomp
