#include "seqcomp/data_model.hpp"

#include "seqcomp/csv.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <cstdio>
#include <sstream>
#include <unordered_map>

namespace seqcomp {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail_at(const fs::path& file, std::size_t line, const std::string& what) {
    std::ostringstream os;
    os << file.string();
    if (line > 0) os << ':' << line;
    os << ": " << what;
    throw ValidationError(os.str());
}

std::ifstream open_or_fail(const fs::path& path) {
    std::ifstream in(path);
    if (!in) fail_at(path, 0, "missing file");
    return in;
}

bool is_blank(std::string_view line) { return csv::trim(line).empty(); }

void expect_header(std::istream& in, const fs::path& file, const std::vector<std::string>& expected) {
    std::string line;
    if (!std::getline(in, line)) fail_at(file, 1, "schema violation: empty file, expected header");
    auto fields = csv::split(line);
    for (auto& f : fields) f = std::string(csv::trim(f));
    if (fields != expected) {
        std::string want;
        for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
        fail_at(file, 1, "schema violation: header must be '" + want + "'");
    }
}

bool is_leap(int year) { return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0; }

int days_in_month(int year, int month) {
    static constexpr int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return month == 2 && is_leap(year) ? 29 : days[month - 1];
}

Matrix read_sequence(const fs::path& path, Index dims) {
    auto in = open_or_fail(path);
    std::vector<double> values;
    std::string line;
    std::size_t lineno = 0;
    Index rows = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (is_blank(line)) continue;
        const auto fields = csv::split(line);
        if (static_cast<Index>(fields.size()) != dims) {
            fail_at(path, lineno, "schema violation: expected " + std::to_string(dims) + " columns, found " +
                                      std::to_string(fields.size()));
        }
        for (const auto& f : fields) {
            const auto v = csv::parse_double(f);
            if (!v) fail_at(path, lineno, "schema violation: not a number '" + f + "'");
            if (!std::isfinite(*v)) fail_at(path, lineno, "schema violation: non-finite value");
            values.push_back(*v);
        }
        ++rows;
    }
    if (rows == 0) fail_at(path, 0, "schema violation: sequence has no frames");
    Matrix frames(rows, dims);
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < dims; ++c) frames(r, c) = values[static_cast<std::size_t>(r * dims + c)];
    return frames;
}

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

}  // namespace

// ---------------------------------------------------------------------------------------------
// Dataset

bool Dataset::has_track(std::string_view id) const {
    auto it = std::lower_bound(tracks.begin(), tracks.end(), id,
                               [](const TrackRecord& t, std::string_view key) { return t.track_id < key; });
    return it != tracks.end() && it->track_id == id;
}

const TrackRecord& Dataset::track(std::string_view id) const {
    if (!has_track(id))
        throw ValidationError("dangling track reference: " + std::string(id));
    return *std::lower_bound(tracks.begin(), tracks.end(), id,
                             [](const TrackRecord& t, std::string_view key) { return t.track_id < key; });
}

const FeatureSequence& Dataset::feature(const std::string& track_id, const std::string& name) const {
    auto it = features.find({track_id, name});
    if (it == features.end()) throw ValidationError("missing feature '" + name + "' for track " + track_id);
    return it->second;
}

Index Dataset::feature_dims(const std::string& name) const {
    for (const auto& [key, seq] : features)
        if (key.second == name) return seq.dims();
    throw ValidationError("unknown feature '" + name + "'");
}

bool Dataset::feature_is_variable_rate(const std::string& name) const {
    for (const auto& [key, seq] : features)
        if (key.second == name) return seq.rate.variable;
    throw ValidationError("unknown feature '" + name + "'");
}

void Dataset::validate(double date_lo, double date_hi, int max_score) {
    std::sort(tracks.begin(), tracks.end(),
              [](const TrackRecord& a, const TrackRecord& b) { return a.track_id < b.track_id; });
    for (std::size_t i = 1; i < tracks.size(); ++i)
        if (tracks[i].track_id == tracks[i - 1].track_id)
            throw ValidationError("duplicate track_id: " + tracks[i].track_id);
    for (const auto& t : tracks) {
        if (!(t.chart_entry_date >= date_lo && t.chart_entry_date < date_hi))
            throw ValidationError("chart_entry_date out of range for track " + t.track_id);
    }

    std::map<std::string, std::pair<Index, FrameRate>> layout;
    for (const auto& [key, seq] : features) {
        if (!has_track(key.first)) throw ValidationError("dangling track reference in features: " + key.first);
        if (std::find(feature_names.begin(), feature_names.end(), key.second) == feature_names.end())
            throw ValidationError("undeclared feature: " + key.second);
        if (seq.length() < 1 || seq.dims() < 1)
            throw ValidationError("empty feature sequence: " + key.first + "/" + key.second);
        if (!seq.frames.allFinite())
            throw ValidationError("non-finite value in " + key.first + "/" + key.second);
        auto [it, inserted] = layout.try_emplace(key.second, seq.dims(), seq.rate);
        if (!inserted && it->second.first != seq.dims())
            throw ValidationError("inconsistent dimensionality for feature " + key.second);
        if (!inserted && it->second.second.variable != seq.rate.variable)
            throw ValidationError("inconsistent frame-rate kind for feature " + key.second);
    }
    for (const auto& t : tracks)
        for (const auto& name : feature_names)
            if (!features.count({t.track_id, name}))
                throw ValidationError("track " + t.track_id + " lacks feature " + name);

    for (const auto& r : ratings) {
        if (!has_track(r.track_i) || !has_track(r.track_j))
            throw ValidationError("dangling track reference in rating " + r.track_i + "," + r.track_j);
        if (r.track_i == r.track_j) throw ValidationError("rating pairs a track with itself: " + r.track_i);
        if (r.score < 1 || r.score > max_score)
            throw ValidationError("rating score out of range: " + std::to_string(r.score));
    }
}

Dataset Dataset::subset(const std::vector<std::string>& ids) const {
    Dataset out;
    out.feature_names = feature_names;
    std::set<std::string> keep(ids.begin(), ids.end());
    for (const auto& t : tracks)
        if (keep.count(t.track_id)) out.tracks.push_back(t);
    for (const auto& [key, seq] : features)
        if (keep.count(key.first)) out.features.emplace(key, seq);
    for (const auto& r : ratings)
        if (keep.count(r.track_i) && keep.count(r.track_j)) out.ratings.push_back(r);
    return out;
}

// ---------------------------------------------------------------------------------------------
// Dates

double parse_iso_date(std::string_view text) {
    text = csv::trim(text);
    if (text.size() < 10 || text[4] != '-' || text[7] != '-')
        throw ValidationError("invalid ISO-8601 date '" + std::string(text) + "'");
    const auto y = csv::parse_int(text.substr(0, 4));
    const auto m = csv::parse_int(text.substr(5, 2));
    const auto d = csv::parse_int(text.substr(8, 2));
    if (!y || !m || !d || *m < 1 || *m > 12 || *d < 1 || *d > days_in_month(int(*y), int(*m)))
        throw ValidationError("invalid ISO-8601 date '" + std::string(text) + "'");
    int doy = static_cast<int>(*d);
    for (int month = 1; month < *m; ++month) doy += days_in_month(int(*y), month);
    return double(*y) + double(doy - 1) / 365.25;
}

std::string format_iso_date(double fractional_year) {
    const int year = static_cast<int>(std::floor(fractional_year));
    const int days = is_leap(year) ? 366 : 365;
    int doy = static_cast<int>(std::floor((fractional_year - year) * 365.25 + 1e-9)) + 1;
    doy = std::clamp(doy, 1, days);
    int month = 1;
    while (doy > days_in_month(year, month)) doy -= days_in_month(year, month++);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, doy);
    return buf;
}

// ---------------------------------------------------------------------------------------------
// Loading

Dataset load_dataset(const fs::path& manifest, const LoadOptions& options, LoadReport* report) {
    auto in = open_or_fail(manifest);
    std::map<std::string, fs::path> entries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto body = csv::trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) fail_at(manifest, lineno, "schema violation: expected key=value");
        const std::string key(csv::trim(body.substr(0, eq)));
        const std::string value(csv::trim(body.substr(eq + 1)));
        if (key != "tracks" && key != "features" && key != "ratings")
            fail_at(manifest, lineno, "schema violation: unknown key '" + key + "'");
        fs::path p(value);
        if (p.is_relative()) p = manifest.parent_path() / p;
        entries[key] = p;
    }
    if (!entries.count("tracks")) fail_at(manifest, 0, "schema violation: missing tracks=");
    if (!entries.count("features")) fail_at(manifest, 0, "schema violation: missing features=");

    Dataset ds;
    LoadReport local;

    {  // tracks
        const auto& path = entries["tracks"];
        auto tin = open_or_fail(path);
        expect_header(tin, path, {"track_id", "artist", "title", "chart_entry_date"});
        lineno = 1;
        std::set<std::string> seen;
        while (std::getline(tin, line)) {
            ++lineno;
            if (is_blank(line)) continue;
            const auto f = csv::split(line);
            if (f.size() != 4) fail_at(path, lineno, "schema violation: expected 4 columns");
            TrackRecord t;
            t.track_id = std::string(csv::trim(f[0]));
            t.artist = f[1];
            t.title = f[2];
            if (t.track_id.empty()) fail_at(path, lineno, "schema violation: empty track_id");
            try {
                t.chart_entry_date = parse_iso_date(f[3]);
            } catch (const ValidationError& e) {
                fail_at(path, lineno, e.what());
            }
            if (!(t.chart_entry_date >= options.date_lo && t.chart_entry_date < options.date_hi))
                fail_at(path, lineno, "schema violation: chart_entry_date outside valid range");
            if (!seen.insert(t.track_id).second) fail_at(path, lineno, "duplicate track_id " + t.track_id);
            ds.tracks.push_back(std::move(t));
        }
        local.rows.emplace_back(path.filename().string(), ds.tracks.size());
        std::sort(ds.tracks.begin(), ds.tracks.end(),
                  [](const TrackRecord& a, const TrackRecord& b) { return a.track_id < b.track_id; });
    }

    {  // features
        const auto& path = entries["features"];
        auto fin = open_or_fail(path);
        expect_header(fin, path, {"track_id", "feature_name", "path", "frame_rate_hz", "dims"});
        lineno = 1;
        std::size_t rows = 0;
        std::size_t frames = 0;
        while (std::getline(fin, line)) {
            ++lineno;
            if (is_blank(line)) continue;
            const auto f = csv::split(line);
            if (f.size() != 5) fail_at(path, lineno, "schema violation: expected 5 columns");
            FeatureSequence seq;
            seq.track_id = std::string(csv::trim(f[0]));
            seq.feature_name = std::string(csv::trim(f[1]));
            if (!ds.has_track(seq.track_id))
                fail_at(path, lineno, "dangling track reference '" + seq.track_id + "'");
            const auto rate_field = csv::trim(f[3]);
            if (rate_field == "variable") {
                seq.rate = FrameRate::variable_rate();
            } else {
                const auto hz = csv::parse_double(rate_field);
                if (!hz || !(*hz > 0.0) || !std::isfinite(*hz))
                    fail_at(path, lineno, "schema violation: frame_rate_hz must be positive or 'variable'");
                seq.rate = FrameRate::constant(*hz);
            }
            const auto dims = csv::parse_int(f[4]);
            if (!dims || *dims < 1) fail_at(path, lineno, "schema violation: dims must be a positive integer");
            fs::path seq_path(std::string(csv::trim(f[2])));
            if (seq_path.is_relative()) seq_path = path.parent_path() / seq_path;
            seq.frames = read_sequence(seq_path, static_cast<Index>(*dims));
            frames += static_cast<std::size_t>(seq.frames.rows());
            if (std::find(ds.feature_names.begin(), ds.feature_names.end(), seq.feature_name) ==
                ds.feature_names.end())
                ds.feature_names.push_back(seq.feature_name);
            const auto key = std::make_pair(seq.track_id, seq.feature_name);
            if (!ds.features.emplace(key, std::move(seq)).second)
                fail_at(path, lineno, "duplicate (track_id, feature_name) entry");
            ++rows;
        }
        local.rows.emplace_back(path.filename().string(), rows);
        local.rows.emplace_back("sequence frames", frames);
    }

    if (entries.count("ratings")) {
        const auto& path = entries["ratings"];
        auto rin = open_or_fail(path);
        expect_header(rin, path, {"track_i", "track_j", "score"});
        lineno = 1;
        while (std::getline(rin, line)) {
            ++lineno;
            if (is_blank(line)) continue;
            const auto f = csv::split(line);
            if (f.size() != 3) fail_at(path, lineno, "schema violation: expected 3 columns");
            PairRating r{std::string(csv::trim(f[0])), std::string(csv::trim(f[1])), 0};
            if (!ds.has_track(r.track_i) || !ds.has_track(r.track_j))
                fail_at(path, lineno, "dangling track reference");
            const auto score = csv::parse_int(f[2]);
            if (!score || *score < 1 || *score > options.max_score)
                fail_at(path, lineno, "schema violation: score must be an integer in [1.." +
                                          std::to_string(options.max_score) + "]");
            if (r.track_i == r.track_j) fail_at(path, lineno, "rating pairs a track with itself");
            r.score = static_cast<int>(*score);
            ds.ratings.push_back(std::move(r));
        }
        local.rows.emplace_back(path.filename().string(), ds.ratings.size());
    }

    ds.validate(options.date_lo, options.date_hi, options.max_score);
    if (report) *report = std::move(local);
    return ds;
}

// ---------------------------------------------------------------------------------------------
// Splitting

std::string normalise_key(std::string_view text) {
    text = csv::trim(text);
    std::string out(text);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::pair<std::vector<std::string>, std::vector<std::string>> dedup_split_ids(const Dataset& ds,
                                                                              double train_fraction,
                                                                              std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ValidationError("train_fraction must lie in (0, 1)");
    const std::size_t n = ds.tracks.size();
    if (n < 2) throw ValidationError("dedup_split needs at least two tracks");

    UnionFind uf(n);
    std::unordered_map<std::string, std::size_t> first_artist, first_title;
    for (std::size_t i = 0; i < n; ++i) {
        const auto a = normalise_key(ds.tracks[i].artist);
        const auto t = normalise_key(ds.tracks[i].title);
        if (auto [it, fresh] = first_artist.try_emplace(a, i); !fresh) uf.unite(i, it->second);
        if (auto [it, fresh] = first_title.try_emplace(t, i); !fresh) uf.unite(i, it->second);
    }
    std::map<std::size_t, std::vector<std::size_t>> groups_by_root;
    for (std::size_t i = 0; i < n; ++i) groups_by_root[uf.find(i)].push_back(i);
    std::vector<std::vector<std::size_t>> groups;
    for (auto& [root, members] : groups_by_root) groups.push_back(std::move(members));

    const double train_target = train_fraction * double(n);
    const double test_target = double(n) - train_target;

    std::vector<std::string> train_ids, test_ids;
    if (groups.size() == 1) {
        // a single linked group cannot be divided; it goes wholly to the larger side
        auto& dest = train_fraction >= 0.5 ? train_ids : test_ids;
        for (auto i : groups.front()) dest.push_back(ds.tracks[i].track_id);
        return {train_ids, test_ids};
    }

    std::size_t largest = 0;
    for (const auto& g : groups) largest = std::max(largest, g.size());
    if (double(largest) > std::max(train_target, test_target))
        throw ValidationError("infeasible split: a linked artist/title group holds " + std::to_string(largest) +
                              " of " + std::to_string(n) + " tracks");

    std::mt19937_64 rng(seed);
    std::shuffle(groups.begin(), groups.end(), rng);
    std::stable_sort(groups.begin(), groups.end(),
                     [](const auto& a, const auto& b) { return a.size() > b.size(); });

    double train_count = 0.0, test_count = 0.0;
    for (const auto& g : groups) {
        const bool to_train = (train_target - train_count) >= (test_target - test_count);
        auto& dest = to_train ? train_ids : test_ids;
        (to_train ? train_count : test_count) += double(g.size());
        for (auto i : g) dest.push_back(ds.tracks[i].track_id);
    }
    const double achieved = train_count / double(n);
    if (std::abs(achieved - train_fraction) > 0.05)
        throw ValidationError("infeasible split: achieved train fraction " + std::to_string(achieved) +
                              " is more than 5 points from " + std::to_string(train_fraction));
    std::sort(train_ids.begin(), train_ids.end());
    std::sort(test_ids.begin(), test_ids.end());
    return {train_ids, test_ids};
}

std::pair<Dataset, Dataset> dedup_split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
    const auto [train, test] = dedup_split_ids(ds, train_fraction, seed);
    return {ds.subset(train), ds.subset(test)};
}

std::pair<std::vector<PairRating>, std::vector<PairRating>> split_ratings(const std::vector<PairRating>& ratings,
                                                                          double train_fraction,
                                                                          std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ValidationError("train_fraction must lie in (0, 1)");
    std::vector<std::size_t> order(ratings.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * double(ratings.size())));
    std::vector<char> in_train(ratings.size(), 0);
    for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = 1;
    std::pair<std::vector<PairRating>, std::vector<PairRating>> out;
    for (std::size_t i = 0; i < ratings.size(); ++i) (in_train[i] ? out.first : out.second).push_back(ratings[i]);
    return out;
}

// ---------------------------------------------------------------------------------------------
// Outliers

namespace {

// nearest-rank percentile on m values: order statistic ceil(p * m), 1-based
std::size_t rank_index(double p, std::size_t m) {
    auto idx = static_cast<std::size_t>(std::ceil(p * double(m) - 1e-9));
    return std::clamp<std::size_t>(idx, 1, m) - 1;
}

}  // namespace

Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> flag_outliers(const Matrix& x, const OutlierOptions& opt) {
    const Index rows = x.rows();
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> flags =
        Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(rows, x.cols(), false);
    if (rows < 3) return flags;
    const std::size_t m = static_cast<std::size_t>(rows - 1);
    const std::size_t hi_rank = rank_index(opt.upper_percentile, m);
    const std::size_t lo_rank = rank_index(opt.lower_percentile, m);

    std::vector<std::size_t> order(static_cast<std::size_t>(rows));
    for (Index c = 0; c < x.cols(); ++c) {
        const auto col = x.col(c);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return col(Index(a)) < col(Index(b));
        });
        const double mean = col.mean();
        const double m2 = (col.array() - mean).square().sum();
        const double nn = double(rows);
        // value of the r-th order statistic of the column with sorted position `self` removed
        auto other = [&](std::size_t r, std::size_t self) {
            return col(Index(order[r < self ? r : r + 1]));
        };
        for (std::size_t pos = 0; pos < order.size(); ++pos) {
            const Index r = Index(order[pos]);
            const double v = col(r);
            const double m2_loo = std::max(0.0, m2 - (v - mean) * (v - mean) * nn / (nn - 1.0));
            const double sd = std::sqrt(m2_loo / (nn - 1.0));
            const double hi = other(hi_rank, pos);
            const double lo = other(lo_rank, pos);
            if (v > hi + opt.sigmas * sd) flags(r, c) = true;
            if (!opt.upper_only && v < lo - opt.sigmas * sd) flags(r, c) = true;
        }
    }
    return flags;
}

Matrix impute_outliers(const Matrix& descriptors, const OutlierOptions& opt, OutlierReport* report) {
    const Index rows = descriptors.rows();
    if (opt.k < 1) throw ValidationError("impute_outliers: k must be positive");
    if (opt.k >= rows) throw ValidationError("impute_outliers: k must be smaller than the number of rows");

    Matrix x = descriptors;
    OutlierReport local;
    for (int pass = 0; pass < opt.max_passes; ++pass) {
        const auto flags = flag_outliers(x, opt);
        const auto count = static_cast<std::size_t>(flags.count());
        if (count == 0) break;
        local.flagged += count;
        local.passes = pass + 1;

        // z-score statistics over non-flagged cells
        Vector mu(x.cols()), sd(x.cols());
        for (Index c = 0; c < x.cols(); ++c) {
            double s = 0.0, s2 = 0.0;
            Index n = 0;
            for (Index r = 0; r < rows; ++r)
                if (!flags(r, c)) {
                    s += x(r, c);
                    ++n;
                }
            if (n == 0) throw ValidationError("impute_outliers: column " + std::to_string(c) + " is entirely flagged");
            mu(c) = s / double(n);
            for (Index r = 0; r < rows; ++r)
                if (!flags(r, c)) s2 += (x(r, c) - mu(c)) * (x(r, c) - mu(c));
            sd(c) = std::sqrt(s2 / double(n));
        }

        Matrix next = x;
        std::vector<std::pair<double, Index>> dist;
        for (Index r = 0; r < rows; ++r) {
            if (!flags.row(r).any()) continue;
            for (Index c = 0; c < x.cols(); ++c) {
                if (!flags(r, c)) continue;
                dist.clear();
                for (Index q = 0; q < rows; ++q) {
                    if (q == r || flags(q, c)) continue;
                    double d2 = 0.0;
                    for (Index j = 0; j < x.cols(); ++j) {
                        if (flags(r, j) || flags(q, j) || sd(j) <= 0.0) continue;
                        const double z = (x(r, j) - x(q, j)) / sd(j);
                        d2 += z * z;
                    }
                    dist.emplace_back(d2, q);
                }
                if (dist.empty())
                    throw ValidationError("impute_outliers: no unflagged neighbours for column " + std::to_string(c));
                const auto k = std::min<std::size_t>(static_cast<std::size_t>(opt.k), dist.size());
                std::partial_sort(dist.begin(), dist.begin() + std::ptrdiff_t(k), dist.end());
                double sum = 0.0;
                for (std::size_t i = 0; i < k; ++i) sum += x(dist[i].second, c);
                next(r, c) = sum / double(k);
            }
        }
        x = std::move(next);
    }
    if (report) *report = local;
    return x;
}

}  // namespace seqcomp
