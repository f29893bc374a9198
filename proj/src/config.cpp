#include "seqcomp/config.hpp"

#include "seqcomp/csv.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace seqcomp {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& why) {
    throw ValidationError("config: " + key + "=" + value + ": " + why);
}

double as_double(const std::string& key, const std::string& value) {
    const auto v = csv::parse_double(value);
    if (!v) bad(key, value, "expected a number");
    return *v;
}

long long as_int(const std::string& key, const std::string& value) {
    const auto v = csv::parse_int(value);
    if (!v) bad(key, value, "expected an integer");
    return *v;
}

bool as_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    bad(key, value, "expected true or false");
}

template <typename T, typename Parse>
std::vector<T> as_list(const std::string& value, Parse parse) {
    std::vector<T> out;
    for (const auto& field : csv::split(value)) {
        const auto item = std::string(csv::trim(field));
        if (!item.empty()) out.push_back(parse(item));
    }
    return out;
}

double fraction(const std::string& key, const std::string& value) {
    const double f = as_double(key, value);
    if (!(f > 0.0 && f < 1.0)) bad(key, value, "must lie in (0, 1)");
    return f;
}

int positive(const std::string& key, const std::string& value) {
    const long long v = as_int(key, value);
    if (v < 1 || v > 1'000'000'000) bad(key, value, "must be a positive integer");
    return int(v);
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&, const fs::path&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table{
        {"manifest", [](auto& c, auto&, auto& v, auto& base) { c.manifest = fs::path(v).is_relative() ? base / v : fs::path(v); }},
        {"out", [](auto& c, auto&, auto& v, auto&) { c.out = v; }},
        {"sets", [](auto& c, auto& k, auto& v, auto&) {
             c.sets = as_list<int>(v, [&](const std::string& s) { return positive(k, s); });
         }},
        {"lambdas", [](auto& c, auto& k, auto& v, auto&) {
             c.fcd.lambdas = as_list<int>(v, [&](const std::string& s) {
                 const int l = positive(k, s);
                 if (l < 2 || l > 255) bad(k, v, "lambda must lie in [2, 255]");
                 return l;
             });
             if (c.fcd.lambdas.empty()) bad(k, v, "empty list");
         }},
        {"factors", [](auto& c, auto& k, auto& v, auto&) {
             c.fcd.factors = as_list<int>(v, [&](const std::string& s) { return positive(k, s); });
             if (c.fcd.factors.empty()) bad(k, v, "empty list");
         }},
        {"ppm_order", [](auto& c, auto& k, auto& v, auto&) {
             const long long o = as_int(k, v);
             if (o < 0 || o > 12) bad(k, v, "order must lie in [0, 12]");
             c.fcd.rate.order = int(o);
         }},
        {"compressor", [](auto& c, auto& k, auto& v, auto&) {
             if (v == "ppm") c.fcd.rate.compressor = Compressor::ppm;
             else if (v == "lz78") c.fcd.rate.compressor = Compressor::lz78;
             else bad(k, v, "expected ppm or lz78");
         }},
        {"downsampling", [](auto& c, auto& k, auto& v, auto&) {
             if (v == "mean") c.fcd.rate.downsampling = DownsampleMethod::mean;
             else if (v == "decimate") c.fcd.rate.downsampling = DownsampleMethod::decimate;
             else bad(k, v, "expected mean or decimate");
         }},
        {"binning", [](auto& c, auto& k, auto& v, auto&) {
             if (v == "track") c.fcd.binning = Binning::track;
             else if (v == "corpus") c.fcd.binning = Binning::corpus;
             else bad(k, v, "expected track or corpus");
         }},
        {"kld_log", [](auto& c, auto& k, auto& v, auto&) {
             if (v == "plus1") c.distance.kld_log = KldLog::plus1;
             else if (v == "plain") c.distance.kld_log = KldLog::plain;
             else bad(k, v, "expected plus1 or plain");
         }},
        {"kld_symmetrise", [](auto& c, auto& k, auto& v, auto&) { c.distance.symmetrise = as_bool(k, v); }},
        {"embed_dim", [](auto& c, auto& k, auto& v, auto&) { c.distance.embed_dim = positive(k, v); }},
        {"scale", [](auto& c, auto& k, auto& v, auto&) {
             if (v == "five") c.scale = RatingScale::five;
             else if (v == "four") c.scale = RatingScale::four;
             else bad(k, v, "expected five or four");
         }},
        {"statistic", [](auto& c, auto& k, auto& v, auto&) {
             const Statistic s = parse_statistic(v);
             if (s != Statistic::tau_b && s != Statistic::rho_s && s != Statistic::ba && s != Statistic::mse)
                 bad(k, v, "expected tau_b, rho_s, ba or mse");
             c.statistic = s;
         }},
        {"seed", [](auto& c, auto& k, auto& v, auto&) {
             const long long s = as_int(k, v);
             if (s < 0) bad(k, v, "seed must be non-negative");
             c.seed = std::uint64_t(s);
             c.synth.seed = c.seed;
         }},
        {"rating_train_fraction", [](auto& c, auto& k, auto& v, auto&) { c.rating_train_fraction = fraction(k, v); }},
        {"track_train_fraction", [](auto& c, auto& k, auto& v, auto&) { c.track_train_fraction = fraction(k, v); }},
        {"holdout_fraction", [](auto& c, auto& k, auto& v, auto&) { c.holdout_fraction = fraction(k, v); }},
        {"folds", [](auto& c, auto& k, auto& v, auto&) {
             c.folds = positive(k, v);
             if (c.folds < 2) bad(k, v, "need at least two folds");
         }},
        {"eta_count", [](auto& c, auto& k, auto& v, auto&) { c.eta_count = positive(k, v); }},
        {"eta_ratio", [](auto& c, auto& k, auto& v, auto&) { c.eta_ratio = fraction(k, v); }},
        {"nu", [](auto& c, auto& k, auto& v, auto&) {
             const double nu = as_double(k, v);
             if (!(nu >= 0.0 && nu <= 1.0)) bad(k, v, "must lie in [0, 1]");
             c.nu = nu;
         }},
        {"nu_grid", [](auto& c, auto& k, auto& v, auto&) {
             c.nu_grid = as_list<double>(v, [&](const std::string& s) {
                 const double nu = as_double(k, s);
                 if (!(nu >= 0.0 && nu <= 1.0)) bad(k, v, "values must lie in [0, 1]");
                 return nu;
             });
             if (c.nu_grid.empty()) bad(k, v, "empty list");
         }},
        {"nu_set", [](auto& c, auto& k, auto& v, auto&) { c.nu_set = positive(k, v); }},
        {"max_iterations", [](auto& c, auto& k, auto& v, auto&) { c.max_iterations = positive(k, v); }},
        {"tune_tolerance", [](auto& c, auto& k, auto& v, auto&) { c.tune_tolerance = fraction(k, v); }},
        {"standardise", [](auto& c, auto& k, auto& v, auto&) {
             if (v == "std") c.scale_mode = ScaleMode::std_dev;
             else if (v == "variance") c.scale_mode = ScaleMode::variance;
             else bad(k, v, "expected std or variance");
         }},
        {"bootstrap", [](auto& c, auto& k, auto& v, auto&) {
             c.bootstrap = positive(k, v);
             if (c.bootstrap < 100) bad(k, v, "need at least 100 resamples");
         }},
        {"level", [](auto& c, auto& k, auto& v, auto&) { c.level = fraction(k, v); }},
        {"window_days", [](auto& c, auto& k, auto& v, auto&) {
             c.window_days = as_list<int>(v, [&](const std::string& s) {
                 const long long d = as_int(k, s);
                 if (d < 0) bad(k, v, "window sizes must be non-negative");
                 return int(d);
             });
             if (c.window_days.empty()) bad(k, v, "empty list");
         }},
        {"impute", [](auto& c, auto& k, auto& v, auto&) { c.impute = as_bool(k, v); }},
        {"outlier_k", [](auto& c, auto& k, auto& v, auto&) { c.outliers.k = positive(k, v); }},
        {"outlier_sigmas", [](auto& c, auto& k, auto& v, auto&) {
             c.outliers.sigmas = as_double(k, v);
             if (!(c.outliers.sigmas > 0.0)) bad(k, v, "must be positive");
         }},
        {"outlier_upper_only", [](auto& c, auto& k, auto& v, auto&) { c.outliers.upper_only = as_bool(k, v); }},
        {"clamp_lo", [](auto& c, auto& k, auto& v, auto&) { c.clamp_lo = as_double(k, v); }},
        {"clamp_hi", [](auto& c, auto& k, auto& v, auto&) { c.clamp_hi = as_double(k, v); }},
        {"date_lo", [](auto& c, auto& k, auto& v, auto&) { c.load.date_lo = as_double(k, v); }},
        {"date_hi", [](auto& c, auto& k, auto& v, auto&) { c.load.date_hi = as_double(k, v); }},
        {"synth.tracks", [](auto& c, auto& k, auto& v, auto&) { c.synth.tracks = positive(k, v); }},
        {"synth.frames", [](auto& c, auto& k, auto& v, auto&) { c.synth.frames = positive(k, v); }},
        {"synth.frame_rate", [](auto& c, auto& k, auto& v, auto&) { c.synth.frame_rate = as_double(k, v); }},
        {"synth.correlation", [](auto& c, auto& k, auto& v, auto&) { c.synth.correlation = as_double(k, v); }},
        {"synth.year_drift", [](auto& c, auto& k, auto& v, auto&) { c.synth.year_drift = as_double(k, v); }},
        {"synth.latent_noise", [](auto& c, auto& k, auto& v, auto&) { c.synth.latent_noise = as_double(k, v); }},
        {"synth.feature_noise", [](auto& c, auto& k, auto& v, auto&) { c.synth.feature_noise = as_double(k, v); }},
        {"synth.year_lo", [](auto& c, auto& k, auto& v, auto&) { c.synth.year_lo = as_double(k, v); }},
        {"synth.year_hi", [](auto& c, auto& k, auto& v, auto&) { c.synth.year_hi = as_double(k, v); }},
        {"synth.artists", [](auto& c, auto& k, auto& v, auto&) { c.synth.artists = positive(k, v); }},
        {"synth.duplicate_titles", [](auto& c, auto& k, auto& v, auto&) { c.synth.duplicate_titles = as_double(k, v); }},
        {"synth.ratings", [](auto& c, auto& k, auto& v, auto&) { c.synth.ratings = int(as_int(k, v)); }},
        {"synth.rating_noise", [](auto& c, auto& k, auto& v, auto&) { c.synth.rating_noise = as_double(k, v); }},
        {"synth.variable_rate_features", [](auto& c, auto& k, auto& v, auto&) {
             c.synth.variable_rate_features = int(as_int(k, v));
         }},
    };
    return table;
}

}  // namespace

void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value,
                      const fs::path& base) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw ValidationError("config: unknown key '" + key + "'");
    it->second(config, key, value, base);
    config.echo.emplace_back(key, value);
}

ExperimentConfig parse_config(const std::string& text, const fs::path& base) {
    ExperimentConfig config;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto body = csv::trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos)
            throw ValidationError("config line " + std::to_string(lineno) + ": expected key=value");
        set_config_value(config, std::string(csv::trim(body.substr(0, eq))), std::string(csv::trim(body.substr(eq + 1))),
                         base);
    }
    return config;
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read config " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.parent_path());
}

}  // namespace seqcomp
