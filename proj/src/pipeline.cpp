#include "seqcomp/pipeline.hpp"

#include "seqcomp/csv.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>

namespace seqcomp {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

const StatisticReport& SimilaritySetResult::statistic(Statistic s) const {
    for (const auto& r : statistics)
        if (r.statistic == s) return r;
    throw ValidationError("statistic " + statistic_name(s) + " not reported");
}

const SimilaritySetResult& SimilarityReport::set(int id) const {
    for (const auto& s : sets)
        if (s.set == id) return s;
    throw ValidationError("set " + std::to_string(id) + " not evaluated");
}

const YearSetResult& YearReport::result(int set, int window_days) const {
    for (const auto& r : results)
        if (r.set == set && r.window_days == window_days) return r;
    throw ValidationError("year set " + std::to_string(set) + " with window " + std::to_string(window_days) +
                          " not evaluated");
}

const YearBaseline& YearReport::baseline(int window_days) const {
    for (const auto& b : baselines)
        if (b.window_days == window_days) return b;
    throw ValidationError("no baseline for window " + std::to_string(window_days));
}

namespace {

SolverOptions solver_options(const ExperimentConfig& c) {
    SolverOptions s;
    s.max_iterations = c.max_iterations;
    return s;
}

TuneOptions tune_options(const ExperimentConfig& c, FitKind kind, int classes, std::uint64_t seed) {
    TuneOptions t;
    t.eta_count = c.eta_count;
    t.eta_ratio = c.eta_ratio;
    t.protocol = kind == FitKind::multinomial ? Protocol::holdout : Protocol::kfold;
    t.holdout_fraction = c.holdout_fraction;
    t.folds = c.folds;
    t.statistic = kind == FitKind::multinomial ? c.statistic : Statistic::mse;
    t.classes = classes;
    t.seed = seed;
    t.solver = solver_options(c);
    if (kind == FitKind::multinomial) t.solver.tolerance = c.tune_tolerance;
    return t;
}

Matrix select_columns(const Matrix& x, const std::vector<Index>& cols) {
    Matrix out(x.rows(), Index(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) out.col(Index(j)) = x.col(cols[j]);
    return out;
}

Vector to_vector(const std::vector<int>& v) {
    Vector out(Index(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(Index(i)) = v[i];
    return out;
}

std::vector<std::string> descriptors_behind(const std::vector<std::string>& columns) {
    std::vector<std::string> out;
    for (const auto& c : columns) {
        if (c.rfind("xpred:", 0) == 0) continue;
        const std::string name = c.rfind("kld:", 0) == 0 ? fmd_name(c.substr(4)) : c;
        if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------------------------
// similarity

SimilarityReport run_similarity(const Dataset& ds, const ExperimentConfig& config, int jobs) {
    SimilarityReport report;
    report.scale = config.scale;
    report.classes = config.scale == RatingScale::four ? 4 : 5;
    const int k = report.classes;
    if (ds.ratings.size() < std::size_t(10 * k))
        throw ValidationError("similarity: need at least " + std::to_string(10 * k) + " ratings, found " +
                              std::to_string(ds.ratings.size()));

    std::vector<int> sets = config.sets.empty() ? std::vector<int>{1, 2, 3, 4, 5, 6} : config.sets;
    for (int s : sets)
        if (s < 1 || s > 6) throw ValidationError("similarity: descriptor set must lie in 1..6");
    const int nu_set = config.nu_set ? config.nu_set : 6;
    if (nu_set < 1 || nu_set > 6) throw ValidationError("similarity: nu_set must lie in 1..6");

    // union of columns, in order of first use
    std::vector<std::string> columns;
    auto add_columns = [&](int s) {
        for (auto& c : distance_columns(ds, s, config.fcd))
            if (std::find(columns.begin(), columns.end(), c) == columns.end()) columns.push_back(c);
    };
    for (int s : sets) add_columns(s);
    if (!config.nu) add_columns(nu_set);

    report.catalog = compute_descriptors(ds, config.fcd, jobs);
    for (const auto& [id, issues] : report.catalog.issues)
        for (const auto& i : issues) report.notes.push_back(i);

    // drop ratings whose tracks lack a needed descriptor
    const auto needed = descriptors_behind(columns);
    std::vector<PairRating> usable;
    for (const auto& r : ds.ratings) {
        if (report.catalog.complete(r.track_i, needed) && report.catalog.complete(r.track_j, needed))
            usable.push_back(r);
        else
            report.notes.push_back("rating " + r.track_i + "," + r.track_j + " dropped: incomplete descriptors");
    }
    if (usable.size() < std::size_t(10 * k))
        throw ValidationError("similarity: fewer than " + std::to_string(10 * k) + " usable ratings");

    auto [train, test] = split_ratings(usable, config.rating_train_fraction, config.seed);
    report.train_pairs = train.size();
    report.test_pairs = test.size();

    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto* part : {&train, &test})
        for (const auto& r : *part) pairs.emplace_back(r.track_i, r.track_j);
    report.distances = distance_table(ds, report.catalog, pairs, columns, config.distance, jobs);
    const Index n_train = Index(train.size()), n_test = Index(test.size());

    auto labels_of = [&](const std::vector<PairRating>& rs, RatingScale scale) {
        ScaledLabels l{RatingScale::five, {}};
        for (const auto& r : rs) l.labels.push_back(r.score);
        return scale == RatingScale::four ? merge_four_point(l).labels : l.labels;
    };
    const std::vector<int> y_train = labels_of(train, config.scale), y_test = labels_of(test, config.scale);
    for (int c = 1; c <= k; ++c)
        if (std::find(y_train.begin(), y_train.end(), c) == y_train.end())
            throw ValidationError("similarity: class " + label_name(config.scale, c) + " absent from training ratings");

    auto column_indices = [&](int s) {
        std::vector<Index> idx;
        for (const auto& c : distance_columns(ds, s, config.fcd))
            idx.push_back(Index(std::find(columns.begin(), columns.end(), c) - columns.begin()));
        return idx;
    };
    const Matrix train_all = report.distances.values.topRows(n_train);
    const Matrix test_all = report.distances.values.bottomRows(n_test);

    // nu: tuned once on the five-point scale with Kendall's tau_b
    if (config.nu) {
        report.nu = *config.nu;
    } else {
        const Standardisation st = fit_standardisation(select_columns(train_all, column_indices(nu_set)),
                                                       config.scale_mode);
        const Matrix x = apply_standardisation(select_columns(train_all, column_indices(nu_set)), st);
        TuneOptions t = tune_options(config, FitKind::multinomial, 5, derive_seed(config.seed, 101));
        t.statistic = Statistic::tau_b;
        report.nu_selection = tune_nu(FitKind::multinomial, x, to_vector(labels_of(train, RatingScale::five)),
                                      config.nu_grid, t);
        report.nu = report.nu_selection->nu;
    }

    for (int s : sets) {
        SimilaritySetResult res;
        res.set = s;
        res.columns = distance_columns(ds, s, config.fcd);
        const auto idx = column_indices(s);
        const Matrix raw_train = select_columns(train_all, idx);
        const Standardisation st = fit_standardisation(raw_train, config.scale_mode);
        const Matrix x = apply_standardisation(raw_train, st);

        res.trace = tune(FitKind::multinomial, x, to_vector(y_train), report.nu,
                         tune_options(config, FitKind::multinomial, k, derive_seed(config.seed, 200 + s)));
        for (const auto& n : res.trace.notes) report.notes.push_back("set " + std::to_string(s) + ": " + n);
        res.model = fit_multinomial_enr(x, y_train, k, res.trace.chosen_eta, report.nu, solver_options(config));
        res.model.stats = st;
        res.model.names = res.columns;
        res.magnitudes = normalised_magnitudes(res.model);

        const Matrix raw_test = select_columns(test_all, idx);
        for (Index i = 0; i < n_test; ++i) res.predicted.push_back(predict_rating(res.model, raw_test.row(i).transpose()));
        res.observed = y_test;
        res.confusion = confusion_matrix(res.observed, res.predicted, k);

        const Vector pred = to_vector(res.predicted), obs = to_vector(res.observed);
        int stream = 0;
        for (Statistic stat : {Statistic::tau_b, Statistic::rho_s, Statistic::ba}) {
            StatisticReport sr;
            sr.statistic = stat;
            try {
                sr.result = bootstrap(stat, pred, obs, config.bootstrap, config.level,
                                      derive_seed(config.seed, 1000 + 10 * std::uint64_t(s) + stream), k, jobs);
            } catch (const UndefinedStatistic& e) {
                sr.note = e.what();
                report.notes.push_back("set " + std::to_string(s) + ": " + statistic_name(stat) + ": " + e.what());
            }
            res.statistics.push_back(std::move(sr));
            ++stream;
        }
        report.sets.push_back(std::move(res));
    }
    return report;
}

// ---------------------------------------------------------------------------------------------
// year

namespace {

BootstrapResult boot_or_point(Statistic s, const Vector& pred, const Vector& obs, const ExperimentConfig& c,
                              std::uint64_t stream, int jobs) {
    return bootstrap(s, pred, obs, c.bootstrap, c.level, derive_seed(c.seed, stream), 0, jobs);
}

}  // namespace

YearReport run_year(const Dataset& ds, const ExperimentConfig& config, int jobs) {
    YearReport report;
    std::vector<int> sets = config.sets.empty() ? std::vector<int>{1, 2, 3} : config.sets;
    for (int s : sets)
        if (s < 1 || s > 3) throw ValidationError("year: descriptor set must lie in 1..3");
    const int nu_set = config.nu_set ? config.nu_set : 3;
    if (nu_set < 1 || nu_set > 3) throw ValidationError("year: nu_set must lie in 1..3");
    if (ds.tracks.size() < 20) throw ValidationError("year: need at least 20 tracks");

    report.catalog = compute_descriptors(ds, config.fcd, jobs);
    for (const auto& [id, issues] : report.catalog.issues)
        for (const auto& i : issues) report.notes.push_back(i);
    const auto fmd = report.catalog.fmd_names(), fcd = report.catalog.fcd_names();
    std::vector<std::string> all = fmd;
    all.insert(all.end(), fcd.begin(), fcd.end());

    auto [train_ids, test_ids] = dedup_split_ids(ds, config.track_train_fraction, config.seed);
    auto keep_complete = [&](std::vector<std::string>& ids) {
        std::vector<std::string> out;
        for (auto& id : ids) {
            if (report.catalog.complete(id, all))
                out.push_back(id);
            else
                report.notes.push_back("track " + id + " excluded: incomplete descriptors");
        }
        ids = std::move(out);
    };
    keep_complete(train_ids);
    keep_complete(test_ids);
    if (train_ids.size() < std::size_t(2 * config.folds) || test_ids.empty())
        throw ValidationError("year: too few usable tracks after the split");
    report.train_ids = train_ids;
    report.test_ids = test_ids;

    std::vector<std::string> column_names;
    Matrix x_train = report.catalog.matrix(train_ids, all, &column_names);
    const Matrix x_test = report.catalog.matrix(test_ids, all);
    if (config.impute) {
        OutlierOptions o = config.outliers;
        o.k = std::min<int>(o.k, int(x_train.rows()) - 1);
        x_train = impute_outliers(x_train, o, &report.outliers);
    }
    Index n_fmd = 0;
    for (const auto& c : column_names)
        if (c.rfind("fmd:", 0) == 0) ++n_fmd;

    auto set_columns = [&](int s) {
        std::vector<Index> idx;
        const Index lo = s == 2 ? n_fmd : 0, hi = s == 1 ? n_fmd : Index(column_names.size());
        for (Index j = lo; j < hi; ++j) idx.push_back(j);
        return idx;
    };
    auto dates_of = [&](const std::vector<std::string>& ids) {
        std::vector<double> d;
        for (const auto& id : ids) d.push_back(ds.track(id).chart_entry_date);
        return d;
    };
    const std::vector<double> train_dates = dates_of(train_ids), test_dates = dates_of(test_ids);
    const Vector y_train = Eigen::Map<const Vector>(train_dates.data(), Index(train_dates.size()));
    const Vector y_test = Eigen::Map<const Vector>(test_dates.data(), Index(test_dates.size()));

    if (config.nu) {
        report.nu = *config.nu;
    } else {
        const Matrix raw = select_columns(x_train, set_columns(nu_set));
        const Matrix x = apply_standardisation(raw, fit_standardisation(raw, config.scale_mode));
        report.nu_selection =
            tune_nu(FitKind::linear, x, y_train, config.nu_grid, tune_options(config, FitKind::linear, 0, derive_seed(config.seed, 101)));
        report.nu = report.nu_selection->nu;
    }

    for (int window : config.window_days) {
        Matrix wx_train = x_train, wx_test = x_test;
        Vector wy_train = y_train, wy_test = y_test;
        if (window > 0) {
            const auto gtr = window_group(x_train, train_dates, window);
            const auto gte = window_group(x_test, test_dates, window);
            wx_train = gtr.rows;
            wy_train = gtr.centres;
            wx_test = gte.rows;
            wy_test = gte.centres;
            if (wx_train.rows() < 2 * config.folds)
                throw ValidationError("year: window of " + std::to_string(window) + " days leaves too few training rows");
        }

        YearBaseline base;
        base.window_days = window;
        base.prediction = std::clamp(wy_train.mean(), config.clamp_lo, config.clamp_hi);
        const Vector constant = Vector::Constant(wy_test.size(), base.prediction);
        base.mae = boot_or_point(Statistic::mae, constant, wy_test, config, 3000 + std::uint64_t(window) * 8, jobs);
        base.rmse = boot_or_point(Statistic::rmse, constant, wy_test, config, 3001 + std::uint64_t(window) * 8, jobs);
        report.baselines.push_back(base);

        for (int s : sets) {
            YearSetResult res;
            res.set = s;
            res.window_days = window;
            const auto idx = set_columns(s);
            for (Index j : idx) res.columns.push_back(column_names[std::size_t(j)]);
            const Matrix raw = select_columns(wx_train, idx);
            const Standardisation st = fit_standardisation(raw, config.scale_mode);
            const Matrix x = apply_standardisation(raw, st);
            res.trace = tune(FitKind::linear, x, wy_train, report.nu,
                             tune_options(config, FitKind::linear, 0, derive_seed(config.seed, 200 + s)));
            for (const auto& n : res.trace.notes) report.notes.push_back("set " + std::to_string(s) + ": " + n);
            res.model = fit_linear_enr(x, wy_train, res.trace.chosen_eta, report.nu, solver_options(config));
            res.model.stats = st;
            res.model.names = res.columns;
            res.model.clamp_lo = config.clamp_lo;
            res.model.clamp_hi = config.clamp_hi;
            res.magnitudes = normalised_magnitudes(res.model);

            const Matrix raw_test = select_columns(wx_test, idx);
            res.predicted.resize(raw_test.rows());
            for (Index i = 0; i < raw_test.rows(); ++i) res.predicted(i) = predict_year(res.model, raw_test.row(i).transpose());
            res.observed = wy_test;
            const std::uint64_t stream = 4000 + std::uint64_t(window) * 8 + std::uint64_t(s) * 2;
            res.mae = boot_or_point(Statistic::mae, res.predicted, res.observed, config, stream, jobs);
            res.rmse = boot_or_point(Statistic::rmse, res.predicted, res.observed, config, stream + 1, jobs);
            report.results.push_back(std::move(res));
        }
    }
    return report;
}

// ---------------------------------------------------------------------------------------------
// outputs

namespace {

ordered_json to_json(const Vector& v) {
    ordered_json a = ordered_json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

ordered_json to_json(const Matrix& m) {
    ordered_json a = ordered_json::array();
    for (Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Vector(m.row(i).transpose())));
    return a;
}

ordered_json nullable(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json to_json(const BootstrapResult& b) {
    return {{"statistic", statistic_name(b.statistic)},
            {"value", b.value},
            {"se", b.se},
            {"ci", {{"level", b.level}, {"lo", b.lo}, {"hi", b.hi}}},
            {"B", b.resamples},
            {"seed", b.seed},
            {"redraws", b.redraws}};
}

ordered_json to_json(const Standardisation& s) {
    ordered_json constant = ordered_json::array();
    for (bool c : s.constant) constant.push_back(c);
    return {{"mode", s.mode == ScaleMode::std_dev ? "std" : "variance"},
            {"mean", to_json(s.mean)},
            {"scale", to_json(s.scale)},
            {"constant", constant}};
}

ordered_json to_json(const TuneTrace& t) {
    ordered_json scores = ordered_json::array();
    for (double s : t.scores) scores.push_back(nullable(s));
    return {{"nu", t.nu},
            {"eta", t.etas},
            {"score", scores},
            {"objective", t.maximise ? "maximise" : "minimise"},
            {"chosen_eta", t.chosen_eta},
            {"chosen_index", t.chosen_index},
            {"notes", t.notes}};
}

ordered_json nu_json(double nu, const std::optional<NuSelection>& sel) {
    ordered_json j{{"value", nu}, {"tuned", bool(sel)}};
    if (sel) {
        ordered_json per = ordered_json::array();
        for (const auto& t : sel->traces)
            per.push_back({{"nu", t.nu}, {"best_score", nullable(t.scores[t.chosen_index])}, {"chosen_eta", t.chosen_eta}});
        j["candidates"] = per;
    }
    return j;
}

ordered_json config_echo(const ExperimentConfig& c) {
    ordered_json j = ordered_json::object();
    for (const auto& [k, v] : c.echo) j[k] = v;
    return j;
}

ordered_json coefficient_table(const std::vector<std::string>& names, const Vector& magnitudes) {
    ordered_json a = ordered_json::array();
    for (std::size_t i = 0; i < names.size(); ++i) a.push_back({{"name", names[i]}, {"magnitude", magnitudes(Index(i))}});
    return a;
}

fs::path write_json(const fs::path& dir, const std::string& name, const ordered_json& j) {
    fs::create_directories(dir);
    const fs::path path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << j.dump(2) << '\n';
    return path;
}

fs::path write_descriptors_file(const DescriptorCatalog& catalog, const fs::path& dir) {
    fs::create_directories(dir);
    const fs::path path = dir / "descriptors.csv";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    write_descriptors_csv(catalog, out);
    return path;
}

ordered_json issues_json(const DescriptorCatalog& catalog) {
    ordered_json j = ordered_json::object();
    for (const auto& [id, issues] : catalog.issues) j[id] = issues;
    return j;
}

}  // namespace

std::vector<fs::path> write_descriptor_outputs(const DescriptorCatalog& catalog, const Dataset& ds,
                                               const ExperimentConfig& config, const fs::path& dir) {
    std::vector<fs::path> out{write_descriptors_file(catalog, dir)};
    std::size_t fcd_scalars = 0, fmd_scalars = 0;
    for (std::size_t i = 0; i < catalog.names.size(); ++i)
        (catalog.names[i].rfind("fcd:", 0) == 0 ? fcd_scalars : fmd_scalars) += catalog.component_labels[i].size();
    ordered_json report{{"command", "descriptors"},
                        {"config", config_echo(config)},
                        {"tracks", ds.tracks.size()},
                        {"features", ds.feature_names},
                        {"fcd_scalars_per_track", fcd_scalars},
                        {"fmd_scalars_per_track", fmd_scalars},
                        {"issues", issues_json(catalog)}};
    out.push_back(write_json(dir, "report.json", report));
    return out;
}

std::vector<fs::path> write_similarity_outputs(const SimilarityReport& r, const ExperimentConfig& config,
                                               const fs::path& dir) {
    std::vector<fs::path> out{write_descriptors_file(r.catalog, dir)};
    {
        fs::create_directories(dir);
        const fs::path path = dir / "distances.csv";
        std::ofstream f(path, std::ios::binary);
        if (!f) throw ValidationError("cannot write " + path.string());
        write_distances_csv(r.distances, f);
        out.push_back(path);
    }
    ordered_json models = ordered_json::array(), metrics = ordered_json::array(), sets = ordered_json::array();
    ordered_json labels = ordered_json::array();
    for (int c = 1; c <= r.classes; ++c) labels.push_back(label_name(r.scale, c));
    for (const auto& s : r.sets) {
        models.push_back({{"set", s.set},
                          {"classes", labels},
                          {"names", s.columns},
                          {"beta", to_json(s.model.beta)},
                          {"gamma", to_json(s.model.gamma)},
                          {"eta", s.model.eta},
                          {"nu", s.model.nu},
                          {"iterations", s.model.iterations},
                          {"residual", s.model.residual},
                          {"standardisation", to_json(*s.model.stats)},
                          {"tuning", to_json(s.trace)},
                          {"seed", config.seed}});
        ordered_json stats = ordered_json::object();
        for (const auto& st : s.statistics) {
            ordered_json entry = st.result ? to_json(*st.result) : ordered_json{{"statistic", statistic_name(st.statistic)},
                                                                               {"value", nullptr},
                                                                               {"note", st.note}};
            metrics.push_back({{"set", s.set}, {"metric", entry}});
            stats[statistic_name(st.statistic)] = entry;
        }
        sets.push_back({{"set", s.set},
                        {"statistics", stats},
                        {"confusion", {{"rows", "annotated"}, {"columns", "predicted"}, {"labels", labels},
                                       {"counts", to_json(s.confusion)}}},
                        {"coefficients", coefficient_table(s.columns, s.magnitudes)}});
    }
    out.push_back(write_json(dir, "model.json", {{"task", "similarity"}, {"seed", config.seed}, {"models", models}}));
    out.push_back(write_json(dir, "metrics.json", {{"task", "similarity"}, {"metrics", metrics}}));
    ordered_json report{{"command", "similarity"},
                        {"config", config_echo(config)},
                        {"scale", r.scale == RatingScale::five ? "five" : "four"},
                        {"train_pairs", r.train_pairs},
                        {"test_pairs", r.test_pairs},
                        {"nu", nu_json(r.nu, r.nu_selection)},
                        {"sets", sets},
                        {"notes", r.notes}};
    out.push_back(write_json(dir, "report.json", report));
    return out;
}

std::vector<fs::path> write_year_outputs(const YearReport& r, const ExperimentConfig& config, const fs::path& dir) {
    std::vector<fs::path> out{write_descriptors_file(r.catalog, dir)};
    ordered_json models = ordered_json::array(), metrics = ordered_json::array(), results = ordered_json::array();
    for (const auto& b : r.baselines) {
        metrics.push_back({{"set", "mean"}, {"window_days", b.window_days}, {"metric", to_json(b.mae)}});
        metrics.push_back({{"set", "mean"}, {"window_days", b.window_days}, {"metric", to_json(b.rmse)}});
    }
    for (const auto& s : r.results) {
        const auto [raw_theta, raw_alpha] = s.model.raw_coefficients();
        models.push_back({{"set", s.set},
                          {"window_days", s.window_days},
                          {"names", s.columns},
                          {"theta", to_json(s.model.theta)},
                          {"alpha", s.model.alpha},
                          {"raw_theta", to_json(raw_theta)},
                          {"raw_alpha", raw_alpha},
                          {"eta", s.model.eta},
                          {"nu", s.model.nu},
                          {"iterations", s.model.iterations},
                          {"residual", s.model.residual},
                          {"clamp", {s.model.clamp_lo, s.model.clamp_hi}},
                          {"standardisation", to_json(*s.model.stats)},
                          {"tuning", to_json(s.trace)},
                          {"seed", config.seed}});
        metrics.push_back({{"set", s.set}, {"window_days", s.window_days}, {"metric", to_json(s.mae)}});
        metrics.push_back({{"set", s.set}, {"window_days", s.window_days}, {"metric", to_json(s.rmse)}});
        results.push_back({{"set", s.set},
                           {"window_days", s.window_days},
                           {"test_rows", s.observed.size()},
                           {"mae", to_json(s.mae)},
                           {"rmse", to_json(s.rmse)},
                           {"coefficients", coefficient_table(s.columns, s.magnitudes)}});
    }
    ordered_json baselines = ordered_json::array();
    for (const auto& b : r.baselines)
        baselines.push_back({{"window_days", b.window_days}, {"prediction", b.prediction}, {"mae", to_json(b.mae)},
                             {"rmse", to_json(b.rmse)}});
    out.push_back(write_json(dir, "model.json", {{"task", "year"}, {"seed", config.seed}, {"models", models}}));
    out.push_back(write_json(dir, "metrics.json", {{"task", "year"}, {"metrics", metrics}}));
    ordered_json report{{"command", "year"},
                        {"config", config_echo(config)},
                        {"train_tracks", r.train_ids.size()},
                        {"test_tracks", r.test_ids.size()},
                        {"outliers", {{"flagged", r.outliers.flagged}, {"passes", r.outliers.passes}}},
                        {"nu", nu_json(r.nu, r.nu_selection)},
                        {"baseline", baselines},
                        {"results", results},
                        {"notes", r.notes}};
    out.push_back(write_json(dir, "report.json", report));
    return out;
}

}  // namespace seqcomp
