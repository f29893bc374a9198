// seqcomp command-line front end: synth | descriptors | similarity | year.

#include "seqcomp/pipeline.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>

namespace {

using namespace seqcomp;

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool config_required) {
    auto* opt = cmd->add_option("--config", c.config, "key=value configuration file");
    if (config_required) opt->required();
    cmd->add_option("--seed", c.seed, "seed overriding the configuration");
    cmd->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--out", c.out, "output directory overriding the configuration");
}

ExperimentConfig resolve(const Common& c) {
    ExperimentConfig config = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
    if (c.seed) set_config_value(config, "seed", std::to_string(*c.seed));
    if (!c.out.empty()) config.out = c.out;
    return config;
}

Dataset load(const ExperimentConfig& config) {
    if (config.manifest.empty()) throw ValidationError("config: manifest is required");
    LoadReport rep;
    Dataset ds = load_dataset(config.manifest, config.load, &rep);
    for (const auto& [file, rows] : rep.rows) std::cerr << "read " << file << ": " << rows << " rows\n";
    return ds;
}

void list(const std::vector<std::filesystem::path>& files) {
    for (const auto& f : files) std::cerr << "wrote " << f.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compression-based descriptors of feature sequences for similarity and year prediction"};
    app.require_subcommand(1);
    Common synth_opts, desc_opts, sim_opts, year_opts;
    auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
    auto* desc = app.add_subcommand("descriptors", "compute FCDs and FMDs for every track");
    auto* sim = app.add_subcommand("similarity", "similarity rating prediction experiment");
    auto* year = app.add_subcommand("year", "song year prediction experiment");
    add_common(synth, synth_opts, false);
    add_common(desc, desc_opts, true);
    add_common(sim, sim_opts, true);
    add_common(year, year_opts, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    const auto start = std::chrono::steady_clock::now();
    try {
        if (synth->parsed()) {
            const auto config = resolve(synth_opts);
            const Dataset ds = generate_corpus(config.synth, nullptr, synth_opts.jobs);
            write_corpus(ds, config.out);
            std::cerr << "wrote " << ds.tracks.size() << " tracks to " << config.out.string() << '\n';
        } else if (desc->parsed()) {
            const auto config = resolve(desc_opts);
            const Dataset ds = load(config);
            const auto catalog = compute_descriptors(ds, config.fcd, desc_opts.jobs);
            for (const auto& [id, issues] : catalog.issues)
                for (const auto& i : issues) std::cerr << "warning: " << i << '\n';
            list(write_descriptor_outputs(catalog, ds, config, config.out));
        } else if (sim->parsed()) {
            const auto config = resolve(sim_opts);
            const Dataset ds = load(config);
            const auto report = run_similarity(ds, config, sim_opts.jobs);
            list(write_similarity_outputs(report, config, config.out));
        } else if (year->parsed()) {
            const auto config = resolve(year_opts);
            const Dataset ds = load(config);
            const auto report = run_year(ds, config, year_opts.jobs);
            list(write_year_outputs(report, config, config.out));
        }
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence failure: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cerr << "runtime " << seconds << " s\n";
    return 0;
}
