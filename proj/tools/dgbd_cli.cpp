// dgbd: batch front end for rank-size fitting, goodness-of-fit testing,
// split-merge simulation, truncation sweeps and (b, a) clustering.
//
// Exit status: 0 success, 1 usage error, 2 data error.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dgbd/dgbd.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct Options {
    std::string input;
    std::string custom_input;
    std::string output = ".";
    dgbd::Seed seed = 1;
    std::size_t replicates = 1000;
    bool no_refit = false;
    unsigned threads = 0;

    double merge_fraction = 0.03;
    std::size_t iterations = 1000;
    std::size_t n0 = 10000;
    std::string initial = "pareto";
    double shape = 1.0;
    double scale = 1.0;
    double mu = 0.0;
    double sigma = 1.0;
    std::size_t fit_stride = 1;
    std::size_t pvalue_replicates = 0;

    std::size_t k_min = 10;
    std::size_t k_max = 0;  // 0 = sample size
    bool cutoff_pvalues = false;

    std::optional<double> cut_height;
    std::optional<double> bin_width;
};

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// key=value lines, sorted by key; `timestamp` is the only field that varies
// between identical runs.
void write_metadata(const Options& o, const std::string& sub, std::map<std::string, std::string> extra = {}) {
    std::map<std::string, std::string> kv = std::move(extra);
    kv["version"] = dgbd::kVersion;
    kv["subcommand"] = sub;
    kv["input"] = o.input;
    kv["output"] = o.output;
    kv["seed"] = std::to_string(o.seed);
    kv["timestamp"] = utc_timestamp();
    std::string text;
    for (const auto& [k, v] : kv) text += k + "=" + v + "\n";
    dgbd::write_file_atomic(fs::path(o.output) / "metadata.txt", text);
}

std::string opt_str(const std::optional<double>& v) { return v ? dgbd::fmt6(*v) : "default"; }

dgbd::DatasetRecord load_single(const Options& o) {
    std::vector<std::string> warnings;
    auto rec = dgbd::load_dataset(o.input, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    return rec;
}

int cmd_fit(const Options& o) {
    const auto rec = load_single(o);
    const auto sample = rec.sample();
    const auto fit = dgbd::fit_dgbd(sample);
    const auto pl = dgbd::fit_powerlaw(sample);
    std::cout << "id " << rec.id << '\n'
              << "n " << fit.n << '\n'
              << "b " << dgbd::fmt6(fit.params.b) << '\n'
              << "a " << dgbd::fmt6(fit.params.a) << '\n'
              << "C " << dgbd::fmt6(fit.params.scale) << '\n'
              << "r_squared " << dgbd::fmt6(fit.r_squared) << '\n'
              << "rss " << dgbd::fmt6(fit.rss) << '\n'
              << "powerlaw_exponent " << dgbd::fmt6(pl.exponent) << '\n'
              << "powerlaw_C " << dgbd::fmt6(pl.scale) << '\n'
              << "powerlaw_r_squared " << dgbd::fmt6(pl.r_squared) << '\n';
    if (!fit.is_monotone()) std::cout << "note non-monotone fit (a < 0 or b < 0)\n";
    std::vector<double> ranked(sample.values().begin(), sample.values().end());
    dgbd::write_file_atomic(fs::path(o.output) / (rec.id + "_ranksize.csv"), dgbd::ranksize_csv(ranked, fit.params));
    write_metadata(o, "fit");
    return 0;
}

int cmd_test(const Options& o) {
    const auto rec = load_single(o);
    const auto sample = rec.sample();
    const auto fit = dgbd::fit_dgbd(sample);
    dgbd::BootstrapOptions bo;
    bo.replicates = o.replicates;
    bo.seed = o.seed;
    bo.refit = !o.no_refit;
    bo.threads = o.threads;
    const auto gof = dgbd::bootstrap_pvalue(sample, fit, bo);
    std::cout << "id " << rec.id << '\n'
              << "ks_statistic " << dgbd::fmt6(gof.ks_statistic) << '\n'
              << "p_value " << dgbd::fmt6(gof.p_value) << '\n'
              << "replicates " << gof.replicates << '\n'
              << "seed " << gof.seed << '\n';
    write_metadata(o, "test", {{"replicates", std::to_string(o.replicates)},
                               {"refit", o.no_refit ? "false" : "true"}});
    return 0;
}

int cmd_compare(const Options& o) {
    const auto rec = load_single(o);
    const auto cmp = dgbd::compare_models(rec.sample());
    std::cout << "id " << rec.id << '\n'
              << "aic_dgbd " << dgbd::fmt6(cmp.aic_dgbd) << '\n'
              << "aic_powerlaw " << dgbd::fmt6(cmp.aic_powerlaw) << '\n'
              << "aic_diff " << dgbd::fmt6(cmp.log_aic_diff) << (cmp.log_diff_defined ? "" : " (raw difference)")
              << '\n'
              << "winner " << dgbd::to_string(cmp.winner) << '\n';
    write_metadata(o, "compare");
    return 0;
}

int cmd_pipeline(const Options& o) {
    std::vector<std::string> warnings;
    const auto records = dgbd::load_datasets(o.input, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    dgbd::PipelineConfig cfg;
    cfg.replicates = o.replicates;
    cfg.seed = o.seed;
    cfg.refit_replicates = !o.no_refit;
    cfg.threads = o.threads;
    const auto results = dgbd::run_pipeline(records, cfg);
    dgbd::ReportOptions ro;
    ro.out_dir = o.output;
    ro.bin_width = o.bin_width;
    ro.cut_height = o.cut_height;
    dgbd::emit_report(results, ro);

    std::size_t good = 0, pl = 0, neither = 0, excluded = 0;
    for (const auto& r : results) {
        if (r.status != dgbd::RecordStatus::Analyzed) {
            ++excluded;
            if (r.status == dgbd::RecordStatus::Failed) std::cerr << "error: " << r.id << ": " << r.reason << '\n';
            continue;
        }
        switch (r.classification) {
            case dgbd::Classification::DgbdGood: ++good; break;
            case dgbd::Classification::PowerLawGood: ++pl; break;
            case dgbd::Classification::Neither: ++neither; break;
        }
    }
    std::cout << "datasets " << results.size() << '\n'
              << "DGBD-good " << good << '\n'
              << "PowerLaw-good " << pl << '\n'
              << "Neither " << neither << '\n'
              << "excluded " << excluded << '\n';
    write_metadata(o, "pipeline", {{"replicates", std::to_string(o.replicates)},
                                   {"refit", o.no_refit ? "false" : "true"},
                                   {"bin_width", opt_str(o.bin_width)},
                                   {"cut_height", opt_str(o.cut_height)}});
    return 0;
}

int cmd_simulate(const Options& o) {
    dgbd::SplitMergeConfig cfg;
    if (o.initial == "pareto") {
        cfg.initial = dgbd::ParetoInit{o.shape, o.scale};
    } else if (o.initial == "lognormal") {
        cfg.initial = dgbd::LognormalInit{o.mu, o.sigma};
    } else {
        if (o.custom_input.empty()) throw dgbd::ConfigError("--initial custom requires --custom-input");
        std::vector<std::string> warnings;
        const auto rec = dgbd::load_dataset(o.custom_input, &warnings);
        for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
        dgbd::CustomInit custom;
        for (const auto& u : rec.rows) custom.sizes.push_back(static_cast<double>(u.population));
        cfg.initial = std::move(custom);
    }
    cfg.n0 = o.n0;
    cfg.iterations = o.iterations;
    cfg.merge_fraction = o.merge_fraction;
    cfg.seed = o.seed;
    cfg.fit_stride = o.fit_stride;
    const auto state = dgbd::run_simulation(cfg);

    std::string traj = "iteration,n,b,a,r_squared,total_mass\n";
    for (const auto& p : state.trajectory)
        traj += std::to_string(p.iteration) + "," + std::to_string(p.n) + "," + dgbd::fmt6(p.b) + "," +
                dgbd::fmt6(p.a) + "," + dgbd::fmt6(p.r_squared) + "," + dgbd::fmt6(p.total_mass) + "\n";
    const fs::path out(o.output);
    dgbd::write_file_atomic(out / "trajectory.csv", traj);
    std::string final_sizes = "rank,size\n";
    for (std::size_t i = 0; i < state.sizes.size(); ++i)
        final_sizes += std::to_string(i + 1) + "," + dgbd::fmt6(state.sizes[i]) + "\n";
    dgbd::write_file_atomic(out / "final_sizes.csv", final_sizes);

    const auto& last = state.trajectory.back();
    std::cout << "iterations " << state.iteration << '\n'
              << "n " << last.n << '\n'
              << "b " << dgbd::fmt6(last.b) << '\n'
              << "a " << dgbd::fmt6(last.a) << '\n'
              << "r_squared " << dgbd::fmt6(last.r_squared) << '\n';
    if (o.pvalue_replicates > 0) {
        const dgbd::RankSizeSample sample(state.sizes);
        const auto fit = dgbd::fit_dgbd(sample);
        if (fit.is_monotone()) {
            dgbd::BootstrapOptions bo;
            bo.replicates = o.pvalue_replicates;
            bo.seed = dgbd::derive_seed(o.seed, 1);
            bo.refit = !o.no_refit;
            bo.threads = o.threads;
            std::cout << "p_value " << dgbd::fmt6(dgbd::bootstrap_pvalue(sample, fit, bo).p_value) << '\n';
        } else {
            std::cout << "p_value NA (non-monotone fit)\n";
        }
    }
    write_metadata(o, "simulate", {{"initial", o.initial},
                                   {"custom_input", o.custom_input},
                                   {"shape", dgbd::fmt6(o.shape)},
                                   {"scale", dgbd::fmt6(o.scale)},
                                   {"mu", dgbd::fmt6(o.mu)},
                                   {"sigma", dgbd::fmt6(o.sigma)},
                                   {"n0", std::to_string(o.n0)},
                                   {"iterations", std::to_string(o.iterations)},
                                   {"merge_fraction", dgbd::fmt6(o.merge_fraction)},
                                   {"fit_stride", std::to_string(o.fit_stride)},
                                   {"pvalue_replicates", std::to_string(o.pvalue_replicates)}});
    return 0;
}

int cmd_cutoff(const Options& o) {
    const auto rec = load_single(o);
    const auto sample = rec.sample();
    const std::size_t k_max = o.k_max ? o.k_max : sample.size();
    dgbd::CutoffOptions co;
    co.bootstrap = o.cutoff_pvalues;
    co.bootstrap_options.replicates = o.replicates;
    co.bootstrap_options.seed = o.seed;
    co.bootstrap_options.refit = !o.no_refit;
    co.bootstrap_options.threads = o.threads;
    const auto sweep = dgbd::cutoff_sweep(sample, o.k_min, k_max, co);

    std::string csv = "k,exponent,aic_dgbd,aic_powerlaw,winner";
    csv += o.cutoff_pvalues ? ",p_value\n" : "\n";
    for (const auto& r : sweep.rows) {
        csv += std::to_string(r.k) + "," + dgbd::fmt6(r.powerlaw_exponent) + "," + dgbd::fmt6(r.aic_dgbd) + "," +
               dgbd::fmt6(r.aic_powerlaw) + "," + dgbd::to_string(r.aic_winner);
        if (o.cutoff_pvalues) csv += "," + (r.p_value ? dgbd::fmt6(*r.p_value) : std::string("NA"));
        csv += "\n";
    }
    dgbd::write_file_atomic(fs::path(o.output) / "cutoff.csv", csv);
    std::cout << "rows " << sweep.rows.size() << '\n'
              << "exponent_range " << dgbd::fmt6(sweep.exponent_range()) << '\n';
    write_metadata(o, "cutoff", {{"k_min", std::to_string(o.k_min)},
                                 {"k_max", std::to_string(k_max)},
                                 {"pvalues", o.cutoff_pvalues ? "true" : "false"},
                                 {"replicates", std::to_string(o.replicates)}});
    return 0;
}

int cmd_cluster(const Options& o) {
    const auto loaded = dgbd::load_points(o.input);
    std::vector<dgbd::ParamPoint> points;
    for (const auto& p : loaded) points.push_back({p.label, p.b, p.a});
    const auto tree = dgbd::complete_linkage(points);
    const double cut = o.cut_height.value_or(dgbd::default_cut_height(tree));
    const auto partition = cut > 0.0 ? dgbd::cut_tree(tree, cut) : dgbd::normalize({tree.leaves()});

    const fs::path out(o.output);
    dgbd::write_file_atomic(out / "dendrogram.csv", dgbd::dendrogram_csv(tree));
    dgbd::write_file_atomic(out / "clusters.csv", dgbd::clusters_csv(partition));
    std::string dist = "label,b,a,d_zipf,d_uniform,d_delta,d_lavalette\n";
    for (const auto& p : points) {
        dist += dgbd::csv_field(p.label) + "," + dgbd::fmt6(p.b) + "," + dgbd::fmt6(p.a);
        for (auto ref : dgbd::kReferences) dist += "," + dgbd::fmt6(dgbd::distance_to(p, ref));
        dist += "\n";
    }
    dgbd::write_file_atomic(out / "distances.csv", dist);
    std::cout << "points " << points.size() << '\n'
              << "cut_height " << dgbd::fmt6(cut) << '\n'
              << "clusters " << partition.size() << '\n';
    write_metadata(o, "cluster", {{"cut_height", dgbd::fmt6(cut)}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rank-size analysis with the DGBD function"};
    app.set_version_flag("--version", std::string(dgbd::kVersion));
    app.require_subcommand(1);
    Options o;

    auto add_io = [&](CLI::App* sub, const std::string& input_help) {
        sub->add_option("--input", o.input, input_help)->required();
        sub->add_option("--output", o.output, "Output directory")->capture_default_str();
    };
    auto add_bootstrap = [&](CLI::App* sub) {
        sub->add_option("--replicates", o.replicates, "Bootstrap replicates")->capture_default_str();
        sub->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
        sub->add_flag("--no-refit", o.no_refit, "Score replicates against the original fit instead of refitting");
        sub->add_option("--threads", o.threads, "Worker threads (0 = all cores)")->capture_default_str();
    };

    auto* fit = app.add_subcommand("fit", "Fit DGBD and power law to one dataset");
    add_io(fit, "Dataset file (unit,population)");

    auto* test = app.add_subcommand("test", "Bootstrap KS p-value of the DGBD fit");
    add_io(test, "Dataset file (unit,population)");
    add_bootstrap(test);

    auto* compare = app.add_subcommand("compare", "AIC comparison of DGBD and power law");
    add_io(compare, "Dataset file (unit,population)");

    auto* pipeline = app.add_subcommand("pipeline", "Full analysis over a corpus");
    add_io(pipeline, "Dataset file or directory of dataset files");
    add_bootstrap(pipeline);
    pipeline->add_option("--bin-width", o.bin_width, "Histogram bin width (default Freedman-Diaconis)");
    pipeline->add_option("--cut-height", o.cut_height, "Dendrogram cut height (default half the maximum)");

    auto* simulate = app.add_subcommand("simulate", "Run the split-merge process");
    simulate->add_option("--output", o.output, "Output directory")->capture_default_str();
    simulate->add_option("--initial", o.initial, "Initial distribution")
        ->check(CLI::IsMember({"pareto", "lognormal", "custom"}))
        ->capture_default_str();
    simulate->add_option("--custom-input", o.custom_input, "Initial sizes for --initial custom (unit,population)");
    simulate->add_option("--shape", o.shape, "Pareto shape")->capture_default_str();
    simulate->add_option("--scale", o.scale, "Pareto scale")->capture_default_str();
    simulate->add_option("--mu", o.mu, "Lognormal location")->capture_default_str();
    simulate->add_option("--sigma", o.sigma, "Lognormal scale")->capture_default_str();
    simulate->add_option("--n0", o.n0, "Initial unit count")->capture_default_str();
    simulate->add_option("--iterations", o.iterations, "Iterations")->capture_default_str();
    simulate->add_option("--merge-fraction", o.merge_fraction, "Fraction of units merged per iteration")
        ->capture_default_str();
    simulate->add_option("--fit-stride", o.fit_stride, "Fit every k-th iteration")->capture_default_str();
    simulate->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
    simulate->add_option("--pvalue-replicates", o.pvalue_replicates,
                         "Bootstrap replicates for the final state (0 = skip)")
        ->capture_default_str();
    simulate->add_flag("--no-refit", o.no_refit, "Score replicates against the original fit");
    simulate->add_option("--threads", o.threads, "Worker threads (0 = all cores)")->capture_default_str();

    auto* cutoff = app.add_subcommand("cutoff", "Refit on the k largest values for a range of k");
    add_io(cutoff, "Dataset file (unit,population)");
    cutoff->add_option("--k-min", o.k_min, "Smallest sub-sample")->capture_default_str();
    cutoff->add_option("--k-max", o.k_max, "Largest sub-sample (0 = all)")->capture_default_str();
    cutoff->add_flag("--pvalues", o.cutoff_pvalues, "Also bootstrap every sub-sample");
    add_bootstrap(cutoff);

    auto* cluster = app.add_subcommand("cluster", "Complete-linkage clustering in the (b, a) plane");
    add_io(cluster, "CSV with label (or id), b and a columns");
    cluster->add_option("--cut-height", o.cut_height, "Cut height (default half the maximum)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e, std::cerr, std::cerr);
        return kExitUsage;
    }

    try {
        if (*fit) return cmd_fit(o);
        if (*test) return cmd_test(o);
        if (*compare) return cmd_compare(o);
        if (*pipeline) return cmd_pipeline(o);
        if (*simulate) return cmd_simulate(o);
        if (*cutoff) return cmd_cutoff(o);
        if (*cluster) return cmd_cluster(o);
    } catch (const dgbd::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const dgbd::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
