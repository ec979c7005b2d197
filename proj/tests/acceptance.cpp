// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "dgbd/dgbd.hpp"
#include "linkage_oracle.hpp"
#include "test_support.hpp"

using namespace dgbd;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double budget_seconds;
    std::function<Outcome()> body;
};

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

Outcome c1_exact_recovery() {
    const DgbdParams truth{0.5, 0.7, 100.0, 1, 200};
    const auto fit = fit_dgbd(test::model_sample(truth));
    const double err = std::max({std::abs(fit.params.b - 0.5), std::abs(fit.params.a - 0.7),
                                 std::abs(fit.params.scale - 100.0)});
    Outcome o;
    o.pass = err < 1e-9 && std::abs(fit.r_squared - 1.0) < 1e-12;
    o.detail = "max param error " + fmt("%.3g", err) + ", R^2 " + fmt("%.15g", fit.r_squared);
    return o;
}

Outcome c2_special_cases() {
    const auto pl = fit_dgbd(test::powerlaw_sample(1000.0, 1.2, 200));
    const auto cst = fit_dgbd(RankSizeSample(std::vector<double>(100, 42.0)));
    const auto uni = fit_dgbd(test::uniform_image(10000));
    Outcome o;
    o.pass = std::abs(pl.params.b) < 1e-9 && std::abs(cst.params.b) < 1e-9 && std::abs(cst.params.a) < 1e-9 &&
             std::abs(uni.params.b - 1.0) < 0.05 && std::abs(uni.params.a) < 0.05;
    o.detail = "power law b " + fmt("%.3g", pl.params.b) + "; constant (b, a) (" + fmt("%.3g", cst.params.b) +
               ", " + fmt("%.3g", cst.params.a) + "); uniform (b, a) (" + fmt("%.4f", uni.params.b) + ", " +
               fmt("%.4f", uni.params.a) + ")";
    return o;
}

Outcome c3_nested_dominance() {
    Rng rng(2024);
    int violations = 0;
    double worst = -INFINITY;
    for (int i = 0; i < 1000; ++i) {
        const auto s = test::random_sample(rng, 3 + rng.below(298));
        const double gap = fit_dgbd(s).rss - fit_powerlaw(s).rss;
        worst = std::max(worst, gap);
        if (gap > 1e-12) ++violations;
    }
    return {violations == 0, std::to_string(violations) + " violations, max RSS gap " + fmt("%.3g", worst)};
}

Outcome c4_aic() {
    const double v = aic(2, 100, 100.0);
    const double gap = aic(3, 50, 7.5) - aic(2, 50, 7.5);
    return {v == 4.0 && gap == 2.0, "aic(2,100,100) = " + fmt("%.17g", v) + ", gap " + fmt("%.17g", gap)};
}

Outcome c5_bootstrap_self_consistency() {
    const DgbdParams truth{0.6, 0.5, 1000.0, 1, 150};
    int accepted = 0;
    for (int run = 0; run < 100; ++run) {
        const auto sample = sample_dgbd(truth, 150, derive_seed(5, static_cast<std::uint64_t>(run)));
        const auto fit = fit_dgbd(sample);
        if (!fit.is_monotone()) continue;
        if (bootstrap_pvalue(sample, fit, 500, derive_seed(55, static_cast<std::uint64_t>(run))).p_value > 0.05)
            ++accepted;
    }
    return {accepted >= 90, std::to_string(accepted) + "/100 runs with p > 0.05"};
}

struct SimBatch {
    int b_gt_a = 0;
    int accepted = 0;
    int non_monotone = 0;  // KS test refused
    double worst_drift = 0.0;
    std::size_t min_n = SIZE_MAX, max_n = 0;
};

SimBatch simulate_batch(InitialDistribution init, Seed base) {
    SimBatch out;
    for (int s = 0; s < 20; ++s) {
        SplitMergeConfig cfg;
        cfg.initial = init;
        cfg.n0 = 1000;
        cfg.iterations = 200;
        cfg.seed = derive_seed(base, static_cast<std::uint64_t>(s));
        cfg.fit_stride = 200;
        const auto st = run_simulation(cfg);
        const auto& first = st.trajectory.front();
        const auto& last = st.trajectory.back();
        out.worst_drift = std::max(out.worst_drift, std::abs(last.total_mass - first.total_mass) / first.total_mass);
        out.min_n = std::min(out.min_n, st.sizes.size());
        out.max_n = std::max(out.max_n, st.sizes.size());
        if (last.b > last.a) ++out.b_gt_a;
        const RankSizeSample sample(st.sizes);
        const auto fit = fit_dgbd(sample);
        if (!fit.is_monotone())
            ++out.non_monotone;
        else if (bootstrap_pvalue(sample, fit, 500, derive_seed(cfg.seed, 7)).p_value > 0.05)
            ++out.accepted;
    }
    return out;
}

// Both split-merge criteria share the same 40 runs.
const std::pair<SimBatch, SimBatch>& sim_batches() {
    static const std::pair<SimBatch, SimBatch> batches{simulate_batch(ParetoInit{1.0, 1.0}, 600),
                                                       simulate_batch(LognormalInit{0.0, 1.0}, 700)};
    return batches;
}

Outcome c6_splitmerge_shape() {
    const auto& [pareto, lognormal] = sim_batches();
    const double drift = std::max(pareto.worst_drift, lognormal.worst_drift);
    Outcome o;
    o.pass = pareto.b_gt_a > 14 && lognormal.b_gt_a > 14 && drift < 1e-9;
    o.detail = "b > a in " + std::to_string(pareto.b_gt_a) + "/20 Pareto and " + std::to_string(lognormal.b_gt_a) +
               "/20 lognormal runs; final n in [" + std::to_string(std::min(pareto.min_n, lognormal.min_n)) + ", " +
               std::to_string(std::max(pareto.max_n, lognormal.max_n)) + "]; mass drift " + fmt("%.3g", drift);

    SplitMergeConfig full;
    full.n0 = 10000;
    full.iterations = 1000;
    full.seed = 1;
    full.fit_stride = 50;
    const auto t0 = std::chrono::steady_clock::now();
    const auto st = run_simulation(full);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.pass = o.pass && secs < 1800.0 && st.trajectory.back().iteration == 1000;
    o.detail += "; full scale run " + fmt("%.1f", secs) + " s, final n " + std::to_string(st.sizes.size());
    return o;
}

Outcome c7_splitmerge_acceptance() {
    const auto& [pareto, lognormal] = sim_batches();
    return {pareto.accepted > 10 && lognormal.accepted > 10,
            "p > 0.05 in " + std::to_string(pareto.accepted) + "/20 Pareto and " +
                std::to_string(lognormal.accepted) + "/20 lognormal runs; fits with a < 0 (not testable): " +
                std::to_string(pareto.non_monotone) + " and " + std::to_string(lognormal.non_monotone)};
}

Outcome c8_cutoff() {
    const auto dg = cutoff_sweep(test::model_sample({0.9, 0.5, 1000.0, 1, 300}), 10, 300);
    const auto pl = cutoff_sweep(test::powerlaw_sample(1000.0, 1.0, 300), 10, 300);
    const double rd = dg.exponent_range(), rp = pl.exponent_range();
    return {rd > 0.1 && rp < 1e-9, "DGBD parent range " + fmt("%.4f", rd) + ", power-law parent " + fmt("%.3g", rp)};
}

Outcome c9_linkage_oracle() {
    Rng rng(99);
    int mismatches = 0;
    for (int inst = 0; inst < 50; ++inst) {
        std::vector<ParamPoint> pts;
        for (int i = 0; i < 8; ++i)
            pts.push_back({"p" + std::to_string(i), rng.uniform(0.0, 2.0), rng.uniform(-0.5, 2.0)});
        if (test::as_label_sets(complete_linkage(pts)) != test::oracle_linkage(pts)) ++mismatches;
    }
    return {mismatches == 0, std::to_string(mismatches) + "/50 mismatches"};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome c10_pipeline_determinism() {
    const auto base = fs::temp_directory_path() / "dgbd_acceptance";
    fs::remove_all(base);
    std::vector<std::string> outputs;
    for (const char* run : {"a", "b"}) {
        const auto out = base / run;
        const std::string cmd = std::string("\"") + DGBD_CLI_PATH + "\" pipeline --input \"" DGBD_FIXTURES
                                "/corpus\" --seed 1 --output \"" + out.string() + "\" >/dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return {false, "pipeline exited abnormally"};
        outputs.push_back(slurp(out / "results.csv"));
    }
    const bool same = !outputs[0].empty() && outputs[0] == outputs[1];
    return {same, std::string(same ? "identical" : "different") + " results.csv (" +
                      std::to_string(outputs[0].size()) + " bytes)"};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "exact recovery", 1.0, c1_exact_recovery},
        {2, "special cases", 5.0, c2_special_cases},
        {3, "nested-model dominance", 30.0, c3_nested_dominance},
        {4, "AIC arithmetic", 1.0, c4_aic},
        {5, "bootstrap self-consistency", 600.0, c5_bootstrap_self_consistency},
        {6, "split-merge b > a and conservation", 300.0 + 1800.0, c6_splitmerge_shape},
        {7, "split-merge DGBD acceptance", 300.0, c7_splitmerge_acceptance},
        {8, "cutoff sensitivity", 30.0, c8_cutoff},
        {9, "clustering oracle", 5.0, c9_linkage_oracle},
        {10, "pipeline determinism", 600.0, c10_pipeline_determinism},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.body();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.budget_seconds) {
            o.pass = false;
            o.detail += "; over time budget";
        }
        if (!o.pass) ++failures;
        std::printf("%s criterion %2d %-36s %8.2f s  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), secs,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
