// Batch runner for relocation trials: single trials, change-ratio sweeps,
// replay of saved worlds and world dumps.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "increloc/bench.hpp"

namespace {

using namespace increloc;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPartial = 2;

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string scheme;
    std::optional<double> change_ratio;
    bool quick = false;
    std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config, "key = value config file");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--scheme", o.scheme, "depth | breadth | hybrid");
    cmd->add_option("--change-ratio", o.change_ratio, "fraction of relocated landmarks in [0, 1]");
    cmd->add_flag("--quick", o.quick, "200 x 50 m world with 1250 landmarks");
    cmd->add_option("--out", o.out, "output path");
}

TrialConfig resolve(const CommonOptions& o) {
    TrialConfig cfg = o.quick ? quick_config() : default_config();
    if (!o.config.empty()) cfg = load_config(o.config, cfg);
    if (o.seed) cfg.seed = *o.seed;
    if (!o.scheme.empty()) apply_setting(cfg, "scheme", o.scheme);
    if (o.change_ratio) cfg.world.change_ratio = *o.change_ratio;
    cfg.validate();
    return cfg;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot open " + path + " for writing");
    return f;
}

void print_trial(const TrialResult& r) {
    std::cout << "scheme=" << to_string(r.scheme) << " change_ratio=" << r.change_ratio << " seed=" << r.seed
              << " viewpoints=" << r.viewpoints << " features=" << r.features << " hypotheses=" << r.hypotheses
              << " retired=" << r.retired;
    if (r.error_at_goal) {
        std::cout << " error_at_goal=" << *r.error_at_goal << " confidence=" << r.confidence << '\n';
    } else {
        std::cout << " error_at_goal=NoEstimate\n";
    }
}

void emit_trial(const TrialResult& r, const std::string& out, const std::string& diagnostics) {
    print_trial(r);
    if (!out.empty()) {
        auto f = open_out(out);
        write_results_csv(f, {r});
    }
    if (!diagnostics.empty()) {
        auto f = open_out(diagnostics);
        write_diagnostics_csv(f, r);
    }
}

std::vector<Scheme> parse_schemes(const std::vector<std::string>& names) {
    std::vector<Scheme> out;
    for (const auto& n : names) {
        const auto s = parse_scheme(n);
        if (!s) throw ConfigError("--schemes: unknown scheme '" + n + "'");
        out.push_back(*s);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Incremental RANSAC relocation benchmark"};
    app.require_subcommand(1);

    CommonOptions trial_opts;
    std::string trial_diag;
    std::string trial_world_out;
    auto* trial = app.add_subcommand("trial", "run one trial and report the error at the goal");
    add_common(trial, trial_opts);
    trial->add_option("--diagnostics", trial_diag, "per-viewpoint diagnostics CSV");
    trial->add_option("--save-world", trial_world_out, "also write the generated world");

    CommonOptions sweep_opts;
    std::vector<double> sweep_ratios;
    std::vector<std::string> sweep_schemes{"depth", "breadth", "hybrid"};
    std::size_t sweep_seeds = 5;
    int jobs = 0;
    auto* sweep = app.add_subcommand("sweep", "change ratio x scheme x seed grid");
    add_common(sweep, sweep_opts);
    sweep->add_option("--ratios", sweep_ratios, "change ratios (default 0,0.1,...,0.9,0.95,0.99)")->delimiter(',');
    sweep->add_option("--schemes", sweep_schemes, "schemes to compare")->delimiter(',');
    sweep->add_option("--seeds", sweep_seeds, "seeds per (ratio, scheme); seed i is master + i");
    sweep->add_option("--jobs", jobs, "worker threads (0 = OpenMP default)");

    CommonOptions replay_opts;
    std::string replay_world;
    std::string replay_diag;
    auto* replay = app.add_subcommand("replay", "rerun a trial in a saved world");
    add_common(replay, replay_opts);
    replay->add_option("--world", replay_world, "world file from dump-world or trial --save-world")->required();
    replay->add_option("--diagnostics", replay_diag, "per-viewpoint diagnostics CSV");

    CommonOptions dump_opts;
    auto* dump = app.add_subcommand("dump-world", "write the generated world in text form");
    add_common(dump, dump_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*trial) {
            TrialConfig cfg = resolve(trial_opts);
            const World world = generate_world(cfg.seed, cfg.world);
            if (!trial_world_out.empty()) save_world(trial_world_out, world);
            emit_trial(run_trial(cfg, world), trial_opts.out, trial_diag);
            return kExitOk;
        }
        if (*replay) {
            TrialConfig cfg = resolve(replay_opts);
            const World world = load_world(replay_world);
            emit_trial(run_trial(cfg, world), replay_opts.out, replay_diag);
            return kExitOk;
        }
        if (*dump) {
            const TrialConfig cfg = resolve(dump_opts);
            const World world = generate_world(cfg.seed, cfg.world);
            if (dump_opts.out.empty()) write_world(std::cout, world);
            else save_world(dump_opts.out, world);
            return kExitOk;
        }
        if (*sweep) {
            TrialConfig base = resolve(sweep_opts);
            base.record_series = false;
            SweepGrid grid;
            grid.ratios = sweep_ratios.empty()
                              ? std::vector<double>{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99}
                              : sweep_ratios;
            grid.schemes = parse_schemes(sweep_schemes);
            for (std::size_t i = 0; i < sweep_seeds; ++i) grid.seeds.push_back(base.seed + i);
            for (double r : grid.ratios) {
                if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("--ratios: values must be in [0, 1]");
            }
            if (grid.schemes.empty() || grid.seeds.empty()) throw ConfigError("sweep: empty grid");

            const auto cfgs = expand_grid(base, grid);
            std::cerr << "sweep: " << cfgs.size() << " trials\n";
            const SweepOutcome outcome = sweep_parallel(cfgs, jobs);
            for (const auto& f : outcome.failures) std::cerr << "trial failed: " << f << '\n';

            const std::string prefix = sweep_opts.out.empty() ? "sweep" : sweep_opts.out;
            {
                auto f = open_out(prefix + "_results.csv");
                write_results_csv(f, outcome.results);
            }
            const auto summary = summarize(outcome.results);
            {
                auto f = open_out(prefix + "_summary.csv");
                write_summary_csv(f, summary);
            }
            {
                auto f = open_out(prefix + "_config.txt");
                write_config(f, base);
            }
            write_summary_csv(std::cout, summary);
            return outcome.failures.empty() ? kExitOk : kExitPartial;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const InvalidParams& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitPartial;
    }
    return kExitOk;
}
