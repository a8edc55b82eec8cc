// Command-line front end: run, compare, train, eval, presets.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lore/error.hpp"
#include "lore/experiment.hpp"

namespace fs = std::filesystem;
using namespace lore;

namespace {

#ifndef LORE_SOURCE_DIR
#define LORE_SOURCE_DIR "."
#endif

struct Source {
    std::string config_path;
    std::string preset_name;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> strategy;
};

void add_source(CLI::App *cmd, Source &src) {
    auto *cfg = cmd->add_option("--config", src.config_path, "Config file (JSON, comments allowed)");
    auto *pre = cmd->add_option("--preset", src.preset_name, "Built-in scenario instead of a config file");
    cfg->excludes(pre);
    cmd->add_option("--seed", src.seed, "Override the config seed");
    cmd->add_option("--strategy", src.strategy, "Override the strategy (none|most_click|most_history_click|lore)");
}

RunConfig resolve(const Source &src) {
    if (src.config_path.empty() && src.preset_name.empty()) throw ConfigError("pass --config <path> or --preset <name>");
    RunConfig cfg = src.config_path.empty() ? preset(src.preset_name) : load_config(src.config_path);
    if (src.seed) cfg.seed = *src.seed;
    if (src.strategy) cfg.strategy = parse_strategy(*src.strategy);
    validate(cfg);
    return cfg;
}

fs::path out_dir(const RunConfig &cfg, const std::string &flag) { return flag.empty() ? fs::path(cfg.output_dir) : fs::path(flag); }

int run_plots(const fs::path &in, const fs::path &out) {
    const char *env = std::getenv("LORE_FIGURES_DIR");
    const fs::path scripts = env ? fs::path(env) : fs::path(LORE_SOURCE_DIR) / "figures";
    const fs::path script = scripts / "plot_welfare.py";
    if (!fs::exists(script)) {
        std::cerr << "lore: --plots: plotting script not found at " << script.string()
                  << " (set LORE_FIGURES_DIR)\n";
        return 3;
    }
    const std::string cmd = "python3 \"" + script.string() + "\" --in \"" + in.string() + "\" --out \"" +
                            out.string() + "\"";
    const int rc = std::system(cmd.c_str());
    if (rc != 0) std::cerr << "lore: --plots: '" << cmd << "' exited with status " << rc << '\n';
    return rc == 0 ? 0 : 3;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"LoRe: learned information revelation for creator ecosystems"};
    app.require_subcommand(1);

    Source run_src;
    std::string run_out;
    auto *run = app.add_subcommand("run", "Train (lore) or directly evaluate a strategy and write all outputs");
    add_source(run, run_src);
    run->add_option("--out", run_out, "Output directory (default: config output.dir)");
    bool run_snapshot = false;
    run->add_flag("--snapshot", run_snapshot, "Also write snapshot.json with the final ecosystem state");

    std::vector<std::string> cmp_configs, cmp_presets, cmp_strategies;
    std::vector<std::uint64_t> cmp_seeds;
    std::string cmp_out;
    bool cmp_plots = false;
    auto *cmp = app.add_subcommand("compare", "Seed sweep over configs that differ only in strategy");
    cmp->add_option("--configs", cmp_configs, "Config files")->delimiter(',');
    cmp->add_option("--presets", cmp_presets, "Built-in scenarios")->delimiter(',');
    cmp->add_option("--strategies", cmp_strategies, "Expand each config into these strategies")->delimiter(',');
    cmp->add_option("--seeds", cmp_seeds, "Seeds, e.g. 1,2,3")->delimiter(',')->required();
    cmp->add_option("--out", cmp_out, "Directory for per-run outputs and comparison.csv");
    cmp->add_flag("--plots", cmp_plots, "Render figures from the written CSVs (needs --out and the figures scripts)");

    Source train_src;
    std::string train_out;
    auto *trn = app.add_subcommand("train", "Train a lore policy and write training_log.csv and checkpoint.json");
    add_source(trn, train_src);
    trn->add_option("--out", train_out, "Output directory (default: config output.dir)");

    std::string eval_ckpt, eval_out;
    std::optional<std::size_t> eval_rounds;
    auto *ev = app.add_subcommand("eval", "Evaluate a saved policy on the evaluation environment");
    ev->add_option("--checkpoint", eval_ckpt, "checkpoint.json written by train or run")->required();
    ev->add_option("--out", eval_out, "Output directory (default: the checkpoint's directory)");
    ev->add_option("--rounds", eval_rounds, "Evaluation rounds (default: config eval_rounds)");

    std::string presets_write;
    auto *pre = app.add_subcommand("presets", "List built-in scenarios, optionally writing them as config files");
    pre->add_option("--write", presets_write, "Directory to write <name>.json files into");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const auto cfg = resolve(run_src);
            const auto dir = out_dir(cfg, run_out);
            const auto out = run_experiment(cfg, dir);
            if (run_snapshot)
                save_snapshot(out.eval.final_state, dir / "snapshot.json",
                              {{"config_hash", hex64(config_hash(cfg))}, {"seed", cfg.seed}});
            std::cout << format_summary(out.summary) << '\n' << "outputs in " << dir.string() << '\n';
        } else if (*cmp) {
            std::vector<RunConfig> configs;
            for (const auto &p : cmp_configs) configs.push_back(load_config(p));
            for (const auto &p : cmp_presets) configs.push_back(preset(p));
            if (!cmp_strategies.empty()) {
                std::vector<RunConfig> expanded;
                for (const auto &c : configs)
                    for (const auto &s : cmp_strategies) {
                        auto e = c;
                        e.strategy = parse_strategy(s);
                        expanded.push_back(e);
                    }
                configs = std::move(expanded);
            }
            if (cmp_plots && cmp_out.empty()) throw ConfigError("--plots needs --out");
            std::optional<fs::path> dir;
            if (!cmp_out.empty()) dir = fs::path(cmp_out);
            const auto result = compare(configs, cmp_seeds, dir);
            std::cout << format_table(result);
            if (dir) {
                write_comparison_csv(result, *dir / "comparison.csv");
                std::cout << "outputs in " << dir->string() << '\n';
                if (cmp_plots) return run_plots(*dir, *dir / "plots");
            }
        } else if (*trn) {
            auto cfg = resolve(train_src);
            cfg.strategy = StrategyKind::Lore;
            const auto dir = out_dir(cfg, train_out);
            fs::create_directories(dir);
            auto model = train_policy(cfg);
            write_training_log(cfg, model.result.log, dir / "training_log.csv");
            save_checkpoint({cfg, model.learner, model.trust, model.rng}, dir / "checkpoint.json",
                            {{"config_hash", hex64(config_hash(cfg))}, {"seed", cfg.seed}});
            std::cout << "trained " << model.result.rounds << " rounds, " << model.result.log.size() << " cycles"
                      << (model.result.converged ? " (converged)" : " (round cap)") << "; checkpoint in "
                      << (dir / "checkpoint.json").string() << '\n';
        } else if (*ev) {
            auto cp = load_checkpoint(eval_ckpt);
            if (eval_rounds) cp.config.eval_rounds = *eval_rounds;
            cp.config.strategy = StrategyKind::Lore;
            const fs::path dir = eval_out.empty() ? fs::path(eval_ckpt).parent_path() : fs::path(eval_out);
            if (!dir.empty()) fs::create_directories(dir);
            RunOutput out;
            out.eval = evaluate(cp.config, &cp.learner, cp.trust);
            const auto cum = cumulative_clicks(out.eval.events);
            out.summary.name = cp.config.name;
            out.summary.strategy = StrategyKind::Lore;
            out.summary.seed = cp.config.seed;
            out.summary.final_clicks = cum.empty() ? 0 : cum.back();
            out.summary.active_creators = active_creators(out.eval.events);
            bool any = false;
            for (auto c : out.eval.genre_counts) any = any || c > 0;
            out.summary.diversity = any ? diversity(out.eval.genre_counts) : 0.0;
            write_metrics_csv(cp.config, out.eval.metrics, dir / "eval_metrics.csv");
            write_events_jsonl(cp.config, out.eval.events, dir / "eval_events.jsonl");
            std::cout << format_summary(out.summary) << '\n';
        } else if (*pre) {
            for (const auto &name : preset_names()) {
                std::cout << name << '\n';
                if (!presets_write.empty()) {
                    fs::create_directories(presets_write);
                    save_config(preset(name), fs::path(presets_write) / (name + ".json"));
                }
            }
        }
    } catch (const std::exception &e) {
        std::cerr << "lore: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
