// profile-forge: dataset building, strategy experiments, the ablation
// grid, record re-scoring, and cache maintenance from one binary.
// Exit codes: 0 success, 1 terminal error, 2 validation failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "pforge/datasets.hpp"
#include "pforge/runner.hpp"

namespace {

using namespace pforge;

struct Flags {
    std::string task = "preference";
    std::string dataset;
    std::string provider = "mock";
    std::string base_url;
    std::string model = "gpt-3.5-turbo-1106";
    std::string embed_model = "text-embedding-3-small";
    std::string mock_script;
    std::string template_dir;
    std::string cache_dir;
    std::string out;
    std::string format = "markdown";
    std::vector<std::string> strategies;
    std::uint64_t seed = 0;
    std::size_t limit = 0;  // 0 = all instances
    int parallelism = 4;
    double lower = 0.4;
    double upper = 0.6;
};

TaskKind task_or_throw(const std::string& name) {
    const auto task = task_from_string(name);
    if (!task) {
        throw std::invalid_argument(
            "unknown task: " + name +
            " (use preference, paraphrase, or dialogue)");
    }
    return *task;
}

// dg-no-pc | dg-with-pc | pg | pg-no-pc | gpg | gpg:pc,g,pp (any flag subset)
StrategyConfig strategy_from_name(const std::string& name, TaskKind task) {
    if (name == "dg-no-pc") return StrategyConfig::dg(false);
    if (name == "dg-with-pc") return StrategyConfig::dg(true);
    if (name == "pg") return StrategyConfig::pg(true);
    if (name == "pg-no-pc") return StrategyConfig::pg(false);
    if (name == "gpg") return StrategyConfig::gpg_default(task);
    if (name.rfind("gpg:", 0) == 0) {
        bool pc = false, g = false, pp = false;
        std::string token;
        std::istringstream in(name.substr(4));
        while (std::getline(in, token, ',')) {
            if (token == "pc") pc = true;
            else if (token == "g") g = true;
            else if (token == "pp") pp = true;
            else {
                throw std::invalid_argument("unknown gpg flag: " + token +
                                            " (use pc, g, pp)");
            }
        }
        const auto config = StrategyConfig::gpg(pc, g, pp);
        if (const auto reason = config.invalid_reason()) {
            throw std::invalid_argument(name + ": " + *reason);
        }
        return config;
    }
    throw std::invalid_argument(
        "unknown strategy: " + name +
        " (use dg-no-pc, dg-with-pc, pg, pg-no-pc, gpg, or gpg:pc,g,pp)");
}

std::shared_ptr<Provider> make_provider(const Flags& flags) {
    if (flags.provider == "mock") {
        if (flags.mock_script.empty()) {
            throw std::invalid_argument("--provider mock needs --mock-script");
        }
        std::ifstream in(flags.mock_script);
        if (!in) {
            throw std::runtime_error("cannot open " + flags.mock_script);
        }
        nlohmann::ordered_json doc;
        try {
            in >> doc;
        } catch (const std::exception& e) {
            throw std::invalid_argument("mock script " + flags.mock_script +
                                        ": " + e.what());
        }
        return std::make_shared<MockProvider>(MockScript::from_json(doc));
    }
    if (flags.base_url.empty()) {
        throw std::invalid_argument("--provider remote needs --base-url");
    }
    return std::make_shared<RemoteProvider>(flags.base_url);
}

std::unique_ptr<Embedder> make_embedder(const Flags& flags) {
    if (flags.provider == "remote") {
        if (flags.base_url.empty()) {
            throw std::invalid_argument("--provider remote needs --base-url");
        }
        return std::make_unique<RemoteEmbedder>(flags.base_url,
                                                flags.embed_model);
    }
    return std::make_unique<HashEmbedder>(64, flags.seed);
}

TemplateSet load_templates(const Flags& flags) {
    if (flags.template_dir.empty()) return TemplateSet::defaults();
    return TemplateSet::from_dir(flags.template_dir);
}

ExperimentConfig experiment_config(const Flags& flags) {
    const auto task = task_or_throw(flags.task);
    ExperimentConfig config;
    config.task = task;
    config.dataset = flags.dataset;
    config.model = flags.model;
    config.seed = flags.seed;
    if (flags.limit > 0) config.limit = flags.limit;
    config.parallelism = flags.parallelism;
    config.out_dir = flags.out;
    for (const auto& name : flags.strategies) {
        config.strategies.push_back(strategy_from_name(name, task));
    }
    if (config.strategies.empty()) {
        config.strategies = {StrategyConfig::dg(false), StrategyConfig::dg(true),
                             StrategyConfig::pg(),
                             StrategyConfig::gpg_default(task)};
    }
    return config;
}

void emit(const ExperimentReport& report, const Flags& flags) {
    const auto format = report_format_from(flags.format);
    if (!format) {
        throw std::invalid_argument("unknown format: " + flags.format);
    }
    const auto path = write_report(report, *format, flags.out);
    std::cout << render_report(report, *format);
    std::cerr << "report written: " << path.string() << '\n';
}

int cmd_run(const Flags& flags, bool ablate) {
    const auto config = experiment_config(flags);
    const auto templates = load_templates(flags);
    const auto provider = make_provider(flags);
    const auto cache_dir = flags.cache_dir.empty()
                               ? (std::filesystem::path(flags.out) / "cache")
                               : std::filesystem::path(flags.cache_dir);
    const auto cache = std::make_shared<ResponseCache>(cache_dir);
    GatewayOptions options;
    options.parallelism = flags.parallelism;
    Gateway gateway(provider, cache, options);
    const auto embedder = make_embedder(flags);

    const auto report =
        ablate ? ablation_matrix(config, gateway, embedder.get(), templates)
               : run_experiment(config, gateway, embedder.get(), templates);
    emit(report, flags);

    const auto stats = cache->stats();
    std::cerr << "provider calls: " << gateway.provider_calls()
              << "; cache hits: " << gateway.cache_hits()
              << "; cache entries: " << stats.entries << " (" << stats.bytes
              << " bytes)\n";
    return 0;
}

int cmd_report(const Flags& flags) {
    const auto config = experiment_config(flags);
    const auto templates = load_templates(flags);
    const auto embedder = make_embedder(flags);
    emit(report_from_records(config, embedder.get(), templates), flags);
    return 0;
}

int cmd_build(const Flags& flags) {
    const auto task = task_or_throw(flags.task);
    const std::filesystem::path out_dir(flags.out);
    std::filesystem::create_directories(out_dir);
    switch (task) {
        case TaskKind::PreferencePrediction: {
            const auto records = purchases_from_jsonl(flags.dataset);
            const auto build = build_preference_dataset(records, flags.seed);
            const auto path = out_dir / "preference.jsonl";
            write_instances_jsonl(path, build.instances);
            for (const auto& skip : build.skips) {
                std::cerr << "skipped " << skip.user_id << ": " << skip.reason
                          << '\n';
            }
            std::cerr << "built " << build.instances.size()
                      << " preference instances from " << records.size()
                      << " purchases (" << build.skips.size()
                      << " users skipped) -> " << path.string() << '\n';
            break;
        }
        case TaskKind::TextParaphrase: {
            const auto load = load_paraphrase_dataset(
                std::filesystem::path(flags.dataset));
            const auto path = out_dir / "paraphrase.jsonl";
            write_instances_jsonl(path, load.instances);
            for (const auto& warning : load.warnings) {
                std::cerr << "warning: " << warning << '\n';
            }
            std::cerr << "loaded " << load.instances.size()
                      << " paraphrase instances (" << load.warnings.size()
                      << " records rejected) -> " << path.string() << '\n';
            break;
        }
        case TaskKind::DialogueResponse: {
            const auto candidates =
                dialogue_candidates_from_jsonl(flags.dataset);
            const auto embedder = make_embedder(flags);
            const auto build = build_dialogue_subset(candidates, *embedder,
                                                     flags.lower, flags.upper);
            const auto path = out_dir / "dialogue.jsonl";
            write_instances_jsonl(path, build.instances);
            for (const auto& skip : build.unresolved) {
                std::cerr << "unresolved " << skip.user_id << ": "
                          << skip.reason << '\n';
            }
            std::cerr << "kept " << build.instances.size() << " of "
                      << candidates.size() << " dialogue candidates ("
                      << build.dropped << " outside the similarity band, "
                      << build.unresolved.size() << " unresolved) -> "
                      << path.string() << '\n';
            break;
        }
    }
    return 0;
}

int cmd_cache_stats(const Flags& flags) {
    ResponseCache cache(flags.cache_dir);
    const auto stats = cache.stats();
    std::cout << "entries: " << stats.entries << '\n'
              << "bytes: " << stats.bytes << '\n';
    return 0;
}

int cmd_cache_clear(const Flags& flags) {
    ResponseCache cache(flags.cache_dir);
    std::cout << "removed: " << cache.clear() << '\n';
    return 0;
}

void add_task_flag(CLI::App* cmd, Flags& flags) {
    cmd->add_option("--task", flags.task,
                    "preference | paraphrase | dialogue")
        ->check(CLI::IsMember({"preference", "paraphrase", "dialogue"}));
}

void add_provider_flags(CLI::App* cmd, Flags& flags) {
    cmd->add_option("--provider", flags.provider, "completion provider")
        ->check(CLI::IsMember({"remote", "mock"}));
    cmd->add_option("--base-url", flags.base_url,
                    "remote endpoint, e.g. https://api.openai.com");
    cmd->add_option("--mock-script", flags.mock_script,
                    "JSON rule file for the mock provider");
    cmd->add_option("--embed-model", flags.embed_model,
                    "embedding model for the remote provider");
}

void add_experiment_flags(CLI::App* cmd, Flags& flags) {
    add_task_flag(cmd, flags);
    cmd->add_option("--dataset", flags.dataset, "instance JSONL file")
        ->required();
    cmd->add_option("--model", flags.model, "completion model name");
    cmd->add_option("--seed", flags.seed, "seed for the hash embedder");
    cmd->add_option("--limit", flags.limit,
                    "run only the first N instances by id (0 = all)");
    cmd->add_option("--parallelism", flags.parallelism,
                    "worker threads and in-flight provider calls");
    cmd->add_option("--template-dir", flags.template_dir,
                    "directory overriding the built-in prompt templates");
    cmd->add_option("--out", flags.out,
                    "output directory for records and reports")
        ->required();
    cmd->add_option("--format", flags.format, "report format")
        ->check(CLI::IsMember({"markdown", "csv"}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Personal-context prompting experiments: build datasets, run "
        "direct/profile/guided strategies against a chat provider, and "
        "report per-task metrics."};
    app.require_subcommand(1);
    Flags flags;
    int rc = 0;

    auto* build = app.add_subcommand(
        "build-dataset", "Build task instances from a raw corpus");
    add_task_flag(build, flags);
    build->add_option("--dataset", flags.dataset, "raw corpus file")
        ->required();
    build->add_option("--seed", flags.seed, "deterministic sampling seed");
    build->add_option("--out", flags.out, "output directory")->required();
    add_provider_flags(build, flags);
    build->add_option("--lower", flags.lower,
                      "dialogue similarity band, exclusive lower bound");
    build->add_option("--upper", flags.upper,
                      "dialogue similarity band, inclusive upper bound");
    build->callback([&] { rc = cmd_build(flags); });

    auto* run = app.add_subcommand(
        "run", "Run the configured strategies over a dataset");
    add_experiment_flags(run, flags);
    add_provider_flags(run, flags);
    run->add_option("--cache-dir", flags.cache_dir,
                    "response cache directory (default <out>/cache)");
    run->add_option("--strategy", flags.strategies,
                    "strategy name, repeatable (default: dg-no-pc dg-with-pc "
                    "pg gpg); also accepts gpg:pc,g,pp flag subsets");
    run->callback([&] { rc = cmd_run(flags, false); });

    auto* ablate = app.add_subcommand(
        "ablate", "Run the ten-row segment ablation grid");
    add_experiment_flags(ablate, flags);
    add_provider_flags(ablate, flags);
    ablate->add_option("--cache-dir", flags.cache_dir,
                       "response cache directory (default <out>/cache)");
    ablate->callback([&] { rc = cmd_run(flags, true); });

    auto* report = app.add_subcommand(
        "report", "Re-score persisted run records without a provider");
    add_experiment_flags(report, flags);
    add_provider_flags(report, flags);
    report->add_option("--strategy", flags.strategies,
                       "strategy name, repeatable; must match the original run");
    report->callback([&] { rc = cmd_report(flags); });

    auto* cache = app.add_subcommand("cache", "Inspect or clear the cache");
    cache->require_subcommand(1);
    auto* stats = cache->add_subcommand("stats", "Print entry count and size");
    stats->add_option("--cache-dir", flags.cache_dir, "cache directory")
        ->required();
    stats->callback([&] { rc = cmd_cache_stats(flags); });
    auto* clear = cache->add_subcommand("clear", "Delete all cached entries");
    clear->add_option("--cache-dir", flags.cache_dir, "cache directory")
        ->required();
    clear->callback([&] { rc = cmd_cache_clear(flags); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return rc;
}
