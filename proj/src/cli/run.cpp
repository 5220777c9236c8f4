#include "dynkit/cli/run.hpp"

#include "dynkit/cli/experiments.hpp"
#include "dynkit/cli/report.hpp"
#include "dynkit/parallel.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>

namespace dynkit::cli {

const std::vector<std::string>& subcommands()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v = experiment_names();
        v.push_back("all");
        return v;
    }();
    return names;
}

RunOutcome run(const std::string& subcommand, const Json& raw_config, const RunOptions& options)
{
    const auto& subs = subcommands();
    if (std::find(subs.begin(), subs.end(), subcommand) == subs.end())
        throw ConfigError("unknown subcommand: " + subcommand);

    Json raw = raw_config;
    if (options.seed && raw.is_object()) raw["rng_seed"] = *options.seed;
    const Config cfg = parse_config(raw);
    const int threads = resolve_threads(options.threads ? *options.threads : cfg.threads);

    RunOutcome outcome;
    outcome.out_dir = options.out_dir ? *options.out_dir : std::filesystem::path(cfg.output_dir);
    std::filesystem::create_directories(outcome.out_dir);

    Context ctx(cfg, outcome.out_dir, threads);
    const std::vector<std::string> todo =
        subcommand == "all" ? experiment_names() : std::vector<std::string>{subcommand};

    using Clock = std::chrono::steady_clock;
    const auto start = Clock::now();
    Json timings = Json::object();
    Json results = Json::object();
    for (const std::string& name : todo) {
        const auto t0 = Clock::now();
        results[name] = run_experiment(name, ctx);
        timings[name] = std::chrono::duration<double>(Clock::now() - t0).count();
    }

    const Grid& grid = cfg.grid;
    Json report{{"tool", "dynkit"},
                {"version", kToolVersion},
                {"subcommand", subcommand},
                {"config", cfg.echo},
                {"resolution",
                 {{"depth", grid.depths()},
                  {"boxes", grid.box_count()},
                  {"box_diameter", grid.box_diameter()},
                  {"eps", cfg.eps}}},
                {"results", results},
                {"assertions", ctx.assertions()},
                {"passed", ctx.all_passed()}};
    Json files = Json::array();
    for (const auto& f : ctx.files()) files.push_back(f);
    report["files"] = files;

    write_file(outcome.out_dir / "report.json", render_json(report));
    const Json sidecar{{"subcommand", subcommand},
                       {"threads", threads},
                       {"experiments", timings},
                       {"total_seconds", std::chrono::duration<double>(Clock::now() - start).count()}};
    write_file(outcome.out_dir / "timings.json", render_json(sidecar));

    outcome.exit_code = ctx.all_passed() ? kExitOk : kExitAssertion;
    outcome.report = std::move(report);
    return outcome;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"dynkit: chain recurrence, attractors, shadowing and homoclinic points"};
    std::string subcommand;
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    int threads = 0;
    app.add_option("subcommand", subcommand, "graph | cr | components | attractors | conley-verify | strong-cr | "
                                             "escape | shadow | splice | manifolds | homoclinic | accumulate | all")
        ->required();
    app.add_option("--config", config_path, "JSON config file")->required();
    auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides output_dir)");
    auto* seed_opt = app.add_option("--seed", seed, "RNG seed (overrides rng_seed)");
    auto* threads_opt = app.add_option("--threads", threads, "worker threads; DYNKIT_THREADS wins")->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }

    RunOptions options;
    if (*out_opt) options.out_dir = out_dir;
    if (*seed_opt) options.seed = seed;
    if (*threads_opt) options.threads = threads;
    try {
        const auto& subs = subcommands();
        if (std::find(subs.begin(), subs.end(), subcommand) == subs.end())
            throw ConfigError("unknown subcommand: " + subcommand);
        const RunOutcome r = run(subcommand, load_json_file(config_path), options);
        out << "wrote " << (r.out_dir / "report.json").string() << "\n";
        if (r.exit_code == kExitAssertion) {
            for (const Json& a : r.report.at("assertions")) {
                if (!a.at("pass").get<bool>()) err << "assertion failed: " << a.at("name").get<std::string>() << "\n";
            }
        }
        return r.exit_code;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}

}  // namespace dynkit::cli
