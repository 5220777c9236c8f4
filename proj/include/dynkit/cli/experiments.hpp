#pragma once

#include "dynkit/chain_graph.hpp"
#include "dynkit/cli/config.hpp"
#include "dynkit/conley.hpp"
#include "dynkit/manifolds.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dynkit::cli {

/// Shared state of one CLI run: the graph and the attractors are computed
/// once and reused by later experiments.
class Context {
public:
    Context(const Config& config, std::filesystem::path out_dir, int threads);

    const Config& config() const noexcept { return config_; }
    const std::filesystem::path& out_dir() const noexcept { return out_dir_; }
    int threads() const noexcept { return threads_; }

    const TransitionGraph& graph();
    const SccResult& scc();
    /// Attractor records of the `attractors` experiment settings.
    const std::vector<AttractorRecord>& attractors();
    /// Hyperbolic periodic points of the `manifolds` settings.
    const std::vector<HyperbolicPoint>& periodic_points();
    /// The configured anchor, or the first hyperbolic point with a real spectrum.
    std::optional<HyperbolicPoint> anchor();

    void check(const std::string& name, bool pass, Json detail = Json::object());
    const Json& assertions() const noexcept { return assertions_; }
    bool all_passed() const;

    /// Registers an output file (relative to the output directory).
    std::filesystem::path file(const std::string& name);
    const std::vector<std::string>& files() const noexcept { return files_; }
    bool plots_enabled() const { return config_.grid.dimension() == 2; }

private:
    const Config& config_;
    std::filesystem::path out_dir_;
    int threads_;
    std::optional<TransitionGraph> graph_;
    std::optional<SccResult> scc_;
    std::optional<std::vector<AttractorRecord>> attractors_;
    std::optional<std::vector<HyperbolicPoint>> periodic_;
    Json assertions_ = Json::array();
    std::vector<std::string> files_;
};

/// Names accepted on the command line, in the order `all` runs them.
const std::vector<std::string>& experiment_names();

/// Empty when the experiment applies to the configured map, else the reason.
std::string skip_reason(const std::string& name, Context& ctx);

Json run_experiment(const std::string& name, Context& ctx);

}  // namespace dynkit::cli
