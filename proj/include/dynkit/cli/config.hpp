#pragma once

#include "dynkit/phase_space.hpp"
#include "dynkit/system.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>

namespace dynkit::cli {

using Json = nlohmann::json;

/// Invalid or unreadable configuration; the CLI maps it to exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

struct Config {
    Json echo;  // the validated config with every default filled in
    MapPtr map;
    Grid grid;
    double eps = 0.0;  // absolute
    std::uint64_t rng_seed = 0;
    int threads = 0;   // 0: resolved at run time
    std::string output_dir;

    const Json& experiment(const std::string& name) const { return echo.at("experiments").at(name); }
};

Json load_json_file(const std::filesystem::path& path);

/// Rejects unknown keys, wrong types, depth > 12 and non-positive
/// tolerances. The error message names the offending field.
Config parse_config(const Json& raw);

Json default_experiments();

Vec json_vec(const Json& j, int dimension, const std::string& field);
Json vec_json(const Vec& v);

}  // namespace dynkit::cli
