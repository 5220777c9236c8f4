#pragma once

#include "dynkit/cli/config.hpp"

#include <filesystem>
#include <string>

namespace dynkit::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// {"count": n, "runs": [[first, length], ...]}
Json boxset_json(const BoxSet& set);
BoxSet boxset_from_json(const Json& j, std::uint32_t universe);

/// Stable text form of a report: two-space indent and a trailing newline.
std::string render_json(const Json& j);
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace dynkit::cli
