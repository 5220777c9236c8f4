#include "dynkit/cli/report.hpp"

#include <fstream>

namespace dynkit::cli {

Json boxset_json(const BoxSet& set)
{
    Json runs = Json::array();
    for (const auto& [first, length] : set.runs()) runs.push_back({first, length});
    return Json{{"count", set.count()}, {"runs", runs}};
}

BoxSet boxset_from_json(const Json& j, std::uint32_t universe)
{
    std::vector<BoxSet::Run> runs;
    for (const Json& r : j.at("runs")) runs.emplace_back(r.at(0).get<std::uint32_t>(), r.at(1).get<std::uint32_t>());
    return BoxSet::from_runs(universe, runs);
}

std::string render_json(const Json& j) { return j.dump(2) + "\n"; }

void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f << text;
    if (!f) throw Error("write failed: " + path.string());
}

}  // namespace dynkit::cli
