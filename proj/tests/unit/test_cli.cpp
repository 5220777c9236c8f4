#include "dynkit/cli/config.hpp"
#include "dynkit/cli/plot.hpp"
#include "dynkit/cli/report.hpp"
#include "dynkit/cli/run.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace dynkit;
using namespace dynkit::cli;

namespace {

std::string message_of(const Json& raw)
{
    try {
        parse_config(raw);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

int run_main(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr)
{
    std::vector<const char*> argv{"dynkit"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return code;
}

std::filesystem::path scratch(const std::string& name)
{
    const auto p = std::filesystem::temp_directory_path() / ("dynkit_unit_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("config defaults are echoed")
{
    const Config c = parse_config(Json{{"map", {{"name", "cat"}}}});
    CHECK(c.grid.box_count() == 64 * 64);
    CHECK(c.eps == doctest::Approx(c.grid.box_diameter()));
    CHECK(c.echo.at("experiments").at("shadow").at("trials") == 10);
    CHECK(c.echo.at("rng_seed").is_number_unsigned());
    CHECK(c.output_dir == "dynkit_out");
}

TEST_CASE("config errors name the field")
{
    CHECK(message_of(Json::object()).find("map") != std::string::npos);
    CHECK(message_of({{"map", {{"name", "cat"}}}, {"grid", {{"depth", 13}}}}).find("depth") != std::string::npos);
    CHECK(message_of({{"map", {{"name", "cat"}}}, {"bogus", 1}}).find("bogus") != std::string::npos);
    CHECK(message_of({{"map", {{"name", "cat"}}}, {"eps", -1.0}}).find("eps") != std::string::npos);
    CHECK(message_of({{"map", {{"name", "nope"}}}}).find("nope") != std::string::npos);
    CHECK(message_of({{"map", {{"name", "cat"}}}, {"experiments", {{"shadow", {{"trials", "many"}}}}}})
              .find("trials") != std::string::npos);
    CHECK(message_of({{"map", {{"name", "standard"}, {"params", {{"K", 0.97}}}}}, {"rng_seed", -4}})
              .find("rng_seed") != std::string::npos);
}

TEST_CASE("polynomial config")
{
    const Json raw = {{"map",
                       {{"name", "polynomial"},
                        {"components", {{{{"c", 1.5}, {"p", {1}}}, {{"c", -0.5}, {"p", {3}}}}}}}},
                      {"grid", {{"lower", {-2.0}}, {"upper", {2.0}}, {"depth", 6}}},
                      {"eps_unit", "box_width"}};
    const Config c = parse_config(raw);
    CHECK(c.map->dimension() == 1);
    CHECK(c.eps == doctest::Approx(4.0 / 64));
    CHECK(c.map->evaluate(make_vec({1.0}))[0] == doctest::Approx(1.0));
}

TEST_CASE("empty config file")
{
    const auto dir = scratch("empty");
    std::ofstream(dir / "empty.json").close();
    CHECK_THROWS_AS(load_json_file(dir / "empty.json"), ConfigError);
    std::string err;
    const int code = run_main({"cr", "--config", (dir / "empty.json").string()}, nullptr, &err);
    CHECK(code == kExitValidation);
    CHECK(err.find("map") != std::string::npos);
}

TEST_CASE("boxset json round trip")
{
    BoxSet s(100);
    for (std::uint32_t i : {1u, 2u, 3u, 10u, 99u}) s.insert(i);
    const Json j = boxset_json(s);
    CHECK(j.at("count") == 5);
    CHECK(j.at("runs").size() == 3);
    CHECK(boxset_from_json(j, 100) == s);
}

TEST_CASE("svg plot")
{
    SvgPlot plot(Domain::unit_torus(2));
    const Grid grid(Domain::unit_torus(2), {2, 2});
    plot.add_boxes(grid, BoxSet::full(grid.box_count()), 0);
    plot.add_polyline({make_vec({0.9, 0.5}), make_vec({1.1, 0.5})}, 1);
    plot.add_markers({make_vec({0.5, 0.5})}, 2);
    CHECK(plot.element_count() >= 16 + 2 + 1);
    const std::string svg = plot.str();
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK_THROWS_AS(SvgPlot(Domain(make_vec({0.0}), make_vec({1.0}))), Error);
}

TEST_CASE("run writes a deterministic report")
{
    const auto dir = scratch("run");
    const Json raw = {{"map", {{"name", "cat"}}}, {"grid", {{"depth", 4}}}};
    RunOptions a;
    a.out_dir = dir / "a";
    RunOptions b;
    b.out_dir = dir / "b";
    b.threads = 2;
    const RunOutcome ra = run("cr", raw, a);
    const RunOutcome rb = run("cr", raw, b);
    CHECK(ra.exit_code == kExitOk);
    CHECK(ra.report.at("results").at("cr").at("chain_recurrent_fraction") == 1.0);
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream f(p, std::ios::binary);
        std::stringstream s;
        s << f.rdbuf();
        return s.str();
    };
    CHECK(slurp(dir / "a" / "report.json") == slurp(dir / "b" / "report.json"));
    CHECK(std::filesystem::exists(dir / "a" / "timings.json"));
    CHECK(std::filesystem::exists(dir / "a" / "cr.svg"));
}

TEST_CASE("command line validation")
{
    const auto dir = scratch("cmd");
    {
        std::ofstream f(dir / "cat.json");
        f << R"({"map": {"name": "cat"}, "grid": {"depth": 3}})";
    }
    std::string err;
    CHECK(run_main({"frobnicate", "--config", (dir / "cat.json").string()}, nullptr, &err) == kExitValidation);
    CHECK(run_main({"cr"}, nullptr, &err) == kExitValidation);
    CHECK(run_main({"cr", "--config", (dir / "missing.json").string()}, nullptr, &err) == kExitValidation);
    CHECK(run_main({"cr", "--config", (dir / "cat.json").string(), "--out", (dir / "out").string(), "--seed", "5"}) ==
          kExitOk);
    std::ifstream f(dir / "out" / "report.json");
    const Json report = Json::parse(f);
    CHECK(report.at("config").at("rng_seed") == 5);
    CHECK(report.at("subcommand") == "cr");
}
