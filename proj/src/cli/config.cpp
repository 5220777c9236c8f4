#include "dynkit/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace dynkit::cli {

namespace {

const char* type_name(const Json& j)
{
    if (j.is_number()) return "number";
    if (j.is_boolean()) return "boolean";
    if (j.is_string()) return "string";
    if (j.is_array()) return "array";
    if (j.is_object()) return "object";
    return "null";
}

bool same_kind(const Json& value, const Json& fallback)
{
    if (fallback.is_null()) return true;  // free-form, checked by the caller
    if (fallback.is_number()) return value.is_number();
    return std::string(type_name(value)) == type_name(fallback);
}

/// Overlays `user` on `defaults`; keys must exist in `defaults` and keep
/// their JSON type.
Json merge_section(const Json& defaults, const Json& user, const std::string& path)
{
    if (!user.is_object()) throw ConfigError(path + ": expected an object");
    Json out = defaults;
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string field = path.empty() ? it.key() : path + "." + it.key();
        if (!defaults.contains(it.key())) throw ConfigError("unknown key: " + field);
        if (!same_kind(it.value(), defaults.at(it.key())))
            throw ConfigError(field + ": expected " + type_name(defaults.at(it.key())) + ", got " +
                              type_name(it.value()));
        out[it.key()] = it.value();
    }
    return out;
}

void require_positive(const Json& section, const std::string& path, std::initializer_list<const char*> keys)
{
    for (const char* k : keys) {
        const Json& v = section.at(k);
        if (v.is_null()) continue;
        if (!(v.get<double>() > 0.0)) throw ConfigError(path + "." + k + ": must be > 0");
    }
}

void require_min(const Json& section, const std::string& path, const char* key, long minimum)
{
    const Json& v = section.at(key);
    if (!v.is_number_integer() || v.get<long>() < minimum)
        throw ConfigError(path + "." + key + ": must be an integer >= " + std::to_string(minimum));
}

void require_number_list(const Json& v, const std::string& field, bool positive)
{
    if (v.is_null()) return;
    if (!v.is_array() || v.empty()) throw ConfigError(field + ": expected a non-empty array of numbers");
    for (const Json& x : v) {
        if (!x.is_number()) throw ConfigError(field + ": expected numbers");
        if (positive && !(x.get<double>() > 0.0)) throw ConfigError(field + ": entries must be > 0");
    }
}

void require_choice(const Json& section, const std::string& path, const char* key,
                    std::initializer_list<const char*> choices)
{
    const std::string v = section.at(key).get<std::string>();
    for (const char* c : choices) {
        if (v == c) return;
    }
    std::string list;
    for (const char* c : choices) list += std::string(list.empty() ? "" : ", ") + c;
    throw ConfigError(path + "." + key + ": must be one of " + list);
}

bool is_torus_map(const std::string& name) { return name == "cat" || name == "standard" || name == "rotation"; }

MapPtr build_polynomial(const Json& m, const Domain& window, std::uint64_t seed)
{
    PolynomialSpec spec;
    const Json& comps = m.at("components");
    if (!comps.is_array() || static_cast<int>(comps.size()) != window.dimension())
        throw ConfigError("map.components: need one term list per grid axis");
    for (std::size_t i = 0; i < comps.size(); ++i) {
        const std::string where = "map.components[" + std::to_string(i) + "]";
        if (!comps[i].is_array()) throw ConfigError(where + ": expected an array of terms");
        std::vector<PolynomialTerm> terms;
        for (const Json& t : comps[i]) {
            const Json term = merge_section(Json{{"c", 0.0}, {"p", Json::array()}}, t, where);
            PolynomialTerm pt;
            pt.coefficient = term.at("c").get<double>();
            const Json& p = term.at("p");
            if (static_cast<int>(p.size()) > window.dimension()) throw ConfigError(where + ".p: too many powers");
            for (std::size_t k = 0; k < p.size(); ++k) {
                if (!p[k].is_number_integer() || p[k].get<int>() < 0) throw ConfigError(where + ".p: need integers >= 0");
                pt.powers[k] = p[k].get<int>();
            }
            terms.push_back(pt);
        }
        spec.components.push_back(std::move(terms));
    }
    spec.window = window;
    spec.volume_preserving = m.at("volume_preserving").get<bool>();
    if (!m.at("lipschitz").is_null()) spec.lipschitz_bound = m.at("lipschitz").get<double>();
    try {
        return make_polynomial(spec, seed);
    } catch (const Error& e) {
        throw ConfigError(std::string("map: ") + e.what());
    }
}

}  // namespace

Json load_json_file(const std::filesystem::path& path)
{
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file: " + path.string());
    std::stringstream buf;
    buf << f.rdbuf();
    const std::string text = buf.str();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw ConfigError("missing field: map (config is empty)");
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
}

Vec json_vec(const Json& j, int dimension, const std::string& field)
{
    if (!j.is_array() || static_cast<int>(j.size()) != dimension)
        throw ConfigError(field + ": expected an array of " + std::to_string(dimension) + " numbers");
    Vec v(dimension);
    for (int i = 0; i < dimension; ++i) {
        if (!j[static_cast<std::size_t>(i)].is_number()) throw ConfigError(field + ": expected numbers");
        v[i] = j[static_cast<std::size_t>(i)].get<double>();
    }
    return v;
}

Json vec_json(const Vec& v)
{
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Json default_experiments()
{
    return Json{
        {"graph", {{"dump_adjacency", false}, {"soundness_samples", 1000}}},
        {"cr", {{"nonwandering", false}, {"n_max", 64}}},
        {"components", {{"chain_pairs", 4}}},
        {"attractors",
         {{"seeds", "components"},
          {"samples", 1000},
          {"steps", 50},
          {"region", nullptr},
          {"pullback_steps", 1000},
          {"pullback_samples", 2}}},
        {"conley-verify", {{"seeds", "all_boxes"}}},
        {"strong-cr", {{"eps_fn", "constant"}, {"c", 0.1}, {"points", 16}, {"max_len", 512}}},
        {"escape", {{"k_lower", nullptr}, {"k_upper", nullptr}, {"radius", 10.0}, {"n_max", 20}, {"samples", 1000}}},
        {"shadow",
         {{"delta", 1e-4},
          {"steps", 100},
          {"eps", 1e-2},
          {"resolution", 1e-3},
          {"trials", 10},
          {"noise", "uniform_ball"},
          {"start", nullptr},
          {"profile_deltas", nullptr},
          {"max_seeds", 10000},
          {"shooting", true}}},
        {"splice",
         {{"q", nullptr},
          {"x0", nullptr},
          {"delta", 1e-3},
          {"n_back", 30},
          {"n_forward", 30},
          {"budget", 10000},
          {"eps", 1e-4},
          {"resolution", 1e-5},
          {"shooting", true}}},
        {"manifolds",
         {{"period", 1},
          {"tol_fix", 1e-10},
          {"tol_hyp", 1e-6},
          {"search_depth", 4},
          {"anchor", nullptr},
          {"arclength", 10.0},
          {"max_seg", 0.01}}},
        {"homoclinic", {{"arclength", 10.0}, {"tol_int", 1e-10}, {"min_angle", 1e-3}}},
        {"accumulate",
         {{"q_arclength", 0.3}, {"radii", {0.1, 0.03, 0.01}}, {"schedule", {5.0, 10.0, 20.0}}, {"tol_int", 1e-10}}},
    };
}

Config parse_config(const Json& raw)
{
    if (!raw.is_object()) throw ConfigError("config must be a JSON object");
    if (!raw.contains("map")) throw ConfigError("missing field: map");

    const Json top_defaults = {
        {"map", Json::object()},
        {"grid", Json::object()},
        {"eps", 1.0},
        {"eps_unit", "box_diameter"},
        {"rng_seed", 0},
        {"threads", 0},
        {"output_dir", "dynkit_out"},
        {"experiments", Json::object()},
    };
    Json echo = merge_section(top_defaults, raw, "");

    Json map_cfg = merge_section(
        Json{{"name", ""}, {"params", Json::object()}, {"components", nullptr}, {"lipschitz", nullptr},
             {"volume_preserving", false}},
        echo.at("map"), "map");
    const std::string name = map_cfg.at("name").get<std::string>();
    if (name.empty()) throw ConfigError("missing field: map.name");
    std::map<std::string, double> params;
    for (auto it = map_cfg.at("params").begin(); it != map_cfg.at("params").end(); ++it) {
        if (!it.value().is_number()) throw ConfigError("map.params." + it.key() + ": expected number");
        params[it.key()] = it.value().get<double>();
    }
    if (name != "polynomial" && !map_cfg.at("components").is_null())
        throw ConfigError("map.components: only valid for the polynomial map");
    if (!map_cfg.at("lipschitz").is_null() && !(map_cfg.at("lipschitz").get<double>() > 0.0))
        throw ConfigError("map.lipschitz: must be > 0");

    Config cfg;
    const Json& seed = echo.at("rng_seed");
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0))
        throw ConfigError("rng_seed: must be an unsigned integer");
    cfg.rng_seed = seed.get<std::uint64_t>();
    echo["rng_seed"] = cfg.rng_seed;
    if (!echo.at("threads").is_number_integer() || echo.at("threads").get<int>() < 0)
        throw ConfigError("threads: must be an integer >= 0");
    cfg.threads = echo.at("threads").get<int>();
    cfg.output_dir = echo.at("output_dir").get<std::string>();

    // Grid window: explicit bounds, else the map's own window.
    Json grid_cfg = merge_section(
        Json{{"lower", nullptr}, {"upper", nullptr}, {"periodic", nullptr}, {"depth", nullptr}}, echo.at("grid"), "grid");
    std::optional<Domain> window;
    if (!grid_cfg.at("lower").is_null() || !grid_cfg.at("upper").is_null()) {
        if (grid_cfg.at("lower").is_null() || grid_cfg.at("upper").is_null())
            throw ConfigError("grid: lower and upper must be given together");
        const int d = static_cast<int>(grid_cfg.at("lower").size());
        if (d < 1 || d > kMaxDimension) throw ConfigError("grid.lower: dimension must be 1, 2 or 3");
        const Vec lo = json_vec(grid_cfg.at("lower"), d, "grid.lower");
        const Vec hi = json_vec(grid_cfg.at("upper"), d, "grid.upper");
        std::array<bool, kMaxDimension> periodic{};
        if (!grid_cfg.at("periodic").is_null()) {
            const Json& p = grid_cfg.at("periodic");
            if (!p.is_array() || static_cast<int>(p.size()) != d) throw ConfigError("grid.periodic: one boolean per axis");
            for (int i = 0; i < d; ++i) {
                if (!p[static_cast<std::size_t>(i)].is_boolean()) throw ConfigError("grid.periodic: expected booleans");
                periodic[static_cast<std::size_t>(i)] = p[static_cast<std::size_t>(i)].get<bool>();
            }
        }
        try {
            window = Domain(lo, hi, periodic);
        } catch (const Error& e) {
            throw ConfigError(std::string("grid: ") + e.what());
        }
    } else if (!grid_cfg.at("periodic").is_null()) {
        throw ConfigError("grid.periodic: needs grid.lower and grid.upper");
    }

    try {
        if (name == "polynomial") {
            if (!window) throw ConfigError("missing field: grid.lower (the polynomial map needs a window)");
            if (map_cfg.at("components").is_null()) throw ConfigError("missing field: map.components");
            cfg.map = build_polynomial(map_cfg, *window, cfg.rng_seed);
        } else if (is_torus_map(name)) {
            cfg.map = make_registry_map(name, params);
            if (window && !(*window == cfg.map->domain()))
                throw ConfigError("grid: the " + name + " map lives on its own torus; omit grid.lower/upper");
        } else {
            cfg.map = make_registry_map(name, params, window);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("map: ") + e.what());
    }
    if (!map_cfg.at("lipschitz").is_null() && name != "polynomial")
        throw ConfigError("map.lipschitz: registry maps carry exact bounds");

    const Domain& dom = cfg.map->domain();
    const int d = dom.dimension();
    std::vector<int> depth(static_cast<std::size_t>(d), 6);
    if (!grid_cfg.at("depth").is_null()) {
        const Json& dj = grid_cfg.at("depth");
        if (dj.is_number_integer()) {
            depth.assign(static_cast<std::size_t>(d), dj.get<int>());
        } else if (dj.is_array() && static_cast<int>(dj.size()) == d) {
            for (int i = 0; i < d; ++i) {
                if (!dj[static_cast<std::size_t>(i)].is_number_integer()) throw ConfigError("grid.depth: expected integers");
                depth[static_cast<std::size_t>(i)] = dj[static_cast<std::size_t>(i)].get<int>();
            }
        } else {
            throw ConfigError("grid.depth: expected an integer or one integer per axis");
        }
    }
    for (int k : depth) {
        if (k < 0 || k > Grid::kMaxDepth) throw ConfigError("grid.depth: must lie in [0, 12]");
    }
    cfg.grid = Grid(dom, depth);

    grid_cfg["lower"] = vec_json(dom.lower());
    grid_cfg["upper"] = vec_json(dom.upper());
    grid_cfg["periodic"] = Json::array();
    for (int i = 0; i < d; ++i) grid_cfg["periodic"].push_back(dom.periodic(i));
    grid_cfg["depth"] = depth;
    echo["grid"] = grid_cfg;
    echo["map"] = map_cfg;

    require_positive(echo, "", {"eps"});
    const std::string unit = echo.at("eps_unit").get<std::string>();
    if (unit == "absolute") {
        cfg.eps = echo.at("eps").get<double>();
    } else if (unit == "box_diameter") {
        cfg.eps = echo.at("eps").get<double>() * cfg.grid.box_diameter();
    } else if (unit == "box_width") {
        cfg.eps = echo.at("eps").get<double>() * cfg.grid.box_width().maxCoeff();
    } else {
        throw ConfigError("eps_unit: must be one of absolute, box_diameter, box_width");
    }

    // Experiments.
    const Json defaults = default_experiments();
    if (!echo.at("experiments").is_object()) throw ConfigError("experiments: expected an object");
    Json ex = defaults;
    for (auto it = echo.at("experiments").begin(); it != echo.at("experiments").end(); ++it) {
        if (!defaults.contains(it.key())) throw ConfigError("unknown key: experiments." + it.key());
        ex[it.key()] = merge_section(defaults.at(it.key()), it.value(), "experiments." + it.key());
    }
    const std::string p = "experiments.";
    require_min(ex["graph"], p + "graph", "soundness_samples", 0);
    require_min(ex["cr"], p + "cr", "n_max", 1);
    require_min(ex["components"], p + "components", "chain_pairs", 0);
    require_choice(ex["attractors"], p + "attractors", "seeds", {"components", "all_boxes"});
    require_min(ex["attractors"], p + "attractors", "samples", 0);
    require_min(ex["attractors"], p + "attractors", "steps", 1);
    require_min(ex["attractors"], p + "attractors", "pullback_steps", 0);
    require_min(ex["attractors"], p + "attractors", "pullback_samples", 1);
    if (const Json& r = ex["attractors"]["region"]; !r.is_null()) {
        const Json region = merge_section(Json{{"kind", ""}, {"n", 0.0}}, r, p + "attractors.region");
        if (region.at("kind") != "translation_u0") throw ConfigError(p + "attractors.region.kind: must be translation_u0");
        ex["attractors"]["region"] = region;
    }
    require_choice(ex["conley-verify"], p + "conley-verify", "seeds", {"components", "all_boxes"});
    require_choice(ex["strong-cr"], p + "strong-cr", "eps_fn", {"constant", "radial"});
    require_positive(ex["strong-cr"], p + "strong-cr", {"c"});
    require_min(ex["strong-cr"], p + "strong-cr", "points", 1);
    require_min(ex["strong-cr"], p + "strong-cr", "max_len", 1);
    require_positive(ex["escape"], p + "escape", {"radius"});
    require_min(ex["escape"], p + "escape", "n_max", 0);
    require_min(ex["escape"], p + "escape", "samples", 1);
    if (ex["escape"]["k_lower"].is_null() != ex["escape"]["k_upper"].is_null())
        throw ConfigError(p + "escape: k_lower and k_upper must be given together");
    if (!ex["escape"]["k_lower"].is_null()) {
        json_vec(ex["escape"]["k_lower"], d, p + "escape.k_lower");
        json_vec(ex["escape"]["k_upper"], d, p + "escape.k_upper");
    }
    require_positive(ex["shadow"], p + "shadow", {"delta", "eps", "resolution"});
    require_min(ex["shadow"], p + "shadow", "steps", 1);
    require_min(ex["shadow"], p + "shadow", "trials", 1);
    require_min(ex["shadow"], p + "shadow", "max_seeds", 1);
    require_choice(ex["shadow"], p + "shadow", "noise", {"uniform_ball", "constant_drift"});
    if (!ex["shadow"]["start"].is_null()) json_vec(ex["shadow"]["start"], d, p + "shadow.start");
    require_number_list(ex["shadow"]["profile_deltas"], p + "shadow.profile_deltas", false);
    if (!ex["shadow"]["profile_deltas"].is_null()) {
        for (const Json& x : ex["shadow"]["profile_deltas"]) {
            if (x.get<double>() < 0.0) throw ConfigError(p + "shadow.profile_deltas: entries must be >= 0");
        }
    }
    require_positive(ex["splice"], p + "splice", {"delta", "eps", "resolution"});
    require_min(ex["splice"], p + "splice", "n_back", 0);
    require_min(ex["splice"], p + "splice", "n_forward", 0);
    require_min(ex["splice"], p + "splice", "budget", 0);
    if (ex["splice"]["q"].is_null() != ex["splice"]["x0"].is_null())
        throw ConfigError(p + "splice: q and x0 must be given together");
    if (!ex["splice"]["q"].is_null()) {
        json_vec(ex["splice"]["q"], d, p + "splice.q");
        json_vec(ex["splice"]["x0"], d, p + "splice.x0");
    }
    require_min(ex["manifolds"], p + "manifolds", "period", 1);
    require_positive(ex["manifolds"], p + "manifolds", {"tol_fix", "tol_hyp", "arclength", "max_seg"});
    require_min(ex["manifolds"], p + "manifolds", "search_depth", 0);
    if (ex["manifolds"]["search_depth"].get<int>() > Grid::kMaxDepth)
        throw ConfigError(p + "manifolds.search_depth: must lie in [0, 12]");
    if (!ex["manifolds"]["anchor"].is_null()) json_vec(ex["manifolds"]["anchor"], d, p + "manifolds.anchor");
    require_positive(ex["homoclinic"], p + "homoclinic", {"arclength", "tol_int", "min_angle"});
    require_positive(ex["accumulate"], p + "accumulate", {"q_arclength", "tol_int"});
    require_number_list(ex["accumulate"]["radii"], p + "accumulate.radii", true);
    require_number_list(ex["accumulate"]["schedule"], p + "accumulate.schedule", true);
    echo["experiments"] = ex;

    cfg.echo = std::move(echo);
    return cfg;
}

}  // namespace dynkit::cli
