#include "dynkit/cli/experiments.hpp"

#include "dynkit/cli/plot.hpp"
#include "dynkit/cli/report.hpp"
#include "dynkit/rng.hpp"
#include "dynkit/shadowing.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace dynkit::cli {

namespace {

// Sub-stream ids, so that experiments draw independent random numbers.
enum Stream : std::uint64_t {
    kSoundness = 1,
    kChainPairs,
    kInvariance,
    kStrong,
    kEscape,
    kShadow,
    kProfile,
    kRegion,
    kVolume,
};

Json double_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

std::string polyline_csv(const std::vector<Vec>& points)
{
    static constexpr const char* names[] = {"x", "y", "z"};
    std::ostringstream out;
    out << "index";
    const int d = points.empty() ? 2 : static_cast<int>(points.front().size());
    for (int i = 0; i < d; ++i) out << ',' << names[i];
    out << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < points.size(); ++i) {
        out << i;
        for (int k = 0; k < d; ++k) out << ',' << points[i][k];
        out << '\n';
    }
    return out.str();
}

Json hyperbolic_json(const HyperbolicPoint& hp)
{
    Json ev = Json::array();
    for (const auto& z : hp.eigenvalues) ev.push_back({z.real(), z.imag()});
    Json vecs = Json::array();
    if (hp.real_spectrum) {
        for (Eigen::Index k = 0; k < hp.eigenvectors.cols(); ++k) vecs.push_back(vec_json(hp.eigenvectors.col(k)));
    }
    return Json{{"point", vec_json(hp.point)},
                {"period", hp.period},
                {"eigenvalues", ev},
                {"eigenvectors", vecs},
                {"real_spectrum", hp.real_spectrum},
                {"is_hyperbolic", hp.is_hyperbolic},
                {"fixed_residual", hp.fixed_residual},
                {"eigen_residual", hp.eigen_residual}};
}

Json hit_json(const HomoclinicHit& h)
{
    return Json{{"point", vec_json(h.point)},
                {"t_unstable", h.t_unstable},
                {"t_stable", h.t_stable},
                {"s_unstable", h.s_unstable},
                {"s_stable", h.s_stable},
                {"angle", h.angle},
                {"distance_to_anchor", h.distance_to_anchor}};
}

Json shadow_json(const ShadowingResult& r)
{
    static constexpr const char* methods[] = {"grid", "descent", "shooting"};
    return Json{{"verdict", r.shadowed ? "Shadowed" : "NotShadowedAtResolution"},
                {"eps", r.eps},
                {"achieved_eps", r.achieved_eps},
                {"search_resolution", r.search_resolution},
                {"seed", vec_json(r.x)},
                {"seed_digits", r.seed_digits},
                {"method", methods[static_cast<int>(r.method)]},
                {"seeds_tried", r.seeds_tried}};
}

/// U_n of the translation example: {y < -1/(x - n), x < n} or {x >= n}.
bool in_translation_u(const Vec& p, double n) { return p[0] >= n || p[1] < -1.0 / (p[0] - n); }

/// Boxes meeting U_n; exact since U_n grows with x and shrinks with y.
BoxSet translation_u_boxes(const Grid& grid, double n)
{
    BoxSet u(grid.box_count());
    const Vec w = grid.box_width();
    for (std::uint32_t b = 0; b < grid.box_count(); ++b) {
        const Vec lo = grid.box_lower(BoxId{b});
        const double x1 = lo[0] + w[0];
        if (x1 >= n || lo[1] < 1.0 / (n - x1)) u.insert(b);
    }
    return u;
}

// --- experiments --------------------------------------------------------------

Json graph_experiment(Context& ctx)
{
    const Json& opt = ctx.config().experiment("graph");
    const TransitionGraph& g = ctx.graph();
    const GraphStats s = graph_stats(g);
    Json out{{"boxes", s.boxes},
             {"edges", s.edges},
             {"sink_edges", s.sink_edges},
             {"min_out", s.min_out},
             {"max_out", s.max_out},
             {"mean_out", s.mean_out},
             {"step_tolerance", g.step_tolerance()}};

    const int samples = opt.at("soundness_samples").get<int>();
    const Grid& grid = g.grid();
    const DynamicalMap& map = *g.map();
    Rng rng(Rng::derive(ctx.config().rng_seed, kSoundness));
    int violations = 0;
    for (int s = 0; s < samples; ++s) {
        const auto b = static_cast<std::uint32_t>(rng.below(grid.box_count()));
        const BoxGeometry box = grid.box_geometry(BoxId{b});
        const Vec x = rng.uniform_in(box.center - box.radius, box.center + box.radius);
        const Vec y = map.lift(x) + rng.uniform_in_ball(grid.dimension(), g.eps());
        const auto hit = grid.box_of_point(y);
        const bool ok = hit ? g.has_edge(b, hit->index) : g.reaches_sink(b);
        if (!ok) ++violations;
    }
    out["soundness"] = {{"samples", samples}, {"violations", violations}};
    ctx.check("graph_soundness", violations == 0, {{"violations", violations}});

    if (opt.at("dump_adjacency").get<bool>()) {
        std::ofstream f(ctx.file("adjacency.txt"), std::ios::binary);
        write_adjacency(g, f);
    }
    return out;
}

Json cr_experiment(Context& ctx)
{
    const Json& opt = ctx.config().experiment("cr");
    const TransitionGraph& g = ctx.graph();
    const SccResult& scc = ctx.scc();
    const BoxSet cr = chain_recurrent_boxes(g, scc);
    std::size_t nontrivial = 0;
    for (bool b : scc.nontrivial) nontrivial += b ? 1 : 0;
    Json out{{"chain_recurrent_boxes", boxset_json(cr)},
             {"chain_recurrent_count", cr.count()},
             {"chain_recurrent_fraction", static_cast<double>(cr.count()) / g.box_count()},
             {"scc_count", scc.component_count},
             {"nontrivial_components", nontrivial},
             {"chain_transitive", is_chain_transitive(g)}};

    if (opt.at("nonwandering").get<bool>()) {
        const int n_max = opt.at("n_max").get<int>();
        const TransitionGraph g0 = build_graph(g.grid(), g.map(), 0.0, ctx.threads());
        std::uint32_t returns = 0, no_return = 0;
        int max_step = 0;
        for (std::uint32_t b = 0; b < g0.box_count(); ++b) {
            const ReturnResult r = nonwandering_probe(g0, BoxId{b}, n_max);
            if (const auto* ok = std::get_if<ReturnsAt>(&r)) {
                ++returns;
                max_step = std::max(max_step, ok->step);
            } else {
                ++no_return;
            }
        }
        out["nonwandering"] = {{"n_max", n_max}, {"returns", returns}, {"no_return", no_return}, {"max_return_step", max_step}};
    }
    if (ctx.plots_enabled()) {
        SvgPlot plot(g.grid().domain());
        plot.add_boxes(g.grid(), cr, 0);
        plot.write(ctx.file("cr.svg"));
    }
    return out;
}

Json components_experiment(Context& ctx)
{
    const Json& opt = ctx.config().experiment("components");
    const TransitionGraph& g = ctx.graph();
    const std::vector<ChainComponent> comps = chain_components(g, ctx.scc());
    Json list = Json::array();
    for (const auto& c : comps) list.push_back({{"id", c.id}, {"size", c.members.count()}, {"members", boxset_json(c.members)}});

    const DynamicalMap& map = *g.map();
    const Domain& dom = g.grid().domain();
    Rng rng(Rng::derive(ctx.config().rng_seed, kChainPairs));
    Json chains = Json::array();
    bool all_valid = true;
    for (int i = 0; i < opt.at("chain_pairs").get<int>(); ++i) {
        const Vec p = rng.uniform_in(dom.lower(), dom.upper());
        const Vec q = rng.uniform_in(dom.lower(), dom.upper());
        const auto chain = find_eps_chain(g, p, q);
        Json row{{"p", vec_json(p)}, {"q", vec_json(q)}, {"found", chain.has_value()}};
        if (chain) {
            const bool valid = validate_chain(map, *chain);
            all_valid = all_valid && valid;
            row["length"] = chain->length();
            row["threshold"] = chain->eps.front();
            row["valid"] = valid;
        }
        chains.push_back(row);
    }
    ctx.check("eps_chains_validate", all_valid);

    if (ctx.plots_enabled()) {
        SvgPlot plot(dom);
        for (std::size_t i = 0; i < comps.size(); ++i) plot.add_boxes(g.grid(), comps[i].members, static_cast<int>(i));
        plot.write(ctx.file("components.svg"));
    }
    return Json{{"count", comps.size()}, {"components", list}, {"chains", chains}};
}

Json attractors_experiment(Context& ctx)
{
    const Json& opt = ctx.config().experiment("attractors");
    const TransitionGraph& g = ctx.graph();
    const std::vector<AttractorRecord>& records = ctx.attractors();
    Json list = Json::array();
    for (std::size_t i = 0; i < records.size(); ++i) {
        const AttractorRecord& r = records[i];
        const bool nested = r.attractor.subset_of(r.block) && r.block.subset_of(r.basin);
        const bool fixpoint = image(g, r.attractor) == r.attractor;
        const bool bounded_iterations = r.iterations_to_fixpoint <= static_cast<int>(g.box_count());
        const std::string tag = "attractor[" + std::to_string(i) + "]";
        ctx.check(tag + ".nested", nested);
        ctx.check(tag + ".fixpoint", fixpoint && bounded_iterations);
        ctx.check(tag + ".invariant", r.invariant);
        ctx.check(tag + ".orbit_disjoint", r.orbit_disjoint);
        ctx.check(tag + ".boundary_forward_invariant", r.boundary_forward_invariant);
        list.push_back({{"block", boxset_json(r.block)},
                        {"attractor", boxset_json(r.attractor)},
                        {"basin", boxset_json(r.basin)},
                        {"strict_basin", boxset_json(r.strict_basin)},
                        {"basin_is_lower_bound", true},
                        {"iterations_to_fixpoint", r.iterations_to_fixpoint},
                        {"flags",
                         {{"invariant", r.invariant},
                          {"orbit_disjoint", r.orbit_disjoint},
                          {"boundary_forward_invariant", r.boundary_forward_invariant}}}});
    }
    Json out{{"seeds", opt.at("seeds")}, {"count", records.size()}, {"records", list}};

    SvgPlot* plot_ptr = nullptr;
    std::optional<SvgPlot> plot;
    if (ctx.plots_enabled()) {
        plot.emplace(g.grid().domain());
        plot_ptr = &*plot;
        for (std::size_t i = 0; i < records.size(); ++i) plot->add_boxes(g.grid(), records[i].attractor, static_cast<int>(i));
    }

    if (const Json& region = opt.at("region"); !region.is_null()) {
        const double n = region.at("n").get<double>();
        const DynamicalMap& map = *g.map();
        const Grid& grid = g.grid();
        if (map.spec().name != "translation") throw ConfigError("experiments.attractors.region: needs the translation map");
        const BoxSet u = translation_u_boxes(grid, n);

        // cl(f(U)) inside U, on sampled points of the truncation.
        Rng rng(Rng::derive(ctx.config().rng_seed, kRegion));
        int tried = 0, violations = 0;
        for (int s = 0; s < opt.at("samples").get<int>() * 20 && tried < opt.at("samples").get<int>(); ++s) {
            const Vec p = rng.uniform_in(grid.domain().lower(), grid.domain().upper());
            if (!in_translation_u(p, n)) continue;
            ++tried;
            if (!in_translation_u(map.lift(p), n)) ++violations;
        }
        int iterations = 0;
        const BoxSet a_graph = attractor_from_block(g, u, &iterations);
        const BoxSet a_pullback = attractor_from_region(
            map, grid, [n](const Vec& z) { return in_translation_u(z, n); }, opt.at("pullback_steps").get<int>(),
            opt.at("pullback_samples").get<int>());
        BoxSet lower(grid.box_count());
        for (std::uint32_t b = 0; b < grid.box_count(); ++b) {
            if (grid.box_lower(BoxId{b})[1] <= 0.0) lower.insert(b);
        }
        ctx.check("region.block_on_samples", violations == 0, {{"violations", violations}});
        ctx.check("region.graph_attractor_below_axis", a_graph.subset_of(lower));
        ctx.check("region.pullback_attractor_below_axis", a_pullback.subset_of(lower));
        out["region"] = {{"kind", region.at("kind")},
                         {"n", n},
                         {"block", boxset_json(u)},
                         {"block_samples", tried},
                         {"block_violations", violations},
                         {"graph_attractor", boxset_json(a_graph)},
                         {"graph_iterations", iterations},
                         {"pullback_attractor", boxset_json(a_pullback)},
                         {"pullback_steps", opt.at("pullback_steps")},
                         {"boxes_meeting_lower_half_plane", lower.count()},
                         {"pullback_equals_lower_half_plane", a_pullback == lower}};
        if (plot_ptr) plot_ptr->add_boxes(grid, a_pullback, static_cast<int>(records.size()));
    }
    if (plot) plot->write(ctx.file("attractors.svg"));
    return out;
}

Json conley_experiment(Context& ctx)
{
    const Json& opt = ctx.config().experiment("conley-verify");
    const TransitionGraph& g = ctx.graph();
    const BlockSeeds seeds = opt.at("seeds") == "components" ? BlockSeeds::components : BlockSeeds::all_boxes;
    const ConleyReport r = verify_conley_decomposition(g, find_attractor_blocks(g, seeds));
    // With escaped mass the window is not compact and the identity is not claimed.
    const bool applies = !r.sink_present;
    if (applies) ctx.check("conley_identity", r.holds(), {{"symmetric_difference", r.symmetric_difference()}});
    return Json{{"seeds", opt.at("seeds")},
                {"blocks", r.blocks},
                {"sink_present", r.sink_present},
                {"identity_applies", applies},
                {"lhs_count", r.lhs_count},
                {"rhs_count", r.rhs_count},
                {"lhs_minus_rhs", r.lhs_minus_rhs},
                {"rhs_minus_lhs", r.rhs_minus_lhs},
                {"symmetric_difference", r.symmetric_difference()},
                {"holds", r.holds()},
                {"failing_direction", r.failing_direction()},
                {"lhs", boxset_json(r.lhs)},
                {"rhs", boxset_json(r.rhs)}};
}

Json strong_cr_experiment(Context& ctx)
{
    const Json& opt = ctx.config().experiment("strong-cr");
    const DynamicalMap& map = *ctx.config().map;
    const Grid& grid = ctx.config().grid;
    const double c = opt.at("c").get<double>();
    const EpsFunction fn = opt.at("eps_fn") == "constant" ? EpsFunction::constant(c) : EpsFunction::radial(c);
    Rng rng(Rng::derive(ctx.config().rng_seed, kStrong));
    Json rows = Json::array();
    int found = 0;
    bool valid = true;
    for (int i = 0; i < opt.at("points").get<int>(); ++i) {
        const Vec p = rng.uniform_in(grid.domain().lower(), grid.domain().upper());
        const auto chain = strong_chain_search(map, p, fn, grid, opt.at("max_len").get<int>());
        Json row{{"p", vec_json(p)}, {"found", chain.has_value()}};
        if (chain) {
            ++found;
            row["length"] = chain->length();
            valid = valid && validate_chain(map, *chain);
        }
        rows.push_back(row);
    }
    ctx.check("strong_chains_validate", valid);
    return Json{{"eps_fn", opt.at("eps_fn")}, {"c", c}, {"found", found}, {"points", rows}};
}

Json escape_experiment(Context& ctx)
{
    const Json& opt = ctx.config().experiment("escape");
    const Config& cfg = ctx.config();
    const Grid& grid = cfg.grid;
    BoxSet k(grid.box_count(), true);
    if (!opt.at("k_lower").is_null()) {
        const Vec lo = json_vec(opt.at("k_lower"), grid.dimension(), "experiments.escape.k_lower");
        const Vec hi = json_vec(opt.at("k_upper"), grid.dimension(), "experiments.escape.k_upper");
        k = BoxSet(grid.box_count());
        for (std::uint32_t b = 0; b < grid.box_count(); ++b) {
            const Vec c = grid.box_geometry(BoxId{b}).center;
            if ((c.array() >= lo.array()).all() && (c.array() < hi.array()).all()) k.insert(b);
        }
    }
    for (const auto& r : ctx.attractors()) k -= r.attractor;
    const VolumeReport vol = volume_check(*cfg.map, 1000, 1e-9, Rng::derive(cfg.rng_seed, kVolume));
    Json out{{"K", boxset_json(k)},
             {"radius", opt.at("radius")},
             {"n_max", opt.at("n_max")},
             {"samples", opt.at("samples")},
             {"volume_check", {{"max_deviation", vol.max_deviation}, {"pass", vol.pass}}}};
    if (k.empty()) {
        out["bounded_fraction"] = nullptr;
        out["note"] = "K is empty";
        return out;
    }
    out["bounded_fraction"] = escape_fraction(*cfg.map, grid, k, opt.at("radius").get<double>(),
                                              opt.at("n_max").get<int>(), opt.at("samples").get<int>(),
                                              Rng::derive(cfg.rng_seed, kEscape), ctx.threads());
    return out;
}

Json shadow_experiment(Context& ctx)
{
    const Json& opt = ctx.config().experiment("shadow");
    const Config& cfg = ctx.config();
    const DynamicalMap& map = *cfg.map;
    const double delta = opt.at("delta").get<double>();
    const double eps = opt.at("eps").get<double>();
    const int steps = opt.at("steps").get<int>();
    const bool drift = opt.at("noise") == "constant_drift";
    ShadowOptions so;
    so.max_seeds = opt.at("max_seeds").get<int>();
    so.shooting = opt.at("shooting").get<bool>();
    so.threads = ctx.threads();

    Rng rng(Rng::derive(cfg.rng_seed, kShadow));
    Json trials = Json::array();
    int successes = 0;
    double worst = 0.0;
    bool consistent = true;
    for (int t = 0; t < opt.at("trials").get<int>(); ++t) {
        const Vec start = opt.at("start").is_null() ? rng.uniform_in(map.domain().lower(), map.domain().upper())
                                                    : json_vec(opt.at("start"), map.dimension(), "shadow.start");
        const std::uint64_t seed = rng.next();
        const PseudoOrbit po = drift ? drift_pseudo_orbit(map, start, delta, steps, seed)
                                     : random_pseudo_orbit(map, start, delta, steps, seed);
        const ShadowingResult r = shadow_search(map, po, eps, opt.at("resolution").get<double>(), so);
        successes += r.shadowed ? 1 : 0;
        worst = std::max(worst, r.achieved_eps);
        consistent = consistent && (!r.shadowed || r.achieved_eps <= eps);
        Json row = shadow_json(r);
        row["start"] = vec_json(start);
        row["length"] = po.length();
        trials.push_back(row);
        if (t == 0) {
            std::ofstream f(ctx.file("pseudo_orbit.csv"), std::ios::binary);
            write_pseudo_orbit_csv(map, po.points, f);
            if (ctx.plots_enabled()) {
                SvgPlot plot(map.domain());
                plot.add_cloud(po.points, 0);
                plot.write(ctx.file("pseudo_orbit.svg"));
            }
        }
    }
    ctx.check("shadowing_verdicts_consistent", consistent);
    Json out{{"delta", delta},
             {"eps", eps},
             {"steps", steps},
             {"noise", opt.at("noise")},
             {"successes", successes},
             {"success_fraction", static_cast<double>(successes) / opt.at("trials").get<int>()},
             {"worst_achieved_eps", worst},
             {"trials", trials}};

    if (!opt.at("profile_deltas").is_null()) {
        ProfileOptions po;
        po.steps = steps;
        po.resolution = opt.at("resolution").get<double>();
        po.noise = drift ? NoiseKind::constant_drift : NoiseKind::uniform_ball;
        if (!opt.at("start").is_null()) po.start = json_vec(opt.at("start"), map.dimension(), "shadow.start");
        po.threads = ctx.threads();
        const auto rows = shadowing_profile(map, opt.at("profile_deltas").get<std::vector<double>>(), eps,
                                            opt.at("trials").get<int>(), Rng::derive(cfg.rng_seed, kProfile), po);
        Json table = Json::array();
        for (const auto& r : rows) {
            table.push_back({{"delta", r.delta},
                             {"trials", r.trials},
                             {"successes", r.successes},
                             {"success_fraction", r.success_fraction},
                             {"worst_achieved_eps", r.worst_achieved_eps}});
        }
        out["profile"] = table;
    }
    return out;
}

Json splice_experiment(Context& ctx)
{
    const Json& opt = ctx.config().experiment("splice");
    const DynamicalMap& map = *ctx.config().map;
    const double delta = opt.at("delta").get<double>();
    Vec q, x0;
    Json out;
    if (!opt.at("q").is_null()) {
        q = json_vec(opt.at("q"), map.dimension(), "splice.q");
        x0 = json_vec(opt.at("x0"), map.dimension(), "splice.x0");
    } else {
        const auto hp = ctx.anchor();
        q = map.wrap(hp->point + 0.7 * delta * Vec(hp->eigenvectors.col(0)));
        x0 = map.wrap(hp->point + 0.7 * delta * Vec(hp->eigenvectors.col(hp->eigenvectors.cols() - 1)));
        out["anchor"] = vec_json(hp->point);
    }
    out["q"] = vec_json(q);
    out["x0"] = vec_json(x0);
    out["delta"] = delta;
    SpliceOptions sp;
    sp.budget = opt.at("budget").get<int>();
    sp.n_back = opt.at("n_back").get<int>();
    sp.n_forward = opt.at("n_forward").get<int>();
    PseudoOrbit po;
    try {
        po = splice_pseudo_orbit(map, q, x0, delta, sp);
    } catch (const NoApproach& e) {
        out["no_approach"] = true;
        out["min_distance"] = e.min_distance();
        return out;
    }
    const std::vector<double> defects = step_defects(map, po.points);
    double max_defect = 0.0;
    for (double d : defects) max_defect = std::max(max_defect, d);
    ctx.check("splice_is_pseudo_orbit", max_defect < delta, {{"max_defect", max_defect}});

    ShadowOptions so;
    so.shooting = opt.at("shooting").get<bool>();
    so.threads = ctx.threads();
    const ShadowingResult r = shadow_search(map, po, opt.at("eps").get<double>(), opt.at("resolution").get<double>(), so);
    out["no_approach"] = false;
    out["n0"] = po.n0;
    out["n_back"] = po.n_back;
    out["junction"] = po.junction;
    out["length"] = po.length();
    out["max_defect"] = max_defect;
    out["shadowing"] = shadow_json(r);
    out["shadowing"]["trace"] = r.trace;
    {
        std::ofstream f(ctx.file("splice.csv"), std::ios::binary);
        write_pseudo_orbit_csv(map, po.points, f);
    }
    return out;
}

Json manifolds_experiment(Context& ctx)
{
    const Json& opt = ctx.config().experiment("manifolds");
    const MapPtr& map = ctx.config().map;
    const auto& points = ctx.periodic_points();
    Json list = Json::array();
    bool residuals_ok = true;
    for (const auto& hp : points) {
        list.push_back(hyperbolic_json(hp));
        residuals_ok = residuals_ok && hp.fixed_residual <= opt.at("tol_fix").get<double>() && hp.eigen_residual <= 1e-9;
    }
    ctx.check("periodic_point_residuals", residuals_ok);
    Json out{{"periodic_points", list}};
    const auto hp = ctx.anchor();
    out["anchor"] = hyperbolic_json(*hp);

    GrowOptions grow;
    grow.max_seg = opt.at("max_seg").get<double>();
    const double length = opt.at("arclength").get<double>();
    Json curves = Json::array();
    std::optional<SvgPlot> plot;
    if (ctx.plots_enabled()) plot.emplace(map->domain());
    int series = 0;
    for (ManifoldSide side : {ManifoldSide::unstable, ManifoldSide::stable}) {
        for (int branch : {1, -1}) {
            grow.branch = branch;
            const ManifoldPolyline poly = grow_manifold(map, *hp, side, length, grow);
            const std::string name = std::string(side == ManifoldSide::unstable ? "wu" : "ws") +
                                     (branch > 0 ? "_plus" : "_minus");
            double max_gap = 0.0;
            for (std::size_t i = 2; i < poly.vertices.size(); ++i)
                max_gap = std::max(max_gap, (poly.vertices[i] - poly.vertices[i - 1]).norm());
            curves.push_back({{"name", name},
                              {"vertices", poly.vertices.size()},
                              {"arclength", poly.length()},
                              {"max_segment", max_gap},
                              {"invariance_error", invariance_error(poly)},
                              {"eigenline_deviation", distance_from_eigenline(poly)},
                              {"file", name + ".csv"}});
            write_file(ctx.file(name + ".csv"), polyline_csv(poly.vertices));
            if (plot) plot->add_polyline(poly.vertices, series);
            ++series;
        }
    }
    out["curves"] = curves;
    if (plot) plot->write(ctx.file("manifolds.svg"));
    return out;
}

Json homoclinic_experiment(Context& ctx)
{
    const Json& opt = ctx.config().experiment("homoclinic");
    const MapPtr& map = ctx.config().map;
    const auto hp = ctx.anchor();
    const double length = opt.at("arclength").get<double>();
    GrowOptions grow;
    grow.max_seg = ctx.config().experiment("manifolds").at("max_seg").get<double>();
    const ManifoldPolyline wu = grow_manifold(map, *hp, ManifoldSide::unstable, length, grow);
    std::vector<HomoclinicHit> hits, near;
    std::vector<ManifoldPolyline> ws;
    for (int branch : {1, -1}) {
        grow.branch = branch;
        ws.push_back(grow_manifold(map, *hp, ManifoldSide::stable, length, grow));
        const HomoclinicResult r =
            homoclinic_points(wu, ws.back(), opt.at("tol_int").get<double>(), opt.at("min_angle").get<double>());
        hits.insert(hits.end(), r.hits.begin(), r.hits.end());
        near.insert(near.end(), r.near_tangencies.begin(), r.near_tangencies.end());
    }
    std::stable_sort(hits.begin(), hits.end(), [](const HomoclinicHit& a, const HomoclinicHit& b) {
        return a.distance_to_anchor < b.distance_to_anchor;
    });
    Json list = Json::array();
    int members = 0;
    std::vector<Vec> pts;
    for (const auto& h : hits) {
        const bool ok = homoclinic_membership(*map, *hp, h.point);
        members += ok ? 1 : 0;
        Json row = hit_json(h);
        row["membership"] = ok;
        list.push_back(row);
        pts.push_back(h.point);
    }
    ctx.check("homoclinic_membership", members == static_cast<int>(hits.size()),
              {{"hits", hits.size()}, {"members", members}});
    write_file(ctx.file("homoclinic.csv"), polyline_csv(pts));
    if (ctx.plots_enabled()) {
        SvgPlot plot(map->domain());
        plot.add_polyline(wu.vertices, 0);
        plot.add_polyline(ws[0].vertices, 1);
        plot.add_polyline(ws[1].vertices, 1);
        plot.add_markers(pts, 2);
        plot.write(ctx.file("homoclinic.svg"));
    }
    return Json{{"arclength", length},
                {"anchor", vec_json(hp->point)},
                {"count", hits.size()},
                {"near_tangencies", near.size()},
                {"membership_passed", members},
                {"hits", list}};
}

Json accumulate_experiment(Context& ctx)
{
    const Json& opt = ctx.config().experiment("accumulate");
    const MapPtr& map = ctx.config().map;
    const auto hp = ctx.anchor();
    const double s = opt.at("q_arclength").get<double>();
    GrowOptions grow;
    grow.max_seg = ctx.config().experiment("manifolds").at("max_seg").get<double>();
    const ManifoldPolyline wu = grow_manifold(map, *hp, ManifoldSide::unstable, s + 1.0, grow);
    const Vec q = map->wrap(wu.at_arclength(s));
    AccumulationOptions ao;
    ao.max_seg = grow.max_seg;
    ao.tol_int = opt.at("tol_int").get<double>();
    const AccumulationReport r = accumulation_check(map, *hp, q, opt.at("radii").get<std::vector<double>>(),
                                                    opt.at("schedule").get<std::vector<double>>(), ao);
    Json rows = Json::array();
    for (const auto& row : r.rows) {
        Json j{{"radius", row.radius}, {"found", row.found}, {"distance", double_or_null(row.distance)}};
        if (row.found) {
            j["arclength"] = row.arclength;
            j["hit"] = hit_json(*row.hit);
        }
        rows.push_back(j);
    }
    return Json{{"q", vec_json(r.q)},
                {"q_arclength", s},
                {"schedule", opt.at("schedule")},
                {"hits_per_arclength", r.hits_per_arclength},
                {"all_found", r.all_found()},
                {"rows", rows}};
}

}  // namespace

// --- Context -------------------------------------------------------------------

Context::Context(const Config& config, std::filesystem::path out_dir, int threads)
    : config_(config), out_dir_(std::move(out_dir)), threads_(threads)
{
}

const TransitionGraph& Context::graph()
{
    if (!graph_) graph_.emplace(build_graph(config_.grid, config_.map, config_.eps, threads_));
    return *graph_;
}

const SccResult& Context::scc()
{
    if (!scc_) scc_.emplace(strongly_connected_components(graph()));
    return *scc_;
}

const std::vector<AttractorRecord>& Context::attractors()
{
    if (attractors_) return *attractors_;
    const Json& opt = config_.experiment("attractors");
    const TransitionGraph& g = graph();
    const BlockSeeds seeds = opt.at("seeds") == "components" ? BlockSeeds::components : BlockSeeds::all_boxes;
    std::vector<AttractorRecord> records;
    std::uint64_t k = 0;
    for (const BoxSet& block : find_attractor_blocks(g, seeds)) {
        AttractorRecord r = make_attractor_record(g, block);
        const InvarianceReport inv =
            attractor_invariance_check(g, block, r.attractor, opt.at("samples").get<int>(), opt.at("steps").get<int>(),
                                       Rng::derive(Rng::derive(config_.rng_seed, kInvariance), k++));
        r.invariant = inv.invariant;
        r.orbit_disjoint = inv.orbit_disjoint;
        r.boundary_forward_invariant = inv.boundary_forward_invariant;
        records.push_back(std::move(r));
    }
    attractors_ = std::move(records);
    return *attractors_;
}

const std::vector<HyperbolicPoint>& Context::periodic_points()
{
    if (periodic_) return *periodic_;
    const Json& opt = config_.experiment("manifolds");
    const Domain& dom = config_.map->domain();
    const Grid seeds(dom, std::vector<int>(static_cast<std::size_t>(dom.dimension()), opt.at("search_depth").get<int>()));
    periodic_ = find_periodic_points(*config_.map, opt.at("period").get<int>(), seeds, opt.at("tol_fix").get<double>(),
                                     opt.at("tol_hyp").get<double>(), threads_);
    return *periodic_;
}

std::optional<HyperbolicPoint> Context::anchor()
{
    const Json& opt = config_.experiment("manifolds");
    const auto& pts = periodic_points();
    std::optional<HyperbolicPoint> best;
    if (!opt.at("anchor").is_null()) {
        const Vec want = json_vec(opt.at("anchor"), config_.map->dimension(), "manifolds.anchor");
        double d = std::numeric_limits<double>::infinity();
        for (const auto& hp : pts) {
            const double e = config_.map->distance(hp.point, want);
            if (e < d && hp.is_hyperbolic && hp.real_spectrum) {
                d = e;
                best = hp;
            }
        }
        return best;
    }
    for (const auto& hp : pts) {
        if (hp.is_hyperbolic && hp.real_spectrum) return hp;
    }
    return std::nullopt;
}

void Context::check(const std::string& name, bool pass, Json detail)
{
    Json row{{"name", name}, {"pass", pass}};
    if (!detail.empty()) row["detail"] = std::move(detail);
    assertions_.push_back(std::move(row));
}

bool Context::all_passed() const
{
    for (const Json& a : assertions_) {
        if (!a.at("pass").get<bool>()) return false;
    }
    return true;
}

std::filesystem::path Context::file(const std::string& name)
{
    if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
    return out_dir_ / name;
}

const std::vector<std::string>& experiment_names()
{
    static const std::vector<std::string> names = {"graph",  "cr",     "components", "attractors",
                                                   "conley-verify", "strong-cr", "escape", "shadow",
                                                   "splice", "manifolds", "homoclinic", "accumulate"};
    return names;
}

std::string skip_reason(const std::string& name, Context& ctx)
{
    const DynamicalMap& map = *ctx.config().map;
    const bool needs_anchor = name == "manifolds" || name == "homoclinic" || name == "accumulate" ||
                              (name == "splice" && ctx.config().experiment("splice").at("q").is_null());
    if (needs_anchor) {
        if (map.dimension() != 2) return "needs a 2D map";
        if (!ctx.anchor()) return "no hyperbolic periodic point with a real spectrum";
    }
    return "";
}

Json run_experiment(const std::string& name, Context& ctx)
{
    if (const std::string why = skip_reason(name, ctx); !why.empty()) return Json{{"skipped", why}};
    if (name == "graph") return graph_experiment(ctx);
    if (name == "cr") return cr_experiment(ctx);
    if (name == "components") return components_experiment(ctx);
    if (name == "attractors") return attractors_experiment(ctx);
    if (name == "conley-verify") return conley_experiment(ctx);
    if (name == "strong-cr") return strong_cr_experiment(ctx);
    if (name == "escape") return escape_experiment(ctx);
    if (name == "shadow") return shadow_experiment(ctx);
    if (name == "splice") return splice_experiment(ctx);
    if (name == "manifolds") return manifolds_experiment(ctx);
    if (name == "homoclinic") return homoclinic_experiment(ctx);
    if (name == "accumulate") return accumulate_experiment(ctx);
    throw ConfigError("unknown experiment: " + name);
}

}  // namespace dynkit::cli
