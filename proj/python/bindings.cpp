#include "dynkit/chain_graph.hpp"
#include "dynkit/cli/report.hpp"
#include "dynkit/cli/run.hpp"
#include "dynkit/conley.hpp"
#include "dynkit/manifolds.hpp"
#include "dynkit/shadowing.hpp"

#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>

namespace py = pybind11;
using namespace dynkit;

using MutMapPtr = std::shared_ptr<DynamicalMap>;

namespace {

Vec to_vec(const std::vector<double>& v)
{
    if (v.empty() || v.size() > static_cast<std::size_t>(kMaxDimension)) throw Error("point must have 1 to 3 coordinates");
    Vec out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
    return out;
}

std::vector<double> from_vec(const Vec& v) { return {v.data(), v.data() + v.size()}; }

std::vector<std::vector<double>> from_mat(const Mat& m)
{
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) rows[static_cast<std::size_t>(i)].push_back(m(i, j));
    }
    return rows;
}

std::vector<std::vector<double>> from_points(const std::vector<Vec>& pts)
{
    std::vector<std::vector<double>> out;
    out.reserve(pts.size());
    for (const Vec& p : pts) out.push_back(from_vec(p));
    return out;
}

std::vector<Vec> to_points(const std::vector<std::vector<double>>& pts)
{
    std::vector<Vec> out;
    out.reserve(pts.size());
    for (const auto& p : pts) out.push_back(to_vec(p));
    return out;
}

std::optional<Domain> window_of(const std::optional<std::vector<double>>& lower,
                                const std::optional<std::vector<double>>& upper)
{
    if (!lower && !upper) return std::nullopt;
    if (!lower || !upper) throw Error("window needs both lower and upper");
    return Domain(to_vec(*lower), to_vec(*upper));
}

}  // namespace

PYBIND11_MODULE(_dynkit, m)
{
    m.doc() = "Chain recurrence, attractors, shadowing and invariant manifolds on box grids";

    py::register_exception<Error>(m, "DynkitError", PyExc_ValueError);
    py::register_exception<cli::ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::enum_<Direction>(m, "Direction").value("forward", Direction::forward).value("inverse", Direction::inverse);
    py::enum_<ManifoldSide>(m, "ManifoldSide")
        .value("stable", ManifoldSide::stable)
        .value("unstable", ManifoldSide::unstable);

    py::class_<Domain>(m, "Domain")
        .def(py::init([](const std::vector<double>& lower, const std::vector<double>& upper,
                         const std::vector<bool>& periodic) {
                 std::array<bool, kMaxDimension> p{};
                 for (std::size_t i = 0; i < periodic.size() && i < p.size(); ++i) p[i] = periodic[i];
                 return Domain(to_vec(lower), to_vec(upper), p);
             }),
             py::arg("lower"), py::arg("upper"), py::arg("periodic") = std::vector<bool>{})
        .def_static("unit_torus", &Domain::unit_torus)
        .def_property_readonly("dimension", &Domain::dimension)
        .def_property_readonly("lower", [](const Domain& d) { return from_vec(d.lower()); })
        .def_property_readonly("upper", [](const Domain& d) { return from_vec(d.upper()); })
        .def("wrap", [](const Domain& d, const std::vector<double>& p) { return from_vec(d.wrap(to_vec(p))); })
        .def("distance", [](const Domain& d, const std::vector<double>& a, const std::vector<double>& b) {
            return d.distance(to_vec(a), to_vec(b));
        });

    py::class_<BoxSet>(m, "BoxSet")
        .def(py::init<std::uint32_t, bool>(), py::arg("universe"), py::arg("filled") = false)
        .def_property_readonly("universe", &BoxSet::universe)
        .def("count", &BoxSet::count)
        .def("__len__", &BoxSet::count)
        .def("__contains__", [](const BoxSet& s, std::uint32_t i) { return i < s.universe() && s.contains(i); })
        .def("insert", [](BoxSet& s, std::uint32_t i) {
            if (i >= s.universe()) throw Error("box index out of range");
            s.insert(i);
        })
        .def("indices", &BoxSet::indices)
        .def("runs", &BoxSet::runs)
        .def("complement", &BoxSet::complement)
        .def("subset_of", &BoxSet::subset_of)
        .def(py::self | py::self)
        .def(py::self & py::self)
        .def(py::self - py::self)
        .def(py::self == py::self);

    py::class_<Grid>(m, "Grid")
        .def(py::init<Domain, std::vector<int>>(), py::arg("domain"), py::arg("depth"))
        .def_property_readonly("domain", &Grid::domain)
        .def_property_readonly("box_count", &Grid::box_count)
        .def_property_readonly("box_diameter", &Grid::box_diameter)
        .def_property_readonly("box_width", [](const Grid& g) { return from_vec(g.box_width()); })
        .def("box_of_point",
             [](const Grid& g, const std::vector<double>& p) -> std::optional<std::uint32_t> {
                 const auto b = g.box_of_point(to_vec(p));
                 if (!b) return std::nullopt;
                 return b->index;
             })
        .def("box_center", [](const Grid& g, std::uint32_t b) { return from_vec(g.box_geometry(BoxId{b}).center); });

    py::class_<DynamicalMap, MutMapPtr>(m, "Map")
        .def_property_readonly("name", [](const DynamicalMap& f) { return f.spec().name; })
        .def_property_readonly("dimension", &DynamicalMap::dimension)
        .def_property_readonly("domain", &DynamicalMap::domain)
        .def_property_readonly("has_inverse", &DynamicalMap::has_inverse)
        .def_property_readonly("lipschitz_bound", [](const DynamicalMap& f) { return f.spec().lipschitz_bound; })
        .def(
            "__call__",
            [](const DynamicalMap& f, const std::vector<double>& p, Direction d) { return from_vec(f.evaluate(to_vec(p), d)); },
            py::arg("point"), py::arg("direction") = Direction::forward)
        .def("jacobian", [](const DynamicalMap& f, const std::vector<double>& p) { return from_mat(f.jacobian(to_vec(p))); })
        .def("orbit", [](const DynamicalMap& f, const std::vector<double>& p, int steps) {
            return from_points(orbit(f, to_vec(p), steps).points);
        });

    m.def(
        "make_map",
        [](const std::string& name, const std::map<std::string, double>& params,
           const std::optional<std::vector<double>>& lower, const std::optional<std::vector<double>>& upper) {
            return std::const_pointer_cast<DynamicalMap>(make_registry_map(name, params, window_of(lower, upper)));
        },
        py::arg("name"), py::arg("params") = std::map<std::string, double>{}, py::arg("lower") = py::none(),
        py::arg("upper") = py::none());

    m.def(
        "volume_check",
        [](const DynamicalMap& f, int samples, double tol, std::uint64_t seed) {
            const VolumeReport r = volume_check(f, samples, tol, seed);
            return py::dict(py::arg("max_deviation") = r.max_deviation, py::arg("pass") = r.pass);
        },
        py::arg("map"), py::arg("samples") = 1000, py::arg("tol") = 1e-9, py::arg("seed") = 0);

    py::class_<TransitionGraph>(m, "TransitionGraph")
        .def_property_readonly("grid", &TransitionGraph::grid)
        .def_property_readonly("eps", &TransitionGraph::eps)
        .def_property_readonly("box_count", &TransitionGraph::box_count)
        .def_property_readonly("edge_count", &TransitionGraph::edge_count)
        .def("out", [](const TransitionGraph& g, std::uint32_t b) {
            if (b >= g.box_count()) throw Error("box index out of range");
            const auto s = g.out(b);
            return std::vector<std::uint32_t>(s.begin(), s.end());
        })
        .def("reaches_sink", &TransitionGraph::reaches_sink);

    m.def(
        "build_graph",
        [](const Grid& grid, MutMapPtr f, double eps, int threads) { return build_graph(grid, std::move(f), eps, threads); },
        py::arg("grid"), py::arg("map"), py::arg("eps"), py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());
    m.def("chain_recurrent_boxes", py::overload_cast<const TransitionGraph&>(&chain_recurrent_boxes));
    m.def("chain_components", [](const TransitionGraph& g) {
        std::vector<BoxSet> out;
        for (auto& c : chain_components(g)) out.push_back(std::move(c.members));
        return out;
    });
    m.def("is_chain_transitive", &is_chain_transitive);
    m.def("nonwandering_return", [](const TransitionGraph& g, std::uint32_t b, int n_max) -> std::optional<int> {
        const ReturnResult r = nonwandering_probe(g, BoxId{b}, n_max);
        if (const auto* hit = std::get_if<ReturnsAt>(&r)) return hit->step;
        return std::nullopt;
    });

    py::class_<AttractorRecord>(m, "AttractorRecord")
        .def_readonly("block", &AttractorRecord::block)
        .def_readonly("attractor", &AttractorRecord::attractor)
        .def_readonly("basin", &AttractorRecord::basin)
        .def_readonly("strict_basin", &AttractorRecord::strict_basin)
        .def_readonly("iterations_to_fixpoint", &AttractorRecord::iterations_to_fixpoint);

    m.def("attractors", [](const TransitionGraph& g) {
        std::vector<AttractorRecord> out;
        for (const BoxSet& u : find_attractor_blocks(g)) out.push_back(make_attractor_record(g, u));
        return out;
    });
    m.def(
        "attractor_from_region",
        [](const DynamicalMap& f, const Grid& grid, const std::function<bool(std::vector<double>)>& region, int steps,
           int samples) {
            return attractor_from_region(f, grid, [&](const Vec& z) { return region(from_vec(z)); }, steps, samples);
        },
        py::arg("map"), py::arg("grid"), py::arg("region"), py::arg("steps"), py::arg("samples") = 2);
    m.def("conley_check", [](const TransitionGraph& g) {
        const ConleyReport r = verify_conley_decomposition(g);
        return py::dict(py::arg("holds") = r.holds(), py::arg("symmetric_difference") = r.symmetric_difference(),
                        py::arg("sink_present") = r.sink_present, py::arg("blocks") = r.blocks,
                        py::arg("non_recurrent") = r.lhs_count);
    });

    py::class_<ShadowingResult>(m, "ShadowingResult")
        .def_readonly("shadowed", &ShadowingResult::shadowed)
        .def_readonly("eps", &ShadowingResult::eps)
        .def_readonly("achieved_eps", &ShadowingResult::achieved_eps)
        .def_readonly("seed_digits", &ShadowingResult::seed_digits)
        .def_readonly("seeds_tried", &ShadowingResult::seeds_tried)
        .def_property_readonly("x", [](const ShadowingResult& r) { return from_vec(r.x); });

    m.def(
        "random_pseudo_orbit",
        [](const DynamicalMap& f, const std::vector<double>& x0, double delta, int steps, std::uint64_t seed) {
            return from_points(random_pseudo_orbit(f, to_vec(x0), delta, steps, seed).points);
        },
        py::arg("map"), py::arg("x0"), py::arg("delta"), py::arg("steps"), py::arg("seed") = 0);
    m.def(
        "splice",
        [](const DynamicalMap& f, const std::vector<double>& q, const std::vector<double>& x0, double delta, int n_back,
           int n_forward) {
            SpliceOptions opt;
            opt.n_back = n_back;
            opt.n_forward = n_forward;
            return from_points(splice_pseudo_orbit(f, to_vec(q), to_vec(x0), delta, opt).points);
        },
        py::arg("map"), py::arg("q"), py::arg("x0"), py::arg("delta"), py::arg("n_back") = 30, py::arg("n_forward") = 30);
    m.def(
        "shadow",
        [](const DynamicalMap& f, const std::vector<std::vector<double>>& points, double delta, double eps,
           double resolution, bool shooting) {
            const PseudoOrbit po = make_pseudo_orbit(f, to_points(points), delta);
            ShadowOptions opt;
            opt.shooting = shooting;
            py::gil_scoped_release release;
            return shadow_search(f, po, eps, resolution, opt);
        },
        py::arg("map"), py::arg("points"), py::arg("delta"), py::arg("eps"), py::arg("resolution"),
        py::arg("shooting") = true);

    py::class_<HyperbolicPoint>(m, "HyperbolicPoint")
        .def_property_readonly("point", [](const HyperbolicPoint& h) { return from_vec(h.point); })
        .def_readonly("period", &HyperbolicPoint::period)
        .def_readonly("eigenvalues", &HyperbolicPoint::eigenvalues)
        .def_property_readonly("eigenvectors", [](const HyperbolicPoint& h) { return from_mat(h.eigenvectors); })
        .def_readonly("is_hyperbolic", &HyperbolicPoint::is_hyperbolic)
        .def_readonly("fixed_residual", &HyperbolicPoint::fixed_residual);

    m.def(
        "classify_periodic_point",
        [](const DynamicalMap& f, const std::vector<double>& p, int period) {
            return classify_periodic_point(f, to_vec(p), period);
        },
        py::arg("map"), py::arg("point"), py::arg("period") = 1);
    m.def("find_periodic_points", &find_periodic_points, py::arg("map"), py::arg("period"), py::arg("grid"),
          py::arg("tol_fix") = 1e-10, py::arg("tol_hyp") = 1e-6, py::arg("threads") = 1);

    py::class_<ManifoldPolyline>(m, "ManifoldPolyline")
        .def_property_readonly("vertices", [](const ManifoldPolyline& p) { return from_points(p.vertices); })
        .def_property_readonly("length", &ManifoldPolyline::length)
        .def("at_arclength", [](const ManifoldPolyline& p, double s) { return from_vec(p.at_arclength(s)); })
        .def("invariance_error", [](const ManifoldPolyline& p) { return invariance_error(p); });

    m.def(
        "grow_manifold",
        [](MutMapPtr f, const HyperbolicPoint& hp, ManifoldSide side, double arclength, int branch, double max_seg) {
            GrowOptions opt;
            opt.branch = branch;
            opt.max_seg = max_seg;
            return grow_manifold(std::move(f), hp, side, arclength, opt);
        },
        py::arg("map"), py::arg("anchor"), py::arg("side"), py::arg("arclength"), py::arg("branch") = 1,
        py::arg("max_seg") = 0.01);

    m.def(
        "homoclinic_points",
        [](const ManifoldPolyline& wu, const ManifoldPolyline& ws, double tol_int, double min_angle) {
            std::vector<std::vector<double>> out;
            for (const auto& h : homoclinic_points(wu, ws, tol_int, min_angle).hits) out.push_back(from_vec(h.point));
            return out;
        },
        py::arg("wu"), py::arg("ws"), py::arg("tol_int") = 1e-10, py::arg("min_angle") = 1e-3);
    m.def(
        "homoclinic_membership",
        [](const DynamicalMap& f, const HyperbolicPoint& hp, const std::vector<double>& h) {
            return homoclinic_membership(f, hp, to_vec(h));
        },
        py::arg("map"), py::arg("anchor"), py::arg("point"));

    m.def(
        "run",
        [](const std::string& subcommand, const std::string& config_json, const std::string& out_dir,
           std::optional<std::uint64_t> seed) {
            cli::RunOptions opt;
            opt.out_dir = std::filesystem::path(out_dir);
            opt.seed = seed;
            const cli::RunOutcome r = cli::run(subcommand, cli::Json::parse(config_json), opt);
            return py::make_tuple(r.exit_code, r.report.dump());
        },
        py::arg("subcommand"), py::arg("config_json"), py::arg("out_dir"), py::arg("seed") = py::none(),
        "Runs one CLI subcommand; returns (exit code, report JSON text).");

    m.attr("__version__") = cli::kToolVersion;
}
