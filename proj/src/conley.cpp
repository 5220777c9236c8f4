#include "dynkit/conley.hpp"

#include "dynkit/parallel.hpp"
#include "dynkit/rng.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>

namespace dynkit {

namespace {

struct Condensation {
    SccResult scc;
    std::vector<std::vector<std::uint32_t>> successors;  // component DAG, deduplicated
    std::vector<bool> reaches_sink;                      // some member has a sink edge
};

Condensation condense(const TransitionGraph& g)
{
    Condensation c;
    c.scc = strongly_connected_components(g);
    const std::uint32_t m = c.scc.component_count;
    c.successors.resize(m);
    c.reaches_sink.assign(m, false);
    for (std::uint32_t b = 0; b < g.box_count(); ++b) {
        const std::uint32_t cb = c.scc.component_of[b];
        for (std::uint32_t t : g.out(b)) {
            if (t == g.sink()) {
                c.reaches_sink[cb] = true;
                continue;
            }
            const std::uint32_t ct = c.scc.component_of[t];
            if (ct != cb) c.successors[cb].push_back(ct);
        }
    }
    for (auto& s : c.successors) {
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
    }
    return c;
}

std::vector<std::uint32_t> reverse_topological_order(const Condensation& c)
{
    const std::size_t m = c.successors.size();
    std::vector<std::uint32_t> indegree(m, 0);
    for (const auto& s : c.successors) {
        for (std::uint32_t t : s) ++indegree[t];
    }
    std::vector<std::uint32_t> order;
    order.reserve(m);
    for (std::uint32_t i = 0; i < m; ++i) {
        if (indegree[i] == 0) order.push_back(i);
    }
    for (std::size_t head = 0; head < order.size(); ++head) {
        for (std::uint32_t t : c.successors[order[head]]) {
            if (--indegree[t] == 0) order.push_back(t);
        }
    }
    std::reverse(order.begin(), order.end());
    return order;
}

}  // namespace

std::vector<BoxSet> find_attractor_blocks(const TransitionGraph& g, BlockSeeds seeds)
{
    const std::uint32_t n = g.box_count();
    const Condensation c = condense(g);
    const std::uint32_t m = c.scc.component_count;
    const BoxSet everything = BoxSet::full(n);

    std::vector<std::vector<std::uint32_t>> members(m);
    for (std::uint32_t b = 0; b < n; ++b) members[c.scc.component_of[b]].push_back(b);

    std::vector<BoxSet> closures(m);
    std::vector<bool> touches_sink(m, false);
    if (seeds == BlockSeeds::components) {
        for (std::uint32_t k = 0; k < m; ++k) {
            if (!c.scc.nontrivial[k]) continue;
            BoxSet start(n);
            for (std::uint32_t b : members[k]) start.insert(b);
            closures[k] = forward_reachable(g, start);
            bool sink = false;
            image(g, closures[k], &sink);
            touches_sink[k] = sink;
        }
    } else {
        if (static_cast<double>(m) * n > 8.0 * 1024 * 1024 * 1024)
            throw Error("find_attractor_blocks: too many components for exhaustive seeding");
        for (std::uint32_t k : reverse_topological_order(c)) {
            BoxSet closure(n);
            for (std::uint32_t b : members[k]) closure.insert(b);
            bool sink = c.reaches_sink[k];
            for (std::uint32_t t : c.successors[k]) {
                closure |= closures[t];
                sink = sink || touches_sink[t];
            }
            closures[k] = std::move(closure);
            touches_sink[k] = sink;
        }
    }

    // The whole grid is kept only when its attractor is a proper subset.
    bool sink = false;
    const bool onto = image(g, everything, &sink) == everything;
    std::vector<BoxSet> blocks;
    std::set<std::vector<BoxSet::Run>> seen;
    for (std::uint32_t k = 0; k < m; ++k) {
        if (closures[k].universe() == 0 || touches_sink[k] || (onto && closures[k] == everything)) continue;
        if (!seen.insert(closures[k].runs()).second) continue;
        blocks.push_back(closures[k]);
    }
    return blocks;
}

bool is_block(const TransitionGraph& g, const BoxSet& u)
{
    bool sink = false;
    const BoxSet next = image(g, u, &sink);
    return !sink && next.subset_of(u);
}

BoxSet attractor_from_block(const TransitionGraph& g, const BoxSet& u, int* iterations)
{
    BoxSet current = u;
    BoxSet next = image(g, current);
    if (!next.subset_of(u)) throw NotABlock();
    int count = 0;
    while (next != current) {
        ++count;
        current = std::move(next);
        next = image(g, current);
    }
    if (iterations) *iterations = count;
    return current;
}

BoxSet attractor_from_region(const DynamicalMap& map, const Grid& grid, const std::function<bool(const Vec&)>& region,
                             int steps, int samples)
{
    if (!map.has_inverse()) throw InverseUnavailable();
    if (steps < 0 || samples < 1) throw Error("attractor_from_region: need steps >= 0 and samples >= 1");
    const int d = grid.dimension();
    const Vec width = grid.box_width();
    int per_box = 1;
    for (int i = 0; i < d; ++i) per_box *= samples;
    BoxSet result(grid.box_count());
    for (std::uint32_t b = 0; b < grid.box_count(); ++b) {
        const Vec lower = grid.box_lower(BoxId{b});
        for (int s = 0; s < per_box; ++s) {
            Vec z = lower;
            int rest = s;
            for (int i = 0; i < d; ++i) {
                z[i] += width[i] * (rest % samples) / samples;
                rest /= samples;
            }
            for (int k = 0; k < steps; ++k) z = map.lift(z, Direction::inverse);
            if (region(z)) {
                result.insert(b);
                break;
            }
        }
    }
    return result;
}

BoxSet basin(const TransitionGraph& g, const BoxSet& u) { return backward_reachable(g, u); }

BoxSet strict_basin(const TransitionGraph& g, const BoxSet& u)
{
    const std::uint32_t n = g.box_count();
    if (u.universe() != n) throw Error("box set: grid mismatch");
    const Adjacency& rev = g.reverse();
    std::vector<std::uint32_t> remaining(n);
    for (std::uint32_t b = 0; b < n; ++b) remaining[b] = static_cast<std::uint32_t>(g.out(b).size());
    BoxSet result = u;
    std::vector<std::uint32_t> queue = u.indices();
    for (std::size_t head = 0; head < queue.size(); ++head) {
        for (std::uint32_t x : rev.out(queue[head])) {
            if (result.contains(x)) continue;
            if (--remaining[x] == 0) {
                result.insert(x);
                queue.push_back(x);
            }
        }
    }
    return result;
}

AttractorRecord make_attractor_record(const TransitionGraph& g, const BoxSet& block)
{
    AttractorRecord r;
    r.block = block;
    r.attractor = attractor_from_block(g, block, &r.iterations_to_fixpoint);
    r.basin = basin(g, block);
    r.strict_basin = strict_basin(g, block);
    return r;
}

std::string ConleyReport::failing_direction() const
{
    if (lhs_minus_rhs > 0 && rhs_minus_lhs > 0) return "both";
    if (lhs_minus_rhs > 0) return "lhs_not_in_rhs";
    if (rhs_minus_lhs > 0) return "rhs_not_in_lhs";
    return "";
}

ConleyReport verify_conley_decomposition(const TransitionGraph& g, const std::vector<BoxSet>& blocks)
{
    const std::uint32_t n = g.box_count();
    ConleyReport report;
    report.boxes = n;
    report.blocks = blocks.size();
    for (std::uint32_t b = 0; b < n && !report.sink_present; ++b) report.sink_present = g.reaches_sink(b);
    report.lhs = chain_recurrent_boxes(g).complement();
    report.rhs = BoxSet(n);
    for (const BoxSet& u : blocks) {
        const BoxSet a = attractor_from_block(g, u);
        report.rhs |= strict_basin(g, u) - a;
    }
    report.lhs_count = report.lhs.count();
    report.rhs_count = report.rhs.count();
    report.lhs_minus_rhs = (report.lhs - report.rhs).count();
    report.rhs_minus_lhs = (report.rhs - report.lhs).count();
    return report;
}

ConleyReport verify_conley_decomposition(const TransitionGraph& g)
{
    return verify_conley_decomposition(g, find_attractor_blocks(g, BlockSeeds::all_boxes));
}

InvarianceReport attractor_invariance_check(const TransitionGraph& g, const BoxSet& u, const BoxSet& a, int samples,
                                            int steps, std::uint64_t seed)
{
    const Grid& grid = g.grid();
    const DynamicalMap& map = *g.map();
    InvarianceReport report;

    bool sink = false;
    report.invariant = image(g, a, &sink) == a && !sink;

    const BoxSet core = forward_reachable(g, a.complement()).complement();
    report.core_boxes = core.count();
    const std::vector<std::uint32_t> outside = (u - a).indices();
    Rng rng(Rng::derive(seed, 0xD15));
    if (!outside.empty() && !core.empty()) {
        for (int s = 0; s < samples; ++s) {
            const BoxGeometry box = grid.box_geometry(BoxId{outside[rng.below(outside.size())]});
            Vec x = rng.uniform_in(box.center - box.radius, box.center + box.radius);
            ++report.disjointness_samples;
            for (int k = 1; k <= steps; ++k) {
                x = map.evaluate(x);
                const auto hit = grid.box_of_point(x);
                if (!hit) break;
                if (core.contains(*hit)) {
                    ++report.disjointness_violations;
                    break;
                }
            }
        }
    }
    report.orbit_disjoint = report.disjointness_violations == 0;

    const BoxSet edge = boundary_boxes(grid, a);
    report.boundary_boxes = edge.count();
    const BoxSet collar = dilate(grid, a);
    const std::vector<std::uint32_t> edge_boxes = edge.indices();
    if (!edge_boxes.empty()) {
        Rng brng(Rng::derive(seed, 0xB0D));
        for (int s = 0; s < samples; ++s) {
            const BoxGeometry box = grid.box_geometry(BoxId{edge_boxes[brng.below(edge_boxes.size())]});
            const Vec x = brng.uniform_in(box.center - box.radius, box.center + box.radius);
            ++report.boundary_samples;
            const auto hit = grid.box_of_point(map.evaluate(x));
            if (hit && !collar.contains(*hit)) ++report.boundary_violations;
        }
    }
    report.boundary_forward_invariant = report.boundary_violations == 0;
    return report;
}

double escape_fraction(const DynamicalMap& map, const Grid& grid, const BoxSet& k, double radius, int n_max,
                       int samples, std::uint64_t seed, int threads)
{
    if (samples < 1) throw Error("escape_fraction: samples must be >= 1");
    if (k.universe() != grid.box_count()) throw Error("box set: grid mismatch");
    const std::vector<std::uint32_t> boxes = k.indices();
    if (boxes.empty()) throw Error("escape_fraction: K is empty");
    const auto n = static_cast<std::size_t>(samples);
    std::vector<std::size_t> bounded(chunk_count(n, threads), 0);
    parallel_chunks(n, threads, [&](std::size_t begin, std::size_t end, std::size_t chunk) {
        for (std::size_t i = begin; i < end; ++i) {
            Rng rng(Rng::derive(seed, i));
            const BoxGeometry box = grid.box_geometry(BoxId{boxes[rng.below(boxes.size())]});
            const Vec p = rng.uniform_in(box.center - box.radius, box.center + box.radius);
            if (std::holds_alternative<Bounded>(lagrange_probe(map, p, radius, n_max))) ++bounded[chunk];
        }
    });
    return static_cast<double>(std::accumulate(bounded.begin(), bounded.end(), std::size_t{0})) / samples;
}

}  // namespace dynkit
