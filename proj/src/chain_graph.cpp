#include "dynkit/chain_graph.hpp"

#include "dynkit/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>

namespace dynkit {

namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

Vec image_margin(const Mat& bound, const Vec& radius, double eps)
{
    Vec m = bound * radius;
    for (int i = 0; i < m.size(); ++i) m[i] += eps;
    return m;
}

}  // namespace

TransitionGraph::TransitionGraph(Grid grid, MapPtr map, double eps, Adjacency adjacency, double step_tolerance)
    : grid_(std::move(grid)),
      map_(std::move(map)),
      eps_(eps),
      adjacency_(std::move(adjacency)),
      step_tolerance_(step_tolerance)
{
    if (adjacency_.node_count() != grid_.box_count()) throw Error("transition graph: adjacency size mismatch");
}

bool TransitionGraph::has_edge(std::uint32_t from, std::uint32_t to) const
{
    const auto edges = out(from);
    if (to == sink()) return !edges.empty() && edges.back() == to;
    return std::binary_search(edges.begin(), edges.end(), to);
}

bool TransitionGraph::reaches_sink(std::uint32_t box) const
{
    const auto edges = out(box);
    return !edges.empty() && edges.back() == sink();
}

const Adjacency& TransitionGraph::reverse() const
{
    std::call_once(*reverse_once_, [this] {
        auto rev = std::make_shared<Adjacency>();
        const std::uint32_t n = box_count();
        rev->offsets.assign(static_cast<std::size_t>(n) + 1, 0);
        for (std::uint32_t t : adjacency_.targets) {
            if (t < n) ++rev->offsets[t + 1];
        }
        for (std::uint32_t i = 0; i < n; ++i) rev->offsets[i + 1] += rev->offsets[i];
        rev->targets.resize(rev->offsets[n]);
        std::vector<std::uint64_t> cursor(rev->offsets.begin(), rev->offsets.end() - 1);
        for (std::uint32_t b = 0; b < n; ++b) {
            for (std::uint32_t t : out(b)) {
                if (t < n) rev->targets[cursor[t]++] = b;
            }
        }
        reverse_ = std::move(rev);
    });
    return *reverse_;
}

TransitionGraph build_graph(const Grid& grid, MapPtr map, double eps, int threads)
{
    if (!map) throw Error("build_graph: no map");
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw Error("build_graph: eps must be finite and >= 0");
    if (map->dimension() != grid.dimension()) throw Error("build_graph: map and grid dimensions differ");
    const std::uint32_t n = grid.box_count();
    const std::uint32_t sink = n;
    const Vec radius = grid.box_radius();

    const std::size_t chunks = chunk_count(n, threads);
    std::vector<std::vector<std::uint32_t>> chunk_targets(chunks);
    std::vector<double> chunk_spread(chunks, 0.0);
    std::vector<std::uint32_t> degree(n, 0);

    parallel_chunks(n, static_cast<int>(chunks), [&](std::size_t begin, std::size_t end, std::size_t chunk) {
        auto& targets = chunk_targets[chunk];
        std::vector<std::uint32_t> scratch;
        for (std::size_t b = begin; b < end; ++b) {
            const BoxGeometry geom = grid.box_geometry(BoxId{static_cast<std::uint32_t>(b)});
            const Vec y = map->lift(geom.center);
            const Mat bound = map->local_derivative_bound(geom.center, radius);
            const Vec margin = image_margin(bound, radius, eps);
            // |f(x) - f(c)| <= |B r| for x in the box; the target box meets the margin rectangle.
            chunk_spread[chunk] = std::max(chunk_spread[chunk], (bound * radius).norm() + margin.norm());
            scratch.clear();
            bool escapes = true;
            if (y.allFinite()) {
                escapes = grid.for_each_box_in_rect(y - margin, y + margin,
                                                    [&](std::uint32_t t) { scratch.push_back(t); });
            }
            std::sort(scratch.begin(), scratch.end());
            scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
            if (escapes) scratch.push_back(sink);
            degree[b] = static_cast<std::uint32_t>(scratch.size());
            targets.insert(targets.end(), scratch.begin(), scratch.end());
        }
    });

    Adjacency adj;
    adj.offsets.assign(static_cast<std::size_t>(n) + 1, 0);
    for (std::uint32_t b = 0; b < n; ++b) adj.offsets[b + 1] = adj.offsets[b] + degree[b];
    adj.targets.reserve(adj.offsets[n]);
    for (auto& part : chunk_targets) {
        adj.targets.insert(adj.targets.end(), part.begin(), part.end());
        std::vector<std::uint32_t>().swap(part);
    }
    const double spread = *std::max_element(chunk_spread.begin(), chunk_spread.end());
    const double tolerance = (spread + 2.0 * radius.norm()) * (1.0 + 1e-12) + 1e-15;
    return TransitionGraph(grid, std::move(map), eps, std::move(adj), tolerance);
}

GraphStats graph_stats(const TransitionGraph& g)
{
    GraphStats s;
    s.boxes = g.box_count();
    s.edges = g.edge_count();
    s.min_out = s.boxes == 0 ? 0 : std::numeric_limits<std::uint32_t>::max();
    for (std::uint32_t b = 0; b < s.boxes; ++b) {
        const auto d = static_cast<std::uint32_t>(g.out(b).size());
        s.min_out = std::min(s.min_out, d);
        s.max_out = std::max(s.max_out, d);
        if (g.reaches_sink(b)) ++s.sink_edges;
    }
    s.mean_out = s.boxes == 0 ? 0.0 : static_cast<double>(s.edges) / s.boxes;
    return s;
}

void write_adjacency(const TransitionGraph& g, std::ostream& out)
{
    for (std::uint32_t b = 0; b < g.box_count(); ++b) {
        for (std::uint32_t t : g.out(b)) out << b << ' ' << t << '\n';
    }
}

// ---------------------------------------------------------------------------

BoxSet image(const TransitionGraph& g, const BoxSet& set, bool* hits_sink)
{
    if (set.universe() != g.box_count()) throw Error("box set: grid mismatch");
    BoxSet result(g.box_count());
    bool sink = false;
    const std::uint32_t s = g.sink();
    set.for_each([&](std::uint32_t b) {
        for (std::uint32_t t : g.out(b)) {
            if (t == s)
                sink = true;
            else
                result.insert(t);
        }
    });
    if (hits_sink) *hits_sink = sink;
    return result;
}

namespace {

BoxSet reach(const Adjacency& adj, std::uint32_t n, const BoxSet& seeds)
{
    if (seeds.universe() != n) throw Error("box set: grid mismatch");
    BoxSet seen = seeds;
    std::vector<std::uint32_t> stack = seeds.indices();
    while (!stack.empty()) {
        const std::uint32_t u = stack.back();
        stack.pop_back();
        for (std::uint32_t t : adj.out(u)) {
            if (t < n && !seen.contains(t)) {
                seen.insert(t);
                stack.push_back(t);
            }
        }
    }
    return seen;
}

}  // namespace

BoxSet forward_reachable(const TransitionGraph& g, const BoxSet& seeds)
{
    return reach(g.adjacency(), g.box_count(), seeds);
}

BoxSet backward_reachable(const TransitionGraph& g, const BoxSet& targets)
{
    return reach(g.reverse(), g.box_count(), targets);
}

// ---------------------------------------------------------------------------

SccResult strongly_connected_components(const TransitionGraph& g)
{
    const std::uint32_t n = g.box_count();
    std::vector<std::uint32_t> index(n, kNone);
    std::vector<std::uint32_t> low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::uint32_t> raw(n, kNone);
    std::vector<std::uint32_t> stack;
    struct Frame {
        std::uint32_t node;
        std::uint32_t edge;
    };
    std::vector<Frame> call;
    std::uint32_t counter = 0;
    std::uint32_t raw_count = 0;

    for (std::uint32_t root = 0; root < n; ++root) {
        if (index[root] != kNone) continue;
        call.push_back({root, 0});
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            Frame& f = call.back();
            const auto edges = g.out(f.node);
            if (f.edge < edges.size()) {
                const std::uint32_t t = edges[f.edge++];
                if (t >= n) continue;
                if (index[t] == kNone) {
                    index[t] = low[t] = counter++;
                    stack.push_back(t);
                    on_stack[t] = true;
                    call.push_back({t, 0});
                } else if (on_stack[t]) {
                    low[f.node] = std::min(low[f.node], index[t]);
                }
                continue;
            }
            const std::uint32_t v = f.node;
            call.pop_back();
            if (!call.empty()) low[call.back().node] = std::min(low[call.back().node], low[v]);
            if (low[v] == index[v]) {
                std::uint32_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    raw[w] = raw_count;
                } while (w != v);
                ++raw_count;
            }
        }
    }

    // Relabel by smallest member.
    SccResult result;
    result.component_of.assign(n, 0);
    std::vector<std::uint32_t> relabel(raw_count, kNone);
    std::vector<std::uint32_t> size;
    for (std::uint32_t b = 0; b < n; ++b) {
        std::uint32_t& label = relabel[raw[b]];
        if (label == kNone) {
            label = result.component_count++;
            size.push_back(0);
        }
        result.component_of[b] = label;
        ++size[label];
    }
    result.nontrivial.assign(result.component_count, false);
    for (std::uint32_t c = 0; c < result.component_count; ++c) result.nontrivial[c] = size[c] > 1;
    for (std::uint32_t b = 0; b < n; ++b) {
        if (g.has_edge(b, b)) result.nontrivial[result.component_of[b]] = true;
    }
    return result;
}

BoxSet chain_recurrent_boxes(const TransitionGraph& g, const SccResult& scc)
{
    BoxSet cr(g.box_count());
    for (std::uint32_t b = 0; b < g.box_count(); ++b) {
        if (scc.nontrivial[scc.component_of[b]]) cr.insert(b);
    }
    return cr;
}

BoxSet chain_recurrent_boxes(const TransitionGraph& g)
{
    return chain_recurrent_boxes(g, strongly_connected_components(g));
}

std::vector<ChainComponent> chain_components(const TransitionGraph& g, const SccResult& scc)
{
    std::vector<std::uint32_t> slot(scc.component_count, kNone);
    std::vector<ChainComponent> out;
    for (std::uint32_t b = 0; b < g.box_count(); ++b) {
        const std::uint32_t c = scc.component_of[b];
        if (!scc.nontrivial[c]) continue;
        if (slot[c] == kNone) {
            slot[c] = static_cast<std::uint32_t>(out.size());
            out.push_back({slot[c], BoxSet(g.box_count()), false});
        }
        out[slot[c]].members.insert(b);
    }
    return out;
}

std::vector<ChainComponent> chain_components(const TransitionGraph& g)
{
    return chain_components(g, strongly_connected_components(g));
}

bool is_chain_transitive(const TransitionGraph& g)
{
    if (g.box_count() == 0) return false;
    const SccResult scc = strongly_connected_components(g);
    return scc.component_count == 1 && scc.nontrivial[0];
}

// ---------------------------------------------------------------------------

double chain_defect_ratio(const DynamicalMap& map, const EpsChain& chain)
{
    if (chain.points.size() < 2 || chain.eps.size() != chain.points.size() - 1)
        return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < chain.points.size(); ++i) {
        const double d = map.distance(map.evaluate(chain.points[i]), chain.points[i + 1]);
        worst = std::max(worst, d / chain.eps[i]);
    }
    return worst;
}

bool validate_chain(const DynamicalMap& map, const EpsChain& chain) { return chain_defect_ratio(map, chain) < 1.0; }

std::optional<EpsChain> find_eps_chain(const TransitionGraph& g, const Vec& p, const Vec& q)
{
    const auto bp = g.grid().box_of_point(p);
    const auto bq = g.grid().box_of_point(q);
    if (!bp || !bq) return std::nullopt;
    const std::uint32_t n = g.box_count();
    const std::uint32_t start = bp->index;
    const std::uint32_t target = bq->index;
    constexpr std::uint32_t kRoot = kNone - 1;

    std::vector<std::uint32_t> parent(n, kNone);
    std::deque<std::uint32_t> queue;
    for (std::uint32_t t : g.out(start)) {
        if (t < n && parent[t] == kNone) {
            parent[t] = kRoot;
            queue.push_back(t);
        }
    }
    bool found = parent[target] != kNone;
    while (!found && !queue.empty()) {
        const std::uint32_t u = queue.front();
        queue.pop_front();
        for (std::uint32_t t : g.out(u)) {
            if (t >= n || parent[t] != kNone) continue;
            parent[t] = u;
            if (t == target) {
                found = true;
                break;
            }
            queue.push_back(t);
        }
    }
    if (!found) return std::nullopt;

    std::vector<std::uint32_t> path{target};
    for (std::uint32_t cur = parent[target]; cur != kRoot; cur = parent[cur]) path.push_back(cur);
    path.push_back(start);
    std::reverse(path.begin(), path.end());

    EpsChain chain;
    chain.points.reserve(path.size());
    chain.points.push_back(g.map()->wrap(p));
    for (std::size_t i = 1; i + 1 < path.size(); ++i) chain.points.push_back(g.grid().box_geometry(BoxId{path[i]}).center);
    chain.points.push_back(g.map()->wrap(q));
    chain.eps.assign(chain.points.size() - 1, g.step_tolerance());
    if (!validate_chain(*g.map(), chain)) throw Error("find_eps_chain: realized chain violates the step bound");
    return chain;
}

ReturnResult nonwandering_probe(const TransitionGraph& g, BoxId b, int n_max)
{
    if (n_max < 1) throw Error("nonwandering_probe: n_max must be >= 1");
    if (!g.grid().valid(b)) throw Error("nonwandering_probe: invalid box id");
    BoxSet current(g.box_count());
    current.insert(b);
    for (int k = 1; k <= n_max; ++k) {
        BoxSet next = image(g, current);
        if (next.contains(b)) return ReturnsAt{k};
        if (next.empty() || next == current) return NoReturn{k};
        current = std::move(next);
    }
    return NoReturn{n_max};
}

ReturnResult nonwandering_probe(MapPtr map, const Grid& grid, BoxId b, int n_max)
{
    return nonwandering_probe(build_graph(grid, std::move(map), 0.0), b, n_max);
}

std::optional<EpsChain> strong_chain_search(const DynamicalMap& map, const Vec& p, const EpsFunction& eps_fn,
                                            const Grid& grid, int max_len)
{
    if (max_len < 1) throw Error("strong_chain_search: max_len must be >= 1");
    if (!(eps_fn.c > 0.0)) throw Error("strong_chain_search: eps function must be positive");
    if (map.dimension() != grid.dimension()) throw Error("strong_chain_search: dimension mismatch");
    const Vec home = map.wrap(p);
    const std::uint32_t n = grid.box_count();
    const Vec radius = grid.box_radius();

    auto make_chain = [&](std::vector<Vec> pts) {
        EpsChain chain;
        chain.points = std::move(pts);
        for (std::size_t i = 0; i + 1 < chain.points.size(); ++i) chain.eps.push_back(eps_fn(map.evaluate(chain.points[i])));
        return chain;
    };
    auto successors = [&](const Vec& x, std::vector<std::uint32_t>& out) {
        out.clear();
        const Vec y = map.evaluate(x);
        if (!y.allFinite()) return;
        const double e = eps_fn(y);
        const Vec reach = radius + Vec::Constant(y.size(), e);
        grid.for_each_box_in_rect(y - reach, y + reach, [&](std::uint32_t t) {
            if (map.distance(y, grid.box_geometry(BoxId{t}).center) < e) out.push_back(t);
        });
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
    };
    auto closes = [&](const Vec& x) {
        const Vec y = map.evaluate(x);
        return y.allFinite() && map.distance(y, home) < eps_fn(y);
    };

    if (closes(home)) {
        EpsChain chain = make_chain({home, home});
        if (validate_chain(map, chain)) return chain;
    }
    if (max_len < 2) return std::nullopt;

    constexpr std::uint32_t kRoot = kNone - 1;
    std::vector<std::uint32_t> parent(n, kNone);
    std::vector<std::uint32_t> depth(n, 0);
    std::deque<std::uint32_t> queue;
    std::vector<std::uint32_t> next;
    successors(home, next);
    for (std::uint32_t t : next) {
        parent[t] = kRoot;
        depth[t] = 1;
        queue.push_back(t);
    }
    while (!queue.empty()) {
        const std::uint32_t u = queue.front();
        queue.pop_front();
        const Vec cu = grid.box_geometry(BoxId{u}).center;
        if (closes(cu)) {
            std::vector<Vec> pts{home};
            std::vector<std::uint32_t> path;
            for (std::uint32_t cur = u; cur != kRoot; cur = parent[cur]) path.push_back(cur);
            for (auto it = path.rbegin(); it != path.rend(); ++it) pts.push_back(grid.box_geometry(BoxId{*it}).center);
            pts.push_back(home);
            EpsChain chain = make_chain(std::move(pts));
            if (validate_chain(map, chain)) return chain;
        }
        if (depth[u] + 1 >= static_cast<std::uint32_t>(max_len)) continue;
        successors(cu, next);
        for (std::uint32_t t : next) {
            if (parent[t] != kNone) continue;
            parent[t] = u;
            depth[t] = depth[u] + 1;
            queue.push_back(t);
        }
    }
    return std::nullopt;
}

}  // namespace dynkit
