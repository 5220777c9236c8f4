#include "dynkit/chain_graph.hpp"
#include "dynkit/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <deque>
#include <sstream>

using namespace dynkit;

namespace {

TransitionGraph graph_of(const std::vector<std::vector<std::uint32_t>>& out, bool sink_edges = false)
{
    const auto n = static_cast<std::uint32_t>(out.size());
    int depth = 0;
    while ((1U << depth) < n) ++depth;
    REQUIRE((1U << depth) == n);
    const Grid grid(Domain(make_vec({0.0}), make_vec({1.0})), {depth});
    Adjacency adj;
    adj.offsets.push_back(0);
    for (const auto& t : out) {
        auto s = t;
        std::sort(s.begin(), s.end());
        adj.targets.insert(adj.targets.end(), s.begin(), s.end());
        adj.offsets.push_back(adj.targets.size());
    }
    (void)sink_edges;
    return TransitionGraph(grid, make_contraction(0.5), 0.0, std::move(adj), 0.0);
}

// x recurrent iff BFS from its successors returns to x.
bool oracle_recurrent(const TransitionGraph& g, std::uint32_t x)
{
    std::vector<char> seen(g.box_count(), 0);
    std::deque<std::uint32_t> q;
    for (auto t : g.out(x)) {
        if (t < g.box_count() && !seen[t]) {
            seen[t] = 1;
            q.push_back(t);
        }
    }
    while (!q.empty()) {
        const auto y = q.front();
        q.pop_front();
        for (auto t : g.out(y)) {
            if (t < g.box_count() && !seen[t]) {
                seen[t] = 1;
                q.push_back(t);
            }
        }
    }
    return seen[x] != 0;
}

}  // namespace

TEST_CASE("tarjan on a hand graph")
{
    // 0 -> 1 -> 2 -> 0, 3 -> 3, 4 -> 5, 5 -> 6, 6 -> 7, 7 -> 4? no: 7 -> 7 only
    const auto g = graph_of({{1}, {2}, {0}, {3}, {5}, {6}, {7}, {7}});
    const SccResult scc = strongly_connected_components(g);
    CHECK(scc.component_of[0] == scc.component_of[2]);
    CHECK(scc.component_of[3] != scc.component_of[0]);
    const BoxSet cr = chain_recurrent_boxes(g);
    CHECK(cr.indices() == std::vector<std::uint32_t>{0, 1, 2, 3, 7});
    const auto comps = chain_components(g);
    REQUIRE(comps.size() == 3);
    CHECK(comps[0].members.count() == 3);
    CHECK_FALSE(is_chain_transitive(g));
    CHECK(is_chain_transitive(graph_of({{1}, {0}})));
}

TEST_CASE("chain recurrence matches the per-node BFS oracle on random graphs")
{
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::uint32_t n = 1U << (1 + rng.below(6));
        std::vector<std::vector<std::uint32_t>> out(n);
        const double p = 1.5 / n;
        for (std::uint32_t x = 0; x < n; ++x) {
            for (std::uint32_t y = 0; y < n; ++y) {
                if (rng.uniform() < p) out[x].push_back(y);
            }
        }
        const auto g = graph_of(out);
        const BoxSet cr = chain_recurrent_boxes(g);
        for (std::uint32_t x = 0; x < n; ++x) CHECK(cr.contains(x) == oracle_recurrent(g, x));
    }
}

TEST_CASE("reachability operators")
{
    const auto g = graph_of({{1}, {2}, {2}, {0}});
    BoxSet s(4);
    s.insert(0u);
    CHECK(forward_reachable(g, s).indices() == std::vector<std::uint32_t>{0, 1, 2});
    CHECK(backward_reachable(g, s).indices() == std::vector<std::uint32_t>{0, 3});
    CHECK(image(g, s).indices() == std::vector<std::uint32_t>{1});
}

TEST_CASE("outer approximation contains true images")
{
    for (const MapPtr& m : {make_cat(), make_standard(0.97), make_linear(2.0, 0.5)}) {
        const Grid grid(m->domain(), {5, 5});
        const TransitionGraph g = build_graph(grid, m, 0.0, 2);
        Rng rng(12);
        for (int i = 0; i < 2000; ++i) {
            const Vec p = rng.uniform_in(m->domain().lower(), m->domain().upper());
            const auto a = grid.box_of_point(p);
            const Vec fp = m->evaluate(p);
            const auto b = grid.box_of_point(fp);
            if (b) {
                CHECK(g.has_edge(a->index, b->index));
            } else {
                CHECK(g.reaches_sink(a->index));
            }
        }
    }
}

TEST_CASE("graph is independent of thread count")
{
    const Grid grid(Domain::unit_torus(2), {5, 5});
    const auto a = build_graph(grid, make_standard(0.97), grid.box_diameter(), 1);
    const auto b = build_graph(grid, make_standard(0.97), grid.box_diameter(), 3);
    CHECK(a.adjacency().targets == b.adjacency().targets);
    CHECK(a.adjacency().offsets == b.adjacency().offsets);
}

TEST_CASE("translation has no recurrence and sink edges on the right")
{
    const MapPtr m = make_translation();
    const Grid grid(m->domain(), {5, 5});
    const auto g = build_graph(grid, m, grid.box_diameter());
    CHECK(chain_recurrent_boxes(g).empty());
    CHECK(g.reaches_sink(grid.linear_index({31, 10, 0}).index));
    CHECK_FALSE(g.reaches_sink(grid.linear_index({3, 10, 0}).index));
    const GraphStats st = graph_stats(g);
    CHECK(st.boxes == 1024);
    CHECK(st.sink_edges > 0);
}

TEST_CASE("eps chains validate")
{
    const MapPtr m = make_cat();
    const Grid grid(m->domain(), {5, 5});
    const auto g = build_graph(grid, m, grid.box_diameter());
    Rng rng(13);
    for (int i = 0; i < 20; ++i) {
        const Vec p = rng.uniform_in(m->domain().lower(), m->domain().upper());
        const Vec q = rng.uniform_in(m->domain().lower(), m->domain().upper());
        const auto chain = find_eps_chain(g, p, q);
        REQUIRE(chain.has_value());
        CHECK(chain->length() >= 1);
        CHECK(m->distance(chain->points.front(), p) == 0.0);
        CHECK(m->distance(chain->points.back(), q) == 0.0);
        CHECK(validate_chain(*m, *chain));
        CHECK(chain_defect_ratio(*m, *chain) < 1.0);
    }
}

TEST_CASE("nonwandering probe")
{
    const MapPtr cat = make_cat();
    const Grid grid(cat->domain(), {3, 3});
    const auto r = nonwandering_probe(cat, grid, BoxId{0}, 64);
    CHECK(std::holds_alternative<ReturnsAt>(r));
    const MapPtr t = make_translation();
    const Grid tg(t->domain(), {3, 3});
    CHECK(std::holds_alternative<NoReturn>(nonwandering_probe(t, tg, BoxId{0}, 16)));
}

TEST_CASE("strong chains")
{
    const MapPtr rot = make_rotation(0.25);
    const Grid grid(rot->domain(), {4});
    const auto c = strong_chain_search(*rot, make_vec({0.1}), EpsFunction::constant(0.05), grid, 16);
    REQUIRE(c.has_value());
    CHECK(validate_chain(*rot, *c));
    const MapPtr t = make_translation();
    const Grid tg(t->domain(), {5, 5});
    CHECK_FALSE(strong_chain_search(*t, make_vec({1.0, 1.0}), EpsFunction::constant(0.1), tg, 256).has_value());
}

TEST_CASE("adjacency dump")
{
    const auto g = graph_of({{1}, {0}});
    std::ostringstream s;
    write_adjacency(g, s);
    CHECK(s.str() == "0 1\n1 0\n");
}
