#include "dynkit/conley.hpp"
#include "dynkit/rng.hpp"

#include <doctest.h>

using namespace dynkit;

namespace {

TransitionGraph graph_of(const std::vector<std::vector<std::uint32_t>>& out)
{
    const auto n = static_cast<std::uint32_t>(out.size());
    int depth = 0;
    while ((1U << depth) < n) ++depth;
    const Grid grid(Domain(make_vec({0.0}), make_vec({1.0})), {depth});
    Adjacency adj;
    adj.offsets.push_back(0);
    for (const auto& t : out) {
        adj.targets.insert(adj.targets.end(), t.begin(), t.end());
        adj.offsets.push_back(adj.targets.size());
    }
    return TransitionGraph(grid, make_contraction(0.5), 0.0, std::move(adj), 0.0);
}

BoxSet set_of(std::uint32_t n, std::initializer_list<std::uint32_t> xs)
{
    BoxSet s(n);
    for (auto x : xs) s.insert(x);
    return s;
}

}  // namespace

TEST_CASE("blocks and attractors on a hand graph")
{
    // 0 <-> 1 is a repeller feeding 2 -> 3 -> 3, and 0 -> 0.
    const auto g = graph_of({{0, 1}, {0, 2}, {3}, {3}});
    CHECK(is_block(g, set_of(4, {2, 3})));
    CHECK_FALSE(is_block(g, set_of(4, {1, 2, 3})));
    CHECK(attractor_from_block(g, set_of(4, {2, 3})) == set_of(4, {3}));
    CHECK(basin(g, set_of(4, {3})) == BoxSet::full(4));
    CHECK(strict_basin(g, set_of(4, {3})) == set_of(4, {2, 3}));

    const auto blocks = find_attractor_blocks(g);
    REQUIRE(blocks.size() == 1);
    CHECK(blocks[0] == set_of(4, {3}));
    const auto rec = make_attractor_record(g, blocks[0]);
    CHECK(rec.attractor == set_of(4, {3}));

    const ConleyReport r = verify_conley_decomposition(g);
    CHECK(r.holds());
    CHECK(r.lhs == set_of(4, {2}));
    CHECK(r.failing_direction().empty());
}

TEST_CASE("identity holds on random sink-free graphs")
{
    Rng rng(21);
    for (int trial = 0; trial < 300; ++trial) {
        const std::uint32_t n = 1U << (1 + rng.below(5));
        std::vector<std::vector<std::uint32_t>> out(n);
        for (std::uint32_t x = 0; x < n; ++x) {
            for (std::uint32_t y = 0; y < n; ++y) {
                if (rng.uniform() < 1.2 / n) out[x].push_back(y);
            }
            if (out[x].empty()) out[x].push_back(static_cast<std::uint32_t>(rng.below(n)));
        }
        const auto g = graph_of(out);
        CHECK(verify_conley_decomposition(g, find_attractor_blocks(g, BlockSeeds::all_boxes)).holds());
    }
}

TEST_CASE("contraction attractor is the origin boxes")
{
    const MapPtr m = make_contraction(0.5, 1, Domain(make_vec({-1.0}), make_vec({1.0})));
    const Grid grid(m->domain(), {6});
    const auto g = build_graph(grid, m, grid.box_width().maxCoeff());
    // Nested blocks: one per non-trivial component, all around the origin.
    const auto blocks = find_attractor_blocks(g);
    REQUIRE(blocks.size() == 3);
    for (const BoxSet& u : blocks) {
        const auto rec = make_attractor_record(g, u);
        CHECK(rec.attractor.contains(grid.box_of_point(make_vec({0.0}))->index));
        CHECK(rec.attractor.count() <= 6);
        CHECK(rec.basin == BoxSet::full(grid.box_count()));
        CHECK(attractor_invariance_check(g, rec.block, rec.attractor, 500, 30, 1).passed());
    }
    CHECK(verify_conley_decomposition(g).holds());
}

TEST_CASE("pullback attractor of the translation")
{
    const MapPtr m = make_translation();
    const Grid grid(m->domain(), {4, 4});
    const auto a = attractor_from_region(
        *m, grid, [](const Vec& p) { return p[0] >= 0.0 || p[1] < -1.0 / p[0]; }, 1000, 2);
    for (std::uint32_t b = 0; b < grid.box_count(); ++b) {
        CHECK(a.contains(b) == (grid.box_lower(BoxId{b})[1] <= 0.0));
    }
}

TEST_CASE("escape fraction")
{
    const MapPtr t = make_translation();
    const Grid grid(t->domain(), {4, 4});
    BoxSet k(grid.box_count());
    k.insert(grid.box_of_point(make_vec({0.5, 0.5}))->index);
    CHECK(escape_fraction(*t, grid, k, 10.0, 20, 200, 1) == 0.0);
    const MapPtr c = make_contraction(0.5, 2);
    const Grid cg(c->domain(), {3, 3});
    CHECK(escape_fraction(*c, cg, BoxSet::full(cg.box_count()), 10.0, 20, 200, 1) == 1.0);
}
