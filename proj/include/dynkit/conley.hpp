#pragma once

#include "dynkit/chain_graph.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace dynkit {

class NotABlock : public Error {
public:
    NotABlock() : Error("not an attractor block: image leaves the set") {}
};

/// Which boxes seed candidate blocks.
enum class BlockSeeds {
    /// Forward closures of non-trivial chain components.
    components,
    /// Forward closures of every box (one per strongly connected component).
    all_boxes,
};

/// Forward-closed box sets that avoid the sink, deduplicated, in order of their
/// seeding component. The whole grid counts only when its image is smaller.
std::vector<BoxSet> find_attractor_blocks(const TransitionGraph& g, BlockSeeds seeds = BlockSeeds::components);

/// image(U) subset of U and no edge from U reaches the sink.
bool is_block(const TransitionGraph& g, const BoxSet& u);

/// Decreasing iteration U, F(U), F(F(U)), ... until it stabilizes. Edges into
/// the sink are tolerated so that window truncations of non-compact blocks
/// can be used.
BoxSet attractor_from_block(const TransitionGraph& g, const BoxSet& u, int* iterations = nullptr);

/// Pullback attractor of a region: box b is kept when some sample z of b has
/// f^{-steps}(z) inside `region`. `samples` points per axis per box.
BoxSet attractor_from_region(const DynamicalMap& map, const Grid& grid, const std::function<bool(const Vec&)>& region,
                             int steps, int samples);

/// Boxes with some path into U.
BoxSet basin(const TransitionGraph& g, const BoxSet& u);
/// Boxes all of whose paths enter U (least fixpoint of B = U or succ(B) subset B).
BoxSet strict_basin(const TransitionGraph& g, const BoxSet& u);

struct AttractorRecord {
    BoxSet block;
    BoxSet attractor;
    BoxSet basin;
    BoxSet strict_basin;
    int iterations_to_fixpoint = 0;
    bool invariant = false;
    bool orbit_disjoint = false;
    bool boundary_forward_invariant = false;
};

AttractorRecord make_attractor_record(const TransitionGraph& g, const BoxSet& block);

struct ConleyReport {
    std::uint32_t boxes = 0;
    std::size_t blocks = 0;
    bool sink_present = false;
    std::uint32_t lhs_count = 0;  // complement of the chain recurrent boxes
    std::uint32_t rhs_count = 0;  // union of strict basin minus attractor
    std::uint32_t lhs_minus_rhs = 0;
    std::uint32_t rhs_minus_lhs = 0;
    BoxSet lhs;
    BoxSet rhs;

    std::uint32_t symmetric_difference() const { return lhs_minus_rhs + rhs_minus_lhs; }
    bool holds() const { return symmetric_difference() == 0; }
    /// "", "lhs_not_in_rhs", "rhs_not_in_lhs" or "both".
    std::string failing_direction() const;
};

ConleyReport verify_conley_decomposition(const TransitionGraph& g);
ConleyReport verify_conley_decomposition(const TransitionGraph& g, const std::vector<BoxSet>& blocks);

struct InvarianceReport {
    bool invariant = false;
    bool orbit_disjoint = false;
    bool boundary_forward_invariant = false;
    std::uint32_t core_boxes = 0;
    std::uint32_t boundary_boxes = 0;
    int disjointness_samples = 0;
    int disjointness_violations = 0;
    int boundary_samples = 0;
    int boundary_violations = 0;

    bool passed() const { return invariant && orbit_disjoint && boundary_forward_invariant; }
};

/// (i) F(A) = A on boxes. (ii) Sampled orbits from U - A (n <= steps) never
/// enter the core of A, the largest part of A without edges from outside A.
/// (iii) Samples from boundary boxes of A land in A or its one-box collar
/// (or leave the window).
InvarianceReport attractor_invariance_check(const TransitionGraph& g, const BoxSet& u, const BoxSet& a, int samples,
                                            int steps, std::uint64_t seed);

/// Fraction of points sampled uniformly in K whose orbit stays inside the
/// ball of radius R for n <= n_max.
double escape_fraction(const DynamicalMap& map, const Grid& grid, const BoxSet& k, double radius, int n_max,
                       int samples, std::uint64_t seed, int threads = 1);

}  // namespace dynkit
