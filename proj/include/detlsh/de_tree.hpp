#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "detlsh/encoder.hpp"

namespace detlsh {

// Bit-prefix per dimension: the high `bits[j]` bits of dimension j's region
// symbol. A child extends its parent by exactly one bit in one dimension.
struct NodePrefix {
    std::vector<std::uint8_t> bits;   // bits used, per dimension
    std::vector<std::uint8_t> value;  // prefix value, per dimension
};

struct LeafEntries {
    std::vector<std::uint8_t> symbols;  // size() * K, row-major
    std::vector<std::uint32_t> positions;

    std::size_t size() const { return positions.size(); }
};

struct DeTreeNode {
    bool is_leaf = true;
    std::uint8_t split_dim = 0;  // internal nodes: the dimension refined here
    std::int32_t left = -1;      // child taking appended bit 0
    std::int32_t right = -1;     // child taking appended bit 1
    NodePrefix prefix;
    LeafEntries entries;  // leaf nodes only
};

struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
};

// Encoding tree for one projected space: a root directory of 2^K one-bit
// children (created lazily), binary internal refinements below, leaves of
// (symbols, position) entries. Immutable once built.
class DeTree {
public:
    int space = 0;
    int K = 0;
    int n_regions = 0;
    int symbol_bits = 0;  // log2(n_regions)
    int max_size = 0;
    std::vector<std::int32_t> root_children;  // 2^K slots, -1 = empty
    std::vector<DeTreeNode> nodes;

    std::size_t total_entries() const;

    std::uint32_t root_slot(std::span<const std::uint8_t> symbols) const;
    void insert(std::span<const std::uint8_t> symbols, std::uint32_t position);
};

// max_size >= 1; K <= 24 so the 2^K root directory stays materializable.
DeTree build_tree(const EncodedDataset& encoded, int space, int max_size);

// Splits the leaf at node_index on the dimension whose next bit divides its
// entries most evenly (ties to the lowest dimension). Returns false when every
// dimension is already refined to full symbol depth; the caller keeps the
// overflowing leaf.
bool split_leaf(DeTree& tree, std::int32_t node_index);

// Covered coordinate range of `node` along `dim`. Edges touching region 0 or
// region n_regions - 1 are infinite: clamped points may lie beyond the
// sampled boundaries, so only infinite outer edges keep the bounds sound.
Interval node_interval(const DeTree& tree, const DeTreeNode& node, int dim,
                       const BreakpointTable& table);

// Lower bound on || q_proj, o' || over every point o in the node's subtree.
double mindist(std::span<const float> q_proj, const DeTree& tree, const DeTreeNode& node,
               const BreakpointTable& table);

// Upper bound over the node's box; +inf whenever any edge used is infinite.
double maxdist(std::span<const float> q_proj, const DeTree& tree, const DeTreeNode& node,
               const BreakpointTable& table);

using ProjectedLookup = std::function<const float*(std::uint32_t)>;

// Exactly { pos : || q_proj, o'_pos || <= radius }: prunes subtrees by
// mindist, accepts whole leaves by maxdist, checks boundary leaves entry by
// entry through `lookup`.
std::vector<std::uint32_t> range_query_exact(const DeTree& tree, const BreakpointTable& table,
                                             std::span<const float> q_proj, double radius,
                                             const ProjectedLookup& lookup);

// Sink returns false to stop the drain.
using CandidateSink = std::function<bool(std::uint32_t)>;

// Collects every leaf with mindist <= radius, then emits whole leaves in
// ascending mindist order. Never needs per-entry projected distances; the
// emitted set is a superset of the exact result at the same radius.
void range_query_optimized(const DeTree& tree, const BreakpointTable& table,
                           std::span<const float> q_proj, double radius,
                           const CandidateSink& sink);

}  // namespace detlsh
