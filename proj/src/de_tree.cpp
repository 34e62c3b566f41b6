#include "detlsh/de_tree.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace detlsh {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int symbol_bits_for(int n_regions) {
    int bits = 0;
    while ((1 << bits) < n_regions) ++bits;
    return bits;
}

// Bit of `symbol` appended when a prefix of `used` bits grows by one.
int next_bit(std::uint8_t symbol, int used, int symbol_bits) {
    return (symbol >> (symbol_bits - 1 - used)) & 1;
}

void append_entry(LeafEntries& entries, std::span<const std::uint8_t> symbols,
                  std::uint32_t position) {
    entries.symbols.insert(entries.symbols.end(), symbols.begin(), symbols.end());
    entries.positions.push_back(position);
}

}  // namespace

std::size_t DeTree::total_entries() const {
    std::size_t total = 0;
    for (const auto& node : nodes)
        if (node.is_leaf) total += node.entries.size();
    return total;
}

std::uint32_t DeTree::root_slot(std::span<const std::uint8_t> symbols) const {
    std::uint32_t slot = 0;
    for (int j = 0; j < K; ++j)
        slot |= static_cast<std::uint32_t>(next_bit(symbols[static_cast<std::size_t>(j)], 0,
                                                    symbol_bits))
                << j;
    return slot;
}

void DeTree::insert(std::span<const std::uint8_t> symbols, std::uint32_t position) {
    const std::uint32_t slot = root_slot(symbols);
    if (root_children[slot] < 0) {
        DeTreeNode node;
        node.prefix.bits.assign(static_cast<std::size_t>(K), 1);
        node.prefix.value.resize(static_cast<std::size_t>(K));
        for (int j = 0; j < K; ++j)
            node.prefix.value[static_cast<std::size_t>(j)] =
                static_cast<std::uint8_t>((slot >> j) & 1);
        root_children[slot] = static_cast<std::int32_t>(nodes.size());
        nodes.push_back(std::move(node));
    }

    std::int32_t cur = root_children[slot];
    for (;;) {
        while (!nodes[cur].is_leaf) {
            const DeTreeNode& nd = nodes[cur];
            const int dim = nd.split_dim;
            const int bit = next_bit(symbols[static_cast<std::size_t>(dim)],
                                     nd.prefix.bits[static_cast<std::size_t>(dim)], symbol_bits);
            cur = bit ? nd.right : nd.left;
        }
        if (nodes[cur].entries.size() < static_cast<std::size_t>(max_size)) break;
        if (!split_leaf(*this, cur)) break;  // unsplittable: leaf overflows
    }
    append_entry(nodes[cur].entries, symbols, position);
}

bool split_leaf(DeTree& tree, std::int32_t node_index) {
    DeTreeNode& node = tree.nodes[node_index];
    if (!node.is_leaf) throw std::invalid_argument("split_leaf: node is not a leaf");
    const int K = tree.K;
    const std::size_t count = node.entries.size();

    int best_dim = -1;
    std::size_t best_imbalance = 0;
    for (int dim = 0; dim < K; ++dim) {
        const int used = node.prefix.bits[static_cast<std::size_t>(dim)];
        if (used >= tree.symbol_bits) continue;
        std::size_t ones = 0;
        for (std::size_t e = 0; e < count; ++e) {
            const std::uint8_t sym = node.entries.symbols[e * K + dim];
            ones += static_cast<std::size_t>(next_bit(sym, used, tree.symbol_bits));
        }
        const std::size_t zeros = count - ones;
        const std::size_t imbalance = zeros > ones ? zeros - ones : ones - zeros;
        if (best_dim < 0 || imbalance < best_imbalance) {
            best_dim = dim;
            best_imbalance = imbalance;
        }
    }
    if (best_dim < 0) return false;

    DeTreeNode left, right;
    left.prefix = node.prefix;
    right.prefix = node.prefix;
    const std::size_t bd = static_cast<std::size_t>(best_dim);
    left.prefix.bits[bd] += 1;
    right.prefix.bits[bd] += 1;
    left.prefix.value[bd] = static_cast<std::uint8_t>(left.prefix.value[bd] << 1);
    right.prefix.value[bd] = static_cast<std::uint8_t>((right.prefix.value[bd] << 1) | 1);

    const int used = node.prefix.bits[bd];
    for (std::size_t e = 0; e < count; ++e) {
        std::span<const std::uint8_t> sym{node.entries.symbols.data() + e * K,
                                          static_cast<std::size_t>(K)};
        const int bit = next_bit(sym[bd], used, tree.symbol_bits);
        append_entry(bit ? right.entries : left.entries, sym, node.entries.positions[e]);
    }

    const std::int32_t left_index = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.push_back(std::move(left));
    const std::int32_t right_index = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.push_back(std::move(right));

    DeTreeNode& parent = tree.nodes[node_index];  // re-fetch: vector may have grown
    parent.is_leaf = false;
    parent.split_dim = static_cast<std::uint8_t>(best_dim);
    parent.left = left_index;
    parent.right = right_index;
    parent.entries = LeafEntries{};
    return true;
}

DeTree build_tree(const EncodedDataset& encoded, int space, int max_size) {
    if (max_size < 1) throw std::invalid_argument("build_tree: max_size must be positive");
    if (encoded.K < 1 || encoded.K > 24)
        throw std::invalid_argument("build_tree: K must lie in [1, 24]");
    if (space < 0 || space >= encoded.L)
        throw std::invalid_argument("build_tree: space index out of range");
    if (encoded.n_regions < 2 || (encoded.n_regions & (encoded.n_regions - 1)) != 0)
        throw std::invalid_argument("build_tree: n_regions must be a power of two >= 2");

    DeTree tree;
    tree.space = space;
    tree.K = encoded.K;
    tree.n_regions = encoded.n_regions;
    tree.symbol_bits = symbol_bits_for(encoded.n_regions);
    tree.max_size = max_size;
    tree.root_children.assign(std::size_t{1} << encoded.K, -1);
    for (std::size_t z = 0; z < encoded.n; ++z)
        tree.insert(encoded.row(space, z), static_cast<std::uint32_t>(z));
    return tree;
}

Interval node_interval(const DeTree& tree, const DeTreeNode& node, int dim,
                       const BreakpointTable& table) {
    const int bits = node.prefix.bits[static_cast<std::size_t>(dim)];
    Interval iv;
    if (bits == 0) return iv;
    const int value = node.prefix.value[static_cast<std::size_t>(dim)];
    const int width = tree.symbol_bits - bits;
    const int lo_region = value << width;
    const int hi_region = ((value + 1) << width) - 1;
    const auto row = table.row(tree.space, dim);
    if (lo_region > 0) iv.lo = row[static_cast<std::size_t>(lo_region)];
    if (hi_region < tree.n_regions - 1) iv.hi = row[static_cast<std::size_t>(hi_region) + 1];
    return iv;
}

double mindist(std::span<const float> q_proj, const DeTree& tree, const DeTreeNode& node,
               const BreakpointTable& table) {
    double acc = 0.0;
    for (int dim = 0; dim < tree.K; ++dim) {
        const Interval iv = node_interval(tree, node, dim, table);
        const double v = q_proj[static_cast<std::size_t>(dim)];
        double pen = 0.0;
        if (v < iv.lo) {
            pen = iv.lo - v;
        } else if (v > iv.hi) {
            pen = v - iv.hi;
        }
        acc += pen * pen;
    }
    return std::sqrt(acc);
}

double maxdist(std::span<const float> q_proj, const DeTree& tree, const DeTreeNode& node,
               const BreakpointTable& table) {
    double acc = 0.0;
    for (int dim = 0; dim < tree.K; ++dim) {
        const Interval iv = node_interval(tree, node, dim, table);
        if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi)) return kInf;
        const double v = q_proj[static_cast<std::size_t>(dim)];
        const double far = std::max(std::fabs(v - iv.lo), std::fabs(v - iv.hi));
        acc += far * far;
    }
    return std::sqrt(acc);
}

std::vector<std::uint32_t> range_query_exact(const DeTree& tree, const BreakpointTable& table,
                                             std::span<const float> q_proj, double radius,
                                             const ProjectedLookup& lookup) {
    std::vector<std::uint32_t> out;
    const std::size_t K = static_cast<std::size_t>(tree.K);

    const auto visit = [&](const auto& self, std::int32_t index) -> void {
        const DeTreeNode& node = tree.nodes[index];
        if (mindist(q_proj, tree, node, table) > radius) return;
        if (!node.is_leaf) {
            self(self, node.left);
            self(self, node.right);
            return;
        }
        if (maxdist(q_proj, tree, node, table) <= radius) {
            out.insert(out.end(), node.entries.positions.begin(), node.entries.positions.end());
            return;
        }
        for (const std::uint32_t pos : node.entries.positions) {
            const float* coords = lookup(pos);
            const double dist = l2_distance(q_proj, {coords, K});
            if (dist <= radius) out.push_back(pos);
        }
    };

    for (const std::int32_t child : tree.root_children)
        if (child >= 0) visit(visit, child);
    return out;
}

void range_query_optimized(const DeTree& tree, const BreakpointTable& table,
                           std::span<const float> q_proj, double radius,
                           const CandidateSink& sink) {
    using Item = std::pair<double, std::int32_t>;  // (mindist, node); index breaks ties
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> leaves;

    std::vector<std::int32_t> stack;
    for (const std::int32_t child : tree.root_children)
        if (child >= 0) stack.push_back(child);
    while (!stack.empty()) {
        const std::int32_t index = stack.back();
        stack.pop_back();
        const DeTreeNode& node = tree.nodes[index];
        const double lower = mindist(q_proj, tree, node, table);
        if (lower > radius) continue;
        if (node.is_leaf) {
            leaves.emplace(lower, index);
        } else {
            stack.push_back(node.left);
            stack.push_back(node.right);
        }
    }

    while (!leaves.empty()) {
        const std::int32_t index = leaves.top().second;
        leaves.pop();
        for (const std::uint32_t pos : tree.nodes[index].entries.positions)
            if (!sink(pos)) return;
    }
}

}  // namespace detlsh
