#include "detlsh/persist.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace detlsh {

namespace {

constexpr char kMagic[4] = {'D', 'E', 'T', 'L'};
constexpr std::uint32_t kVersion = 1;

void put(std::ostream& out, const void* bytes, std::size_t len) {
    out.write(static_cast<const char*>(bytes), static_cast<std::streamsize>(len));
}

template <typename T>
void put_scalar(std::ostream& out, T value) {
    put(out, &value, sizeof(T));
}

void get(std::istream& in, void* bytes, std::size_t len) {
    in.read(static_cast<char*>(bytes), static_cast<std::streamsize>(len));
    if (static_cast<std::size_t>(in.gcount()) != len)
        throw FormatError(FormatErrorKind::truncated, "index stream ended early");
}

template <typename T>
T get_scalar(std::istream& in) {
    T value{};
    get(in, &value, sizeof(T));
    return value;
}

void write_subtree(std::ostream& out, const DeTree& tree, std::int32_t index) {
    const DeTreeNode& node = tree.nodes[static_cast<std::size_t>(index)];
    put_scalar<std::uint8_t>(out, node.is_leaf ? 1 : 0);
    if (node.is_leaf) {
        put_scalar<std::uint32_t>(out, static_cast<std::uint32_t>(node.entries.size()));
        put(out, node.entries.symbols.data(), node.entries.symbols.size());
        put(out, node.entries.positions.data(),
            node.entries.positions.size() * sizeof(std::uint32_t));
        return;
    }
    put_scalar<std::uint8_t>(out, node.split_dim);
    write_subtree(out, tree, node.left);
    write_subtree(out, tree, node.right);
}

// Rebuilds a preorder subtree; prefixes are reconstructed from the parent's.
std::int32_t read_subtree(std::istream& in, DeTree& tree, const NodePrefix& prefix,
                          std::size_t n) {
    const auto kind = get_scalar<std::uint8_t>(in);
    if (kind > 1) throw FormatError(FormatErrorKind::corrupt, "bad node kind");
    const auto index = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[static_cast<std::size_t>(index)].prefix = prefix;

    if (kind == 1) {
        DeTreeNode& node = tree.nodes[static_cast<std::size_t>(index)];
        const auto count = get_scalar<std::uint32_t>(in);
        node.entries.symbols.resize(static_cast<std::size_t>(count) *
                                    static_cast<std::size_t>(tree.K));
        node.entries.positions.resize(count);
        get(in, node.entries.symbols.data(), node.entries.symbols.size());
        get(in, node.entries.positions.data(), node.entries.positions.size() * sizeof(std::uint32_t));
        for (const std::uint32_t pos : node.entries.positions)
            if (pos >= n) throw FormatError(FormatErrorKind::corrupt, "entry position out of range");
        for (const std::uint8_t sym : node.entries.symbols)
            if (sym >= tree.n_regions)
                throw FormatError(FormatErrorKind::corrupt, "entry symbol out of range");
        return index;
    }

    const auto split_dim = get_scalar<std::uint8_t>(in);
    if (split_dim >= tree.K) throw FormatError(FormatErrorKind::corrupt, "split dimension out of range");
    if (prefix.bits[split_dim] >= tree.symbol_bits)
        throw FormatError(FormatErrorKind::corrupt, "split below full symbol depth");
    NodePrefix left = prefix;
    NodePrefix right = prefix;
    left.bits[split_dim] += 1;
    right.bits[split_dim] += 1;
    left.value[split_dim] = static_cast<std::uint8_t>(left.value[split_dim] << 1);
    right.value[split_dim] = static_cast<std::uint8_t>((right.value[split_dim] << 1) | 1);

    const std::int32_t left_index = read_subtree(in, tree, left, n);
    const std::int32_t right_index = read_subtree(in, tree, right, n);
    DeTreeNode& node = tree.nodes[static_cast<std::size_t>(index)];
    node.is_leaf = false;
    node.split_dim = split_dim;
    node.left = left_index;
    node.right = right_index;
    return index;
}

}  // namespace

void save_index(const DetIndex& index, std::ostream& out) {
    put(out, kMagic, sizeof(kMagic));
    put_scalar<std::uint32_t>(out, kVersion);

    const LshParams& p = index.params;
    put_scalar<std::int32_t>(out, p.K);
    put_scalar<std::int32_t>(out, p.L);
    put_scalar<double>(out, p.c);
    put_scalar<double>(out, p.beta);
    put_scalar<double>(out, p.epsilon);
    put_scalar<double>(out, p.alpha1);
    put_scalar<double>(out, p.alpha2);
    put_scalar<std::int32_t>(out, p.n_regions);
    put_scalar<double>(out, p.sample_fraction);
    put_scalar<std::int32_t>(out, p.leaf_capacity);
    put_scalar<double>(out, p.r_min);
    put_scalar<std::int32_t>(out, p.k);
    put_scalar<std::uint8_t>(out, static_cast<std::uint8_t>(index.projection));

    put_scalar<std::uint64_t>(out, index.family.seed);
    put_scalar<std::int32_t>(out, index.family.d);
    put_scalar<std::int32_t>(out, index.family.K);
    put_scalar<std::int32_t>(out, index.family.L);

    put_scalar<std::int32_t>(out, index.table.L);
    put_scalar<std::int32_t>(out, index.table.K);
    put_scalar<std::int32_t>(out, index.table.n_regions);
    put_scalar<std::uint64_t>(out, index.table.sample_size);
    put(out, index.table.boundaries.data(), index.table.boundaries.size() * sizeof(float));

    put_scalar<std::uint64_t>(out, index.n());
    put_scalar<std::int32_t>(out, index.d());

    put_scalar<std::uint32_t>(out, static_cast<std::uint32_t>(index.trees.size()));
    for (const DeTree& tree : index.trees) {
        put_scalar<std::int32_t>(out, tree.space);
        put_scalar<std::int32_t>(out, tree.max_size);
        std::uint32_t filled = 0;
        for (const std::int32_t child : tree.root_children)
            if (child >= 0) ++filled;
        put_scalar<std::uint32_t>(out, filled);
        for (std::size_t slot = 0; slot < tree.root_children.size(); ++slot) {
            if (tree.root_children[slot] < 0) continue;
            put_scalar<std::uint32_t>(out, static_cast<std::uint32_t>(slot));
            write_subtree(out, tree, tree.root_children[slot]);
        }
    }

    put_scalar<std::uint64_t>(out, index.fingerprint);
    if (!out) throw FormatError(FormatErrorKind::io, "index write failed");
}

void save_index(const DetIndex& index, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(FormatErrorKind::io, "cannot open " + path + " for writing");
    save_index(index, out);
}

DetIndex load_index(std::istream& in, std::shared_ptr<const Dataset> data) {
    char magic[4] = {};
    get(in, magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw FormatError(FormatErrorKind::bad_magic, "bad index magic, expected \"DETL\"");
    const auto version = get_scalar<std::uint32_t>(in);
    if (version != kVersion)
        throw FormatError(FormatErrorKind::bad_version,
                          "unsupported index format version " + std::to_string(version));

    DetIndex index;
    LshParams& p = index.params;
    p.K = get_scalar<std::int32_t>(in);
    p.L = get_scalar<std::int32_t>(in);
    p.c = get_scalar<double>(in);
    p.beta = get_scalar<double>(in);
    p.epsilon = get_scalar<double>(in);
    p.alpha1 = get_scalar<double>(in);
    p.alpha2 = get_scalar<double>(in);
    p.n_regions = get_scalar<std::int32_t>(in);
    p.sample_fraction = get_scalar<double>(in);
    p.leaf_capacity = get_scalar<std::int32_t>(in);
    p.r_min = get_scalar<double>(in);
    p.k = get_scalar<std::int32_t>(in);
    index.projection = static_cast<ProjectionKind>(get_scalar<std::uint8_t>(in));
    if (p.K < 1 || p.K > 24 || p.L < 1 || p.n_regions < 2 || p.n_regions > 256)
        throw FormatError(FormatErrorKind::corrupt, "parameter block out of range");

    const auto family_seed = get_scalar<std::uint64_t>(in);
    const auto family_d = get_scalar<std::int32_t>(in);
    const auto family_k = get_scalar<std::int32_t>(in);
    const auto family_l = get_scalar<std::int32_t>(in);
    if (index.projection == ProjectionKind::lsh)
        index.family = sample_hash_family(family_d, family_k, family_l, family_seed);

    index.table.L = get_scalar<std::int32_t>(in);
    index.table.K = get_scalar<std::int32_t>(in);
    index.table.n_regions = get_scalar<std::int32_t>(in);
    index.table.sample_size = get_scalar<std::uint64_t>(in);
    if (index.table.L != p.L || index.table.K != p.K || index.table.n_regions != p.n_regions)
        throw FormatError(FormatErrorKind::corrupt, "breakpoint table shape mismatch");
    index.table.boundaries.resize(static_cast<std::size_t>(p.L) * p.K *
                                  (static_cast<std::size_t>(p.n_regions) + 1));
    get(in, index.table.boundaries.data(), index.table.boundaries.size() * sizeof(float));

    const auto n = get_scalar<std::uint64_t>(in);
    const auto d = get_scalar<std::int32_t>(in);

    const auto tree_count = get_scalar<std::uint32_t>(in);
    if (tree_count != static_cast<std::uint32_t>(p.L))
        throw FormatError(FormatErrorKind::corrupt, "tree count does not match L");
    int symbol_bits = 0;
    while ((1 << symbol_bits) < p.n_regions) ++symbol_bits;
    index.trees.resize(tree_count);
    for (std::uint32_t t = 0; t < tree_count; ++t) {
        DeTree& tree = index.trees[t];
        tree.space = get_scalar<std::int32_t>(in);
        if (tree.space < 0 || tree.space >= p.L)
            throw FormatError(FormatErrorKind::corrupt, "tree space index out of range");
        tree.max_size = get_scalar<std::int32_t>(in);
        if (tree.max_size < 1)
            throw FormatError(FormatErrorKind::corrupt, "non-positive leaf capacity");
        tree.K = p.K;
        tree.n_regions = p.n_regions;
        tree.symbol_bits = symbol_bits;
        tree.root_children.assign(std::size_t{1} << p.K, -1);
        const auto filled = get_scalar<std::uint32_t>(in);
        for (std::uint32_t s = 0; s < filled; ++s) {
            const auto slot = get_scalar<std::uint32_t>(in);
            if (slot >= tree.root_children.size())
                throw FormatError(FormatErrorKind::corrupt, "root slot out of range");
            NodePrefix prefix;
            prefix.bits.assign(static_cast<std::size_t>(p.K), 1);
            prefix.value.resize(static_cast<std::size_t>(p.K));
            for (int j = 0; j < p.K; ++j)
                prefix.value[static_cast<std::size_t>(j)] =
                    static_cast<std::uint8_t>((slot >> j) & 1);
            tree.root_children[slot] = read_subtree(in, tree, prefix, n);
        }
    }

    const auto fingerprint = get_scalar<std::uint64_t>(in);
    if (!data) throw std::invalid_argument("load_index: dataset handle required");
    if (data->n != n || data->d != d || dataset_fingerprint(*data) != fingerprint)
        throw FormatError(FormatErrorKind::fingerprint_mismatch,
                          "index was built from a different dataset");
    index.data = std::move(data);
    index.fingerprint = fingerprint;
    return index;
}

DetIndex load_index(const std::string& path, std::shared_ptr<const Dataset> data) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(FormatErrorKind::io, "cannot open " + path);
    return load_index(in, std::move(data));
}

std::size_t serialized_size(const DetIndex& index) {
    std::ostringstream out(std::ios::binary);
    save_index(index, out);
    return out.str().size();
}

}  // namespace detlsh
