#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "detlsh/projection.hpp"
#include "detlsh/rng.hpp"

namespace detlsh {

// Per (space, dimension) ascending region boundaries, n_regions + 1 each.
// boundaries[0] / boundaries[n_regions] are the sampled minimum / maximum;
// out-of-range values clamp into the edge regions when encoding.
struct BreakpointTable {
    int L = 0;
    int K = 0;
    int n_regions = 0;
    std::size_t sample_size = 0;
    std::vector<float> boundaries;  // row (i, j) at (i*K + j) * (n_regions + 1)

    std::span<const float> row(int space, int dim) const {
        const std::size_t w = static_cast<std::size_t>(n_regions) + 1;
        const std::size_t off = (static_cast<std::size_t>(space) * K + dim) * w;
        return {boundaries.data() + off, w};
    }
    float* row_data(int space, int dim) {
        const std::size_t w = static_cast<std::size_t>(n_regions) + 1;
        return boundaries.data() + (static_cast<std::size_t>(space) * K + dim) * w;
    }
};

// Reorders `sample` in place via multi-target quickselect and returns the
// n_regions + 1 boundaries. Interior boundaries equal the values a full sort
// would place at ranks floor(n_s / N_r) * t, t = 1 .. N_r - 1.
std::vector<float> select_row_breakpoints(std::span<float> sample, int n_regions, Rng& rng);

// Samples max(ceil(sample_fraction * n), n_regions) coordinates per space
// (without replacement, shared across that space's dimensions) and selects a
// boundary row per (space, dimension).
BreakpointTable select_breakpoints(const ProjectedDataset& projected, int n_regions,
                                   double sample_fraction, std::uint64_t seed);

// Region index in [0, n_regions): values below the first boundary clamp to
// region 0, values above the last clamp to n_regions - 1, and boundary ties
// resolve to the lower region (the global minimum maps to region 0).
int locate_region(float value, std::span<const float> row, int n_regions);

struct EncodedDataset {
    int L = 0;
    int K = 0;
    std::size_t n = 0;
    int n_regions = 0;
    std::vector<std::uint8_t> symbols;  // [L][n][K]

    std::span<const std::uint8_t> row(int space, std::size_t z) const {
        const std::size_t off = (static_cast<std::size_t>(space) * n + z) *
                                static_cast<std::size_t>(K);
        return {symbols.data() + off, static_cast<std::size_t>(K)};
    }
};

EncodedDataset encode_dataset(const ProjectedDataset& projected, const BreakpointTable& table);

}  // namespace detlsh
