#include "detlsh/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace detlsh {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

void insertion_sort(float* a, std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo + 1; i < hi; ++i) {
        const float v = a[i];
        std::size_t j = i;
        while (j > lo && a[j - 1] > v) {
            a[j] = a[j - 1];
            --j;
        }
        a[j] = v;
    }
}

// Seeded-random pivot balanced by a median-of-three pass; the ordered picks
// double as scan sentinels so the inner loops need no bounds checks. Returns
// the pivot's final (sorted) position: [lo, p) <= a[p] <= (p, hi).
std::size_t partition_around(float* a, std::size_t lo, std::size_t hi, Rng& rng) {
    const std::size_t len = hi - lo;
    const std::size_t mid = lo + len / 2;
    std::swap(a[mid], a[lo + rng.bounded(len)]);
    if (a[mid] < a[lo]) std::swap(a[lo], a[mid]);
    if (a[hi - 1] < a[lo]) std::swap(a[lo], a[hi - 1]);
    if (a[hi - 1] < a[mid]) std::swap(a[mid], a[hi - 1]);
    std::swap(a[mid], a[lo + 1]);

    const float pivot = a[lo + 1];
    std::size_t i = lo + 1;   // a[lo+1] == pivot bounds the right scan
    std::size_t j = hi - 1;   // a[hi-1] >= pivot bounds the left scan
    for (;;) {
        do {
            ++i;
        } while (a[i] < pivot);
        do {
            --j;
        } while (a[j] > pivot);
        if (i >= j) break;
        std::swap(a[i], a[j]);
    }
    std::swap(a[lo + 1], a[j]);
    return j;
}

}  // namespace

std::vector<float> select_row_breakpoints(std::span<float> sample, int n_regions, Rng& rng) {
    if (!is_power_of_two(n_regions) || n_regions < 2)
        throw std::invalid_argument("select_row_breakpoints: n_regions must be a power of two >= 2");
    const std::size_t n_s = sample.size();
    if (n_s < static_cast<std::size_t>(n_regions))
        throw std::invalid_argument("select_row_breakpoints: sample smaller than region count");

    const std::size_t region_size = n_s / static_cast<std::size_t>(n_regions);
    std::vector<std::size_t> targets(static_cast<std::size_t>(n_regions) - 1);
    for (std::size_t t = 0; t < targets.size(); ++t) targets[t] = region_size * (t + 1) - 1;

    // Divide and conquer over (data range, target range) items: one partition
    // per item, shared by every rank it still has to place. Small fragments
    // fall back to insertion sort.
    struct Seg {
        std::size_t lo, hi;      // data range [lo, hi)
        std::size_t t_lo, t_hi;  // target range [t_lo, t_hi)
    };
    std::vector<Seg> work{{0, n_s, 0, targets.size()}};
    float* a = sample.data();
    while (!work.empty()) {
        const Seg s = work.back();
        work.pop_back();
        if (s.t_lo >= s.t_hi) continue;
        if (s.hi - s.lo <= 8) {
            insertion_sort(a, s.lo, s.hi);
            continue;
        }
        const std::size_t p = partition_around(a, s.lo, s.hi, rng);
        const auto first = targets.begin() + static_cast<std::ptrdiff_t>(s.t_lo);
        const auto last = targets.begin() + static_cast<std::ptrdiff_t>(s.t_hi);
        const std::size_t below =
            static_cast<std::size_t>(std::lower_bound(first, last, p) - targets.begin());
        const std::size_t above =
            static_cast<std::size_t>(std::upper_bound(first, last, p) - targets.begin());
        work.push_back({s.lo, p, s.t_lo, below});
        work.push_back({p + 1, s.hi, above, s.t_hi});
    }

    std::vector<float> row(static_cast<std::size_t>(n_regions) + 1);
    for (std::size_t t = 0; t < targets.size(); ++t) row[t + 1] = a[targets[t]];
    // First/last boundary come from the outermost final-region spans, which
    // after selection hold exactly the lowest / highest ranks.
    row[0] = *std::min_element(a, a + targets.front() + 1);
    row[static_cast<std::size_t>(n_regions)] = *std::max_element(a + targets.back(), a + n_s);
    return row;
}

BreakpointTable select_breakpoints(const ProjectedDataset& projected, int n_regions,
                                   double sample_fraction, std::uint64_t seed) {
    if (!is_power_of_two(n_regions) || n_regions < 2 || n_regions > 256)
        throw std::invalid_argument("select_breakpoints: n_regions must be a power of two in [2, 256]");
    if (!(sample_fraction > 0.0) || sample_fraction > 1.0)
        throw std::invalid_argument("select_breakpoints: sample_fraction must lie in (0, 1]");
    const std::size_t n = projected.n;
    std::size_t n_s = static_cast<std::size_t>(
        std::ceil(sample_fraction * static_cast<double>(n)));
    n_s = std::max(n_s, static_cast<std::size_t>(n_regions));
    if (n_s > n)
        throw std::invalid_argument("select_breakpoints: sample too small for region count");

    BreakpointTable table;
    table.L = projected.L;
    table.K = projected.K;
    table.n_regions = n_regions;
    table.sample_size = n_s;
    table.boundaries.resize(static_cast<std::size_t>(projected.L) * projected.K *
                            (static_cast<std::size_t>(n_regions) + 1));

    Rng rng(seed);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<float> sample(n_s);

    for (int i = 0; i < projected.L; ++i) {
        // One index sample per space, shared by all its dimensions.
        for (std::size_t t = 0; t < n_s; ++t)
            std::swap(idx[t], idx[t + rng.bounded(n - t)]);
        for (int j = 0; j < projected.K; ++j) {
            for (std::size_t t = 0; t < n_s; ++t)
                sample[t] = projected.row(i, idx[t])[static_cast<std::size_t>(j)];
            const auto row = select_row_breakpoints(sample, n_regions, rng);
            std::copy(row.begin(), row.end(), table.row_data(i, j));
        }
    }
    return table;
}

int locate_region(float value, std::span<const float> row, int n_regions) {
    const float* first = row.data();
    const float* last = first + n_regions + 1;
    const auto it = std::lower_bound(first, last, value);
    int region = static_cast<int>(it - first) - 1;
    if (region < 0) return 0;
    if (region > n_regions - 1) return n_regions - 1;
    return region;
}

EncodedDataset encode_dataset(const ProjectedDataset& projected, const BreakpointTable& table) {
    if (table.L != projected.L || table.K != projected.K)
        throw std::invalid_argument("encode_dataset: table shape does not match projected dataset");
    EncodedDataset enc;
    enc.L = projected.L;
    enc.K = projected.K;
    enc.n = projected.n;
    enc.n_regions = table.n_regions;
    enc.symbols.resize(static_cast<std::size_t>(projected.L) * projected.n * projected.K);
    std::size_t out = 0;
    for (int i = 0; i < projected.L; ++i) {
        for (std::size_t z = 0; z < projected.n; ++z) {
            const auto coords = projected.row(i, z);
            for (int j = 0; j < projected.K; ++j) {
                enc.symbols[out++] = static_cast<std::uint8_t>(
                    locate_region(coords[static_cast<std::size_t>(j)], table.row(i, j),
                                  table.n_regions));
            }
        }
    }
    return enc;
}

}  // namespace detlsh
