#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "detlsh/dataset.hpp"

namespace detlsh {

// L * K Gaussian projection vectors; h_ij(o) = dot(a_ij, o).
// Regenerating with the same (d, K, L, seed) reproduces the coefficients
// bit-for-bit.
struct HashFamily {
    int d = 0;
    int K = 0;
    int L = 0;
    std::uint64_t seed = 0;
    std::vector<float> coeffs;  // vector (i, j) at offset (i*K + j) * d

    std::span<const float> vec(int space, int dim) const {
        const std::size_t off =
            (static_cast<std::size_t>(space) * K + static_cast<std::size_t>(dim)) *
            static_cast<std::size_t>(d);
        return {coeffs.data() + off, static_cast<std::size_t>(d)};
    }
    bool empty() const { return coeffs.empty(); }
};

HashFamily sample_hash_family(int d, int K, int L, std::uint64_t seed);

// K-vector [h_i1(point), ..., h_iK(point)] for the given space index.
std::vector<float> project_point(const HashFamily& family, std::span<const float> point,
                                 int space);

// Same, into a caller-owned buffer of K floats.
void project_point_into(const HashFamily& family, std::span<const float> point, int space,
                        float* out);

// values[i][z] = H_i(o_z), stored row-major as [L][n][K].
struct ProjectedDataset {
    int L = 0;
    int K = 0;
    std::size_t n = 0;
    std::vector<float> values;

    std::span<const float> row(int space, std::size_t z) const {
        const std::size_t off = (static_cast<std::size_t>(space) * n + z) *
                                static_cast<std::size_t>(K);
        return {values.data() + off, static_cast<std::size_t>(K)};
    }
    float* row_data(int space, std::size_t z) {
        return values.data() +
               (static_cast<std::size_t>(space) * n + z) * static_cast<std::size_t>(K);
    }
};

ProjectedDataset project_dataset(const HashFamily& family, const Dataset& data);

// Segment means: the first K-1 segments have length floor(d/K), the last
// absorbs the remainder.
std::vector<float> paa_summarize(std::span<const float> point, int K);

// Single-space projected dataset built from PAA summaries (L = 1).
ProjectedDataset paa_project_dataset(const Dataset& data, int K);

struct DerivedParams {
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double epsilon = 0.0;
    double beta = 0.0;
};

// alpha1 = exp(-1/L); epsilon^2 = chi2_quantile(alpha1, K);
// alpha2 = upper-tail mass of chi^2(K) at epsilon^2 / c^2;
// beta = 2 * (1 - alpha2^L).
DerivedParams derive_params(int K, double c, int L);

struct LshParams {
    int K = 16;                  // projected dimension
    int L = 4;                   // number of trees / projected spaces
    double c = 1.5;              // approximation ratio, > 1
    double beta = 0.0;           // candidate fraction; <= 0 means use the derived value
    double epsilon = 0.0;        // derived at build
    double alpha1 = 0.0;         // derived at build
    double alpha2 = 0.0;         // derived at build
    int n_regions = 256;         // power of two, <= 256
    double sample_fraction = 0.1;
    int leaf_capacity = 128;
    double r_min = 0.0;          // <= 0 means estimate at build
    int k = 50;                  // default result count
};

}  // namespace detlsh
