#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace detlsh {

// Row-major matrix of n points in R^d.
struct Dataset {
    std::size_t n = 0;
    int d = 0;
    std::vector<float> values;  // n * d

    std::span<const float> row(std::size_t i) const {
        return {values.data() + i * static_cast<std::size_t>(d), static_cast<std::size_t>(d)};
    }
    float* row_data(std::size_t i) { return values.data() + i * static_cast<std::size_t>(d); }
};

inline double l2_distance_sq(std::span<const float> a, std::span<const float> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double diff = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += diff * diff;
    }
    return acc;
}

inline double l2_distance(std::span<const float> a, std::span<const float> b) {
    return std::sqrt(l2_distance_sq(a, b));
}

// 64-bit content hash over (n, d, values); guards indexes against being
// queried with a different dataset than they were built from.
std::uint64_t dataset_fingerprint(const Dataset& data);

}  // namespace detlsh
