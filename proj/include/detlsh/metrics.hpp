#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "detlsh/dataset.hpp"

namespace detlsh {

// Exact k nearest neighbors per query, ties broken by position.
struct GroundTruth {
    int k = 0;
    std::size_t nq = 0;
    std::vector<std::uint32_t> positions;  // nq * k
    std::vector<double> distances;         // nq * k, ascending per query

    std::span<const std::uint32_t> positions_for(std::size_t qi) const {
        return {positions.data() + qi * static_cast<std::size_t>(k),
                static_cast<std::size_t>(k)};
    }
    std::span<const double> distances_for(std::size_t qi) const {
        return {distances.data() + qi * static_cast<std::size_t>(k),
                static_cast<std::size_t>(k)};
    }
};

GroundTruth brute_force_knn(const Dataset& data, const Dataset& queries, int k);

// |result positions ∩ truth positions| / k.
double recall(std::span<const std::pair<std::uint32_t, double>> hits,
              std::span<const std::uint32_t> truth, int k);

// Mean rank-wise distance ratio result_i / truth_i. A zero truth distance
// contributes 1 when the result distance is also zero; otherwise the rank is
// dropped and counted in *excluded.
double overall_ratio(std::span<const std::pair<std::uint32_t, double>> hits,
                     std::span<const double> truth_distances, int k,
                     std::size_t* excluded = nullptr);

}  // namespace detlsh
