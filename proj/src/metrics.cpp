#include "detlsh/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace detlsh {

GroundTruth brute_force_knn(const Dataset& data, const Dataset& queries, int k) {
    if (k < 1 || static_cast<std::size_t>(k) > data.n)
        throw std::invalid_argument("brute_force_knn: k must lie in [1, n]");
    if (queries.d != data.d)
        throw std::invalid_argument("brute_force_knn: query dimension mismatch");

    GroundTruth truth;
    truth.k = k;
    truth.nq = queries.n;
    truth.positions.resize(queries.n * static_cast<std::size_t>(k));
    truth.distances.resize(queries.n * static_cast<std::size_t>(k));

    std::vector<std::pair<double, std::uint32_t>> scored(data.n);
    for (std::size_t qi = 0; qi < queries.n; ++qi) {
        const auto q = queries.row(qi);
        for (std::size_t z = 0; z < data.n; ++z)
            scored[z] = {l2_distance_sq(q, data.row(z)), static_cast<std::uint32_t>(z)};
        std::partial_sort(scored.begin(), scored.begin() + k, scored.end());
        for (int t = 0; t < k; ++t) {
            const std::size_t out = qi * static_cast<std::size_t>(k) + t;
            truth.positions[out] = scored[static_cast<std::size_t>(t)].second;
            truth.distances[out] = std::sqrt(scored[static_cast<std::size_t>(t)].first);
        }
    }
    return truth;
}

double recall(std::span<const std::pair<std::uint32_t, double>> hits,
              std::span<const std::uint32_t> truth, int k) {
    std::size_t shared = 0;
    for (const auto& [pos, dist] : hits)
        if (std::find(truth.begin(), truth.end(), pos) != truth.end()) ++shared;
    return static_cast<double>(shared) / static_cast<double>(k);
}

double overall_ratio(std::span<const std::pair<std::uint32_t, double>> hits,
                     std::span<const double> truth_distances, int k,
                     std::size_t* excluded) {
    if (excluded) *excluded = 0;
    double sum = 0.0;
    std::size_t counted = 0;
    const std::size_t ranks = std::min<std::size_t>(hits.size(), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < ranks; ++i) {
        const double truth = truth_distances[i];
        const double result = hits[i].second;
        if (truth == 0.0) {
            if (result == 0.0) {
                sum += 1.0;
                ++counted;
            } else if (excluded) {
                ++*excluded;
            }
            continue;
        }
        sum += result / truth;
        ++counted;
    }
    return counted == 0 ? 1.0 : sum / static_cast<double>(counted);
}

}  // namespace detlsh
