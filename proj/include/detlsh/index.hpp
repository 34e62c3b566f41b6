#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "detlsh/de_tree.hpp"
#include "detlsh/encoder.hpp"
#include "detlsh/projection.hpp"

namespace detlsh {

enum class ProjectionKind : std::uint8_t {
    lsh = 0,  // Gaussian random projections, L spaces
    paa = 1,  // segment means, single space
};

// Assembled index: parameters, projections, breakpoint table, L trees, and a
// handle to the original points for exact distances. Immutable after build;
// queries share it freely.
struct DetIndex {
    LshParams params;  // derived fields (alpha1, alpha2, epsilon, beta, r_min) populated
    ProjectionKind projection = ProjectionKind::lsh;
    HashFamily family;  // unused in paa mode
    BreakpointTable table;
    std::vector<DeTree> trees;
    std::shared_ptr<const Dataset> data;
    std::uint64_t fingerprint = 0;

    std::size_t n() const { return data ? data->n : 0; }
    int d() const { return data ? data->d : 0; }

    std::vector<float> project_query(std::span<const float> q, int space) const;
};

DetIndex build_index(std::shared_ptr<const Dataset> data, LshParams params, std::uint64_t seed);

// Same pipeline with a caller-supplied family (the family's d/K/L win).
DetIndex build_index_with_family(std::shared_ptr<const Dataset> data, LshParams params,
                                 HashFamily family, std::uint64_t seed);

// Single PAA-summarized space, one tree.
DetIndex build_det_only_index(std::shared_ptr<const Dataset> data, LshParams params,
                              std::uint64_t seed);

// ceil(beta * n + k), capped at n.
std::size_t candidate_budget(double beta, std::size_t n, int k);

// Deduplicated candidates with the exact original-space distance memoized at
// insertion.
class CandidateSet {
public:
    CandidateSet(const Dataset& data, std::span<const float> query);

    // False if the position was already present.
    bool insert(std::uint32_t position);

    std::size_t size() const { return members_.size(); }
    std::size_t count_within(double limit) const;
    std::optional<std::pair<std::uint32_t, double>> closest() const;
    // Ascending by (distance, position).
    std::vector<std::pair<std::uint32_t, double>> top_k(int k) const;

private:
    const Dataset& data_;
    std::span<const float> query_;
    std::vector<std::uint8_t> seen_;
    std::vector<std::pair<double, std::uint32_t>> members_;
};

// Single-radius decision query: a candidate within c*r of q, if one surfaces.
std::optional<std::pair<std::uint32_t, double>> rc_ann(const DetIndex& index,
                                                       std::span<const float> q, double r,
                                                       double c);

struct QueryResult {
    std::vector<std::pair<std::uint32_t, double>> hits;  // ascending distance, <= k
    double radius_used = 0.0;
    std::size_t candidates_seen = 0;
};

// Grows the radius geometrically from r_min until the candidate budget fills
// or k candidates land within c*r, then returns the top-k by exact distance.
QueryResult ck_ann(const DetIndex& index, std::span<const float> q, int k);

// Smallest radius on the geometric grid whose candidate count reaches
// beta*n + k while radius/c falls short; median over the probes.
double estimate_rmin(const DetIndex& index, std::span<const std::vector<float>> probes, int k);

}  // namespace detlsh
