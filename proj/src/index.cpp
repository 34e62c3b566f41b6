#include "detlsh/index.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "detlsh/rng.hpp"

namespace detlsh {

namespace {

// Seed sub-streams for the build stages.
enum : std::uint64_t { kStreamFamily = 0, kStreamBreakpoints = 1, kStreamProbes = 2 };

void validate_params(const LshParams& p, int d, ProjectionKind kind) {
    if (p.K < 1 || p.K > 24) throw std::invalid_argument("build_index: K must lie in [1, 24]");
    if (p.L < 1) throw std::invalid_argument("build_index: L must be positive");
    if (!(p.c > 1.0)) throw std::invalid_argument("build_index: c must exceed 1");
    if (p.leaf_capacity < 1)
        throw std::invalid_argument("build_index: leaf_capacity must be positive");
    if (kind == ProjectionKind::paa && p.K > d)
        throw std::invalid_argument("build_index: PAA requires K <= d");
}

struct ProbeProjections {
    // [probe][space] -> K coordinates
    std::vector<std::vector<std::vector<float>>> values;
};

// Exact-membership range count with dedup, aborting once `count` hits
// `budget`. Returns true when the budget was reached.
bool count_range_reaches(const DeTree& tree, const BreakpointTable& table,
                         std::span<const float> q_proj, double radius,
                         const ProjectedLookup& lookup, std::vector<std::uint8_t>& seen,
                         std::size_t& count, std::size_t budget) {
    const std::size_t K = static_cast<std::size_t>(tree.K);
    const auto visit = [&](const auto& self, std::int32_t index) -> bool {
        const DeTreeNode& node = tree.nodes[static_cast<std::size_t>(index)];
        if (mindist(q_proj, tree, node, table) > radius) return false;
        if (!node.is_leaf) return self(self, node.left) || self(self, node.right);
        const bool whole = maxdist(q_proj, tree, node, table) <= radius;
        for (const std::uint32_t pos : node.entries.positions) {
            if (seen[pos]) continue;
            if (!whole && l2_distance(q_proj, {lookup(pos), K}) > radius) continue;
            seen[pos] = 1;
            if (++count >= budget) return true;
        }
        return false;
    };
    for (const std::int32_t child : tree.root_children)
        if (child >= 0 && visit(visit, child)) return true;
    return false;
}

// Geometric grid search: the smallest radius r on the grid anchored at the
// shared guess with reaches(r) true and reaches(r / c) false. The candidate
// count is monotone in r, so the boundary point does not depend on which grid
// point the walk starts from.
template <typename Reaches>
double grid_search_radius(double start, double c, const Reaches& reaches) {
    constexpr int kMaxSteps = 200;
    double r = start;
    if (reaches(r)) {
        for (int i = 0; i < kMaxSteps && r / c > 0.0 && reaches(r / c); ++i) r /= c;
    } else {
        for (int i = 0; i < kMaxSteps; ++i) {
            r *= c;
            if (reaches(r)) break;
        }
    }
    return r;
}

double estimate_rmin_core(const DetIndex& index, const ProbeProjections& probes, int k,
                          const std::function<ProjectedLookup(int)>& lookup_for_space) {
    const std::size_t n = index.n();
    const int L = index.params.L;
    const int K = index.params.K;
    const double eps = index.params.epsilon;
    const double c = index.params.c;
    const std::size_t budget = candidate_budget(index.params.beta, n, k);

    // Initial guess: median pairwise projected distance of a strided sample,
    // rescaled into original-space radius units.
    const std::size_t m = std::min<std::size_t>(32, n);
    std::vector<float> sample_coords(m * static_cast<std::size_t>(K));
    {
        const auto lookup = lookup_for_space(0);
        for (std::size_t t = 0; t < m; ++t) {
            const std::uint32_t pos = static_cast<std::uint32_t>(t * n / m);
            const float* coords = lookup(pos);
            std::copy(coords, coords + K, sample_coords.data() + t * K);
        }
    }
    std::vector<double> pair_dists;
    pair_dists.reserve(m * (m - 1) / 2);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b)
            pair_dists.push_back(
                l2_distance({sample_coords.data() + a * K, static_cast<std::size_t>(K)},
                            {sample_coords.data() + b * K, static_cast<std::size_t>(K)}));
    double guess = 1.0;
    if (!pair_dists.empty()) {
        std::nth_element(pair_dists.begin(), pair_dists.begin() + pair_dists.size() / 2,
                         pair_dists.end());
        const double median = pair_dists[pair_dists.size() / 2];
        if (median > 0.0) guess = median / eps;
    }

    std::vector<std::uint8_t> seen(n);
    const auto reaches_for = [&](const std::vector<std::vector<float>>& probe_proj) {
        return [&](double r) -> bool {
            std::fill(seen.begin(), seen.end(), 0);
            std::size_t count = 0;
            for (int i = 0; i < L; ++i) {
                if (count_range_reaches(index.trees[static_cast<std::size_t>(i)], index.table,
                                        probe_proj[static_cast<std::size_t>(i)], eps * r,
                                        lookup_for_space(i), seen, count, budget))
                    return true;
            }
            return false;
        };
    };

    std::vector<double> results;
    results.reserve(probes.values.size());
    double start = guess;  // warm-start each probe from the previous boundary
    for (const auto& probe_proj : probes.values) {
        const double r = grid_search_radius(start, c, reaches_for(probe_proj));
        results.push_back(r);
        start = r;
    }
    std::sort(results.begin(), results.end());
    return results[(results.size() - 1) / 2];
}

DetIndex assemble(std::shared_ptr<const Dataset> data, LshParams params, ProjectionKind kind,
                  HashFamily family, const ProjectedDataset& projected, std::uint64_t seed) {
    DetIndex index;
    index.params = params;
    index.projection = kind;
    index.family = std::move(family);
    index.table = select_breakpoints(projected, params.n_regions, params.sample_fraction,
                                     mix_seed(seed, kStreamBreakpoints));
    const EncodedDataset encoded = encode_dataset(projected, index.table);
    index.trees.reserve(static_cast<std::size_t>(params.L));
    for (int i = 0; i < params.L; ++i)
        index.trees.push_back(build_tree(encoded, i, params.leaf_capacity));
    index.data = std::move(data);
    index.fingerprint = dataset_fingerprint(*index.data);

    if (index.params.r_min <= 0.0) {
        // Probe with sampled data points; the projected rows double as the
        // probe projections and the exact-distance lookup.
        Rng rng(mix_seed(seed, kStreamProbes));
        const std::size_t n_probes = std::min<std::size_t>(10, index.n());
        ProbeProjections probes;
        probes.values.resize(n_probes);
        for (auto& per_space : probes.values) {
            const std::uint32_t pos = static_cast<std::uint32_t>(rng.bounded(index.n()));
            per_space.resize(static_cast<std::size_t>(params.L));
            for (int i = 0; i < params.L; ++i) {
                const auto row = projected.row(i, pos);
                per_space[static_cast<std::size_t>(i)].assign(row.begin(), row.end());
            }
        }
        const auto lookup_for_space = [&projected](int space) -> ProjectedLookup {
            return [&projected, space](std::uint32_t pos) -> const float* {
                return projected.row(space, pos).data();
            };
        };
        index.params.r_min =
            estimate_rmin_core(index, probes, index.params.k, lookup_for_space);
    }
    return index;
}

}  // namespace

std::vector<float> DetIndex::project_query(std::span<const float> q, int space) const {
    if (projection == ProjectionKind::paa) {
        if (static_cast<int>(q.size()) != d())
            throw std::invalid_argument("project_query: query dimension mismatch");
        return paa_summarize(q, params.K);
    }
    return project_point(family, q, space);
}

std::size_t candidate_budget(double beta, std::size_t n, int k) {
    const double raw = std::max(0.0, beta) * static_cast<double>(n) + static_cast<double>(k);
    const auto budget = static_cast<std::size_t>(std::ceil(raw));
    return std::min(budget, n);
}

DetIndex build_index_with_family(std::shared_ptr<const Dataset> data, LshParams params,
                                 HashFamily family, std::uint64_t seed) {
    if (!data || data->n == 0) throw std::invalid_argument("build_index: empty dataset");
    params.K = family.K;
    params.L = family.L;
    validate_params(params, data->d, ProjectionKind::lsh);
    const DerivedParams derived = derive_params(params.K, params.c, params.L);
    params.alpha1 = derived.alpha1;
    params.alpha2 = derived.alpha2;
    params.epsilon = derived.epsilon;
    if (params.beta <= 0.0) params.beta = derived.beta;
    const ProjectedDataset projected = project_dataset(family, *data);
    return assemble(std::move(data), params, ProjectionKind::lsh, std::move(family), projected,
                    seed);
}

DetIndex build_index(std::shared_ptr<const Dataset> data, LshParams params, std::uint64_t seed) {
    if (!data || data->n == 0) throw std::invalid_argument("build_index: empty dataset");
    validate_params(params, data->d, ProjectionKind::lsh);
    HashFamily family =
        sample_hash_family(data->d, params.K, params.L, mix_seed(seed, kStreamFamily));
    return build_index_with_family(std::move(data), params, std::move(family), seed);
}

DetIndex build_det_only_index(std::shared_ptr<const Dataset> data, LshParams params,
                              std::uint64_t seed) {
    if (!data || data->n == 0) throw std::invalid_argument("build_index: empty dataset");
    params.L = 1;
    validate_params(params, data->d, ProjectionKind::paa);
    const DerivedParams derived = derive_params(params.K, params.c, params.L);
    params.alpha1 = derived.alpha1;
    params.alpha2 = derived.alpha2;
    params.epsilon = derived.epsilon;
    if (params.beta <= 0.0) params.beta = derived.beta;
    const ProjectedDataset projected = paa_project_dataset(*data, params.K);
    return assemble(std::move(data), params, ProjectionKind::paa, HashFamily{}, projected, seed);
}

CandidateSet::CandidateSet(const Dataset& data, std::span<const float> query)
    : data_(data), query_(query), seen_(data.n, 0) {}

bool CandidateSet::insert(std::uint32_t position) {
    if (seen_[position]) return false;
    seen_[position] = 1;
    members_.emplace_back(l2_distance(query_, data_.row(position)), position);
    return true;
}

std::size_t CandidateSet::count_within(double limit) const {
    std::size_t count = 0;
    for (const auto& [dist, pos] : members_)
        if (dist <= limit) ++count;
    return count;
}

std::optional<std::pair<std::uint32_t, double>> CandidateSet::closest() const {
    if (members_.empty()) return std::nullopt;
    const auto it = std::min_element(members_.begin(), members_.end());
    return std::make_pair(it->second, it->first);
}

std::vector<std::pair<std::uint32_t, double>> CandidateSet::top_k(int k) const {
    std::vector<std::pair<double, std::uint32_t>> sorted = members_;
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), sorted.size());
    std::partial_sort(sorted.begin(), sorted.begin() + take, sorted.end());
    std::vector<std::pair<std::uint32_t, double>> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.emplace_back(sorted[i].second, sorted[i].first);
    return out;
}

std::optional<std::pair<std::uint32_t, double>> rc_ann(const DetIndex& index,
                                                       std::span<const float> q, double r,
                                                       double c) {
    if (static_cast<int>(q.size()) != index.d())
        throw std::invalid_argument("rc_ann: query dimension mismatch");
    if (!(r > 0.0)) throw std::invalid_argument("rc_ann: radius must be positive");
    if (!(c > 1.0)) throw std::invalid_argument("rc_ann: c must exceed 1");

    const std::size_t budget = candidate_budget(index.params.beta, index.n(), 1);
    const double eps = index.params.epsilon;
    CandidateSet candidates(*index.data, q);
    for (int i = 0; i < index.params.L; ++i) {
        const auto q_proj = index.project_query(q, i);
        range_query_optimized(index.trees[static_cast<std::size_t>(i)], index.table, q_proj,
                              eps * r, [&](std::uint32_t pos) {
                                  candidates.insert(pos);
                                  return candidates.size() < budget;
                              });
        if (candidates.size() >= budget) return candidates.closest();
    }
    const auto best = candidates.closest();
    if (best && best->second <= c * r) return best;
    return std::nullopt;
}

QueryResult ck_ann(const DetIndex& index, std::span<const float> q, int k) {
    if (static_cast<int>(q.size()) != index.d())
        throw std::invalid_argument("ck_ann: query dimension mismatch");
    if (k < 1 || static_cast<std::size_t>(k) > index.n())
        throw std::invalid_argument("ck_ann: k must lie in [1, n]");
    if (!(index.params.r_min > 0.0))
        throw std::invalid_argument("ck_ann: index has no initial radius");

    const std::size_t budget = candidate_budget(index.params.beta, index.n(), k);
    const double eps = index.params.epsilon;
    const double c = index.params.c;
    const int L = index.params.L;

    std::vector<std::vector<float>> q_proj(static_cast<std::size_t>(L));
    for (int i = 0; i < L; ++i) q_proj[static_cast<std::size_t>(i)] = index.project_query(q, i);

    CandidateSet candidates(*index.data, q);
    const auto finish = [&](double radius) {
        QueryResult result;
        result.hits = candidates.top_k(k);
        result.radius_used = radius;
        result.candidates_seen = candidates.size();
        return result;
    };

    double r = index.params.r_min;
    for (;;) {
        for (int i = 0; i < L; ++i) {
            range_query_optimized(index.trees[static_cast<std::size_t>(i)], index.table,
                                  q_proj[static_cast<std::size_t>(i)], eps * r,
                                  [&](std::uint32_t pos) {
                                      candidates.insert(pos);
                                      return candidates.size() < budget;
                                  });
            if (candidates.size() >= budget) return finish(r);
        }
        if (candidates.count_within(c * r) >= static_cast<std::size_t>(k)) return finish(r);
        r *= c;
    }
}

double estimate_rmin(const DetIndex& index, std::span<const std::vector<float>> probes, int k) {
    if (probes.empty()) throw std::invalid_argument("estimate_rmin: no probe queries");
    const int L = index.params.L;
    const int K = index.params.K;

    ProbeProjections probe_proj;
    probe_proj.values.resize(probes.size());
    for (std::size_t p = 0; p < probes.size(); ++p) {
        probe_proj.values[p].resize(static_cast<std::size_t>(L));
        for (int i = 0; i < L; ++i)
            probe_proj.values[p][static_cast<std::size_t>(i)] = index.project_query(probes[p], i);
    }

    // Projected coordinates are not stored in the index; recompute on demand,
    // memoized per (space, position) for the duration of this call.
    struct SpaceCache {
        std::vector<float> coords;
        std::vector<std::uint8_t> filled;
    };
    auto caches = std::make_shared<std::vector<SpaceCache>>(static_cast<std::size_t>(L));
    const auto lookup_for_space = [&index, K, caches](int space) -> ProjectedLookup {
        return [&index, K, caches, space](std::uint32_t pos) -> const float* {
            SpaceCache& cache = (*caches)[static_cast<std::size_t>(space)];
            if (cache.filled.empty()) {
                cache.coords.resize(index.n() * static_cast<std::size_t>(K));
                cache.filled.assign(index.n(), 0);
            }
            float* out = cache.coords.data() + pos * static_cast<std::size_t>(K);
            if (!cache.filled[pos]) {
                if (index.projection == ProjectionKind::paa) {
                    const auto summary = paa_summarize(index.data->row(pos), index.params.K);
                    std::copy(summary.begin(), summary.end(), out);
                } else {
                    project_point_into(index.family, index.data->row(pos), space, out);
                }
                cache.filled[pos] = 1;
            }
            return out;
        };
    };
    return estimate_rmin_core(index, probe_proj, k, lookup_for_space);
}

}  // namespace detlsh
