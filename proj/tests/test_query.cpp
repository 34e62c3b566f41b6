#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "detlsh/index.hpp"
#include "detlsh/metrics.hpp"
#include "test_util.hpp"

using namespace detlsh;

namespace {

LshParams small_params() {
    LshParams p;
    p.K = 8;
    p.L = 4;
    p.c = 1.5;
    p.beta = 0.1;
    p.n_regions = 16;
    p.leaf_capacity = 16;
    p.sample_fraction = 0.5;
    p.k = 10;
    return p;
}

std::vector<float> copy_row(const Dataset& data, std::size_t z) {
    const auto row = data.row(z);
    return {row.begin(), row.end()};
}

}  // namespace

TEST_CASE("candidate_budget rounds up and caps at n") {
    CHECK(candidate_budget(0.1, 1000, 5) == 105);
    CHECK(candidate_budget(0.1, 14, 1) == 3);   // ceil(1.4 + 1)
    CHECK(candidate_budget(0.5, 10, 50) == 10); // capped
    CHECK(candidate_budget(0.0, 10, 3) == 3);
}

TEST_CASE("rc_ann finds a planted exact match") {
    const auto data = std::make_shared<const Dataset>(testutil::gaussian_points(500, 16, 101));
    const auto index = build_index(data, small_params(), 102);
    for (const std::size_t z : {0UL, 100UL, 499UL}) {
        const auto hit = rc_ann(index, data->row(z), 0.5, 1.5);
        REQUIRE(hit.has_value());
        CHECK(hit->second == 0.0);
        CHECK(hit->first == z);
    }
}

TEST_CASE("rc_ann returns nothing when everything is far in both spaces") {
    // Four tight clusters at the corners of a huge square, identity
    // projection, query at the origin. The query sits inside the sampled
    // range of every dimension, in a gap much wider than epsilon * r, so the
    // candidate set stays under the budget and nothing lies within c * r.
    const float M = 1000.0f;
    const std::size_t n = 2000;
    std::mt19937 gen(111);
    std::uniform_real_distribution<float> noise(-1.0f, 1.0f);
    Dataset corners;
    corners.n = n;
    corners.d = 2;
    corners.values.resize(n * 2);
    for (std::size_t z = 0; z < n; ++z) {
        const float sx = (z & 1) ? M : -M;
        const float sy = (z & 2) ? M : -M;
        corners.values[z * 2] = sx + noise(gen);
        corners.values[z * 2 + 1] = sy + noise(gen);
    }
    const auto data = std::make_shared<const Dataset>(std::move(corners));

    HashFamily identity;
    identity.d = 2;
    identity.K = 2;
    identity.L = 1;
    identity.coeffs = {1.0f, 0.0f, 0.0f, 1.0f};

    LshParams params;
    params.c = 1.5;
    params.beta = 0.1;
    params.n_regions = 256;
    params.leaf_capacity = 16;
    params.sample_fraction = 1.0;
    const auto index = build_index_with_family(data, params, identity, 112);

    const std::vector<float> q{0.0f, 0.0f};
    const double r = 1.0;
    for (std::size_t z = 0; z < data->n; ++z)
        CHECK(l2_distance(q, data->row(z)) > index.params.c * r);
    const auto qp = index.project_query(q, 0);
    for (std::size_t z = 0; z < data->n; ++z) {
        const auto op = index.project_query(data->row(z), 0);
        CHECK(l2_distance(qp, op) > index.params.epsilon * r);
    }
    CHECK_FALSE(rc_ann(index, q, r, index.params.c).has_value());
}

TEST_CASE("rc_ann planted instances succeed well above the guaranteed rate") {
    const int d = 24;
    const auto data = std::make_shared<const Dataset>(testutil::gaussian_points(1500, d, 121));
    LshParams params = small_params();
    params.beta = 0.0;  // use the derived value, matching the analysis
    const auto index = build_index(data, params, 122);

    std::mt19937 gen(123);
    std::normal_distribution<float> dir(0.0f, 1.0f);
    std::uniform_int_distribution<std::size_t> pick(0, data->n - 1);
    const double r = 2.0;
    int successes = 0;
    const int trials = 50;
    for (int t = 0; t < trials; ++t) {
        // Plant the query at distance 0.9 r from a dataset point.
        std::vector<float> q = copy_row(*data, pick(gen));
        std::vector<float> offset(d);
        double norm = 0.0;
        for (auto& v : offset) {
            v = dir(gen);
            norm += static_cast<double>(v) * v;
        }
        norm = std::sqrt(norm);
        for (int j = 0; j < d; ++j) q[j] += static_cast<float>(0.9 * r * offset[j] / norm);

        const auto hit = rc_ann(index, q, r, index.params.c);
        if (hit && hit->second <= index.params.c * r) ++successes;
    }
    CHECK(static_cast<double>(successes) / trials >= 0.5 - 1.0 / std::exp(1.0));
}

TEST_CASE("ck_ann with k = n returns everything in exact order") {
    const auto data = std::make_shared<const Dataset>(testutil::gaussian_points(100, 8, 131));
    const auto index = build_index(data, small_params(), 132);
    const std::vector<float> q(8, 0.25f);
    const auto result = ck_ann(index, q, 100);
    REQUIRE(result.hits.size() == 100);
    const auto oracle = testutil::quadratic_knn(*data, q, 100);
    for (std::size_t t = 0; t < 100; ++t) {
        CHECK(result.hits[t].first == oracle[t].first);
        CHECK(result.hits[t].second == doctest::Approx(oracle[t].second).epsilon(1e-9));
    }
}

TEST_CASE("ck_ann head is the planted point") {
    const auto data = std::make_shared<const Dataset>(testutil::gaussian_points(400, 12, 141));
    const auto index = build_index(data, small_params(), 142);
    const auto result = ck_ann(index, data->row(37), 1);
    REQUIRE(result.hits.size() == 1);
    CHECK(result.hits[0].first == 37);
    CHECK(result.hits[0].second == 0.0);
}

TEST_CASE("ck_ann results are deduplicated, sorted, and correctly re-ranked") {
    const auto data = std::make_shared<const Dataset>(testutil::gaussian_points(2000, 16, 151));
    const auto index = build_index(data, small_params(), 152);
    std::mt19937 gen(153);
    std::normal_distribution<float> qdist(0.0f, 1.0f);
    for (int t = 0; t < 10; ++t) {
        std::vector<float> q(16);
        for (auto& v : q) v = qdist(gen);
        const auto result = ck_ann(index, q, 10);
        REQUIRE(result.hits.size() == 10);
        for (std::size_t i = 1; i < result.hits.size(); ++i)
            CHECK(result.hits[i - 1].second <= result.hits[i].second);
        std::vector<std::uint32_t> positions;
        for (const auto& [pos, dist] : result.hits) {
            positions.push_back(pos);
            CHECK(dist == doctest::Approx(l2_distance(q, data->row(pos))).epsilon(1e-5));
        }
        std::sort(positions.begin(), positions.end());
        CHECK(std::adjacent_find(positions.begin(), positions.end()) == positions.end());

        // The radius schedule is r_min * c^t.
        const double ratio = result.radius_used / index.params.r_min;
        const double steps = std::log(ratio) / std::log(index.params.c);
        CHECK(std::fabs(steps - std::round(steps)) < 1e-6);
    }
}

TEST_CASE("ck_ann returns within the round once the budget fills") {
    const auto data = std::make_shared<const Dataset>(testutil::gaussian_points(2000, 16, 161));
    LshParams params = small_params();
    params.beta = 0.01;
    const auto index = build_index(data, params, 162);
    const std::size_t budget = candidate_budget(index.params.beta, index.n(), 5);
    std::mt19937 gen(163);
    std::normal_distribution<float> qdist(0.0f, 1.0f);
    for (int t = 0; t < 10; ++t) {
        std::vector<float> q(16);
        for (auto& v : q) v = qdist(gen);
        const auto result = ck_ann(index, q, 5);
        // The sink stops exactly at the budget, never beyond it.
        CHECK(result.candidates_seen <= budget);
        REQUIRE(result.hits.size() == 5);
    }
}

TEST_CASE("ck_ann satisfies the squared-ratio contract against brute force") {
    const int k = 5;
    const auto data = std::make_shared<const Dataset>(testutil::gaussian_points(1000, 16, 171));
    const auto index = build_index(data, small_params(), 172);
    std::mt19937 gen(173);
    std::normal_distribution<float> qdist(0.0f, 1.0f);
    const double c2 = index.params.c * index.params.c;
    int satisfied = 0;
    const int trials = 40;
    for (int t = 0; t < trials; ++t) {
        std::vector<float> q(16);
        for (auto& v : q) v = qdist(gen);
        const auto result = ck_ann(index, q, k);
        const auto oracle = testutil::quadratic_knn(*data, q, k);
        bool all_within = true;
        for (int i = 0; i < k; ++i)
            if (result.hits[static_cast<std::size_t>(i)].second >
                c2 * oracle[static_cast<std::size_t>(i)].second + 1e-9)
                all_within = false;
        if (all_within) ++satisfied;
    }
    CHECK(static_cast<double>(satisfied) / trials >= 0.8);
}

TEST_CASE("ck_ann argument validation") {
    const auto data = std::make_shared<const Dataset>(testutil::gaussian_points(50, 8, 181));
    const auto index = build_index(data, small_params(), 182);
    const std::vector<float> q(8, 0.0f);
    CHECK_THROWS_AS(ck_ann(index, q, 0), std::invalid_argument);
    CHECK_THROWS_AS(ck_ann(index, q, 51), std::invalid_argument);
    const std::vector<float> wrong(9, 0.0f);
    CHECK_THROWS_AS(ck_ann(index, wrong, 5), std::invalid_argument);
    CHECK_THROWS_AS(rc_ann(index, q, 0.0, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(rc_ann(index, q, 1.0, 1.0), std::invalid_argument);

    // An index with no usable initial radius cannot answer k-NN queries.
    DetIndex broken = index;
    broken.params.r_min = 0.0;
    CHECK_THROWS_AS(ck_ann(broken, q, 5), std::invalid_argument);

    // Build-time validation.
    LshParams params = small_params();
    params.K = 16;  // > d = 8
    CHECK_THROWS_AS(build_det_only_index(data, params, 183), std::invalid_argument);
    params.K = 25;
    CHECK_THROWS_AS(build_index(data, params, 184), std::invalid_argument);
    params = small_params();
    params.c = 1.0;
    CHECK_THROWS_AS(build_index(data, params, 185), std::invalid_argument);
}

TEST_CASE("estimate_rmin finds the boundary radius of a concentric ring") {
    // Identity projection (d = K = 2, unit basis vectors) makes projected
    // distances equal original ones, so the candidate count flips from 0 to n
    // exactly at the ring radius.
    const double rho = 5.0;
    const std::size_t n = 256;
    Dataset ring;
    ring.n = n;
    ring.d = 2;
    ring.values.resize(n * 2);
    for (std::size_t z = 0; z < n; ++z) {
        const double angle = 2.0 * 3.14159265358979 * static_cast<double>(z) / n;
        ring.values[z * 2] = static_cast<float>(rho * std::cos(angle));
        ring.values[z * 2 + 1] = static_cast<float>(rho * std::sin(angle));
    }
    const auto data = std::make_shared<const Dataset>(std::move(ring));

    HashFamily identity;
    identity.d = 2;
    identity.K = 2;
    identity.L = 1;
    identity.coeffs = {1.0f, 0.0f, 0.0f, 1.0f};

    LshParams params;
    params.c = 1.5;
    params.beta = 0.1;
    params.n_regions = 16;
    params.leaf_capacity = 8;
    params.sample_fraction = 1.0;
    const auto index = build_index_with_family(data, params, identity, 191);

    const std::vector<std::vector<float>> probes{{0.0f, 0.0f}};
    const int k = 5;
    const double rmin = estimate_rmin(index, probes, k);
    const double eps = index.params.epsilon;
    CHECK(eps * rmin >= rho - 1e-6);
    CHECK(eps * rmin / index.params.c < rho + 1e-6);

    // Duplicated probes reduce to the single-probe answer.
    const std::vector<std::vector<float>> dupes{probes[0], probes[0], probes[0]};
    CHECK(estimate_rmin(index, dupes, k) == doctest::Approx(rmin));

    CHECK_THROWS_AS(estimate_rmin(index, {}, k), std::invalid_argument);
}

TEST_CASE("estimate_rmin definition instance: reaches at r, falls short at r/c") {
    const auto data = std::make_shared<const Dataset>(testutil::gaussian_points(600, 8, 193));
    const auto index = build_index(data, small_params(), 194);
    const int k = 8;
    const std::vector<std::vector<float>> probes{copy_row(*data, 11)};
    const double rmin = estimate_rmin(index, probes, k);
    const std::size_t budget = candidate_budget(index.params.beta, index.n(), k);

    const auto count_at = [&](double r) {
        std::vector<std::uint8_t> seen(data->n, 0);
        std::size_t count = 0;
        for (int i = 0; i < index.params.L; ++i) {
            const auto qp = index.project_query(probes[0], i);
            for (std::size_t z = 0; z < data->n; ++z) {
                if (seen[z]) continue;
                const auto op = index.project_query(data->row(z), i);
                if (l2_distance(qp, op) <= index.params.epsilon * r) {
                    seen[z] = 1;
                    ++count;
                }
            }
        }
        return count;
    };
    CHECK(count_at(rmin) >= budget);
    CHECK(count_at(rmin / index.params.c) < budget);
}

TEST_CASE("det-only index uses one PAA tree and the same query pipeline") {
    const auto data = std::make_shared<const Dataset>(testutil::gaussian_points(120, 16, 201));
    LshParams params = small_params();
    const auto index = build_det_only_index(data, params, 202);
    CHECK(index.trees.size() == 1);
    CHECK(index.params.L == 1);
    CHECK(index.projection == ProjectionKind::paa);
    CHECK(index.family.empty());

    const std::vector<float> q(16, 0.1f);
    const auto result = ck_ann(index, q, 120);
    REQUIRE(result.hits.size() == 120);
    const auto oracle = testutil::quadratic_knn(*data, q, 120);
    for (std::size_t t = 0; t < 120; ++t) CHECK(result.hits[t].first == oracle[t].first);

    const std::vector<float> wrong(17, 0.0f);
    CHECK_THROWS_AS(index.project_query(wrong, 0), std::invalid_argument);
}

TEST_CASE("an exhaustive budget reduces to exact k-NN on arbitrary inputs") {
    // With beta = 1 the candidate budget is the whole dataset, so the full
    // pipeline, whatever the shape of the data, must reproduce brute force
    // including tie order.
    std::mt19937 gen(401);
    std::normal_distribution<float> gauss(0.0f, 2.0f);
    std::uniform_int_distribution<int> lattice(-2, 2);

    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 2 + gen() % 280;
        const int d = 1 + static_cast<int>(gen() % 12);
        const bool discrete = trial % 2 == 0;  // heavy duplicates and ties

        Dataset raw;
        raw.n = n;
        raw.d = d;
        raw.values.resize(n * static_cast<std::size_t>(d));
        for (auto& v : raw.values)
            v = discrete ? static_cast<float>(lattice(gen)) : gauss(gen);
        const auto data = std::make_shared<const Dataset>(std::move(raw));

        LshParams params;
        params.K = 1 + static_cast<int>(gen() % 8);
        params.L = 1 + static_cast<int>(gen() % 3);
        params.beta = 1.0;
        params.leaf_capacity = 1 + static_cast<int>(gen() % 8);
        params.sample_fraction = 1.0;
        int regions = 2;
        while (regions * 2 <= 256 && static_cast<std::size_t>(regions) * 2 <= n &&
               gen() % 2 == 0)
            regions *= 2;
        params.n_regions = regions;

        const bool paa = trial % 5 == 0 && params.K <= d;
        const DetIndex index = paa ? build_det_only_index(data, params, 402 + trial)
                                   : build_index(data, params, 402 + trial);

        for (const int k : {1, static_cast<int>(n / 2 + 1), static_cast<int>(n)}) {
            std::vector<float> q(static_cast<std::size_t>(d));
            for (auto& v : q) v = discrete ? static_cast<float>(lattice(gen)) : gauss(gen);
            if (k == 1) q.assign(data->row(n / 2).begin(), data->row(n / 2).end());

            const auto result = ck_ann(index, q, k);
            const auto oracle = testutil::quadratic_knn(*data, q, k);
            REQUIRE(result.hits.size() == static_cast<std::size_t>(k));
            for (int t = 0; t < k; ++t) {
                CHECK(result.hits[static_cast<std::size_t>(t)].first ==
                      oracle[static_cast<std::size_t>(t)].first);
                CHECK(result.hits[static_cast<std::size_t>(t)].second ==
                      doctest::Approx(oracle[static_cast<std::size_t>(t)].second)
                          .epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("det-only recall trails det-lsh by at most a small margin") {
    const std::size_t n = 100000;
    const int d = 32, k = 10;
    auto all = testutil::gaussian_mixture(n + 100, d, 24, 211);
    Dataset queries;
    queries.d = d;
    queries.n = 100;
    queries.values.assign(all.values.begin(), all.values.begin() + 100 * d);
    Dataset rest;
    rest.d = d;
    rest.n = n;
    rest.values.assign(all.values.begin() + 100 * d, all.values.end());
    const auto data = std::make_shared<const Dataset>(std::move(rest));

    const GroundTruth truth = brute_force_knn(*data, queries, k);

    LshParams params;
    params.K = 16;
    params.L = 4;
    params.c = 1.5;
    params.beta = 0.1;
    const auto lsh_index = build_index(data, params, 212);
    const auto paa_index = build_det_only_index(data, params, 212);

    double lsh_recall = 0.0, paa_recall = 0.0;
    for (std::size_t qi = 0; qi < queries.n; ++qi) {
        const auto lsh_result = ck_ann(lsh_index, queries.row(qi), k);
        const auto paa_result = ck_ann(paa_index, queries.row(qi), k);
        lsh_recall += recall(lsh_result.hits, truth.positions_for(qi), k);
        paa_recall += recall(paa_result.hits, truth.positions_for(qi), k);
    }
    lsh_recall /= static_cast<double>(queries.n);
    paa_recall /= static_cast<double>(queries.n);
    CHECK(paa_recall <= lsh_recall + 0.05);
}
