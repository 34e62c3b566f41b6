#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>
#include <stdexcept>

#include "detlsh/encoder.hpp"
#include "test_util.hpp"

using namespace detlsh;

TEST_CASE("row breakpoints: small hand-checked sample") {
    std::vector<float> sample{3.0f, 1.0f, 4.0f, 2.0f};
    Rng rng(1);
    const auto row = select_row_breakpoints(sample, 2, rng);
    REQUIRE(row.size() == 3);
    CHECK(row[0] == 1.0f);  // sample minimum
    CHECK(row[1] == 2.0f);  // second smallest (rank n_s/N_r)
    CHECK(row[2] == 4.0f);  // sample maximum
}

TEST_CASE("row breakpoints: constant sample degenerates all boundaries") {
    std::vector<float> sample(64, 5.0f);
    Rng rng(2);
    const auto row = select_row_breakpoints(sample, 2, rng);
    CHECK(row == std::vector<float>{5.0f, 5.0f, 5.0f});
}

TEST_CASE("row breakpoints match the full-sort oracle") {
    std::mt19937 gen(7);
    // Distinct values, 1024 into 256 regions.
    {
        std::vector<float> sample(1024);
        for (std::size_t t = 0; t < sample.size(); ++t) sample[t] = static_cast<float>(t) * 0.5f;
        std::shuffle(sample.begin(), sample.end(), gen);
        const auto oracle = testutil::sort_oracle_breakpoints(sample, 256);
        Rng rng(3);
        const auto row = select_row_breakpoints(sample, 256, rng);
        CHECK(row == oracle);
    }
    // Random sizes, duplicates, region counts; including sizes not divisible
    // by the region count.
    std::uniform_int_distribution<int> size_dist(8, 4000);
    std::uniform_real_distribution<float> value_dist(-100.0f, 100.0f);
    for (int trial = 0; trial < 60; ++trial) {
        const int n_regions = 1 << (1 + trial % 8);  // 2 .. 256
        int n_s = size_dist(gen);
        n_s = std::max(n_s, n_regions);
        std::vector<float> sample(static_cast<std::size_t>(n_s));
        for (auto& v : sample) v = value_dist(gen);
        if (trial % 3 == 0)  // heavy duplication
            for (auto& v : sample) v = std::round(v / 20.0f) * 20.0f;
        const auto oracle = testutil::sort_oracle_breakpoints(sample, n_regions);
        Rng rng(100 + trial);
        const auto row = select_row_breakpoints(sample, n_regions, rng);
        CHECK(row == oracle);
    }
}

TEST_CASE("row breakpoints preconditions") {
    std::vector<float> sample(8, 1.0f);
    Rng rng(1);
    CHECK_THROWS_AS(select_row_breakpoints(sample, 3, rng), std::invalid_argument);
    std::vector<float> tiny(3, 1.0f);
    CHECK_THROWS_AS(select_row_breakpoints(tiny, 4, rng), std::invalid_argument);
}

TEST_CASE("distinct divisible samples land region-size counts in every region") {
    std::mt19937 gen(11);
    std::vector<float> sample(1024);
    for (std::size_t t = 0; t < sample.size(); ++t) sample[t] = static_cast<float>(t) * 1.25f;
    std::shuffle(sample.begin(), sample.end(), gen);
    const int n_regions = 16;
    auto work = sample;
    Rng rng(12);
    const auto row = select_row_breakpoints(work, n_regions, rng);
    std::vector<int> counts(n_regions, 0);
    for (const float v : sample) ++counts[locate_region(v, row, n_regions)];
    for (const int c : counts) CHECK(c == 1024 / n_regions);
}

TEST_CASE("locate_region clamps and breaks boundary ties downward") {
    const std::vector<float> row{1.0f, 2.0f, 4.0f};
    CHECK(locate_region(3.0f, row, 2) == 1);
    CHECK(locate_region(0.5f, row, 2) == 0);  // below range
    CHECK(locate_region(9.0f, row, 2) == 1);  // above range
    CHECK(locate_region(2.0f, row, 2) == 0);  // boundary tie -> lower region
    CHECK(locate_region(1.0f, row, 2) == 0);  // global minimum
    CHECK(locate_region(4.0f, row, 2) == 1);  // global maximum
}

TEST_CASE("locate_region agrees with a linear scan and preserves order") {
    std::mt19937 gen(21);
    std::uniform_real_distribution<float> value_dist(-50.0f, 50.0f);
    for (int trial = 0; trial < 30; ++trial) {
        const int n_regions = 1 << (1 + trial % 8);
        std::vector<float> row(static_cast<std::size_t>(n_regions) + 1);
        for (auto& v : row) v = value_dist(gen);
        std::sort(row.begin(), row.end());

        const auto linear_scan = [&](float v) {
            if (v <= row.front()) return 0;
            if (v > row.back()) return n_regions - 1;
            // highest region whose lower boundary is strictly below v
            int region = 0;
            for (int b = 1; b < n_regions; ++b)
                if (row[static_cast<std::size_t>(b)] < v) region = b;
            return region;
        };

        for (int t = 0; t < 200; ++t) {
            const float v = value_dist(gen);
            const int got = locate_region(v, row, n_regions);
            CHECK(got == linear_scan(v));
            // in-range values sit inside their region's boundaries
            if (v >= row.front() && v <= row.back()) {
                CHECK(row[static_cast<std::size_t>(got)] <= v);
                CHECK(v <= row[static_cast<std::size_t>(got) + 1]);
            }
        }
        // monotone in the value, sweeping across the whole row
        const float step = (row.back() - row.front() + 10.0f) / 200.0f;
        float v = row.front() - 5.0f;
        int prev_region = 0;
        for (int t = 0; t < 200; ++t, v += step) {
            const int region = locate_region(v, row, n_regions);
            CHECK(region >= prev_region);
            prev_region = region;
        }
    }
}

TEST_CASE("encode_dataset maps coordinates through locate_region") {
    // One space, one dimension, hand-built table.
    ProjectedDataset proj;
    proj.L = 1;
    proj.K = 1;
    proj.n = 3;
    proj.values = {3.0f, 1.5f, 0.2f};
    BreakpointTable table;
    table.L = 1;
    table.K = 1;
    table.n_regions = 2;
    table.sample_size = 3;
    table.boundaries = {1.0f, 2.0f, 4.0f};
    const auto enc = encode_dataset(proj, table);
    CHECK(enc.row(0, 0)[0] == 1);
    CHECK(enc.row(0, 1)[0] == 0);
    CHECK(enc.row(0, 2)[0] == 0);

    // Coordinates equal to the minimum boundary all map to region 0.
    ProjectedDataset at_min = proj;
    at_min.values = {1.0f, 1.0f, 1.0f};
    const auto enc_min = encode_dataset(at_min, table);
    for (std::size_t z = 0; z < 3; ++z) CHECK(enc_min.row(0, z)[0] == 0);

    BreakpointTable wrong = table;
    wrong.K = 2;
    CHECK_THROWS_AS(encode_dataset(proj, wrong), std::invalid_argument);
}

TEST_CASE("select_breakpoints rows are non-decreasing with sampled extremes") {
    const auto family = sample_hash_family(24, 6, 2, 41);
    const auto data = testutil::gaussian_points(500, 24, 42);
    const auto proj = project_dataset(family, data);
    const auto table = select_breakpoints(proj, 16, 1.0, 43);  // full sample
    CHECK(table.sample_size == 500);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 6; ++j) {
            const auto row = table.row(i, j);
            for (std::size_t b = 1; b < row.size(); ++b) CHECK(row[b - 1] <= row[b]);
            // with the full sample, the ends are the true extremes
            float lo = proj.row(i, 0)[j], hi = proj.row(i, 0)[j];
            for (std::size_t z = 0; z < proj.n; ++z) {
                lo = std::min(lo, proj.row(i, z)[j]);
                hi = std::max(hi, proj.row(i, z)[j]);
            }
            CHECK(row.front() == lo);
            CHECK(row.back() == hi);
        }
    }

    // Deterministic in the seed.
    const auto again = select_breakpoints(proj, 16, 1.0, 43);
    CHECK(again.boundaries == table.boundaries);

    // Fewer points than regions is ill-posed.
    const auto small = testutil::gaussian_points(10, 24, 44);
    const auto small_proj = project_dataset(family, small);
    CHECK_THROWS_AS(select_breakpoints(small_proj, 16, 0.1, 45), std::invalid_argument);
    CHECK_THROWS_AS(select_breakpoints(proj, 100, 0.5, 45), std::invalid_argument);
    CHECK_THROWS_AS(select_breakpoints(proj, 16, 0.0, 45), std::invalid_argument);
}

TEST_CASE("encoding is monotone per row") {
    const auto family = sample_hash_family(8, 4, 1, 51);
    const auto data = testutil::gaussian_points(256, 8, 52);
    const auto proj = project_dataset(family, data);
    const auto table = select_breakpoints(proj, 8, 0.5, 53);
    const auto enc = encode_dataset(proj, table);
    for (int j = 0; j < 4; ++j) {
        std::vector<std::pair<float, std::uint8_t>> pairs;
        for (std::size_t z = 0; z < proj.n; ++z)
            pairs.emplace_back(proj.row(0, z)[j], enc.row(0, z)[j]);
        std::sort(pairs.begin(), pairs.end());
        for (std::size_t t = 1; t < pairs.size(); ++t)
            CHECK(pairs[t - 1].second <= pairs[t].second);
    }
}
