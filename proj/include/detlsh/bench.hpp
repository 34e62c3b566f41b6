#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "detlsh/dataset.hpp"
#include "detlsh/metrics.hpp"
#include "detlsh/projection.hpp"

namespace detlsh {

struct BenchConfig {
    std::string dataset_path;
    std::string queries_path;  // empty: hold out `holdout` dataset points instead
    int holdout = 100;
    std::uint64_t seed = 1;
    int k = 50;
    std::vector<std::string> methods{"det-lsh"};  // det-lsh | det-only | brute-force
    LshParams params;
    std::vector<double> beta_sweep;  // extra det-lsh rows at these budgets
    std::string csv_path;            // optional CSV output
    bool cache_ground_truth = true;
};

BenchConfig parse_bench_config(const std::string& json_path);

struct BenchRow {
    std::string method;
    std::size_t n = 0;
    int d = 0;
    int k = 0;
    double indexing_s = 0.0;
    double query_ms = 0.0;  // mean per query
    double recall = 0.0;
    double ratio = 0.0;
    std::size_t index_bytes = 0;
    std::string params_echo;
};

struct BenchReport {
    std::vector<BenchRow> rows;
};

BenchReport run_benchmark(const BenchConfig& config);

// Header: method,n,d,k,indexing_s,query_ms,recall,ratio,index_bytes
void write_csv(const BenchReport& report, std::ostream& out);
void print_table(const BenchReport& report, std::ostream& out);

// Splits `holdout` random rows out of `data` (seeded); returns (rest, queries).
std::pair<Dataset, Dataset> split_holdout(const Dataset& data, int holdout, std::uint64_t seed);

// Brute-force truth, cached in a sidecar keyed by both content fingerprints
// and k. `cache_path` empty disables caching.
GroundTruth ground_truth_cached(const Dataset& data, const Dataset& queries, int k,
                                const std::string& cache_path);

}  // namespace detlsh
