#include "detlsh/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "detlsh/errors.hpp"
#include "detlsh/index.hpp"
#include "detlsh/io.hpp"
#include "detlsh/persist.hpp"
#include "detlsh/rng.hpp"

namespace detlsh {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string echo_params(const LshParams& p, std::uint64_t seed) {
    std::ostringstream s;
    s << "K=" << p.K << " L=" << p.L << " c=" << p.c << " beta=" << p.beta
      << " regions=" << p.n_regions << " leaf=" << p.leaf_capacity
      << " sample=" << p.sample_fraction << " rmin=" << p.r_min << " seed=" << seed;
    return s.str();
}

constexpr char kGtMagic[4] = {'D', 'E', 'T', 'G'};

bool try_load_gt_cache(const std::string& path, std::uint64_t fp_data, std::uint64_t fp_queries,
                       int k, std::size_t nq, GroundTruth& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    char magic[4] = {};
    std::uint64_t d1 = 0, d2 = 0;
    std::int32_t ck = 0;
    std::uint64_t cnq = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&d1), 8);
    in.read(reinterpret_cast<char*>(&d2), 8);
    in.read(reinterpret_cast<char*>(&ck), 4);
    in.read(reinterpret_cast<char*>(&cnq), 8);
    if (!in || std::memcmp(magic, kGtMagic, 4) != 0 || d1 != fp_data || d2 != fp_queries ||
        ck != k || cnq != nq)
        return false;
    out.k = k;
    out.nq = nq;
    out.positions.resize(nq * static_cast<std::size_t>(k));
    out.distances.resize(nq * static_cast<std::size_t>(k));
    in.read(reinterpret_cast<char*>(out.positions.data()),
            static_cast<std::streamsize>(out.positions.size() * sizeof(std::uint32_t)));
    in.read(reinterpret_cast<char*>(out.distances.data()),
            static_cast<std::streamsize>(out.distances.size() * sizeof(double)));
    return static_cast<bool>(in);
}

void store_gt_cache(const std::string& path, std::uint64_t fp_data, std::uint64_t fp_queries,
                    const GroundTruth& truth) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) return;  // cache is best-effort
    const std::int32_t k = truth.k;
    const std::uint64_t nq = truth.nq;
    out.write(kGtMagic, 4);
    out.write(reinterpret_cast<const char*>(&fp_data), 8);
    out.write(reinterpret_cast<const char*>(&fp_queries), 8);
    out.write(reinterpret_cast<const char*>(&k), 4);
    out.write(reinterpret_cast<const char*>(&nq), 8);
    out.write(reinterpret_cast<const char*>(truth.positions.data()),
              static_cast<std::streamsize>(truth.positions.size() * sizeof(std::uint32_t)));
    out.write(reinterpret_cast<const char*>(truth.distances.data()),
              static_cast<std::streamsize>(truth.distances.size() * sizeof(double)));
}

struct MethodOutcome {
    double indexing_s = 0.0;
    double query_ms = 0.0;
    double recall = 0.0;
    double ratio = 0.0;
    std::size_t index_bytes = 0;
    std::string params_echo;
};

MethodOutcome run_tree_method(const std::string& method, std::shared_ptr<const Dataset> data,
                              const Dataset& queries, const GroundTruth& truth,
                              const BenchConfig& config, std::optional<double> beta_override) {
    LshParams params = config.params;
    params.k = config.k;
    if (beta_override) params.beta = *beta_override;

    MethodOutcome out;
    const auto build_start = Clock::now();
    DetIndex index = method == "det-only"
                         ? build_det_only_index(std::move(data), params, config.seed)
                         : build_index(std::move(data), params, config.seed);
    out.indexing_s = seconds_since(build_start);
    out.index_bytes = serialized_size(index);
    out.params_echo = echo_params(index.params, config.seed);

    double recall_sum = 0.0;
    double ratio_sum = 0.0;
    const auto query_start = Clock::now();
    for (std::size_t qi = 0; qi < queries.n; ++qi) {
        const QueryResult result = ck_ann(index, queries.row(qi), config.k);
        recall_sum += recall(result.hits, truth.positions_for(qi), config.k);
        ratio_sum += overall_ratio(result.hits, truth.distances_for(qi), config.k);
    }
    const double total_s = seconds_since(query_start);
    out.query_ms = queries.n ? total_s * 1000.0 / static_cast<double>(queries.n) : 0.0;
    out.recall = queries.n ? recall_sum / static_cast<double>(queries.n) : 0.0;
    out.ratio = queries.n ? ratio_sum / static_cast<double>(queries.n) : 1.0;
    return out;
}

MethodOutcome run_brute_force(const Dataset& data, const Dataset& queries,
                              const GroundTruth& truth, int k) {
    MethodOutcome out;
    out.params_echo = "exact linear scan";
    double recall_sum = 0.0;
    double ratio_sum = 0.0;
    std::vector<std::pair<double, std::uint32_t>> scored(data.n);
    const auto start = Clock::now();
    for (std::size_t qi = 0; qi < queries.n; ++qi) {
        const auto q = queries.row(qi);
        for (std::size_t z = 0; z < data.n; ++z)
            scored[z] = {l2_distance_sq(q, data.row(z)), static_cast<std::uint32_t>(z)};
        std::partial_sort(scored.begin(), scored.begin() + k, scored.end());
        std::vector<std::pair<std::uint32_t, double>> hits(static_cast<std::size_t>(k));
        for (int t = 0; t < k; ++t)
            hits[static_cast<std::size_t>(t)] = {scored[static_cast<std::size_t>(t)].second,
                                                 std::sqrt(scored[static_cast<std::size_t>(t)].first)};
        recall_sum += recall(hits, truth.positions_for(qi), k);
        ratio_sum += overall_ratio(hits, truth.distances_for(qi), k);
    }
    const double total_s = seconds_since(start);
    out.query_ms = queries.n ? total_s * 1000.0 / static_cast<double>(queries.n) : 0.0;
    out.recall = queries.n ? recall_sum / static_cast<double>(queries.n) : 0.0;
    out.ratio = queries.n ? ratio_sum / static_cast<double>(queries.n) : 1.0;
    return out;
}

}  // namespace

std::pair<Dataset, Dataset> split_holdout(const Dataset& data, int holdout, std::uint64_t seed) {
    if (holdout < 1 || static_cast<std::size_t>(holdout) >= data.n)
        throw std::invalid_argument("split_holdout: holdout must lie in [1, n)");
    std::vector<std::size_t> idx(data.n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t t = 0; t < static_cast<std::size_t>(holdout); ++t)
        std::swap(idx[t], idx[t + rng.bounded(data.n - t)]);

    std::vector<std::uint8_t> is_query(data.n, 0);
    Dataset queries;
    queries.d = data.d;
    queries.n = static_cast<std::size_t>(holdout);
    queries.values.reserve(queries.n * static_cast<std::size_t>(data.d));
    for (int t = 0; t < holdout; ++t) {
        const auto row = data.row(idx[static_cast<std::size_t>(t)]);
        queries.values.insert(queries.values.end(), row.begin(), row.end());
        is_query[idx[static_cast<std::size_t>(t)]] = 1;
    }

    Dataset rest;
    rest.d = data.d;
    rest.n = data.n - queries.n;
    rest.values.reserve(rest.n * static_cast<std::size_t>(data.d));
    for (std::size_t z = 0; z < data.n; ++z) {
        if (is_query[z]) continue;
        const auto row = data.row(z);
        rest.values.insert(rest.values.end(), row.begin(), row.end());
    }
    return {std::move(rest), std::move(queries)};
}

GroundTruth ground_truth_cached(const Dataset& data, const Dataset& queries, int k,
                                const std::string& cache_path) {
    const std::uint64_t fp_data = dataset_fingerprint(data);
    const std::uint64_t fp_queries = dataset_fingerprint(queries);
    GroundTruth truth;
    if (!cache_path.empty() &&
        try_load_gt_cache(cache_path, fp_data, fp_queries, k, queries.n, truth))
        return truth;
    truth = brute_force_knn(data, queries, k);
    if (!cache_path.empty()) store_gt_cache(cache_path, fp_data, fp_queries, truth);
    return truth;
}

BenchConfig parse_bench_config(const std::string& json_path) {
    std::ifstream in(json_path);
    if (!in) throw FormatError(FormatErrorKind::io, "cannot open " + json_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(FormatErrorKind::bad_record,
                          json_path + ": invalid JSON (" + e.what() + ")");
    }

    BenchConfig config;
    config.dataset_path = j.at("dataset").get<std::string>();
    config.queries_path = j.value("queries", std::string{});
    config.holdout = j.value("holdout", 100);
    config.seed = j.value("seed", std::uint64_t{1});
    config.k = j.value("k", 50);
    if (j.contains("methods")) config.methods = j["methods"].get<std::vector<std::string>>();
    if (j.contains("params")) {
        const auto& p = j["params"];
        config.params.K = p.value("K", config.params.K);
        config.params.L = p.value("L", config.params.L);
        config.params.c = p.value("c", config.params.c);
        config.params.beta = p.value("beta", 0.1);
        config.params.n_regions = p.value("regions", config.params.n_regions);
        config.params.leaf_capacity = p.value("leaf", config.params.leaf_capacity);
        config.params.sample_fraction = p.value("sample", config.params.sample_fraction);
        config.params.r_min = p.value("rmin", config.params.r_min);
    } else {
        config.params.beta = 0.1;
    }
    if (j.contains("beta_sweep"))
        config.beta_sweep = j["beta_sweep"].get<std::vector<double>>();
    config.csv_path = j.value("csv", std::string{});
    config.cache_ground_truth = j.value("gt_cache", true);
    return config;
}

BenchReport run_benchmark(const BenchConfig& config) {
    Dataset base = read_vectors(config.dataset_path);
    Dataset data;
    Dataset queries;
    if (!config.queries_path.empty()) {
        data = std::move(base);
        queries = read_vectors(config.queries_path);
        if (queries.d != data.d)
            throw std::invalid_argument("run_benchmark: query dimension mismatch");
    } else {
        auto split = split_holdout(base, config.holdout, config.seed);
        data = std::move(split.first);
        queries = std::move(split.second);
    }
    if (config.k < 1 || static_cast<std::size_t>(config.k) > data.n)
        throw std::invalid_argument("run_benchmark: k must lie in [1, n]");

    std::string cache_path;
    if (config.cache_ground_truth) {
        std::ostringstream name;
        name << config.dataset_path << ".gt-" << std::hex << dataset_fingerprint(data) << "-"
             << dataset_fingerprint(queries) << std::dec << "-k" << config.k << ".cache";
        cache_path = name.str();
    }
    const GroundTruth truth = ground_truth_cached(data, queries, config.k, cache_path);

    auto shared_data = std::make_shared<const Dataset>(data);

    BenchReport report;
    const auto add_row = [&](const std::string& method, const MethodOutcome& outcome) {
        BenchRow row;
        row.method = method;
        row.n = data.n;
        row.d = data.d;
        row.k = config.k;
        row.indexing_s = outcome.indexing_s;
        row.query_ms = outcome.query_ms;
        row.recall = outcome.recall;
        row.ratio = outcome.ratio;
        row.index_bytes = outcome.index_bytes;
        row.params_echo = outcome.params_echo;
        report.rows.push_back(row);
    };

    for (const std::string& method : config.methods) {
        if (method == "brute-force") {
            add_row(method, run_brute_force(data, queries, truth, config.k));
        } else if (method == "det-lsh" || method == "det-only") {
            add_row(method,
                    run_tree_method(method, shared_data, queries, truth, config, std::nullopt));
        } else {
            throw std::invalid_argument("run_benchmark: unknown method " + method);
        }
    }
    for (const double beta : config.beta_sweep) {
        std::ostringstream name;
        name << "det-lsh@beta=" << beta;
        add_row(name.str(),
                run_tree_method("det-lsh", shared_data, queries, truth, config, beta));
    }

    if (!config.csv_path.empty()) {
        std::ofstream out(config.csv_path, std::ios::trunc);
        if (!out)
            throw FormatError(FormatErrorKind::io, "cannot open " + config.csv_path +
                                                       " for writing");
        write_csv(report, out);
    }
    return report;
}

void write_csv(const BenchReport& report, std::ostream& out) {
    out << "method,n,d,k,indexing_s,query_ms,recall,ratio,index_bytes\n";
    for (const BenchRow& row : report.rows) {
        out << row.method << ',' << row.n << ',' << row.d << ',' << row.k << ','
            << std::setprecision(6) << std::fixed << row.indexing_s << ',' << row.query_ms << ','
            << std::setprecision(4) << row.recall << ',' << std::setprecision(6) << row.ratio
            << ',' << row.index_bytes << '\n';
        out.unsetf(std::ios::fixed);
    }
}

void print_table(const BenchReport& report, std::ostream& out) {
    out << std::left << std::setw(20) << "method" << std::right << std::setw(10) << "n"
        << std::setw(6) << "d" << std::setw(5) << "k" << std::setw(12) << "index(s)"
        << std::setw(12) << "query(ms)" << std::setw(9) << "recall" << std::setw(10) << "ratio"
        << std::setw(14) << "index(bytes)" << "\n";
    for (const BenchRow& row : report.rows) {
        out << std::left << std::setw(20) << row.method << std::right << std::setw(10) << row.n
            << std::setw(6) << row.d << std::setw(5) << row.k << std::setw(12) << std::fixed
            << std::setprecision(3) << row.indexing_s << std::setw(12) << std::setprecision(3)
            << row.query_ms << std::setw(9) << std::setprecision(4) << row.recall << std::setw(10)
            << std::setprecision(5) << row.ratio << std::setw(14) << row.index_bytes << "\n";
        out.unsetf(std::ios::fixed);
        if (!row.params_echo.empty()) out << "    " << row.params_echo << "\n";
    }
}

}  // namespace detlsh
