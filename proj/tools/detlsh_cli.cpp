#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "detlsh/bench.hpp"
#include "detlsh/index.hpp"
#include "detlsh/io.hpp"
#include "detlsh/metrics.hpp"
#include "detlsh/persist.hpp"
#include "detlsh/projection.hpp"

namespace {

struct BuildArgs {
    std::string dataset;
    std::string out;
    detlsh::LshParams params;
    std::uint64_t seed = 1;
    bool det_only = false;
};

void add_param_options(CLI::App* cmd, detlsh::LshParams& p, std::uint64_t& seed) {
    cmd->add_option("--K", p.K, "projected dimension");
    cmd->add_option("--L", p.L, "number of trees");
    cmd->add_option("--c", p.c, "approximation ratio");
    cmd->add_option("--beta", p.beta, "candidate fraction (0 derives it)");
    cmd->add_option("--regions", p.n_regions, "regions per dimension (power of two)");
    cmd->add_option("--leaf", p.leaf_capacity, "leaf capacity");
    cmd->add_option("--sample", p.sample_fraction, "breakpoint sample fraction");
    cmd->add_option("--rmin", p.r_min, "initial search radius (0 estimates it)");
    cmd->add_option("--seed", seed, "random seed");
}

int run_params(int K, double c, int L) {
    const auto derived = detlsh::derive_params(K, c, L);
    std::printf("alpha1  %.10f\n", derived.alpha1);
    std::printf("alpha2  %.10f\n", derived.alpha2);
    std::printf("epsilon %.10f\n", derived.epsilon);
    std::printf("beta    %.10f\n", derived.beta);
    return 0;
}

int run_build(const BuildArgs& args) {
    auto data = std::make_shared<const detlsh::Dataset>(detlsh::read_vectors(args.dataset));
    std::fprintf(stderr, "loaded %zu points, d=%d\n", data->n, data->d);
    const detlsh::DetIndex index =
        args.det_only ? detlsh::build_det_only_index(data, args.params, args.seed)
                      : detlsh::build_index(data, args.params, args.seed);
    detlsh::save_index(index, args.out);
    std::fprintf(stderr, "index written to %s (%zu bytes, r_min=%.6g)\n", args.out.c_str(),
                 detlsh::serialized_size(index), index.params.r_min);
    return 0;
}

int run_gt(const std::string& dataset, const std::string& queries, int k,
           const std::string& out, const std::string& dist_out) {
    const detlsh::Dataset data = detlsh::read_vectors(dataset);
    const detlsh::Dataset q = detlsh::read_vectors(queries);
    const detlsh::GroundTruth truth = detlsh::brute_force_knn(data, q, k);
    detlsh::write_ivecs_rows(out, truth.positions, truth.nq, truth.k);
    if (!dist_out.empty()) {
        detlsh::Dataset dists;
        dists.n = truth.nq;
        dists.d = truth.k;
        dists.values.assign(truth.distances.begin(), truth.distances.end());
        detlsh::write_vectors(dist_out, dists, detlsh::VecElement::f32);
    }
    std::fprintf(stderr, "ground truth for %zu queries written to %s\n", truth.nq, out.c_str());
    return 0;
}

int run_query(const std::string& index_path, const std::string& dataset,
              const std::string& queries, int k, double rmin) {
    auto data = std::make_shared<const detlsh::Dataset>(detlsh::read_vectors(dataset));
    detlsh::DetIndex index = detlsh::load_index(index_path, data);
    if (rmin > 0.0) index.params.r_min = rmin;
    const detlsh::Dataset q = detlsh::read_vectors(queries);
    std::printf("query_id,rank,position,distance\n");
    for (std::size_t qi = 0; qi < q.n; ++qi) {
        const detlsh::QueryResult result = detlsh::ck_ann(index, q.row(qi), k);
        for (std::size_t rank = 0; rank < result.hits.size(); ++rank)
            std::printf("%zu,%zu,%u,%.9g\n", qi, rank + 1, result.hits[rank].first,
                        result.hits[rank].second);
    }
    return 0;
}

int run_bench(const std::string& config_path) {
    const detlsh::BenchConfig config = detlsh::parse_bench_config(config_path);
    const detlsh::BenchReport report = detlsh::run_benchmark(config);
    detlsh::print_table(report, std::cout);
    if (!config.csv_path.empty())
        std::fprintf(stderr, "csv written to %s\n", config.csv_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DET-LSH: dynamic encoding tree LSH for c-approximate nearest neighbors"};
    app.require_subcommand(1);

    // params
    int pk = 16, pl = 4;
    double pc = 1.5;
    auto* params_cmd = app.add_subcommand("params", "derive alpha1, alpha2, epsilon, beta");
    params_cmd->add_option("--K", pk, "projected dimension");
    params_cmd->add_option("--c", pc, "approximation ratio");
    params_cmd->add_option("--L", pl, "number of trees");

    // build
    BuildArgs build_args;
    build_args.params.beta = 0.1;  // benchmark profile default
    auto* build_cmd = app.add_subcommand("build", "build and persist an index");
    build_cmd->add_option("--dataset", build_args.dataset, "dataset file")->required();
    build_cmd->add_option("--out", build_args.out, "index output path")->required();
    add_param_options(build_cmd, build_args.params, build_args.seed);
    build_cmd->add_flag("--det-only", build_args.det_only, "PAA summaries, single tree");

    // gt
    std::string gt_dataset, gt_queries, gt_out, gt_dist_out;
    int gt_k = 50;
    auto* gt_cmd = app.add_subcommand("gt", "exact ground truth via brute force");
    gt_cmd->add_option("--dataset", gt_dataset, "dataset file")->required();
    gt_cmd->add_option("--queries", gt_queries, "query file")->required();
    gt_cmd->add_option("--k", gt_k, "neighbors per query");
    gt_cmd->add_option("--out", gt_out, "ivecs output path")->required();
    gt_cmd->add_option("--dist-out", gt_dist_out, "optional fvecs distance output");

    // query
    std::string q_index, q_dataset, q_queries;
    int q_k = 50;
    double q_rmin = 0.0;
    auto* query_cmd = app.add_subcommand("query", "run k-ANN queries against an index");
    query_cmd->add_option("--index", q_index, "index file")->required();
    query_cmd->add_option("--dataset", q_dataset, "dataset file")->required();
    query_cmd->add_option("--queries", q_queries, "query file")->required();
    query_cmd->add_option("--k", q_k, "results per query");
    query_cmd->add_option("--rmin", q_rmin, "override the initial radius");

    // bench
    std::string bench_config;
    auto* bench_cmd = app.add_subcommand("bench", "run a benchmark configuration");
    bench_cmd->add_option("--config", bench_config, "JSON config file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (params_cmd->parsed()) return run_params(pk, pc, pl);
        if (build_cmd->parsed()) return run_build(build_args);
        if (gt_cmd->parsed()) return run_gt(gt_dataset, gt_queries, gt_k, gt_out, gt_dist_out);
        if (query_cmd->parsed()) return run_query(q_index, q_dataset, q_queries, q_k, q_rmin);
        if (bench_cmd->parsed()) return run_bench(bench_config);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
