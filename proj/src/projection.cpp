#include "detlsh/projection.hpp"

#include <cmath>
#include <stdexcept>

#include "detlsh/chi2.hpp"
#include "detlsh/rng.hpp"

namespace detlsh {

HashFamily sample_hash_family(int d, int K, int L, std::uint64_t seed) {
    if (d < 1 || K < 1 || L < 1)
        throw std::invalid_argument("sample_hash_family: d, K, L must be positive");
    HashFamily family;
    family.d = d;
    family.K = K;
    family.L = L;
    family.seed = seed;
    family.coeffs.resize(static_cast<std::size_t>(L) * K * d);
    Rng rng(seed);
    for (auto& c : family.coeffs) c = static_cast<float>(rng.normal());
    return family;
}

void project_point_into(const HashFamily& family, std::span<const float> point, int space,
                        float* out) {
    if (static_cast<int>(point.size()) != family.d)
        throw std::invalid_argument("project_point: point dimension mismatch");
    if (space < 0 || space >= family.L)
        throw std::invalid_argument("project_point: space index out of range");
    for (int j = 0; j < family.K; ++j) {
        const auto a = family.vec(space, j);
        double dot = 0.0;
        for (int t = 0; t < family.d; ++t)
            dot += static_cast<double>(a[t]) * static_cast<double>(point[t]);
        out[j] = static_cast<float>(dot);
    }
}

std::vector<float> project_point(const HashFamily& family, std::span<const float> point,
                                 int space) {
    std::vector<float> out(static_cast<std::size_t>(family.K));
    project_point_into(family, point, space, out.data());
    return out;
}

ProjectedDataset project_dataset(const HashFamily& family, const Dataset& data) {
    if (data.n == 0) throw std::invalid_argument("project_dataset: empty dataset");
    if (data.d != family.d)
        throw std::invalid_argument("project_dataset: dataset dimension mismatch");
    ProjectedDataset proj;
    proj.L = family.L;
    proj.K = family.K;
    proj.n = data.n;
    proj.values.resize(static_cast<std::size_t>(family.L) * data.n * family.K);
    for (int i = 0; i < family.L; ++i)
        for (std::size_t z = 0; z < data.n; ++z)
            project_point_into(family, data.row(z), i, proj.row_data(i, z));
    return proj;
}

std::vector<float> paa_summarize(std::span<const float> point, int K) {
    const int d = static_cast<int>(point.size());
    if (K < 1 || K > d) throw std::invalid_argument("paa_summarize: K must lie in [1, d]");
    const int seg = d / K;
    std::vector<float> out(static_cast<std::size_t>(K));
    for (int j = 0; j < K; ++j) {
        const int begin = j * seg;
        const int end = (j == K - 1) ? d : begin + seg;  // last segment takes the remainder
        double sum = 0.0;
        for (int t = begin; t < end; ++t) sum += point[static_cast<std::size_t>(t)];
        out[static_cast<std::size_t>(j)] = static_cast<float>(sum / (end - begin));
    }
    return out;
}

ProjectedDataset paa_project_dataset(const Dataset& data, int K) {
    if (data.n == 0) throw std::invalid_argument("paa_project_dataset: empty dataset");
    ProjectedDataset proj;
    proj.L = 1;
    proj.K = K;
    proj.n = data.n;
    proj.values.resize(data.n * static_cast<std::size_t>(K));
    for (std::size_t z = 0; z < data.n; ++z) {
        const auto summary = paa_summarize(data.row(z), K);
        float* out = proj.row_data(0, z);
        for (int j = 0; j < K; ++j) out[j] = summary[static_cast<std::size_t>(j)];
    }
    return proj;
}

DerivedParams derive_params(int K, double c, int L) {
    if (K < 1 || L < 1) throw std::invalid_argument("derive_params: K, L must be positive");
    if (!(c > 1.0)) throw std::invalid_argument("derive_params: c must exceed 1");
    DerivedParams p;
    p.alpha1 = std::exp(-1.0 / static_cast<double>(L));
    const double eps_sq = chi2_quantile(p.alpha1, K);
    p.epsilon = std::sqrt(eps_sq);
    p.alpha2 = 1.0 - chi2_cdf(eps_sq / (c * c), K);
    p.beta = 2.0 * (1.0 - std::pow(p.alpha2, static_cast<double>(L)));
    return p;
}

}  // namespace detlsh
