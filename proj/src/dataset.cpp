#include "detlsh/dataset.hpp"

#include <cstring>

namespace detlsh {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_mix(std::uint64_t& h, const void* bytes, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
}

}  // namespace

std::uint64_t dataset_fingerprint(const Dataset& data) {
    std::uint64_t h = kFnvOffset;
    const std::uint64_t n = data.n;
    const std::uint32_t d = static_cast<std::uint32_t>(data.d);
    fnv_mix(h, &n, sizeof(n));
    fnv_mix(h, &d, sizeof(d));
    fnv_mix(h, data.values.data(), data.values.size() * sizeof(float));
    return h;
}

}  // namespace detlsh
