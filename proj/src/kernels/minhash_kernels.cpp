#include "babelkit/kernels.hpp"

#include "babelkit/text.hpp"

#include <algorithm>
#include <limits>

namespace babelkit::kernels {

namespace {

std::uint64_t mod_mersenne61(unsigned __int128 x) {
    std::uint64_t lo = static_cast<std::uint64_t>(x & kMersenne61);
    std::uint64_t hi = static_cast<std::uint64_t>(x >> 61);
    std::uint64_t r = lo + hi;
    while (r >= kMersenne61) r -= kMersenne61;
    return r;
}

}  // namespace

MinHashFamily MinHashFamily::from_seed(std::uint64_t seed, int num_perm) {
    MinHashFamily f;
    f.a.resize(static_cast<std::size_t>(num_perm));
    f.b.resize(static_cast<std::size_t>(num_perm));
    std::uint64_t state = seed;
    for (int j = 0; j < num_perm; ++j) {
        state = mix64(state);
        f.a[j] = 1 + state % (kMersenne61 - 1);
        state = mix64(state);
        f.b[j] = state % kMersenne61;
    }
    return f;
}

Signature minhash(std::span<const std::uint64_t> shingles, const MinHashFamily& family) {
    if (shingles.empty()) return {};
    Signature sig(family.size(), std::numeric_limits<std::uint64_t>::max());
    for (std::uint64_t s : shingles) {
        const std::uint64_t x = s % kMersenne61;
        for (std::size_t j = 0; j < family.size(); ++j) {
            const std::uint64_t h =
                mod_mersenne61(static_cast<unsigned __int128>(family.a[j]) * x + family.b[j]);
            sig[j] = std::min(sig[j], h);
        }
    }
    return sig;
}

std::vector<Signature> signatures_serial(std::span<const std::vector<std::uint64_t>> shingle_sets,
                                         const MinHashFamily& family) {
    std::vector<Signature> out(shingle_sets.size());
    for (std::size_t i = 0; i < shingle_sets.size(); ++i) out[i] = minhash(shingle_sets[i], family);
    return out;
}

std::vector<Signature> signatures_parallel(std::span<const std::vector<std::uint64_t>> shingle_sets,
                                           const MinHashFamily& family) {
    std::vector<Signature> out(shingle_sets.size());
    const auto n = static_cast<std::int64_t>(shingle_sets.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < n; ++i) out[i] = minhash(shingle_sets[i], family);
    return out;
}

}  // namespace babelkit::kernels
