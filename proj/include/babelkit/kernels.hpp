#pragma once

// Data-parallel inner loops. Each kernel has a serial reference and an OpenMP
// version; the two must produce bitwise-identical results for any thread count.

#include "babelkit/checkpoint.hpp"
#include "babelkit/filter.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace babelkit::kernels {

// ---- MinHash ---------------------------------------------------------------

inline constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

// h_j(x) = (a_j * x + b_j) mod (2^61 - 1), coefficients drawn from the seed.
struct MinHashFamily {
    std::vector<std::uint64_t> a;
    std::vector<std::uint64_t> b;

    static MinHashFamily from_seed(std::uint64_t seed, int num_perm);
    std::size_t size() const { return a.size(); }
};

using Signature = std::vector<std::uint64_t>;

// Signature of one shingle-hash set; empty input yields an empty signature.
Signature minhash(std::span<const std::uint64_t> shingles, const MinHashFamily& family);

std::vector<Signature> signatures_serial(std::span<const std::vector<std::uint64_t>> shingle_sets,
                                         const MinHashFamily& family);
std::vector<Signature> signatures_parallel(std::span<const std::vector<std::uint64_t>> shingle_sets,
                                           const MinHashFamily& family);

// ---- Gaussian perturbation of inserted layers ---------------------------------

// Stream seed for one tensor of one inserted layer.
std::uint64_t noise_stream_seed(std::uint64_t seed, int new_layer_index, std::string_view tensor_suffix);

// values[i] += N(mean, stddev), sampled from a generator seeded with stream_seed, in f32.
void add_gaussian_noise(std::span<float> values, double mean, double stddev, std::uint64_t stream_seed);

struct NoiseJob {
    Tensor* tensor;
    std::uint64_t stream_seed;
};

// Decode to f32, perturb, encode back to the tensor's dtype.
void apply_noise_serial(std::span<const NoiseJob> jobs, double mean, double stddev);
void apply_noise_parallel(std::span<const NoiseJob> jobs, double mean, double stddev);

// ---- Normalization filter ---------------------------------------------------------

std::vector<FilterVerdict> filter_serial(std::span<const Document> docs, const FilterRules& rules);
std::vector<FilterVerdict> filter_parallel(std::span<const Document> docs, const FilterRules& rules);

}  // namespace babelkit::kernels
