#include "babelkit/kernels.hpp"

#include "babelkit/text.hpp"

#include <random>

namespace babelkit::kernels {

std::uint64_t noise_stream_seed(std::uint64_t seed, int new_layer_index, std::string_view tensor_suffix) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ static_cast<std::uint64_t>(new_layer_index));
    return mix64(h ^ hash64(tensor_suffix));
}

void add_gaussian_noise(std::span<float> values, double mean, double stddev, std::uint64_t stream_seed) {
    std::mt19937_64 gen(stream_seed);
    std::normal_distribution<double> dist(mean, stddev);
    for (float& v : values) v += static_cast<float>(dist(gen));
}

namespace {

void perturb(const NoiseJob& job, double mean, double stddev) {
    Tensor& t = *job.tensor;
    auto values = decode_f32(t.dtype, t.data);
    add_gaussian_noise(values, mean, stddev, job.stream_seed);
    t.data = encode_f32(t.dtype, values);
}

}  // namespace

void apply_noise_serial(std::span<const NoiseJob> jobs, double mean, double stddev) {
    for (const auto& job : jobs) perturb(job, mean, stddev);
}

void apply_noise_parallel(std::span<const NoiseJob> jobs, double mean, double stddev) {
    const auto n = static_cast<std::int64_t>(jobs.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t i = 0; i < n; ++i) perturb(jobs[i], mean, stddev);
}

}  // namespace babelkit::kernels
