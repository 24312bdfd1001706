#include "babelkit/kernels.hpp"

#include "babelkit/error.hpp"

#include <optional>

namespace babelkit::kernels {

std::vector<FilterVerdict> filter_serial(std::span<const Document> docs, const FilterRules& rules) {
    std::vector<FilterVerdict> out;
    out.reserve(docs.size());
    for (const auto& d : docs) out.push_back(normalize_filter(d, rules));
    return out;
}

std::vector<FilterVerdict> filter_parallel(std::span<const Document> docs, const FilterRules& rules) {
    std::vector<FilterVerdict> out(docs.size());
    // Exceptions cannot leave an OpenMP region; keep per-document messages and rethrow the first.
    std::vector<std::optional<std::string>> errors(docs.size());
    const auto n = static_cast<std::int64_t>(docs.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            out[i] = normalize_filter(docs[i], rules);
        } catch (const std::exception& e) {
            errors[i] = docs[i].id + ": " + e.what();
        }
    }
    for (const auto& e : errors)
        if (e) throw validation_error(*e);
    return out;
}

}  // namespace babelkit::kernels
