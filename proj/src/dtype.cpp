#include "babelkit/dtype.hpp"

#include "babelkit/error.hpp"

#include <Eigen/Core>

#include <bit>
#include <cstring>

static_assert(std::endian::native == std::endian::little, "tensor container assumes a little-endian host");

namespace babelkit {

std::size_t dtype_width(DType dtype) {
    switch (dtype) {
        case DType::F32: return 4;
        case DType::F16: return 2;
        case DType::BF16: return 2;
    }
    return 0;
}

std::string_view dtype_name(DType dtype) {
    switch (dtype) {
        case DType::F32: return "F32";
        case DType::F16: return "F16";
        case DType::BF16: return "BF16";
    }
    return "?";
}

DType parse_dtype(std::string_view name) {
    if (name == "F32") return DType::F32;
    if (name == "F16") return DType::F16;
    if (name == "BF16") return DType::BF16;
    throw validation_error("unsupported dtype '" + std::string(name) + "' (supported: F32, F16, BF16)");
}

std::vector<float> decode_f32(DType dtype, std::span<const std::uint8_t> bytes) {
    const std::size_t n = bytes.size() / dtype_width(dtype);
    std::vector<float> out(n);
    switch (dtype) {
        case DType::F32:
            std::memcpy(out.data(), bytes.data(), n * 4);
            break;
        case DType::F16:
            for (std::size_t i = 0; i < n; ++i) {
                std::uint16_t raw;
                std::memcpy(&raw, bytes.data() + 2 * i, 2);
                out[i] = static_cast<float>(std::bit_cast<Eigen::half>(raw));
            }
            break;
        case DType::BF16:
            for (std::size_t i = 0; i < n; ++i) {
                std::uint16_t raw;
                std::memcpy(&raw, bytes.data() + 2 * i, 2);
                out[i] = static_cast<float>(std::bit_cast<Eigen::bfloat16>(raw));
            }
            break;
    }
    return out;
}

std::vector<std::uint8_t> encode_f32(DType dtype, std::span<const float> values) {
    std::vector<std::uint8_t> out(values.size() * dtype_width(dtype));
    switch (dtype) {
        case DType::F32:
            std::memcpy(out.data(), values.data(), out.size());
            break;
        case DType::F16:
            for (std::size_t i = 0; i < values.size(); ++i) {
                auto raw = std::bit_cast<std::uint16_t>(Eigen::half(values[i]));
                std::memcpy(out.data() + 2 * i, &raw, 2);
            }
            break;
        case DType::BF16:
            for (std::size_t i = 0; i < values.size(); ++i) {
                auto raw = std::bit_cast<std::uint16_t>(Eigen::bfloat16(values[i]));
                std::memcpy(out.data() + 2 * i, &raw, 2);
            }
            break;
    }
    return out;
}

}  // namespace babelkit
