#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace babelkit {

enum class DType { F32, F16, BF16 };

std::size_t dtype_width(DType dtype);
std::string_view dtype_name(DType dtype);  // "F32", "F16", "BF16"
// Throws a validation error naming the offending string; quantized types are refused here.
DType parse_dtype(std::string_view name);

// Little-endian raw bytes <-> f32 values.
std::vector<float> decode_f32(DType dtype, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_f32(DType dtype, std::span<const float> values);

}  // namespace babelkit
