#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace babelkit {

bool is_valid_utf8(std::string_view text);

// NFC-normalized copy. Throws a validation error on ill-formed UTF-8.
std::string nfc(std::string_view text);

// Character statistics after NFC and trimming of leading/trailing Unicode whitespace.
// `chars` counts Unicode scalar values; `digits` counts general category Nd.
struct TextMeasure {
    std::size_t chars = 0;
    std::size_t digits = 0;
};
TextMeasure measure_text(std::string_view text);

// NFC, then every run of Unicode whitespace becomes one ASCII space; ends trimmed.
std::string collapse_whitespace(std::string_view text);

// Splits on Unicode whitespace after NFC; empty tokens are dropped.
std::vector<std::string> split_words(std::string_view text);

// 128-bit content digest (leading half of SHA-256).
using Digest128 = std::array<std::uint8_t, 16>;
Digest128 content_digest(std::string_view bytes);
std::string to_hex(const Digest128& digest);

// Stable 64-bit string hash (FNV-1a with a splitmix64 finalizer); identical on every platform.
std::uint64_t hash64(std::string_view bytes);
std::uint64_t mix64(std::uint64_t x);

}  // namespace babelkit
