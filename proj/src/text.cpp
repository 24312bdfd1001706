#include "babelkit/text.hpp"

#include "babelkit/error.hpp"

#include <openssl/evp.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/ustring.h>

#include <memory>

namespace babelkit {

namespace {

// Strict UTF-8 -> UTF-16 conversion; ICU reports ill-formed input instead of substituting.
icu::UnicodeString from_utf8_strict(std::string_view text) {
    if (text.empty()) return {};
    UErrorCode status = U_ZERO_ERROR;
    int32_t length = 0;
    u_strFromUTF8(nullptr, 0, &length, text.data(), static_cast<int32_t>(text.size()), &status);
    if (status != U_BUFFER_OVERFLOW_ERROR && U_FAILURE(status)) throw validation_error("invalid UTF-8");
    status = U_ZERO_ERROR;
    icu::UnicodeString out;
    UChar* buf = out.getBuffer(length);
    u_strFromUTF8(buf, length, &length, text.data(), static_cast<int32_t>(text.size()), &status);
    out.releaseBuffer(U_SUCCESS(status) ? length : 0);
    if (U_FAILURE(status)) throw validation_error("invalid UTF-8");
    return out;
}

icu::UnicodeString nfc_utf16(std::string_view text) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");
    icu::UnicodeString normalized = normalizer->normalize(from_utf8_strict(text), status);
    if (U_FAILURE(status)) throw validation_error("NFC normalization failed");
    return normalized;
}

template <typename Fn>
void for_each_code_point(const icu::UnicodeString& s, Fn&& fn) {
    for (int32_t i = 0; i < s.length(); i = s.moveIndex32(i, 1)) fn(s.char32At(i));
}

std::string to_utf8(const icu::UnicodeString& s) {
    std::string out;
    s.toUTF8String(out);
    return out;
}

}  // namespace

bool is_valid_utf8(std::string_view text) {
    try {
        from_utf8_strict(text);
        return true;
    } catch (const Error&) {
        return false;
    }
}

std::string nfc(std::string_view text) { return to_utf8(nfc_utf16(text)); }

TextMeasure measure_text(std::string_view text) {
    const icu::UnicodeString s = nfc_utf16(text);
    std::vector<UChar32> cps;
    for_each_code_point(s, [&](UChar32 c) { cps.push_back(c); });

    std::size_t begin = 0, end = cps.size();
    while (begin < end && u_isUWhiteSpace(cps[begin])) ++begin;
    while (end > begin && u_isUWhiteSpace(cps[end - 1])) --end;

    TextMeasure m;
    m.chars = end - begin;
    for (std::size_t i = begin; i < end; ++i)
        if (u_charType(cps[i]) == U_DECIMAL_DIGIT_NUMBER) ++m.digits;
    return m;
}

std::string collapse_whitespace(std::string_view text) {
    std::string out;
    for (const auto& w : split_words(text)) {
        if (!out.empty()) out += ' ';
        out += w;
    }
    return out;
}

std::vector<std::string> split_words(std::string_view text) {
    const icu::UnicodeString s = nfc_utf16(text);
    std::vector<std::string> words;
    icu::UnicodeString current;
    for_each_code_point(s, [&](UChar32 c) {
        if (u_isUWhiteSpace(c)) {
            if (!current.isEmpty()) {
                words.push_back(to_utf8(current));
                current.remove();
            }
        } else {
            current.append(c);
        }
    });
    if (!current.isEmpty()) words.push_back(to_utf8(current));
    return words;
}

Digest128 content_digest(std::string_view bytes) {
    unsigned char full[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), full, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    Digest128 d{};
    std::copy(full, full + d.size(), d.begin());
    return d;
}

std::string to_hex(const Digest128& digest) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (auto b : digest) {
        out += kHex[b >> 4];
        out += kHex[b & 0xF];
    }
    return out;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t hash64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return mix64(h);
}

}  // namespace babelkit
