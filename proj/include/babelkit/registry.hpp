#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace babelkit {

enum class ResourceClass { High, Low };

std::string_view resource_class_name(ResourceClass rc);

// One row of the supported-language table. The *_label fields keep the table's
// literal text; the numeric fields are parsed from it.
struct LanguageInfo {
    std::string_view code;
    std::string_view name;
    std::string_view speakers_label;
    std::uint64_t speakers;
    std::string_view family;
    std::string_view macroarea;
    std::string_view cc_ratio_label;
    double cc_ratio;
    ResourceClass resource_class;  // published classification listing
};

// The 25 supported languages, ordered by speaker count as published.
std::span<const LanguageInfo> language_registry();

// Lookup by code ("sw") or English name ("Swahili"), case-insensitive.
const LanguageInfo* find_language(std::string_view code_or_name);
bool is_registered_language(std::string_view code);

// Threshold rule for languages without a published classification: cc_ratio >= 1.0 is High.
ResourceClass resource_class_from_cc_ratio(double cc_ratio);

// Published listing for registered languages. Throws a validation error for unknown languages.
ResourceClass classify_resource(std::string_view code_or_name);

// Registry export; rows where the listing and the threshold rule disagree carry "rule_conflict": true.
nlohmann::json registry_to_json();

}  // namespace babelkit
