#include "babelkit/registry.hpp"

#include "babelkit/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace babelkit {

namespace {

using RC = ResourceClass;

// clang-format off
constexpr std::array<LanguageInfo, 25> kLanguages = {{
    {"en", "English",          "1.5B", 1'500'000'000, "Germanic",          "Worldwide",                "43.4",  43.4,  RC::High},
    {"zh", "Chinese (Mandarin)", "1.4B", 1'400'000'000, "Sinitic",           "Asia",                     "5.1",   5.1,   RC::High},
    {"hi", "Hindi",            "700M",   700'000'000, "Indo-Aryan",        "Asia",                     "0.2",   0.2,   RC::Low},
    {"es", "Spanish",          "595M",   595'000'000, "Romance",           "Americas, Europe",         "4.6",   4.6,   RC::High},
    {"ar", "Standard Arabic",  "400M",   400'000'000, "Semitic",           "Asia, Africa",             "0.68",  0.68,  RC::Low},
    {"fr", "French",           "300M",   300'000'000, "Romance",           "Europe, Africa, Americas", "4.4",   4.4,   RC::High},
    {"bn", "Bengali",          "300M",   300'000'000, "Indo-Aryan",        "Asia",                     "0.1",   0.1,   RC::Low},
    {"pt", "Portuguese",       "270M",   270'000'000, "Romance",           "Americas, Europe, Africa", "2.3",   2.3,   RC::High},
    {"ru", "Russian",          "260M",   260'000'000, "Slavic",            "Europe, Asia",             "6.2",   6.2,   RC::High},
    {"ur", "Urdu",             "230M",   230'000'000, "Indo-Aryan",        "Asia",                     "0.02",  0.02,  RC::Low},
    {"id", "Indonesian",       "200M",   200'000'000, "Malayo-Polynesian", "Asia",                     "1.1",   1.1,   RC::High},
    {"de", "Standard German",  "135M",   135'000'000, "Germanic",          "Europe",                   "5.4",   5.4,   RC::High},
    {"ja", "Japanese",         "130M",   130'000'000, "Japonic",           "Asia",                     "5.3",   5.3,   RC::High},
    {"sw", "Swahili",          "100M",   100'000'000, "Bantu",             "Africa",                   "0.008", 0.008, RC::Low},
    {"tl", "Filipino (Tagalog)", "100M",   100'000'000, "Malayo-Polynesian", "Asia",                     "0.008", 0.008, RC::Low},
    {"ta", "Tamil",            "90M",     90'000'000, "Dravidian",         "Asia",                     "0.04",  0.04,  RC::Low},
    {"vi", "Vietnamese",       "86M",     86'000'000, "Vietic",            "Asia",                     "1.0",   1.0,   RC::High},
    {"tr", "Turkish",          "85M",     85'000'000, "Turkic",            "Asia, Europe",             "1.3",   1.3,   RC::Low},
    {"it", "Italian",          "85M",     85'000'000, "Romance",           "Europe",                   "2.4",   2.4,   RC::High},
    {"jv", "Javanese",         "83M",     83'000'000, "Malayo-Polynesian", "Asia",                     "0.002", 0.002, RC::Low},
    {"ko", "Korean",           "80M",     80'000'000, "Koreanic",          "Asia",                     "0.76",  0.76,  RC::Low},
    {"ha", "Hausa",            "80M",     80'000'000, "Chadic",            "Africa",                   "0.003", 0.003, RC::Low},
    {"fa", "Iranian Persian",  "80M",     80'000'000, "Indo-Iranian",      "Asia",                     "0.74",  0.74,  RC::Low},
    {"th", "Thai",             "80M",     80'000'000, "Kra-Dai",           "Asia",                     "0.42",  0.42,  RC::Low},
    {"my", "Burmese",          "50M",     50'000'000, "Tibeto-Burman",     "Asia",                     "0.01",  0.01,  RC::Low},
}};
// clang-format on

// Alternate names accepted by find_language.
constexpr std::array<std::pair<std::string_view, std::string_view>, 9> kAliases = {{
    {"chinese", "zh"}, {"filipino", "tl"}, {"arabic", "ar"}, {"german", "de"}, {"persian", "fa"}, {"farsi", "fa"},
    {"tagalog", "tl"}, {"mandarin", "zh"}, {"fil", "tl"},
}};

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

}  // namespace

std::string_view resource_class_name(ResourceClass rc) { return rc == ResourceClass::High ? "high" : "low"; }

std::span<const LanguageInfo> language_registry() { return kLanguages; }

const LanguageInfo* find_language(std::string_view key) {
    for (const auto& [alias, code] : kAliases)
        if (iequals(alias, key)) key = code;
    for (const auto& lang : kLanguages)
        if (iequals(lang.code, key) || iequals(lang.name, key)) return &lang;
    return nullptr;
}

bool is_registered_language(std::string_view code) {
    return std::any_of(kLanguages.begin(), kLanguages.end(), [&](const auto& l) { return l.code == code; });
}

ResourceClass resource_class_from_cc_ratio(double cc_ratio) {
    return cc_ratio >= 1.0 ? ResourceClass::High : ResourceClass::Low;
}

ResourceClass classify_resource(std::string_view code_or_name) {
    const LanguageInfo* lang = find_language(code_or_name);
    if (!lang) throw validation_error("unknown language '" + std::string(code_or_name) + "'");
    return lang->resource_class;
}

nlohmann::json registry_to_json() {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& l : kLanguages) {
        const auto by_rule = resource_class_from_cc_ratio(l.cc_ratio);
        rows.push_back({{"code", l.code},
                        {"name", l.name},
                        {"speakers", l.speakers_label},
                        {"speakers_count", l.speakers},
                        {"family", l.family},
                        {"macroarea", l.macroarea},
                        {"cc_ratio", l.cc_ratio_label},
                        {"cc_ratio_value", l.cc_ratio},
                        {"resource_class", resource_class_name(l.resource_class)},
                        {"rule_class", resource_class_name(by_rule)},
                        {"rule_conflict", by_rule != l.resource_class}});
    }
    return {{"languages", rows}, {"cc_ratio_threshold", 1.0}};
}

}  // namespace babelkit
