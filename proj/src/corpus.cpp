#include "babelkit/corpus.hpp"

#include "babelkit/error.hpp"
#include "babelkit/registry.hpp"
#include "babelkit/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

namespace babelkit {

using nlohmann::json;

Document document_from_json(const json& j) {
    if (!j.is_object()) throw validation_error("document is not a JSON object");
    auto string_field = [&](const char* key, bool required) -> std::optional<std::string> {
        if (!j.contains(key) || j.at(key).is_null()) {
            if (required) throw validation_error(std::string("missing field '") + key + "'");
            return std::nullopt;
        }
        if (!j.at(key).is_string()) throw validation_error(std::string("field '") + key + "' is not a string");
        return j.at(key).get<std::string>();
    };

    Document d;
    d.id = *string_field("id", true);
    if (d.id.empty()) throw validation_error("empty document id");
    d.text = *string_field("text", true);
    if (!is_valid_utf8(d.text)) throw validation_error("invalid UTF-8 in text of " + d.id);
    d.lang = string_field("lang", false).value_or("und");
    if (d.lang != "und" && !is_registered_language(d.lang))
        throw validation_error("unknown language '" + d.lang + "' for " + d.id);
    d.source = string_field("source", false).value_or("");
    if (j.contains("score") && !j.at("score").is_null()) {
        if (!j.at("score").is_number()) throw validation_error("score is not a number for " + d.id);
        double s = j.at("score").get<double>();
        if (!(s >= 0.0 && s <= 1.0)) throw validation_error("score outside [0,1] for " + d.id);
        d.score = s;
    }
    if (j.contains("tokens") && !j.at("tokens").is_null()) {
        if (!j.at("tokens").is_number_integer() || j.at("tokens").get<std::int64_t>() < 0)
            throw validation_error("tokens must be a non-negative integer for " + d.id);
        d.tokens = j.at("tokens").get<std::int64_t>();
    }
    return d;
}

json document_to_json(const Document& d) {
    json j = {{"id", d.id}, {"text", d.text}, {"lang", d.lang}, {"source", d.source}};
    if (d.score) j["score"] = *d.score;
    if (d.tokens) j["tokens"] = *d.tokens;
    return j;
}

std::int64_t document_tokens(const Document& doc) {
    if (doc.tokens) return *doc.tokens;
    return static_cast<std::int64_t>(split_words(doc.text).size());
}

std::string source_category(std::string_view source) {
    std::string s(source);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "web" || s == "news" || s == "wiki" || s == "textbook") return s;
    if (s == "wikipedia") return "wiki";
    if (s == "textbooks") return "textbook";
    return "other";
}

CorpusReadResult read_corpus(std::istream& in, bool strict) {
    CorpusReadResult result;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            Document d = document_from_json(json::parse(line));
            if (!seen.insert(d.id).second) throw validation_error("duplicate id '" + d.id + "'");
            result.documents.push_back(std::move(d));
        } catch (const std::exception& e) {
            std::string message = e.what();
            if (strict) throw validation_error("line " + std::to_string(line_number) + ": " + message);
            result.malformed.push_back({line_number, std::move(message)});
        }
    }
    if (in.bad()) throw io_error("read error");
    return result;
}

CorpusReadResult read_corpus_file(const std::string& path, bool strict) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    return read_corpus(in, strict);
}

void write_jsonl(std::ostream& out, std::span<const Document> docs) {
    for (const auto& d : docs) out << document_to_json(d).dump() << '\n';
}

}  // namespace babelkit
