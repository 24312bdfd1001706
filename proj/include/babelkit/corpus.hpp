#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace babelkit {

struct Document {
    std::string id;
    std::string text;
    std::string lang = "und";  // registry code or "und"
    std::string source;
    std::optional<double> score;
    std::optional<std::int64_t> tokens;  // precomputed token count, if the corpus carries one

    bool operator==(const Document&) const = default;
};

// Throws a validation error naming the offending field.
Document document_from_json(const nlohmann::json& j);
nlohmann::json document_to_json(const Document& doc);

// Token count used by mixture sampling: the "tokens" field when present, else whitespace words.
std::int64_t document_tokens(const Document& doc);

// Source tag -> mixture category (web, news, wiki, textbook, other). Case-insensitive.
std::string source_category(std::string_view source);

struct MalformedLine {
    std::size_t line_number;  // 1-based
    std::string message;
};

struct CorpusReadResult {
    std::vector<Document> documents;
    std::vector<MalformedLine> malformed;
};

// Reads JSONL documents. Malformed lines (bad JSON, bad fields, invalid UTF-8, duplicate ids)
// are skipped and logged; with strict=true the first one throws a validation error
// carrying its line number. Blank lines are ignored.
CorpusReadResult read_corpus(std::istream& in, bool strict);
CorpusReadResult read_corpus_file(const std::string& path, bool strict);

void write_jsonl(std::ostream& out, std::span<const Document> docs);

}  // namespace babelkit
