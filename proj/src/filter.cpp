#include "babelkit/filter.hpp"

#include "babelkit/error.hpp"
#include "babelkit/kernels.hpp"
#include "babelkit/text.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace babelkit {

using nlohmann::json;

void FilterRules::validate() const {
    if (!(max_digit_ratio >= 0.0 && max_digit_ratio <= 1.0))
        throw validation_error("max_digit_ratio must lie in [0, 1]");
}

std::string_view reject_reason_name(RejectReason reason) {
    switch (reason) {
        case RejectReason::TooShort: return "TooShort";
        case RejectReason::TooManyDigits: return "TooManyDigits";
        case RejectReason::Unscored: return "Unscored";
        case RejectReason::LowScore: return "LowScore";
    }
    return "?";
}

FilterVerdict normalize_filter(const Document& doc, const FilterRules& rules) {
    const TextMeasure m = measure_text(doc.text);
    if (m.chars == 0 || m.chars < rules.min_chars)
        return FilterVerdict::reject(RejectReason::TooShort, std::to_string(m.chars) + " chars < " +
                                                                 std::to_string(rules.min_chars));
    const double ratio = static_cast<double>(m.digits) / static_cast<double>(m.chars);
    if (ratio > rules.max_digit_ratio) {
        std::ostringstream detail;
        detail << m.digits << "/" << m.chars << " digits > " << rules.max_digit_ratio;
        return FilterVerdict::reject(RejectReason::TooManyDigits, detail.str());
    }
    return FilterVerdict::accept();
}

ScoreTable read_score_sidecar(std::istream& in) {
    ScoreTable table;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = "score sidecar line " + std::to_string(line_number);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw validation_error(where + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("score") ||
            !j["score"].is_number())
            throw validation_error(where + ": expected {\"id\": string, \"score\": number}");
        const double score = j["score"].get<double>();
        if (!std::isfinite(score)) throw validation_error(where + ": non-finite score");
        auto id = j["id"].get<std::string>();
        if (!table.emplace(id, score).second) throw validation_error(where + ": duplicate id '" + id + "'");
    }
    return table;
}

namespace {

void finish(FilterOutcome& out) {
    std::stable_sort(out.rejected.begin(), out.rejected.end(),
                     [](const Rejection& a, const Rejection& b) { return a.id < b.id; });
    out.counts["kept"] = out.kept.size();
    for (const auto& r : out.rejected) ++out.counts[std::string(reject_reason_name(r.reason))];
}

}  // namespace

FilterOutcome score_gate(std::span<const Document> docs, double threshold, const ScoreTable* sidecar) {
    if (!std::isfinite(threshold)) throw validation_error("score threshold must be finite");
    FilterOutcome out;
    for (const auto& d : docs) {
        std::optional<double> score = d.score;
        if (sidecar)
            if (auto it = sidecar->find(d.id); it != sidecar->end()) score = it->second;
        if (!score) {
            out.rejected.push_back({d.id, RejectReason::Unscored, "no score in document or sidecar"});
        } else if (*score >= threshold) {
            out.kept.push_back(d);
        } else {
            std::ostringstream detail;
            detail << "score " << *score << " < " << threshold;
            out.rejected.push_back({d.id, RejectReason::LowScore, detail.str()});
        }
    }
    finish(out);
    return out;
}

FilterOutcome clean_corpus(std::span<const Document> docs, const CleanOptions& options) {
    options.rules.validate();
    const auto verdicts = kernels::filter_parallel(docs, options.rules);

    FilterOutcome out;
    std::vector<Document> passed;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (verdicts[i].keep) passed.push_back(docs[i]);
        else out.rejected.push_back({docs[i].id, verdicts[i].reason, verdicts[i].detail});
    }
    if (options.score_threshold) {
        FilterOutcome gated = score_gate(passed, *options.score_threshold, options.sidecar);
        out.kept = std::move(gated.kept);
        out.rejected.insert(out.rejected.end(), gated.rejected.begin(), gated.rejected.end());
    } else {
        out.kept = std::move(passed);
    }
    finish(out);
    return out;
}

void write_rejections(std::ostream& out, std::span<const Rejection> rejections) {
    for (const auto& r : rejections)
        out << json{{"id", r.id}, {"reason", reject_reason_name(r.reason)}, {"detail", r.detail}}.dump() << '\n';
}

}  // namespace babelkit
