#include "babelkit/mixture.hpp"

#include "babelkit/error.hpp"
#include "babelkit/registry.hpp"
#include "babelkit/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

namespace babelkit {

using nlohmann::json;

namespace {

bool known_category(std::string_view c) {
    return std::find(kCategories.begin(), kCategories.end(), c) != kCategories.end();
}

}  // namespace

std::map<std::string, std::uint64_t> CorpusStats::language_totals() const {
    std::map<std::string, std::uint64_t> out;
    for (const auto& [key, n] : available) out[key.first] += n;
    return out;
}

std::uint64_t CorpusStats::total() const {
    std::uint64_t t = 0;
    for (const auto& [key, n] : available) t += n;
    return t;
}

void CorpusStats::validate() const {
    for (const auto& [key, n] : available)
        if (!known_category(key.second))
            throw validation_error("unknown category '" + key.second + "' for language " + key.first);
}

json stats_to_json(const CorpusStats& s) {
    json avail = json::object();
    for (const auto& [key, n] : s.available) avail[key.first][key.second] = n;
    return {{"unit", s.unit}, {"available", avail}};
}

CorpusStats stats_from_json(const json& j) {
    CorpusStats s;
    if (!j.is_object() || !j.contains("available") || !j["available"].is_object())
        throw validation_error("stats must be an object with an \"available\" map");
    s.unit = j.value("unit", std::string("tokens"));
    for (const auto& [lang, cats] : j["available"].items()) {
        if (!cats.is_object()) throw validation_error("stats for " + lang + " must be an object");
        for (const auto& [cat, n] : cats.items()) {
            if (!n.is_number_integer() || n.get<std::int64_t>() < 0)
                throw validation_error("count for " + lang + "/" + cat + " must be a non-negative integer");
            s.available[{lang, cat}] = n.get<std::uint64_t>();
        }
    }
    s.validate();
    return s;
}

CorpusStats corpus_stats(std::span<const Document> docs) {
    CorpusStats s;
    for (const auto& d : docs) s.available[{d.lang, source_category(d.source)}] += document_tokens(d);
    return s;
}

std::uint64_t MixturePlan::total() const {
    std::uint64_t t = 0;
    for (const auto& [key, n] : allocations) t += n;
    return t;
}

std::map<std::string, std::uint64_t> MixturePlan::language_totals() const {
    std::map<std::string, std::uint64_t> out;
    for (const auto& [key, n] : allocations) out[key.first] += n;
    return out;
}

json plan_to_json(const MixturePlan& p) {
    json alloc = json::object();
    for (const auto& [key, n] : p.allocations) alloc[key.first][key.second] = n;
    json j = {{"stage", p.stage}, {"budget", p.budget}, {"total", p.total()}, {"allocations", alloc}};
    if (p.stage == 2) {
        j["low_boost"] = p.low_boost;
        j["textbook_boost"] = p.textbook_boost;
    }
    return j;
}

MixturePlan plan_from_json(const json& j) {
    MixturePlan p;
    p.stage = j.at("stage").get<int>();
    p.budget = j.at("budget").get<std::uint64_t>();
    p.low_boost = j.value("low_boost", 1.0);
    p.textbook_boost = j.value("textbook_boost", 1.0);
    for (const auto& [lang, cats] : j.at("allocations").items())
        for (const auto& [cat, n] : cats.items()) p.allocations[{lang, cat}] = n.get<std::uint64_t>();
    return p;
}

std::vector<double> water_fill(std::span<const double> avail, double budget) {
    std::vector<std::size_t> order(avail.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return avail[x] < avail[y]; });

    const double supply = std::accumulate(avail.begin(), avail.end(), 0.0);
    double remaining = std::min(budget, supply);
    std::vector<double> out(avail.size(), 0.0);
    std::size_t pos = 0, m = avail.size();
    for (; pos < order.size() && avail[order[pos]] * static_cast<double>(m) <= remaining; ++pos, --m) {
        out[order[pos]] = avail[order[pos]];
        remaining -= avail[order[pos]];
    }
    if (m > 0) {
        const double level = remaining / static_cast<double>(m);
        for (; pos < order.size(); ++pos) out[order[pos]] = level;
    }
    return out;
}

std::vector<std::uint64_t> water_fill_integer(std::span<const std::uint64_t> avail, std::uint64_t budget) {
    std::vector<std::size_t> order(avail.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return avail[x] < avail[y]; });

    unsigned __int128 supply = 0;
    for (auto a : avail) supply += a;
    std::uint64_t remaining = static_cast<std::uint64_t>(std::min<unsigned __int128>(budget, supply));

    std::vector<std::uint64_t> out(avail.size(), 0);
    std::size_t pos = 0, m = avail.size();
    for (; pos < order.size() &&
           static_cast<unsigned __int128>(avail[order[pos]]) * m <= remaining;
         ++pos, --m) {
        out[order[pos]] = avail[order[pos]];
        remaining -= avail[order[pos]];
    }
    if (m == 0) return out;

    // Unsaturated entries all sit above the level, so floor(level) + 1 never exceeds availability.
    std::vector<std::size_t> unsaturated(order.begin() + static_cast<std::ptrdiff_t>(pos), order.end());
    std::sort(unsaturated.begin(), unsaturated.end());
    const std::uint64_t level = remaining / m;
    std::uint64_t leftover = remaining % m;
    for (std::size_t idx : unsaturated) {
        out[idx] = level + (leftover > 0 ? 1 : 0);
        if (leftover > 0) --leftover;
    }
    return out;
}

std::vector<std::uint64_t> largest_remainder(std::span<const long double> targets, std::uint64_t total,
                                             std::span<const std::uint64_t> caps) {
    const std::size_t n = targets.size();
    std::vector<std::uint64_t> out(n);
    std::vector<long double> frac(n);
    std::uint64_t assigned = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const long double t = std::max<long double>(0.0L, targets[i]);
        out[i] = std::min<std::uint64_t>(static_cast<std::uint64_t>(std::floor(t)), caps[i]);
        frac[i] = t - static_cast<long double>(out[i]);
        assigned += out[i];
    }
    if (assigned > total) throw std::logic_error("largest_remainder: floors exceed total");
    std::uint64_t leftover = total - assigned;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return frac[x] > frac[y]; });
    for (std::size_t idx : order) {
        if (leftover == 0) break;
        if (out[idx] < caps[idx]) {
            ++out[idx];
            --leftover;
        }
    }
    return out;
}

MixturePlan stage1_allocation(const CorpusStats& stats, std::uint64_t budget) {
    stats.validate();
    if (budget == 0) throw validation_error("budget must be positive");
    if (stats.total() == 0) throw validation_error("all availabilities are zero");

    const auto totals = stats.language_totals();
    std::vector<std::string> langs;
    std::vector<std::uint64_t> avail;
    for (const auto& [lang, n] : totals) {
        langs.push_back(lang);
        avail.push_back(n);
    }
    const auto per_lang = water_fill_integer(avail, budget);

    MixturePlan plan;
    plan.stage = 1;
    plan.budget = budget;
    for (std::size_t i = 0; i < langs.size(); ++i) {
        std::vector<CellKey> keys;
        std::vector<long double> targets;
        std::vector<std::uint64_t> caps;
        for (const auto& [key, n] : stats.available) {
            if (key.first != langs[i]) continue;
            keys.push_back(key);
            caps.push_back(n);
            targets.push_back(avail[i] ? static_cast<long double>(per_lang[i]) * n / avail[i] : 0.0L);
        }
        const auto split = largest_remainder(targets, per_lang[i], caps);
        for (std::size_t c = 0; c < keys.size(); ++c) plan.allocations[keys[c]] = split[c];
    }
    return plan;
}

MixturePlan stage2_allocation(const CorpusStats& stats, std::uint64_t budget, double low_boost,
                              double textbook_boost) {
    if (!std::isfinite(low_boost) || !std::isfinite(textbook_boost))
        throw validation_error("boosts must be finite");
    if (low_boost < 1.0 || textbook_boost < 1.0) throw validation_error("boosts must be >= 1");

    const MixturePlan base = stage1_allocation(stats, budget);
    const std::uint64_t total = base.total();

    std::vector<CellKey> keys;
    std::vector<long double> weight;
    std::vector<std::uint64_t> caps;
    for (const auto& [key, share] : base.allocations) {
        long double w = share;
        if (key.first != "und") {
            if (!is_registered_language(key.first))
                throw validation_error("unknown language '" + key.first + "' cannot be classified");
            if (classify_resource(key.first) == ResourceClass::Low) w *= low_boost;
        }
        if (key.second == "textbook") w *= textbook_boost;
        keys.push_back(key);
        weight.push_back(w);
        caps.push_back(stats.available.at(key));
    }

    // Cap at availability and redistribute the excess until no free cell overflows.
    const std::size_t n = keys.size();
    std::vector<bool> capped(n, false);
    std::vector<long double> target(n, 0.0L);
    for (;;) {
        long double mass = total, free_weight = 0.0L;
        for (std::size_t i = 0; i < n; ++i) {
            if (capped[i]) mass -= caps[i];
            else free_weight += weight[i];
        }
        for (std::size_t i = 0; i < n; ++i)
            target[i] = capped[i] ? caps[i] : (free_weight > 0 ? weight[i] * (mass / free_weight) : 0.0L);
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i)
            if (!capped[i] && target[i] > caps[i]) {
                capped[i] = true;
                changed = true;
            }
        if (!changed) break;
    }

    const auto rounded = largest_remainder(target, total, caps);
    MixturePlan plan;
    plan.stage = 2;
    plan.budget = budget;
    plan.low_boost = low_boost;
    plan.textbook_boost = textbook_boost;
    for (std::size_t i = 0; i < n; ++i) plan.allocations[keys[i]] = rounded[i];
    return plan;
}

std::uint64_t parse_budget(std::string_view text) {
    const std::string original(text);
    if (text.empty()) throw validation_error("empty budget");
    std::uint64_t multiplier = 1;
    switch (std::toupper(static_cast<unsigned char>(text.back()))) {
        case 'K': multiplier = 1'000; break;
        case 'M': multiplier = 1'000'000; break;
        case 'B': multiplier = 1'000'000'000; break;
        default: break;
    }
    if (multiplier != 1) text.remove_suffix(1);

    // Exact decimal arithmetic: integer part and fractional digits separately.
    auto dot = text.find('.');
    std::string_view whole = text.substr(0, dot), fraction = dot == std::string_view::npos ? "" : text.substr(dot + 1);
    auto all_digits = [](std::string_view s) {
        return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
    };
    if ((whole.empty() && fraction.empty()) || !all_digits(whole) || !all_digits(fraction) || whole.size() > 18 ||
        fraction.size() > 9)
        throw validation_error("malformed budget '" + original + "'");

    unsigned __int128 value = 0;
    for (char c : whole) value = value * 10 + static_cast<unsigned>(c - '0');
    value *= multiplier;
    std::uint64_t scale = 1;
    unsigned __int128 frac_value = 0;
    for (char c : fraction) {
        frac_value = frac_value * 10 + static_cast<unsigned>(c - '0');
        scale *= 10;
    }
    frac_value *= multiplier;
    if (frac_value % scale != 0) throw validation_error("budget '" + original + "' is not a whole number of units");
    value += frac_value / scale;
    if (value == 0) throw validation_error("budget must be positive");
    if (value > std::numeric_limits<std::uint64_t>::max()) throw validation_error("budget too large");
    return static_cast<std::uint64_t>(value);
}

json manifest_to_json(const SampleManifest& m) {
    json cells = json::array();
    for (const auto& c : m.cells)
        cells.push_back({{"lang", c.lang},
                         {"category", c.category},
                         {"allocation", c.allocation},
                         {"tokens", c.tokens},
                         {"ids", c.ids}});
    return {{"seed", m.seed}, {"cells", cells}};
}

SampleManifest sample_manifest(const MixturePlan& plan, std::span<const Document> index, std::uint64_t seed) {
    struct Candidate {
        std::uint64_t key;
        const Document* doc;
    };
    std::map<CellKey, std::vector<const Document*>> by_cell;
    for (const auto& d : index) by_cell[{d.lang, source_category(d.source)}].push_back(&d);

    SampleManifest manifest;
    manifest.seed = seed;
    for (const auto& [key, alloc] : plan.allocations) {
        manifest.cells.push_back({key.first, key.second, alloc, 0, {}});
        if (alloc > 0 && !by_cell.contains(key))
            throw validation_error("index has no documents for plan cell " + key.first + "/" + key.second);
    }

    std::vector<std::string> errors(manifest.cells.size());
    const auto n = static_cast<std::int64_t>(manifest.cells.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t i = 0; i < n; ++i) {
        ManifestCell& cell = manifest.cells[i];
        if (cell.allocation == 0) continue;
        const std::uint64_t cell_seed = mix64(seed ^ hash64(cell.lang + "/" + cell.category));
        std::vector<Candidate> candidates;
        for (const Document* d : by_cell.at({cell.lang, cell.category}))
            candidates.push_back({mix64(cell_seed ^ hash64(d->id)), d});
        std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
            return a.key != b.key ? a.key < b.key : a.doc->id < b.doc->id;
        });
        for (const auto& c : candidates) {
            if (cell.tokens >= cell.allocation) break;
            cell.ids.push_back(c.doc->id);
            cell.tokens += static_cast<std::uint64_t>(document_tokens(*c.doc));
        }
        if (cell.tokens < cell.allocation)
            errors[i] = "index holds " + std::to_string(cell.tokens) + " tokens for " + cell.lang + "/" +
                        cell.category + ", plan needs " + std::to_string(cell.allocation);
    }
    for (const auto& e : errors)
        if (!e.empty()) throw validation_error(e);
    return manifest;
}

}  // namespace babelkit
