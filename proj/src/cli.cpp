#include "babelkit/cli.hpp"

#include "babelkit/ablation.hpp"
#include "babelkit/checkpoint.hpp"
#include "babelkit/corpus.hpp"
#include "babelkit/dedup.hpp"
#include "babelkit/error.hpp"
#include "babelkit/filter.hpp"
#include "babelkit/mixture.hpp"
#include "babelkit/parallel.hpp"
#include "babelkit/reference_model.hpp"
#include "babelkit/registry.hpp"
#include "babelkit/run_manifest.hpp"
#include "babelkit/surgery.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>

namespace babelkit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;
constexpr int kExitVerification = 3;

std::string with_suffix(const std::string& path, const std::string& suffix) {
    fs::path p(path);
    return (p.parent_path() / (p.stem().string() + suffix)).string();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open " + path + " for writing");
    out << text;
    if (!out) throw io_error("write failed for " + path);
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw validation_error("malformed JSON in " + path + ": " + e.what());
    }
}

std::vector<Document> read_documents(const std::string& path, bool strict, RunManifest& manifest) {
    auto result = read_corpus_file(path, strict);
    for (const auto& m : result.malformed)
        std::cerr << path << ":" << m.line_number << ": skipped malformed line: " << m.message << "\n";
    manifest.counters["malformed_lines"] = result.malformed.size();
    manifest.counters["input_documents"] = result.documents.size();
    return std::move(result.documents);
}

std::vector<TokenSequence> load_prompts(const std::string& path, int vocab, std::size_t count, std::size_t length,
                                        std::uint64_t seed) {
    if (path.empty()) return random_prompts(vocab, count, length, seed);
    try {
        return read_json(path).get<std::vector<TokenSequence>>();
    } catch (const json::exception& e) {
        throw validation_error("prompts must be a JSON list of token-id lists: " + std::string(e.what()));
    }
}

class Timer {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// ---- extend ------------------------------------------------------------------

struct ExtendArgs {
    std::string checkpoint, out, record, plan_file;
    std::vector<int> positions;
    int auto_k = 0;
    int append = 0;
    std::string init = "noise";
    double noise_mean = 1e-4;
    std::uint64_t seed = 0;
};

int cmd_extend(const ExtendArgs& a) {
    Timer timer;
    const int sources = (!a.positions.empty()) + (a.auto_k > 0) + (a.append > 0) + (!a.plan_file.empty());
    if (sources != 1) throw validation_error("give exactly one of --positions, --auto-k, --append, --plan");

    const Checkpoint ckpt = load_checkpoint(a.checkpoint);
    ExtensionPlan plan;
    if (!a.plan_file.empty()) {
        try {
            plan = read_json(a.plan_file).get<ExtensionPlan>();
        } catch (const json::exception& e) {
            throw validation_error("malformed plan file: " + std::string(e.what()));
        }
    } else {
        if (a.auto_k > 0) plan = plan_extension(ckpt.config, a.auto_k);
        else if (a.append > 0) {
            plan.strategy = InsertStrategy::AfterModel;
            plan.count = a.append;
        } else {
            plan.positions = a.positions;
        }
        if (a.init == "duplicate") plan.init = InitMethod::duplicate();
        else if (a.init == "zeros") plan.init = InitMethod::zeros();
        else plan.init = InitMethod::noise(a.noise_mean);
        plan.seed = a.seed;
    }

    const auto result = apply_extension(ckpt, plan);
    save_checkpoint(result.checkpoint, a.out);
    const std::string record_path = a.record.empty() ? with_suffix(a.out, ".surgery.json") : a.record;
    write_json(record_path, record_to_json(result.record));

    RunManifest m;
    m.subcommand = "extend";
    m.parameters = {{"plan", plan}};
    m.inputs = {a.checkpoint};
    m.outputs = {a.out, config_path_for(a.out).string(), record_path};
    m.seed = plan.seed;
    m.threads = configured_threads();
    m.counters = {{"old_num_layers", result.record.old_num_layers},
                  {"new_num_layers", result.record.new_num_layers},
                  {"parameters_before", count_parameters(ckpt.config)},
                  {"parameters_after", count_parameters(result.checkpoint.config)}};
    m.wall_seconds = timer.seconds();
    write_run_manifest(m, a.out);
    return kExitOk;
}

// ---- verify ------------------------------------------------------------------

struct VerifyArgs {
    std::string base, extended, mode = "deviation", prompts, out;
    std::size_t num_prompts = 10, prompt_len = 8;
    std::uint64_t seed = 0;
    int k = 0;
    std::vector<double> means{0.01, 0.0001};
    int seeds = 20;
    bool pretty = false;
};

void print_deviation_table(const DeviationStats& s) {
    std::cout << std::left << std::setw(8) << "prompt" << std::setw(16) << "mean_abs" << "max_abs\n";
    for (std::size_t i = 0; i < s.per_prompt.size(); ++i)
        std::cout << std::setw(8) << i << std::setw(16) << s.per_prompt[i].mean_abs << s.per_prompt[i].max_abs << "\n";
    std::cout << std::setw(8) << "all" << std::setw(16) << s.mean_abs << s.max_abs << "\n";
}

void print_grid_table(const AblationReport& r) {
    std::cout << std::left << std::setw(14) << "strategy" << std::setw(44) << "init" << std::setw(16) << "mean_abs"
              << "max_abs\n";
    for (const auto& c : r.cells)
        std::cout << std::setw(14) << (c.strategy == InsertStrategy::AmongLayers ? "among_layers" : "after_model")
                  << std::setw(44) << c.init.describe() << std::setw(16) << c.mean_abs << c.max_abs << "\n";
}

int cmd_verify(const VerifyArgs& a) {
    Timer timer;
    const Checkpoint base = load_checkpoint(a.base);
    const auto prompts = load_prompts(a.prompts, base.config.vocab_size, a.num_prompts, a.prompt_len, a.seed);

    json output;
    int code = kExitOk;
    if (a.mode == "grid") {
        const int k = a.k > 0 ? a.k : base.config.num_layers / 4;
        std::vector<std::uint64_t> seeds(static_cast<std::size_t>(a.seeds));
        std::iota(seeds.begin(), seeds.end(), a.seed);
        const auto report = ablation_grid(base, k, a.means, seeds, prompts);
        output = ablation_to_json(report);
        if (a.pretty) print_grid_table(report);
    } else {
        if (a.extended.empty()) throw validation_error("--extended is required for mode " + a.mode);
        const Checkpoint extended = load_checkpoint(a.extended);
        const auto stats = compare_outputs(base, extended, prompts);
        output = deviation_to_json(stats);
        output["mode"] = a.mode;
        if (a.mode == "identity") {
            output["identical"] = stats.max_abs == 0.0;
            if (stats.max_abs != 0.0) code = kExitVerification;
        }
        if (a.pretty) print_deviation_table(stats);
    }

    if (!a.out.empty()) {
        write_json(a.out, output);
        RunManifest m;
        m.subcommand = "verify";
        m.parameters = {{"mode", a.mode}, {"num_prompts", prompts.size()}, {"k", a.k}, {"means", a.means},
                        {"seeds", a.seeds}, {"prompts_file", a.prompts}};
        m.inputs = {a.base};
        if (!a.extended.empty()) m.inputs.push_back(a.extended);
        m.outputs = {a.out};
        m.seed = a.seed;
        m.threads = configured_threads();
        m.wall_seconds = timer.seconds();
        write_run_manifest(m, a.out);
    } else if (!a.pretty) {
        std::cout << output.dump(2) << "\n";
    }
    if (code == kExitVerification) std::cerr << "verify: nonzero deviation (max_abs " << output["max_abs"] << ")\n";
    return code;
}

// ---- clean -------------------------------------------------------------------

struct CleanArgs {
    std::string in, out, rejects, scores;
    std::size_t min_chars = 100;
    double max_digit_ratio = 0.3;
    std::optional<double> score_threshold;
    bool strict = false;
};

int cmd_clean(const CleanArgs& a) {
    Timer timer;
    RunManifest m;
    m.subcommand = "clean";
    const auto docs = read_documents(a.in, a.strict, m);

    ScoreTable sidecar;
    CleanOptions options;
    options.rules = {a.min_chars, a.max_digit_ratio};
    options.score_threshold = a.score_threshold;
    if (!a.scores.empty()) {
        if (!a.score_threshold) throw validation_error("--scores requires --score-threshold");
        std::ifstream in(a.scores);
        if (!in) throw io_error("cannot open " + a.scores);
        sidecar = read_score_sidecar(in);
        options.sidecar = &sidecar;
    }
    const auto outcome = clean_corpus(docs, options);

    std::ostringstream kept, rejected;
    write_jsonl(kept, outcome.kept);
    write_rejections(rejected, outcome.rejected);
    const std::string rejects_path = a.rejects.empty() ? a.out + ".rejects.jsonl" : a.rejects;
    write_text(a.out, kept.str());
    write_text(rejects_path, rejected.str());

    m.parameters = {{"min_chars", a.min_chars},
                    {"max_digit_ratio", a.max_digit_ratio},
                    {"score_threshold", a.score_threshold ? json(*a.score_threshold) : json(nullptr)},
                    {"scores", a.scores},
                    {"strict", a.strict}};
    m.inputs = {a.in};
    if (!a.scores.empty()) m.inputs.push_back(a.scores);
    m.outputs = {a.out, rejects_path};
    m.threads = configured_threads();
    for (const auto& [reason, n] : outcome.counts) m.counters[reason] = n;
    m.wall_seconds = timer.seconds();
    write_run_manifest(m, a.out);
    return kExitOk;
}

// ---- dedup -------------------------------------------------------------------

struct DedupArgs {
    std::string in, out, report, pairs;
    MinHashParams params;
    bool strict = false;
};

int cmd_dedup(const DedupArgs& a) {
    Timer timer;
    RunManifest m;
    m.subcommand = "dedup";
    const auto docs = read_documents(a.in, a.strict, m);
    const auto result = dedup(docs, a.params);

    std::ostringstream kept;
    write_jsonl(kept, result.kept);
    write_text(a.out, kept.str());
    const std::string report_path = a.report.empty() ? a.out + ".report.json" : a.report;
    write_json(report_path, report_to_json(result.report));
    m.outputs = {a.out, report_path};
    if (!a.pairs.empty()) {
        std::ostringstream tsv;
        write_pairs_tsv(tsv, result.report.candidate_pairs);
        write_text(a.pairs, tsv.str());
        m.outputs.push_back(a.pairs);
    }

    m.parameters = a.params;
    m.parameters["strict"] = a.strict;
    m.inputs = {a.in};
    m.seed = a.params.seed;
    m.threads = configured_threads();
    m.counters["kept"] = result.report.kept.size();
    m.counters["removed"] = result.report.removed.size();
    m.counters["exact_groups"] = result.report.exact_groups.size();
    m.counters["candidate_pairs"] = result.report.candidate_pairs.size();
    m.counters["clusters"] = result.report.clusters.size();
    m.wall_seconds = timer.seconds();
    write_run_manifest(m, a.out);
    return kExitOk;
}

// ---- mix / stats / registry / toy ----------------------------------------------

struct MixArgs {
    std::string stats, corpus, out, index, manifest, budget;
    int stage = 1;
    double low_boost = 2.0, textbook_boost = 2.0;
    std::uint64_t seed = 0;
    bool strict = false, pretty = false;
};

int cmd_mix(const MixArgs& a) {
    Timer timer;
    RunManifest m;
    m.subcommand = "mix";
    if (a.stats.empty() == a.corpus.empty()) throw validation_error("give exactly one of --stats or --corpus");

    std::vector<Document> index_docs;
    CorpusStats stats;
    if (!a.stats.empty()) {
        stats = stats_from_json(read_json(a.stats));
    } else {
        index_docs = read_documents(a.corpus, a.strict, m);
        stats = corpus_stats(index_docs);
    }
    const std::uint64_t budget = parse_budget(a.budget);
    MixturePlan plan;
    if (a.stage == 1) plan = stage1_allocation(stats, budget);
    else if (a.stage == 2) plan = stage2_allocation(stats, budget, a.low_boost, a.textbook_boost);
    else throw validation_error("--stage must be 1 or 2");

    write_json(a.out, plan_to_json(plan));
    m.outputs = {a.out};
    m.inputs = {a.stats.empty() ? a.corpus : a.stats};

    if (!a.manifest.empty()) {
        if (!a.index.empty()) {
            RunManifest scratch;
            index_docs = read_documents(a.index, a.strict, scratch);
            m.inputs.push_back(a.index);
        } else if (a.corpus.empty()) {
            throw validation_error("--manifest needs --index or --corpus");
        }
        write_json(a.manifest, manifest_to_json(sample_manifest(plan, index_docs, a.seed)));
        m.outputs.push_back(a.manifest);
    }

    if (a.pretty) {
        std::cout << std::left << std::setw(8) << "lang" << std::setw(12) << "category" << "tokens\n";
        for (const auto& [key, n] : plan.allocations)
            std::cout << std::setw(8) << key.first << std::setw(12) << key.second << n << "\n";
        std::cout << "total " << plan.total() << " of budget " << plan.budget << "\n";
    }

    m.parameters = {{"stage", a.stage}, {"budget", budget}, {"budget_arg", a.budget}, {"unit", stats.unit}};
    if (a.stage == 2) {
        m.parameters["low_boost"] = a.low_boost;
        m.parameters["textbook_boost"] = a.textbook_boost;
    }
    m.seed = a.seed;
    m.threads = configured_threads();
    m.counters["allocated"] = plan.total();
    m.wall_seconds = timer.seconds();
    write_run_manifest(m, a.out);
    return kExitOk;
}

struct StatsArgs {
    std::string in, out;
    bool strict = false;
};

int cmd_stats(const StatsArgs& a) {
    Timer timer;
    RunManifest m;
    m.subcommand = "stats";
    const auto docs = read_documents(a.in, a.strict, m);
    write_json(a.out, stats_to_json(corpus_stats(docs)));
    m.parameters = {{"strict", a.strict}};
    m.inputs = {a.in};
    m.outputs = {a.out};
    m.threads = configured_threads();
    m.wall_seconds = timer.seconds();
    write_run_manifest(m, a.out);
    return kExitOk;
}

struct ToyArgs {
    std::string out, dtype = "F32";
    ModelConfig config{8, 32, 4, 2, 64, 64, 1e-6, 10000.0};
    std::uint64_t seed = 0;
};

int cmd_toy(const ToyArgs& a) {
    save_checkpoint(make_toy_checkpoint(a.config, a.seed, parse_dtype(a.dtype)), a.out);
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    apply_thread_config();

    CLI::App app{"babelkit: layer-extension surgery and multilingual corpus curation"};
    app.require_subcommand(1);
    std::function<int()> action;

    ExtendArgs ext;
    auto* extend = app.add_subcommand("extend", "insert layers into a checkpoint");
    extend->add_option("--checkpoint", ext.checkpoint, "input checkpoint (.safetensors)")->required();
    extend->add_option("--out", ext.out, "output checkpoint")->required();
    extend->add_option("--record", ext.record, "surgery record JSON (default <out>.surgery.json)");
    extend->add_option("--positions", ext.positions, "original layer indices to duplicate")->delimiter(',');
    extend->add_option("--auto-k", ext.auto_k, "insert k layers at stride 2 in the second half");
    extend->add_option("--append", ext.append, "append N copies of the last layer");
    extend->add_option("--plan", ext.plan_file, "JSON extension plan");
    extend->add_option("--init", ext.init, "duplicate | noise | zeros")
        ->check(CLI::IsMember({"duplicate", "noise", "zeros"}))
        ->capture_default_str();
    extend->add_option("--noise-mean", ext.noise_mean, "Gaussian noise mean (std equals mean)")->capture_default_str();
    extend->add_option("--seed", ext.seed)->capture_default_str();
    extend->callback([&] { action = [&] { return cmd_extend(ext); }; });

    VerifyArgs ver;
    auto* verify = app.add_subcommand("verify", "compare base and extended checkpoints");
    verify->add_option("--base", ver.base)->required();
    verify->add_option("--extended", ver.extended);
    verify->add_option("--mode", ver.mode)->check(CLI::IsMember({"identity", "deviation", "grid"}))->capture_default_str();
    verify->add_option("--prompts", ver.prompts, "JSON list of token-id lists");
    verify->add_option("--num-prompts", ver.num_prompts)->capture_default_str();
    verify->add_option("--prompt-len", ver.prompt_len)->capture_default_str();
    verify->add_option("--seed", ver.seed)->capture_default_str();
    verify->add_option("--k", ver.k, "layers to insert in grid mode (default num_layers/4)");
    verify->add_option("--means", ver.means)->delimiter(',')->capture_default_str();
    verify->add_option("--seeds", ver.seeds, "number of noise seeds in grid mode")->capture_default_str();
    verify->add_option("--out", ver.out, "write JSON here instead of stdout");
    verify->add_flag("--pretty", ver.pretty);
    verify->callback([&] { action = [&] { return cmd_verify(ver); }; });

    CleanArgs cl;
    auto* clean = app.add_subcommand("clean", "rule-based filtering and score gating");
    clean->add_option("--in", cl.in)->required();
    clean->add_option("--out", cl.out)->required();
    clean->add_option("--rejects", cl.rejects, "rejection log (default <out>.rejects.jsonl)");
    clean->add_option("--min-chars", cl.min_chars)->capture_default_str();
    clean->add_option("--max-digit-ratio", cl.max_digit_ratio)->capture_default_str();
    clean->add_option("--scores", cl.scores, "JSONL sidecar of {id, score}");
    clean->add_option("--score-threshold", cl.score_threshold);
    clean->add_flag("--strict", cl.strict, "abort on the first malformed line");
    clean->callback([&] { action = [&] { return cmd_clean(cl); }; });

    DedupArgs dd;
    auto* dedup_cmd = app.add_subcommand("dedup", "exact and near-duplicate removal");
    dedup_cmd->add_option("--in", dd.in)->required();
    dedup_cmd->add_option("--out", dd.out)->required();
    dedup_cmd->add_option("--report", dd.report, "report JSON (default <out>.report.json)");
    dedup_cmd->add_option("--pairs", dd.pairs, "candidate pairs TSV");
    dedup_cmd->add_option("--seed", dd.params.seed)->capture_default_str();
    dedup_cmd->add_option("--shingle", dd.params.shingle_k)->capture_default_str();
    dedup_cmd->add_option("--num-perm", dd.params.num_perm)->capture_default_str();
    dedup_cmd->add_option("--bands", dd.params.bands)->capture_default_str();
    dedup_cmd->add_option("--rows", dd.params.rows)->capture_default_str();
    dedup_cmd->add_option("--threshold", dd.params.jaccard_threshold)->capture_default_str();
    dedup_cmd->add_flag("--strict", dd.strict);
    dedup_cmd->callback([&] { action = [&] { return cmd_dedup(dd); }; });

    MixArgs mx;
    auto* mix = app.add_subcommand("mix", "plan a language/category token mixture");
    mix->add_option("--stats", mx.stats, "CorpusStats JSON");
    mix->add_option("--corpus", mx.corpus, "corpus JSONL (stats computed from it)");
    mix->add_option("--out", mx.out, "plan JSON")->required();
    mix->add_option("--stage", mx.stage)->capture_default_str();
    mix->add_option("--budget", mx.budget, "token budget, e.g. 500M or 10B")->required();
    mix->add_option("--low-boost", mx.low_boost)->capture_default_str();
    mix->add_option("--textbook-boost", mx.textbook_boost)->capture_default_str();
    mix->add_option("--index", mx.index, "corpus JSONL to sample the manifest from");
    mix->add_option("--manifest", mx.manifest, "sampled document manifest JSON");
    mix->add_option("--seed", mx.seed)->capture_default_str();
    mix->add_flag("--strict", mx.strict);
    mix->add_flag("--pretty", mx.pretty);
    mix->callback([&] { action = [&] { return cmd_mix(mx); }; });

    StatsArgs st;
    auto* stats = app.add_subcommand("stats", "per-language, per-category token availability");
    stats->add_option("--in", st.in)->required();
    stats->add_option("--out", st.out)->required();
    stats->add_flag("--strict", st.strict);
    stats->callback([&] { action = [&] { return cmd_stats(st); }; });

    std::string registry_out;
    auto* registry = app.add_subcommand("registry", "export the language registry");
    registry->add_option("--out", registry_out);
    registry->callback([&] {
        action = [&] {
            if (registry_out.empty()) std::cout << registry_to_json().dump(2) << "\n";
            else write_json(registry_out, registry_to_json());
            return kExitOk;
        };
    });

    ToyArgs toy;
    auto* toy_cmd = app.add_subcommand("toy", "write a seeded toy checkpoint");
    toy_cmd->add_option("--out", toy.out)->required();
    toy_cmd->add_option("--layers", toy.config.num_layers)->capture_default_str();
    toy_cmd->add_option("--hidden", toy.config.hidden_size)->capture_default_str();
    toy_cmd->add_option("--heads", toy.config.num_attention_heads)->capture_default_str();
    toy_cmd->add_option("--kv-heads", toy.config.num_kv_heads)->capture_default_str();
    toy_cmd->add_option("--intermediate", toy.config.intermediate_size)->capture_default_str();
    toy_cmd->add_option("--vocab", toy.config.vocab_size)->capture_default_str();
    toy_cmd->add_option("--dtype", toy.dtype)->check(CLI::IsMember({"F32", "F16", "BF16"}))->capture_default_str();
    toy_cmd->add_option("--seed", toy.seed)->capture_default_str();
    toy_cmd->callback([&] { action = [&] { return cmd_toy(toy); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        return action ? action() : kExitValidation;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case ErrorKind::Io: return kExitIo;
            case ErrorKind::Validation: return kExitValidation;
            case ErrorKind::Verification: return kExitVerification;
        }
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitValidation;
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace babelkit
