#include "litmine/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "litmine/analysis.hpp"
#include "litmine/digest.hpp"
#include "litmine/errors.hpp"
#include "litmine/extraction.hpp"
#include "litmine/judge.hpp"
#include "litmine/probe_loop.hpp"
#include "litmine/text.hpp"

namespace litmine {

namespace {

constexpr std::string_view kModule = "pipeline";
namespace fs = std::filesystem;
using nlohmann::json;

std::string read_text(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError(kModule, "cannot read " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const fs::path& path)
{
    try {
        return json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw DataError(kModule, fmt::format("{}: {}", path.string(), e.what()));
    }
}

std::vector<json> read_jsonl(const fs::path& path)
{
    std::vector<json> out;
    std::istringstream in(read_text(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            out.push_back(json::parse(line));
        } catch (const json::exception& e) {
            throw DataError(kModule, fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
        }
    }
    return out;
}

std::string jsonl(const std::vector<json>& rows)
{
    std::string out;
    for (const auto& r : rows) {
        out += r.dump();
        out += '\n';
    }
    return out;
}

std::string pretty(const json& j)
{
    return j.dump(2) + "\n";
}

std::vector<ExtractionRecord> read_records(const fs::path& path)
{
    std::vector<ExtractionRecord> out;
    for (const auto& j : read_jsonl(path)) {
        out.push_back(ExtractionRecord::from_json(j));
    }
    return out;
}

std::vector<json> record_rows(std::span<const ExtractionRecord> records)
{
    std::vector<json> rows;
    rows.reserve(records.size());
    for (const auto& r : records) {
        rows.push_back(r.to_json());
    }
    return rows;
}

std::vector<json> audit_rows(const AuditLog& audit)
{
    std::vector<json> rows;
    for (const auto& e : audit.to_json()) {
        rows.push_back(e);
    }
    return rows;
}

std::string csv_field(std::string_view s)
{
    if (s.find_first_of(",\"\n") == std::string_view::npos) {
        return std::string(s);
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + "\"";
}

std::string safe_file_part(std::string_view s)
{
    std::string out;
    for (char c : s) {
        out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_';
    }
    return out;
}

} // namespace

std::string_view to_string(Stage stage)
{
    switch (stage) {
    case Stage::Ingest: return "ingest";
    case Stage::Index: return "index";
    case Stage::ProbeLoop: return "probe_loop";
    case Stage::Extract: return "extract";
    case Stage::Judge: return "judge";
    case Stage::Analyze: return "analyze";
    }
    return "?";
}

Stage parse_stage(std::string_view name)
{
    std::string n(name);
    for (auto& c : n) {
        if (c == '-') {
            c = '_';
        }
    }
    for (auto s : kStages) {
        if (to_string(s) == n) {
            return s;
        }
    }
    throw ConfigError(kModule, "unknown stage '" + std::string(name) + "'");
}

void write_file_atomic(const fs::path& path, std::string_view content)
{
    fs::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw DataError(kModule, "cannot write " + tmp.string());
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            throw DataError(kModule, "short write to " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

json directory_manifest(const fs::path& dir)
{
    std::vector<std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) {
            continue;
        }
        auto rel = fs::relative(entry.path(), dir).generic_string();
        if (rel == "manifest.json" || rel.ends_with(".tmp")) {
            continue;
        }
        files.push_back(rel);
    }
    std::sort(files.begin(), files.end());
    json out = json::array();
    for (const auto& rel : files) {
        out.push_back({{"path", rel}, {"sha256", sha256_file(dir / rel)}, {"bytes", fs::file_size(dir / rel)}});
    }
    return out;
}

std::unique_ptr<Workspace> load_workspace(const RunConfig& config, std::size_t workers)
{
    auto corpus = Corpus::load(config.corpus, config.windowing);
    ResolverRegistry resolvers;
    for (const auto& [name, path] : config.resolvers) {
        resolvers.add(DictionaryResolver::load(name, path));
    }
    auto tags = TagStore::load(config.tags, corpus, resolvers);
    auto index = EntityIndex::build(tags, resolvers);
    std::unique_ptr<Embedder> embedder;
    if (config.embedder == EmbedderKind::Hashing) {
        embedder = std::make_unique<HashingEmbedder>(config.embedding_dim);
    } else {
        embedder = std::make_unique<HttpEmbedder>(config.embedder_url, config.embedding_dim, config.retry);
    }
    auto table = EmbeddingTable::build(corpus, *embedder, workers);
    return std::unique_ptr<Workspace>(new Workspace{std::move(corpus), std::move(resolvers), std::move(tags),
                                                    std::move(index), std::move(embedder), std::move(table)});
}

Pipeline::Pipeline(RunConfig config, PipelineOptions options)
    : config_(std::move(config)), options_(std::move(options))
{
    run_dir_ = options_.run_dir ? fs::absolute(*options_.run_dir).lexically_normal() : config_.output_dir;
    if (options_.workers == 0) {
        options_.workers = std::max(1u, std::thread::hardware_concurrency());
    }
}

Pipeline::~Pipeline() = default;
Pipeline::Pipeline(Pipeline&&) noexcept = default;
Pipeline& Pipeline::operator=(Pipeline&&) noexcept = default;

Workspace& Pipeline::workspace()
{
    if (!workspace_) {
        workspace_ = load_workspace(config_, options_.workers);
    }
    return *workspace_;
}

Oracle& Pipeline::oracle()
{
    if (!oracle_) {
        if (!config_.oracle_url.empty()) {
            oracle_ = std::make_unique<HttpOracle>(config_.oracle_url, options_.oracle_token, config_.retry);
        } else {
            oracle_ = std::make_unique<ScriptedOracle>(ScriptedOracle::load(*config_.script));
        }
    }
    return *oracle_;
}

bool Pipeline::stage_done(Stage stage) const
{
    return fs::exists(stage_dir(stage) / std::string(kStageMarker));
}

void Pipeline::finish_stage(Stage stage)
{
    write_file_atomic(stage_dir(stage) / std::string(kStageMarker), "complete\n");
    write_file_atomic(run_dir_ / "manifest.json", pretty({{"files", directory_manifest(run_dir_)}}));
    spdlog::info("{}: stage {} complete", kModule, to_string(stage));
}

void Pipeline::run_stage(Stage stage, const std::optional<std::string>& task)
{
    for (auto s : kStages) {
        if (s == stage) {
            break;
        }
        if (!stage_done(s)) {
            throw DataError(kModule, fmt::format("stage {} needs {} to be complete in {}", to_string(stage),
                                                 to_string(s), run_dir_.string()));
        }
    }
    auto dir = stage_dir(stage);
    if (fs::exists(dir)) {
        fs::remove_all(dir);
    }
    fs::create_directories(dir);
    switch (stage) {
    case Stage::Ingest: do_ingest(); break;
    case Stage::Index: do_index(); break;
    case Stage::ProbeLoop:
        if (!task || task->empty()) {
            throw ConfigError(kModule, "the probe loop needs a task description");
        }
        do_probe_loop(*task);
        break;
    case Stage::Extract: do_extract(); break;
    case Stage::Judge: do_judge(); break;
    case Stage::Analyze: do_analyze(); break;
    }
    finish_stage(stage);
}

void Pipeline::run(const std::optional<std::string>& task, std::optional<Stage> stop_after)
{
    if (task && stage_done(Stage::ProbeLoop)) {
        auto stored = read_text(stage_dir(Stage::ProbeLoop) / "task.txt");
        if (stored != *task) {
            throw ConfigError(kModule, "run directory " + run_dir_.string() + " was started with a different task");
        }
    }
    for (auto s : kStages) {
        if (stage_done(s)) {
            spdlog::info("{}: stage {} already complete", kModule, to_string(s));
        } else {
            run_stage(s, task);
        }
        if (stop_after && *stop_after == s) {
            return;
        }
    }
}

void Pipeline::query(const FilterSpec& spec, std::size_t top_k, std::ostream& out)
{
    auto& ws = workspace();
    auto ctx = ws.search();
    auto filtered = evaluate_filter(spec, ws.index);
    for (const auto& w : filtered.warnings) {
        spdlog::warn("{}: {}", kModule, w);
    }
    auto hits = rank_windows(filtered.windows, ws.embedder->embed(spec.semantic_query), "query", ctx, top_k);
    for (const auto& h : hits) {
        const auto& win = ws.corpus.window(h.ordinal);
        out << json{{"window_id", h.window_id}, {"doc_id", win.doc_id}, {"score", h.score}}.dump() << '\n';
    }
}

void Pipeline::do_ingest()
{
    auto corpus = Corpus::load(config_.corpus, config_.windowing);
    std::vector<json> rows;
    rows.reserve(corpus.window_count());
    for (const auto& w : corpus.windows()) {
        rows.push_back({{"window_id", w.window_id}, {"doc_id", w.doc_id}, {"start_para", w.start_para},
                        {"para_count", w.para_count}});
    }
    auto dir = stage_dir(Stage::Ingest);
    write_file_atomic(dir / "windows.jsonl", jsonl(rows));
    write_file_atomic(dir / "manifest.json",
                      pretty({{"documents", corpus.documents().size()},
                              {"windows", corpus.window_count()},
                              {"window_size", corpus.windowing().size},
                              {"window_stride", corpus.windowing().stride},
                              {"corpus_sha256", sha256_file(config_.corpus)},
                              {"windows_sha256", sha256_hex(jsonl(rows))}}));
}

void Pipeline::do_index()
{
    auto& ws = workspace();
    std::vector<json> postings;
    for (const auto& key : ws.index.keys()) {
        postings.push_back({{"entity_key", key}, {"windows", ws.index.find_key(key)->to_vector()}});
    }
    json types = json::object();
    for (auto t : all_entity_types()) {
        auto n = ws.index.type_postings(t).size();
        if (n > 0) {
            types[std::string(to_string(t))] = n;
        }
    }
    json resolvers = json::object();
    for (const auto& [name, path] : config_.resolvers) {
        resolvers[name] = sha256_file(path);
    }
    std::size_t resolved = 0;
    for (const auto& e : ws.tags.entities()) {
        resolved += e.normalized.resolved() ? 1 : 0;
    }
    auto dir = stage_dir(Stage::Index);
    auto body = jsonl(postings);
    write_file_atomic(dir / "postings.jsonl", body);
    write_file_atomic(dir / "manifest.json", pretty({{"tags", ws.tags.tag_count()},
                                                     {"entities", ws.tags.entities().size()},
                                                     {"resolved_entities", resolved},
                                                     {"attachments", ws.tags.attachments().size()},
                                                     {"keys", ws.index.key_count()},
                                                     {"windows", ws.index.universe()},
                                                     {"type_windows", std::move(types)},
                                                     {"tags_sha256", sha256_file(config_.tags)},
                                                     {"resolvers_sha256", std::move(resolvers)},
                                                     {"postings_sha256", sha256_hex(body)}}));
}

void Pipeline::do_probe_loop(const std::string& task)
{
    auto& ws = workspace();
    auto ctx = ws.search();
    AuditLog audit;
    OracleRouter router(&audit);
    router.set_all(oracle());
    auto loop = config_.loop;
    loop.rng_seed = config_.seed;
    auto report = run_probe_loop(task, router, ctx, loop);
    report.schema = induce_schema(task, report.probes, router, ctx, loop);
    report.audit_digest = audit.digest();

    auto dir = stage_dir(Stage::ProbeLoop);
    write_file_atomic(dir / "task.txt", task);
    write_file_atomic(dir / "probes.json", pretty(to_json(report.probes)));
    write_file_atomic(dir / "schema.json", pretty(report.schema->schema.to_json()));
    write_file_atomic(dir / "loop_report.json", pretty(report.to_json()));
    write_file_atomic(dir / "audit.jsonl", jsonl(audit_rows(audit)));
}

void Pipeline::do_extract()
{
    auto& ws = workspace();
    auto ctx = ws.search();
    auto loop_dir = stage_dir(Stage::ProbeLoop);
    auto task = read_text(loop_dir / "task.txt");
    auto report = LoopReport::from_json(read_json(loop_dir / "loop_report.json"));
    if (!report.schema) {
        throw DataError(kModule, "loop report has no induced schema");
    }
    AuditLog audit;
    OracleRouter router(&audit);
    router.set_all(oracle());
    auto ranked = rank_subcorpus(report.probes, ctx, config_.ranking);
    auto result = extract_windows(task, ranked, report.probes, report.schema->schema, ctx, router,
                                  config_.extraction_budget);
    auto records = deduplicate(result.records);

    std::vector<json> ranking;
    for (const auto& p : ranked) {
        ranking.push_back({{"doc_id", p.doc_id},
                           {"probe_hits", p.probe_hits},
                           {"mean_sim", p.mean_sim},
                           {"max_sim", p.max_sim},
                           {"combined", p.combined}});
    }
    std::vector<json> failures;
    for (const auto& f : result.failures) {
        failures.push_back(f.to_json());
    }
    auto dir = stage_dir(Stage::Extract);
    write_file_atomic(dir / "ranking.jsonl", jsonl(ranking));
    write_file_atomic(dir / "records.jsonl", jsonl(record_rows(records)));
    write_file_atomic(dir / "failures.jsonl", jsonl(failures));
    write_file_atomic(dir / "summary.json", pretty({{"papers_ranked", ranked.size()},
                                                    {"budget", config_.extraction_budget},
                                                    {"windows_processed", result.windows_processed},
                                                    {"window_errors", result.window_errors},
                                                    {"records_raw", result.records.size()},
                                                    {"records", records.size()},
                                                    {"duplicates", result.records.size() - records.size()},
                                                    {"validation_failures", result.failures.size()},
                                                    {"audit_digest", audit.digest()}}));
    write_file_atomic(dir / "audit.jsonl", jsonl(audit_rows(audit)));
}

void Pipeline::do_judge()
{
    auto& ws = workspace();
    auto records = read_records(stage_dir(Stage::Extract) / "records.jsonl");
    AuditLog audit;
    OracleRouter router(&audit);
    router.set_all(oracle());
    auto outcome = filter_records(records, ws.corpus, config_.judge, router);

    std::vector<json> verdicts;
    for (const auto& v : outcome.verdicts) {
        verdicts.push_back(v.to_json());
    }
    auto report = outcome.report.to_json();
    report["audit_digest"] = audit.digest();
    auto dir = stage_dir(Stage::Judge);
    write_file_atomic(dir / "verdicts.jsonl", jsonl(verdicts));
    write_file_atomic(dir / "kept.jsonl", jsonl(record_rows(outcome.kept)));
    write_file_atomic(dir / "quarantined.jsonl", jsonl(record_rows(outcome.quarantined)));
    write_file_atomic(dir / "report.json", pretty(report));
    write_file_atomic(dir / "audit.jsonl", jsonl(audit_rows(audit)));
}

void Pipeline::do_analyze()
{
    auto dir = stage_dir(Stage::Analyze);
    const auto& A = config_.analysis;
    if (!A.enabled()) {
        write_file_atomic(dir / "report.json", pretty({{"enabled", false}}));
        return;
    }
    auto records = read_records(stage_dir(Stage::Judge) / "kept.jsonl");
    LabelMapping mapping{A.entity_field, A.label_field, A.covariates, parse_label_transform(A.transform)};
    json report = {{"enabled", true}, {"records", records.size()}};

    json eta = json::array();
    for (const auto& cov : A.covariates) {
        auto grouped = group_labels(records, mapping, cov);
        try {
            auto r = aggregate_eta2(grouped, cov);
            auto j = r.to_json();
            j.erase("per_entity");
            eta.push_back(std::move(j));
            std::string csv = "entity_key,labels,eta2,degenerate\n";
            for (const auto& e : r.per_entity) {
                csv += fmt::format("{},{},{},{}\n", csv_field(e.entity_key), e.labels, e.eta2, e.degenerate);
            }
            write_file_atomic(dir / fmt::format("eta2_{}.csv", safe_file_part(cov)), csv);
        } catch (const DataError& e) {
            eta.push_back({{"covariate", cov}, {"error", e.what()}});
        }
    }
    report["eta2"] = std::move(eta);

    if (A.reference) {
        std::set<std::string> ours;
        for (const auto& r : records) {
            if (auto it = r.fields.find(A.entity_field); it != r.fields.end()) {
                if (auto k = key_value(*it)) {
                    ours.insert(*k);
                }
            }
        }
        std::set<std::string> ref;
        std::istringstream in(read_text(*A.reference));
        std::string line;
        while (std::getline(in, line)) {
            auto k = text::trim(line);
            if (!k.empty()) {
                ref.insert(k);
            }
        }
        report["coverage"] = coverage(ours, ref, A.reference_name).to_json();
    }

    if (A.external_labels) {
        auto ext_json = read_json(*A.external_labels);
        if (!ext_json.is_object()) {
            throw DataError(kModule, A.external_labels->string() + " must be a JSON object of key -> 0/1");
        }
        std::map<std::string, int> external;
        for (const auto& [k, v] : ext_json.items()) {
            auto x = label_value(v, LabelTransform::Binary);
            if (!x) {
                throw DataError(kModule, fmt::format("external label for {} is not binary", k));
            }
            external[k] = static_cast<int>(*x);
        }
        std::map<std::string, std::vector<int>> extractions;
        for (const auto& r : records) {
            auto field = [&](const std::string& name) -> json {
                auto it = r.fields.find(name);
                return it == r.fields.end() ? json(nullptr) : *it;
            };
            auto k = key_value(field(A.entity_field));
            auto x = label_value(field(A.label_field), LabelTransform::Binary);
            if (k && x) {
                extractions[*k].push_back(static_cast<int>(*x));
            }
        }
        auto stats = disagreement(extractions, external, {A.buckets, A.min_extractions_for_positive});
        auto j = stats.to_json();
        j.erase("per_entity");
        report["disagreement"] = std::move(j);
        std::string hist = "bucket_low,bucket_high,entities\n";
        for (std::size_t b = 0; b < stats.histogram.size(); ++b) {
            hist += fmt::format("{},{},{}\n", static_cast<double>(b) / static_cast<double>(A.buckets),
                                static_cast<double>(b + 1) / static_cast<double>(A.buckets), stats.histogram[b]);
        }
        write_file_atomic(dir / "disagreement_histogram.csv", hist);
        std::string rows = "entity_key,extractions,disagreement,positive_fraction\n";
        for (const auto& e : stats.per_entity) {
            rows += fmt::format("{},{},{},{}\n", csv_field(e.entity_key), e.extractions, e.disagreement,
                                e.positive_fraction ? fmt::format("{}", *e.positive_fraction) : std::string{});
        }
        write_file_atomic(dir / "disagreement.csv", rows);
    }
    write_file_atomic(dir / "report.json", pretty(report));
}

} // namespace litmine
