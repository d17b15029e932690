#include "litmine/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "litmine/errors.hpp"
#include "litmine/text.hpp"

namespace litmine {

namespace {

constexpr std::string_view kModule = "extraction";
using nlohmann::json;

std::vector<double> zscores(const std::vector<double>& xs)
{
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double var = 0.0;
    for (double x : xs) {
        var += (x - mean) * (x - mean);
    }
    const double sd = std::sqrt(var / n);
    std::vector<double> z(xs.size(), 0.0);
    if (sd > 1e-12) {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            z[i] = (xs[i] - mean) / sd;
        }
    }
    return z;
}

std::string normalized_value(const json& v)
{
    if (v.is_string()) {
        return text::normalize_whitespace_case(v.get<std::string>());
    }
    return v.dump();
}

} // namespace

void RankingWeights::validate() const
{
    if (hits < 0 || mean < 0 || max < 0) {
        throw ConfigError(kModule, "ranking weights must be non-negative");
    }
    if (hits == 0 && mean == 0 && max == 0) {
        throw ConfigError(kModule, "ranking weights must not all be zero");
    }
}

std::vector<PaperScore> combine_scores(std::vector<PaperScore> papers, const RankingWeights& weights)
{
    weights.validate();
    if (papers.empty()) {
        return papers;
    }
    std::vector<double> hits, means, maxes;
    for (const auto& p : papers) {
        hits.push_back(static_cast<double>(p.probe_hits));
        means.push_back(p.mean_sim);
        maxes.push_back(p.max_sim);
    }
    auto zh = zscores(hits);
    auto zm = zscores(means);
    auto zx = zscores(maxes);
    for (std::size_t i = 0; i < papers.size(); ++i) {
        papers[i].combined = weights.hits * zh[i] + weights.mean * zm[i] + weights.max * zx[i];
    }
    std::sort(papers.begin(), papers.end(), [](const PaperScore& a, const PaperScore& b) {
        if (a.combined != b.combined) {
            return a.combined > b.combined;
        }
        return a.doc_id < b.doc_id;
    });
    return papers;
}

std::vector<PaperScore> rank_subcorpus(std::span<const Probe> probes, const SearchContext& ctx,
                                       const RankingWeights& weights)
{
    weights.validate();
    std::vector<DenseBitset> matches;
    std::vector<EmbeddingVector> queries;
    DenseBitset all(ctx.index.universe());
    for (const auto& p : probes) {
        matches.push_back(evaluate_filter(p.spec, ctx.index).windows);
        all |= matches.back();
        queries.push_back(ctx.embedder.embed(p.spec.semantic_query));
    }

    std::vector<PaperScore> papers;
    for (std::size_t d = 0; d < ctx.corpus.documents().size(); ++d) {
        auto [first, last] = ctx.corpus.windows_of(d);
        bool candidate = false;
        for (auto w = first; w < last && !candidate; ++w) {
            candidate = all.test(w);
        }
        if (!candidate) {
            continue;
        }
        PaperScore ps;
        ps.doc_id = ctx.corpus.documents()[d].doc_id;
        ps.doc_index = d;
        for (const auto& m : matches) {
            for (auto w = first; w < last; ++w) {
                if (m.test(w)) {
                    ++ps.probe_hits;
                    break;
                }
            }
        }
        double sum = 0.0;
        ps.max_sim = -1.0;
        for (auto w = first; w < last; ++w) {
            double best = -1.0;
            for (const auto& q : queries) {
                best = std::max(best, cosine(ctx.embeddings.row(w), q.values()));
            }
            sum += best;
            ps.max_sim = std::max(ps.max_sim, best);
        }
        ps.mean_sim = sum / static_cast<double>(last - first);
        papers.push_back(std::move(ps));
    }
    return combine_scores(std::move(papers), weights);
}

json ExtractionRecord::to_json() const
{
    return {{"record_id", record_id}, {"doc_id", doc_id},     {"window_id", window_id},
            {"probe_id", probe_id},   {"fields", fields},     {"support_text", support_text}};
}

ExtractionRecord ExtractionRecord::from_json(const json& j)
{
    try {
        ExtractionRecord r;
        r.record_id = j.at("record_id").get<std::string>();
        r.doc_id = j.at("doc_id").get<std::string>();
        r.window_id = j.at("window_id").get<std::string>();
        r.probe_id = j.at("probe_id").get<std::string>();
        r.fields = j.at("fields");
        r.support_text = j.at("support_text").get<std::string>();
        return r;
    } catch (const json::exception& e) {
        throw DataError(kModule, std::string("malformed record: ") + e.what());
    }
}

json ValidationFailure::to_json() const
{
    return {{"window_id", window_id}, {"record_index", record_index}, {"reason", reason}};
}

ExtractionResult extract_windows(const std::string& task, std::span<const PaperScore> ranked,
                                 std::span<const Probe> probes, const ExtractionSchema& schema,
                                 const SearchContext& ctx, OracleRouter& oracles, std::size_t budget)
{
    if (budget == 0) {
        throw ConfigError(kModule, "extraction budget must be at least 1");
    }
    schema.validate();
    std::vector<DenseBitset> matches;
    std::vector<EmbeddingVector> queries;
    for (const auto& p : probes) {
        matches.push_back(evaluate_filter(p.spec, ctx.index).windows);
        queries.push_back(ctx.embedder.embed(p.spec.semantic_query));
    }
    const json schema_json = schema.to_json();

    ExtractionResult result;
    for (const auto& paper : ranked) {
        auto [first, last] = ctx.corpus.windows_of(paper.doc_index);
        for (auto w = first; w < last; ++w) {
            if (result.windows_processed >= budget) {
                return result;
            }
            // Best probe among those matching this window.
            std::optional<std::size_t> best;
            double best_score = -2.0;
            for (std::size_t p = 0; p < probes.size(); ++p) {
                if (!matches[p].test(w)) {
                    continue;
                }
                double s = cosine(ctx.embeddings.row(w), queries[p].values());
                if (!best || s > best_score) {
                    best = p;
                    best_score = s;
                }
            }
            if (!best) {
                continue;
            }
            ++result.windows_processed;
            const auto& win = ctx.corpus.window(w);
            json payload = {{"stage", "extract"},
                            {"task", task},
                            {"schema", schema_json},
                            {"task_instantiation", schema.task_instantiation},
                            {"doc_id", win.doc_id},
                            {"window_id", win.window_id},
                            {"probe_id", probes[*best].probe_id},
                            {"text", win.text}};
            json reply;
            try {
                reply = oracles.call(AgentRole::Extractor, kinds::extract_records, std::move(payload));
            } catch (const OracleError& e) {
                spdlog::warn("{}: skipping window {}: {}", kModule, win.window_id, e.what());
                ++result.window_errors;
                continue;
            }
            const auto& records = reply.at("records");
            for (std::size_t i = 0; i < records.size(); ++i) {
                const auto& r = records[i];
                const auto support = r.at("support_text").get<std::string>();
                if (auto why = validate_record_fields(schema, r.at("fields"), support)) {
                    spdlog::info("{}: dropped record {} of {}: {}", kModule, i, win.window_id, *why);
                    result.failures.push_back({win.window_id, i, *why});
                    continue;
                }
                ExtractionRecord rec;
                rec.record_id = fmt::format("{}#{}", win.window_id, i);
                rec.doc_id = win.doc_id;
                rec.window_id = win.window_id;
                rec.probe_id = probes[*best].probe_id;
                rec.fields = r.at("fields");
                rec.support_text = support;
                result.records.push_back(std::move(rec));
            }
        }
    }
    return result;
}

std::string dedup_key(const ExtractionRecord& record)
{
    std::string key = record.doc_id;
    for (const auto& [name, value] : record.fields.items()) {
        if (value.is_null()) {
            continue;
        }
        key += '\x1f';
        key += name;
        key += '=';
        key += normalized_value(value);
    }
    return key;
}

std::vector<ExtractionRecord> deduplicate(std::span<const ExtractionRecord> records)
{
    std::unordered_set<std::string> seen;
    std::vector<ExtractionRecord> out;
    for (const auto& r : records) {
        if (seen.insert(dedup_key(r)).second) {
            out.push_back(r);
        }
    }
    return out;
}

} // namespace litmine
