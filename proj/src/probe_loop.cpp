#include "litmine/probe_loop.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "litmine/errors.hpp"

namespace litmine {

namespace {

constexpr std::string_view kModule = "probe_loop";
constexpr std::string_view kLoopStage = "probe_loop";
constexpr std::string_view kSchemaStage = "schema";

using nlohmann::json;

double ratio(std::size_t num, std::size_t den) { return den == 0 ? 0.0 : static_cast<double>(num) / den; }

/// Calls a Validator/Investigator/Extractor and converts failures into a
/// skipped unit with a warning.
std::optional<json> try_call(OracleRouter& oracles, AgentRole role, std::string_view kind, json payload)
{
    try {
        return oracles.call(role, kind, std::move(payload));
    } catch (const OracleError& e) {
        spdlog::warn("{}: skipping {} call: {}", kModule, kind, e.what());
        return std::nullopt;
    }
}

/// Text of the windows of `doc_index` that are in `matches`, or of
/// `ordinal` alone in window mode.
std::string judged_text(const SearchContext& ctx, WindowOrdinal ordinal, const DenseBitset* matches,
                        bool paper_level)
{
    if (!paper_level || matches == nullptr) {
        return ctx.corpus.window(ordinal).text;
    }
    auto [first, last] = ctx.corpus.windows_of(ctx.corpus.window(ordinal).doc_index);
    std::vector<std::string> parts;
    for (auto w = first; w < last; ++w) {
        if (matches->test(w)) {
            parts.push_back(ctx.corpus.window(w).text);
        }
    }
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        out += (i ? "\n\n" : "") + parts[i];
    }
    return out;
}

json precision_json(const PrecisionEstimate& p)
{
    return {{"probe_id", p.probe_id},
            {"sampled_window_ids", p.sampled_window_ids},
            {"rejected_window_ids", p.rejected_window_ids},
            {"relevant_count", p.relevant_count},
            {"judged_count", p.judged_count},
            {"skipped", p.skipped},
            {"precision", p.precision},
            {"degenerate", p.degenerate}};
}

PrecisionEstimate precision_from_json(const json& j)
{
    PrecisionEstimate p;
    p.probe_id = j.at("probe_id").get<std::string>();
    p.sampled_window_ids = j.at("sampled_window_ids").get<std::vector<std::string>>();
    p.rejected_window_ids = j.at("rejected_window_ids").get<std::vector<std::string>>();
    p.relevant_count = j.at("relevant_count").get<std::size_t>();
    p.judged_count = j.at("judged_count").get<std::size_t>();
    p.skipped = j.at("skipped").get<std::size_t>();
    p.precision = j.at("precision").get<double>();
    p.degenerate = j.at("degenerate").get<bool>();
    return p;
}

json gap_json(const RecallGapEstimate& g)
{
    return {{"pool_window_ids", g.pool_window_ids},
            {"relevant_count", g.relevant_count},
            {"judged_count", g.judged_count},
            {"skipped", g.skipped},
            {"gap", g.gap},
            {"degenerate", g.degenerate}};
}

RecallGapEstimate gap_from_json(const json& j)
{
    RecallGapEstimate g;
    g.pool_window_ids = j.at("pool_window_ids").get<std::vector<std::string>>();
    g.relevant_count = j.at("relevant_count").get<std::size_t>();
    g.judged_count = j.at("judged_count").get<std::size_t>();
    g.skipped = j.at("skipped").get<std::size_t>();
    g.gap = j.at("gap").get<double>();
    g.degenerate = j.at("degenerate").get<bool>();
    return g;
}

json suggestions_json(const std::vector<ProbeSuggestions>& s)
{
    json out = json::array();
    for (const auto& x : s) {
        out.push_back({{"probe_id", x.probe_id}, {"suggestions", x.suggestions}});
    }
    return out;
}

json estimates_json(const LoopIteration& it)
{
    json precision = json::array();
    for (const auto& p : it.precision) {
        precision.push_back(precision_json(p));
    }
    return {{"precision", std::move(precision)}, {"recall_gap", gap_json(it.recall_gap)}};
}

std::vector<Probe> ask_proposer(const std::string& task, OracleRouter& oracles, const LoopConfig& config,
                                std::size_t iteration, const std::vector<Probe>& current, const LoopIteration* last)
{
    json payload = {{"stage", kLoopStage},
                    {"task", task},
                    {"iteration", iteration},
                    {"max_probes", config.max_probes},
                    {"probes", to_json(current)},
                    {"estimates", last ? estimates_json(*last) : json(nullptr)},
                    {"suggestions", last ? suggestions_json(last->suggestions) : json::array()}};
    auto response = oracles.call(AgentRole::Proposer, kinds::propose_probes, std::move(payload));
    std::vector<Probe> probes;
    try {
        probes = probe_set_from_json(response.at("probes"), "/probes");
    } catch (const ConfigError& e) {
        throw ProtocolError(kModule, std::string("Proposer returned an invalid probe set: ") + e.what());
    }
    if (probes.empty()) {
        throw ProtocolError(kModule, "Proposer returned no probes");
    }
    if (probes.size() > config.max_probes) {
        spdlog::warn("{}: Proposer returned {} probes; keeping the first {}", kModule, probes.size(),
                     config.max_probes);
        probes.resize(config.max_probes);
    }
    return probes;
}

/// Window in `matches` of the document with the best max-over-probes
/// similarity; lowest ordinal on ties.
WindowOrdinal best_window(std::size_t doc_index, const DenseBitset& matches, const SearchContext& ctx,
                          const std::vector<EmbeddingVector>& queries)
{
    auto [first, last] = ctx.corpus.windows_of(doc_index);
    WindowOrdinal best = first;
    double best_score = -2.0;
    for (auto w = first; w < last; ++w) {
        if (!matches.test(w)) {
            continue;
        }
        double s = -2.0;
        for (const auto& q : queries) {
            s = std::max(s, cosine(ctx.embeddings.row(w), q.values()));
        }
        if (s > best_score) {
            best_score = s;
            best = w;
        }
    }
    return best;
}

} // namespace

void LoopConfig::validate() const
{
    auto fraction = [](double x) { return x > 0.0 && x < 1.0; };
    if (!fraction(precision_target) || !fraction(recall_gap_max)) {
        throw ConfigError(kModule, "precision_target and recall_gap_max must lie strictly between 0 and 1");
    }
    if (precision_sample_n == 0 || recall_pool_n == 0 || precision_region_factor == 0) {
        throw ConfigError(kModule, "sample sizes must be at least 1");
    }
    if (max_probes == 0 || max_iterations == 0 || schema_max_rounds == 0) {
        throw ConfigError(kModule, "max_probes, max_iterations and schema_max_rounds must be at least 1");
    }
}

std::string_view to_string(Termination t)
{
    switch (t) {
    case Termination::ThresholdsMet: return "thresholds_met";
    case Termination::ProbeCap: return "probe_cap";
    case Termination::IterationCap: return "iteration_cap";
    }
    return "?";
}

bool meets_thresholds(std::span<const PrecisionEstimate> precision, const RecallGapEstimate& gap,
                      const LoopConfig& config)
{
    if (precision.empty()) {
        return false;
    }
    bool all_precise = std::all_of(precision.begin(), precision.end(), [&](const PrecisionEstimate& p) {
        return !p.degenerate && p.precision >= config.precision_target;
    });
    return all_precise && gap.gap <= config.recall_gap_max;
}

PrecisionEstimate estimate_precision(const std::string& task, const Probe& probe, const SearchContext& ctx,
                                     OracleRouter& oracles, const LoopConfig& config, Rng& rng)
{
    PrecisionEstimate est;
    est.probe_id = probe.probe_id;

    auto matches = evaluate_filter(probe.spec, ctx.index).windows;
    if (matches.empty()) {
        est.degenerate = true;
        return est;
    }
    const std::size_t region = config.sample_full_match_set ? matches.count()
                                                            : config.precision_sample_n * config.precision_region_factor;
    auto query = ctx.embedder.embed(probe.spec.semantic_query);
    auto hits = rank_windows(matches, query, probe.probe_id, ctx, region);

    // Sampling units: windows, or one representative window per document.
    std::vector<WindowOrdinal> units;
    std::set<std::size_t> seen_docs;
    for (const auto& h : hits) {
        if (config.paper_level && !seen_docs.insert(ctx.corpus.window(h.ordinal).doc_index).second) {
            continue;
        }
        units.push_back(h.ordinal);
    }
    auto sample = rng.sample(std::span<const WindowOrdinal>(units), config.precision_sample_n);

    for (auto w : sample) {
        const auto& win = ctx.corpus.window(w);
        est.sampled_window_ids.push_back(win.window_id);
        json payload = {{"stage", kLoopStage},
                        {"purpose", "precision"},
                        {"task", task},
                        {"probe_id", probe.probe_id},
                        {"window_id", win.window_id},
                        {"doc_id", win.doc_id},
                        {"text", judged_text(ctx, w, &matches, config.paper_level)}};
        auto verdict = try_call(oracles, AgentRole::Validator, kinds::judge_relevance, std::move(payload));
        if (!verdict) {
            ++est.skipped;
            continue;
        }
        ++est.judged_count;
        if (verdict->at("relevant").get<bool>()) {
            ++est.relevant_count;
        } else {
            est.rejected_window_ids.push_back(win.window_id);
        }
    }
    est.degenerate = est.judged_count == 0;
    est.precision = ratio(est.relevant_count, est.judged_count);
    return est;
}

RecallGapEstimate estimate_recall_gap(const std::string& task, std::span<const Probe> probes,
                                      const SearchContext& ctx, OracleRouter& oracles, const LoopConfig& config)
{
    RecallGapEstimate est;
    auto pool = excluded_but_relevant(probes, ctx, config.recall_pool_n);
    for (const auto& hit : pool) {
        const auto& win = ctx.corpus.window(hit.ordinal);
        est.pool_window_ids.push_back(win.window_id);
        json payload = {{"stage", kLoopStage},
                        {"purpose", "recall_gap"},
                        {"task", task},
                        {"probe_id", hit.probe_id},
                        {"window_id", win.window_id},
                        {"doc_id", win.doc_id},
                        {"text", win.text}};
        auto verdict = try_call(oracles, AgentRole::Validator, kinds::judge_relevance, std::move(payload));
        if (!verdict) {
            ++est.skipped;
            continue;
        }
        ++est.judged_count;
        if (verdict->at("relevant").get<bool>()) {
            ++est.relevant_count;
        }
    }
    est.degenerate = est.judged_count == 0;
    est.gap = ratio(est.relevant_count, est.judged_count);
    return est;
}

LoopReport run_probe_loop(const std::string& task, OracleRouter& oracles, const SearchContext& ctx,
                          const LoopConfig& config)
{
    config.validate();
    Rng rng(derive_seed(config.rng_seed, kLoopStage));
    LoopReport report;

    auto probes = ask_proposer(task, oracles, config, 0, {}, nullptr);
    for (std::size_t it = 0;; ++it) {
        LoopIteration iter;
        iter.iteration = it;
        iter.probes = probes;
        for (const auto& p : probes) {
            iter.precision.push_back(estimate_precision(task, p, ctx, oracles, config, rng));
        }
        iter.recall_gap = estimate_recall_gap(task, probes, ctx, oracles, config);
        iter.thresholds_met = meets_thresholds(iter.precision, iter.recall_gap, config);

        std::optional<Termination> done;
        if (iter.thresholds_met) {
            done = Termination::ThresholdsMet;
        } else if (probes.size() >= config.max_probes) {
            done = Termination::ProbeCap;
        } else if (it + 1 >= config.max_iterations) {
            done = Termination::IterationCap;
        }
        if (done) {
            report.iterations.push_back(std::move(iter));
            report.termination = *done;
            break;
        }

        for (std::size_t i = 0; i < probes.size(); ++i) {
            const auto& est = iter.precision[i];
            if (est.precision >= config.precision_target || est.rejected_window_ids.empty()) {
                continue;
            }
            json rejected = json::array();
            for (std::size_t k = 0; k < est.rejected_window_ids.size() && k < config.investigator_max_samples; ++k) {
                const auto& id = est.rejected_window_ids[k];
                rejected.push_back({{"window_id", id}, {"text", ctx.corpus.window(*ctx.corpus.find_window(id)).text}});
            }
            json payload = {{"stage", kLoopStage},
                            {"task", task},
                            {"probe_id", probes[i].probe_id},
                            {"spec", to_json(probes[i].spec)},
                            {"precision", est.precision},
                            {"rejected", std::move(rejected)}};
            if (auto reply = try_call(oracles, AgentRole::Investigator, kinds::suggest_refinement, std::move(payload))) {
                iter.suggestions.push_back(
                    {probes[i].probe_id, reply->at("suggestions").get<std::vector<std::string>>()});
            }
        }
        report.iterations.push_back(std::move(iter));
        probes = ask_proposer(task, oracles, config, it + 1, probes, &report.iterations.back());
    }
    report.probes = probes;
    return report;
}

SchemaInduction induce_schema(const std::string& task, std::span<const Probe> probes, OracleRouter& oracles,
                              const SearchContext& ctx, const LoopConfig& config)
{
    config.validate();
    if (probes.empty()) {
        throw DataError(kModule, "no retrieval set: empty probe set");
    }
    auto matches = probe_union(probes, ctx.index);
    if (matches.empty()) {
        throw DataError(kModule, "no retrieval set: the probes match no windows");
    }
    Rng rng(derive_seed(config.rng_seed, kSchemaStage));

    std::vector<std::size_t> docs;
    matches.for_each([&](std::uint32_t w) {
        auto d = ctx.corpus.window(w).doc_index;
        if (docs.empty() || docs.back() != d) {
            docs.push_back(d);
        }
    });
    auto sampled = rng.sample(std::span<const std::size_t>(docs), config.schema_sample_docs);

    std::vector<EmbeddingVector> queries;
    for (const auto& p : probes) {
        queries.push_back(ctx.embedder.embed(p.spec.semantic_query));
    }
    std::vector<WindowOrdinal> windows;
    for (auto d : sampled) {
        windows.push_back(best_window(d, matches, ctx, queries));
    }

    SchemaInduction result;
    json freeform = json::array();
    for (auto w : windows) {
        const auto& win = ctx.corpus.window(w);
        result.sampled_doc_ids.push_back(win.doc_id);
        json payload = {{"stage", kSchemaStage}, {"task", task},          {"doc_id", win.doc_id},
                        {"window_id", win.window_id}, {"text", win.text}};
        if (auto reply = try_call(oracles, AgentRole::Extractor, kinds::extract_freeform, std::move(payload))) {
            for (const auto& r : reply->at("records")) {
                freeform.push_back({{"doc_id", win.doc_id},
                                    {"window_id", win.window_id},
                                    {"fields", r.at("fields")},
                                    {"support_text", r.at("support_text")}});
            }
        }
    }
    result.freeform_record_count = freeform.size();

    json feedback = nullptr;
    for (std::size_t round = 1; round <= config.schema_max_rounds; ++round) {
        json payload = {{"stage", kSchemaStage},
                        {"task", task},
                        {"round", round},
                        {"freeform_records", freeform},
                        {"previous_schema", result.rounds.empty() ? json(nullptr) : result.rounds.back().schema.to_json()},
                        {"feedback", feedback}};
        auto reply = oracles.call(AgentRole::Proposer, kinds::propose_schema, std::move(payload));
        SchemaRound r;
        r.round = round;
        try {
            r.schema = ExtractionSchema::from_json(reply);
            r.schema.ensure_universal_fields();
            r.schema.validate();
        } catch (const ConfigError& e) {
            throw ProtocolError(kModule, std::string("Proposer returned an invalid schema: ") + e.what());
        }

        json failures = json::array();
        const std::size_t n_check = std::min(config.schema_check_n, windows.size());
        for (std::size_t i = 0; i < n_check; ++i) {
            const auto& win = ctx.corpus.window(windows[i]);
            json req = {{"stage", kSchemaStage},
                        {"task", task},
                        {"round", round},
                        {"schema", r.schema.to_json()},
                        {"doc_id", win.doc_id},
                        {"window_id", win.window_id},
                        {"text", win.text}};
            auto extracted = try_call(oracles, AgentRole::Extractor, kinds::extract_records, std::move(req));
            if (!extracted) {
                continue;
            }
            for (const auto& rec : extracted->at("records")) {
                ++r.scored;
                const auto support = rec.at("support_text").get<std::string>();
                if (auto why = validate_record_fields(r.schema, rec.at("fields"), support)) {
                    failures.push_back({{"window_id", win.window_id}, {"reason", *why}});
                    continue;
                }
                json score_req = {{"stage", kSchemaStage},
                                  {"task", task},
                                  {"round", round},
                                  {"window_id", win.window_id},
                                  {"record", rec},
                                  {"text", win.text},
                                  {"task_instantiation", r.schema.task_instantiation}};
                auto verdict = try_call(oracles, AgentRole::Validator, kinds::score_extraction, std::move(score_req));
                if (verdict && verdict->at("pass").get<bool>()) {
                    ++r.passed;
                } else {
                    failures.push_back({{"window_id", win.window_id}, {"reason", verdict ? "validator rejected" : "validator unavailable"}});
                }
            }
        }
        r.pass_rate = ratio(r.passed, r.scored);
        feedback = {{"pass_rate", r.pass_rate}, {"failures", std::move(failures)}};
        result.rounds.push_back(r);
        if (r.scored > 0 && r.pass_rate >= config.precision_target) {
            result.target_met = true;
            break;
        }
    }
    result.schema = result.rounds.back().schema;
    return result;
}

nlohmann::json LoopReport::to_json() const
{
    json iters = json::array();
    for (const auto& it : iterations) {
        json probes_json = litmine::to_json(it.probes);
        json est = estimates_json(it);
        iters.push_back({{"iteration", it.iteration},
                         {"probes", std::move(probes_json)},
                         {"precision", est["precision"]},
                         {"recall_gap", est["recall_gap"]},
                         {"suggestions", suggestions_json(it.suggestions)},
                         {"thresholds_met", it.thresholds_met}});
    }
    json out = {{"probes", litmine::to_json(probes)},
                {"iterations", std::move(iters)},
                {"termination", std::string(to_string(termination))},
                {"audit_digest", audit_digest},
                {"schema", nullptr}};
    if (schema) {
        json rounds = json::array();
        for (const auto& r : schema->rounds) {
            rounds.push_back({{"round", r.round},
                              {"schema", r.schema.to_json()},
                              {"scored", r.scored},
                              {"passed", r.passed},
                              {"pass_rate", r.pass_rate}});
        }
        out["schema"] = {{"frozen", schema->schema.to_json()},
                         {"rounds", std::move(rounds)},
                         {"sampled_doc_ids", schema->sampled_doc_ids},
                         {"freeform_record_count", schema->freeform_record_count},
                         {"target_met", schema->target_met}};
    }
    return out;
}

LoopReport LoopReport::from_json(const nlohmann::json& j)
{
    try {
        LoopReport r;
        r.probes = probe_set_from_json(j.at("probes"), "/probes");
        for (const auto& it : j.at("iterations")) {
            LoopIteration iter;
            iter.iteration = it.at("iteration").get<std::size_t>();
            iter.probes = probe_set_from_json(it.at("probes"));
            for (const auto& p : it.at("precision")) {
                iter.precision.push_back(precision_from_json(p));
            }
            iter.recall_gap = gap_from_json(it.at("recall_gap"));
            for (const auto& s : it.at("suggestions")) {
                iter.suggestions.push_back(
                    {s.at("probe_id").get<std::string>(), s.at("suggestions").get<std::vector<std::string>>()});
            }
            iter.thresholds_met = it.at("thresholds_met").get<bool>();
            r.iterations.push_back(std::move(iter));
        }
        const auto term = j.at("termination").get<std::string>();
        bool known = false;
        for (auto t : {Termination::ThresholdsMet, Termination::ProbeCap, Termination::IterationCap}) {
            if (to_string(t) == term) {
                r.termination = t;
                known = true;
            }
        }
        if (!known) {
            throw DataError(kModule, "unknown termination reason " + term);
        }
        r.audit_digest = j.value("audit_digest", std::string{});
        if (const auto& s = j.at("schema"); !s.is_null()) {
            SchemaInduction si;
            si.schema = ExtractionSchema::from_json(s.at("frozen"));
            for (const auto& rj : s.at("rounds")) {
                SchemaRound round;
                round.round = rj.at("round").get<std::size_t>();
                round.schema = ExtractionSchema::from_json(rj.at("schema"));
                round.scored = rj.at("scored").get<std::size_t>();
                round.passed = rj.at("passed").get<std::size_t>();
                round.pass_rate = rj.at("pass_rate").get<double>();
                si.rounds.push_back(std::move(round));
            }
            si.sampled_doc_ids = s.at("sampled_doc_ids").get<std::vector<std::string>>();
            si.freeform_record_count = s.at("freeform_record_count").get<std::size_t>();
            si.target_met = s.at("target_met").get<bool>();
            r.schema = std::move(si);
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(kModule, std::string("malformed loop report: ") + e.what());
    } catch (const ConfigError& e) {
        throw DataError(kModule, std::string("malformed loop report: ") + e.what());
    }
}

} // namespace litmine
