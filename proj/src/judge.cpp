#include "litmine/judge.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "litmine/errors.hpp"

namespace litmine {

namespace {

constexpr std::string_view kModule = "judge";
using nlohmann::json;

} // namespace

std::string_view to_string(JudgeAxis axis)
{
    switch (axis) {
    case JudgeAxis::SupportFidelity: return "support_fidelity";
    case JudgeAxis::TaskRelevance: return "task_relevance";
    case JudgeAxis::EntityAttribution: return "entity_attribution";
    case JudgeAxis::LabelCorrectness: return "label_correctness";
    case JudgeAxis::Accuracy: return "accuracy";
    }
    return "?";
}

JudgeVerdict make_verdict(std::string record_id, const std::array<bool, 5>& axes)
{
    JudgeVerdict v;
    v.record_id = std::move(record_id);
    v.axes = axes;
    v.kept = std::all_of(axes.begin(), axes.end(), [](bool b) { return b; });
    return v;
}

json JudgeVerdict::to_json() const
{
    json out = {{"record_id", record_id}, {"kept", kept}};
    if (ungraded) {
        out["axes"] = nullptr;
        out["ungraded"] = true;
        return out;
    }
    json ax = json::object();
    for (auto a : kJudgeAxes) {
        ax[std::string(to_string(a))] = passes(a);
    }
    out["axes"] = std::move(ax);
    return out;
}

json JudgeReport::to_json() const
{
    json fails = json::object();
    for (auto a : kJudgeAxes) {
        fails[std::string(to_string(a))] = axis_failures[static_cast<std::size_t>(a)];
    }
    return {{"total", total},     {"graded", graded},           {"kept", kept},
            {"failed", failed},   {"quarantined", quarantined}, {"axis_failures", std::move(fails)},
            {"error_rate", error_rate}};
}

std::string judge_context(const ExtractionRecord& record, const Corpus& corpus, std::size_t neighbor_windows)
{
    auto ordinal = corpus.find_window(record.window_id);
    if (!ordinal) {
        throw DataError(kModule, "record " + record.record_id + " refers to unknown window " + record.window_id);
    }
    const auto& win = corpus.window(*ordinal);
    auto [first, last] = corpus.windows_of(win.doc_index);
    auto lo = *ordinal - std::min<std::size_t>(neighbor_windows, *ordinal - first);
    auto hi = std::min<std::size_t>(static_cast<std::size_t>(*ordinal) + neighbor_windows, last - 1);
    const auto start = corpus.window(static_cast<WindowOrdinal>(lo)).start_para;
    const auto end = corpus.window(static_cast<WindowOrdinal>(hi)).end_para();
    return join_paragraphs(corpus.documents()[win.doc_index], start, end - start);
}

JudgeVerdict judge_record(const ExtractionRecord& record, const std::string& context, const JudgeConfig& config,
                          OracleRouter& oracles)
{
    json payload = {{"stage", "judge"},
                    {"record_id", record.record_id},
                    {"record", record.to_json()},
                    {"window_text", context},
                    {"rubric", config.rubric}};
    try {
        auto reply = oracles.call(AgentRole::Judge, kinds::judge_record, std::move(payload));
        std::array<bool, 5> axes{};
        for (auto a : kJudgeAxes) {
            axes[static_cast<std::size_t>(a)] = reply.at("axes").at(std::string(to_string(a))).get<bool>();
        }
        return make_verdict(record.record_id, axes);
    } catch (const OracleError& e) {
        spdlog::warn("{}: quarantining {}: {}", kModule, record.record_id, e.what());
        JudgeVerdict v;
        v.record_id = record.record_id;
        v.ungraded = true;
        return v;
    }
}

JudgeOutcome filter_records(std::span<const ExtractionRecord> records, const Corpus& corpus,
                            const JudgeConfig& config, OracleRouter& oracles)
{
    JudgeOutcome out;
    out.report.total = records.size();
    for (const auto& r : records) {
        auto v = judge_record(r, judge_context(r, corpus, config.neighbor_windows), config, oracles);
        if (v.ungraded) {
            ++out.report.quarantined;
            out.quarantined.push_back(r);
        } else {
            ++out.report.graded;
            for (auto a : kJudgeAxes) {
                if (!v.passes(a)) {
                    ++out.report.axis_failures[static_cast<std::size_t>(a)];
                }
            }
            if (v.kept) {
                ++out.report.kept;
                out.kept.push_back(r);
            } else {
                ++out.report.failed;
            }
        }
        out.verdicts.push_back(std::move(v));
    }
    out.report.error_rate =
        out.report.graded == 0 ? 0.0 : static_cast<double>(out.report.failed) / static_cast<double>(out.report.graded);
    return out;
}

} // namespace litmine
