#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "litmine/corpus.hpp"
#include "litmine/extraction.hpp"
#include "litmine/oracle.hpp"

namespace litmine {

enum class JudgeAxis { SupportFidelity, TaskRelevance, EntityAttribution, LabelCorrectness, Accuracy };

inline constexpr std::array<JudgeAxis, 5> kJudgeAxes = {JudgeAxis::SupportFidelity, JudgeAxis::TaskRelevance,
                                                        JudgeAxis::EntityAttribution, JudgeAxis::LabelCorrectness,
                                                        JudgeAxis::Accuracy};

/// snake_case key used on the wire, e.g. "support_fidelity".
std::string_view to_string(JudgeAxis axis);

struct JudgeVerdict {
    std::string record_id;
    std::array<bool, 5> axes{};
    bool kept = false;
    /// The Judge failed; the record is quarantined, neither kept nor failed.
    bool ungraded = false;

    bool passes(JudgeAxis axis) const { return axes[static_cast<std::size_t>(axis)]; }
    nlohmann::json to_json() const;
};

/// Verdict whose keep flag is the conjunction of the five axes.
JudgeVerdict make_verdict(std::string record_id, const std::array<bool, 5>& axes);

struct JudgeConfig {
    /// Rubric text forwarded verbatim to the Judge.
    std::string rubric;
    /// Windows of the same document on each side included as grounding.
    std::size_t neighbor_windows = 1;
};

struct JudgeReport {
    std::size_t total = 0;
    std::size_t graded = 0;
    std::size_t kept = 0;
    std::size_t failed = 0;
    std::size_t quarantined = 0;
    std::array<std::size_t, 5> axis_failures{};
    /// Fraction of graded records failing at least one axis.
    double error_rate = 0.0;

    nlohmann::json to_json() const;
};

/// Source window plus neighbors, as contiguous paragraphs.
std::string judge_context(const ExtractionRecord& record, const Corpus& corpus, std::size_t neighbor_windows);

JudgeVerdict judge_record(const ExtractionRecord& record, const std::string& context, const JudgeConfig& config,
                          OracleRouter& oracles);

struct JudgeOutcome {
    std::vector<ExtractionRecord> kept;
    std::vector<ExtractionRecord> quarantined;
    std::vector<JudgeVerdict> verdicts;
    JudgeReport report;
};

/// Judges every record; kept records preserve input order.
JudgeOutcome filter_records(std::span<const ExtractionRecord> records, const Corpus& corpus,
                            const JudgeConfig& config, OracleRouter& oracles);

} // namespace litmine
