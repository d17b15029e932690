#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "litmine/filter.hpp"
#include "litmine/oracle.hpp"
#include "litmine/schema.hpp"
#include "litmine/search.hpp"

namespace litmine {

struct RankingWeights {
    double hits = 1.0;
    double mean = 1.0;
    double max = 1.0;

    void validate() const;
};

struct PaperScore {
    std::string doc_id;
    std::size_t doc_index = 0;
    /// Probes whose filter matches at least one window of the paper.
    std::size_t probe_hits = 0;
    /// Mean / max over the paper's windows of the best cosine to any probe query.
    double mean_sim = 0.0;
    double max_sim = 0.0;
    double combined = 0.0;
};

/// z-normalizes each signal across `papers` (population deviation; a
/// constant signal scores 0), sets `combined` to the weighted sum and sorts
/// by combined descending, doc_id ascending.
std::vector<PaperScore> combine_scores(std::vector<PaperScore> papers, const RankingWeights& weights);

/// Scores every paper with at least one window in the probe union.
std::vector<PaperScore> rank_subcorpus(std::span<const Probe> probes, const SearchContext& ctx,
                                       const RankingWeights& weights);

struct ExtractionRecord {
    std::string record_id;
    std::string doc_id;
    std::string window_id;
    std::string probe_id;
    nlohmann::json fields = nlohmann::json::object();
    std::string support_text;

    nlohmann::json to_json() const;
    static ExtractionRecord from_json(const nlohmann::json& j);

    friend bool operator==(const ExtractionRecord&, const ExtractionRecord&) = default;
};

struct ValidationFailure {
    std::string window_id;
    std::size_t record_index = 0;
    std::string reason;

    nlohmann::json to_json() const;
};

struct ExtractionResult {
    std::vector<ExtractionRecord> records;
    std::vector<ValidationFailure> failures;
    std::size_t windows_processed = 0;
    /// Windows skipped because the Extractor failed.
    std::size_t window_errors = 0;
};

/// Walks papers in rank order and their matching windows in ordinal order,
/// one Extractor call per window, until `budget` windows have been tried.
/// Records failing schema validation are dropped and logged, never repaired.
ExtractionResult extract_windows(const std::string& task, std::span<const PaperScore> ranked,
                                 std::span<const Probe> probes, const ExtractionSchema& schema,
                                 const SearchContext& ctx, OracleRouter& oracles, std::size_t budget);

/// Duplicate key: doc_id plus every field value after whitespace/case
/// normalization. Support text is not part of the key.
std::string dedup_key(const ExtractionRecord& record);

/// Keeps the first record of each duplicate key, preserving order.
std::vector<ExtractionRecord> deduplicate(std::span<const ExtractionRecord> records);

} // namespace litmine
