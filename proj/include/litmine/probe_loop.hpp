#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "litmine/filter.hpp"
#include "litmine/oracle.hpp"
#include "litmine/rng.hpp"
#include "litmine/schema.hpp"
#include "litmine/search.hpp"

namespace litmine {

struct LoopConfig {
    double precision_target = 0.80;
    double recall_gap_max = 0.15;
    std::size_t precision_sample_n = 50;
    std::size_t recall_pool_n = 50;
    std::size_t max_probes = 8;
    std::size_t max_iterations = 12;
    std::uint64_t rng_seed = 0;

    /// Precision samples are drawn from the top factor * n ranked hits,
    /// unless the whole match set is requested.
    std::size_t precision_region_factor = 10;
    bool sample_full_match_set = false;
    /// Judge whole papers (the matching windows of a document) instead of
    /// single windows.
    bool paper_level = false;
    std::size_t investigator_max_samples = 10;

    std::size_t schema_sample_docs = 100;
    std::size_t schema_check_n = 20;
    std::size_t schema_max_rounds = 5;

    void validate() const;
};

struct PrecisionEstimate {
    std::string probe_id;
    std::vector<std::string> sampled_window_ids;
    std::vector<std::string> rejected_window_ids;
    std::size_t relevant_count = 0;
    std::size_t judged_count = 0;
    /// Samples dropped because the validator failed.
    std::size_t skipped = 0;
    double precision = 0.0;
    /// No matches (or nothing judged); precision is reported as 0.
    bool degenerate = false;
};

struct RecallGapEstimate {
    std::vector<std::string> pool_window_ids;
    std::size_t relevant_count = 0;
    std::size_t judged_count = 0;
    std::size_t skipped = 0;
    double gap = 0.0;
    bool degenerate = false;
};

struct ProbeSuggestions {
    std::string probe_id;
    std::vector<std::string> suggestions;
};

struct LoopIteration {
    std::size_t iteration = 0;
    std::vector<Probe> probes;
    std::vector<PrecisionEstimate> precision;
    RecallGapEstimate recall_gap;
    std::vector<ProbeSuggestions> suggestions;
    bool thresholds_met = false;
};

enum class Termination { ThresholdsMet, ProbeCap, IterationCap };

std::string_view to_string(Termination t);

struct SchemaRound {
    std::size_t round = 0;
    ExtractionSchema schema;
    std::size_t scored = 0;
    std::size_t passed = 0;
    double pass_rate = 0.0;
};

struct SchemaInduction {
    ExtractionSchema schema;
    std::vector<SchemaRound> rounds;
    std::vector<std::string> sampled_doc_ids;
    std::size_t freeform_record_count = 0;
    bool target_met = false;
};

struct LoopReport {
    std::vector<Probe> probes;
    std::vector<LoopIteration> iterations;
    Termination termination = Termination::IterationCap;
    std::optional<SchemaInduction> schema;
    std::string audit_digest;

    nlohmann::json to_json() const;
    static LoopReport from_json(const nlohmann::json& j);
};

bool meets_thresholds(std::span<const PrecisionEstimate> precision, const RecallGapEstimate& gap,
                      const LoopConfig& config);

/// Samples windows from the probe's ranked matches and asks the Validator
/// whether each is relevant to the task.
PrecisionEstimate estimate_precision(const std::string& task, const Probe& probe, const SearchContext& ctx,
                                     OracleRouter& oracles, const LoopConfig& config, Rng& rng);

/// Asks the Validator about the top semantically ranked windows that every
/// probe's filter excludes.
RecallGapEstimate estimate_recall_gap(const std::string& task, std::span<const Probe> probes,
                                      const SearchContext& ctx, OracleRouter& oracles, const LoopConfig& config);

/// Proposer/Validator/Investigator iteration until the thresholds hold,
/// the probe cap is reached, or the iteration cap runs out. Proposer
/// failures abort the run.
LoopReport run_probe_loop(const std::string& task, OracleRouter& oracles, const SearchContext& ctx,
                          const LoopConfig& config);

/// Free-form trial extractions over sampled papers, then Proposer schema
/// rounds scored by the Validator until the pass rate reaches the
/// precision target or the round cap. Throws DataError when the probes
/// match nothing.
SchemaInduction induce_schema(const std::string& task, std::span<const Probe> probes, OracleRouter& oracles,
                              const SearchContext& ctx, const LoopConfig& config);

} // namespace litmine
