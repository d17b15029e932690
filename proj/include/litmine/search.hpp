#pragma once

#include <span>
#include <string>
#include <vector>

#include "litmine/corpus.hpp"
#include "litmine/embedding.hpp"
#include "litmine/entity_index.hpp"
#include "litmine/filter.hpp"

namespace litmine {

struct RankedHit {
    std::string window_id;
    WindowOrdinal ordinal = 0;
    double score = 0.0;
    std::string probe_id;
};

/// Read-only view of everything a search needs.
struct SearchContext {
    const Corpus& corpus;
    const EntityIndex& index;
    const EmbeddingTable& embeddings;
    const Embedder& embedder;
    /// Candidate sets up to this size are fully sorted; larger ones stream
    /// through a bounded top-k heap.
    std::size_t full_sort_cap = 100'000;
};

/// Score descending, then ordinal ascending.
bool ranks_before(const RankedHit& a, const RankedHit& b) noexcept;

/// Top `top_k` members of `candidates` by cosine to `query`.
std::vector<RankedHit> rank_windows(const DenseBitset& candidates, const EmbeddingVector& query,
                                    const std::string& probe_id, const SearchContext& ctx, std::size_t top_k);

/// Filters by the probe's CNF constraint, then re-ranks the survivors by
/// similarity to its semantic query.
std::vector<RankedHit> probe_search(const Probe& probe, const SearchContext& ctx, std::size_t top_k);

/// Windows excluded by every probe's filter, scored by their best
/// similarity to any probe's query; `probe_id` names that probe.
std::vector<RankedHit> excluded_but_relevant(std::span<const Probe> probes, const SearchContext& ctx,
                                             std::size_t pool_k);

/// Union of the probes' filter matches.
DenseBitset probe_union(std::span<const Probe> probes, const EntityIndex& index);

} // namespace litmine
