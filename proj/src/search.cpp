#include "litmine/search.hpp"

#include <algorithm>
#include <queue>

#include "litmine/errors.hpp"

namespace litmine {

bool ranks_before(const RankedHit& a, const RankedHit& b) noexcept
{
    if (a.score != b.score) {
        return a.score > b.score;
    }
    return a.ordinal < b.ordinal;
}

namespace {

struct Scored {
    double score;
    WindowOrdinal ordinal;
    std::size_t probe;
};

bool scored_before(const Scored& a, const Scored& b) noexcept
{
    if (a.score != b.score) {
        return a.score > b.score;
    }
    return a.ordinal < b.ordinal;
}

/// Keeps the best `k` of a stream; the heap top is the worst kept element.
class TopK {
public:
    TopK(std::size_t k, bool bounded) : k_(k), bounded_(bounded) {}

    void push(const Scored& s)
    {
        if (!bounded_) {
            items_.push_back(s);
            return;
        }
        if (items_.size() < k_) {
            items_.push_back(s);
            std::push_heap(items_.begin(), items_.end(), scored_before);
        } else if (scored_before(s, items_.front())) {
            std::pop_heap(items_.begin(), items_.end(), scored_before);
            items_.back() = s;
            std::push_heap(items_.begin(), items_.end(), scored_before);
        }
    }

    std::vector<Scored> take()
    {
        std::sort(items_.begin(), items_.end(), scored_before);
        if (items_.size() > k_) {
            items_.resize(k_);
        }
        return std::move(items_);
    }

private:
    std::size_t k_;
    bool bounded_;
    std::vector<Scored> items_;
};

std::vector<RankedHit> to_hits(const std::vector<Scored>& scored, std::span<const std::string> probe_ids,
                               const SearchContext& ctx)
{
    std::vector<RankedHit> hits;
    hits.reserve(scored.size());
    for (const auto& s : scored) {
        hits.push_back({ctx.corpus.window(s.ordinal).window_id, s.ordinal, s.score, probe_ids[s.probe]});
    }
    return hits;
}

void check_table(const SearchContext& ctx)
{
    if (ctx.embeddings.size() != ctx.corpus.window_count()) {
        throw ConfigError("filter_engine", "embedding table does not match the corpus build");
    }
}

} // namespace

std::vector<RankedHit> rank_windows(const DenseBitset& candidates, const EmbeddingVector& query,
                                    const std::string& probe_id, const SearchContext& ctx, std::size_t top_k)
{
    if (top_k == 0) {
        throw ConfigError("filter_engine", "top_k must be at least 1");
    }
    check_table(ctx);
    const std::size_t n = candidates.count();
    TopK top(top_k, n > ctx.full_sort_cap);
    candidates.for_each([&](std::uint32_t w) {
        top.push({cosine(ctx.embeddings.row(w), query.values()), w, 0});
    });
    return to_hits(top.take(), std::span<const std::string>(&probe_id, 1), ctx);
}

std::vector<RankedHit> probe_search(const Probe& probe, const SearchContext& ctx, std::size_t top_k)
{
    auto result = evaluate_filter(probe.spec, ctx.index);
    if (result.windows.empty()) {
        return {};
    }
    auto query = ctx.embedder.embed(probe.spec.semantic_query);
    return rank_windows(result.windows, query, probe.probe_id, ctx, top_k);
}

DenseBitset probe_union(std::span<const Probe> probes, const EntityIndex& index)
{
    DenseBitset covered(index.universe());
    for (const auto& p : probes) {
        covered |= evaluate_filter(p.spec, index).windows;
    }
    return covered;
}

std::vector<RankedHit> excluded_but_relevant(std::span<const Probe> probes, const SearchContext& ctx,
                                             std::size_t pool_k)
{
    if (probes.empty()) {
        throw ConfigError("filter_engine", "excluded_but_relevant needs at least one probe");
    }
    if (pool_k == 0) {
        throw ConfigError("filter_engine", "pool size must be at least 1");
    }
    check_table(ctx);
    DenseBitset pool = probe_union(probes, ctx.index);
    pool.flip();
    if (pool.empty()) {
        return {};
    }

    std::vector<EmbeddingVector> queries;
    std::vector<std::string> ids;
    for (const auto& p : probes) {
        queries.push_back(ctx.embedder.embed(p.spec.semantic_query));
        ids.push_back(p.probe_id);
    }
    TopK top(pool_k, pool.count() > ctx.full_sort_cap);
    pool.for_each([&](std::uint32_t w) {
        Scored best{-2.0, w, 0};
        for (std::size_t q = 0; q < queries.size(); ++q) {
            double s = cosine(ctx.embeddings.row(w), queries[q].values());
            if (s > best.score) {
                best.score = s;
                best.probe = q;
            }
        }
        top.push(best);
    });
    return to_hits(top.take(), ids, ctx);
}

} // namespace litmine
