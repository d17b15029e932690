#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "litmine/corpus.hpp"
#include "litmine/retry.hpp"

namespace litmine {

/// Fixed-length vector, L2-normalized on construction (all-zero stays zero).
class EmbeddingVector {
public:
    EmbeddingVector() = default;
    explicit EmbeddingVector(std::vector<float> values);

    std::size_t dim() const noexcept { return values_.size(); }
    std::span<const float> values() const noexcept { return values_; }
    double norm() const noexcept;
    bool is_zero() const noexcept;

    friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

private:
    std::vector<float> values_;
};

/// Cosine similarity clamped to [-1, 1]; 0 when either side is all-zero.
/// Throws ConfigError on dimension mismatch.
double cosine(std::span<const float> a, std::span<const float> b);
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

/// Port for text embedders. Implementations must be safe to call concurrently.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::size_t dim() const = 0;
    virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const = 0;

    EmbeddingVector embed(std::string_view text) const;
};

/// Signed feature hashing over lowercased alphanumeric tokens.
class HashingEmbedder final : public Embedder {
public:
    explicit HashingEmbedder(std::size_t dim = 256);

    std::size_t dim() const override { return dim_; }
    std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;

    /// Bucket and sign a token contributes to.
    static std::pair<std::size_t, float> feature(std::string_view token, std::size_t dim);

private:
    std::size_t dim_;
};

/// Remote embedder: POST {"texts": [...]} -> {"vectors": [[...], ...]}.
class HttpEmbedder final : public Embedder {
public:
    HttpEmbedder(std::string url, std::size_t dim, RetryPolicy retry = {}, std::size_t batch_size = 64);

    std::size_t dim() const override { return dim_; }
    std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;

private:
    std::vector<EmbeddingVector> post_batch(std::span<const std::string> texts) const;

    std::string url_;
    std::size_t dim_;
    RetryPolicy retry_;
    std::size_t batch_size_;
};

EmbeddingVector embed_window(const Window& window, const Embedder& embedder);

/// Row-major window embeddings for a corpus build, indexed by ordinal.
class EmbeddingTable {
public:
    /// Embeds every window, splitting the work over `workers` threads.
    static EmbeddingTable build(const Corpus& corpus, const Embedder& embedder, std::size_t workers = 1);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return dim_ == 0 ? 0 : values_.size() / dim_; }
    std::span<const float> row(WindowOrdinal ordinal) const
    {
        return std::span<const float>(values_).subspan(static_cast<std::size_t>(ordinal) * dim_, dim_);
    }

private:
    std::size_t dim_ = 0;
    std::vector<float> values_;
};

} // namespace litmine
