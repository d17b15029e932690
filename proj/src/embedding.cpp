#include "litmine/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

#include "http_util.hpp"
#include "litmine/digest.hpp"
#include "litmine/errors.hpp"
#include "litmine/text.hpp"

namespace litmine {

namespace {

constexpr std::string_view kModule = "embedding";

double l2(std::span<const float> v)
{
    double sum = 0.0;
    for (float x : v) {
        sum += static_cast<double>(x) * x;
    }
    return std::sqrt(sum);
}

} // namespace

EmbeddingVector::EmbeddingVector(std::vector<float> values) : values_(std::move(values))
{
    double n = l2(values_);
    if (n > 0.0) {
        for (float& x : values_) {
            x = static_cast<float>(x / n);
        }
    }
}

double EmbeddingVector::norm() const noexcept { return l2(values_); }

bool EmbeddingVector::is_zero() const noexcept
{
    return std::all_of(values_.begin(), values_.end(), [](float x) { return x == 0.0f; });
}

double cosine(std::span<const float> a, std::span<const float> b)
{
    if (a.size() != b.size()) {
        throw ConfigError(kModule, fmt::format("dimension mismatch: {} vs {}", a.size(), b.size()));
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) { return cosine(a.values(), b.values()); }

EmbeddingVector Embedder::embed(std::string_view text) const
{
    std::string owned(text);
    auto out = embed_batch(std::span<const std::string>(&owned, 1));
    return std::move(out.at(0));
}

HashingEmbedder::HashingEmbedder(std::size_t dim) : dim_(dim)
{
    if (dim_ == 0) {
        throw ConfigError(kModule, "embedding dim must be positive");
    }
}

std::pair<std::size_t, float> HashingEmbedder::feature(std::string_view token, std::size_t dim)
{
    std::uint64_t h = fnv1a64(token);
    float sign = (h >> 63) != 0 ? -1.0f : 1.0f;
    return {static_cast<std::size_t>(h % dim), sign};
}

std::vector<EmbeddingVector> HashingEmbedder::embed_batch(std::span<const std::string> texts) const
{
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    std::vector<float> acc(dim_);
    for (const auto& t : texts) {
        std::fill(acc.begin(), acc.end(), 0.0f);
        for (const auto& token : text::alnum_tokens(t)) {
            auto [bucket, sign] = feature(token, dim_);
            acc[bucket] += sign;
        }
        out.emplace_back(acc);
    }
    return out;
}

HttpEmbedder::HttpEmbedder(std::string url, std::size_t dim, RetryPolicy retry, std::size_t batch_size)
    : url_(std::move(url)), dim_(dim), retry_(retry), batch_size_(std::max<std::size_t>(batch_size, 1))
{
    if (dim_ == 0) {
        throw ConfigError(kModule, "embedding dim must be positive");
    }
    detail::split_url(url_, kModule);
}

std::vector<EmbeddingVector> HttpEmbedder::post_batch(std::span<const std::string> texts) const
{
    auto [host, path] = detail::split_url(url_, kModule);
    json body = {{"texts", json::array()}};
    for (const auto& t : texts) {
        body["texts"].push_back(t);
    }
    const std::string payload = body.dump();

    auto attempt = [&]() {
        httplib::Client client(host);
        client.set_connection_timeout(10);
        client.set_read_timeout(120);
        auto res = client.Post(path, payload, "application/json");
        if (!res) {
            throw TransportError(kModule, "request to " + url_ + " failed: " + httplib::to_string(res.error()));
        }
        if (res->status >= 500) {
            throw TransportError(kModule, fmt::format("embedder returned HTTP {}", res->status));
        }
        if (res->status != 200) {
            throw ConfigError(kModule, fmt::format("embedder rejected request with HTTP {}", res->status));
        }
        json reply = json::parse(res->body, nullptr, false);
        if (reply.is_discarded() || !reply.contains("vectors") || !reply["vectors"].is_array()
            || reply["vectors"].size() != texts.size()) {
            throw TransportError(kModule, "malformed embedder response");
        }
        std::vector<EmbeddingVector> out;
        for (const auto& row : reply["vectors"]) {
            if (!row.is_array()) {
                throw TransportError(kModule, "malformed embedder response");
            }
            if (row.size() != dim_) {
                throw ConfigError(kModule, fmt::format("embedder returned dim {} but {} is configured",
                                                       row.size(), dim_));
            }
            std::vector<float> values;
            values.reserve(dim_);
            for (const auto& x : row) {
                if (!x.is_number()) {
                    throw TransportError(kModule, "non-numeric embedding component");
                }
                values.push_back(x.get<float>());
            }
            out.emplace_back(std::move(values));
        }
        return out;
    };
    return with_retries(retry_, attempt);
}

std::vector<EmbeddingVector> HttpEmbedder::embed_batch(std::span<const std::string> texts) const
{
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); i += batch_size_) {
        auto n = std::min(batch_size_, texts.size() - i);
        auto part = post_batch(texts.subspan(i, n));
        std::move(part.begin(), part.end(), std::back_inserter(out));
    }
    return out;
}

EmbeddingVector embed_window(const Window& window, const Embedder& embedder)
{
    auto v = embedder.embed(window.text);
    if (v.dim() != embedder.dim()) {
        throw ConfigError(kModule, fmt::format("embedder produced dim {} but declares {}", v.dim(), embedder.dim()));
    }
    return v;
}

EmbeddingTable EmbeddingTable::build(const Corpus& corpus, const Embedder& embedder, std::size_t workers)
{
    EmbeddingTable table;
    table.dim_ = embedder.dim();
    const std::size_t n = corpus.window_count();
    table.values_.assign(n * table.dim_, 0.0f);
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));

    // Each worker owns a contiguous ordinal range, so writes never overlap and
    // the table is identical for any worker count.
    auto work = [&](std::size_t begin, std::size_t end) {
        constexpr std::size_t batch = 256;
        std::vector<std::string> texts;
        for (std::size_t i = begin; i < end; i += batch) {
            auto stop = std::min(end, i + batch);
            texts.clear();
            for (std::size_t o = i; o < stop; ++o) {
                texts.push_back(corpus.windows()[o].text);
            }
            auto vecs = embedder.embed_batch(texts);
            for (std::size_t k = 0; k < vecs.size(); ++k) {
                if (vecs[k].dim() != table.dim_) {
                    throw ConfigError(kModule, "embedder returned inconsistent dimensions");
                }
                std::copy(vecs[k].values().begin(), vecs[k].values().end(),
                          table.values_.begin() + static_cast<std::ptrdiff_t>((i + k) * table.dim_));
            }
        }
    };

    if (workers == 1) {
        work(0, n);
        return table;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> threads;
        const std::size_t chunk = (n + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            auto begin = std::min(n, w * chunk);
            auto end = std::min(n, begin + chunk);
            threads.emplace_back([&, w, begin, end] {
                try {
                    work(begin, end);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return table;
}

} // namespace litmine
