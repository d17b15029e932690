#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

namespace litmine {

using json = nlohmann::json;

/// Dense 0-based position of a window within a corpus build.
using WindowOrdinal = std::uint32_t;

struct Document {
    std::string doc_id;
    std::vector<std::string> paragraphs;
    std::map<std::string, std::string> metadata;
};

struct WindowingConfig {
    std::size_t size = 5;
    std::size_t stride = 2;

    void validate() const;
};

struct Window {
    std::string window_id;
    std::string doc_id;
    std::size_t doc_index = 0;
    std::size_t start_para = 0;
    std::size_t para_count = 0;
    std::string text;

    std::size_t end_para() const noexcept { return start_para + para_count; }
    bool covers(std::size_t para) const noexcept { return para >= start_para && para < end_para(); }
};

/// Deterministic id for a paragraph span of a document.
std::string make_window_id(std::string_view doc_id, std::size_t start_para, std::size_t para_count);

/// (start, count) pairs for a document of `paragraph_count` paragraphs.
/// Starts advance by the stride and stop at the first window reaching the
/// end of the document; a window running past the end is truncated.
std::vector<std::pair<std::size_t, std::size_t>> window_spans(std::size_t paragraph_count,
                                                              const WindowingConfig& config);

/// Paragraphs joined with blank lines, as stored in a window.
std::string join_paragraphs(const Document& doc, std::size_t start, std::size_t count);

/// Parses one corpus line. Throws DataError on schema violations.
Document parse_document(const json& j);

/// Immutable document collection plus its retrieval windows.
class Corpus {
public:
    static Corpus from_documents(std::vector<Document> docs, WindowingConfig config);

    /// Reads one JSON document per line. Blank lines are skipped.
    static Corpus load(const std::filesystem::path& path, WindowingConfig config);

    std::span<const Document> documents() const noexcept { return docs_; }
    std::span<const Window> windows() const noexcept { return windows_; }
    std::size_t window_count() const noexcept { return windows_.size(); }
    const Window& window(WindowOrdinal ordinal) const { return windows_.at(ordinal); }
    const WindowingConfig& windowing() const noexcept { return config_; }

    std::optional<std::size_t> find_document(std::string_view doc_id) const;
    std::optional<WindowOrdinal> find_window(std::string_view window_id) const;

    /// Half-open ordinal range of the windows of one document.
    std::pair<WindowOrdinal, WindowOrdinal> windows_of(std::size_t doc_index) const
    {
        return doc_windows_.at(doc_index);
    }

private:
    Corpus() = default;

    WindowingConfig config_;
    std::vector<Document> docs_;
    std::vector<Window> windows_;
    std::vector<std::pair<WindowOrdinal, WindowOrdinal>> doc_windows_;
    std::unordered_map<std::string, std::size_t> doc_lookup_;
    std::unordered_map<std::string, WindowOrdinal> window_lookup_;
};

} // namespace litmine
