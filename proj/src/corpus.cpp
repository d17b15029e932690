#include "litmine/corpus.hpp"

#include <fstream>

#include <fmt/format.h>

#include "litmine/errors.hpp"

namespace litmine {

namespace {

constexpr std::string_view kModule = "corpus";

} // namespace

void WindowingConfig::validate() const
{
    if (size == 0) {
        throw ConfigError(kModule, "window size must be at least 1");
    }
    if (stride == 0) {
        throw ConfigError(kModule, "window stride must be at least 1");
    }
    if (stride > size) {
        throw ConfigError(kModule, "window stride larger than the window size would skip paragraphs");
    }
}

std::string make_window_id(std::string_view doc_id, std::size_t start_para, std::size_t para_count)
{
    return fmt::format("{}@{}+{}", doc_id, start_para, para_count);
}

std::vector<std::pair<std::size_t, std::size_t>> window_spans(std::size_t paragraph_count,
                                                              const WindowingConfig& config)
{
    config.validate();
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (std::size_t start = 0; start < paragraph_count; start += config.stride) {
        std::size_t count = std::min(config.size, paragraph_count - start);
        spans.emplace_back(start, count);
        if (start + config.size >= paragraph_count) {
            break;
        }
    }
    return spans;
}

std::string join_paragraphs(const Document& doc, std::size_t start, std::size_t count)
{
    std::string text;
    for (std::size_t p = start; p < start + count && p < doc.paragraphs.size(); ++p) {
        if (p > start) {
            text.append("\n\n");
        }
        text.append(doc.paragraphs[p]);
    }
    return text;
}

Document parse_document(const json& j)
{
    if (!j.is_object()) {
        throw DataError(kModule, "document must be a JSON object");
    }
    Document doc;
    auto id = j.find("doc_id");
    if (id == j.end() || !id->is_string() || id->get_ref<const std::string&>().empty()) {
        throw DataError(kModule, "missing or empty doc_id");
    }
    doc.doc_id = id->get<std::string>();

    auto paras = j.find("paragraphs");
    if (paras == j.end() || !paras->is_array()) {
        throw DataError(kModule, fmt::format("document {}: paragraphs must be an array", doc.doc_id));
    }
    for (const auto& p : *paras) {
        if (!p.is_string()) {
            throw DataError(kModule, fmt::format("document {}: paragraphs must be strings", doc.doc_id));
        }
        doc.paragraphs.push_back(p.get<std::string>());
    }
    if (doc.paragraphs.empty()) {
        throw DataError(kModule, fmt::format("document {} has no paragraphs", doc.doc_id));
    }

    if (auto meta = j.find("metadata"); meta != j.end() && !meta->is_null()) {
        if (!meta->is_object()) {
            throw DataError(kModule, fmt::format("document {}: metadata must be an object", doc.doc_id));
        }
        for (const auto& [key, value] : meta->items()) {
            if (!value.is_string()) {
                throw DataError(kModule,
                                fmt::format("document {}: metadata value for '{}' must be a string", doc.doc_id, key));
            }
            doc.metadata.emplace(key, value.get<std::string>());
        }
    }
    return doc;
}

Corpus Corpus::from_documents(std::vector<Document> docs, WindowingConfig config)
{
    config.validate();
    Corpus corpus;
    corpus.config_ = config;
    corpus.docs_ = std::move(docs);
    corpus.doc_windows_.reserve(corpus.docs_.size());

    for (std::size_t d = 0; d < corpus.docs_.size(); ++d) {
        const Document& doc = corpus.docs_[d];
        if (doc.doc_id.empty()) {
            throw DataError(kModule, fmt::format("document #{} has an empty doc_id", d));
        }
        if (doc.paragraphs.empty()) {
            throw DataError(kModule, fmt::format("document {} has no paragraphs", doc.doc_id));
        }
        if (!corpus.doc_lookup_.emplace(doc.doc_id, d).second) {
            throw DataError(kModule, fmt::format("duplicate doc_id {}", doc.doc_id));
        }
        auto first = static_cast<WindowOrdinal>(corpus.windows_.size());
        for (auto [start, count] : window_spans(doc.paragraphs.size(), config)) {
            Window w;
            w.window_id = make_window_id(doc.doc_id, start, count);
            w.doc_id = doc.doc_id;
            w.doc_index = d;
            w.start_para = start;
            w.para_count = count;
            w.text = join_paragraphs(doc, start, count);
            corpus.window_lookup_.emplace(w.window_id, static_cast<WindowOrdinal>(corpus.windows_.size()));
            corpus.windows_.push_back(std::move(w));
        }
        corpus.doc_windows_.emplace_back(first, static_cast<WindowOrdinal>(corpus.windows_.size()));
    }
    return corpus;
}

Corpus Corpus::load(const std::filesystem::path& path, WindowingConfig config)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError(kModule, "cannot open corpus file " + path.string());
    }
    std::vector<Document> docs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            docs.push_back(parse_document(json::parse(line)));
        } catch (const json::exception& e) {
            throw DataError(kModule, fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
        } catch (const DataError& e) {
            throw DataError(kModule, fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
        }
    }
    return from_documents(std::move(docs), config);
}

std::optional<std::size_t> Corpus::find_document(std::string_view doc_id) const
{
    auto it = doc_lookup_.find(std::string(doc_id));
    if (it == doc_lookup_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<WindowOrdinal> Corpus::find_window(std::string_view window_id) const
{
    auto it = window_lookup_.find(std::string(window_id));
    if (it == window_lookup_.end()) {
        return std::nullopt;
    }
    return it->second;
}

} // namespace litmine
