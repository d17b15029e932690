#include "litmine/tags.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>

#include "litmine/errors.hpp"

namespace litmine {

namespace {

constexpr std::string_view kModule = "entity_tags";

std::vector<std::string> string_list(const nlohmann::json& j, const char* field)
{
    if (!j.contains(field) || j.at(field).is_null()) {
        return {};
    }
    return j.at(field).get<std::vector<std::string>>();
}

} // namespace

EntityTag parse_tag(const nlohmann::json& j)
{
    EntityTag tag;
    tag.doc_id = j.at("doc_id").get<std::string>();
    tag.start_para = j.at("start_para").get<std::size_t>();
    tag.para_count = j.at("para_count").get<std::size_t>();
    tag.canonical_name = j.at("canonical_name").get<std::string>();
    tag.entity_type = entity_type_from_string(j.at("entity_type").get<std::string>());
    tag.synonyms = string_list(j, "synonyms");
    tag.surface_forms = string_list(j, "surface_forms");
    if (j.contains("paragraph_indices") && !j.at("paragraph_indices").is_null()) {
        tag.paragraph_indices = j.at("paragraph_indices").get<std::vector<std::size_t>>();
    }
    if (j.contains("extras") && !j.at("extras").is_null()) {
        tag.extras = j.at("extras").get<std::map<std::string, std::string>>();
    }
    return tag;
}

void TagStore::add(const EntityTag& tag, const Corpus& corpus, const ResolverRegistry& resolvers,
                   std::string_view where)
{
    auto fail = [&](std::string_view why) {
        throw DataError(kModule, fmt::format("{} (doc_id={}, canonical_name={}): {}", where, tag.doc_id,
                                             tag.canonical_name, why));
    };
    auto doc_index = corpus.find_document(tag.doc_id);
    if (!doc_index) {
        fail("unknown doc_id");
    }
    const std::size_t n_paras = corpus.documents()[*doc_index].paragraphs.size();
    if (tag.canonical_name.empty()) {
        fail("empty canonical_name");
    }
    if (tag.surface_forms.empty()) {
        fail("empty surface_forms");
    }
    if (tag.para_count == 0 || tag.start_para + tag.para_count > n_paras) {
        fail(fmt::format("tag window [{}, {}) outside document of {} paragraphs", tag.start_para,
                         tag.start_para + tag.para_count, n_paras));
    }
    std::vector<std::size_t> paras = tag.paragraph_indices;
    for (auto p : paras) {
        if (p < tag.start_para || p >= tag.start_para + tag.para_count) {
            fail(fmt::format("paragraph index {} outside tag window [{}, {})", p, tag.start_para,
                             tag.start_para + tag.para_count));
        }
    }
    if (paras.empty()) {
        for (std::size_t p = tag.start_para; p < tag.start_para + tag.para_count; ++p) {
            paras.push_back(p);
        }
    }

    auto normalized = normalize_entity(tag.canonical_name, tag.entity_type, resolvers);
    auto id_key = std::make_pair(normalized.entity_key, normalized.entity_type);
    auto [it, inserted] = entity_lookup_.emplace(id_key, static_cast<std::uint32_t>(entities_.size()));
    if (inserted) {
        entities_.push_back({normalized, {}});
    }
    auto& names = entities_[it->second].names;
    names.push_back(tag.canonical_name);
    names.insert(names.end(), tag.synonyms.begin(), tag.synonyms.end());
    names.insert(names.end(), tag.surface_forms.begin(), tag.surface_forms.end());

    auto [first, last] = corpus.windows_of(*doc_index);
    for (auto w = first; w < last; ++w) {
        const auto& win = corpus.window(w);
        if (std::any_of(paras.begin(), paras.end(), [&](std::size_t p) { return win.covers(p); })) {
            attachments_.emplace_back(w, it->second);
        }
    }
    ++tag_count_;
}

void TagStore::finish()
{
    std::sort(attachments_.begin(), attachments_.end());
    attachments_.erase(std::unique(attachments_.begin(), attachments_.end()), attachments_.end());
    for (auto& e : entities_) {
        std::sort(e.names.begin(), e.names.end());
        e.names.erase(std::unique(e.names.begin(), e.names.end()), e.names.end());
    }
}

TagStore TagStore::build(std::span<const EntityTag> tags, const Corpus& corpus, const ResolverRegistry& resolvers)
{
    TagStore store;
    store.window_count_ = corpus.window_count();
    for (std::size_t i = 0; i < tags.size(); ++i) {
        store.add(tags[i], corpus, resolvers, fmt::format("tag #{}", i));
    }
    store.finish();
    return store;
}

TagStore TagStore::load(const std::filesystem::path& path, const Corpus& corpus, const ResolverRegistry& resolvers)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError(kModule, "cannot open tag file " + path.string());
    }
    TagStore store;
    store.window_count_ = corpus.window_count();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        EntityTag tag;
        try {
            tag = parse_tag(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(kModule, fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
        } catch (const DataError& e) {
            throw DataError(kModule, fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
        }
        store.add(tag, corpus, resolvers, fmt::format("{}:{}", path.string(), line_no));
    }
    store.finish();
    return store;
}

} // namespace litmine
