#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "litmine/corpus.hpp"
#include "litmine/entity_types.hpp"
#include "litmine/resolver.hpp"

namespace litmine {

/// One tagger output row, bound to a tagging window of a document.
/// `paragraph_indices` are document paragraph indices inside
/// [start_para, start_para + para_count); an empty list means the whole
/// tagging window.
struct EntityTag {
    std::string doc_id;
    std::size_t start_para = 0;
    std::size_t para_count = 0;
    std::string canonical_name;
    EntityType entity_type{};
    std::vector<std::string> synonyms;
    std::vector<std::string> surface_forms;
    std::vector<std::size_t> paragraph_indices;
    std::map<std::string, std::string> extras;
};

EntityTag parse_tag(const nlohmann::json& j);

/// Normalized tags projected onto retrieval windows.
class TagStore {
public:
    struct Entity {
        NormalizedEntity normalized;
        /// Canonical names, synonyms and surface forms seen in tags.
        std::vector<std::string> names;
    };

    /// (window ordinal, entity index), sorted and unique.
    using Attachment = std::pair<WindowOrdinal, std::uint32_t>;

    static TagStore load(const std::filesystem::path& path, const Corpus& corpus, const ResolverRegistry& resolvers);
    static TagStore build(std::span<const EntityTag> tags, const Corpus& corpus, const ResolverRegistry& resolvers);

    const std::vector<Entity>& entities() const noexcept { return entities_; }
    const std::vector<Attachment>& attachments() const noexcept { return attachments_; }
    std::size_t window_count() const noexcept { return window_count_; }
    std::size_t tag_count() const noexcept { return tag_count_; }

private:
    void add(const EntityTag& tag, const Corpus& corpus, const ResolverRegistry& resolvers, std::string_view where);
    void finish();

    std::vector<Entity> entities_;
    std::map<std::pair<std::string, EntityType>, std::uint32_t> entity_lookup_;
    std::vector<Attachment> attachments_;
    std::size_t window_count_ = 0;
    std::size_t tag_count_ = 0;
};

} // namespace litmine
