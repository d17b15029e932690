#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "litmine/entity_types.hpp"
#include "litmine/postings.hpp"
#include "litmine/resolver.hpp"
#include "litmine/tags.hpp"

namespace litmine {

/// Postings from entity keys and entity types to window ordinals, plus the
/// alias table used to expand entity-name literals. Immutable once built.
class EntityIndex {
public:
    class Builder {
    public:
        explicit Builder(std::size_t universe);

        void add(WindowOrdinal window, std::string_view entity_key, EntityType type);
        void add_alias(std::string_view name, std::string_view entity_key);

        EntityIndex finish() &&;

    private:
        std::size_t universe_;
        std::unordered_map<std::string, std::vector<std::uint32_t>> keys_;
        std::array<std::vector<std::uint32_t>, kEntityTypeCount> types_;
        std::unordered_map<std::string, std::vector<std::string>> aliases_;
    };

    /// Aliases come from tag names and, for resolved entities, the
    /// preferred name and synonyms of their dictionary entry.
    static EntityIndex build(const TagStore& tags, const ResolverRegistry& resolvers);

    std::size_t universe() const noexcept { return universe_; }
    std::size_t key_count() const noexcept { return by_key_.size(); }

    const Postings* find_key(std::string_view entity_key) const;
    const Postings& type_postings(EntityType type) const { return by_type_[static_cast<std::size_t>(type)]; }

    /// Type postings when `literal` is a type name, else entity-key postings.
    const Postings* postings_for(std::string_view literal) const;

    /// Entity keys an entity-name literal refers to: alias matches
    /// (case-insensitive), an exact key, or the raw fallback key. Only keys
    /// with postings are returned, sorted.
    std::vector<std::string> expand_name(std::string_view name) const;

    /// Sorted entity keys.
    std::vector<std::string> keys() const;

private:
    std::size_t universe_ = 0;
    std::unordered_map<std::string, Postings> by_key_;
    std::array<Postings, kEntityTypeCount> by_type_;
    std::unordered_map<std::string, std::vector<std::string>> aliases_;
};

} // namespace litmine
