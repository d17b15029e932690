#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "litmine/entity_types.hpp"

namespace litmine {

struct OntologyEntry {
    std::string ontology_id;
    std::string preferred_name;
    std::vector<std::string> synonyms;
    EntityType entity_type{};
};

struct NormalizedEntity {
    /// Resolver-qualified ontology id, or "raw:<lowercased name>".
    std::string entity_key;
    EntityType entity_type{};
    std::string display_name;

    bool resolved() const noexcept { return !entity_key.starts_with("raw:"); }

    friend bool operator==(const NormalizedEntity&, const NormalizedEntity&) = default;
};

inline constexpr std::string_view kRawKeyPrefix = "raw:";

std::string raw_key(std::string_view name);

/// Exact case-insensitive dictionary over preferred names and synonyms.
class DictionaryResolver {
public:
    DictionaryResolver(std::string name, std::vector<OntologyEntry> entries);

    /// JSON lines of {ontology_id, preferred_name, synonyms, entity_type}.
    static DictionaryResolver load(std::string name, const std::filesystem::path& path);

    const std::string& name() const noexcept { return name_; }
    std::size_t size() const noexcept { return entries_.size(); }
    const std::vector<OntologyEntry>& entries() const noexcept { return entries_; }

    /// First entry (in file order) of `type` whose preferred name or synonym
    /// equals `name` case-insensitively.
    const OntologyEntry* lookup(std::string_view name, EntityType type) const;

    /// Entries of any type matching `name`.
    std::vector<const OntologyEntry*> lookup_any(std::string_view name) const;

    const OntologyEntry* find_id(std::string_view ontology_id) const;

private:
    std::string name_;
    std::vector<OntologyEntry> entries_;
    std::unordered_map<std::string, std::vector<std::size_t>> by_name_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

/// Named resolvers plus the per-type cascade order.
class ResolverRegistry {
public:
    void add(DictionaryResolver resolver);

    /// Cascade for one type; names must refer to added resolvers.
    void set_cascade(EntityType type, std::vector<std::string> resolver_names);
    void set_default_cascade(std::vector<std::string> resolver_names);

    /// Cascade order mirroring the reference deployment: a four-stage
    /// chemistry cascade for small molecules, single authorities for
    /// classes, organisms, proteins and genes, and a general default.
    /// Resolvers that are not registered are skipped at lookup.
    static const std::map<EntityType, std::vector<std::string>>& standard_cascades();
    static const std::vector<std::string>& standard_default_cascade();

    std::vector<const DictionaryResolver*> cascade(EntityType type) const;
    const DictionaryResolver* find(std::string_view name) const;
    std::vector<const DictionaryResolver*> resolvers() const;

private:
    std::map<std::string, DictionaryResolver, std::less<>> resolvers_;
    std::optional<std::map<EntityType, std::vector<std::string>>> cascades_;
    std::optional<std::vector<std::string>> default_cascade_;
};

/// Walks the cascade for `type`; the first resolver with a match wins,
/// otherwise the raw fallback key is used. Inputs that already are a key
/// of this registry (an ontology id in the cascade, or a raw key) map to
/// themselves, which makes normalization idempotent on keys.
NormalizedEntity normalize_entity(std::string_view name, EntityType type, const ResolverRegistry& registry);

} // namespace litmine
