#include "litmine/resolver.hpp"

#include <fstream>

#include <fmt/format.h>
#include <json.hpp>

#include "litmine/errors.hpp"
#include "litmine/text.hpp"

namespace litmine {

namespace {

constexpr std::string_view kModule = "entity_tags";

NormalizedEntity from_entry(const OntologyEntry& e)
{
    return {e.ontology_id, e.entity_type, e.preferred_name};
}

} // namespace

std::string raw_key(std::string_view name) { return std::string(kRawKeyPrefix) + text::to_lower(name); }

DictionaryResolver::DictionaryResolver(std::string name, std::vector<OntologyEntry> entries)
    : name_(std::move(name)), entries_(std::move(entries))
{
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        if (e.ontology_id.empty() || e.preferred_name.empty()) {
            throw DataError(kModule, fmt::format("resolver {}: entry #{} needs an ontology_id and preferred_name",
                                                 name_, i));
        }
        if (!by_id_.emplace(e.ontology_id, i).second) {
            throw DataError(kModule, fmt::format("resolver {}: duplicate ontology_id {}", name_, e.ontology_id));
        }
        auto index_name = [&](const std::string& n) {
            auto& slot = by_name_[text::to_lower(n)];
            if (slot.empty() || slot.back() != i) {
                slot.push_back(i);
            }
        };
        index_name(e.preferred_name);
        for (const auto& s : e.synonyms) {
            index_name(s);
        }
    }
}

DictionaryResolver DictionaryResolver::load(std::string name, const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError(kModule, "cannot open resolver dictionary " + path.string());
    }
    std::vector<OntologyEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            auto j = nlohmann::json::parse(line);
            OntologyEntry e;
            e.ontology_id = j.at("ontology_id").get<std::string>();
            e.preferred_name = j.at("preferred_name").get<std::string>();
            if (j.contains("synonyms")) {
                e.synonyms = j.at("synonyms").get<std::vector<std::string>>();
            }
            e.entity_type = entity_type_from_string(j.at("entity_type").get<std::string>());
            entries.push_back(std::move(e));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(kModule, fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
        } catch (const DataError& e) {
            throw DataError(kModule, fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
        }
    }
    return DictionaryResolver(std::move(name), std::move(entries));
}

const OntologyEntry* DictionaryResolver::lookup(std::string_view name, EntityType type) const
{
    auto it = by_name_.find(text::to_lower(name));
    if (it == by_name_.end()) {
        return nullptr;
    }
    for (auto i : it->second) {
        if (entries_[i].entity_type == type) {
            return &entries_[i];
        }
    }
    return nullptr;
}

std::vector<const OntologyEntry*> DictionaryResolver::lookup_any(std::string_view name) const
{
    std::vector<const OntologyEntry*> out;
    if (auto it = by_name_.find(text::to_lower(name)); it != by_name_.end()) {
        for (auto i : it->second) {
            out.push_back(&entries_[i]);
        }
    }
    return out;
}

const OntologyEntry* DictionaryResolver::find_id(std::string_view ontology_id) const
{
    auto it = by_id_.find(std::string(ontology_id));
    return it == by_id_.end() ? nullptr : &entries_[it->second];
}

void ResolverRegistry::add(DictionaryResolver resolver)
{
    auto name = resolver.name();
    if (!resolvers_.emplace(name, std::move(resolver)).second) {
        throw ConfigError(kModule, "duplicate resolver name " + name);
    }
}

void ResolverRegistry::set_cascade(EntityType type, std::vector<std::string> resolver_names)
{
    for (const auto& n : resolver_names) {
        if (!find(n)) {
            throw ConfigError(kModule, fmt::format("cascade for {} names unknown resolver {}", to_string(type), n));
        }
    }
    if (!cascades_) {
        cascades_.emplace();
    }
    (*cascades_)[type] = std::move(resolver_names);
}

void ResolverRegistry::set_default_cascade(std::vector<std::string> resolver_names)
{
    for (const auto& n : resolver_names) {
        if (!find(n)) {
            throw ConfigError(kModule, "default cascade names unknown resolver " + n);
        }
    }
    default_cascade_ = std::move(resolver_names);
}

const std::map<EntityType, std::vector<std::string>>& ResolverRegistry::standard_cascades()
{
    static const std::map<EntityType, std::vector<std::string>> cascades = {
        {EntityType::SmallMolecule, {"opsin", "drugbank", "chebi", "pubchem"}},
        {EntityType::SmallMoleculeClass, {"chebi"}},
        {EntityType::Organism, {"ncbi_taxonomy"}},
        {EntityType::Protein, {"uniprot"}},
        {EntityType::Gene, {"ncbi_gene"}},
    };
    return cascades;
}

const std::vector<std::string>& ResolverRegistry::standard_default_cascade()
{
    static const std::vector<std::string> cascade = {"umls"};
    return cascade;
}

std::vector<const DictionaryResolver*> ResolverRegistry::cascade(EntityType type) const
{
    const auto& table = cascades_ ? *cascades_ : standard_cascades();
    const std::vector<std::string>* names = nullptr;
    if (auto it = table.find(type); it != table.end()) {
        names = &it->second;
    } else {
        names = default_cascade_ ? &*default_cascade_ : &standard_default_cascade();
    }
    std::vector<const DictionaryResolver*> out;
    for (const auto& n : *names) {
        if (const auto* r = find(n)) {
            out.push_back(r);
        }
    }
    return out;
}

const DictionaryResolver* ResolverRegistry::find(std::string_view name) const
{
    auto it = resolvers_.find(name);
    return it == resolvers_.end() ? nullptr : &it->second;
}

std::vector<const DictionaryResolver*> ResolverRegistry::resolvers() const
{
    std::vector<const DictionaryResolver*> out;
    for (const auto& [_, r] : resolvers_) {
        out.push_back(&r);
    }
    return out;
}

NormalizedEntity normalize_entity(std::string_view name, EntityType type, const ResolverRegistry& registry)
{
    if (name.starts_with(kRawKeyPrefix)) {
        return {text::to_lower(name), type, std::string(name.substr(kRawKeyPrefix.size()))};
    }
    const auto cascade = registry.cascade(type);
    for (const auto* r : cascade) {
        if (const auto* e = r->find_id(name); e && e->entity_type == type) {
            return from_entry(*e);
        }
    }
    for (const auto* r : cascade) {
        if (const auto* e = r->lookup(name, type)) {
            return from_entry(*e);
        }
    }
    return {raw_key(name), type, std::string(name)};
}

} // namespace litmine
