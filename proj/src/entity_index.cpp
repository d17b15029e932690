#include "litmine/entity_index.hpp"

#include <algorithm>

#include "litmine/text.hpp"

namespace litmine {

namespace {

Postings compress(std::vector<std::uint32_t>& ordinals)
{
    std::sort(ordinals.begin(), ordinals.end());
    ordinals.erase(std::unique(ordinals.begin(), ordinals.end()), ordinals.end());
    return Postings::from_sorted(ordinals);
}

} // namespace

EntityIndex::Builder::Builder(std::size_t universe) : universe_(universe) {}

void EntityIndex::Builder::add(WindowOrdinal window, std::string_view entity_key, EntityType type)
{
    auto it = keys_.find(std::string(entity_key));
    if (it == keys_.end()) {
        it = keys_.emplace(std::string(entity_key), std::vector<std::uint32_t>{}).first;
    }
    it->second.push_back(window);
    types_[static_cast<std::size_t>(type)].push_back(window);
}

void EntityIndex::Builder::add_alias(std::string_view name, std::string_view entity_key)
{
    aliases_[text::to_lower(name)].emplace_back(entity_key);
}

EntityIndex EntityIndex::Builder::finish() &&
{
    EntityIndex index;
    index.universe_ = universe_;
    index.by_key_.reserve(keys_.size());
    for (auto& [key, ordinals] : keys_) {
        index.by_key_.emplace(key, compress(ordinals));
    }
    for (std::size_t t = 0; t < kEntityTypeCount; ++t) {
        index.by_type_[t] = compress(types_[t]);
    }
    for (auto& [name, keys] : aliases_) {
        std::sort(keys.begin(), keys.end());
        keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    }
    index.aliases_ = std::move(aliases_);
    keys_.clear();
    return index;
}

EntityIndex EntityIndex::build(const TagStore& tags, const ResolverRegistry& resolvers)
{
    Builder builder(tags.window_count());
    const auto& entities = tags.entities();
    for (auto [window, entity] : tags.attachments()) {
        const auto& e = entities[entity].normalized;
        builder.add(window, e.entity_key, e.entity_type);
    }
    for (const auto& entity : entities) {
        const auto& key = entity.normalized.entity_key;
        builder.add_alias(entity.normalized.display_name, key);
        for (const auto& name : entity.names) {
            builder.add_alias(name, key);
        }
        if (!entity.normalized.resolved()) {
            continue;
        }
        for (const auto* r : resolvers.cascade(entity.normalized.entity_type)) {
            if (const auto* entry = r->find_id(key)) {
                builder.add_alias(entry->preferred_name, key);
                for (const auto& s : entry->synonyms) {
                    builder.add_alias(s, key);
                }
                break;
            }
        }
    }
    return std::move(builder).finish();
}

const Postings* EntityIndex::find_key(std::string_view entity_key) const
{
    auto it = by_key_.find(std::string(entity_key));
    return it == by_key_.end() ? nullptr : &it->second;
}

const Postings* EntityIndex::postings_for(std::string_view literal) const
{
    if (auto type = parse_entity_type(literal)) {
        return &type_postings(*type);
    }
    return find_key(literal);
}

std::vector<std::string> EntityIndex::expand_name(std::string_view name) const
{
    std::vector<std::string> out;
    if (auto it = aliases_.find(text::to_lower(name)); it != aliases_.end()) {
        out = it->second;
    }
    if (find_key(name)) {
        out.emplace_back(name);
    }
    if (auto raw = raw_key(name); find_key(raw)) {
        out.push_back(std::move(raw));
    }
    std::erase_if(out, [&](const std::string& k) { return find_key(k) == nullptr; });
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::string> EntityIndex::keys() const
{
    std::vector<std::string> out;
    out.reserve(by_key_.size());
    for (const auto& [k, _] : by_key_) {
        out.push_back(k);
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace litmine
