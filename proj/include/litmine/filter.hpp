#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "litmine/entity_index.hpp"
#include "litmine/entity_types.hpp"
#include "litmine/postings.hpp"

namespace litmine {

inline constexpr char kNegationMarker = '!';

/// One CNF literal. `type` is set when `name` is one of the closed entity
/// type names; otherwise `name` is an entity name expanded at evaluation.
struct Literal {
    std::string name;
    bool negated = false;
    std::optional<EntityType> type;

    /// Literal spelled as in a spec, including the negation marker.
    std::string spelling() const { return negated ? std::string(1, kNegationMarker) + name : name; }

    friend bool operator==(const Literal&, const Literal&) = default;
};

Literal parse_literal(std::string_view spelling);

/// CNF entity constraint (AND of OR-groups) plus the re-ranking query.
struct FilterSpec {
    std::vector<std::vector<Literal>> entity_groups;
    std::string semantic_query;

    friend bool operator==(const FilterSpec&, const FilterSpec&) = default;
};

struct Probe {
    std::string probe_id;
    FilterSpec spec;

    friend bool operator==(const Probe&, const Probe&) = default;
};

/// Parses `{"entity_groups": [[...]], "semantic_query": "..."}`. Errors are
/// ConfigError with a JSON-pointer location.
FilterSpec parse_filter_spec(std::string_view text);
FilterSpec filter_spec_from_json(const nlohmann::json& j, std::string_view location = "");
nlohmann::json to_json(const FilterSpec& spec);

/// JSON array of {probe_id, spec}. Probe ids must be unique.
std::vector<Probe> parse_probe_set(std::string_view text);
std::vector<Probe> probe_set_from_json(const nlohmann::json& j, std::string_view location = "");
nlohmann::json to_json(const Probe& probe);
nlohmann::json to_json(const std::vector<Probe>& probes);

struct FilterResult {
    DenseBitset windows;
    /// Name literals that matched no indexed entity.
    std::vector<std::string> warnings;
};

/// Intersection over groups of the union of each group's literal sets.
/// Negated literals contribute the complement within the indexed windows.
FilterResult evaluate_filter(const FilterSpec& spec, const EntityIndex& index);

} // namespace litmine
