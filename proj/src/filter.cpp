#include "litmine/filter.hpp"

#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "litmine/errors.hpp"

namespace litmine {

namespace {

constexpr std::string_view kModule = "filter_engine";

[[noreturn]] void fail(std::string_view location, std::string_view why)
{
    throw ConfigError(kModule, fmt::format("{}: {}", location.empty() ? "/" : location, why));
}

} // namespace

Literal parse_literal(std::string_view spelling)
{
    Literal lit;
    if (!spelling.empty() && spelling.front() == kNegationMarker) {
        lit.negated = true;
        spelling.remove_prefix(1);
    }
    if (spelling.empty()) {
        throw ConfigError(kModule, "empty literal");
    }
    lit.name = std::string(spelling);
    lit.type = parse_entity_type(spelling);
    return lit;
}

FilterSpec filter_spec_from_json(const nlohmann::json& j, std::string_view location)
{
    const std::string loc(location);
    if (!j.is_object()) {
        fail(loc, "filter spec must be a JSON object");
    }
    for (const auto& [key, _] : j.items()) {
        if (key != "entity_groups" && key != "semantic_query") {
            fail(loc + "/" + key, "unknown field");
        }
    }
    FilterSpec spec;
    auto groups = j.find("entity_groups");
    if (groups == j.end()) {
        fail(loc + "/entity_groups", "missing field");
    }
    if (!groups->is_array()) {
        fail(loc + "/entity_groups", "must be an array of arrays");
    }
    for (std::size_t g = 0; g < groups->size(); ++g) {
        const auto& group = (*groups)[g];
        const auto gloc = fmt::format("{}/entity_groups/{}", loc, g);
        if (!group.is_array()) {
            fail(gloc, "group must be an array");
        }
        if (group.empty()) {
            fail(gloc, "empty group");
        }
        std::vector<Literal> literals;
        for (std::size_t i = 0; i < group.size(); ++i) {
            const auto lloc = fmt::format("{}/{}", gloc, i);
            if (!group[i].is_string()) {
                fail(lloc, "literal must be a string");
            }
            const auto& s = group[i].get_ref<const std::string&>();
            if (s.empty() || s == std::string(1, kNegationMarker)) {
                fail(lloc, "empty literal");
            }
            literals.push_back(parse_literal(s));
        }
        spec.entity_groups.push_back(std::move(literals));
    }
    auto query = j.find("semantic_query");
    if (query == j.end()) {
        fail(loc + "/semantic_query", "missing field");
    }
    if (!query->is_string() || query->get_ref<const std::string&>().empty()) {
        fail(loc + "/semantic_query", "must be a non-empty string");
    }
    spec.semantic_query = query->get<std::string>();
    return spec;
}

FilterSpec parse_filter_spec(std::string_view text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(kModule, fmt::format("byte {}: {}", e.byte, e.what()));
    }
    return filter_spec_from_json(j);
}

nlohmann::json to_json(const FilterSpec& spec)
{
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& g : spec.entity_groups) {
        nlohmann::json group = nlohmann::json::array();
        for (const auto& lit : g) {
            group.push_back(lit.spelling());
        }
        groups.push_back(std::move(group));
    }
    return {{"entity_groups", std::move(groups)}, {"semantic_query", spec.semantic_query}};
}

std::vector<Probe> probe_set_from_json(const nlohmann::json& j, std::string_view location)
{
    const std::string loc(location);
    if (!j.is_array()) {
        fail(loc, "probe set must be a JSON array");
    }
    std::vector<Probe> probes;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto ploc = fmt::format("{}/{}", loc, i);
        const auto& p = j[i];
        if (!p.is_object()) {
            fail(ploc, "probe must be an object");
        }
        for (const auto& [key, _] : p.items()) {
            if (key != "probe_id" && key != "spec") {
                fail(ploc + "/" + key, "unknown field");
            }
        }
        if (!p.contains("probe_id") || !p["probe_id"].is_string() || p["probe_id"].get_ref<const std::string&>().empty()) {
            fail(ploc + "/probe_id", "must be a non-empty string");
        }
        if (!p.contains("spec")) {
            fail(ploc + "/spec", "missing field");
        }
        Probe probe{p["probe_id"].get<std::string>(), filter_spec_from_json(p["spec"], ploc + "/spec")};
        if (!seen.insert(probe.probe_id).second) {
            fail(ploc + "/probe_id", "duplicate probe_id " + probe.probe_id);
        }
        probes.push_back(std::move(probe));
    }
    return probes;
}

std::vector<Probe> parse_probe_set(std::string_view text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(kModule, fmt::format("byte {}: {}", e.byte, e.what()));
    }
    return probe_set_from_json(j);
}

nlohmann::json to_json(const Probe& probe) { return {{"probe_id", probe.probe_id}, {"spec", to_json(probe.spec)}}; }

nlohmann::json to_json(const std::vector<Probe>& probes)
{
    nlohmann::json out = nlohmann::json::array();
    for (const auto& p : probes) {
        out.push_back(to_json(p));
    }
    return out;
}

FilterResult evaluate_filter(const FilterSpec& spec, const EntityIndex& index)
{
    const std::size_t universe = index.universe();
    FilterResult result{DenseBitset(universe, true), {}};
    DenseBitset group_set(universe);
    DenseBitset scratch(universe);

    for (const auto& group : spec.entity_groups) {
        group_set.reset_all();
        for (const auto& lit : group) {
            scratch.reset_all();
            if (lit.type) {
                index.type_postings(*lit.type).or_into(scratch);
            } else {
                auto keys = index.expand_name(lit.name);
                if (keys.empty()) {
                    result.warnings.push_back(fmt::format("literal '{}' matches no indexed entity", lit.name));
                    spdlog::warn("{}: {}", kModule, result.warnings.back());
                }
                for (const auto& key : keys) {
                    index.find_key(key)->or_into(scratch);
                }
            }
            if (lit.negated) {
                scratch.flip();
            }
            group_set |= scratch;
        }
        result.windows &= group_set;
    }
    return result;
}

} // namespace litmine
