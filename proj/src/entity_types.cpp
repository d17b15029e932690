#include "litmine/entity_types.hpp"

#include <string>

#include "litmine/errors.hpp"

namespace litmine {

namespace {

constexpr std::array<std::string_view, kEntityTypeCount> kNames = {
    "Anatomy",   "Antibody",    "Assay/Result", "CellLine", "CellType",           "ClinicalTrial", "Disease",
    "Gene",      "GeneVariant", "GOTerm",       "Organism", "Pathway",            "Peptide",       "Phenotype",
    "Protein",   "Protein/GeneFamily",          "RNA",      "SmallMolecule",      "SmallMoleculeClass",
};

} // namespace

const std::array<EntityType, kEntityTypeCount>& all_entity_types()
{
    static const auto types = [] {
        std::array<EntityType, kEntityTypeCount> out{};
        for (std::size_t i = 0; i < kEntityTypeCount; ++i) {
            out[i] = static_cast<EntityType>(i);
        }
        return out;
    }();
    return types;
}

std::string_view to_string(EntityType type) { return kNames.at(static_cast<std::size_t>(type)); }

std::optional<EntityType> parse_entity_type(std::string_view name)
{
    for (std::size_t i = 0; i < kNames.size(); ++i) {
        if (kNames[i] == name) {
            return static_cast<EntityType>(i);
        }
    }
    return std::nullopt;
}

EntityType entity_type_from_string(std::string_view name)
{
    if (auto t = parse_entity_type(name)) {
        return *t;
    }
    throw DataError("entity_tags", "unknown entity type '" + std::string(name) + "'");
}

} // namespace litmine
