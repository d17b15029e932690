#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace litmine {

/// The closed set of top-level biomedical entity types.
enum class EntityType : unsigned char {
    Anatomy,
    Antibody,
    AssayResult,
    CellLine,
    CellType,
    ClinicalTrial,
    Disease,
    Gene,
    GeneVariant,
    GOTerm,
    Organism,
    Pathway,
    Peptide,
    Phenotype,
    Protein,
    ProteinGeneFamily,
    RNA,
    SmallMolecule,
    SmallMoleculeClass,
};

inline constexpr std::size_t kEntityTypeCount = 19;

const std::array<EntityType, kEntityTypeCount>& all_entity_types();

/// Canonical spelling, e.g. "Assay/Result".
std::string_view to_string(EntityType type);

/// Exact, case-sensitive match against the canonical spelling.
std::optional<EntityType> parse_entity_type(std::string_view name);

/// As parse_entity_type, throwing DataError for names outside the set.
EntityType entity_type_from_string(std::string_view name);

} // namespace litmine
