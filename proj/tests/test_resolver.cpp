#include <catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "litmine/errors.hpp"
#include "litmine/resolver.hpp"

using namespace litmine;
using namespace litmine::testing;

namespace {

ResolverRegistry two_dictionaries()
{
    ResolverRegistry reg;
    reg.add(DictionaryResolver("opsin", {{"A:1", "aspirin", {"ASA"}, EntityType::SmallMolecule}}));
    reg.add(DictionaryResolver("drugbank", {{"B:123", "Aspirin", {"acetylsalicylic acid"}, EntityType::SmallMolecule},
                                            {"B:7", "caffeine", {}, EntityType::SmallMolecule}}));
    reg.add(DictionaryResolver("umls", {{"U:9", "blood-brain barrier", {"BBB"}, EntityType::Anatomy}}));
    return reg;
}

} // namespace

TEST_CASE("cascade order decides which dictionary resolves a name")
{
    auto reg = two_dictionaries();
    auto e = normalize_entity("acetylsalicylic acid", EntityType::SmallMolecule, reg);
    CHECK(e.entity_key == "B:123");
    CHECK(e.resolved());
    // Both dictionaries know "aspirin"; the earlier one in the cascade wins.
    CHECK(normalize_entity("ASPIRIN", EntityType::SmallMolecule, reg).entity_key == "A:1");
}

TEST_CASE("unresolved names fall back to a raw key")
{
    auto reg = two_dictionaries();
    auto e = normalize_entity("Mystery Compound", EntityType::SmallMolecule, reg);
    CHECK(e.entity_key == "raw:mystery compound");
    CHECK_FALSE(e.resolved());
}

TEST_CASE("dictionary lookups respect the entity type")
{
    auto reg = two_dictionaries();
    // "BBB" is only an Anatomy synonym, and Anatomy cascades to umls.
    CHECK(normalize_entity("BBB", EntityType::Anatomy, reg).entity_key == "U:9");
    CHECK(normalize_entity("caffeine", EntityType::Protein, reg).entity_key == "raw:caffeine");
}

TEST_CASE("normalization is idempotent on keys")
{
    auto reg = two_dictionaries();
    for (std::string name : {"aspirin", "acetylsalicylic acid", "caffeine", "Unknown Thing", "BBB"}) {
        for (auto type : {EntityType::SmallMolecule, EntityType::Anatomy}) {
            auto once = normalize_entity(name, type, reg);
            auto twice = normalize_entity(once.entity_key, type, reg);
            CHECK(twice.entity_key == once.entity_key);
        }
    }
}

TEST_CASE("custom cascades must name registered resolvers")
{
    auto reg = two_dictionaries();
    CHECK_THROWS_AS(reg.set_cascade(EntityType::SmallMolecule, {"nope"}), ConfigError);
    reg.set_cascade(EntityType::SmallMolecule, {"drugbank"});
    CHECK(normalize_entity("aspirin", EntityType::SmallMolecule, reg).entity_key == "B:123");
    CHECK_THROWS_AS(reg.add(DictionaryResolver("umls", {})), ConfigError);
}

TEST_CASE("dictionary files load from JSON lines")
{
    TempDir dir;
    write_text(dir / "d.jsonl",
               R"({"ontology_id":"C:1","preferred_name":"ethanol","synonyms":["alcohol"],"entity_type":"SmallMolecule"})"
               "\n");
    auto r = DictionaryResolver::load("chebi", dir / "d.jsonl");
    REQUIRE(r.size() == 1);
    CHECK(r.lookup("Alcohol", EntityType::SmallMolecule)->ontology_id == "C:1");
    CHECK(r.lookup("alcohol", EntityType::Gene) == nullptr);

    write_text(dir / "dup.jsonl",
               R"({"ontology_id":"C:1","preferred_name":"a","entity_type":"SmallMolecule"})"
               "\n"
               R"({"ontology_id":"C:1","preferred_name":"b","entity_type":"SmallMolecule"})"
               "\n");
    CHECK_THROWS_AS(DictionaryResolver::load("x", dir / "dup.jsonl"), DataError);
}
