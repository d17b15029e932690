#include <catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "litmine/errors.hpp"
#include "litmine/filter.hpp"

using namespace litmine;
using namespace litmine::testing;

namespace {

std::string error_of(std::string_view text)
{
    try {
        parse_filter_spec(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

std::unique_ptr<Fixture> small_fixture()
{
    std::vector<Document> docs{make_document("a", {"aspirin crosses the blood-brain barrier"}),
                               make_document("b", {"caffeine in cerebrospinal fluid"}),
                               make_document("c", {"unrelated text"})};
    std::vector<EntityTag> tags{make_tag("a", 0, 1, "aspirin", EntityType::SmallMolecule),
                                make_tag("a", 0, 1, "blood-brain barrier", EntityType::Anatomy),
                                make_tag("b", 0, 1, "caffeine", EntityType::SmallMolecule),
                                make_tag("b", 0, 1, "cerebrospinal fluid", EntityType::Anatomy)};
    return make_fixture(docs, tags);
}

} // namespace

TEST_CASE("a two-group spec parses with its query")
{
    auto spec = parse_filter_spec(R"({"entity_groups": [["SmallMolecule"], ["blood-brain barrier", "cerebrospinal fluid"]],
                                     "semantic_query": "brain penetration"})");
    REQUIRE(spec.entity_groups.size() == 2);
    CHECK(spec.entity_groups[0][0].type == EntityType::SmallMolecule);
    CHECK_FALSE(spec.entity_groups[1][0].type);
    CHECK(spec.entity_groups[1][1].name == "cerebrospinal fluid");
    CHECK(spec.semantic_query == "brain penetration");
    CHECK(filter_spec_from_json(to_json(spec)) == spec);
}

TEST_CASE("negation prefix")
{
    auto lit = parse_literal("!Disease");
    CHECK(lit.negated);
    CHECK(lit.type == EntityType::Disease);
    CHECK(lit.spelling() == "!Disease");
    CHECK_THROWS_AS(parse_literal("!"), ConfigError);
    CHECK_THROWS_AS(parse_literal(""), ConfigError);
}

TEST_CASE("parse errors carry a location")
{
    CHECK(error_of(R"({"entity_groups": [[""]], "semantic_query": "q"})").find("/entity_groups/0/0") !=
          std::string::npos);
    CHECK(error_of(R"({"entity_groups": [[]], "semantic_query": "q"})").find("/entity_groups/0") != std::string::npos);
    CHECK(error_of(R"({"entity_groups": [], "semantic_query": ""})").find("semantic_query") != std::string::npos);
    CHECK(error_of(R"({"entity_groups": [], "semantic_query": "q", "extra": 1})").find("extra") != std::string::npos);
    CHECK_FALSE(error_of(R"({"entity_groups": [[1]], "semantic_query": "q"})").empty());
    CHECK_FALSE(error_of("{not json").empty());
}

TEST_CASE("probe sets need unique ids")
{
    auto ok = parse_probe_set(R"([{"probe_id":"p1","spec":{"entity_groups":[],"semantic_query":"q"}}])");
    CHECK(ok.size() == 1);
    CHECK_THROWS_AS(parse_probe_set(R"([{"probe_id":"p1","spec":{"entity_groups":[],"semantic_query":"q"}},
                                        {"probe_id":"p1","spec":{"entity_groups":[],"semantic_query":"q"}}])"),
                    ConfigError);
}

TEST_CASE("basic CNF semantics")
{
    auto fx = small_fixture();
    auto eval = [&](const std::string& json_groups) {
        auto spec = parse_filter_spec(R"({"entity_groups": )" + json_groups + R"(, "semantic_query": "q"})");
        return evaluate_filter(spec, fx->index);
    };
    CHECK(eval("[]").windows.count() == 3);
    CHECK(eval(R"([["SmallMolecule"]])").windows == fx->index.type_postings(EntityType::SmallMolecule).to_bitset(3));
    CHECK(eval(R"([["aspirin"], ["!aspirin"]])").windows.empty());
    CHECK(eval(R"([["SmallMolecule"], ["blood-brain barrier", "cerebrospinal fluid"]])").windows.count() == 2);
    CHECK(eval(R"([["SmallMolecule"], ["blood-brain barrier"]])").windows.to_vector() ==
          std::vector<std::uint32_t>{0});
    CHECK(eval(R"([["!SmallMolecule"]])").windows.to_vector() == std::vector<std::uint32_t>{2});

    auto unknown = eval(R"([["unobtainium"]])");
    CHECK(unknown.windows.empty());
    REQUIRE(unknown.warnings.size() == 1);
    CHECK(unknown.warnings[0].find("unobtainium") != std::string::npos);
}

TEST_CASE("filter evaluation equals a brute-force predicate on random corpora")
{
    Rng rng(2024);
    for (int trial = 0; trial < 60; ++trial) {
        auto rc = random_tag_corpus(rng, 200, 12);
        auto fx = make_fixture(rc.docs, rc.tags);
        for (int s = 0; s < 10; ++s) {
            auto spec = random_spec(rng, rc);
            auto got = to_bools(evaluate_filter(spec, fx->index).windows);
            auto expected = brute_force_filter(spec, fx->corpus, rc.tags);
            REQUIRE(got == expected);
        }
    }
}

TEST_CASE("a type literal behaves as the union of its entities")
{
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        auto rc = random_tag_corpus(rng, 150, 10);
        auto fx = make_fixture(rc.docs, rc.tags);
        for (auto type : all_entity_types()) {
            FilterSpec by_type{{{parse_literal(std::string(to_string(type)))}}, "q"};
            std::vector<Literal> names;
            for (const auto& e : fx->tags.entities()) {
                if (e.normalized.entity_type == type) {
                    // Exact keys select only that key's windows of any type, so
                    // compare against windows attached to entities of this type.
                    names.push_back(parse_literal(e.normalized.entity_key));
                }
            }
            auto typed = evaluate_filter(by_type, fx->index).windows;
            DenseBitset expected(fx->corpus.window_count());
            for (auto [w, e] : fx->tags.attachments()) {
                if (fx->tags.entities()[e].normalized.entity_type == type) {
                    expected.set(w);
                }
            }
            CHECK(typed == expected);
            if (!names.empty()) {
                FilterSpec by_names{{names}, "q"};
                auto named = evaluate_filter(by_names, fx->index).windows;
                // Names may also carry other types, so the union can only be larger.
                auto both = named;
                both &= typed;
                CHECK(both == typed);
            }
        }
    }
}
