#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <fmt/format.h>

#include "litmine/entity_types.hpp"
#include "litmine/text.hpp"

namespace litmine::testing {

namespace fs = std::filesystem;
using nlohmann::json;

TempDir::TempDir()
{
    static std::atomic<int> counter{0};
    auto base = fs::temp_directory_path();
    for (;;) {
        auto candidate = base / fmt::format("litmine-test-{}-{}", ::getpid(), counter++);
        if (fs::create_directory(candidate)) {
            path_ = candidate;
            break;
        }
    }
}

TempDir::~TempDir()
{
    std::error_code ec;
    fs::remove_all(path_, ec);
}

void write_text(const fs::path& path, std::string_view content)
{
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

void write_jsonl(const fs::path& path, const std::vector<json>& rows)
{
    std::string body;
    for (const auto& r : rows) {
        body += r.dump() + "\n";
    }
    write_text(path, body);
}

std::string read_text(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Document make_document(std::string doc_id, std::vector<std::string> paragraphs)
{
    Document d;
    d.doc_id = std::move(doc_id);
    d.paragraphs = std::move(paragraphs);
    return d;
}

json document_json(const Document& doc)
{
    json j = {{"doc_id", doc.doc_id}, {"paragraphs", doc.paragraphs}};
    if (!doc.metadata.empty()) {
        j["metadata"] = doc.metadata;
    }
    return j;
}

json tag_json(const EntityTag& tag)
{
    json j = {{"doc_id", tag.doc_id},
              {"start_para", tag.start_para},
              {"para_count", tag.para_count},
              {"canonical_name", tag.canonical_name},
              {"entity_type", std::string(to_string(tag.entity_type))},
              {"synonyms", tag.synonyms},
              {"surface_forms", tag.surface_forms}};
    if (!tag.paragraph_indices.empty()) {
        j["paragraph_indices"] = tag.paragraph_indices;
    }
    return j;
}

EntityTag make_tag(std::string doc_id, std::size_t start, std::size_t count, std::string name, EntityType type,
                   std::vector<std::size_t> paragraphs)
{
    EntityTag t;
    t.doc_id = std::move(doc_id);
    t.start_para = start;
    t.para_count = count;
    t.surface_forms = {name};
    t.canonical_name = std::move(name);
    t.entity_type = type;
    t.paragraph_indices = std::move(paragraphs);
    return t;
}

std::unique_ptr<Fixture> make_fixture(std::vector<Document> docs, const std::vector<EntityTag>& tags,
                                      ResolverRegistry resolvers, WindowingConfig windowing)
{
    auto corpus = Corpus::from_documents(std::move(docs), windowing);
    auto store = TagStore::build(tags, corpus, resolvers);
    auto index = EntityIndex::build(store, resolvers);
    HashingEmbedder embedder;
    auto table = EmbeddingTable::build(corpus, embedder, 1);
    return std::unique_ptr<Fixture>(new Fixture{std::move(corpus), std::move(resolvers), std::move(store),
                                                std::move(index), embedder, std::move(table)});
}

namespace {

std::size_t window_count_for(std::size_t paragraphs)
{
    return 1 + (paragraphs > 5 ? (paragraphs - 5 + 1) / 2 : 0);
}

const std::vector<std::string> kWords = {"kinase", "binding", "assay", "mouse", "dose", "plasma",
                                         "neuron", "receptor", "inhibitor", "cell", "tumor", "brain"};

std::string random_case(Rng& rng, const std::string& s)
{
    std::string out = s;
    for (auto& c : out) {
        if (rng.below(2) == 0) {
            c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        }
    }
    return out;
}

} // namespace

RandomTagCorpus random_tag_corpus(Rng& rng, std::size_t max_windows, std::size_t max_entities)
{
    RandomTagCorpus rc;
    const std::size_t target = 1 + rng.below(max_windows);
    const std::size_t n_entities = 1 + rng.below(max_entities);

    struct Ent {
        std::string name;
        std::vector<EntityType> types;
        std::vector<std::string> synonyms;
    };
    std::vector<Ent> ents;
    for (std::size_t e = 0; e < n_entities; ++e) {
        Ent ent;
        ent.name = fmt::format("Ent{}", e);
        ent.types.push_back(all_entity_types()[rng.below(kEntityTypeCount)]);
        if (rng.below(10) == 0) {
            ent.types.push_back(all_entity_types()[rng.below(kEntityTypeCount)]);
        }
        if (rng.below(2) == 0) {
            ent.synonyms.push_back(fmt::format("syn{}", e));
        }
        rc.names[ent.name] = ent.synonyms;
        ents.push_back(std::move(ent));
    }

    std::size_t windows = 0;
    for (std::size_t d = 0; windows < target; ++d) {
        std::size_t n_paras = 1 + rng.below(15);
        while (windows + window_count_for(n_paras) > target && n_paras > 1) {
            --n_paras;
        }
        windows += window_count_for(n_paras);
        std::vector<std::string> paras;
        for (std::size_t p = 0; p < n_paras; ++p) {
            paras.push_back(fmt::format("{} {} {}", kWords[rng.below(kWords.size())],
                                        kWords[rng.below(kWords.size())], p));
        }
        auto doc_id = fmt::format("d{}", d);
        rc.docs.push_back(make_document(doc_id, std::move(paras)));

        const auto n_tags = rng.below(5);
        for (std::size_t t = 0; t < n_tags; ++t) {
            const auto& ent = ents[rng.below(ents.size())];
            auto start = rng.below(n_paras);
            auto count = 1 + rng.below(n_paras - start);
            std::vector<std::size_t> idx;
            if (rng.below(2) == 0) {
                for (std::size_t p = start; p < start + count; ++p) {
                    if (rng.below(3) == 0) {
                        idx.push_back(p);
                    }
                }
            }
            auto tag = make_tag(doc_id, start, count, ent.name, ent.types[rng.below(ent.types.size())], idx);
            tag.synonyms = ent.synonyms;
            tag.surface_forms = {fmt::format("{} mention", text::to_lower(ent.name))};
            rc.tags.push_back(std::move(tag));
        }
    }
    return rc;
}

FilterSpec random_spec(Rng& rng, const RandomTagCorpus& rc)
{
    std::vector<std::string> names;
    for (const auto& [n, _] : rc.names) {
        names.push_back(n);
    }
    FilterSpec spec;
    spec.semantic_query = "kinase inhibitor";
    const auto n_groups = rng.below(5);
    for (std::size_t g = 0; g < n_groups; ++g) {
        std::vector<Literal> group;
        const auto n_lits = 1 + rng.below(4);
        for (std::size_t l = 0; l < n_lits; ++l) {
            std::string spelling;
            const auto kind = rng.below(20);
            const auto& name = names[rng.below(names.size())];
            if (kind < 7) {
                spelling = random_case(rng, name);
            } else if (kind < 10) {
                const auto& syns = rc.names.at(name);
                spelling = syns.empty() ? name : random_case(rng, syns.front());
            } else if (kind < 12) {
                spelling = text::to_lower(name) + " mention";
            } else if (kind < 16) {
                spelling = std::string(to_string(all_entity_types()[rng.below(kEntityTypeCount)]));
            } else if (kind < 18) {
                spelling = fmt::format("nothing{}", rng.below(5));
            } else {
                spelling = "raw:" + text::to_lower(name);
            }
            if (rng.below(4) == 0) {
                spelling = "!" + spelling;
            }
            group.push_back(parse_literal(spelling));
        }
        spec.entity_groups.push_back(std::move(group));
    }
    return spec;
}

std::vector<bool> brute_force_filter(const FilterSpec& spec, const Corpus& corpus, std::span<const EntityTag> tags)
{
    // Covered absolute paragraphs of each tag.
    auto tag_paras = [](const EntityTag& t) {
        std::vector<std::size_t> ps = t.paragraph_indices;
        if (ps.empty()) {
            for (std::size_t p = t.start_para; p < t.start_para + t.para_count; ++p) {
                ps.push_back(p);
            }
        }
        return ps;
    };
    auto lower = [](std::string s) {
        for (auto& c : s) {
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
        return s;
    };
    // Every lowercased name under which each raw key is known.
    std::map<std::string, std::set<std::string>> key_names;
    for (const auto& t : tags) {
        auto key = "raw:" + lower(t.canonical_name);
        key_names[key].insert(lower(t.canonical_name));
        for (const auto& s : t.synonyms) {
            key_names[key].insert(lower(s));
        }
        for (const auto& s : t.surface_forms) {
            key_names[key].insert(lower(s));
        }
    }
    auto tag_matches = [&](const EntityTag& t, const Literal& lit) {
        if (auto ty = parse_entity_type(lit.name)) {
            return t.entity_type == *ty;
        }
        auto key = "raw:" + lower(t.canonical_name);
        return key_names[key].count(lower(lit.name)) > 0 || lit.name == key || "raw:" + lower(lit.name) == key;
    };

    std::vector<bool> out(corpus.window_count(), false);
    for (std::size_t w = 0; w < corpus.window_count(); ++w) {
        const auto& win = corpus.windows()[w];
        std::vector<const EntityTag*> here;
        for (const auto& t : tags) {
            if (t.doc_id != win.doc_id) {
                continue;
            }
            for (auto p : tag_paras(t)) {
                if (p >= win.start_para && p < win.start_para + win.para_count) {
                    here.push_back(&t);
                    break;
                }
            }
        }
        bool all = true;
        for (const auto& group : spec.entity_groups) {
            bool any = false;
            for (const auto& lit : group) {
                bool present = std::any_of(here.begin(), here.end(), [&](const EntityTag* t) { return tag_matches(*t, lit); });
                if (present != lit.negated) {
                    any = true;
                    break;
                }
            }
            if (!any) {
                all = false;
                break;
            }
        }
        out[w] = all;
    }
    return out;
}

std::vector<bool> to_bools(const DenseBitset& bits)
{
    std::vector<bool> out(bits.size(), false);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        out[i] = bits.test(static_cast<std::uint32_t>(i));
    }
    return out;
}

PlantedLoopCorpus planted_loop_corpus()
{
    PlantedLoopCorpus pc;
    auto add = [&](std::string id, std::vector<std::string> paras) {
        pc.docs.push_back(make_document(std::move(id), std::move(paras)));
    };
    for (int i = 0; i < 100; ++i) {
        auto id = fmt::format("bbb{:03}", i);
        auto cmpd = fmt::format("cmpd{}", i);
        add(id, {fmt::format("{} crossed the blood-brain barrier with high brain penetration.", cmpd),
                 "Brain-to-plasma ratio and logBB were measured in rats.", "Methods were standard."});
        pc.tags.push_back(make_tag(id, 0, 2, cmpd, EntityType::SmallMolecule));
        pc.tags.push_back(make_tag(id, 0, 1, "blood-brain barrier", EntityType::Anatomy));
        pc.relevant_docs.insert(id);
    }
    for (int i = 0; i < 20; ++i) {
        auto id = fmt::format("csf{:03}", i);
        auto cmpd = fmt::format("csfcmpd{}", i);
        add(id, {fmt::format("{} reached the cerebrospinal fluid, evidence of brain penetration.", cmpd),
                 "CSF concentration and permeability were reported.", "Methods were standard."});
        pc.tags.push_back(make_tag(id, 0, 2, cmpd, EntityType::SmallMolecule));
        pc.tags.push_back(make_tag(id, 0, 1, "cerebrospinal fluid", EntityType::Anatomy));
        pc.relevant_docs.insert(id);
    }
    for (int i = 0; i < 150; ++i) {
        auto id = fmt::format("mol{:03}", i);
        auto cmpd = fmt::format("molcmpd{}", i);
        add(id, {fmt::format("{} synthesis yield and aqueous solubility.", cmpd), "Crystals were obtained.",
                 "Methods were standard."});
        pc.tags.push_back(make_tag(id, 0, 1, cmpd, EntityType::SmallMolecule));
    }
    for (int i = 0; i < 50; ++i) {
        auto id = fmt::format("anat{:03}", i);
        add(id, {"The blood-brain barrier tight junctions and endothelial transporter expression.",
                 "Histology of cortical vessels.", "Methods were standard."});
        pc.tags.push_back(make_tag(id, 0, 1, "blood-brain barrier", EntityType::Anatomy));
    }
    for (int i = 0; i < 180; ++i) {
        add(fmt::format("misc{:03}", i),
            {"Crystal structure of a kinase domain.", "Refinement statistics.", "Methods were standard."});
    }
    return pc;
}

CallbackOracle ground_truth_validator(const std::set<std::string>& relevant_docs)
{
    return CallbackOracle([relevant_docs](const OracleRequest& req) -> json {
        if (req.kind == "judge_relevance") {
            return {{"relevant", relevant_docs.count(req.payload.at("doc_id").get<std::string>()) > 0}};
        }
        return {{"pass", true}};
    });
}

double normal(Rng& rng)
{
    double u = 0.0;
    while (u == 0.0) {
        u = rng.uniform01();
    }
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * rng.uniform01());
}

double ks_uniform_p(std::vector<double> xs)
{
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - xs[i], xs[i] - static_cast<double>(i) / n});
    }
    const double root = std::sqrt(n);
    const double lambda = (root + 0.12 + 0.11 / root) * d;
    if (lambda < 0.3) {
        return 1.0;
    }
    double p = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        p += (k % 2 ? 2.0 : -2.0) * term;
        if (term < 1e-12) {
            break;
        }
    }
    return std::clamp(p, 0.0, 1.0);
}

std::map<std::string, std::string> snapshot_directory(const fs::path& dir)
{
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) {
            out[fs::relative(e.path(), dir).generic_string()] = read_text(e.path());
        }
    }
    return out;
}

} // namespace litmine::testing
