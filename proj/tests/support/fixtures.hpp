#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "litmine/corpus.hpp"
#include "litmine/embedding.hpp"
#include "litmine/entity_index.hpp"
#include "litmine/filter.hpp"
#include "litmine/oracle.hpp"
#include "litmine/postings.hpp"
#include "litmine/resolver.hpp"
#include "litmine/rng.hpp"
#include "litmine/search.hpp"
#include "litmine/tags.hpp"

namespace litmine::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(std::string_view name) const { return path_ / std::string(name); }

private:
    std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, std::string_view content);
void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& rows);
std::string read_text(const std::filesystem::path& path);

Document make_document(std::string doc_id, std::vector<std::string> paragraphs);
nlohmann::json document_json(const Document& doc);
nlohmann::json tag_json(const EntityTag& tag);

EntityTag make_tag(std::string doc_id, std::size_t start, std::size_t count, std::string name, EntityType type,
                   std::vector<std::size_t> paragraphs = {});

/// Corpus, tags and everything needed to search it, owned together.
struct Fixture {
    Corpus corpus;
    ResolverRegistry resolvers;
    TagStore tags;
    EntityIndex index;
    HashingEmbedder embedder;
    EmbeddingTable embeddings;

    SearchContext search() const { return {corpus, index, embeddings, embedder}; }
};

std::unique_ptr<Fixture> make_fixture(std::vector<Document> docs, const std::vector<EntityTag>& tags,
                                      ResolverRegistry resolvers = {}, WindowingConfig windowing = {});

/// Random documents and tags with unresolved (raw-keyed) entity names.
struct RandomTagCorpus {
    std::vector<Document> docs;
    std::vector<EntityTag> tags;
    /// Canonical name -> synonyms used by its tags.
    std::map<std::string, std::vector<std::string>> names;
};

RandomTagCorpus random_tag_corpus(Rng& rng, std::size_t max_windows, std::size_t max_entities);

/// Random CNF over the corpus's names, their synonyms (with case changes),
/// entity type names and names that match nothing; about a quarter of the
/// literals are negated. May produce zero groups.
FilterSpec random_spec(Rng& rng, const RandomTagCorpus& rc);

/// Per-window predicate evaluated straight from the tag list, without the
/// index: a window matches iff every group has a satisfied literal.
std::vector<bool> brute_force_filter(const FilterSpec& spec, const Corpus& corpus, std::span<const EntityTag> tags);

std::vector<bool> to_bools(const DenseBitset& bits);

/// Planted corpus for probe-loop runs: single-window documents, some
/// relevant to a brain-penetration task.
struct PlantedLoopCorpus {
    std::vector<Document> docs;
    std::vector<EntityTag> tags;
    std::set<std::string> relevant_docs;
};

PlantedLoopCorpus planted_loop_corpus();

/// Validator answering from a relevant-document set; the schema-stage
/// score_extraction kind always passes.
CallbackOracle ground_truth_validator(const std::set<std::string>& relevant_docs);

/// Standard normal draw (Box-Muller).
double normal(Rng& rng);

/// Two-sided one-sample Kolmogorov-Smirnov p-value of `xs` against U(0, 1),
/// from the asymptotic distribution with Stephens' small-sample correction.
double ks_uniform_p(std::vector<double> xs);

/// File path -> contents for every regular file under `dir`.
std::map<std::string, std::string> snapshot_directory(const std::filesystem::path& dir);

} // namespace litmine::testing
