#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include "litmine/config.hpp"
#include "litmine/corpus.hpp"
#include "litmine/embedding.hpp"
#include "litmine/entity_index.hpp"
#include "litmine/filter.hpp"
#include "litmine/oracle.hpp"
#include "litmine/resolver.hpp"
#include "litmine/search.hpp"
#include "litmine/tags.hpp"

namespace litmine {

enum class Stage { Ingest, Index, ProbeLoop, Extract, Judge, Analyze };

inline constexpr std::array<Stage, 6> kStages = {Stage::Ingest,  Stage::Index, Stage::ProbeLoop,
                                                 Stage::Extract, Stage::Judge, Stage::Analyze};

/// Directory name of a stage, e.g. "probe_loop".
std::string_view to_string(Stage stage);
/// Accepts the directory name or its dashed form ("probe-loop").
Stage parse_stage(std::string_view name);

/// Marker file written last into a finished stage directory.
inline constexpr std::string_view kStageMarker = ".done";

/// Writes `content` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Sorted relative paths with sha256 and size for every file under `dir`
/// except the top-level manifest.json.
nlohmann::json directory_manifest(const std::filesystem::path& dir);

struct PipelineOptions {
    /// Overrides the config's output directory.
    std::optional<std::filesystem::path> run_dir;
    /// 0 picks the hardware thread count.
    std::size_t workers = 0;
    /// Bearer token for the HTTP oracle.
    std::optional<std::string> oracle_token;
};

/// Inputs loaded once per command: corpus, tags, index and embeddings.
struct Workspace {
    Corpus corpus;
    ResolverRegistry resolvers;
    TagStore tags;
    EntityIndex index;
    std::unique_ptr<Embedder> embedder;
    EmbeddingTable embeddings;

    SearchContext search() const { return {corpus, index, embeddings, *embedder}; }
};

std::unique_ptr<Workspace> load_workspace(const RunConfig& config, std::size_t workers);

class Pipeline {
public:
    Pipeline(RunConfig config, PipelineOptions options = {});
    ~Pipeline();
    Pipeline(Pipeline&&) noexcept;
    Pipeline& operator=(Pipeline&&) noexcept;

    const std::filesystem::path& run_dir() const noexcept { return run_dir_; }
    const RunConfig& config() const noexcept { return config_; }

    bool stage_done(Stage stage) const;

    /// Runs one stage. Its predecessors must be complete; an unfinished
    /// directory left by an interrupted attempt is replaced.
    void run_stage(Stage stage, const std::optional<std::string>& task = std::nullopt);

    /// Runs every stage not yet marked complete, in order, stopping after
    /// `stop_after` if given. `task` is required unless the probe loop is
    /// already done.
    void run(const std::optional<std::string>& task, std::optional<Stage> stop_after = std::nullopt);

    /// Ranked hits of an ad-hoc filter spec as {window_id, doc_id, score} lines.
    void query(const FilterSpec& spec, std::size_t top_k, std::ostream& out);

    /// Loaded on first use.
    Workspace& workspace();

private:
    Oracle& oracle();
    std::filesystem::path stage_dir(Stage stage) const { return run_dir_ / std::string(to_string(stage)); }
    void finish_stage(Stage stage);

    void do_ingest();
    void do_index();
    void do_probe_loop(const std::string& task);
    void do_extract();
    void do_judge();
    void do_analyze();

    RunConfig config_;
    PipelineOptions options_;
    std::filesystem::path run_dir_;
    std::unique_ptr<Workspace> workspace_;
    std::unique_ptr<Oracle> oracle_;
};

} // namespace litmine
