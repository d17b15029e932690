#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "litmine/corpus.hpp"
#include "litmine/extraction.hpp"
#include "litmine/judge.hpp"
#include "litmine/probe_loop.hpp"
#include "litmine/retry.hpp"

namespace litmine {

/// A parsed config file: `[section]` headers, `key = value` lines and `#`
/// comments. Values are double-quoted strings, integers, floats, `true` /
/// `false`, or single-line arrays of strings. Keys before the first header
/// belong to the section "".
class ConfigFile {
public:
    using Value = std::variant<std::string, std::int64_t, double, bool, std::vector<std::string>>;

    static ConfigFile parse(std::string_view text, std::string source = "<config>");
    static ConfigFile load(const std::filesystem::path& path);

    const std::string& source() const noexcept { return source_; }
    bool has(std::string_view section, std::string_view key) const;

    /// Typed lookups. Each marks the key as used; a value of the wrong type
    /// is a ConfigError naming file and line.
    std::optional<std::string> get_string(std::string_view section, std::string_view key);
    std::optional<std::int64_t> get_int(std::string_view section, std::string_view key);
    std::optional<double> get_double(std::string_view section, std::string_view key);
    std::optional<bool> get_bool(std::string_view section, std::string_view key);
    std::optional<std::vector<std::string>> get_strings(std::string_view section, std::string_view key);

    /// Keys of a section in file order.
    std::vector<std::string> keys(std::string_view section) const;

    /// Throws ConfigError on the first key no lookup touched.
    void reject_unused() const;

private:
    struct Entry {
        Value value;
        std::size_t line = 0;
        bool used = false;
    };
    Entry* find(std::string_view section, std::string_view key);
    [[noreturn]] void type_error(std::string_view section, std::string_view key, const Entry& e,
                                 std::string_view expected) const;

    std::string source_;
    std::map<std::string, std::vector<std::pair<std::string, Entry>>, std::less<>> sections_;
};

enum class EmbedderKind { Hashing, Http };

struct AnalysisConfig {
    std::string entity_field;
    std::string label_field;
    std::vector<std::string> covariates;
    std::string transform = "identity";
    std::optional<std::filesystem::path> reference;
    std::string reference_name = "reference";
    std::optional<std::filesystem::path> external_labels;
    std::size_t buckets = 10;
    std::size_t min_extractions_for_positive = 5;

    bool enabled() const { return !entity_field.empty() && !label_field.empty(); }
};

/// Everything a command needs. Paths are absolute after loading.
struct RunConfig {
    std::filesystem::path source;

    std::uint64_t seed = 0;
    std::filesystem::path output_dir;
    std::optional<std::filesystem::path> task_file;

    std::filesystem::path corpus;
    std::filesystem::path tags;
    std::optional<std::filesystem::path> script;
    /// Resolver name -> dictionary file.
    std::map<std::string, std::filesystem::path> resolvers;

    WindowingConfig windowing;

    EmbedderKind embedder = EmbedderKind::Hashing;
    std::size_t embedding_dim = 256;
    std::string embedder_url;

    LoopConfig loop;
    RankingWeights ranking;
    std::size_t extraction_budget = 100;

    JudgeConfig judge;

    std::string oracle_url;
    std::string oracle_token_env = "LITMINE_ORACLE_TOKEN";
    RetryPolicy retry;

    AnalysisConfig analysis;

    /// Parses, resolves relative paths against the config file's directory
    /// and checks that every referenced input exists.
    static RunConfig load(const std::filesystem::path& path);
    static RunConfig from_file(ConfigFile& file, const std::filesystem::path& base_dir);
};

} // namespace litmine
