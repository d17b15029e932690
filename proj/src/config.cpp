#include "litmine/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "litmine/errors.hpp"
#include "litmine/text.hpp"

namespace litmine {

namespace {

constexpr std::string_view kModule = "config";
namespace fs = std::filesystem;

class LineParser {
public:
    LineParser(std::string_view line, const std::string& source, std::size_t line_no)
        : s_(line), source_(source), line_no_(line_no) {}

    [[noreturn]] void fail(std::string_view msg) const
    {
        throw ConfigError(kModule, fmt::format("{}:{}:{}: {}", source_, line_no_, pos_ + 1, msg));
    }

    void skip_ws()
    {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) {
            ++pos_;
        }
    }

    bool at_end_or_comment()
    {
        skip_ws();
        return pos_ >= s_.size() || s_[pos_] == '#';
    }

    char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

    void expect(char c)
    {
        skip_ws();
        if (peek() != c) {
            fail(fmt::format("expected '{}'", c));
        }
        ++pos_;
    }

    std::string bare_key()
    {
        skip_ws();
        auto start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' || s_[pos_] == '-')) {
            ++pos_;
        }
        if (start == pos_) {
            fail("expected a key");
        }
        return std::string(s_.substr(start, pos_ - start));
    }

    std::string quoted()
    {
        expect('"');
        std::string out;
        while (true) {
            if (pos_ >= s_.size()) {
                fail("unterminated string");
            }
            char c = s_[pos_++];
            if (c == '"') {
                return out;
            }
            if (c == '\\') {
                if (pos_ >= s_.size()) {
                    fail("unterminated escape");
                }
                char e = s_[pos_++];
                switch (e) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                default: fail(fmt::format("unknown escape \\{}", e));
                }
            } else {
                out += c;
            }
        }
    }

    ConfigFile::Value value()
    {
        skip_ws();
        char c = peek();
        if (c == '"') {
            return quoted();
        }
        if (c == '[') {
            ++pos_;
            std::vector<std::string> items;
            skip_ws();
            if (peek() == ']') {
                ++pos_;
                return items;
            }
            while (true) {
                items.push_back(quoted());
                skip_ws();
                if (peek() == ',') {
                    ++pos_;
                    skip_ws();
                    if (peek() == ']') {
                        ++pos_;
                        return items;
                    }
                    continue;
                }
                if (peek() == ']') {
                    ++pos_;
                    return items;
                }
                fail("expected ',' or ']' in array");
            }
        }
        auto start = pos_;
        while (pos_ < s_.size() && s_[pos_] != '#' && s_[pos_] != ' ' && s_[pos_] != '\t') {
            ++pos_;
        }
        auto tok = s_.substr(start, pos_ - start);
        if (tok == "true") {
            return true;
        }
        if (tok == "false") {
            return false;
        }
        if (tok.empty()) {
            fail("missing value");
        }
        std::int64_t i = 0;
        auto [ip, iec] = std::from_chars(tok.data(), tok.data() + tok.size(), i);
        if (iec == std::errc{} && ip == tok.data() + tok.size()) {
            return i;
        }
        double d = 0.0;
        auto [dp, dec] = std::from_chars(tok.data(), tok.data() + tok.size(), d);
        if (dec == std::errc{} && dp == tok.data() + tok.size()) {
            return d;
        }
        pos_ = start;
        fail(fmt::format("cannot parse value '{}'", tok));
    }

    std::size_t pos_ = 0;

private:
    std::string_view s_;
    const std::string& source_;
    std::size_t line_no_;
};

} // namespace

ConfigFile ConfigFile::parse(std::string_view text, std::string source)
{
    ConfigFile cfg;
    cfg.source_ = std::move(source);
    cfg.sections_[""];
    std::string section;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        LineParser p(line, cfg.source_, line_no);
        if (p.at_end_or_comment()) {
            continue;
        }
        if (p.peek() == '[') {
            ++p.pos_;
            section = p.bare_key();
            p.expect(']');
            if (!p.at_end_or_comment()) {
                p.fail("trailing characters after section header");
            }
            if (cfg.sections_.count(section) && section != "") {
                p.fail(fmt::format("duplicate section [{}]", section));
            }
            cfg.sections_[section];
            continue;
        }
        auto key = p.bare_key();
        p.expect('=');
        auto value = p.value();
        if (!p.at_end_or_comment()) {
            p.fail("trailing characters after value");
        }
        auto& entries = cfg.sections_[section];
        for (const auto& [k, _] : entries) {
            if (k == key) {
                p.pos_ = 0;
                p.fail(fmt::format("duplicate key '{}'", key));
            }
        }
        entries.emplace_back(key, Entry{std::move(value), line_no, false});
    }
    return cfg;
}

ConfigFile ConfigFile::load(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(kModule, "cannot open config file " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

ConfigFile::Entry* ConfigFile::find(std::string_view section, std::string_view key)
{
    auto it = sections_.find(section);
    if (it == sections_.end()) {
        return nullptr;
    }
    for (auto& [k, e] : it->second) {
        if (k == key) {
            e.used = true;
            return &e;
        }
    }
    return nullptr;
}

bool ConfigFile::has(std::string_view section, std::string_view key) const
{
    auto it = sections_.find(section);
    if (it == sections_.end()) {
        return false;
    }
    for (const auto& [k, _] : it->second) {
        if (k == key) {
            return true;
        }
    }
    return false;
}

void ConfigFile::type_error(std::string_view section, std::string_view key, const Entry& e,
                            std::string_view expected) const
{
    auto name = section.empty() ? std::string(key) : fmt::format("{}.{}", section, key);
    throw ConfigError(kModule, fmt::format("{}:{}: {} must be {}", source_, e.line, name, expected));
}

std::optional<std::string> ConfigFile::get_string(std::string_view section, std::string_view key)
{
    auto* e = find(section, key);
    if (!e) {
        return std::nullopt;
    }
    if (auto* s = std::get_if<std::string>(&e->value)) {
        return *s;
    }
    type_error(section, key, *e, "a string");
}

std::optional<std::int64_t> ConfigFile::get_int(std::string_view section, std::string_view key)
{
    auto* e = find(section, key);
    if (!e) {
        return std::nullopt;
    }
    if (auto* i = std::get_if<std::int64_t>(&e->value)) {
        return *i;
    }
    type_error(section, key, *e, "an integer");
}

std::optional<double> ConfigFile::get_double(std::string_view section, std::string_view key)
{
    auto* e = find(section, key);
    if (!e) {
        return std::nullopt;
    }
    if (auto* d = std::get_if<double>(&e->value)) {
        return *d;
    }
    if (auto* i = std::get_if<std::int64_t>(&e->value)) {
        return static_cast<double>(*i);
    }
    type_error(section, key, *e, "a number");
}

std::optional<bool> ConfigFile::get_bool(std::string_view section, std::string_view key)
{
    auto* e = find(section, key);
    if (!e) {
        return std::nullopt;
    }
    if (auto* b = std::get_if<bool>(&e->value)) {
        return *b;
    }
    type_error(section, key, *e, "true or false");
}

std::optional<std::vector<std::string>> ConfigFile::get_strings(std::string_view section, std::string_view key)
{
    auto* e = find(section, key);
    if (!e) {
        return std::nullopt;
    }
    if (auto* v = std::get_if<std::vector<std::string>>(&e->value)) {
        return *v;
    }
    type_error(section, key, *e, "an array of strings");
}

std::vector<std::string> ConfigFile::keys(std::string_view section) const
{
    std::vector<std::string> out;
    auto it = sections_.find(section);
    if (it != sections_.end()) {
        for (const auto& [k, _] : it->second) {
            out.push_back(k);
        }
    }
    return out;
}

void ConfigFile::reject_unused() const
{
    for (const auto& [section, entries] : sections_) {
        for (const auto& [k, e] : entries) {
            if (!e.used) {
                auto name = section.empty() ? k : section + "." + k;
                throw ConfigError(kModule, fmt::format("{}:{}: unknown key {}", source_, e.line, name));
            }
        }
    }
}

namespace {

fs::path resolve_existing(const fs::path& base, const std::string& value, std::string_view what)
{
    fs::path p(value);
    if (p.is_relative()) {
        p = base / p;
    }
    p = p.lexically_normal();
    if (!fs::exists(p)) {
        throw ConfigError(kModule, fmt::format("{} file not found: {}", what, p.string()));
    }
    return p;
}

std::size_t non_negative(ConfigFile& f, std::string_view section, std::string_view key, std::size_t fallback)
{
    auto v = f.get_int(section, key);
    if (!v) {
        return fallback;
    }
    if (*v < 0) {
        throw ConfigError(kModule, fmt::format("{}: {}.{} must be non-negative", f.source(), section, key));
    }
    return static_cast<std::size_t>(*v);
}

} // namespace

RunConfig RunConfig::from_file(ConfigFile& f, const fs::path& base_dir)
{
    RunConfig c;
    auto seed = f.get_int("", "seed");
    if (!seed) {
        throw ConfigError(kModule, f.source() + ": seed is required");
    }
    c.seed = static_cast<std::uint64_t>(*seed);
    c.output_dir = (base_dir / f.get_string("", "output_dir").value_or("run")).lexically_normal();
    if (auto t = f.get_string("", "task_file")) {
        c.task_file = resolve_existing(base_dir, *t, "task");
    }

    auto corpus = f.get_string("paths", "corpus");
    auto tags = f.get_string("paths", "tags");
    if (!corpus || !tags) {
        throw ConfigError(kModule, f.source() + ": [paths] needs corpus and tags");
    }
    c.corpus = resolve_existing(base_dir, *corpus, "corpus");
    c.tags = resolve_existing(base_dir, *tags, "tag");
    if (auto s = f.get_string("paths", "script")) {
        c.script = resolve_existing(base_dir, *s, "oracle script");
    }
    for (const auto& name : f.keys("resolvers")) {
        c.resolvers[name] = resolve_existing(base_dir, *f.get_string("resolvers", name), "resolver");
    }

    c.windowing.size = non_negative(f, "windowing", "size", c.windowing.size);
    c.windowing.stride = non_negative(f, "windowing", "stride", c.windowing.stride);
    c.windowing.validate();

    auto kind = f.get_string("embedder", "kind").value_or("hashing");
    if (kind == "hashing") {
        c.embedder = EmbedderKind::Hashing;
    } else if (kind == "http") {
        c.embedder = EmbedderKind::Http;
    } else {
        throw ConfigError(kModule, "embedder.kind must be \"hashing\" or \"http\", got \"" + kind + "\"");
    }
    c.embedding_dim = non_negative(f, "embedder", "dim", c.embedding_dim);
    c.embedder_url = f.get_string("embedder", "url").value_or("");
    if (c.embedder == EmbedderKind::Http && c.embedder_url.empty()) {
        throw ConfigError(kModule, "embedder.url is required for the http embedder");
    }
    if (c.embedding_dim == 0) {
        throw ConfigError(kModule, "embedder.dim must be positive");
    }

    auto& L = c.loop;
    L.precision_target = f.get_double("loop", "precision_target").value_or(L.precision_target);
    L.recall_gap_max = f.get_double("loop", "recall_gap_max").value_or(L.recall_gap_max);
    L.precision_sample_n = non_negative(f, "loop", "precision_sample_n", L.precision_sample_n);
    L.recall_pool_n = non_negative(f, "loop", "recall_pool_n", L.recall_pool_n);
    L.max_probes = non_negative(f, "loop", "max_probes", L.max_probes);
    L.max_iterations = non_negative(f, "loop", "max_iterations", L.max_iterations);
    L.precision_region_factor = non_negative(f, "loop", "precision_region_factor", L.precision_region_factor);
    L.sample_full_match_set = f.get_bool("loop", "sample_full_match_set").value_or(L.sample_full_match_set);
    L.paper_level = f.get_bool("loop", "paper_level").value_or(L.paper_level);
    L.investigator_max_samples = non_negative(f, "loop", "investigator_max_samples", L.investigator_max_samples);
    L.schema_sample_docs = non_negative(f, "loop", "schema_sample_docs", L.schema_sample_docs);
    L.schema_check_n = non_negative(f, "loop", "schema_check_n", L.schema_check_n);
    L.schema_max_rounds = non_negative(f, "loop", "schema_max_rounds", L.schema_max_rounds);
    L.validate();

    c.ranking.hits = f.get_double("ranking", "hits").value_or(c.ranking.hits);
    c.ranking.mean = f.get_double("ranking", "mean").value_or(c.ranking.mean);
    c.ranking.max = f.get_double("ranking", "max").value_or(c.ranking.max);
    c.ranking.validate();

    c.extraction_budget = non_negative(f, "extraction", "budget", c.extraction_budget);

    if (auto r = f.get_string("judge", "rubric_file")) {
        auto path = resolve_existing(base_dir, *r, "rubric");
        std::ifstream in(path, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        c.judge.rubric = ss.str();
    }
    c.judge.neighbor_windows = non_negative(f, "judge", "neighbor_windows", c.judge.neighbor_windows);

    c.oracle_url = f.get_string("oracle", "url").value_or("");
    c.oracle_token_env = f.get_string("oracle", "token_env").value_or(c.oracle_token_env);
    c.retry.attempts = static_cast<int>(non_negative(f, "oracle", "attempts", 3));
    c.retry.initial_backoff =
        std::chrono::milliseconds(static_cast<long long>(non_negative(f, "oracle", "backoff_ms", 200)));
    if (c.retry.attempts < 1) {
        throw ConfigError(kModule, "oracle.attempts must be at least 1");
    }
    if (c.oracle_url.empty() && !c.script) {
        throw ConfigError(kModule, f.source() + ": set oracle.url or paths.script");
    }

    auto& A = c.analysis;
    A.entity_field = f.get_string("analysis", "entity_field").value_or("");
    A.label_field = f.get_string("analysis", "label_field").value_or("");
    A.covariates = f.get_strings("analysis", "covariates").value_or(std::vector<std::string>{});
    A.transform = f.get_string("analysis", "transform").value_or(A.transform);
    if (auto r = f.get_string("analysis", "reference")) {
        A.reference = resolve_existing(base_dir, *r, "reference");
    }
    A.reference_name = f.get_string("analysis", "reference_name").value_or(A.reference_name);
    if (auto e = f.get_string("analysis", "external_labels")) {
        A.external_labels = resolve_existing(base_dir, *e, "external label");
    }
    A.buckets = non_negative(f, "analysis", "buckets", A.buckets);
    A.min_extractions_for_positive =
        non_negative(f, "analysis", "min_extractions_for_positive", A.min_extractions_for_positive);
    if (A.buckets == 0) {
        throw ConfigError(kModule, "analysis.buckets must be positive");
    }

    f.reject_unused();
    return c;
}

RunConfig RunConfig::load(const fs::path& path)
{
    if (!fs::exists(path)) {
        throw ConfigError(kModule, "config file not found: " + path.string());
    }
    auto file = ConfigFile::load(path);
    auto base = fs::absolute(path).parent_path();
    auto c = from_file(file, base);
    c.source = fs::absolute(path).lexically_normal();
    return c;
}

} // namespace litmine
