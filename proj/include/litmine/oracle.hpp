#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "litmine/retry.hpp"

namespace litmine {

using json = nlohmann::json;

enum class AgentRole { Proposer, Validator, Investigator, Extractor, Judge };

inline constexpr std::array<AgentRole, 5> kAgentRoles = {AgentRole::Proposer, AgentRole::Validator,
                                                         AgentRole::Investigator, AgentRole::Extractor,
                                                         AgentRole::Judge};

std::string_view to_string(AgentRole role);
std::optional<AgentRole> parse_agent_role(std::string_view name);

/// Request kinds understood by the engine, per role.
namespace kinds {
inline constexpr std::string_view propose_probes = "propose_probes";
inline constexpr std::string_view propose_schema = "propose_schema";
inline constexpr std::string_view judge_relevance = "judge_relevance";
inline constexpr std::string_view score_extraction = "score_extraction";
inline constexpr std::string_view suggest_refinement = "suggest_refinement";
inline constexpr std::string_view extract_freeform = "extract_freeform";
inline constexpr std::string_view extract_records = "extract_records";
inline constexpr std::string_view judge_record = "judge_record";
} // namespace kinds

const std::vector<std::string_view>& kinds_for(AgentRole role);
bool is_registered_kind(AgentRole role, std::string_view kind);

struct OracleRequest {
    AgentRole role{};
    std::string kind;
    json payload;

    json to_json() const;
};

struct OracleResponse {
    json payload;
    /// Raw response text, kept for audit.
    std::string verbatim;
};

/// Structural check of a response payload against its kind's shape.
/// Throws ProtocolError.
void validate_response(const OracleRequest& request, const json& payload);

class Oracle {
public:
    virtual ~Oracle() = default;
    virtual OracleResponse call(const OracleRequest& request) = 0;
};

/// Replays a script. Each call consumes the first unconsumed entry with the
/// same (role, kind) whose `match` keys all equal the request payload's.
/// Entries marked `repeat` are never consumed.
class ScriptedOracle final : public Oracle {
public:
    struct Entry {
        AgentRole role{};
        std::string kind;
        json match;
        json response;
        bool repeat = false;
    };

    explicit ScriptedOracle(std::vector<Entry> entries);
    ScriptedOracle(ScriptedOracle&& other) noexcept
        : entries_(std::move(other.entries_)), consumed_(std::move(other.consumed_)) {}

    /// JSON array of {role, kind, match?, response, repeat?}.
    static ScriptedOracle from_json(const json& script);
    static ScriptedOracle load(const std::filesystem::path& path);

    OracleResponse call(const OracleRequest& request) override;

    /// Unconsumed, non-repeating entries.
    std::size_t remaining() const;

private:
    mutable std::mutex mutex_;
    std::vector<Entry> entries_;
    std::vector<bool> consumed_;
};

/// POSTs {role, kind, payload} to a URL, with an optional bearer token.
/// Unreachable peers, 5xx replies and unparseable bodies are retried; the
/// last unparseable body surfaces as ProtocolError.
class HttpOracle final : public Oracle {
public:
    HttpOracle(std::string url, std::optional<std::string> bearer_token, RetryPolicy retry = {});

    OracleResponse call(const OracleRequest& request) override;

private:
    std::string url_;
    std::optional<std::string> token_;
    RetryPolicy retry_;
};

/// Adapter over a function; used for ground-truth validators and tests.
class CallbackOracle final : public Oracle {
public:
    using Fn = std::function<json(const OracleRequest&)>;
    explicit CallbackOracle(Fn fn) : fn_(std::move(fn)) {}

    OracleResponse call(const OracleRequest& request) override;

private:
    Fn fn_;
};

struct AuditEntry {
    AgentRole role{};
    std::string kind;
    std::string request_digest;
    std::string response_digest; ///< empty when the call failed
    std::string status;          ///< "ok" or the error message
};

/// Append-only call log; thread-safe.
class AuditLog {
public:
    void append(AuditEntry entry);
    std::vector<AuditEntry> entries() const;
    std::size_t size() const;
    /// Digest over all entries in order.
    std::string digest() const;
    json to_json() const;

private:
    mutable std::mutex mutex_;
    std::vector<AuditEntry> entries_;
};

/// Routes each role to its oracle, validates kinds and response shapes,
/// and records every call.
class OracleRouter {
public:
    explicit OracleRouter(AuditLog* audit = nullptr) : audit_(audit) {}

    void set(AgentRole role, Oracle& oracle);
    void set_all(Oracle& oracle);
    bool has(AgentRole role) const;

    /// Returns the validated response payload. Throws ConfigError for
    /// unknown kinds or unconfigured roles, and OracleError subclasses for
    /// transport and protocol failures.
    json call(AgentRole role, std::string_view kind, json payload);

private:
    std::map<AgentRole, Oracle*> oracles_;
    AuditLog* audit_;
};

} // namespace litmine
