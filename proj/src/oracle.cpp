#include "litmine/oracle.hpp"

#include <fstream>

#include <fmt/format.h>
#include <httplib.h>

#include "http_util.hpp"
#include "litmine/digest.hpp"
#include "litmine/errors.hpp"

namespace litmine {

namespace {

constexpr std::string_view kModule = "oracle_port";

[[noreturn]] void bad_shape(const OracleRequest& request, std::string_view why)
{
    throw ProtocolError(kModule, fmt::format("{}/{} response {}", to_string(request.role), request.kind, why));
}

const json& require(const OracleRequest& request, const json& payload, const char* key, json::value_t type)
{
    auto it = payload.find(key);
    if (it == payload.end()) {
        bad_shape(request, fmt::format("is missing '{}'", key));
    }
    if (it->type() != type) {
        bad_shape(request, fmt::format("has wrong type for '{}'", key));
    }
    return *it;
}

void check_records(const OracleRequest& request, const json& payload)
{
    for (const auto& r : require(request, payload, "records", json::value_t::array)) {
        if (!r.is_object()) {
            bad_shape(request, "has a non-object record");
        }
        require(request, r, "fields", json::value_t::object);
        require(request, r, "support_text", json::value_t::string);
    }
}

} // namespace

std::string_view to_string(AgentRole role)
{
    switch (role) {
    case AgentRole::Proposer: return "Proposer";
    case AgentRole::Validator: return "Validator";
    case AgentRole::Investigator: return "Investigator";
    case AgentRole::Extractor: return "Extractor";
    case AgentRole::Judge: return "Judge";
    }
    return "?";
}

std::optional<AgentRole> parse_agent_role(std::string_view name)
{
    for (auto r : kAgentRoles) {
        if (to_string(r) == name) {
            return r;
        }
    }
    return std::nullopt;
}

const std::vector<std::string_view>& kinds_for(AgentRole role)
{
    static const std::map<AgentRole, std::vector<std::string_view>> registry = {
        {AgentRole::Proposer, {kinds::propose_probes, kinds::propose_schema}},
        {AgentRole::Validator, {kinds::judge_relevance, kinds::score_extraction}},
        {AgentRole::Investigator, {kinds::suggest_refinement}},
        {AgentRole::Extractor, {kinds::extract_freeform, kinds::extract_records}},
        {AgentRole::Judge, {kinds::judge_record}},
    };
    return registry.at(role);
}

bool is_registered_kind(AgentRole role, std::string_view kind)
{
    const auto& ks = kinds_for(role);
    return std::find(ks.begin(), ks.end(), kind) != ks.end();
}

json OracleRequest::to_json() const
{
    return {{"role", std::string(to_string(role))}, {"kind", kind}, {"payload", payload}};
}

void validate_response(const OracleRequest& request, const json& payload)
{
    if (!payload.is_object()) {
        bad_shape(request, "is not a JSON object");
    }
    const auto& kind = request.kind;
    if (kind == kinds::propose_probes) {
        for (const auto& p : require(request, payload, "probes", json::value_t::array)) {
            if (!p.is_object()) {
                bad_shape(request, "has a non-object probe");
            }
            require(request, p, "probe_id", json::value_t::string);
            require(request, p, "spec", json::value_t::object);
        }
    } else if (kind == kinds::propose_schema) {
        for (const auto& f : require(request, payload, "fields", json::value_t::array)) {
            if (!f.is_object()) {
                bad_shape(request, "has a non-object field");
            }
            require(request, f, "name", json::value_t::string);
            require(request, f, "kind", json::value_t::string);
        }
        require(request, payload, "task_instantiation", json::value_t::string);
    } else if (kind == kinds::judge_relevance) {
        require(request, payload, "relevant", json::value_t::boolean);
    } else if (kind == kinds::score_extraction) {
        require(request, payload, "pass", json::value_t::boolean);
    } else if (kind == kinds::suggest_refinement) {
        for (const auto& s : require(request, payload, "suggestions", json::value_t::array)) {
            if (!s.is_string()) {
                bad_shape(request, "has a non-string suggestion");
            }
        }
    } else if (kind == kinds::extract_freeform || kind == kinds::extract_records) {
        check_records(request, payload);
    } else if (kind == kinds::judge_record) {
        const auto& axes = require(request, payload, "axes", json::value_t::object);
        for (const char* axis :
             {"support_fidelity", "task_relevance", "entity_attribution", "label_correctness", "accuracy"}) {
            require(request, axes, axis, json::value_t::boolean);
        }
    } else {
        bad_shape(request, "has an unregistered kind");
    }
}

// ---------------------------------------------------------------- scripted

ScriptedOracle::ScriptedOracle(std::vector<Entry> entries)
    : entries_(std::move(entries)), consumed_(entries_.size(), false)
{
}

ScriptedOracle ScriptedOracle::from_json(const json& script)
{
    if (!script.is_array()) {
        throw ConfigError(kModule, "script must be a JSON array");
    }
    std::vector<Entry> entries;
    for (std::size_t i = 0; i < script.size(); ++i) {
        const auto& e = script[i];
        auto where = fmt::format("script entry #{}", i);
        if (!e.is_object() || !e.contains("role") || !e.contains("kind") || !e.contains("response")) {
            throw ConfigError(kModule, where + " needs role, kind and response");
        }
        auto role = parse_agent_role(e["role"].get<std::string>());
        if (!role) {
            throw ConfigError(kModule, where + ": unknown role " + e["role"].dump());
        }
        Entry entry{*role, e["kind"].get<std::string>(), e.value("match", json::object()), e["response"],
                    e.value("repeat", false)};
        if (!is_registered_kind(entry.role, entry.kind)) {
            throw ConfigError(kModule, fmt::format("{}: kind {} is not registered for {}", where, entry.kind,
                                                   to_string(entry.role)));
        }
        if (!entry.match.is_object()) {
            throw ConfigError(kModule, where + ": match must be an object");
        }
        entries.push_back(std::move(entry));
    }
    return ScriptedOracle(std::move(entries));
}

ScriptedOracle ScriptedOracle::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(kModule, "cannot open oracle script " + path.string());
    }
    try {
        return from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw ConfigError(kModule, fmt::format("{}: {}", path.string(), e.what()));
    }
}

OracleResponse ScriptedOracle::call(const OracleRequest& request)
{
    std::lock_guard lock(mutex_);
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        if (consumed_[i] || e.role != request.role || e.kind != request.kind) {
            continue;
        }
        bool matches = true;
        for (const auto& [key, value] : e.match.items()) {
            auto it = request.payload.find(key);
            if (it == request.payload.end() || *it != value) {
                matches = false;
                break;
            }
        }
        if (!matches) {
            continue;
        }
        if (!e.repeat) {
            consumed_[i] = true;
        }
        return {e.response, e.response.dump()};
    }
    throw ProtocolError(kModule,
                        fmt::format("script exhausted for {}/{}", to_string(request.role), request.kind));
}

std::size_t ScriptedOracle::remaining() const
{
    std::lock_guard lock(mutex_);
    std::size_t n = 0;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        n += (!consumed_[i] && !entries_[i].repeat) ? 1 : 0;
    }
    return n;
}

// ---------------------------------------------------------------- http

HttpOracle::HttpOracle(std::string url, std::optional<std::string> bearer_token, RetryPolicy retry)
    : url_(std::move(url)), token_(std::move(bearer_token)), retry_(retry)
{
    detail::split_url(url_, kModule);
}

OracleResponse HttpOracle::call(const OracleRequest& request)
{
    auto [host, path] = detail::split_url(url_, kModule);
    const std::string body = request.to_json().dump();
    auto attempt = [&]() -> OracleResponse {
        httplib::Client client(host);
        client.set_connection_timeout(10);
        client.set_read_timeout(300);
        httplib::Headers headers;
        if (token_) {
            headers.emplace("Authorization", "Bearer " + *token_);
        }
        auto res = client.Post(path, headers, body, "application/json");
        if (!res) {
            throw TransportError(kModule, "request to " + url_ + " failed: " + httplib::to_string(res.error()));
        }
        if (res->status >= 500) {
            throw TransportError(kModule, fmt::format("oracle returned HTTP {}", res->status));
        }
        if (res->status != 200) {
            throw ProtocolError(kModule, fmt::format("oracle rejected request with HTTP {}", res->status));
        }
        json payload = json::parse(res->body, nullptr, false);
        if (payload.is_discarded()) {
            throw detail::MalformedBody(kModule, "oracle returned a body that is not JSON");
        }
        try {
            validate_response(request, payload);
        } catch (const ProtocolError& e) {
            throw detail::MalformedBody(kModule, e.what());
        }
        return {std::move(payload), res->body};
    };
    try {
        return with_retries(retry_, attempt);
    } catch (const detail::MalformedBody& e) {
        throw ProtocolError(kModule, fmt::format("{} (after {} attempts)", e.what(), retry_.attempts));
    }
}

OracleResponse CallbackOracle::call(const OracleRequest& request)
{
    json payload = fn_(request);
    return {payload, payload.dump()};
}

// ---------------------------------------------------------------- audit

void AuditLog::append(AuditEntry entry)
{
    std::lock_guard lock(mutex_);
    entries_.push_back(std::move(entry));
}

std::vector<AuditEntry> AuditLog::entries() const
{
    std::lock_guard lock(mutex_);
    return entries_;
}

std::size_t AuditLog::size() const
{
    std::lock_guard lock(mutex_);
    return entries_.size();
}

json AuditLog::to_json() const
{
    std::lock_guard lock(mutex_);
    json out = json::array();
    for (const auto& e : entries_) {
        out.push_back({{"role", std::string(to_string(e.role))},
                       {"kind", e.kind},
                       {"request_digest", e.request_digest},
                       {"response_digest", e.response_digest},
                       {"status", e.status}});
    }
    return out;
}

std::string AuditLog::digest() const { return sha256_hex(to_json().dump()); }

// ---------------------------------------------------------------- router

void OracleRouter::set(AgentRole role, Oracle& oracle) { oracles_[role] = &oracle; }

void OracleRouter::set_all(Oracle& oracle)
{
    for (auto r : kAgentRoles) {
        oracles_[r] = &oracle;
    }
}

bool OracleRouter::has(AgentRole role) const { return oracles_.contains(role); }

json OracleRouter::call(AgentRole role, std::string_view kind, json payload)
{
    if (!is_registered_kind(role, kind)) {
        throw ConfigError(kModule, fmt::format("kind {} is not registered for {}", kind, to_string(role)));
    }
    auto it = oracles_.find(role);
    if (it == oracles_.end()) {
        throw ConfigError(kModule, fmt::format("no oracle configured for {}", to_string(role)));
    }
    OracleRequest request{role, std::string(kind), std::move(payload)};
    AuditEntry audit{role, request.kind, sha256_hex(request.payload.dump()), {}, "ok"};
    try {
        auto response = it->second->call(request);
        validate_response(request, response.payload);
        audit.response_digest = sha256_hex(response.payload.dump());
        if (audit_) {
            audit_->append(std::move(audit));
        }
        return std::move(response.payload);
    } catch (const OracleError& e) {
        audit.status = e.what();
        if (audit_) {
            audit_->append(std::move(audit));
        }
        throw;
    }
}

} // namespace litmine
