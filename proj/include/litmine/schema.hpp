#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace litmine {

enum class ValueKind { String, Enum, Number, Boolean };

std::string_view to_string(ValueKind kind);
std::optional<ValueKind> parse_value_kind(std::string_view name);

struct SchemaField {
    std::string name;
    ValueKind kind = ValueKind::String;
    std::vector<std::string> allowed_values;
    bool required = false;

    friend bool operator==(const SchemaField&, const SchemaField&) = default;
};

/// Fields present on every record, filled by the engine rather than the
/// extractor's `fields` map.
inline constexpr std::string_view kDocIdField = "doc_id";
inline constexpr std::string_view kSupportTextField = "support_text";

bool is_universal_field(std::string_view name);

struct ExtractionSchema {
    std::vector<SchemaField> fields;
    std::string task_instantiation;

    const SchemaField* field(std::string_view name) const;

    /// Adds doc_id and support_text if missing and marks them required.
    void ensure_universal_fields();

    /// Throws ConfigError on duplicate names, enums without values, or
    /// missing universal fields.
    void validate() const;

    /// Parses {fields: [{name, kind, allowed_values?, required?}],
    /// task_instantiation}. Throws ConfigError.
    static ExtractionSchema from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    friend bool operator==(const ExtractionSchema&, const ExtractionSchema&) = default;
};

/// Checks an extractor `fields` map and support text against the schema.
/// Returns the first violation, or nothing when valid.
std::optional<std::string> validate_record_fields(const ExtractionSchema& schema, const nlohmann::json& fields,
                                                  std::string_view support_text);

} // namespace litmine
