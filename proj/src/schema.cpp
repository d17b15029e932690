#include "litmine/schema.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "litmine/errors.hpp"

namespace litmine {

namespace {

constexpr std::string_view kModule = "schema";

} // namespace

std::string_view to_string(ValueKind kind)
{
    switch (kind) {
    case ValueKind::String: return "string";
    case ValueKind::Enum: return "enum";
    case ValueKind::Number: return "number";
    case ValueKind::Boolean: return "boolean";
    }
    return "?";
}

std::optional<ValueKind> parse_value_kind(std::string_view name)
{
    for (auto k : {ValueKind::String, ValueKind::Enum, ValueKind::Number, ValueKind::Boolean}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    return std::nullopt;
}

bool is_universal_field(std::string_view name) { return name == kDocIdField || name == kSupportTextField; }

const SchemaField* ExtractionSchema::field(std::string_view name) const
{
    auto it = std::find_if(fields.begin(), fields.end(), [&](const SchemaField& f) { return f.name == name; });
    return it == fields.end() ? nullptr : &*it;
}

void ExtractionSchema::ensure_universal_fields()
{
    for (auto name : {kDocIdField, kSupportTextField}) {
        auto it = std::find_if(fields.begin(), fields.end(), [&](const SchemaField& f) { return f.name == name; });
        if (it == fields.end()) {
            fields.insert(fields.begin() + (name == kDocIdField ? 0 : 1),
                          SchemaField{std::string(name), ValueKind::String, {}, true});
        } else {
            it->kind = ValueKind::String;
            it->allowed_values.clear();
            it->required = true;
        }
    }
}

void ExtractionSchema::validate() const
{
    std::set<std::string> seen;
    for (const auto& f : fields) {
        if (f.name.empty()) {
            throw ConfigError(kModule, "field with empty name");
        }
        if (!seen.insert(f.name).second) {
            throw ConfigError(kModule, "duplicate field " + f.name);
        }
        if (f.kind == ValueKind::Enum && f.allowed_values.empty()) {
            throw ConfigError(kModule, "enum field " + f.name + " has no allowed values");
        }
    }
    for (auto name : {kDocIdField, kSupportTextField}) {
        const auto* f = field(name);
        if (!f || !f->required) {
            throw ConfigError(kModule, fmt::format("universal field {} must be present and required", name));
        }
    }
}

ExtractionSchema ExtractionSchema::from_json(const nlohmann::json& j)
{
    try {
        ExtractionSchema schema;
        for (const auto& f : j.at("fields")) {
            SchemaField field;
            field.name = f.at("name").get<std::string>();
            auto kind = parse_value_kind(f.at("kind").get<std::string>());
            if (!kind) {
                throw ConfigError(kModule, fmt::format("field {}: unknown kind {}", field.name, f.at("kind").dump()));
            }
            field.kind = *kind;
            if (f.contains("allowed_values")) {
                field.allowed_values = f.at("allowed_values").get<std::vector<std::string>>();
            }
            field.required = f.value("required", false);
            schema.fields.push_back(std::move(field));
        }
        schema.task_instantiation = j.value("task_instantiation", std::string{});
        return schema;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(kModule, std::string("malformed schema: ") + e.what());
    }
}

nlohmann::json ExtractionSchema::to_json() const
{
    nlohmann::json out_fields = nlohmann::json::array();
    for (const auto& f : fields) {
        nlohmann::json jf = {{"name", f.name}, {"kind", std::string(to_string(f.kind))}, {"required", f.required}};
        if (f.kind == ValueKind::Enum) {
            jf["allowed_values"] = f.allowed_values;
        }
        out_fields.push_back(std::move(jf));
    }
    return {{"fields", std::move(out_fields)}, {"task_instantiation", task_instantiation}};
}

std::optional<std::string> validate_record_fields(const ExtractionSchema& schema, const nlohmann::json& fields,
                                                  std::string_view support_text)
{
    if (!fields.is_object()) {
        return "fields is not an object";
    }
    if (support_text.empty()) {
        return "empty support_text";
    }
    for (const auto& [name, value] : fields.items()) {
        if (is_universal_field(name)) {
            return fmt::format("reserved field {} inside fields", name);
        }
        if (!schema.field(name)) {
            return fmt::format("unknown field {}", name);
        }
    }
    for (const auto& f : schema.fields) {
        if (is_universal_field(f.name)) {
            continue;
        }
        auto it = fields.find(f.name);
        if (it == fields.end() || it->is_null()) {
            if (f.required) {
                return fmt::format("missing required field {}", f.name);
            }
            continue;
        }
        switch (f.kind) {
        case ValueKind::String:
            if (!it->is_string()) {
                return fmt::format("type violation: {} must be a string", f.name);
            }
            break;
        case ValueKind::Number:
            if (!it->is_number()) {
                return fmt::format("type violation: {} must be a number", f.name);
            }
            break;
        case ValueKind::Boolean:
            if (!it->is_boolean()) {
                return fmt::format("type violation: {} must be a boolean", f.name);
            }
            break;
        case ValueKind::Enum:
            if (!it->is_string()
                || std::find(f.allowed_values.begin(), f.allowed_values.end(), it->get<std::string>())
                       == f.allowed_values.end()) {
                return fmt::format("enum violation: {} = {}", f.name, it->dump());
            }
            break;
        }
    }
    return std::nullopt;
}

} // namespace litmine
