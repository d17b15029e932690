#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "litmine/extraction.hpp"

namespace litmine {

/// Labels of one entity split by the categories of one covariate.
struct GroupedLabels {
    std::string entity_key;
    std::string covariate;
    std::map<std::string, std::vector<double>> groups;

    std::size_t label_count() const;
    std::size_t nonempty_groups() const;
    /// At least two non-empty groups and two labels.
    bool qualifies() const { return nonempty_groups() >= 2 && label_count() >= 2; }
};

struct Eta2Value {
    double eta2 = 0.0;
    /// Total variance was zero; eta2 is reported as 0.
    bool degenerate = false;
};

/// SS_between / SS_total. Throws DataError if `grouped` does not qualify.
Eta2Value eta_squared_checked(const GroupedLabels& grouped);
double eta_squared(const GroupedLabels& grouped);

struct PooledFTest {
    double f_statistic = 0.0;
    double df_between = 0.0;
    double df_within = 0.0;
    double p_value = 1.0;
};

/// One-way ANOVA over (entity, category) cells after centering each
/// entity's labels on its own mean. Between-cell variation is what the
/// covariate explains inside entities; degrees of freedom account for the
/// per-entity means removed by centering.
PooledFTest pooled_f_test(std::span<const GroupedLabels> entities);

struct EntityEta2 {
    std::string entity_key;
    std::size_t labels = 0;
    double eta2 = 0.0;
    bool degenerate = false;
};

struct Eta2Result {
    std::string covariate;
    std::vector<EntityEta2> per_entity;
    std::size_t skipped = 0;
    std::size_t degenerate = 0;
    double mean_eta2 = 0.0;
    PooledFTest test;

    nlohmann::json to_json() const;
};

/// Mean eta2 over qualifying entities plus the pooled F-test. Throws
/// DataError if no entity qualifies.
Eta2Result aggregate_eta2(std::span<const GroupedLabels> entities, const std::string& covariate);

struct CoverageReport {
    std::string reference;
    std::size_t reference_size = 0;
    std::size_t overlap = 0;
    double coverage = 0.0;

    nlohmann::json to_json() const;
};

/// |ours ∩ ref| / |ref|. Throws DataError on an empty reference.
CoverageReport coverage(const std::set<std::string>& ours, const std::set<std::string>& reference,
                        std::string reference_name = "reference");

struct EntityDisagreement {
    std::string entity_key;
    std::size_t extractions = 0;
    double disagreement = 0.0;
    /// Fraction of positive extractions; only set for well-sampled entities.
    std::optional<double> positive_fraction;
};

struct DisagreementConfig {
    std::size_t buckets = 10;
    std::size_t min_extractions_for_positive = 5;
};

struct DisagreementStats {
    std::vector<EntityDisagreement> per_entity;
    /// Counts over [0, 1] in equal-width buckets; 1.0 lands in the last one.
    std::vector<std::size_t> histogram;
    double majority_rate = 0.0;
    std::size_t missing_external = 0;

    nlohmann::json to_json() const;
};

/// Binary labels only (0 or 1); anything else is a DataError. Entities
/// absent from `external` are skipped and counted.
DisagreementStats disagreement(const std::map<std::string, std::vector<int>>& extractions,
                               const std::map<std::string, int>& external, const DisagreementConfig& config = {});

enum class LabelTransform { Identity, Log10, Binary };

LabelTransform parse_label_transform(std::string_view name);

/// Which record fields feed the analyses.
struct LabelMapping {
    std::string entity_field;
    std::string label_field;
    std::vector<std::string> covariates;
    LabelTransform transform = LabelTransform::Identity;
};

/// Numeric label of a field value, or nullopt if it is null or unusable
/// under the transform.
std::optional<double> label_value(const nlohmann::json& value, LabelTransform transform);

/// Category string of a covariate value; nullopt for null.
std::optional<std::string> category_value(const nlohmann::json& value);

/// Entity key of a field value: trimmed, case kept; nullopt for null.
std::optional<std::string> key_value(const nlohmann::json& value);

/// Groups records per entity for one covariate. Records lacking a usable
/// entity, label or category are left out.
std::vector<GroupedLabels> group_labels(std::span<const ExtractionRecord> records, const LabelMapping& mapping,
                                        const std::string& covariate);

} // namespace litmine
