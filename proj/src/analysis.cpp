#include "litmine/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/fisher_f.hpp>

#include "litmine/errors.hpp"
#include "litmine/text.hpp"

namespace litmine {

namespace {

constexpr std::string_view kModule = "analysis";
using nlohmann::json;

double mean_of(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

} // namespace

std::size_t GroupedLabels::label_count() const
{
    std::size_t n = 0;
    for (const auto& [_, g] : groups) {
        n += g.size();
    }
    return n;
}

std::size_t GroupedLabels::nonempty_groups() const
{
    return static_cast<std::size_t>(
        std::count_if(groups.begin(), groups.end(), [](const auto& kv) { return !kv.second.empty(); }));
}

Eta2Value eta_squared_checked(const GroupedLabels& grouped)
{
    if (!grouped.qualifies()) {
        throw DataError(kModule, "entity " + grouped.entity_key + " needs >=2 non-empty groups for covariate " +
                                     grouped.covariate);
    }
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& [_, g] : grouped.groups) {
        for (double y : g) {
            sum += y;
            ++n;
        }
    }
    const double grand = sum / static_cast<double>(n);
    double ss_total = 0.0;
    double ss_between = 0.0;
    for (const auto& [_, g] : grouped.groups) {
        if (g.empty()) {
            continue;
        }
        const double m = mean_of(g);
        ss_between += static_cast<double>(g.size()) * (m - grand) * (m - grand);
        for (double y : g) {
            ss_total += (y - grand) * (y - grand);
        }
    }
    // Constant labels: rounding in the mean can leave ss_total a hair above 0.
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& [_, g] : grouped.groups) {
        for (double y : g) {
            lo = std::min(lo, y);
            hi = std::max(hi, y);
        }
    }
    if (lo == hi || ss_total <= 0.0) {
        return {0.0, true};
    }
    return {std::clamp(ss_between / ss_total, 0.0, 1.0), false};
}

double eta_squared(const GroupedLabels& grouped)
{
    return eta_squared_checked(grouped).eta2;
}

PooledFTest pooled_f_test(std::span<const GroupedLabels> entities)
{
    double ss_between = 0.0;
    double ss_within = 0.0;
    std::size_t cells = 0;
    std::size_t used = 0;
    std::size_t n = 0;
    for (const auto& e : entities) {
        if (!e.qualifies()) {
            continue;
        }
        ++used;
        double sum = 0.0;
        std::size_t m = 0;
        for (const auto& [_, g] : e.groups) {
            for (double y : g) {
                sum += y;
                ++m;
            }
        }
        const double entity_mean = sum / static_cast<double>(m);
        n += m;
        for (const auto& [_, g] : e.groups) {
            if (g.empty()) {
                continue;
            }
            ++cells;
            const double cm = mean_of(g);
            ss_between += static_cast<double>(g.size()) * (cm - entity_mean) * (cm - entity_mean);
            for (double y : g) {
                ss_within += (y - cm) * (y - cm);
            }
        }
    }
    PooledFTest t;
    t.df_between = static_cast<double>(cells - used);
    t.df_within = static_cast<double>(n - cells);
    if (used == 0 || t.df_between <= 0.0) {
        return t;
    }
    if (t.df_within <= 0.0 || ss_within <= 0.0) {
        if (ss_between > 0.0) {
            t.f_statistic = std::numeric_limits<double>::infinity();
            t.p_value = 0.0;
        }
        return t;
    }
    t.f_statistic = (ss_between / t.df_between) / (ss_within / t.df_within);
    boost::math::fisher_f dist(t.df_between, t.df_within);
    t.p_value = boost::math::cdf(boost::math::complement(dist, t.f_statistic));
    return t;
}

json Eta2Result::to_json() const
{
    json rows = json::array();
    for (const auto& e : per_entity) {
        rows.push_back({{"entity_key", e.entity_key}, {"labels", e.labels}, {"eta2", e.eta2},
                        {"degenerate", e.degenerate}});
    }
    auto num = [](double x) { return std::isfinite(x) ? json(x) : json("inf"); };
    return {{"covariate", covariate},
            {"entities", per_entity.size()},
            {"skipped", skipped},
            {"degenerate", degenerate},
            {"mean_eta2", mean_eta2},
            {"f_statistic", num(test.f_statistic)},
            {"df_between", test.df_between},
            {"df_within", test.df_within},
            {"p_value", test.p_value},
            {"per_entity", std::move(rows)}};
}

Eta2Result aggregate_eta2(std::span<const GroupedLabels> entities, const std::string& covariate)
{
    Eta2Result r;
    r.covariate = covariate;
    double total = 0.0;
    for (const auto& e : entities) {
        if (!e.qualifies()) {
            ++r.skipped;
            continue;
        }
        auto v = eta_squared_checked(e);
        r.per_entity.push_back({e.entity_key, e.label_count(), v.eta2, v.degenerate});
        r.degenerate += v.degenerate ? 1 : 0;
        total += v.eta2;
    }
    if (r.per_entity.empty()) {
        throw DataError(kModule, "no entity qualifies for covariate " + covariate);
    }
    r.mean_eta2 = total / static_cast<double>(r.per_entity.size());
    r.test = pooled_f_test(entities);
    return r;
}

json CoverageReport::to_json() const
{
    return {{"reference", reference}, {"reference_size", reference_size}, {"overlap", overlap},
            {"coverage", coverage}};
}

CoverageReport coverage(const std::set<std::string>& ours, const std::set<std::string>& reference,
                        std::string reference_name)
{
    if (reference.empty()) {
        throw DataError(kModule, "reference set " + reference_name + " is empty");
    }
    CoverageReport r;
    r.reference = std::move(reference_name);
    r.reference_size = reference.size();
    for (const auto& k : reference) {
        r.overlap += ours.count(k);
    }
    r.coverage = static_cast<double>(r.overlap) / static_cast<double>(r.reference_size);
    return r;
}

json DisagreementStats::to_json() const
{
    json rows = json::array();
    for (const auto& e : per_entity) {
        json row = {{"entity_key", e.entity_key}, {"extractions", e.extractions},
                    {"disagreement", e.disagreement}};
        row["positive_fraction"] = e.positive_fraction ? json(*e.positive_fraction) : json(nullptr);
        rows.push_back(std::move(row));
    }
    return {{"entities", per_entity.size()}, {"missing_external", missing_external},
            {"majority_rate", majority_rate}, {"histogram", histogram}, {"per_entity", std::move(rows)}};
}

DisagreementStats disagreement(const std::map<std::string, std::vector<int>>& extractions,
                               const std::map<std::string, int>& external, const DisagreementConfig& config)
{
    if (config.buckets == 0) {
        throw ConfigError(kModule, "histogram needs at least one bucket");
    }
    auto check_binary = [](int v, const std::string& key) {
        if (v != 0 && v != 1) {
            throw DataError(kModule, "non-binary label " + std::to_string(v) + " for " + key);
        }
    };
    DisagreementStats s;
    s.histogram.assign(config.buckets, 0);
    std::size_t majority = 0;
    for (const auto& [key, labels] : extractions) {
        auto ext = external.find(key);
        if (ext == external.end()) {
            ++s.missing_external;
            continue;
        }
        if (labels.empty()) {
            continue;
        }
        check_binary(ext->second, key);
        std::size_t disagree = 0;
        std::size_t positive = 0;
        for (int v : labels) {
            check_binary(v, key);
            disagree += v != ext->second ? 1 : 0;
            positive += v == 1 ? 1 : 0;
        }
        EntityDisagreement e;
        e.entity_key = key;
        e.extractions = labels.size();
        e.disagreement = static_cast<double>(disagree) / static_cast<double>(labels.size());
        if (labels.size() >= config.min_extractions_for_positive) {
            e.positive_fraction = static_cast<double>(positive) / static_cast<double>(labels.size());
        }
        auto bucket = static_cast<std::size_t>(e.disagreement * static_cast<double>(config.buckets));
        ++s.histogram[std::min(bucket, config.buckets - 1)];
        majority += e.disagreement > 0.5 ? 1 : 0;
        s.per_entity.push_back(std::move(e));
    }
    if (!s.per_entity.empty()) {
        s.majority_rate = static_cast<double>(majority) / static_cast<double>(s.per_entity.size());
    }
    return s;
}

LabelTransform parse_label_transform(std::string_view name)
{
    if (name == "identity" || name == "none") {
        return LabelTransform::Identity;
    }
    if (name == "log10") {
        return LabelTransform::Log10;
    }
    if (name == "binary") {
        return LabelTransform::Binary;
    }
    throw ConfigError(kModule, "unknown label transform '" + std::string(name) + "'");
}

std::optional<double> label_value(const json& value, LabelTransform transform)
{
    std::optional<double> x;
    if (value.is_boolean()) {
        x = value.get<bool>() ? 1.0 : 0.0;
    } else if (value.is_number()) {
        x = value.get<double>();
    } else if (value.is_string()) {
        auto s = text::normalize_whitespace_case(value.get<std::string>());
        if (transform == LabelTransform::Binary) {
            if (s == "true" || s == "yes" || s == "positive" || s == "1") {
                x = 1.0;
            } else if (s == "false" || s == "no" || s == "negative" || s == "0") {
                x = 0.0;
            }
        } else {
            try {
                std::size_t used = 0;
                double d = std::stod(s, &used);
                if (used == s.size()) {
                    x = d;
                }
            } catch (const std::exception&) {
            }
        }
    }
    if (!x || !std::isfinite(*x)) {
        return std::nullopt;
    }
    switch (transform) {
    case LabelTransform::Identity: return x;
    case LabelTransform::Log10:
        if (*x <= 0.0) {
            return std::nullopt;
        }
        return std::log10(*x);
    case LabelTransform::Binary:
        if (*x != 0.0 && *x != 1.0) {
            return std::nullopt;
        }
        return x;
    }
    return std::nullopt;
}

std::optional<std::string> category_value(const json& value)
{
    if (value.is_null()) {
        return std::nullopt;
    }
    if (value.is_string()) {
        auto s = text::normalize_whitespace_case(value.get<std::string>());
        if (s.empty()) {
            return std::nullopt;
        }
        return s;
    }
    return value.dump();
}

std::optional<std::string> key_value(const json& value)
{
    if (value.is_null()) {
        return std::nullopt;
    }
    if (value.is_string()) {
        auto s = text::trim(value.get<std::string>());
        if (s.empty()) {
            return std::nullopt;
        }
        return s;
    }
    return value.dump();
}

std::vector<GroupedLabels> group_labels(std::span<const ExtractionRecord> records, const LabelMapping& mapping,
                                        const std::string& covariate)
{
    std::map<std::string, GroupedLabels> by_entity;
    for (const auto& r : records) {
        auto field = [&](const std::string& name) -> json {
            auto it = r.fields.find(name);
            return it == r.fields.end() ? json(nullptr) : *it;
        };
        auto entity = key_value(field(mapping.entity_field));
        auto label = label_value(field(mapping.label_field), mapping.transform);
        auto category = category_value(field(covariate));
        if (!entity || !label || !category) {
            continue;
        }
        auto& g = by_entity[*entity];
        g.entity_key = *entity;
        g.covariate = covariate;
        g.groups[*category].push_back(*label);
    }
    std::vector<GroupedLabels> out;
    out.reserve(by_entity.size());
    for (auto& [_, g] : by_entity) {
        out.push_back(std::move(g));
    }
    return out;
}

} // namespace litmine
