#include <catch_amalgamated.hpp>

#include <fmt/format.h>

#include "fixtures.hpp"
#include "litmine/errors.hpp"
#include "litmine/judge.hpp"

using namespace litmine;
using namespace litmine::testing;
using nlohmann::json;

namespace {

std::unique_ptr<Fixture> six_paragraphs()
{
    return make_fixture({make_document("doc", {"p0", "p1", "p2", "p3", "p4", "p5"})}, {}, {}, WindowingConfig{2, 2});
}

ExtractionRecord record_on(std::string window_id, std::size_t i = 0)
{
    ExtractionRecord r;
    r.window_id = std::move(window_id);
    r.record_id = fmt::format("{}#{}", r.window_id, i);
    r.doc_id = "doc";
    r.probe_id = "p";
    r.fields = {{"compound", fmt::format("c{}", i)}};
    r.support_text = "p2";
    return r;
}

std::array<bool, 5> axes_of(unsigned mask)
{
    std::array<bool, 5> a{};
    for (std::size_t i = 0; i < 5; ++i) {
        a[i] = (mask >> i) & 1U;
    }
    return a;
}

json axes_json(const std::array<bool, 5>& a)
{
    json out = json::object();
    for (auto axis : kJudgeAxes) {
        out[std::string(to_string(axis))] = a[static_cast<std::size_t>(axis)];
    }
    return {{"axes", out}};
}

} // namespace

TEST_CASE("only the all-pass axis combination is kept")
{
    auto fx = six_paragraphs();
    std::vector<ExtractionRecord> records;
    for (unsigned mask = 0; mask < 32; ++mask) {
        records.push_back(record_on("doc@2+2", mask));
        auto v = make_verdict("r", axes_of(mask));
        CHECK(v.kept == (mask == 31));
    }
    CallbackOracle judge([](const OracleRequest& r) {
        auto id = r.payload.at("record_id").get<std::string>();
        auto mask = static_cast<unsigned>(std::stoul(id.substr(id.find('#') + 1)));
        return axes_json(axes_of(mask));
    });
    OracleRouter router;
    router.set(AgentRole::Judge, judge);
    auto out = filter_records(records, fx->corpus, {}, router);
    REQUIRE(out.kept.size() == 1);
    CHECK(out.kept[0].record_id == "doc@2+2#31");
    CHECK(out.report.graded == 32);
    CHECK(out.report.failed == 31);
    for (auto a : kJudgeAxes) {
        CHECK(out.report.axis_failures[static_cast<std::size_t>(a)] == 16);
    }
}

TEST_CASE("a single failed axis rejects the record")
{
    auto fx = six_paragraphs();
    std::vector<ExtractionRecord> records{record_on("doc@0+2", 0), record_on("doc@0+2", 1)};
    auto script = ScriptedOracle::from_json(json::array({
        {{"role", "Judge"}, {"kind", "judge_record"}, {"match", {{"record_id", "doc@0+2#0"}}},
         {"response", axes_json({true, true, true, true, true})}},
        {{"role", "Judge"}, {"kind", "judge_record"}, {"match", {{"record_id", "doc@0+2#1"}}},
         {"response", axes_json({true, true, true, true, false})}},
    }));
    OracleRouter router;
    router.set_all(script);
    auto out = filter_records(records, fx->corpus, {}, router);
    REQUIRE(out.kept.size() == 1);
    CHECK(out.kept[0].record_id == "doc@0+2#0");
    CHECK_FALSE(out.verdicts[1].passes(JudgeAxis::Accuracy));
    CHECK(out.verdicts[1].passes(JudgeAxis::SupportFidelity));
    CHECK(out.report.axis_failures[static_cast<std::size_t>(JudgeAxis::Accuracy)] == 1);
    CHECK(out.report.error_rate == 0.5);
    CHECK(out.verdicts[1].to_json().at("axes").at("accuracy") == false);
}

TEST_CASE("error rate over 100 records with 7 failures")
{
    auto fx = six_paragraphs();
    std::vector<ExtractionRecord> records;
    for (int i = 0; i < 100; ++i) {
        records.push_back(record_on("doc@4+2", i));
    }
    json script = json::array();
    for (int i = 0; i < 100; ++i) {
        std::array<bool, 5> a{true, true, true, true, true};
        if (i % 14 == 3) {
            a[static_cast<std::size_t>(i % 5)] = false;
        }
        script.push_back({{"role", "Judge"},
                          {"kind", "judge_record"},
                          {"match", {{"record_id", fmt::format("doc@4+2#{}", i)}}},
                          {"response", axes_json(a)}});
    }
    auto judge = ScriptedOracle::from_json(script);
    OracleRouter router;
    router.set_all(judge);
    auto out = filter_records(records, fx->corpus, {}, router);
    CHECK(out.report.failed == 7);
    CHECK(out.report.kept == 93);
    CHECK(out.report.error_rate == 0.07);
    CHECK(judge.remaining() == 0);
}

TEST_CASE("a failing Judge quarantines instead of keeping")
{
    auto fx = six_paragraphs();
    std::vector<ExtractionRecord> records{record_on("doc@0+2", 0), record_on("doc@0+2", 1)};
    auto script = ScriptedOracle::from_json(
        json::array({{{"role", "Judge"}, {"kind", "judge_record"}, {"response", axes_json(axes_of(31))}}}));
    OracleRouter router;
    router.set_all(script);
    auto out = filter_records(records, fx->corpus, {}, router);
    CHECK(out.kept.size() == 1);
    REQUIRE(out.quarantined.size() == 1);
    CHECK(out.quarantined[0].record_id == "doc@0+2#1");
    CHECK(out.verdicts[1].ungraded);
    CHECK_FALSE(out.verdicts[1].kept);
    CHECK(out.verdicts[1].to_json().at("axes").is_null());
    CHECK(out.report.graded == 1);
    CHECK(out.report.quarantined == 1);
    CHECK(out.report.error_rate == 0.0);
}

TEST_CASE("judge context spans neighboring windows of the same document")
{
    auto fx = six_paragraphs();
    CHECK(judge_context(record_on("doc@2+2"), fx->corpus, 0) == "p2\n\np3");
    CHECK(judge_context(record_on("doc@2+2"), fx->corpus, 1) == "p0\n\np1\n\np2\n\np3\n\np4\n\np5");
    CHECK(judge_context(record_on("doc@0+2"), fx->corpus, 1) == "p0\n\np1\n\np2\n\np3");
    CHECK_THROWS_AS(judge_context(record_on("doc@9+2"), fx->corpus, 1), DataError);
}

TEST_CASE("the Judge sees the record, its context and the rubric")
{
    auto fx = six_paragraphs();
    json seen;
    CallbackOracle judge([&](const OracleRequest& r) {
        seen = r.payload;
        return axes_json(axes_of(31));
    });
    OracleRouter router;
    router.set(AgentRole::Judge, judge);
    std::vector<ExtractionRecord> records{record_on("doc@2+2")};
    filter_records(records, fx->corpus, {"be strict", 0}, router);
    CHECK(seen.at("stage") == "judge");
    CHECK(seen.at("rubric") == "be strict");
    CHECK(seen.at("window_text") == "p2\n\np3");
    CHECK(seen.at("record").at("record_id") == "doc@2+2#0");
}
