#include <catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "litmine/corpus.hpp"
#include "litmine/errors.hpp"

using namespace litmine;
using namespace litmine::testing;

namespace {

std::vector<std::string> paras(std::size_t n)
{
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back("p" + std::to_string(i));
    }
    return out;
}

/// Independent enumeration: starts 0, S, 2S, ... until a window reaches the end.
std::vector<std::pair<std::size_t, std::size_t>> reference_spans(std::size_t n, std::size_t w, std::size_t s)
{
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t start = 0;; start += s) {
        std::size_t end = std::min(start + w, n);
        out.emplace_back(start, end - start);
        if (start + w >= n) {
            break;
        }
    }
    return out;
}

} // namespace

TEST_CASE("five paragraphs make one full window")
{
    auto spans = window_spans(5, {5, 2});
    REQUIRE(spans.size() == 1);
    CHECK(spans[0] == std::pair<std::size_t, std::size_t>{0, 5});
}

TEST_CASE("nine paragraphs make windows at 0, 2 and 4")
{
    auto spans = window_spans(9, {5, 2});
    REQUIRE(spans.size() == 3);
    CHECK(spans[0].first == 0);
    CHECK(spans[1].first == 2);
    CHECK(spans[2].first == 4);
    CHECK(spans[2].second == 5);
}

TEST_CASE("window spans agree with the closed-form count and an independent enumeration")
{
    for (std::size_t w = 1; w <= 8; ++w) {
        for (std::size_t s = 1; s <= w; ++s) {
            for (std::size_t n = 1; n <= 40; ++n) {
                auto spans = window_spans(n, {w, s});
                CHECK(spans == reference_spans(n, w, s));
                std::size_t expected = 1 + (n > w ? (n - w + s - 1) / s : 0);
                CHECK(spans.size() == expected);
                // Every paragraph is covered and no window is empty.
                std::vector<bool> covered(n, false);
                for (auto [start, count] : spans) {
                    CHECK(count >= 1);
                    CHECK(start + count <= n);
                    for (auto p = start; p < start + count; ++p) {
                        covered[p] = true;
                    }
                }
                CHECK(std::all_of(covered.begin(), covered.end(), [](bool b) { return b; }));
            }
        }
    }
}

TEST_CASE("windowing rejects impossible configurations")
{
    CHECK_THROWS_AS((WindowingConfig{0, 1}.validate()), ConfigError);
    CHECK_THROWS_AS((WindowingConfig{5, 0}.validate()), ConfigError);
    CHECK_THROWS_AS((WindowingConfig{3, 4}.validate()), ConfigError);
}

TEST_CASE("empty documents are rejected")
{
    std::vector<Document> docs{make_document("a", {})};
    CHECK_THROWS_AS(Corpus::from_documents(docs, {}), DataError);
}

TEST_CASE("duplicate doc ids are rejected")
{
    std::vector<Document> docs{make_document("a", paras(2)), make_document("a", paras(3))};
    CHECK_THROWS_AS(Corpus::from_documents(docs, {}), DataError);
}

TEST_CASE("window ids and text are deterministic")
{
    auto corpus = Corpus::from_documents({make_document("doc1", paras(9))}, {5, 2});
    REQUIRE(corpus.window_count() == 3);
    CHECK(corpus.window(0).window_id == "doc1@0+5");
    CHECK(corpus.window(2).window_id == "doc1@4+5");
    CHECK(corpus.window(1).text == "p2\n\np3\n\np4\n\np5\n\np6");
    CHECK(corpus.find_window("doc1@2+5") == WindowOrdinal{1});
    CHECK_FALSE(corpus.find_window("doc1@1+5"));
    CHECK(corpus.windows_of(0) == std::pair<WindowOrdinal, WindowOrdinal>{0, 3});
}

TEST_CASE("corpus loads JSON lines and reports the offending line")
{
    TempDir dir;
    write_text(dir / "ok.jsonl",
               R"({"doc_id":"a","paragraphs":["x","y"],"metadata":{"year":"2020"}})"
               "\n\n"
               R"({"doc_id":"b","paragraphs":["z"]})"
               "\n");
    auto corpus = Corpus::load(dir / "ok.jsonl", {});
    CHECK(corpus.documents().size() == 2);
    CHECK(corpus.documents()[0].metadata.at("year") == "2020");

    write_text(dir / "bad.jsonl", R"({"doc_id":"a","paragraphs":["x"]})"
                                  "\n"
                                  R"({"doc_id":"b","paragraphs":[]})"
                                  "\n");
    try {
        Corpus::load(dir / "bad.jsonl", {});
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("bad.jsonl:2") != std::string::npos);
    }
}
