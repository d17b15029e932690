#include <atomic>
#include <thread>

#include <catch_amalgamated.hpp>
#include <httplib.h>

#include "litmine/embedding.hpp"
#include "litmine/errors.hpp"
#include "litmine/oracle.hpp"

using namespace litmine;
using nlohmann::json;

namespace {

/// Local HTTP server on an ephemeral port, stopped on destruction.
class StubServer {
public:
    explicit StubServer(std::function<void(const httplib::Request&, httplib::Response&)> handler)
    {
        server_.Post("/.*", [this, handler](const httplib::Request& req, httplib::Response& res) {
            ++hits;
            handler(req, res);
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubServer()
    {
        server_.stop();
        thread_.join();
    }

    std::string url(std::string_view path = "/oracle") const
    {
        return "http://127.0.0.1:" + std::to_string(port_) + std::string(path);
    }

    std::atomic<int> hits{0};

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
};

RetryPolicy fast_retry()
{
    return RetryPolicy{3, std::chrono::milliseconds(5), 2.0};
}

} // namespace

TEST_CASE("HTTP oracle posts role, kind and payload with the bearer token")
{
    std::string seen_auth;
    json seen_body;
    StubServer server([&](const httplib::Request& req, httplib::Response& res) {
        seen_auth = req.get_header_value("Authorization");
        seen_body = json::parse(req.body);
        res.set_content(R"({"relevant": true})", "application/json");
    });
    HttpOracle oracle(server.url(), std::string("secret"), fast_retry());
    OracleRouter router;
    router.set_all(oracle);
    auto reply = router.call(AgentRole::Validator, kinds::judge_relevance, {{"window_id", "w1"}});
    CHECK(reply == json{{"relevant", true}});
    CHECK(seen_auth == "Bearer secret");
    CHECK(seen_body["role"] == "Validator");
    CHECK(seen_body["kind"] == "judge_relevance");
    CHECK(seen_body["payload"]["window_id"] == "w1");
}

TEST_CASE("garbage bodies become a protocol error after the configured attempts")
{
    StubServer server([](const httplib::Request&, httplib::Response& res) {
        res.set_content("<<<not json>>>", "text/plain");
    });
    HttpOracle oracle(server.url(), std::nullopt, fast_retry());
    OracleRouter router;
    router.set_all(oracle);
    try {
        router.call(AgentRole::Validator, kinds::judge_relevance, {});
        FAIL("expected ProtocolError");
    } catch (const ProtocolError& e) {
        CHECK(std::string(e.what()).find("after 3 attempts") != std::string::npos);
    }
    CHECK(server.hits == 3);
}

TEST_CASE("bodies with the wrong shape are retried the same way")
{
    StubServer server([](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"relevant": "yes"})", "application/json");
    });
    HttpOracle oracle(server.url(), std::nullopt, fast_retry());
    CHECK_THROWS_AS(oracle.call({AgentRole::Validator, "judge_relevance", json::object()}), ProtocolError);
    CHECK(server.hits == 3);
}

TEST_CASE("server errors are retried and recover")
{
    std::atomic<int> calls{0};
    StubServer server([&](const httplib::Request&, httplib::Response& res) {
        if (++calls < 3) {
            res.status = 503;
            return;
        }
        res.set_content(R"({"pass": true})", "application/json");
    });
    HttpOracle oracle(server.url(), std::nullopt, fast_retry());
    auto reply = oracle.call({AgentRole::Validator, "score_extraction", json::object()});
    CHECK(reply.payload == json{{"pass", true}});
    CHECK(server.hits == 3);
}

TEST_CASE("persistent server errors surface as transport errors")
{
    StubServer server([](const httplib::Request&, httplib::Response& res) { res.status = 500; });
    HttpOracle oracle(server.url(), std::nullopt, fast_retry());
    CHECK_THROWS_AS(oracle.call({AgentRole::Validator, "score_extraction", json::object()}), TransportError);
    CHECK(server.hits == 3);
}

TEST_CASE("unreachable oracle is a transport error")
{
    HttpOracle oracle("http://127.0.0.1:1/x", std::nullopt, RetryPolicy{2, std::chrono::milliseconds(1), 1.0});
    CHECK_THROWS_AS(oracle.call({AgentRole::Validator, "score_extraction", json::object()}), TransportError);
}

TEST_CASE("HTTP embedder batches texts and checks dimensions")
{
    std::atomic<int> batches{0};
    StubServer server([&](const httplib::Request& req, httplib::Response& res) {
        ++batches;
        auto texts = json::parse(req.body).at("texts");
        json vectors = json::array();
        for (const auto& t : texts) {
            auto s = t.get<std::string>();
            vectors.push_back({static_cast<double>(s.size()), 1.0, 0.0});
        }
        res.set_content(json{{"vectors", vectors}}.dump(), "application/json");
    });
    HttpEmbedder embedder(server.url("/embed"), 3, fast_retry(), 2);
    std::vector<std::string> texts{"a", "bb", "ccc", "dddd", "eeeee"};
    auto out = embedder.embed_batch(texts);
    REQUIRE(out.size() == 5);
    CHECK(batches == 3);
    // Rows are normalized on arrival.
    CHECK(out[0].norm() == Catch::Approx(1.0));
    CHECK(out[4].values()[0] > out[0].values()[0]);

    HttpEmbedder wrong_dim(server.url("/embed"), 4, fast_retry());
    CHECK_THROWS_AS(wrong_dim.embed("x"), ConfigError);
}
