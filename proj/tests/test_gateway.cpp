#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "rhetor/errors.hpp"
#include "rhetor/gateway.hpp"
#include "rhetor/rag.hpp"
#include "test_support.hpp"

using namespace rhetor;
using testsupport::MockHarness;

TEST_CASE("parse_single_object accepts exactly one object") {
    CHECK(parse_single_object(R"({"a":1})") == json{{"a", 1}});
    CHECK(parse_single_object("  \n {\"a\": 1}\t ") == json{{"a", 1}});
    // braces inside string literals don't confuse the scanner
    CHECK(parse_single_object(R"({"a":"}{"})") == json{{"a", "}{"}});
}

TEST_CASE("parse_single_object distinguishes failure kinds") {
    using Kind = NotSingleObjectError::Kind;
    auto kind_of = [](const std::string& text) {
        try {
            parse_single_object(text);
        } catch (const NotSingleObjectError& e) {
            return e.kind();
        }
        throw std::logic_error("expected NotSingleObjectError");
    };

    CHECK(kind_of("") == Kind::Empty);
    CHECK(kind_of("   \n ") == Kind::Empty);
    CHECK(kind_of(R"({"a":1}{"b":2})") == Kind::MultipleObjects);
    CHECK(kind_of(R"( ok {"a":1})") == Kind::ProseWrapped);
    CHECK(kind_of(R"({"a":1} trailing words)") == Kind::ProseWrapped);
    CHECK(kind_of(R"({"a":1)") == Kind::SyntaxError);
    CHECK(kind_of(R"([1,2])") == Kind::SyntaxError);
    CHECK(kind_of("just prose") == Kind::SyntaxError);
    CHECK(kind_of(R"({"a":,})") == Kind::SyntaxError);
}

TEST_CASE("mock fallback is a pure function of seed and prompt") {
    const std::string prompt = "<agent_role>selector</agent_role> question text";
    CHECK(MockBackend::fallback_reply(7, prompt) == MockBackend::fallback_reply(7, prompt));
    CHECK(MockBackend::fallback_reply(7, prompt) != MockBackend::fallback_reply(8, prompt));
    CHECK(MockBackend::fallback_reply(7, prompt) !=
          MockBackend::fallback_reply(7, prompt + "!"));

    MockHarness h;
    CompletionRequest request;
    request.prompt = prompt;
    request.seed = 7;
    const std::string first = h.gateway->complete(request);
    CHECK(h.gateway->complete(request) == first);
}

TEST_CASE("complete retries transient failures with backoff") {
    MockHarness h(/*max_retries=*/2);
    h.mock->add_rule("PING", {MockReply::transient_failure(), MockReply::transient_failure(),
                              MockReply::text_reply("pong")});
    CompletionRequest request;
    request.prompt = "PING";
    CHECK(h.gateway->complete(request) == "pong");
    CHECK(h.mock->call_count() == 3);
}

TEST_CASE("complete gives up after max_retries transient failures") {
    MockHarness h(/*max_retries=*/2);
    h.mock->add_rule("PING", {MockReply::transient_failure()});
    CompletionRequest request;
    request.prompt = "PING";
    CHECK_THROWS_AS(h.gateway->complete(request), TransportError);
    CHECK(h.mock->call_count() == 3);  // 1 + max_retries
}

TEST_CASE("auth failures are never retried") {
    MockHarness h;
    h.mock->add_rule("PING", {MockReply::auth_failure()});
    CompletionRequest request;
    request.prompt = "PING";
    CHECK_THROWS_AS(h.gateway->complete(request), AuthConfigError);
    CHECK(h.mock->call_count() == 1);

    CompletionRequest empty;
    CHECK_THROWS_AS(h.gateway->complete(empty), PreconditionError);
}

static const std::string kExtractor = "<extract>{{raw}}</extract>";

TEST_CASE("reason_then_extract returns the single object") {
    MockHarness h;
    h.mock->add_text_rule("REASON",
                          "<thinking>think</thinking> {\"principle\":\"x\"} done");
    h.mock->add_text_rule("<extract>", "{\"principle\":\"x\"}");
    const ExtractionResult result =
        h.gateway->reason_then_extract("REASON now", kExtractor, 1);
    CHECK(result.object == json{{"principle", "x"}});
    CHECK(result.attempts == 1);
    CHECK(result.raw_reasoning ==
          "<thinking>think</thinking> {\"principle\":\"x\"} done");
}

TEST_CASE("reason_then_extract retries a dirty extraction") {
    MockHarness h;
    h.mock->add_text_rule("REASON", "blah {\"a\":1}");
    h.mock->add_rule("<extract>", {MockReply::text_reply("yes: {\"a\":1}"),
                                   MockReply::text_reply("{\"a\":1}")});
    const ExtractionResult result =
        h.gateway->reason_then_extract("REASON", kExtractor, 1);
    CHECK(result.object == json{{"a", 1}});
    CHECK(result.attempts == 2);
}

TEST_CASE("reason_then_extract exhausts retries on persistent prose") {
    MockHarness h(/*max_retries=*/2);
    h.mock->add_text_rule("REASON", "text");
    h.mock->add_text_rule("<extract>", "I am only prose");
    try {
        h.gateway->reason_then_extract("REASON", kExtractor, 1);
        FAIL("expected ExtractionFailedError");
    } catch (const ExtractionFailedError& e) {
        CHECK(e.attempts() == 3);
        CHECK(e.last_text() == "I am only prose");
    }
}

TEST_CASE("extractor template must carry a raw placeholder") {
    MockHarness h;
    CHECK_THROWS_AS(h.gateway->reason_then_extract("REASON", "no slot here", 1),
                    ConfigError);
}

TEST_CASE("fallback extractor pulls the object out of the raw block") {
    const std::string prompt =
        "<agent_role>json_extractor</agent_role>\n<raw>\nnoise {\"k\": [1, 2]} tail\n</raw>";
    CHECK(parse_single_object(MockBackend::fallback_reply(0, prompt)) ==
          json{{"k", {1, 2}}});
}

// ---------------------------------------------------------------------------
// Remote backend against an in-process HTTP server

namespace {

struct TestServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    explicit TestServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
        server.Post("/v1/chat/completions", std::move(handler));
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~TestServer() {
        server.stop();
        thread.join();
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port) + "/v1"; }
};

BackendConfig remote_config(const std::string& base_url) {
    BackendConfig config;
    config.kind = BackendKind::Remote;
    config.base_url = base_url;
    config.api_key_env = "RHETOR_TEST_KEY";
    config.max_retries = 2;
    config.retry_backoff = std::chrono::milliseconds(1);
    return config;
}

}  // namespace

TEST_CASE("remote backend speaks the chat-completion wire format") {
    setenv("RHETOR_TEST_KEY", "sk-test", 1);
    std::string seen_auth, seen_model;
    TestServer server([&](const httplib::Request& req, httplib::Response& res) {
        seen_auth = req.get_header_value("Authorization");
        const json body = json::parse(req.body);
        seen_model = body.at("model").get<std::string>();
        const std::string prompt =
            body.at("messages").at(0).at("content").get<std::string>();
        res.set_content(
            json{{"choices",
                  json::array({json{{"message", json{{"content", "echo:" + prompt}}}}})}}
                .dump(),
            "application/json");
    });

    Gateway gateway(remote_config(server.base_url()));
    CompletionRequest request;
    request.prompt = "hello";
    request.model_name = "test-model";
    CHECK(gateway.complete(request) == "echo:hello");
    CHECK(seen_auth == "Bearer sk-test");
    CHECK(seen_model == "test-model");
}

TEST_CASE("remote backend retries 5xx and fails fast on 401") {
    setenv("RHETOR_TEST_KEY", "sk-test", 1);

    SUBCASE("5xx then success") {
        std::atomic<int> calls{0};
        TestServer server([&](const httplib::Request&, httplib::Response& res) {
            if (calls.fetch_add(1) < 2) {
                res.status = 503;
                return;
            }
            res.set_content(
                json{{"choices",
                      json::array({json{{"message", json{{"content", "ok"}}}}})}}
                    .dump(),
                "application/json");
        });
        Gateway gateway(remote_config(server.base_url()));
        CompletionRequest request;
        request.prompt = "x";
        CHECK(gateway.complete(request) == "ok");
        CHECK(calls.load() == 3);
    }

    SUBCASE("401 is an auth error, not retried") {
        std::atomic<int> calls{0};
        TestServer server([&](const httplib::Request&, httplib::Response& res) {
            calls.fetch_add(1);
            res.status = 401;
        });
        Gateway gateway(remote_config(server.base_url()));
        CompletionRequest request;
        request.prompt = "x";
        CHECK_THROWS_AS(gateway.complete(request), AuthConfigError);
        CHECK(calls.load() == 1);
    }
}

TEST_CASE("remote kind without the key env var is an auth config error") {
    unsetenv("RHETOR_MISSING_KEY");
    BackendConfig config = remote_config("http://127.0.0.1:1/v1");
    config.api_key_env = "RHETOR_MISSING_KEY";
    CHECK_THROWS_AS(Gateway{config}, AuthConfigError);
}

TEST_CASE("remote kind requires a base URL") {
    BackendConfig config;
    config.kind = BackendKind::Remote;
    CHECK_THROWS_AS(Gateway{config}, ConfigError);
}

TEST_CASE("remote embedder round-trips vectors from an embeddings endpoint") {
    setenv("RHETOR_TEST_KEY", "sk-test", 1);
    httplib::Server server;
    server.Post("/embeddings", [](const httplib::Request& req, httplib::Response& res) {
        const json body = json::parse(req.body);
        const std::string input = body.at("input").get<std::string>();
        std::vector<double> vector(4, 0.0);
        vector[0] = static_cast<double>(input.size());
        vector[1] = 1.0;
        res.set_content(
            json{{"data", json::array({json{{"embedding", vector}}})}}.dump(),
            "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    rhetor::EmbedderConfig config;
    config.kind = rhetor::EmbedderKind::Remote;
    config.base_url = "http://127.0.0.1:" + std::to_string(port);
    config.api_key_env = "RHETOR_TEST_KEY";
    config.dimension = 4;
    config.normalize = false;
    const auto v = rhetor::embed(config, "seven77");
    CHECK(v == std::vector<double>{7.0, 1.0, 0.0, 0.0});

    SUBCASE("dimension mismatches are config errors") {
        config.dimension = 8;
        CHECK_THROWS_AS(rhetor::embed(config, "text"), ConfigError);
    }

    server.stop();
    thread.join();
}
