#include <gtest/gtest.h>

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "spt/error.hpp"
#include "spt/http_backend.hpp"
#include "spt/io.hpp"

using namespace spt;

namespace {

struct Canned {
    int status;
    std::string body;
};

std::string completion(const std::string& text) {
    return R"({"id":"x","choices":[{"index":0,"message":{"role":"assistant","content":")" + text + R"("}}]})";
}

// Local stand-in for an OpenAI-compatible server replaying a canned sequence.
// Once the sequence runs out the last response repeats.
class StubServer {
public:
    explicit StubServer(std::vector<Canned> script, std::chrono::milliseconds delay = {})
        : script_(std::move(script)), delay_(delay) {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            const int now = ++active_;
            int seen = max_active_.load();
            while (now > seen && !max_active_.compare_exchange_weak(seen, now)) {
            }
            std::this_thread::sleep_for(delay_);
            Canned reply;
            {
                std::lock_guard lock(mutex_);
                bodies_.push_back(req.body);
                auth_.push_back(req.get_header_value("Authorization"));
                reply = script_[std::min(bodies_.size() - 1, script_.size() - 1)];
            }
            --active_;
            res.status = reply.status;
            res.set_content(reply.body, "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~StubServer() {
        server_.stop();
        thread_.join();
    }

    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }
    std::vector<std::string> bodies() {
        std::lock_guard lock(mutex_);
        return bodies_;
    }
    std::vector<std::string> auth() {
        std::lock_guard lock(mutex_);
        return auth_;
    }
    int max_active() const { return max_active_.load(); }

private:
    httplib::Server server_;
    std::vector<Canned> script_;
    std::chrono::milliseconds delay_;
    std::mutex mutex_;
    std::vector<std::string> bodies_;
    std::vector<std::string> auth_;
    std::atomic<int> active_{0};
    std::atomic<int> max_active_{0};
    int port_ = 0;
    std::thread thread_;
};

BackendConfig config_for(const StubServer& stub) {
    BackendConfig c;
    c.kind = BackendKind::http_openai_compatible;
    c.endpoint = stub.endpoint();
    c.initial_backoff = std::chrono::milliseconds(1);
    c.timeout = std::chrono::milliseconds(5000);
    c.api_key_env = "SPT_TEST_API_KEY_UNSET";
    return c;
}

const std::vector<ChatMessage> kRequest = {{Role::system, "Be precise."}, {Role::user, "Hello"}};

}  // namespace

TEST(HttpBackend, RequestBodyMatchesGolden) {
    const std::vector<ChatMessage> messages = {
        {Role::system, "Be precise."},
        {Role::user, "What is 2+2?\n1. 3\n2. 4\n3. 5\nThe correct answer is:"},
    };
    std::string golden = read_file(std::string(SPT_GOLDEN_DIR) + "/chat_request.json");
    golden.pop_back();  // trailing newline
    EXPECT_EQ(OpenAiBackend::request_body("gpt-4", messages, 0.0), golden);
}

TEST(HttpBackend, RetriesAfter429) {
    StubServer stub({{429, R"({"error":"slow down"})"}, {200, completion("4")}});
    OpenAiBackend backend(config_for(stub));
    EXPECT_EQ(backend.complete(kRequest), "4");
    EXPECT_EQ(stub.bodies().size(), 2u);
}

TEST(HttpBackend, AnswerCallsUseTemperatureZero) {
    StubServer stub({{200, completion("ok")}});
    BackendConfig config = config_for(stub);
    config.temperature = 1.0;
    OpenAiBackend backend(config);
    backend.complete(kRequest, {CallPurpose::answer, "q1", 1, 0});
    backend.complete(kRequest, {CallPurpose::p_update, "", 0, 0});
    const auto bodies = stub.bodies();
    ASSERT_EQ(bodies.size(), 2u);
    EXPECT_EQ(nlohmann::json::parse(bodies[0])["temperature"], 0.0);
    EXPECT_EQ(nlohmann::json::parse(bodies[1])["temperature"], 1.0);
    EXPECT_EQ(bodies[0], OpenAiBackend::request_body("gpt-4", kRequest, 0.0));
}

TEST(HttpBackend, ClientErrorIsNotRetried) {
    StubServer stub({{400, R"({"error":{"message":"bad request"}})"}});
    OpenAiBackend backend(config_for(stub));
    try {
        backend.complete(kRequest);
        FAIL() << "expected ProviderError";
    } catch (const ProviderError& e) {
        EXPECT_EQ(e.status(), 400);
        EXPECT_NE(e.body().find("bad request"), std::string::npos);
    }
    EXPECT_EQ(stub.bodies().size(), 1u);
}

TEST(HttpBackend, GivesUpAfterMaxRetries) {
    StubServer stub({{503, "unavailable"}});
    BackendConfig config = config_for(stub);
    config.max_retries = 2;
    OpenAiBackend backend(config);
    EXPECT_THROW(backend.complete(kRequest), ProviderError);
    EXPECT_EQ(stub.bodies().size(), 3u);
}

TEST(HttpBackend, TransportErrorWhenNothingListens) {
    std::string endpoint;
    {
        StubServer stub({{200, completion("x")}});
        endpoint = stub.endpoint();
    }
    BackendConfig config;
    config.kind = BackendKind::http_openai_compatible;
    config.endpoint = endpoint;
    config.max_retries = 1;
    config.initial_backoff = std::chrono::milliseconds(1);
    config.timeout = std::chrono::milliseconds(500);
    OpenAiBackend backend(config);
    EXPECT_THROW(backend.complete(kRequest), TransportError);
}

TEST(HttpBackend, MalformedResponse) {
    StubServer stub({{200, R"({"choices":[]})"}});
    OpenAiBackend backend(config_for(stub));
    EXPECT_THROW(backend.complete(kRequest), BackendError);
}

TEST(HttpBackend, SendsBearerKeyFromEnvironment) {
    StubServer stub({{200, completion("ok")}});
    ::setenv("SPT_TEST_API_KEY", "sk-test", 1);
    BackendConfig config = config_for(stub);
    config.api_key_env = "SPT_TEST_API_KEY";
    OpenAiBackend backend(config);
    backend.complete(kRequest);
    ::unsetenv("SPT_TEST_API_KEY");
    EXPECT_EQ(stub.auth().at(0), "Bearer sk-test");
}

TEST(HttpBackend, CapsRequestsInFlight) {
    StubServer stub({{200, completion("ok")}}, std::chrono::milliseconds(30));
    BackendConfig config = config_for(stub);
    config.max_in_flight = 2;
    OpenAiBackend backend(config);
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i) {
        threads.emplace_back([&] { backend.complete(kRequest); });
    }
    for (auto& t : threads) {
        t.join();
    }
    EXPECT_EQ(stub.bodies().size(), 8u);
    EXPECT_LE(stub.max_active(), 2);
}
