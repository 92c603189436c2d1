#include "spt/http_backend.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "spt/error.hpp"

namespace spt {

namespace {

bool is_transient(int status) {
    return status == 429 || status == 500 || status == 502 || status == 503 || status == 504;
}

class SlotGuard {
public:
    explicit SlotGuard(std::counting_semaphore<>& sem) : sem_(sem) { sem_.acquire(); }
    ~SlotGuard() { sem_.release(); }
    SlotGuard(const SlotGuard&) = delete;
    SlotGuard& operator=(const SlotGuard&) = delete;

private:
    std::counting_semaphore<>& sem_;
};

}  // namespace

OpenAiBackend::OpenAiBackend(BackendConfig config) : config_(std::move(config)) {
    if (config_.max_retries < 0) {
        throw ConfigError("max_retries must be >= 0");
    }
    if (config_.max_in_flight < 1) {
        throw ConfigError("max_in_flight must be >= 1");
    }
    if (!config_.api_key_env.empty()) {
        if (const char* key = std::getenv(config_.api_key_env.c_str())) {
            api_key_ = key;
        }
    }
    in_flight_ = std::make_unique<std::counting_semaphore<>>(config_.max_in_flight);
}

std::string OpenAiBackend::request_body(std::string_view model, std::span<const ChatMessage> messages,
                                        double temperature) {
    nlohmann::ordered_json body;
    body["model"] = model;
    body["messages"] = nlohmann::ordered_json::array();
    for (const auto& m : messages) {
        body["messages"].push_back({{"role", to_string(m.role)}, {"content", m.content}});
    }
    body["temperature"] = temperature;
    return body.dump();
}

std::string OpenAiBackend::parse_response(std::string_view body) {
    try {
        const auto doc = nlohmann::json::parse(body);
        const auto& content = doc.at("choices").at(0).at("message").at("content");
        return content.is_null() ? std::string() : content.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw BackendError(std::string("malformed chat completion response: ") + e.what());
    }
}

std::string OpenAiBackend::do_complete(std::span<const ChatMessage> messages, const CallTag& tag) {
    const double temperature = tag.purpose == CallPurpose::answer ? 0.0 : config_.temperature;
    const std::string body = request_body(config_.model, messages, temperature);

    httplib::Headers headers;
    if (!api_key_.empty()) {
        headers.emplace("Authorization", "Bearer " + api_key_);
    }

    SlotGuard slot(*in_flight_);
    httplib::Client client(config_.endpoint);
    const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    std::string last_error;
    int last_status = 0;
    std::string last_body;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(config_.initial_backoff * (1 << std::min(attempt - 1, 16)));
        }
        auto res = client.Post(config_.path, headers, body, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            last_status = 0;
            continue;
        }
        if (res->status >= 200 && res->status < 300) {
            return parse_response(res->body);
        }
        last_status = res->status;
        last_body = res->body;
        if (!is_transient(res->status)) {
            break;
        }
    }
    if (last_status != 0) {
        throw ProviderError(last_status, last_body);
    }
    throw TransportError("request to " + config_.endpoint + config_.path + " failed after " +
                         std::to_string(config_.max_retries + 1) + " attempts: " + last_error);
}

}  // namespace spt
