#pragma once

#include <memory>
#include <semaphore>
#include <string>

#include "spt/backend.hpp"

namespace spt {

// Client for POST /v1/chat/completions on OpenAI-compatible servers.
//
// Transport failures, 429 and 5xx responses are retried up to
// config.max_retries times with exponential backoff starting at
// config.initial_backoff. Any other non-2xx status fails immediately with a
// ProviderError carrying the response body. At most config.max_in_flight
// requests are outstanding at once across all threads.
class OpenAiBackend : public ChatBackend {
public:
    explicit OpenAiBackend(BackendConfig config);

    // Request JSON as sent on the wire.
    static std::string request_body(std::string_view model, std::span<const ChatMessage> messages, double temperature);

    // choices[0].message.content of a chat completion response.
    static std::string parse_response(std::string_view body);

    int preferred_parallelism() const override { return config_.max_in_flight; }

protected:
    std::string do_complete(std::span<const ChatMessage> messages, const CallTag& tag) override;

private:
    BackendConfig config_;
    std::string api_key_;
    std::unique_ptr<std::counting_semaphore<>> in_flight_;
};

}  // namespace spt
