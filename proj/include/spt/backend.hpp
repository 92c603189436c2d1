#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spt/core.hpp"

namespace spt {

enum class Role { system, user, assistant };

std::string_view to_string(Role role);
Role role_from_string(std::string_view name);

struct ChatMessage {
    Role role = Role::user;
    std::string content;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

enum class BackendKind { http_openai_compatible, scripted_mock };

struct BackendConfig {
    BackendKind kind = BackendKind::scripted_mock;
    // Base URL, e.g. https://api.openai.com or http://127.0.0.1:8000.
    std::string endpoint = "https://api.openai.com";
    std::string path = "/v1/chat/completions";
    std::string model = "gpt-4";
    // Used for corrector calls. Answer calls are always sent at temperature 0.
    double temperature = 0.0;
    int max_retries = 3;
    std::chrono::milliseconds timeout{120'000};
    std::chrono::milliseconds initial_backoff{500};
    std::string api_key_env = "OPENAI_API_KEY";
    int max_in_flight = 8;
    std::string mock_script_path;
    // Extra "Therefore, the number..." turns when the reply has no valid number.
    int reask_limit = 1;

    friend bool operator==(const BackendConfig&, const BackendConfig&) = default;
};

// Call metadata. Never sent over the wire; mocks and recorders key on it.
enum class CallPurpose { generic, answer, p_update, c_update };

struct CallTag {
    CallPurpose purpose = CallPurpose::generic;
    std::string item_id;
    int turn = 0;
    int candidate_index = 0;
};

// Uniform chat-completion interface. Implementations must be callable from
// several threads at once.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;

    // Requires a non-empty message list starting with a system message.
    std::string complete(std::span<const ChatMessage> messages, const CallTag& tag = {});

    // Items evaluated concurrently by the generator; 0 means one per hardware thread.
    virtual int preferred_parallelism() const { return 0; }

protected:
    virtual std::string do_complete(std::span<const ChatMessage> messages, const CallTag& tag) = 0;
};

std::unique_ptr<ChatBackend> make_backend(const BackendConfig& config);

inline constexpr std::string_view kAnswerCue = "The correct answer is:";
inline constexpr std::string_view kNumberCue = "Therefore, the number of the correct answer is:";

// Question followed by "1. <choice>" lines and the answer cue.
std::string render_question(const McqItem& item);

// First standalone integer in [1, num_choices], returned 0-based. A digit run
// is standalone when it is not glued to letters, digits, '_' or a decimal point.
std::optional<int> extract_answer_index(std::string_view reply, int num_choices);

// Two-turn answer flow: free answer at temperature 0, then the number cue.
// Throws UnparseableAnswerError after reask_limit extra number prompts fail.
int answer_mcq(ChatBackend& backend, std::string_view system_prompt, const McqItem& item, int reask_limit = 1);

}  // namespace spt
