#include "spt/backend.hpp"

#include <cctype>

#include "spt/error.hpp"
#include "spt/http_backend.hpp"
#include "spt/mock_backend.hpp"

namespace spt {

namespace {

bool is_word(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool is_digit(char c) {
    return c >= '0' && c <= '9';
}

}  // namespace

std::string_view to_string(Role role) {
    switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
    }
    return "user";
}

Role role_from_string(std::string_view name) {
    if (name == "system") return Role::system;
    if (name == "user") return Role::user;
    if (name == "assistant") return Role::assistant;
    throw ConfigError("unknown chat role '" + std::string(name) + "'");
}

std::string ChatBackend::complete(std::span<const ChatMessage> messages, const CallTag& tag) {
    if (messages.empty()) {
        throw PreconditionError("complete() needs at least one message");
    }
    if (messages.front().role != Role::system) {
        throw PreconditionError("first message must have role system");
    }
    return do_complete(messages, tag);
}

std::unique_ptr<ChatBackend> make_backend(const BackendConfig& config) {
    switch (config.kind) {
    case BackendKind::http_openai_compatible:
        return std::make_unique<OpenAiBackend>(config);
    case BackendKind::scripted_mock:
        if (config.mock_script_path.empty()) {
            throw ConfigError("mock backend needs a mock script path");
        }
        return std::make_unique<ScriptedMock>(MockScript::load(config.mock_script_path));
    }
    throw ConfigError("unknown backend kind");
}

std::string render_question(const McqItem& item) {
    std::string out = item.question;
    for (std::size_t i = 0; i < item.choices.size(); ++i) {
        out += "\n" + std::to_string(i + 1) + ". " + item.choices[i];
    }
    out += "\n";
    out += kAnswerCue;
    return out;
}

std::optional<int> extract_answer_index(std::string_view reply, int num_choices) {
    const std::size_t n = reply.size();
    std::size_t i = 0;
    while (i < n) {
        if (!is_digit(reply[i])) {
            ++i;
            continue;
        }
        std::size_t end = i;
        while (end < n && is_digit(reply[end])) {
            ++end;
        }
        const bool glued_before =
            (i > 0 && is_word(reply[i - 1])) || (i > 1 && reply[i - 1] == '.' && is_word(reply[i - 2]));
        const bool glued_after =
            (end < n && is_word(reply[end])) || (end + 1 < n && reply[end] == '.' && is_digit(reply[end + 1]));
        if (!glued_before && !glued_after) {
            std::size_t first = i;
            while (first + 1 < end && reply[first] == '0') {
                ++first;
            }
            if (end - first <= 2) {
                const int value = std::stoi(std::string(reply.substr(first, end - first)));
                if (value >= 1 && value <= num_choices) {
                    return value - 1;
                }
            }
        }
        i = end;
    }
    return std::nullopt;
}

int answer_mcq(ChatBackend& backend, std::string_view system_prompt, const McqItem& item, int reask_limit) {
    validate(item);
    const int k = static_cast<int>(item.choices.size());
    std::vector<ChatMessage> conversation{
        {Role::system, std::string(system_prompt)},
        {Role::user, render_question(item)},
    };
    CallTag tag{CallPurpose::answer, item.id, 1, 0};
    conversation.push_back({Role::assistant, backend.complete(conversation, tag)});

    std::string last_reply;
    for (int attempt = 0; attempt <= reask_limit; ++attempt) {
        conversation.push_back({Role::user, std::string(kNumberCue)});
        tag.turn = 2 + attempt;
        last_reply = backend.complete(conversation, tag);
        if (auto index = extract_answer_index(last_reply, k)) {
            return *index;
        }
        conversation.push_back({Role::assistant, last_reply});
    }
    throw UnparseableAnswerError("item '" + item.id + "': no choice number in reply '" + last_reply + "'");
}

}  // namespace spt
