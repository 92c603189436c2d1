#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <variant>

#include <json.hpp>

#include "spt/backend.hpp"

namespace spt {

// Lowercase hex SHA-256 over "<role>:<content>\x1e" for each message, with
// CRLF folded to LF.
std::string fingerprint(std::span<const ChatMessage> messages);

// Fingerprint of a conversation holding only this system prompt.
std::string prompt_fingerprint(std::string_view system_prompt);

// A scripted answer: an int is a 0-based choice index (replayed as its
// 1-based number); a string is replayed as raw reply text.
using ScriptedReply = std::variant<int, std::string>;

std::string reply_text(const ScriptedReply& reply);

struct PromptAnswers {
    std::string prompt;  // informational; the key is the fingerprint
    std::map<std::string, ScriptedReply> replies;
    std::optional<ScriptedReply> fallback;
};

// Replay table for ScriptedMock.
//
//   {"schema": 1,
//    "answers": [{"prompt": "...", "prompt_fingerprint": "<hex>",
//                 "replies": {"<item id>": 1, "<item id>": "raw text"},
//                 "default": 0}],
//    "completions": {"<request fingerprint>": "text" | ["cand 0", "cand 1"]},
//    "default_answer": 0, "default_completion": "..."}
//
// An answers entry may give "prompt" alone; its fingerprint is then derived.
struct MockScript {
    std::map<std::string, PromptAnswers> answers;
    std::map<std::string, std::vector<std::string>> completions;
    std::optional<ScriptedReply> default_answer;
    std::optional<std::string> default_completion;

    static MockScript from_json(const nlohmann::json& doc);
    static MockScript load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
    void save(const std::filesystem::path& path) const;

    // Convenience for hand-built scripts.
    void set_answer(std::string_view prompt, const std::string& item_id, ScriptedReply reply);
    void set_completion(std::span<const ChatMessage> request, std::vector<std::string> responses);
};

// Deterministic replay of a MockScript. Answer calls (CallPurpose::answer)
// look up (prompt fingerprint, item id); every other call looks up the
// request fingerprint and picks the response at the tag's candidate index.
class ScriptedMock : public ChatBackend {
public:
    explicit ScriptedMock(MockScript script) : script_(std::move(script)) {}

    const MockScript& script() const noexcept { return script_; }
    std::size_t calls() const noexcept { return calls_.load(); }

protected:
    std::string do_complete(std::span<const ChatMessage> messages, const CallTag& tag) override;

private:
    MockScript script_;
    std::atomic<std::size_t> calls_{0};
};

// Forwards to another backend and captures every exchange as a MockScript.
class RecordingBackend : public ChatBackend {
public:
    explicit RecordingBackend(ChatBackend& inner) : inner_(inner) {}

    MockScript script() const;
    int preferred_parallelism() const override { return inner_.preferred_parallelism(); }

protected:
    std::string do_complete(std::span<const ChatMessage> messages, const CallTag& tag) override;

private:
    ChatBackend& inner_;
    mutable std::mutex mutex_;
    MockScript recorded_;
};

}  // namespace spt
