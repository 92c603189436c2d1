#include "spt/mock_backend.hpp"

#include <openssl/evp.h>

#include "spt/error.hpp"
#include "spt/io.hpp"

namespace spt {

namespace {

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0x0f]);
    }
    return out;
}

void append_without_cr(std::string& out, std::string_view text) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
            continue;
        }
        out.push_back(text[i]);
    }
}

ScriptedReply reply_from_json(const nlohmann::json& v) {
    if (v.is_number_integer()) {
        return v.get<int>();
    }
    if (v.is_string()) {
        return v.get<std::string>();
    }
    throw ConfigError("mock reply must be an integer choice index or a string");
}

nlohmann::json reply_to_json(const ScriptedReply& reply) {
    return std::visit([](const auto& v) { return nlohmann::json(v); }, reply);
}

}  // namespace

std::string fingerprint(std::span<const ChatMessage> messages) {
    std::string canonical;
    for (const auto& m : messages) {
        canonical += to_string(m.role);
        canonical.push_back(':');
        append_without_cr(canonical, m.content);
        canonical.push_back('\x1e');
    }
    return sha256_hex(canonical);
}

std::string prompt_fingerprint(std::string_view system_prompt) {
    const ChatMessage message{Role::system, std::string(system_prompt)};
    return fingerprint(std::span(&message, 1));
}

std::string reply_text(const ScriptedReply& reply) {
    if (const int* index = std::get_if<int>(&reply)) {
        return std::to_string(*index + 1);
    }
    return std::get<std::string>(reply);
}

MockScript MockScript::from_json(const nlohmann::json& doc) {
    try {
        if (doc.value("schema", 1) != 1) {
            throw ConfigError("unsupported mock script schema");
        }
        MockScript script;
        for (const auto& entry : doc.value("answers", nlohmann::json::array())) {
            PromptAnswers answers;
            answers.prompt = entry.value("prompt", "");
            std::string key = entry.value("prompt_fingerprint", "");
            if (key.empty()) {
                if (!entry.contains("prompt")) {
                    throw ConfigError("mock answers entry needs prompt or prompt_fingerprint");
                }
                key = prompt_fingerprint(answers.prompt);
            }
            const auto replies = entry.value("replies", nlohmann::json::object());
            for (const auto& [id, reply] : replies.items()) {
                answers.replies.emplace(id, reply_from_json(reply));
            }
            if (entry.contains("default") && !entry["default"].is_null()) {
                answers.fallback = reply_from_json(entry["default"]);
            }
            script.answers[key] = std::move(answers);
        }
        const auto completions = doc.value("completions", nlohmann::json::object());
        for (const auto& [fp, value] : completions.items()) {
            if (value.is_string()) {
                script.completions[fp] = {value.get<std::string>()};
            } else {
                script.completions[fp] = value.get<std::vector<std::string>>();
            }
        }
        if (doc.contains("default_answer") && !doc["default_answer"].is_null()) {
            script.default_answer = reply_from_json(doc["default_answer"]);
        }
        if (doc.contains("default_completion") && !doc["default_completion"].is_null()) {
            script.default_completion = doc["default_completion"].get<std::string>();
        }
        return script;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed mock script: ") + e.what());
    }
}

MockScript MockScript::load(const std::filesystem::path& path) {
    try {
        return from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("mock script " + path.string() + ": " + e.what());
    }
}

nlohmann::json MockScript::to_json() const {
    nlohmann::json doc;
    doc["schema"] = 1;
    doc["answers"] = nlohmann::json::array();
    for (const auto& [fp, answers] : this->answers) {
        nlohmann::json entry;
        entry["prompt"] = answers.prompt;
        entry["prompt_fingerprint"] = fp;
        entry["replies"] = nlohmann::json::object();
        for (const auto& [id, reply] : answers.replies) {
            entry["replies"][id] = reply_to_json(reply);
        }
        if (answers.fallback) {
            entry["default"] = reply_to_json(*answers.fallback);
        }
        doc["answers"].push_back(std::move(entry));
    }
    doc["completions"] = nlohmann::json::object();
    for (const auto& [fp, responses] : completions) {
        doc["completions"][fp] = responses.size() == 1 ? nlohmann::json(responses.front()) : nlohmann::json(responses);
    }
    doc["default_answer"] = default_answer ? reply_to_json(*default_answer) : nlohmann::json();
    doc["default_completion"] = default_completion ? nlohmann::json(*default_completion) : nlohmann::json();
    return doc;
}

void MockScript::save(const std::filesystem::path& path) const {
    write_file_atomic(path, to_json().dump(2) + "\n");
}

void MockScript::set_answer(std::string_view prompt, const std::string& item_id, ScriptedReply reply) {
    auto& entry = answers[prompt_fingerprint(prompt)];
    entry.prompt = std::string(prompt);
    entry.replies[item_id] = std::move(reply);
}

void MockScript::set_completion(std::span<const ChatMessage> request, std::vector<std::string> responses) {
    completions[fingerprint(request)] = std::move(responses);
}

std::string ScriptedMock::do_complete(std::span<const ChatMessage> messages, const CallTag& tag) {
    ++calls_;
    if (tag.purpose == CallPurpose::answer) {
        const auto it = script_.answers.find(prompt_fingerprint(messages.front().content));
        if (it != script_.answers.end()) {
            if (auto r = it->second.replies.find(tag.item_id); r != it->second.replies.end()) {
                return reply_text(r->second);
            }
            if (it->second.fallback) {
                return reply_text(*it->second.fallback);
            }
        }
        if (script_.default_answer) {
            return reply_text(*script_.default_answer);
        }
        throw MockMissError("no scripted answer for item '" + tag.item_id + "' under prompt " +
                            prompt_fingerprint(messages.front().content));
    }
    const std::string fp = fingerprint(messages);
    if (auto it = script_.completions.find(fp); it != script_.completions.end()) {
        const auto& responses = it->second;
        if (responses.size() == 1) {
            return responses.front();
        }
        if (tag.candidate_index >= 0 && static_cast<std::size_t>(tag.candidate_index) < responses.size()) {
            return responses[static_cast<std::size_t>(tag.candidate_index)];
        }
    }
    if (script_.default_completion) {
        return *script_.default_completion;
    }
    throw MockMissError("no scripted completion for request " + fp);
}

MockScript RecordingBackend::script() const {
    std::lock_guard lock(mutex_);
    return recorded_;
}

std::string RecordingBackend::do_complete(std::span<const ChatMessage> messages, const CallTag& tag) {
    std::string reply = inner_.complete(messages, tag);
    std::lock_guard lock(mutex_);
    if (tag.purpose == CallPurpose::answer) {
        const std::string& prompt = messages.front().content;
        auto& entry = recorded_.answers[prompt_fingerprint(prompt)];
        entry.prompt = prompt;
        // The number turn is the one that gets parsed; it overwrites turn 1.
        entry.replies[tag.item_id] = reply;
    } else {
        auto& responses = recorded_.completions[fingerprint(messages)];
        const auto index = static_cast<std::size_t>(std::max(tag.candidate_index, 0));
        if (responses.size() <= index) {
            responses.resize(index + 1);
        }
        responses[index] = reply;
    }
    return reply;
}

}  // namespace spt
