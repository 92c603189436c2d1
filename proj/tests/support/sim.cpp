#include "sim.hpp"

#include <stdexcept>

#include "spt/mock_backend.hpp"

namespace spt::testing {

SimGenerator::SimGenerator(std::vector<SimItem> items) {
    for (auto& s : items) {
        const std::string id = s.item.id;
        items_.emplace(id, std::move(s));
    }
}

bool SimGenerator::answers_correctly(const std::string& item_id, const std::string& system_prompt) const {
    const SimItem& s = items_.at(item_id);
    if (s.base_correct) {
        return true;
    }
    const auto sentences = segment_sentences(system_prompt);
    for (const auto& hint : s.hints) {
        for (const auto& sentence : sentences) {
            if (sentence == hint) {
                return true;
            }
        }
    }
    return false;
}

std::string SimGenerator::do_complete(std::span<const ChatMessage> messages, const CallTag& tag) {
    if (tag.purpose != CallPurpose::answer) {
        throw std::logic_error("SimGenerator only answers questions");
    }
    const SimItem& s = items_.at(tag.item_id);
    const int k = static_cast<int>(s.item.choices.size());
    const int given = answers_correctly(tag.item_id, messages.front().content) ? s.item.answer_index
                                                                              : (s.item.answer_index + 1) % k;
    if (tag.turn == 1) {
        return "Looking at the options, " + s.item.choices[given] + " seems right.";
    }
    return std::to_string(given + 1);
}

PlanCorrector::PlanCorrector(std::vector<std::vector<std::string>> rounds, std::vector<std::string> c_rounds)
    : rounds_(std::move(rounds)), c_rounds_(std::move(c_rounds)) {}

int PlanCorrector::p_rounds_seen() const {
    std::lock_guard lock(mutex_);
    return static_cast<int>(p_round_of_.size());
}

std::string PlanCorrector::do_complete(std::span<const ChatMessage> messages, const CallTag& tag) {
    const std::string fp = fingerprint(messages);
    std::lock_guard lock(mutex_);
    if (tag.purpose == CallPurpose::c_update) {
        const int round = c_round_of_.try_emplace(fp, static_cast<int>(c_round_of_.size())).first->second;
        if (round >= static_cast<int>(c_rounds_.size())) {
            throw std::logic_error("PlanCorrector has no c-update round " + std::to_string(round));
        }
        return "New prompt: " + c_rounds_[round];
    }
    const int round = p_round_of_.try_emplace(fp, static_cast<int>(p_round_of_.size())).first->second;
    if (round >= static_cast<int>(rounds_.size())) {
        throw std::logic_error("PlanCorrector has no round " + std::to_string(round));
    }
    const auto& candidates = rounds_[round];
    return "New prompt: " + candidates.at(static_cast<std::size_t>(tag.candidate_index) % candidates.size());
}

std::vector<std::string> AuditingBackend::requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
}

std::set<std::string> AuditingBackend::leaked(std::span<const McqItem> items) const {
    std::set<std::string> out;
    std::lock_guard lock(mutex_);
    for (const auto& request : requests_) {
        for (const auto& item : items) {
            if (request.find(item.question) != std::string::npos || request.find(item.id) != std::string::npos) {
                out.insert(item.id);
            }
        }
    }
    return out;
}

std::string AuditingBackend::do_complete(std::span<const ChatMessage> messages, const CallTag& tag) {
    std::string text;
    for (const auto& m : messages) {
        text += m.content;
        text += '\n';
    }
    {
        std::lock_guard lock(mutex_);
        requests_.push_back(std::move(text));
    }
    return inner_.complete(messages, tag);
}

McqItem make_item(std::string id, std::string question, std::vector<std::string> choices, int answer) {
    return McqItem{std::move(id), std::move(question), std::move(choices), answer};
}

}  // namespace spt::testing
