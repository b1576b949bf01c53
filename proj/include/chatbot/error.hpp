#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace chatbot {

struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Raised when a message exceeds the maximum accepted length.
struct InputTooLong : std::length_error {
    InputTooLong(std::size_t length, std::size_t limit)
        : std::length_error("input of " + std::to_string(length) +
                            " characters exceeds the limit of " + std::to_string(limit)),
          length(length), limit(limit) {}
    std::size_t length;
    std::size_t limit;
};

/// The knowledge store holds no prompts to match against.
struct NoKnowledge : std::runtime_error {
    NoKnowledge() : std::runtime_error("knowledge store is empty") {}
};

/// Corpus or configuration text that does not match its schema.
/// `line` is 1-based when known.
struct ParseError : std::runtime_error {
    ParseError(const std::string& what, std::optional<std::size_t> line = std::nullopt,
               std::optional<std::size_t> conversation = std::nullopt)
        : std::runtime_error(format(what, line, conversation)), line(line),
          conversation(conversation) {}

    std::optional<std::size_t> line;
    std::optional<std::size_t> conversation;

private:
    static std::string format(const std::string& what, std::optional<std::size_t> line,
                              std::optional<std::size_t> conversation) {
        std::string out;
        if (line) out += "line " + std::to_string(*line) + ": ";
        if (conversation) out += "conversation " + std::to_string(*conversation) + ": ";
        return out + what;
    }
};

struct LoadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A training batch was requested while another one holds the writer role.
struct TrainingInProgress : std::runtime_error {
    TrainingInProgress() : std::runtime_error("training already in progress") {}
};

}  // namespace chatbot
