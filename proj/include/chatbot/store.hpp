#pragma once

// Knowledge store: trained statements and the prompt -> response exchanges
// between them. Statements are unique by their verbatim text.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "chatbot/text.hpp"

namespace chatbot::store {

using StatementId = std::uint64_t;

struct Statement {
    StatementId id = 0;
    std::string text;
    text::Terms terms;  // cached pipeline output for `text`
    std::optional<StatementId> in_response_to;  // prompt it was first trained against
    std::set<std::string> tags;  // corpus categories it appeared under
    std::uint64_t occurrence = 1;

    bool operator==(const Statement&) const = default;
};

struct Exchange {
    StatementId prompt_id = 0;
    StatementId response_id = 0;
    std::uint64_t occurrence = 1;

    bool operator==(const Exchange&) const = default;
};

struct CorpusFile {
    std::vector<std::string> categories;
    std::vector<std::vector<std::string>> conversations;
};

/// Parses the corpus YAML schema:
///
///     categories:
///     - greetings
///     conversations:
///     - - Hello
///       - Hi
///
/// Throws ParseError with the 1-based line and 0-based conversation index.
CorpusFile parse_corpus(std::string_view yaml);

struct Response {
    Statement statement;
    std::uint64_t occurrence = 0;  // times this exchange was trained

    bool operator==(const Response&) const = default;
};

class KnowledgeStore {
public:
    explicit KnowledgeStore(text::PipelineConfig pipeline = {});

    /// Records each adjacent pair as prompt -> response and returns the
    /// number of pairs. Throws InvalidArgument for fewer than 2 utterances.
    std::size_t train_list(std::span<const std::string> utterances,
                           std::span<const std::string> tags = {});

    /// All-or-nothing: a ParseError leaves the store untouched.
    std::size_t ingest_corpus(std::string_view contents);
    std::size_t ingest(const CorpusFile& corpus);

    /// Responses trained against the exact text, in training order.
    std::vector<Response> responses_to(std::string_view text) const;

    const std::vector<Statement>& statements() const { return statements_; }
    const std::vector<Exchange>& exchanges() const { return exchanges_; }
    const Statement& statement(StatementId id) const { return statements_.at(id); }
    std::optional<StatementId> find(std::string_view text) const;

    /// Statements with at least one trained response, ascending id.
    std::vector<StatementId> prompts() const;
    /// Exchanges whose prompt is `prompt`, in training order.
    std::vector<const Exchange*> exchanges_from(StatementId prompt) const;

    bool empty() const { return statements_.empty(); }
    const text::PipelineConfig& pipeline() const { return pipeline_; }

    /// Recomputes cached terms under a different pipeline configuration.
    void reindex(text::PipelineConfig pipeline);

    /// Throws std::logic_error if an id or exchange reference dangles.
    void check_integrity() const;

    /// Content equality: statements and exchanges, ids included.
    bool operator==(const KnowledgeStore& other) const;

    std::string serialize() const;
    static KnowledgeStore deserialize(std::string_view bytes, text::PipelineConfig pipeline = {});
    void save(const std::filesystem::path& path) const;
    /// Throws LoadError on I/O failure, bad header, checksum or record errors.
    static KnowledgeStore load(const std::filesystem::path& path,
                               text::PipelineConfig pipeline = {});

    static constexpr std::string_view kMagic = "CHATBOT-STORE";
    static constexpr int kFormatVersion = 1;

private:
    StatementId intern(const std::string& text, std::span<const std::string> tags);
    void add_exchange(StatementId prompt, StatementId response, std::uint64_t occurrence);
    void rebuild_indexes();

    text::PipelineConfig pipeline_;
    std::vector<Statement> statements_;
    std::vector<Exchange> exchanges_;
    std::unordered_map<std::string, StatementId> by_text_;
    std::map<std::pair<StatementId, StatementId>, std::size_t> by_pair_;
    std::unordered_map<StatementId, std::vector<std::size_t>> by_prompt_;
};

}  // namespace chatbot::store
