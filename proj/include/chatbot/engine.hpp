#pragma once

// Response engine: best-match retrieval over trained prompts, confidence
// gating with a fallback reply, clarifying-question templates, Bayes-routed
// logic adapters and the review queue of unanswered inputs.

#include <chrono>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chatbot/ml.hpp"
#include "chatbot/store.hpp"
#include "chatbot/text.hpp"
#include "chatbot/vsm.hpp"

namespace chatbot::engine {

enum class Source {
    matched,   // best prompt cleared the threshold
    fallback,  // nothing cleared the threshold
    clarify,   // a template asked for a missing detail
    answered,  // a template's slot was supplied and its answer returned
};

std::string_view to_string(Source s);

enum class ResponseSelection { most_frequent, first };

enum class SlotKind {
    date,  // dd/mm/yyyy (also - or . separated) or a bare 4-digit year
    year,  // 4-digit year only
};

/// Finds a slot value in raw user text.
std::optional<std::string> recognize_slot(SlotKind kind, std::string_view text);

struct ClarifyTemplate {
    std::string name;
    std::vector<std::string> trigger_words;  // plain words; pipelined when the engine is built
    std::string slot_name;
    SlotKind slot_kind = SlotKind::date;
    std::string follow_up;
    std::string answer;  // `{slot_name}` is replaced by the recognized value
};

struct AdapterRoute {
    std::string id;
    std::string label;                    // naive Bayes class
    std::vector<std::string> categories;  // statement tags in scope; empty = all
    std::vector<std::string> examples;    // extra training utterances
};

struct EngineConfig {
    double threshold = 0.40;
    std::string fallback_text = "I'm sorry, I don't understand. Could you rephrase the question?";
    bool learn_inputs = true;
    ResponseSelection response_selection = ResponseSelection::most_frequent;
    std::size_t max_input_chars = 5000;
    text::PipelineConfig pipeline;
    std::vector<ClarifyTemplate> templates;
    std::vector<AdapterRoute> adapters;

    void validate() const;
};

/// Candidates whose score is within this distance of the best are tied. Ties
/// go to the prompt equal to the input verbatim, then to the higher
/// statement occurrence, then to the lower id.
inline constexpr double kScoreTieEpsilon = 1e-12;

struct MatchResult {
    std::optional<store::Statement> prompt;
    std::optional<store::Statement> response;
    double similarity = 0.0;
    std::string reply;
    Source source = Source::fallback;
    std::string adapter;  // routed adapter id, empty when routing is off
};

enum class Role { user, bot };

struct Turn {
    Role role = Role::user;
    std::string text;
    std::chrono::system_clock::time_point at;
};

/// Per-conversation state. Callers serialize access to one session.
struct ChatSession {
    std::vector<Turn> history;
    std::optional<std::size_t> pending_template;
};

class AdapterRouter {
public:
    AdapterRouter() = default;

    /// Each adapter's class is trained from its examples plus the prompts
    /// tagged with one of its categories.
    static AdapterRouter train(std::span<const AdapterRoute> routes, const store::KnowledgeStore& store,
                               const text::PipelineConfig& pipeline);

    bool trained() const { return routes_.size() == 1 || model_.has_value(); }
    std::size_t size() const { return routes_.size(); }
    const AdapterRoute& route(std::string_view id) const;

    /// Throws std::logic_error when untrained.
    std::string select(std::string_view input) const;
    /// Same, for input that already went through the pipeline.
    std::string select_terms(std::span<const std::string> terms) const;

private:
    std::vector<AdapterRoute> routes_;
    std::optional<ml::NaiveBayesModel> model_;
    text::PipelineConfig pipeline_;
};

inline std::string select_adapter(const AdapterRouter& router, std::string_view input) {
    return router.select(input);
}

/// Immutable view the engine answers from; replaced wholesale on training.
struct Snapshot {
    store::KnowledgeStore store;
    std::vector<store::StatementId> prompt_ids;  // model document index -> statement
    std::optional<vsm::TfIdfModel> model;
    text::Vocabulary vocabulary;
    AdapterRouter router;

    static std::shared_ptr<const Snapshot> build(store::KnowledgeStore store, const EngineConfig& cfg);
};

enum class LockPolicy { wait, fail_if_busy };

class Engine {
public:
    explicit Engine(EngineConfig cfg = {}, store::KnowledgeStore store = store::KnowledgeStore{});

    const EngineConfig& config() const { return cfg_; }
    std::shared_ptr<const Snapshot> snapshot() const;

    /// Best prompt for the input before gating. Throws NoKnowledge when no
    /// prompt is stored.
    MatchResult best_match(std::string_view input) const;

    /// Full reply path; appends the user and bot turns to `session`.
    /// Throws InputTooLong, InvalidArgument (empty input) or NoKnowledge.
    MatchResult respond(ChatSession& session, std::string_view input);

    /// Trains and atomically publishes a new snapshot. With fail_if_busy a
    /// concurrent training call raises TrainingInProgress.
    std::size_t train_list(std::span<const std::string> utterances,
                           LockPolicy policy = LockPolicy::wait);
    std::size_t ingest_corpus(std::string_view yaml, LockPolicy policy = LockPolicy::wait);
    std::size_t ingest(std::span<const store::CorpusFile> corpora, LockPolicy policy = LockPolicy::wait);

    /// Inputs that fell below the threshold, in arrival order.
    std::vector<std::string> review_queue() const;

private:
    template <class F>
    std::size_t train_with(LockPolicy policy, F&& mutate);
    void publish(std::shared_ptr<const Snapshot> next);
    void queue_for_review(std::string_view input);
    void resolve_reviews(std::span<const std::string> prompts);
    MatchResult match(const Snapshot& snap, const text::Terms& terms, std::string_view input) const;
    std::optional<MatchResult> apply_templates(ChatSession& session, std::string_view input,
                                               const text::Terms& terms) const;

    EngineConfig cfg_;
    std::vector<std::set<std::string>> template_terms_;

    mutable std::mutex snapshot_mutex_;
    std::shared_ptr<const Snapshot> snapshot_;
    std::mutex train_mutex_;
    mutable std::mutex review_mutex_;
    std::vector<std::string> review_;
};

}  // namespace chatbot::engine
