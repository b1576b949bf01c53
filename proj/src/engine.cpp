#include "chatbot/engine.hpp"

#include <algorithm>
#include <regex>
#include <stdexcept>

#include "chatbot/error.hpp"
#include "chatbot/utf8.hpp"

namespace chatbot::engine {
namespace {

bool has_category(const store::Statement& s, std::span<const std::string> categories) {
    return std::any_of(categories.begin(), categories.end(),
                       [&](const std::string& c) { return s.tags.contains(c); });
}

std::string fill_slot(std::string_view pattern, const std::string& slot, const std::string& value) {
    std::string out(pattern);
    const std::string placeholder = "{" + slot + "}";
    for (auto pos = out.find(placeholder); pos != std::string::npos;
         pos = out.find(placeholder, pos + value.size()))
        out.replace(pos, placeholder.size(), value);
    return out;
}

const store::Exchange* select_response(const store::KnowledgeStore& st, store::StatementId prompt,
                                       ResponseSelection selection) {
    const auto exchanges = st.exchanges_from(prompt);
    if (exchanges.empty()) return nullptr;
    if (selection == ResponseSelection::first) return exchanges.front();
    const store::Exchange* best = exchanges.front();
    for (const auto* e : exchanges) {
        if (e->occurrence > best->occurrence ||
            (e->occurrence == best->occurrence && e->response_id < best->response_id))
            best = e;
    }
    return best;
}

// Among tied prompts: the verbatim input first, then the most trained, then
// the oldest.
bool prefer(const store::Statement& a, const store::Statement& b, std::string_view input) {
    const bool ea = a.text == input, eb = b.text == input;
    if (ea != eb) return ea;
    if (a.occurrence != b.occurrence) return a.occurrence > b.occurrence;
    return a.id < b.id;
}

}  // namespace

std::string_view to_string(Source s) {
    switch (s) {
        case Source::matched: return "matched";
        case Source::fallback: return "fallback";
        case Source::clarify: return "clarify";
        case Source::answered: return "answered";
    }
    return "unknown";
}

std::optional<std::string> recognize_slot(SlotKind kind, std::string_view text) {
    static const std::regex date(R"((?:^|[^0-9])([0-3]?[0-9][/.\-][01]?[0-9][/.\-](?:19|20)[0-9]{2})(?![0-9]))");
    static const std::regex year(R"((?:^|[^0-9])((?:19|20)[0-9]{2})(?![0-9]))");
    const std::string s(text);
    std::smatch m;
    if (kind == SlotKind::date && std::regex_search(s, m, date)) return m[1].str();
    if (std::regex_search(s, m, year)) return m[1].str();
    return std::nullopt;
}

void EngineConfig::validate() const {
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw InvalidArgument("threshold must be within [0, 1]");
    if (fallback_text.empty()) throw InvalidArgument("fallback text must not be empty");
    if (max_input_chars == 0) throw InvalidArgument("max_input_chars must be positive");
    pipeline.validate();
    for (const auto& t : templates) {
        if (t.trigger_words.empty()) throw InvalidArgument("template '" + t.name + "' has no triggers");
        if (t.follow_up.empty()) throw InvalidArgument("template '" + t.name + "' has no follow-up");
        if (t.slot_name.empty()) throw InvalidArgument("template '" + t.name + "' has no slot");
    }
    std::set<std::string> labels, ids;
    for (const auto& a : adapters) {
        if (a.id.empty() || a.label.empty()) throw InvalidArgument("adapter needs an id and a label");
        if (!ids.insert(a.id).second) throw InvalidArgument("duplicate adapter id '" + a.id + "'");
        if (!labels.insert(a.label).second)
            throw InvalidArgument("adapters must have distinct labels; '" + a.label + "' repeats");
    }
}

AdapterRouter AdapterRouter::train(std::span<const AdapterRoute> routes,
                                   const store::KnowledgeStore& st,
                                   const text::PipelineConfig& pipeline) {
    AdapterRouter r;
    r.routes_.assign(routes.begin(), routes.end());
    r.pipeline_ = pipeline;
    if (r.routes_.size() < 2) return r;

    std::vector<ml::LabeledDoc> docs;
    for (const auto& route : r.routes_) {
        for (const auto& ex : route.examples)
            docs.push_back({text::preprocess_stored(ex, pipeline), route.label});
        if (route.categories.empty()) continue;
        for (auto id : st.prompts()) {
            const auto& s = st.statement(id);
            if (has_category(s, route.categories)) docs.push_back({s.terms, route.label});
        }
    }
    if (!docs.empty()) r.model_ = ml::NaiveBayesModel::train(docs, 1.0);
    return r;
}

const AdapterRoute& AdapterRouter::route(std::string_view id) const {
    for (const auto& r : routes_)
        if (r.id == id) return r;
    throw std::out_of_range("no adapter '" + std::string(id) + "'");
}

std::string AdapterRouter::select(std::string_view input) const {
    return select_terms(text::preprocess_stored(input, pipeline_));
}

std::string AdapterRouter::select_terms(std::span<const std::string> terms) const {
    if (routes_.empty()) throw std::logic_error("adapter router has no adapters");
    if (routes_.size() == 1) return routes_.front().id;
    if (!model_) throw std::logic_error("adapter router has not been trained");
    const auto label = model_->classify(terms).label;
    for (const auto& r : routes_)
        if (r.label == label) return r.id;
    throw std::logic_error("classifier produced unknown label '" + label + "'");
}

std::shared_ptr<const Snapshot> Snapshot::build(store::KnowledgeStore st, const EngineConfig& cfg) {
    auto snap = std::make_shared<Snapshot>();
    snap->store = std::move(st);
    snap->prompt_ids = snap->store.prompts();
    if (!snap->prompt_ids.empty()) {
        std::vector<text::Terms> docs;
        docs.reserve(snap->prompt_ids.size());
        for (auto id : snap->prompt_ids) docs.push_back(snap->store.statement(id).terms);
        snap->model = vsm::TfIdfModel::fit(docs);
        snap->vocabulary.insert(snap->model->terms().begin(), snap->model->terms().end());
    }
    snap->router = AdapterRouter::train(cfg.adapters, snap->store, cfg.pipeline);
    return snap;
}

Engine::Engine(EngineConfig cfg, store::KnowledgeStore st) : cfg_(std::move(cfg)) {
    cfg_.validate();
    // Expansion runs after stemming, so the table has to speak in stems too.
    if (cfg_.pipeline.stemming_enabled && !cfg_.pipeline.expansion.synonyms.empty()) {
        text::SynonymTable stemmed;
        for (const auto& [word, syns] : cfg_.pipeline.expansion.synonyms) {
            auto& out = stemmed[text::stem(word)];
            for (const auto& syn : syns) out.insert(text::stem(syn));
        }
        cfg_.pipeline.expansion.synonyms = std::move(stemmed);
    }
    for (const auto& t : cfg_.templates) {
        std::set<std::string> terms;
        for (const auto& w : t.trigger_words)
            for (auto& term : text::preprocess_stored(w, cfg_.pipeline)) terms.insert(std::move(term));
        if (terms.empty())
            throw InvalidArgument("template '" + t.name + "' triggers vanish after preprocessing");
        template_terms_.push_back(std::move(terms));
    }
    st.reindex(cfg_.pipeline);
    snapshot_ = Snapshot::build(std::move(st), cfg_);
}

std::shared_ptr<const Snapshot> Engine::snapshot() const {
    std::lock_guard lock(snapshot_mutex_);
    return snapshot_;
}

void Engine::publish(std::shared_ptr<const Snapshot> next) {
    std::lock_guard lock(snapshot_mutex_);
    snapshot_ = std::move(next);
}

MatchResult Engine::match(const Snapshot& snap, const text::Terms& terms, std::string_view input) const {
    if (!snap.model) throw NoKnowledge();

    MatchResult result;
    std::vector<bool> allowed;
    if (snap.router.size() >= 2 && snap.router.trained()) {
        result.adapter = snap.router.select_terms(terms);
        const auto& route = snap.router.route(result.adapter);
        if (!route.categories.empty()) {
            allowed.resize(snap.prompt_ids.size());
            bool any = false;
            for (std::size_t d = 0; d < snap.prompt_ids.size(); ++d) {
                allowed[d] = has_category(snap.store.statement(snap.prompt_ids[d]), route.categories);
                any = any || allowed[d];
            }
            if (!any) allowed.clear();
        }
    } else if (snap.router.size() == 1) {
        result.adapter = snap.router.select_terms({});
    }

    const auto scores = snap.model->scores(snap.model->vectorize(terms));
    double top = -1.0;
    for (std::size_t d = 0; d < scores.size(); ++d)
        if ((allowed.empty() || allowed[d]) && scores[d] > top) top = scores[d];

    const store::Statement* best = nullptr;
    double best_score = 0.0;
    for (std::size_t d = 0; d < scores.size(); ++d) {
        if (!allowed.empty() && !allowed[d]) continue;
        if (scores[d] < top - kScoreTieEpsilon) continue;
        const auto& s = snap.store.statement(snap.prompt_ids[d]);
        if (!best || prefer(s, *best, input)) {
            best = &s;
            best_score = scores[d];
        }
    }

    result.prompt = *best;
    result.similarity = std::clamp(best_score, 0.0, 1.0);
    if (const auto* ex = select_response(snap.store, best->id, cfg_.response_selection)) {
        result.response = snap.store.statement(ex->response_id);
        result.reply = result.response->text;
    }
    result.source = result.similarity >= cfg_.threshold ? Source::matched : Source::fallback;
    return result;
}

MatchResult Engine::best_match(std::string_view input) const {
    const auto snap = snapshot();
    return match(*snap, text::preprocess(input, cfg_.pipeline, snap->vocabulary), input);
}

std::optional<MatchResult> Engine::apply_templates(ChatSession& session, std::string_view input,
                                                   const text::Terms& terms) const {
    auto answer = [&](const ClarifyTemplate& t, const std::string& value) -> std::optional<MatchResult> {
        if (t.answer.empty()) return std::nullopt;
        MatchResult r;
        r.similarity = 1.0;
        r.reply = fill_slot(t.answer, t.slot_name, value);
        r.source = Source::answered;
        return r;
    };

    if (session.pending_template) {
        const auto& t = cfg_.templates.at(*session.pending_template);
        session.pending_template.reset();
        if (auto value = recognize_slot(t.slot_kind, input)) return answer(t, *value);
    }

    const std::set<std::string> present(terms.begin(), terms.end());
    for (std::size_t i = 0; i < cfg_.templates.size(); ++i) {
        const auto& need = template_terms_[i];
        if (!std::includes(present.begin(), present.end(), need.begin(), need.end())) continue;
        const auto& t = cfg_.templates[i];
        if (auto value = recognize_slot(t.slot_kind, input)) return answer(t, *value);
        session.pending_template = i;
        MatchResult r;
        r.reply = t.follow_up;
        r.source = Source::clarify;
        return r;
    }
    return std::nullopt;
}

MatchResult Engine::respond(ChatSession& session, std::string_view input) {
    const std::size_t length = utf8::length(input);
    if (length > cfg_.max_input_chars) throw InputTooLong(length, cfg_.max_input_chars);
    if (text::normalize(input, cfg_.pipeline.punctuation).empty())
        throw InvalidArgument("message is empty");

    const auto snap = snapshot();
    const auto terms = text::preprocess(input, cfg_.pipeline, snap->vocabulary);

    MatchResult result;
    if (auto templated = apply_templates(session, input, terms)) {
        result = std::move(*templated);
    } else {
        result = match(*snap, terms, input);
        if (result.source == Source::fallback) {
            result.reply = cfg_.fallback_text;
            result.response.reset();
            if (cfg_.learn_inputs) queue_for_review(input);
        }
    }

    const auto now = std::chrono::system_clock::now();
    session.history.push_back(Turn{Role::user, std::string(input), now});
    session.history.push_back(Turn{Role::bot, result.reply, now});
    return result;
}

template <class F>
std::size_t Engine::train_with(LockPolicy policy, F&& mutate) {
    std::unique_lock lock(train_mutex_, std::defer_lock);
    if (policy == LockPolicy::fail_if_busy) {
        if (!lock.try_lock()) throw TrainingInProgress();
    } else {
        lock.lock();
    }
    store::KnowledgeStore next = snapshot()->store;
    const std::size_t added = mutate(next);
    next.check_integrity();
    publish(Snapshot::build(std::move(next), cfg_));
    return added;
}

std::size_t Engine::train_list(std::span<const std::string> utterances, LockPolicy policy) {
    const std::size_t added = train_with(policy, [&](store::KnowledgeStore& st) {
        return st.train_list(utterances);
    });
    resolve_reviews(utterances.first(utterances.size() - 1));
    return added;
}

std::size_t Engine::ingest_corpus(std::string_view yaml, LockPolicy policy) {
    const auto corpus = store::parse_corpus(yaml);
    return ingest(std::span(&corpus, 1), policy);
}

std::size_t Engine::ingest(std::span<const store::CorpusFile> corpora, LockPolicy policy) {
    const std::size_t added = train_with(policy, [&](store::KnowledgeStore& st) {
        std::size_t n = 0;
        for (const auto& c : corpora) n += st.ingest(c);
        return n;
    });
    for (const auto& c : corpora)
        for (const auto& conv : c.conversations)
            resolve_reviews(std::span(conv).first(conv.size() - 1));
    return added;
}

std::vector<std::string> Engine::review_queue() const {
    std::lock_guard lock(review_mutex_);
    return review_;
}

void Engine::queue_for_review(std::string_view input) {
    std::lock_guard lock(review_mutex_);
    const auto key = text::normalize(input, cfg_.pipeline.punctuation);
    for (const auto& q : review_)
        if (text::normalize(q, cfg_.pipeline.punctuation) == key) return;
    review_.emplace_back(input);
}

void Engine::resolve_reviews(std::span<const std::string> prompts) {
    std::set<std::string> answered;
    for (const auto& p : prompts) answered.insert(text::normalize(p, cfg_.pipeline.punctuation));
    std::lock_guard lock(review_mutex_);
    std::erase_if(review_, [&](const std::string& q) {
        return answered.contains(text::normalize(q, cfg_.pipeline.punctuation));
    });
}

}  // namespace chatbot::engine
