#pragma once

// Dense brute-force reference scorer for best-match retrieval. Shares only
// the text pipeline with the engine; weighting, scoring and tie-breaking are
// recomputed from scratch.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "chatbot/store.hpp"
#include "chatbot/text.hpp"

namespace oracle {

struct Answer {
    std::optional<chatbot::store::StatementId> prompt;
    double score = 0.0;
};

class DenseScorer {
public:
    DenseScorer(const chatbot::store::KnowledgeStore& st, chatbot::text::PipelineConfig pipeline)
        : store_(st), pipeline_(std::move(pipeline)) {
        for (const auto& s : st.statements())
            if (!st.exchanges_from(s.id).empty()) prompts_.push_back(s.id);
        std::map<std::string, std::size_t> df;
        for (auto id : prompts_) {
            auto terms = st.statement(id).terms;
            std::sort(terms.begin(), terms.end());
            terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
            for (const auto& t : terms) ++df[t];
        }
        const double n = static_cast<double>(prompts_.size());
        for (const auto& [t, f] : df) {
            column_[t] = terms_.size();
            terms_.push_back(t);
            idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(f))) + 1.0);
        }
        for (auto id : prompts_) docs_.push_back(weigh(st.statement(id).terms));
    }

    Answer best(std::string_view input) const {
        const chatbot::text::Vocabulary vocab(terms_.begin(), terms_.end());
        const auto q = weigh(chatbot::text::preprocess(input, pipeline_, vocab));
        std::vector<double> score(docs_.size());
        double top = -1.0;
        for (std::size_t d = 0; d < docs_.size(); ++d) {
            score[d] = cosine(q, docs_[d]);
            top = std::max(top, score[d]);
        }
        Answer out;
        for (std::size_t d = 0; d < docs_.size(); ++d) {
            if (score[d] < top - 1e-12) continue;
            const auto& s = store_.statement(prompts_[d]);
            bool take = !out.prompt;
            if (!take) {
                const auto& b = store_.statement(*out.prompt);
                const bool es = s.text == input, eb = b.text == input;
                if (es != eb) take = es;
                else if (s.occurrence != b.occurrence) take = s.occurrence > b.occurrence;
                else take = s.id < b.id;
            }
            if (take) {
                out.prompt = s.id;
                out.score = score[d];
            }
        }
        return out;
    }

    std::size_t vocabulary_size() const { return terms_.size(); }
    std::size_t prompt_count() const { return prompts_.size(); }

private:
    std::vector<double> weigh(const std::vector<std::string>& terms) const {
        std::vector<double> v(terms_.size(), 0.0);
        for (const auto& t : terms)
            if (auto it = column_.find(t); it != column_.end()) v[it->second] += 1.0;
        double norm = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] *= idf_[i];
            norm += v[i] * v[i];
        }
        if (norm > 0.0) {
            norm = std::sqrt(norm);
            for (double& x : v) x /= norm;
        }
        return v;
    }

    static double cosine(const std::vector<double>& a, const std::vector<double>& b) {
        double dot = 0.0, na = 0.0, nb = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            dot += a[i] * b[i];
            na += a[i] * a[i];
            nb += b[i] * b[i];
        }
        if (na == 0.0 || nb == 0.0) return 0.0;
        return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
    }

    const chatbot::store::KnowledgeStore& store_;
    chatbot::text::PipelineConfig pipeline_;
    std::vector<chatbot::store::StatementId> prompts_;
    std::map<std::string, std::size_t> column_;
    std::vector<std::string> terms_;
    std::vector<double> idf_;
    std::vector<std::vector<double>> docs_;
};

// Random word-bag stores with repeated prompts, near-duplicate texts and
// shared vocabulary, so ties and partial overlaps are common.
struct RandomStore {
    chatbot::store::KnowledgeStore store;
    std::vector<std::string> prompts;
    std::vector<std::string> words;
};

inline std::string random_word(std::mt19937_64& rng) {
    static const char* syllables[] = {"ka", "ro", "mi", "tu", "le", "sa", "no", "be", "di", "fo",
                                      "gar", "hel", "jin", "pex", "quo", "vyr", "wes", "zum"};
    std::string w;
    for (std::size_t i = 0, n = 1 + rng() % 3; i < n; ++i) w += syllables[rng() % std::size(syllables)];
    return w;
}

inline RandomStore random_store(std::mt19937_64& rng, std::size_t prompt_count, std::size_t vocab_limit,
                                const chatbot::text::PipelineConfig& pipeline = {}) {
    RandomStore out{chatbot::store::KnowledgeStore(pipeline), {}, {}};
    std::set<std::string> seen;
    const std::size_t vocab = std::max<std::size_t>(5, std::min<std::size_t>(vocab_limit, 5 + rng() % vocab_limit));
    while (out.words.size() < vocab) {
        auto w = random_word(rng);
        if (seen.insert(w).second) out.words.push_back(w);
    }
    // Zipf-ish skew so some words are everywhere and others are rare.
    auto pick = [&]() -> const std::string& {
        const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        return out.words[static_cast<std::size_t>(std::pow(u, 2.0) * static_cast<double>(out.words.size()))];
    };
    while (out.prompts.size() < prompt_count) {
        std::string p;
        const auto kind = rng() % 10;
        if (kind == 0 && !out.prompts.empty()) {
            p = out.prompts[rng() % out.prompts.size()] + "!";  // same terms, new text
        } else if (kind == 1 && !out.prompts.empty()) {
            p = out.prompts[rng() % out.prompts.size()];  // retrained, occurrence grows
        } else {
            for (std::size_t i = 0, n = 1 + rng() % 6; i < n; ++i) (p += i ? " " : "") += pick();
        }
        const std::string reply = "reply " + std::to_string(rng() % 1000);
        out.store.train_list(std::vector<std::string>{p, reply});
        if (std::find(out.prompts.begin(), out.prompts.end(), p) == out.prompts.end()) out.prompts.push_back(p);
    }
    return out;
}

inline std::vector<std::string> random_queries(std::mt19937_64& rng, const RandomStore& rs, std::size_t n) {
    std::vector<std::string> out;
    while (out.size() < n) {
        const auto kind = rng() % 4;
        std::string q;
        if (kind == 0) {
            q = rs.prompts[rng() % rs.prompts.size()];
        } else if (kind == 1) {
            for (std::size_t i = 0, m = 1 + rng() % 4; i < m; ++i)
                (q += i ? " " : "") += rs.words[rng() % rs.words.size()];
        } else if (kind == 2) {
            q = rs.prompts[rng() % rs.prompts.size()] + " " + random_word(rng) + "xq";
        } else {
            q = "unrelated " + random_word(rng) + "zz";
        }
        out.push_back(q);
    }
    return out;
}

}  // namespace oracle
