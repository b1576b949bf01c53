#include "chatbot/vsm.hpp"

#include <algorithm>
#include <cmath>

#include "chatbot/error.hpp"

namespace chatbot::vsm {
namespace {

DocVector l2_normalized(std::vector<DocVector::Entry> entries) {
    entries = DocVector(std::move(entries)).entries();  // sorted, so sums are order-stable
    double sq = 0.0;
    for (const auto& e : entries) sq += e.second * e.second;
    if (sq > 0.0) {
        const double inv = 1.0 / std::sqrt(sq);
        for (auto& e : entries) e.second *= inv;
    }
    return DocVector(std::move(entries));
}

}  // namespace

DocVector::DocVector(std::vector<Entry> entries) {
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.first < b.first; });
    for (const auto& e : entries) {
        if (!entries_.empty() && entries_.back().first == e.first)
            entries_.back().second += e.second;
        else
            entries_.push_back(e);
    }
    std::erase_if(entries_, [](const Entry& e) { return e.second == 0.0; });
}

double DocVector::weight(TermIndex index) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                               [](const Entry& e, TermIndex i) { return e.first < i; });
    return (it != entries_.end() && it->first == index) ? it->second : 0.0;
}

double DocVector::norm() const { return std::sqrt(dot(*this, *this)); }

double dot(const DocVector& a, const DocVector& b) {
    const auto& x = a.entries();
    const auto& y = b.entries();
    double sum = 0.0;
    std::size_t i = 0, j = 0;
    while (i < x.size() && j < y.size()) {
        if (x[i].first < y[j].first) {
            ++i;
        } else if (y[j].first < x[i].first) {
            ++j;
        } else {
            sum += x[i].second * y[j].second;
            ++i, ++j;
        }
    }
    return sum;
}

double cosine(const DocVector& a, const DocVector& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot(a, b) / (na * nb), 0.0, 1.0);
}

TfIdfModel TfIdfModel::fit(std::span<const TermList> documents) {
    if (documents.empty()) throw InvalidArgument("cannot fit a TF-IDF model on zero documents");

    TfIdfModel m;
    std::vector<std::vector<DocVector::Entry>> counts(documents.size());
    for (std::size_t d = 0; d < documents.size(); ++d) {
        std::unordered_map<TermIndex, double> tf;
        for (const auto& t : documents[d]) {
            auto [it, inserted] = m.vocabulary_.try_emplace(t, static_cast<TermIndex>(m.terms_.size()));
            if (inserted) {
                m.terms_.push_back(t);
                m.df_.push_back(0);
            }
            tf[it->second] += 1.0;
        }
        for (const auto& [idx, c] : tf) {
            ++m.df_[idx];
            counts[d].emplace_back(idx, c);
        }
    }

    const double n = static_cast<double>(documents.size());
    m.idf_.resize(m.terms_.size());
    for (std::size_t t = 0; t < m.terms_.size(); ++t)
        m.idf_[t] = std::log((1.0 + n) / (1.0 + static_cast<double>(m.df_[t]))) + 1.0;

    m.postings_.resize(m.terms_.size());
    m.vectors_.reserve(documents.size());
    for (std::size_t d = 0; d < documents.size(); ++d) {
        for (auto& e : counts[d]) e.second *= m.idf_[e.first];
        m.vectors_.push_back(l2_normalized(std::move(counts[d])));
        for (const auto& [idx, w] : m.vectors_.back().entries())
            m.postings_[idx].push_back(Posting{static_cast<std::uint32_t>(d), w});
    }
    return m;
}

std::size_t TfIdfModel::index_of(const std::string& term) const {
    auto it = vocabulary_.find(term);
    return it == vocabulary_.end() ? npos : it->second;
}

DocVector TfIdfModel::weigh(std::span<const std::string> terms) const {
    std::unordered_map<TermIndex, double> tf;
    for (const auto& t : terms)
        if (auto it = vocabulary_.find(t); it != vocabulary_.end()) tf[it->second] += 1.0;
    std::vector<DocVector::Entry> entries;
    entries.reserve(tf.size());
    for (const auto& [idx, c] : tf) entries.emplace_back(idx, c * idf_[idx]);
    return DocVector(std::move(entries));
}

DocVector TfIdfModel::vectorize(std::span<const std::string> terms) const {
    auto v = weigh(terms);
    return l2_normalized(v.entries());
}

std::vector<double> TfIdfModel::scores(const DocVector& query) const {
    std::vector<double> out(vectors_.size(), 0.0);
    const double qn = query.norm();
    if (qn == 0.0) return out;
    // Stored vectors are unit length, or zero and never touched by a posting.
    for (const auto& [idx, qw] : query.entries()) {
        if (idx >= postings_.size()) continue;
        for (const auto& p : postings_[idx]) out[p.doc] += qw * p.weight;
    }
    for (auto& s : out) s = std::clamp(s / qn, 0.0, 1.0);
    return out;
}

std::vector<ScoredDoc> TfIdfModel::rank(std::span<const std::string> query) const {
    const auto s = scores(vectorize(query));
    std::vector<ScoredDoc> out(s.size());
    for (std::size_t d = 0; d < s.size(); ++d) out[d] = ScoredDoc{d, s[d]};
    std::stable_sort(out.begin(), out.end(),
                     [](const ScoredDoc& a, const ScoredDoc& b) { return a.score > b.score; });
    return out;
}

}  // namespace chatbot::vsm
