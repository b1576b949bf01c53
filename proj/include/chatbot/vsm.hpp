#pragma once

// TF-IDF term weighting and cosine-similarity ranking over sparse vectors.
//
//   tf(t, d)  = raw count of t in d
//   idf(t)    = ln((1 + N) / (1 + df(t))) + 1
//   w(t, d)   = tf * idf, then each document vector is L2-normalized
//
// A fitted model is immutable.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace chatbot::vsm {

using TermIndex = std::uint32_t;
using TermList = std::vector<std::string>;

/// Sparse non-negative vector, entries sorted by index, no stored zeros.
class DocVector {
public:
    using Entry = std::pair<TermIndex, double>;

    DocVector() = default;
    /// Sorts, merges duplicate indices and drops zeros.
    explicit DocVector(std::vector<Entry> entries);

    const std::vector<Entry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    double weight(TermIndex index) const;
    double norm() const;

private:
    std::vector<Entry> entries_;
};

double dot(const DocVector& a, const DocVector& b);

/// dot(a,b) / (|a| |b|), or 0 when either vector is zero. Clamped to [0, 1].
double cosine(const DocVector& a, const DocVector& b);

struct ScoredDoc {
    std::size_t doc = 0;
    double score = 0.0;
};

class TfIdfModel {
public:
    /// Throws InvalidArgument on an empty document list.
    static TfIdfModel fit(std::span<const TermList> documents);

    std::size_t doc_count() const { return vectors_.size(); }
    std::size_t term_count() const { return terms_.size(); }

    /// Column for `term`, or npos when out of vocabulary.
    std::size_t index_of(const std::string& term) const;
    const std::string& term(TermIndex index) const { return terms_.at(index); }
    const std::vector<std::string>& terms() const { return terms_; }
    std::size_t doc_freq(TermIndex index) const { return df_.at(index); }
    double idf(TermIndex index) const { return idf_.at(index); }

    const DocVector& doc_vector(std::size_t doc) const { return vectors_.at(doc); }

    /// In-vocabulary counts times idf, L2-normalized. Unknown terms are ignored.
    DocVector vectorize(std::span<const std::string> terms) const;

    /// Every document scored against the query, best first; equal scores keep
    /// insertion order.
    std::vector<ScoredDoc> rank(std::span<const std::string> query) const;

    /// Cosine of the query against every document, indexed by document.
    std::vector<double> scores(const DocVector& query) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    struct Posting {
        std::uint32_t doc;
        double weight;
    };

    DocVector weigh(std::span<const std::string> terms) const;

    std::unordered_map<std::string, TermIndex> vocabulary_;
    std::vector<std::string> terms_;
    std::vector<std::size_t> df_;
    std::vector<double> idf_;
    std::vector<DocVector> vectors_;
    std::vector<std::vector<Posting>> postings_;
};

}  // namespace chatbot::vsm
