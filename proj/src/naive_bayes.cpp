#include <cmath>
#include <limits>

#include "chatbot/error.hpp"
#include "chatbot/ml.hpp"

namespace chatbot::ml {

NaiveBayesModel NaiveBayesModel::train(std::span<const LabeledDoc> docs, double alpha) {
    if (docs.empty()) throw InvalidArgument("naive Bayes needs at least one training document");
    if (!(alpha > 0.0)) throw InvalidArgument("smoothing alpha must be positive");

    NaiveBayesModel m;
    m.alpha_ = alpha;
    std::unordered_map<std::string, std::size_t> class_index;
    std::vector<std::size_t> doc_counts;
    for (const auto& doc : docs) {
        auto [it, inserted] = class_index.try_emplace(doc.label, m.labels_.size());
        if (inserted) {
            m.labels_.push_back(doc.label);
            m.counts_.emplace_back();
            m.totals_.push_back(0);
            doc_counts.push_back(0);
        }
        const std::size_t c = it->second;
        ++doc_counts[c];
        for (const auto& t : doc.terms) {
            ++m.counts_[c][t];
            ++m.totals_[c];
            m.vocabulary_.try_emplace(t, m.vocabulary_.size());
        }
    }
    for (std::size_t n : doc_counts)
        m.priors_.push_back(static_cast<double>(n) / static_cast<double>(docs.size()));
    return m;
}

std::size_t NaiveBayesModel::count(std::size_t cls, const std::string& term) const {
    const auto& counts = counts_.at(cls);
    auto it = counts.find(term);
    return it == counts.end() ? 0 : it->second;
}

NaiveBayesModel::Prediction NaiveBayesModel::classify(std::span<const std::string> terms) const {
    if (!trained()) throw std::logic_error("naive Bayes model is not trained");

    const double v = static_cast<double>(vocabulary_.size());
    std::vector<double> log_post(labels_.size());
    for (std::size_t c = 0; c < labels_.size(); ++c) {
        const double denom = std::log(static_cast<double>(totals_[c]) + alpha_ * v);
        double lp = std::log(priors_[c]);
        for (const auto& t : terms) {
            if (!vocabulary_.contains(t)) continue;
            lp += std::log(static_cast<double>(count(c, t)) + alpha_) - denom;
        }
        log_post[c] = lp;
    }

    std::size_t best = 0;
    for (std::size_t c = 1; c < log_post.size(); ++c)
        if (log_post[c] > log_post[best]) best = c;

    // log-sum-exp around the maximum
    double z = 0.0;
    for (double lp : log_post) z += std::exp(lp - log_post[best]);
    Prediction out;
    out.label = labels_[best];
    for (std::size_t c = 0; c < labels_.size(); ++c)
        out.posterior[labels_[c]] = std::exp(log_post[c] - log_post[best]) / z;
    return out;
}

}  // namespace chatbot::ml
