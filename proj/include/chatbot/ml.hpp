#pragma once

// kNN classification, k-means clustering and multinomial naive Bayes.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace chatbot::ml {

using Point = std::vector<double>;

struct LabeledPoint {
    Point coords;
    std::string label;
};

enum class Metric { euclidean, cosine };

enum class Weighting {
    uniform,           // plurality vote
    inverse_distance,  // each neighbour votes 1/d; an exact hit wins outright
};

struct KnnConfig {
    std::size_t k = 1;
    Weighting weighting = Weighting::uniform;
    Metric metric = Metric::euclidean;
};

double distance(std::span<const double> a, std::span<const double> b, Metric metric);

struct Neighbour {
    std::size_t index = 0;
    double distance = 0.0;
};

/// The k closest points by (distance, index), using a full scan.
std::vector<Neighbour> nearest(std::span<const LabeledPoint> data, std::span<const double> query,
                               std::size_t k, Metric metric = Metric::euclidean);

/// Vote ties go to the label whose closest tied neighbour is nearer, then to
/// the lexicographically smaller label. Throws InvalidArgument on empty data,
/// k outside [1, |data|], or mismatched dimensions.
std::string knn_classify(std::span<const LabeledPoint> data, std::span<const double> query,
                         const KnnConfig& cfg);

struct KMeansResult {
    std::vector<Point> centroids;
    std::vector<std::size_t> assignment;
    double sse = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    /// Total squared error after every assignment step, initial one first.
    std::vector<double> sse_history;
};

/// Lloyd iterations from farthest-point initialization: the first centroid
/// is a seeded random point, each next one the point farthest from its
/// nearest chosen centroid. Stops when assignments stop changing or after
/// `max_iter` updates. An empty cluster is re-seeded at the point farthest
/// from its own centroid. Throws InvalidArgument unless 1 <= k <= |points|.
KMeansResult kmeans(std::span<const Point> points, std::size_t k, std::size_t max_iter,
                    std::uint64_t seed);

double squared_distance(std::span<const double> a, std::span<const double> b);

struct LabeledDoc {
    std::vector<std::string> terms;
    std::string label;
};

class NaiveBayesModel {
public:
    /// Multinomial model with additive smoothing:
    ///   P(c)   = docs(c) / docs
    ///   P(t|c) = (count(t, c) + alpha) / (total(c) + alpha * V)
    /// Throws InvalidArgument on no documents or alpha <= 0.
    static NaiveBayesModel train(std::span<const LabeledDoc> docs, double alpha = 1.0);

    struct Prediction {
        std::string label;
        std::map<std::string, double> posterior;  // normalized
    };

    /// Terms never seen in training are skipped. Posterior ties go to the
    /// class seen first in training.
    Prediction classify(std::span<const std::string> terms) const;

    bool trained() const { return !labels_.empty(); }
    const std::vector<std::string>& labels() const { return labels_; }
    std::span<const double> priors() const { return priors_; }
    std::size_t vocabulary_size() const { return vocabulary_.size(); }
    double alpha() const { return alpha_; }
    std::size_t count(std::size_t cls, const std::string& term) const;
    std::size_t total(std::size_t cls) const { return totals_.at(cls); }

private:
    std::vector<std::string> labels_;
    std::vector<double> priors_;
    std::vector<std::unordered_map<std::string, std::size_t>> counts_;
    std::vector<std::size_t> totals_;
    std::unordered_map<std::string, std::size_t> vocabulary_;
    double alpha_ = 1.0;
};

}  // namespace chatbot::ml
