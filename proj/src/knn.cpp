#include <algorithm>
#include <cmath>
#include <limits>

#include "chatbot/error.hpp"
#include "chatbot/ml.hpp"

namespace chatbot::ml {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double distance(std::span<const double> a, std::span<const double> b, Metric metric) {
    if (metric == Metric::euclidean) return std::sqrt(squared_distance(a, b));
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    if (aa == 0.0 || bb == 0.0) return 1.0;
    return 1.0 - std::clamp(ab / std::sqrt(aa * bb), -1.0, 1.0);
}

std::vector<Neighbour> nearest(std::span<const LabeledPoint> data, std::span<const double> query,
                               std::size_t k, Metric metric) {
    std::vector<Neighbour> all;
    all.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        all.push_back(Neighbour{i, distance(data[i].coords, query, metric)});
    k = std::min(k, all.size());
    auto by_distance = [](const Neighbour& a, const Neighbour& b) {
        return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
    };
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), by_distance);
    all.resize(k);
    return all;
}

std::string knn_classify(std::span<const LabeledPoint> data, std::span<const double> query,
                         const KnnConfig& cfg) {
    if (data.empty()) throw InvalidArgument("kNN needs at least one labelled point");
    if (cfg.k == 0 || cfg.k > data.size()) throw InvalidArgument("k must be within [1, |data|]");
    for (const auto& p : data)
        if (p.coords.size() != query.size())
            throw InvalidArgument("query and data dimensions differ");

    const auto neighbours = nearest(data, query, cfg.k, cfg.metric);

    struct Tally {
        double votes = 0.0;
        double closest = std::numeric_limits<double>::infinity();
    };
    std::map<std::string, Tally> tally;

    const bool exact_hit = cfg.weighting == Weighting::inverse_distance &&
                           std::any_of(neighbours.begin(), neighbours.end(),
                                       [](const Neighbour& n) { return n.distance == 0.0; });
    for (const auto& n : neighbours) {
        double vote = 1.0;
        if (cfg.weighting == Weighting::inverse_distance) {
            if (exact_hit) {
                if (n.distance != 0.0) continue;
            } else {
                vote = 1.0 / n.distance;
            }
        }
        auto& t = tally[data[n.index].label];
        t.votes += vote;
        t.closest = std::min(t.closest, n.distance);
    }

    // std::map iterates labels in lexicographic order, so strict comparisons
    // leave the smaller label in place on a full tie.
    const std::string* best = nullptr;
    Tally best_tally;
    for (const auto& [label, t] : tally) {
        if (!best || t.votes > best_tally.votes ||
            (t.votes == best_tally.votes && t.closest < best_tally.closest)) {
            best = &label;
            best_tally = t;
        }
    }
    return *best;
}

}  // namespace chatbot::ml
