#include <random>

#include "chatbot/error.hpp"
#include "chatbot/ml.hpp"

namespace chatbot::ml {
namespace {

std::size_t closest_centroid(const Point& p, const std::vector<Point>& centroids) {
    std::size_t best = 0;
    double best_d = squared_distance(p, centroids[0]);
    for (std::size_t c = 1; c < centroids.size(); ++c) {
        const double d = squared_distance(p, centroids[c]);
        if (d < best_d) best = c, best_d = d;
    }
    return best;
}

std::vector<std::size_t> assign(std::span<const Point> points, const std::vector<Point>& centroids) {
    std::vector<std::size_t> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = closest_centroid(points[i], centroids);
    return out;
}

double total_error(std::span<const Point> points, const std::vector<Point>& centroids,
                   const std::vector<std::size_t>& assignment) {
    double s = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        s += squared_distance(points[i], centroids[assignment[i]]);
    return s;
}

std::vector<Point> farthest_point_init(std::span<const Point> points, std::size_t k,
                                       std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
    std::vector<Point> centroids{points[pick(rng)]};
    std::vector<double> nearest(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        nearest[i] = squared_distance(points[i], centroids[0]);
    while (centroids.size() < k) {
        std::size_t far = 0;
        for (std::size_t i = 1; i < points.size(); ++i)
            if (nearest[i] > nearest[far]) far = i;
        centroids.push_back(points[far]);
        for (std::size_t i = 0; i < points.size(); ++i)
            nearest[i] = std::min(nearest[i], squared_distance(points[i], centroids.back()));
    }
    return centroids;
}

// Means of the assigned points; empty clusters take over the point farthest
// from its centroid among clusters that can spare one.
void update(std::span<const Point> points, std::vector<Point>& centroids,
            std::vector<std::size_t>& assignment) {
    const std::size_t k = centroids.size();
    const std::size_t dim = points[0].size();
    std::vector<Point> sums(k, Point(dim, 0.0));
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        ++sizes[assignment[i]];
        for (std::size_t d = 0; d < dim; ++d) sums[assignment[i]][d] += points[i][d];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (sizes[c] == 0) continue;
        for (std::size_t d = 0; d < dim; ++d) centroids[c][d] = sums[c][d] / static_cast<double>(sizes[c]);
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (sizes[c] != 0) continue;
        std::size_t far = points.size();
        double far_d = -1.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (sizes[assignment[i]] < 2) continue;
            const double d = squared_distance(points[i], centroids[assignment[i]]);
            if (d > far_d) far = i, far_d = d;
        }
        if (far == points.size()) continue;  // unreachable while k <= |points|
        --sizes[assignment[far]];
        assignment[far] = c;
        sizes[c] = 1;
        centroids[c] = points[far];
    }
}

}  // namespace

KMeansResult kmeans(std::span<const Point> points, std::size_t k, std::size_t max_iter,
                    std::uint64_t seed) {
    if (k == 0 || k > points.size()) throw InvalidArgument("k must be within [1, |points|]");
    for (const auto& p : points)
        if (p.size() != points[0].size()) throw InvalidArgument("points differ in dimension");

    KMeansResult r;
    r.centroids = farthest_point_init(points, k, seed);
    r.assignment = assign(points, r.centroids);
    r.sse_history.push_back(total_error(points, r.centroids, r.assignment));

    while (r.iterations < max_iter) {
        update(points, r.centroids, r.assignment);
        ++r.iterations;
        auto next = assign(points, r.centroids);
        r.sse_history.push_back(total_error(points, r.centroids, next));
        const bool stable = next == r.assignment;
        r.assignment = std::move(next);
        if (stable) {
            r.converged = true;
            break;
        }
    }
    r.sse = total_error(points, r.centroids, r.assignment);
    return r;
}

}  // namespace chatbot::ml
