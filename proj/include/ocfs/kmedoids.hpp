#pragma once

#include "ocfs/error.hpp"
#include "ocfs/kernel.hpp"
#include "ocfs/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

namespace ocfs {

struct MedoidClustering {
    std::size_t k = 0;
    std::set<std::string> medoid_ids;
    std::map<std::string, std::string> assignment;  // point id -> medoid id
    double total_cost = 0.0;
    std::size_t iterations = 0;
    std::vector<double> cost_history;  // after every assignment step
};

using PointSet = std::map<std::string, std::vector<double>>;

namespace detail {

inline Matrix euclidean_distances(const std::vector<const std::vector<double>*>& pts) {
    const std::size_t n = pts.size();
    Matrix d(n, n, 0.0);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            const double v = std::sqrt(squared_distance(*pts[a], *pts[b]));
            d(a, b) = v;
            d(b, a) = v;
        }
    return d;
}

// Index of the nearest medoid for every point; medoids own themselves and
// ties go to the lowest point index.
inline std::vector<std::size_t> assign_nearest(const Matrix& d, const std::vector<std::size_t>& medoids) {
    const std::size_t n = d.rows();
    std::vector<std::size_t> owner(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = medoids.front();
        double best_d = std::numeric_limits<double>::infinity();
        for (auto m : medoids) {
            if (m == i) { best = m; best_d = -1.0; break; }
            if (d(i, m) < best_d) { best_d = d(i, m); best = m; }
        }
        owner[i] = best;
    }
    return owner;
}

inline double assignment_cost(const Matrix& d, const std::vector<std::size_t>& owner) {
    double c = 0.0;
    for (std::size_t i = 0; i < owner.size(); ++i) c += d(i, owner[i]);
    return c;
}

}  // namespace detail

/// k-medoids in the Park–Jun style: seed with the k points of smallest
/// normalized distance sum v_j = Σ_i d_ij / Σ_l d_il, then alternate
/// nearest-medoid assignment and within-cluster medoid update until the
/// medoids stop moving, then polish with single medoid/non-medoid swaps.
/// Euclidean distance, no randomness; points are visited in id order.
inline MedoidClustering kmedoids(const PointSet& points, std::size_t k, std::size_t max_iter = 100) {
    require(k >= 1, Errc::InvalidArgument, "k-medoids needs k >= 1");
    require(k <= points.size(), Errc::KTooLarge,
            "k = " + std::to_string(k) + " exceeds the number of points (" + std::to_string(points.size()) + ")");
    require(max_iter >= 1, Errc::InvalidArgument, "max_iter must be >= 1");

    std::vector<std::string> ids;
    std::vector<const std::vector<double>*> pts;
    for (const auto& [id, v] : points) {
        require(pts.empty() || v.size() == pts.front()->size(), Errc::DimMismatch, "points differ in length");
        ids.push_back(id);
        pts.push_back(&v);
    }
    const std::size_t n = ids.size();
    const Matrix d = detail::euclidean_distances(pts);

    std::vector<double> row_sum(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < n; ++l) row_sum[i] += d(i, l);
    std::vector<double> v(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i)
            if (row_sum[i] > 0.0) v[j] += d(i, j) / row_sum[i];
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<std::size_t> medoids(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(medoids.begin(), medoids.end());

    MedoidClustering out;
    out.k = k;
    std::vector<std::size_t> owner = detail::assign_nearest(d, medoids);
    out.cost_history.push_back(detail::assignment_cost(d, owner));
    for (std::size_t it = 0; it < max_iter; ++it) {
        out.iterations = it + 1;
        std::vector<std::size_t> next = medoids;
        for (std::size_t c = 0; c < medoids.size(); ++c) {
            const std::size_t cur = medoids[c];
            auto cluster_cost = [&](std::size_t cand) {
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    if (owner[i] == cur) s += d(i, cand);
                return s;
            };
            double best = cluster_cost(cur);
            for (std::size_t i = 0; i < n; ++i) {
                if (owner[i] != cur || i == cur) continue;
                const double s = cluster_cost(i);
                if (s < best) { best = s; next[c] = i; }
            }
        }
        std::sort(next.begin(), next.end());
        if (next == medoids) break;
        medoids = std::move(next);
        owner = detail::assign_nearest(d, medoids);
        out.cost_history.push_back(detail::assignment_cost(d, owner));
    }

    // Park–Jun can start with several medoids inside one tight group and then
    // never leave it. Finish with best-improvement single swaps.
    while (out.iterations < max_iter) {
        std::vector<double> near(n), second(n);
        for (std::size_t i = 0; i < n; ++i) {
            near[i] = d(i, owner[i]);
            second[i] = std::numeric_limits<double>::infinity();
            for (auto m : medoids)
                if (m != owner[i]) second[i] = std::min(second[i], d(i, m));
        }
        const double cost = detail::assignment_cost(d, owner);
        double best = cost - 1e-12 * std::max(1.0, cost);
        std::size_t best_c = k, best_h = n;
        for (std::size_t c = 0; c < k; ++c) {
            const std::size_t gone = medoids[c];
            for (std::size_t h = 0; h < n; ++h) {
                if (std::binary_search(medoids.begin(), medoids.end(), h)) continue;
                double s = 0.0;
                for (std::size_t i = 0; i < n && s < best; ++i)
                    s += std::min(d(i, h), owner[i] == gone ? second[i] : near[i]);
                if (s < best) { best = s; best_c = c; best_h = h; }
            }
        }
        if (best_c == k) break;
        medoids[best_c] = best_h;
        std::sort(medoids.begin(), medoids.end());
        owner = detail::assign_nearest(d, medoids);
        out.cost_history.push_back(detail::assignment_cost(d, owner));
        ++out.iterations;
    }

    out.total_cost = detail::assignment_cost(d, owner);
    for (auto m : medoids) out.medoid_ids.insert(ids[m]);
    for (std::size_t i = 0; i < n; ++i) out.assignment[ids[i]] = ids[owner[i]];
    return out;
}

}  // namespace ocfs
