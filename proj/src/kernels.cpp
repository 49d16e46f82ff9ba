#include "shsr/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "shsr/rng.hpp"

namespace shsr::kernels {

double squared_distance(const double* a, const double* b, std::size_t dim) {
    double s = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
        double d = a[j] - b[j];
        s += d * d;
    }
    return s;
}

namespace {

void assign_points(const Points& pts, const std::vector<double>& centers, int k,
                   std::vector<int>& assignment, std::vector<double>& dist, Exec exec) {
    const std::size_t n = pts.n, dim = pts.dim;
    auto one = [&](std::size_t i) {
        double best = std::numeric_limits<double>::infinity();
        int best_c = 0;
        for (int c = 0; c < k; ++c) {
            double d = squared_distance(pts.row(i), centers.data() + c * dim, dim);
            if (d < best) {
                best = d;
                best_c = c;
            }
        }
        assignment[i] = best_c;
        dist[i] = best;
    };
#ifdef _OPENMP
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) one(i);
        return;
    }
#endif
    (void)exec;
    for (std::size_t i = 0; i < n; ++i) one(i);
}

KMeansResult lloyd(const Points& pts, int k, Rng& rng, int max_iter, Exec exec) {
    const std::size_t n = pts.n, dim = pts.dim;
    std::vector<double> centers(k * dim, 0.0);

    // k-means++ seeding: first center uniform, then D^2-weighted
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    std::size_t first = static_cast<std::size_t>(rng.bounded(n));
    std::copy_n(pts.row(first), dim, centers.begin());
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double d = squared_distance(pts.row(i), centers.data() + (c - 1) * dim, dim);
            d2[i] = std::min(d2[i], d);
            total += d2[i];
        }
        std::size_t pick;
        if (total <= 0.0) {
            pick = static_cast<std::size_t>(rng.bounded(n));
        } else {
            double target = rng.uniform() * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        }
        std::copy_n(pts.row(pick), dim, centers.begin() + c * dim);
    }

    std::vector<int> assignment(n, -1), prev(n, -2);
    std::vector<double> dist(n, 0.0);
    for (int it = 0; it < max_iter; ++it) {
        assign_points(pts, centers, k, assignment, dist, exec);
        if (assignment == prev) break;
        prev = assignment;

        std::fill(centers.begin(), centers.end(), 0.0);
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            int c = assignment[i];
            ++counts[c];
            const double* p = pts.row(i);
            for (std::size_t j = 0; j < dim; ++j) centers[c * dim + j] += p[j];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // re-seed an empty cluster at the farthest point
                std::size_t far = 0;
                for (std::size_t i = 1; i < n; ++i)
                    if (dist[i] > dist[far]) far = i;
                std::copy_n(pts.row(far), dim, centers.begin() + c * dim);
            } else {
                for (std::size_t j = 0; j < dim; ++j)
                    centers[c * dim + j] /= static_cast<double>(counts[c]);
            }
        }
    }
    assign_points(pts, centers, k, assignment, dist, exec);

    KMeansResult r;
    r.assignment = std::move(assignment);
    r.centers = std::move(centers);
    for (std::size_t i = 0; i < n; ++i) r.inertia += dist[i];
    return r;
}

}  // namespace

KMeansResult kmeans(const Points& pts, int k, std::uint64_t seed, int restarts, int max_iter,
                    Exec exec) {
    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        KMeansResult res = lloyd(pts, k, rng, max_iter, exec);
        if (res.inertia < best.inertia) best = std::move(res);
    }
    return best;
}

double silhouette(const Points& pts, const std::vector<int>& assignment, int k, Exec exec) {
    const std::size_t n = pts.n;
    std::vector<std::size_t> cluster_size(k, 0);
    for (int a : assignment) ++cluster_size[a];

    std::vector<double> s(n, 0.0);
    auto one = [&](std::size_t i) {
        int own = assignment[i];
        if (cluster_size[own] <= 1) {
            s[i] = 0.0;
            return;
        }
        std::vector<double> sum(k, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            sum[assignment[j]] += std::sqrt(squared_distance(pts.row(i), pts.row(j), pts.dim));
        }
        double a = sum[own] / static_cast<double>(cluster_size[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            if (c == own || cluster_size[c] == 0) continue;
            b = std::min(b, sum[c] / static_cast<double>(cluster_size[c]));
        }
        if (!std::isfinite(b)) {
            s[i] = 0.0;  // only one non-empty cluster
            return;
        }
        double denom = std::max(a, b);
        s[i] = denom > 0.0 ? (b - a) / denom : 0.0;
    };
#ifdef _OPENMP
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) one(i);
    } else
#endif
    {
        for (std::size_t i = 0; i < n; ++i) one(i);
    }
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += s[i];
    return n ? mean / static_cast<double>(n) : 0.0;
}

}  // namespace shsr::kernels
