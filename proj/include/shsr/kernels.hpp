#pragma once

#include <cstdint>
#include <vector>

namespace shsr::kernels {

// Serial is the reference path; Parallel uses OpenMP when compiled in.
// Both produce bit-identical results: per-element work is independent
// and reductions run in fixed index order.
enum class Exec { Serial, Parallel };

// Row-major n x dim point set.
struct Points {
    std::vector<double> data;
    std::size_t n = 0;
    std::size_t dim = 0;

    const double* row(std::size_t i) const { return data.data() + i * dim; }
};

double squared_distance(const double* a, const double* b, std::size_t dim);

struct KMeansResult {
    std::vector<int> assignment;
    std::vector<double> centers;  // k x dim
    double inertia = 0.0;
};

// Lloyd iterations with D^2-weighted (k-means++ style) seeding,
// `restarts` independent starts, best inertia kept.
KMeansResult kmeans(const Points& pts, int k, std::uint64_t seed, int restarts = 10,
                    int max_iter = 100, Exec exec = Exec::Parallel);

// Mean silhouette over all points; singleton clusters and zero
// denominators score 0.
double silhouette(const Points& pts, const std::vector<int>& assignment, int k,
                  Exec exec = Exec::Parallel);

}  // namespace shsr::kernels
