// Compares the serial reference kernels against the OpenMP path on
// synthetic data and reports timings plus agreement.
#include <chrono>
#include <cstdio>
#include <vector>

#include "shsr/kernels.hpp"
#include "shsr/rng.hpp"

using shsr::kernels::Exec;
using shsr::kernels::Points;

namespace {

Points random_points(std::size_t n, std::size_t dim, std::uint64_t seed) {
    Points p;
    p.n = n;
    p.dim = dim;
    p.data.resize(n * dim);
    shsr::Rng rng(seed);
    for (auto& v : p.data) v = rng.uniform();
    return p;
}

template <typename F>
double time_ms(F&& f) {
    auto t0 = std::chrono::steady_clock::now();
    f();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

}  // namespace

int main() {
    const std::size_t n = 2000, dim = 32;
    const int k = 8;
    Points pts = random_points(n, dim, 42);

    shsr::kernels::KMeansResult serial, parallel;
    double t_serial = time_ms([&] { serial = shsr::kernels::kmeans(pts, k, 7, 10, 100, Exec::Serial); });
    double t_parallel =
        time_ms([&] { parallel = shsr::kernels::kmeans(pts, k, 7, 10, 100, Exec::Parallel); });
    bool kmeans_match = serial.assignment == parallel.assignment && serial.inertia == parallel.inertia;

    double s_serial = 0.0, s_parallel = 0.0;
    double ts2 = time_ms([&] { s_serial = shsr::kernels::silhouette(pts, serial.assignment, k, Exec::Serial); });
    double tp2 =
        time_ms([&] { s_parallel = shsr::kernels::silhouette(pts, parallel.assignment, k, Exec::Parallel); });

    std::printf("kmeans     n=%zu dim=%zu k=%d  serial %8.1f ms  parallel %8.1f ms  speedup %.2fx  %s\n",
                n, dim, k, t_serial, t_parallel, t_serial / t_parallel,
                kmeans_match ? "match" : "MISMATCH");
    std::printf("silhouette n=%zu dim=%zu k=%d  serial %8.1f ms  parallel %8.1f ms  speedup %.2fx  %s\n",
                n, dim, k, ts2, tp2, ts2 / tp2, s_serial == s_parallel ? "match" : "MISMATCH");
    return (kmeans_match && s_serial == s_parallel) ? 0 : 1;
}
