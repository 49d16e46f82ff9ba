#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "shsr/evaluation.hpp"
#include "shsr/metafeatures.hpp"

namespace shsr::baselines {

struct ArrParams {
    int n_neighbors = 3;    // {1, 3, 10}
    double acc_d = 0.01;    // {0.001, 0.01, 0.1}
    std::size_t top_m = 1;  // >= 1
};

// remove floor(fraction * K) configurations uniformly at random
std::set<std::string> random_elimination(const std::set<std::string>& config_ids, double fraction,
                                         std::uint64_t seed);

// adjusted ratio of ratios: (perf_p/perf_q) / (1 + acc_d * ln(time_p/time_q));
// a non-positive denominator is clamped to 1e-6 and flagged
double arr_score(double perf_p, double perf_q, double time_p, double time_q, double acc_d,
                 bool* clamped = nullptr);

// ARR ranking over the training corpus: Euclidean KNN on z-scored
// meta-features, per-neighbor arithmetic mean of pairwise ARR against
// all other configurations present, geometric mean across neighbors;
// the top_m configurations by score are kept. Configurations absent on
// every neighbor rank last.
std::set<std::string> knn_recommend(const eval::Corpus& train, const meta::MetaFeatureTable& meta,
                                    const std::vector<double>& x_new, const ArrParams& params);

// full ranking, best first (exposed for tests)
std::vector<std::string> knn_rank(const eval::Corpus& train, const meta::MetaFeatureTable& meta,
                                  const std::vector<double>& x_new, const ArrParams& params);

class RandomEliminationPolicy final : public eval::Policy {
public:
    explicit RandomEliminationPolicy(double fraction) : fraction_(fraction) {}
    std::string name() const override { return "random"; }
    std::string param() const override;
    void fit(const eval::Corpus& train, const meta::MetaFeatureTable&, std::uint64_t seed) override;
    std::set<std::string> recommend(const std::string&, const meta::MetaFeatureTable&,
                                    const std::set<std::string>& configs_on_dataset) override;

private:
    double fraction_;
    std::set<std::string> kept_;
};

class KnnArrPolicy final : public eval::Policy {
public:
    explicit KnnArrPolicy(ArrParams params) : params_(params) {}
    std::string name() const override { return "knn-arr"; }
    std::string param() const override;
    void fit(const eval::Corpus& train, const meta::MetaFeatureTable& meta, std::uint64_t) override;
    std::set<std::string> recommend(const std::string& dataset_id,
                                    const meta::MetaFeatureTable& meta,
                                    const std::set<std::string>& configs_on_dataset) override;

private:
    ArrParams params_;
    const eval::Corpus* train_ = nullptr;
    const meta::MetaFeatureTable* meta_ = nullptr;
};

}  // namespace shsr::baselines
